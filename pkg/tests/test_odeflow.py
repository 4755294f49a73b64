import numpy as np
import pandas as pd
import pytest

from services.acvt import AlgCurvTensor, axiom_residuals, constant_curvature, load_acvt, random_cone_tensor
from services.errors import DomainError, ValidationError
from services.odeflow import IntegratorConfig, export_trajectory, integrate_ode, scaled_ode_step_term


def riccati_error(step, t_end=0.1):
    traj = integrate_ode(constant_curvature(1.0, np.eye(3)), IntegratorConfig(step=step, t_end=t_end, save_every=1000, cone_starts=1))
    assert traj.times[-1] == pytest.approx(t_end)
    return abs(traj.final.comps[0, 1, 0, 1] - 1.0 / (1.0 - 4.0 * t_end))


def test_zero_stays_zero():
    traj = integrate_ode(AlgCurvTensor.zeros(3), IntegratorConfig(step=0.1, t_end=1.0, save_every=2, cone_starts=1))
    assert len(traj.times) == 6
    assert all(state.norm() == 0.0 for state in traj.states)
    assert not traj.blew_up


def test_riccati_anchor():
    assert riccati_error(1.0e-3) <= 1.0e-6


def test_rk4_order():
    ratio = riccati_error(0.01) / riccati_error(0.005)
    assert ratio == pytest.approx(16.0, rel=0.3)


@pytest.mark.parametrize("d", [3, 4, 5])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_cone_is_invariant(d, seed):
    S0 = random_cone_tensor(seed, d)
    step = 0.01 / S0.norm()
    traj = integrate_ode(S0, IntegratorConfig(step=step, t_end=40 * step, save_every=10, cone_seed=seed))
    assert traj.worst_relative_cone_min() >= -1.0e-6
    for state in traj.states:
        assert max(axiom_residuals(state.comps).values()) <= 1.0e-8 * state.scale()


def test_blowup_guard_truncates():
    S0 = constant_curvature(1.0, np.eye(3))
    cfg = IntegratorConfig(step=1.0e-3, t_end=0.5, save_every=10, cone_starts=1)
    traj = integrate_ode(S0, cfg)
    assert traj.blew_up
    # exact blow-up at t = 1/4
    assert traj.times[-1] <= 0.25
    assert traj.scales[-1] <= cfg.blowup_guard * S0.norm()


def test_every_step_monitoring_records_nothing_for_cone_tensors():
    S0 = random_cone_tensor(7, 4)
    step = 0.01 / S0.norm()
    traj = integrate_ode(S0, IntegratorConfig(step=step, t_end=5 * step, monitor_every_step=True, cone_starts=4))
    assert traj.violations == []


def test_reaction_term():
    S = constant_curvature(1.0, np.eye(3))
    assert np.allclose(scaled_ode_step_term(S, 1.0).comps, 2.0 * S.comps)
    assert scaled_ode_step_term(AlgCurvTensor.zeros(3), 2.0).norm() == 0.0
    with pytest.raises(DomainError):
        scaled_ode_step_term(S, 0.0)


def test_reaction_term_integrating_factor():
    # k' = 4k^2 + 2k/t  =>  t^2/k = t0^2/k0 - (4/3)(t^3 - t0^3)
    t0, t1 = 1.0, 1.05
    cfg = IntegratorConfig(step=1.0e-4, t_end=t1, t_start=t0, include_reaction=True, save_every=10**6, cone_starts=1)
    traj = integrate_ode(constant_curvature(1.0, np.eye(3)), cfg)
    expected = t1**2 / (t0**2 - 4.0 / 3.0 * (t1**3 - t0**3))
    assert traj.final.comps[0, 1, 0, 1] == pytest.approx(expected, rel=1e-8)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(step=0.0, t_end=1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(step=0.1, t_end=1.0, include_reaction=True)


def test_invalid_initial_tensor():
    comps = np.zeros((3,) * 4)
    comps[0, 1, 0, 1] = 1.0
    with pytest.raises(ValidationError):
        integrate_ode(AlgCurvTensor(comps), IntegratorConfig(step=0.1, t_end=1.0))


def test_export_trajectory(tmp_path):
    S0 = random_cone_tensor(1, 3)
    step = 0.01 / S0.norm()
    traj = integrate_ode(S0, IntegratorConfig(step=step, t_end=20 * step, save_every=10, cone_starts=2))
    path = export_trajectory(traj, tmp_path / "traj.csv", tensor_dir=tmp_path / "states")
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["time", "norm", "cone_min"]
    assert len(frame) == len(traj.times) == 3
    assert np.allclose(load_acvt(tmp_path / "states" / "state_0002.acvt").comps, traj.final.comps)
