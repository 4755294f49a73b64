import math

import numpy as np
import pytest

from services.errors import ConfigError, DomainError, FlowError, StencilError
from services.geometries import (
    CigarFlow,
    FlatFlow,
    GridSpec,
    SphereFlow,
    StencilSpec,
    WarpedFlow,
    cigar_flow,
    evolve,
    flat_flow,
    flow_equation_residual,
    load_snapshot,
    nic_report,
    provider_from_spec,
    save_snapshot,
    sphere_flow,
    warped_flow,
    warped_sectional_curvatures,
)


@pytest.fixture(scope="module")
def round_flows():
    grid = GridSpec(ns=41, save_every=4)
    return [evolve(3, "round", g, 0.02) for g in (grid, grid.refined())]


@pytest.fixture(scope="module")
def perturbed():
    return warped_flow(3, "perturbed", GridSpec(ns=41, save_every=4), t_end=0.05)


def point_data(provider, x, t, lam=0.0):
    return provider.engine().point(provider.evaluation_point(x, t), provider.params_at(x, t), lam)


def test_stencil_spec_validation():
    assert StencilSpec().width == 9
    with pytest.raises(ValueError):
        StencilSpec(width=8)
    with pytest.raises(ValueError):
        StencilSpec(width=5)
    with pytest.raises(ValueError):
        StencilSpec(method="spectral")


def test_flat_flow_is_flat():
    provider = flat_flow(3)
    x = np.array([0.2, -0.4, 1.0])
    data = point_data(provider, x, 0.7)
    assert float(data["scal"]) == 0.0
    assert np.all(np.asarray(data["riemann"]) == 0.0)
    assert flow_equation_residual(provider, x, 0.7) == 0.0


def test_sphere_scalar_curvature():
    provider = sphere_flow(3, 1.0)
    assert provider.kappa(0.1) == pytest.approx(5.0 / 3.0)
    data = point_data(provider, np.zeros(3), 0.1)
    assert float(data["scal"]) == pytest.approx(10.0, rel=1e-10)
    data = point_data(provider, np.array([0.5, -0.3, 0.8]), 0.1)
    assert float(data["scal"]) == pytest.approx(10.0, rel=1e-10)


def test_sphere_satisfies_ricci_flow():
    provider = sphere_flow(3, 1.0)
    for x, t in provider.sample_points(3, 3):
        assert flow_equation_residual(provider, x, t) <= 1e-10


def test_sphere_domain():
    provider = sphere_flow(3, 1.0)
    assert provider.time_domain() == (0.0, 0.25)
    with pytest.raises(DomainError):
        provider.require(np.zeros(3), 0.25)
    with pytest.raises(DomainError):
        provider.require(np.zeros(3), 0.0)
    with pytest.raises(DomainError):
        provider.require(np.zeros(2), 0.1)
    with pytest.raises(ValueError):
        sphere_flow(1)


def test_cigar_closed_form():
    provider = cigar_flow()
    assert provider.ancient and provider.n == 2
    data = point_data(provider, np.zeros(2), 0.0)
    assert float(data["scal"]) == pytest.approx(4.0)
    x = np.array([0.4, -1.1])
    data = point_data(provider, x, 0.3)
    a = math.exp(1.2)
    assert float(data["scal"]) == pytest.approx(4.0 * a / (a + x @ x), rel=1e-12)
    assert flow_equation_residual(provider, x, 0.3) <= 1e-12


def test_provider_from_spec():
    assert isinstance(provider_from_spec("flat:n=4"), FlatFlow)
    sphere = provider_from_spec("sphere:n=3,r0=2")
    assert isinstance(sphere, SphereFlow) and sphere.r0 == 2.0
    assert isinstance(provider_from_spec("cigar"), CigarFlow)
    assert provider_from_spec("sphere:n=3,r0=2").spec() == "sphere:n=3,r0=2"
    for bad in ("torus", "sphere:n=x", "sphere:n", "warped:/does/not/exist"):
        with pytest.raises((ConfigError, OSError)):
            provider_from_spec(bad)


@pytest.mark.slow
def test_round_profile_tracks_shrinking_sphere(round_flows):
    errors = []
    for flow in round_flows:
        t = flow.times[-1]
        rho = 1.0 - 4.0 * t
        exact_psi = math.sqrt(rho) * np.sin(flow.x)
        errors.append(np.max(np.abs(flow.psi[-1] - exact_psi)))
        assert np.max(np.abs(flow.phi[-1] - math.sqrt(rho))) < 1e-2
    assert errors[0] < 1e-2
    assert errors[0] / errors[1] == pytest.approx(4.0, abs=1.2)


@pytest.mark.slow
def test_round_profile_curvature_paths_agree(round_flows):
    provider = WarpedFlow(round_flows[0])
    flow = provider.flow
    x = np.array([15 * flow.dx, 1.2, 1.4])
    t = float(flow.times[len(flow.times) // 2])
    k_rad, c_rad, k_sph, c_sph = warped_sectional_curvatures(provider, x, t)
    expected = 1.0 / (1.0 - 4.0 * t)
    for value in (k_rad, c_rad, k_sph, c_sph):
        assert value == pytest.approx(expected, rel=1e-2)


@pytest.mark.slow
def test_perturbed_flow_is_nic(perturbed):
    points = perturbed.sample_points(3, 2)
    assert all(cert.member for cert in nic_report(perturbed, points))


@pytest.mark.slow
def test_perturbed_curvature_paths_agree(perturbed):
    x, t = perturbed.sample_points(3, 2)[1]
    k_rad, c_rad, k_sph, c_sph = warped_sectional_curvatures(perturbed, x, t)
    assert c_rad == pytest.approx(k_rad, rel=0.05)
    assert c_sph == pytest.approx(k_sph, rel=0.05)


@pytest.mark.slow
def test_perturbed_flow_satisfies_ricci_flow(perturbed):
    x, t = perturbed.sample_points(3, 2)[1]
    data = point_data(perturbed, x, t)
    assert flow_equation_residual(perturbed, x, t) <= 0.05 * np.max(np.abs(np.asarray(data["ricci"])))


@pytest.mark.slow
def test_stencil_room(perturbed):
    flow = perturbed.flow
    t = float(flow.times[2])
    with pytest.raises(StencilError):
        perturbed.params_at(np.array([2 * flow.dx, 1.0, 1.0]), t)
    with pytest.raises(StencilError):
        perturbed.params_at(np.array([0.5 * flow.length, 1.0, 1.0]), float(flow.times[0]))


def test_evolve_guards():
    with pytest.raises(FlowError):
        evolve(3, "round", GridSpec(ns=41, dt=0.01), 0.05)
    with pytest.raises(FlowError):
        evolve(3, lambda x: 1.0 + 0.0 * x, GridSpec(ns=41), 0.05)
    with pytest.raises(FlowError):
        evolve(3, lambda x: 2.0 * np.sin(x), GridSpec(ns=41), 0.05)


@pytest.mark.slow
def test_snapshot_round_trip(tmp_path, perturbed):
    path = save_snapshot(perturbed.flow, tmp_path / "flow.txt")
    assert path.read_text().splitlines()[0] == f"warped n=3 L={math.pi!r} ns=41 nt={perturbed.flow.nt}"
    loaded = load_snapshot(path)
    assert np.array_equal(loaded.psi, perturbed.flow.psi)
    assert np.array_equal(loaded.phi, perturbed.flow.phi)
    assert np.array_equal(loaded.times, perturbed.flow.times)
    provider = provider_from_spec(f"warped:{path}")
    assert isinstance(provider, WarpedFlow) and provider.n == 3


def test_snapshot_requires_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0.0 0.1\n")
    with pytest.raises(ConfigError):
        load_snapshot(path)
