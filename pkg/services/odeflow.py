# odeflow.py
"""Fixed-step RK4 for dS/dt = Q(S) on algebraic curvature tensors, with cone monitoring."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd

from services.acvt import AlgCurvTensor, ContractionMetric, dump_acvt, q_components, require_valid
from services.cone import cone_membership
from services.errors import DomainError

logger = logging.getLogger(__name__)


@dataclass
class IntegratorConfig:
    step: float
    t_end: float
    save_every: int = 10
    blowup_guard: float = 1.0e4
    contraction: Optional[ContractionMetric] = None
    t_start: float = 0.0
    include_reaction: bool = False
    monitor_every_step: bool = False
    cone_starts: int = 8
    cone_seed: int = 0

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.t_end < self.t_start:
            raise ValueError("t_end must not precede t_start")
        if self.save_every < 1:
            raise ValueError("save_every must be at least 1")
        if self.blowup_guard <= 1:
            raise ValueError("blowup_guard must exceed 1")
        if self.include_reaction and self.t_start <= 0:
            raise ValueError("the (2/t) S term needs t_start > 0")


@dataclass
class OdeTrajectory:
    times: List[float] = field(default_factory=list)
    states: List[AlgCurvTensor] = field(default_factory=list)
    cone_mins: List[float] = field(default_factory=list)
    scales: List[float] = field(default_factory=list)
    blew_up: bool = False
    violations: List[float] = field(default_factory=list)

    @property
    def final(self) -> AlgCurvTensor:
        return self.states[-1]

    def worst_relative_cone_min(self) -> float:
        """min over saved states of cone_min / max(|S|, 1e-300)."""
        return min((m / max(s, 1.0e-300) for m, s in zip(self.cone_mins, self.scales)), default=0.0)


def scaled_ode_step_term(S: AlgCurvTensor, t: float) -> AlgCurvTensor:
    """(2/t) S."""
    if t <= 0:
        raise DomainError("the (2/t) S term needs t > 0")
    return (2.0 / t) * S


def _rk4_step(rate, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = rate(t, y)
    k2 = rate(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rate(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rate(t + h, y + h * k3)
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_ode(S0: AlgCurvTensor, cfg: IntegratorConfig) -> OdeTrajectory:
    """RK4 on components with f(S) = Q(S) (+ (2/t) S if enabled), truncated at the blow-up guard."""
    require_valid(S0, 1.0e-8, "initial tensor")
    contraction = cfg.contraction or ContractionMetric.identity(S0.dim)
    weights = contraction.comps

    def rate(t, y):
        value = q_components(y, weights)
        if cfg.include_reaction:
            value = value + scaled_ode_step_term(AlgCurvTensor(y), t).comps
        return value

    trajectory = OdeTrajectory()

    def record(t, y):
        state = AlgCurvTensor(y)
        cert = cone_membership(state, starts=cfg.cone_starts, seed=cfg.cone_seed)
        trajectory.times.append(t)
        trajectory.states.append(state)
        trajectory.cone_mins.append(cert.min_value)
        trajectory.scales.append(state.norm())

    y = S0.comps.copy()
    t = cfg.t_start
    record(t, y)
    limit = cfg.blowup_guard * S0.norm()
    steps = int(round((cfg.t_end - cfg.t_start) / cfg.step))
    for k in range(1, steps + 1):
        y = _rk4_step(rate, t, y, cfg.step)
        t = cfg.t_start + k * cfg.step
        norm = float(np.linalg.norm(y))
        if not np.isfinite(norm) or (limit > 0 and norm > limit):
            trajectory.blew_up = True
            logger.warning("blow-up guard triggered at t=%.6g (|S| = %.3e); trajectory truncated", t, norm)
            break
        if cfg.monitor_every_step:
            cert = cone_membership(AlgCurvTensor(y), starts=cfg.cone_starts, seed=cfg.cone_seed)
            if not cert.member:
                trajectory.violations.append(t)
                logger.warning("cone violation at t=%.6g (min %.3e)", t, cert.min_value)
        if k % cfg.save_every == 0 or k == steps:
            record(t, y)
    logger.debug("integrated %d steps, %d saved states", steps, len(trajectory.times))
    return trajectory


def export_trajectory(traj: OdeTrajectory, path: Union[str, Path], tensor_dir: Optional[Union[str, Path]] = None) -> Path:
    """CSV with columns time, norm, cone_min; optionally one .acvt file per saved state."""
    path = Path(path)
    frame = pd.DataFrame({"time": traj.times, "norm": traj.scales, "cone_min": traj.cone_mins})
    frame.to_csv(path, index=False)
    if tensor_dir is not None:
        tensor_dir = Path(tensor_dir)
        tensor_dir.mkdir(parents=True, exist_ok=True)
        for index, state in enumerate(traj.states):
            dump_acvt(state, tensor_dir / f"state_{index:04d}.acvt")
    return path
