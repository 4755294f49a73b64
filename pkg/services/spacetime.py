# spacetime.py
"""Space-time curvature package over a GeometryProvider.

At each (x, t) the spatial curvature R, the first-order quantity
P_ijk = D_i Ric_jk - D_j Ric_ik and the second-order quantity M_ij are
assembled into one algebraic curvature tensor S on R^n x R (tau last). The
connection D~ and the metric h = g + dt^2/t^2 live here too, together with
the residual checks, the Harnack forms and the soliton and transport tools
built on them.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.linalg

from services.acvt import (
    AlgCurvTensor,
    ContractionMetric,
    kulkarni_nomizu,
    q_map,
    require_valid,
    tensor_norm,
)
from services.cone import ConeCertificate, cone_membership
from services.curvature import spacetime_components
from services.errors import DimensionMismatchError, DomainError, RicciDefinitenessError
from services.geometries import DEFAULT_STENCIL, GeometryProvider, StencilSpec

logger = logging.getLogger(__name__)

DEFAULT_T_MIN = 1.0e-3
DEFINITENESS_TOL = 1.0e-12


class HarnackMode(str, Enum):
    WITH_1_OVER_T = "with_1_over_t"
    ANCIENT = "ancient"

    @property
    def lam(self) -> float:
        """Coefficient of every 1/t term."""
        return 1.0 if self is HarnackMode.WITH_1_OVER_T else 0.0


class SolitonMode(str, Enum):
    EXPANDING = "expanding"
    STEADY = "steady"

    @property
    def lam(self) -> float:
        return 1.0 if self is SolitonMode.EXPANDING else 0.0


@dataclass
class SpaceTimePoint:
    x: np.ndarray
    t: float
    mode: HarnackMode
    g: np.ndarray
    g_inv: np.ndarray
    ric: np.ndarray
    scal: float
    dscal: np.ndarray
    hess_scal: np.ndarray
    lap_scal: float
    R: AlgCurvTensor
    P: np.ndarray
    M: np.ndarray
    christoffel: np.ndarray
    connection: np.ndarray
    h: np.ndarray
    provider: str = ""

    @property
    def n(self) -> int:
        return self.g.shape[0]

    @property
    def c(self) -> float:
        return 0.5 * self.mode.lam / self.t

    @property
    def ric_norm2(self) -> float:
        return float(np.einsum("ik,jl,ij,kl->", self.g_inv, self.g_inv, self.ric, self.ric))

    @property
    def dt_scal(self) -> float:
        """d/dt scal = Lap scal + 2 |Ric|^2 under Ricci flow."""
        return self.lap_scal + 2.0 * self.ric_norm2

    def m_for(self, mode: HarnackMode) -> np.ndarray:
        """M with the 1/(2t) Ric term of `mode` in place of this point's."""
        if mode is self.mode:
            return self.M
        return self.M + 0.5 * (mode.lam - self.mode.lam) / self.t * self.ric


@dataclass
class HarnackReport:
    value: float
    v: np.ndarray
    w: np.ndarray
    mode: HarnackMode
    components: Tuple[float, float, float]

    @property
    def m_term(self) -> float:
        return self.components[0]

    @property
    def p_term(self) -> float:
        return self.components[1]

    @property
    def r_term(self) -> float:
        return self.components[2]


@dataclass
class SolitonReport:
    mode: SolitonMode
    V: List[np.ndarray]
    residual_norm: float
    is_soliton: bool
    points: List[np.ndarray] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)


@dataclass
class EvolutionTerms:
    S: AlgCurvTensor
    dt_S: np.ndarray
    laplacian: np.ndarray
    reaction: AlgCurvTensor
    residual: AlgCurvTensor

    def relative(self) -> float:
        """Residual norm over max(|Q~(S)|, 1)."""
        return self.residual.norm() / max(self.reaction.norm(), 1.0)


def _mode(mode) -> HarnackMode:
    return mode if isinstance(mode, HarnackMode) else HarnackMode(mode)


def time_floor(provider: GeometryProvider, stencil: StencilSpec = DEFAULT_STENCIL, t_min: float = DEFAULT_T_MIN) -> float:
    """Smallest t at which the 1/t coefficients are resolved by the data and stencil."""
    floor = max(t_min, 5.0 * provider.time_step())
    if stencil.method == "central":
        floor = max(floor, 5.0 * stencil.step)
    return floor


def _require_resolved(provider, x, t, stencil, t_min):
    provider.require(x, t)
    floor = time_floor(provider, stencil, t_min)
    if t < floor:
        raise DomainError(f"t={t:.4g} is below the resolved floor {floor:.4g} for {provider.spec()}")


def compute_point(
    provider: GeometryProvider,
    x,
    t: float,
    mode=HarnackMode.WITH_1_OVER_T,
    stencil: StencilSpec = DEFAULT_STENCIL,
) -> SpaceTimePoint:
    mode = _mode(mode)
    if t <= 0:
        raise DomainError("space-time quantities need t > 0")
    provider.require(x, t)
    x = np.asarray(x, dtype=float)
    data = provider.engine(stencil).point(provider.evaluation_point(x, t), provider.params_at(x, t, stencil), mode.lam)
    data = {key: np.asarray(value) for key, value in data.items()}
    return SpaceTimePoint(
        x=x,
        t=float(t),
        mode=mode,
        g=data["g"],
        g_inv=data["g_inv"],
        ric=0.5 * (data["ricci"] + data["ricci"].T),
        scal=float(data["scal"]),
        dscal=data["dscal"],
        hess_scal=data["hess_scal"],
        lap_scal=float(data["lap_scal"]),
        R=AlgCurvTensor(data["riemann"]),
        P=data["P"],
        M=0.5 * (data["M"] + data["M"].T),
        christoffel=data["christoffel"],
        connection=data["connection"],
        h=data["h"],
        provider=provider.spec(),
    )


def assemble_spacetime_S(pt: SpaceTimePoint) -> AlgCurvTensor:
    S = AlgCurvTensor(spacetime_components(pt.R.comps, pt.P, pt.M, xp=np))
    require_valid(S, 1.0e-8, "space-time tensor")
    return S


def evolution_terms(
    provider: GeometryProvider,
    x,
    t: float,
    stencil: StencilSpec = DEFAULT_STENCIL,
    mode=HarnackMode.WITH_1_OVER_T,
    t_min: float = DEFAULT_T_MIN,
) -> EvolutionTerms:
    mode = _mode(mode)
    _require_resolved(provider, x, t, stencil, t_min)
    data = provider.engine(stencil).evolution(provider.evaluation_point(x, t), provider.params_at(x, t, stencil), mode.lam)
    S = AlgCurvTensor(np.asarray(data["S"]))
    dt_S = np.asarray(data["dt_S"])
    laplacian = np.asarray(data["laplacian"])
    reaction = q_map(S, ContractionMetric.spatial(np.asarray(data["g_inv"])))
    residual = dt_S - laplacian - 4.0 * float(data["c"]) * S.comps - reaction.comps
    return EvolutionTerms(S=S, dt_S=dt_S, laplacian=laplacian, reaction=reaction, residual=AlgCurvTensor(residual))


def evolution_residual(
    provider: GeometryProvider,
    x,
    t: float,
    stencil: StencilSpec = DEFAULT_STENCIL,
    mode=HarnackMode.WITH_1_OVER_T,
    t_min: float = DEFAULT_T_MIN,
) -> AlgCurvTensor:
    """D~_tau S - Lap~ S - (2/t) S - Q~(S); the 2/t term is dropped in ancient mode."""
    return evolution_terms(provider, x, t, stencil, mode, t_min).residual


def hamilton_identity_residual(
    provider: GeometryProvider,
    x,
    t: float,
    stencil: StencilSpec = DEFAULT_STENCIL,
    mode=HarnackMode.WITH_1_OVER_T,
    t_min: float = DEFAULT_T_MIN,
) -> np.ndarray:
    """M_ij + D^m P_imj - Ric^{lm} R_iljm - (1/2t) Ric_ij."""
    mode = _mode(mode)
    _require_resolved(provider, x, t, stencil, t_min)
    residual = provider.engine(stencil).hamilton(provider.evaluation_point(x, t), provider.params_at(x, t, stencil), mode.lam)
    return np.asarray(residual)


def h_evolution_check(
    provider: GeometryProvider,
    x,
    t: float,
    v,
    stencil: StencilSpec = DEFAULT_STENCIL,
    t_min: float = DEFAULT_T_MIN,
) -> Tuple[float, float, float, float]:
    """(|D~_tau h - Lap~ h - h/t|_h, 2t^2|Ric|^2 + 2t scal + n/2, |D~_v h|_h^2, 2t^2 Ric^2(v,v) + 2t Ric(v,v) + g(v,v)/2)."""
    _require_resolved(provider, x, t, stencil, t_min)
    v = np.asarray(v, dtype=float)
    if v.shape != (provider.n,):
        raise DimensionMismatchError(f"v must have {provider.n} components")
    z = provider.evaluation_point(x, t)
    params = provider.params_at(x, t, stencil)
    engine = provider.engine(stencil)
    terms = {key: np.asarray(value) for key, value in engine.h_terms(z, params, v).items()}
    pt = compute_point(provider, x, t, HarnackMode.WITH_1_OVER_T, stencil)

    h_inv = np.linalg.inv(terms["h"])
    lhs_norm = tensor_norm(terms["lhs"], h_inv)
    grad_lhs = tensor_norm(terms["directional"], h_inv) ** 2

    n = pt.n
    rhs = 2.0 * t**2 * pt.ric_norm2 + 2.0 * t * pt.scal + 0.5 * n
    ric_v = pt.ric @ v
    grad_rhs = 2.0 * t**2 * ric_v @ pt.g_inv @ ric_v + 2.0 * t * v @ ric_v + 0.5 * v @ pt.g @ v
    return lhs_norm, float(rhs), grad_lhs, float(grad_rhs)


def harnack_matrix(pt: SpaceTimePoint, v, mode=None) -> np.ndarray:
    """H_v(w, w') = M(w, w') + P(v, w, w') + P(v, w', w) + R(v, w, v, w')."""
    mode = pt.mode if mode is None else _mode(mode)
    v = np.asarray(v, dtype=float)
    P_v = np.einsum("ijk,i->jk", pt.P, v)
    return pt.m_for(mode) + P_v + P_v.T + np.einsum("ajbk,a,b->jk", pt.R.comps, v, v)


def harnack_form(pt: SpaceTimePoint, v, w, mode=None) -> HarnackReport:
    """M(w,w) + 2 P(v,w,w) + R(v,w,v,w), with its three terms."""
    mode = pt.mode if mode is None else _mode(mode)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape != (pt.n,) or w.shape != (pt.n,):
        raise DimensionMismatchError(f"v and w must have {pt.n} components")
    m_term = float(w @ pt.m_for(mode) @ w)
    p_term = float(np.einsum("ijk,i,j,k->", pt.P, v, w, w))
    r_term = pt.R(v, w, v, w)
    return HarnackReport(value=m_term + 2.0 * p_term + r_term, v=v, w=w, mode=mode, components=(m_term, p_term, r_term))


def trace_harnack(pt: SpaceTimePoint, v, mode=None) -> float:
    """d/dt scal + (1/t) scal + 2 <d scal, v> + 2 Ric(v, v); no 1/t term in ancient mode."""
    mode = pt.mode if mode is None else _mode(mode)
    v = np.asarray(v, dtype=float)
    c = 0.5 * mode.lam / pt.t
    return float(pt.dt_scal + 2.0 * c * pt.scal + 2.0 * pt.dscal @ v + 2.0 * v @ pt.ric @ v)


def _ricci_eigenvalues(pt: SpaceTimePoint) -> np.ndarray:
    return scipy.linalg.eigh(pt.ric, pt.g, eigvals_only=True)


def require_positive_ricci(pt: SpaceTimePoint, tol: float = DEFINITENESS_TOL) -> np.ndarray:
    eigenvalues = _ricci_eigenvalues(pt)
    scale = max(float(np.max(np.abs(eigenvalues))), 1.0)
    if eigenvalues[0] < -tol * scale:
        raise RicciDefinitenessError(
            f"Ric has a negative eigenvalue at x={pt.x.tolist()}, t={pt.t:.4g}; the trace form is unbounded below",
            point=(pt.x, pt.t),
            eigenvalues=eigenvalues,
        )
    if eigenvalues[0] <= tol * scale:
        raise RicciDefinitenessError(
            f"Ric is degenerate at x={pt.x.tolist()}, t={pt.t:.4g}",
            point=(pt.x, pt.t),
            eigenvalues=eigenvalues,
        )
    return eigenvalues


def trace_harnack_min(pt: SpaceTimePoint, mode=None) -> Tuple[float, np.ndarray]:
    """Minimum of trace_harnack over v and the minimizer v* = -(1/2) Ric^{-1} d scal."""
    mode = pt.mode if mode is None else _mode(mode)
    require_positive_ricci(pt)
    v_star = -0.5 * scipy.linalg.solve(pt.ric, pt.dscal, assume_a="pos")
    c = 0.5 * mode.lam / pt.t
    value = pt.dt_scal + 2.0 * c * pt.scal + pt.dscal @ v_star
    return float(value), v_star


def equality_vector(pt: SpaceTimePoint, mode=None, tol: float = 1.0e-6) -> Optional[np.ndarray]:
    """The element v of N_(x,t), if the trace minimum vanishes there, else None.

    At v* the matrix form must then vanish for every w; a mismatch is logged.
    """
    value, v_star = trace_harnack_min(pt, mode)
    scale = max(abs(pt.dt_scal), abs(pt.scal) / pt.t, 1.0)
    if abs(value) > tol * scale:
        return None
    residual = float(np.max(np.abs(harnack_matrix(pt, v_star, mode))))
    if residual > tol * scale:
        logger.warning("trace minimum vanishes at x=%s t=%.4g but the matrix form does not (%.3e)", pt.x.tolist(), pt.t, residual)
    return v_star


def _min_over_w(pt, v, mode) -> Tuple[float, np.ndarray]:
    H = harnack_matrix(pt, v, mode)
    values, vectors = scipy.linalg.eigh(0.5 * (H + H.T), pt.g, subset_by_index=[0, 0])
    return float(values[0]), vectors[:, 0]


def _min_over_v(pt, w, mode, v):
    """Stationary v of R(v,w,v,w) + 2P(v,w,w) for fixed w, or v unchanged if there is none."""
    A = np.einsum("ajbk,j,k->ab", pt.R.comps, w, w)
    A = 0.5 * (A + A.T)
    b = np.einsum("ijk,j,k->i", pt.P, w, w)
    eigenvalues = np.linalg.eigvalsh(A)
    scale = max(float(np.max(np.abs(eigenvalues))), 1.0e-300)
    if eigenvalues[0] < -1.0e-10 * scale:
        logger.warning("R(., w, ., w) is indefinite at x=%s t=%.4g; the Harnack form is unbounded in v", pt.x.tolist(), pt.t)
        return v
    solution, _, _, _ = np.linalg.lstsq(A, -b, rcond=None)
    if np.linalg.norm(A @ solution + b) > 1.0e-8 * max(np.linalg.norm(b), 1.0):
        logger.debug("stationarity system singular at x=%s; keeping v", pt.x.tolist())
        return v
    return solution


def harnack_min(
    pt: SpaceTimePoint,
    starts: int = 8,
    seed: int = 0,
    mode=None,
    max_rounds: int = 100,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Best-found minimum of harnack_form over |w|_g = 1 and unconstrained v.

    Alternates the exact w-step (smallest generalized eigenvalue of H_v against
    g) with the exact v-step (the stationarity system of the quadratic in v).
    Starts: v = 0, v = v* of the trace form when Ric > 0, and random v.
    """
    mode = pt.mode if mode is None else _mode(mode)
    rng = np.random.default_rng(seed)
    candidates = [np.zeros(pt.n)]
    try:
        candidates.append(trace_harnack_min(pt, mode)[1])
    except RicciDefinitenessError:
        pass
    candidates.extend(rng.standard_normal(pt.n) for _ in range(max(starts - len(candidates), 0)))

    best = (math.inf, None, None)
    for v in candidates:
        value, w = _min_over_w(pt, v, mode)
        for _ in range(max_rounds):
            v_next = _min_over_v(pt, w, mode, v)
            value_next, w_next = _min_over_w(pt, v_next, mode)
            stalled = value_next > value - 1.0e-14 * max(abs(value), 1.0)
            if value_next <= value:
                value, v, w = value_next, v_next, w_next
            if stalled:
                break
        if value < best[0]:
            best = (value, v, w)
    return best


def _soliton_check(provider, x, t0, mode: SolitonMode, stencil):
    pt = compute_point(provider, x, t0, HarnackMode.WITH_1_OVER_T, stencil)
    require_positive_ricci(pt)
    data = provider.engine(stencil).soliton(provider.evaluation_point(x, t0), provider.params_at(x, t0, stencil), mode.lam)
    return np.asarray(data["V"]), math.sqrt(max(float(data["norm2"]), 0.0))


def soliton_detect(
    provider: GeometryProvider,
    t0: float,
    sample_points: Sequence,
    mode=SolitonMode.STEADY,
    tol: float = 1.0e-6,
    stencil: StencilSpec = DEFAULT_STENCIL,
) -> SolitonReport:
    """Solves d_i scal + 2 Ric_ij V^j = 0 and measures |D_i V^j - Ric_i^j - c delta_i^j| at each sample."""
    mode = mode if isinstance(mode, SolitonMode) else SolitonMode(mode)
    fields, residuals, points = [], [], []
    for x in sample_points:
        x = np.asarray(x, dtype=float)
        V, residual = _soliton_check(provider, x, t0, mode, stencil)
        fields.append(V)
        residuals.append(residual)
        points.append(x)
        logger.debug("soliton residual at x=%s: %.3e", x.tolist(), residual)
    residual_norm = max(residuals) if residuals else 0.0
    return SolitonReport(
        mode=mode,
        V=fields,
        residual_norm=residual_norm,
        is_soliton=residual_norm <= tol,
        points=points,
        residuals=residuals,
    )


def parallel_transport(
    provider: GeometryProvider,
    t0: float,
    path,
    v0,
    mode=HarnackMode.WITH_1_OVER_T,
    steps: int = 32,
    stencil: StencilSpec = DEFAULT_STENCIL,
) -> np.ndarray:
    """Transports a space-time vector with D~ along a spatial polyline at fixed t0 (RK4, `steps` per segment)."""
    mode = _mode(mode)
    path = np.asarray(path, dtype=float)
    if path.ndim != 2 or path.shape[1] != provider.n or path.shape[0] < 2:
        raise DimensionMismatchError(f"path must be an m x {provider.n} array with m >= 2")
    v = np.asarray(v0, dtype=float).copy()
    if v.shape != (provider.n + 1,):
        raise DimensionMismatchError(f"v0 must have {provider.n + 1} components (tau last)")
    engine = provider.engine(stencil)

    def connection_at(x):
        if not provider.contains(x, t0):
            raise DomainError(f"transport path leaves the domain at x={x.tolist()}")
        return np.asarray(engine.connection(provider.evaluation_point(x, t0), provider.params_at(x, t0, stencil), mode.lam))

    def rate(conn, velocity, vec):
        return -np.einsum("cab,a,b->c", conn, velocity, vec)

    for start, end in zip(path[:-1], path[1:]):
        velocity = np.append(end - start, 0.0)
        h = 1.0 / steps
        conn_start = connection_at(start)
        for k in range(steps):
            conn_mid = connection_at(start + (k + 0.5) * h * (end - start))
            conn_end = connection_at(start + (k + 1) * h * (end - start))
            k1 = rate(conn_start, velocity, v)
            k2 = rate(conn_mid, velocity, v + 0.5 * h * k1)
            k3 = rate(conn_mid, velocity, v + 0.5 * h * k2)
            k4 = rate(conn_end, velocity, v + h * k3)
            v = v + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            conn_start = conn_end
    return v


def h_wedge_h(pt: SpaceTimePoint) -> AlgCurvTensor:
    return kulkarni_nomizu(pt.h, pt.h)


def kn_perturbation(pt: SpaceTimePoint, C: float, starts: int = 16, seed: int = 0) -> Tuple[AlgCurvTensor, ConeCertificate, float]:
    """S + (C/4) t h o h, its cone certificate, and |S - R|_h / t."""
    if C < 0:
        raise ValueError("C must be nonnegative")
    S = assemble_spacetime_S(pt)
    perturbed = S + 0.25 * C * pt.t * h_wedge_h(pt)
    certificate = cone_membership(perturbed, starts=starts, seed=seed)
    deviation = S - pt.R.embed(pt.n + 1)
    ratio = tensor_norm(deviation, np.linalg.inv(pt.h)) / pt.t
    return perturbed, certificate, ratio


def residual_study(
    providers: Sequence[GeometryProvider],
    x,
    t: float,
    quantity: str = "evolution",
    stencil: StencilSpec = DEFAULT_STENCIL,
    t_min: float = DEFAULT_T_MIN,
) -> pd.DataFrame:
    """Residual norms at one point over successively refined providers, with observed convergence rates."""
    if quantity not in ("evolution", "hamilton"):
        raise ValueError(f"unknown residual quantity {quantity!r}")
    rows = []
    for provider in providers:
        if quantity == "evolution":
            norm = evolution_residual(provider, x, t, stencil, t_min=t_min).norm()
        else:
            norm = float(np.linalg.norm(hamilton_identity_residual(provider, x, t, stencil, t_min=t_min)))
        spacing = getattr(provider, "grid_spacing", float("nan"))
        rate = float("nan")
        if rows and norm > 0 and rows[-1]["residual_norm"] > 0:
            rate = math.log(rows[-1]["residual_norm"] / norm) / math.log(rows[-1]["h_grid"] / spacing)
        rows.append({"h_grid": spacing, "residual_norm": norm, "rate": rate})
        logger.info("%s residual %.3e at h=%.4g (rate %.3f)", quantity, norm, spacing, rate)
    return pd.DataFrame(rows, columns=["h_grid", "residual_norm", "rate"])
