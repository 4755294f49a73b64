# geometries.py
"""Ricci-flow solutions the workbench can query: closed-form flat, shrinking
sphere and cigar soliton, plus a numerically evolved rotationally symmetric flow."""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple, Union

import jax.numpy as jnp
import numpy as np
from numpy.polynomial import polynomial

from services import curvature
from services.acvt import AlgCurvTensor
from services.errors import ConfigError, DomainError, FlowError, StencilError

logger = logging.getLogger(__name__)

CFL_LIMIT = 0.4


@dataclass(frozen=True)
class StencilSpec:
    """How outer derivatives are taken and how gridded data is localized.

    method: "autodiff" (exact jets of the local metric) or "central"
    (second-order differences with `step` on the outermost derivatives).
    width: grid nodes in the polynomial window of a gridded provider.
    time_offset: snapshot offset of the central time difference.
    """

    method: str = "autodiff"
    step: float = 1.0e-3
    width: int = 9
    time_offset: int = 1

    def __post_init__(self):
        if self.method not in curvature.METHODS:
            raise ValueError(f"unknown stencil method {self.method!r}")
        if self.step <= 0:
            raise ValueError("stencil step must be positive")
        if self.width < 7 or self.width % 2 == 0:
            raise ValueError("stencil width must be odd and at least 7")
        if self.time_offset < 1:
            raise ValueError("time_offset must be at least 1")


DEFAULT_STENCIL = StencilSpec()


class GeometryProvider(ABC):
    """A Ricci-flow solution g(t) on a coordinate chart of an n-manifold.

    Subclasses supply `metric(z, params)` as a staticmethod, so the compiled
    evaluators in services.curvature are shared by every instance of a class.
    """

    kind = "abstract"
    closed_form = True
    ancient = False
    derivative_order: Optional[int] = None

    def __init__(self, n: int):
        if n < 2:
            raise ValueError("a provider needs dimension n >= 2")
        self.n = n

    @staticmethod
    @abstractmethod
    def metric(z, params):
        """Metric components at z = (x, t)."""

    @abstractmethod
    def params_at(self, x, t, stencil: StencilSpec = DEFAULT_STENCIL):
        """Parameters to pass to `metric` near (x, t)."""

    @abstractmethod
    def time_domain(self) -> Tuple[float, float]:
        pass

    @abstractmethod
    def spec(self) -> str:
        pass

    def contains_x(self, x) -> bool:
        return True

    def contains(self, x, t) -> bool:
        x = np.asarray(x, dtype=float)
        lo, hi = self.time_domain()
        return x.shape == (self.n,) and bool(np.all(np.isfinite(x))) and lo < t < hi and self.contains_x(x)

    def require(self, x, t):
        if not self.contains(x, t):
            raise DomainError(f"({np.asarray(x).tolist()}, t={t}) lies outside the domain of {self.spec()}")

    def time_step(self) -> float:
        """Time resolution of the underlying data; zero for closed-form flows."""
        return 0.0

    def engine(self, stencil: StencilSpec = DEFAULT_STENCIL):
        return curvature.compiled(type(self).metric, stencil.method, stencil.step)

    def evaluation_point(self, x, t) -> jnp.ndarray:
        return jnp.asarray(np.append(np.asarray(x, dtype=float), float(t)))

    def _chart_points(self, nx: int, radius: float) -> List[np.ndarray]:
        direction = np.array([(-0.6) ** k for k in range(self.n)])
        direction /= np.linalg.norm(direction)
        return [s * direction for s in np.linspace(-radius, radius, nx)]

    def _sample_times(self, nt: int) -> np.ndarray:
        lo, hi = self.time_domain()
        lo = max(lo, 0.0)
        hi = hi if math.isfinite(hi) else lo + 1.0
        return np.linspace(lo + 0.2 * (hi - lo), lo + 0.8 * (hi - lo), nt)

    def sample_points(self, nx: int = 5, nt: int = 5) -> List[Tuple[np.ndarray, float]]:
        """Deterministic interior (x, t) grid, nx points along a chart diagonal times nt times."""
        return [(x, float(t)) for t in self._sample_times(nt) for x in self._chart_points(nx, 0.8)]

    def __repr__(self):
        return f"<{type(self).__name__} {self.spec()}>"


class FlatFlow(GeometryProvider):
    kind = "flat"

    @staticmethod
    def metric(z, params):
        return jnp.eye(z.shape[0] - 1, dtype=z.dtype)

    def params_at(self, x, t, stencil=DEFAULT_STENCIL):
        return jnp.zeros(1)

    def time_domain(self):
        return 0.0, math.inf

    def spec(self):
        return f"flat:n={self.n}"


class SphereFlow(GeometryProvider):
    """(r0^2 - 2(n-1)t) times the round metric, in stereographic coordinates."""

    kind = "sphere"

    def __init__(self, n: int, r0: float = 1.0):
        super().__init__(n)
        if r0 <= 0:
            raise ValueError("r0 must be positive")
        self.r0 = float(r0)

    @staticmethod
    def metric(z, params):
        x, t = z[:-1], z[-1]
        n = x.shape[0]
        rho = params[0] ** 2 - 2.0 * (n - 1) * t
        return rho * 4.0 / (1.0 + x @ x) ** 2 * jnp.eye(n, dtype=z.dtype)

    def params_at(self, x, t, stencil=DEFAULT_STENCIL):
        return jnp.array([self.r0])

    def time_domain(self):
        return 0.0, self.r0**2 / (2.0 * (self.n - 1))

    def kappa(self, t: float) -> float:
        return 1.0 / (self.r0**2 - 2.0 * (self.n - 1) * t)

    def spec(self):
        return f"sphere:n={self.n},r0={self.r0:g}"


class CigarFlow(GeometryProvider):
    """Hamilton's cigar (dx^2 + dy^2)/(e^{4t} + |x|^2), a steady soliton moving by diffeomorphisms."""

    kind = "cigar"
    ancient = True

    def __init__(self):
        super().__init__(2)

    @staticmethod
    def metric(z, params):
        x, t = z[:-1], z[-1]
        return jnp.eye(2, dtype=z.dtype) / (jnp.exp(4.0 * t) + x @ x)

    def params_at(self, x, t, stencil=DEFAULT_STENCIL):
        return jnp.zeros(1)

    def time_domain(self):
        # ancient and eternal; the workbench only queries t > 0
        return 0.0, math.inf

    def soliton_field(self, x) -> np.ndarray:
        return 2.0 * np.asarray(x, dtype=float)

    def sample_points(self, nx=5, nt=5):
        return [(x, float(t)) for t in np.linspace(0.1, 1.0, nt) for x in self._chart_points(nx, 2.0)]

    def spec(self):
        return "cigar"


@dataclass
class GridSpec:
    """Uniform grid on x in [0, length]; dt defaults to cfl * dx^2."""

    ns: int = 41
    length: float = math.pi
    cfl: float = 0.2
    save_every: int = 4
    dt: Optional[float] = None

    def __post_init__(self):
        if self.ns < 11:
            raise ValueError("a warped grid needs at least 11 nodes")
        if self.length <= 0 or self.cfl <= 0 or self.save_every < 1:
            raise ValueError("grid length, cfl and save_every must be positive")

    @property
    def dx(self) -> float:
        return self.length / (self.ns - 1)

    def step(self) -> float:
        return self.dt if self.dt is not None else self.cfl * self.dx**2

    def refined(self) -> "GridSpec":
        """Half the spacing and a quarter of the time step."""
        return GridSpec(
            ns=2 * self.ns - 1,
            length=self.length,
            cfl=self.cfl,
            save_every=self.save_every,
            dt=None if self.dt is None else self.dt / 4.0,
        )


@dataclass
class GridFlow:
    """Samples of phi, psi for g = phi^2 dx^2 + psi^2 g_{S^{n-1}} on a fixed x grid."""

    n: int
    length: float
    times: np.ndarray
    psi: np.ndarray
    phi: np.ndarray
    events: List[str] = field(default_factory=list)

    @property
    def ns(self) -> int:
        return self.psi.shape[1]

    @property
    def nt(self) -> int:
        return self.times.shape[0]

    @property
    def dx(self) -> float:
        return self.length / (self.ns - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.ns)


def round_profile(r0: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    return lambda x: r0 * np.sin(x / r0)


def perturbed_profile(eps: float = 0.1) -> Callable[[np.ndarray], np.ndarray]:
    """sin x + eps sin^3 x: smooth at both poles, positively curved for small eps."""
    return lambda x: np.sin(x) + eps * np.sin(x) ** 3


PROFILES = {"round": round_profile, "perturbed": perturbed_profile}


def _pole_series(psi, sigma, nodes):
    """Fits psi ~ sigma - c sigma^3 on three nodes next to a pole."""
    s = sigma[nodes]
    return float(np.sum((s - psi[nodes]) * s**3) / np.sum(s**6))


def _flow_rates(n: int, psi: np.ndarray, phi: np.ndarray, dx: float) -> Tuple[np.ndarray, np.ndarray]:
    """(psi_t, phi_t) at the interior nodes 1..ns-2."""
    ns = psi.shape[0]
    seg = 0.5 * (phi[1:] + phi[:-1]) * dx
    sigma_left = np.concatenate([[0.0], np.cumsum(seg)])
    sigma_right = sigma_left[-1] - sigma_left

    inner = psi[1:-1]
    psi_s = (psi[2:] - psi[:-2]) / (2.0 * dx * phi[1:-1])
    flux = (psi[1:] - psi[:-1]) / seg
    psi_ss = (flux[1:] - flux[:-1]) / (phi[1:-1] * dx)
    singular = (1.0 - psi_s**2) / inner
    ratio = psi_ss / inner

    for near, fit, sigma in (
        ((1, 2), [1, 2, 3], sigma_left),
        ((ns - 2, ns - 3), [ns - 2, ns - 3, ns - 4], sigma_right),
    ):
        c = _pole_series(psi, sigma, fit)
        for node in near:
            s = sigma[node]
            singular[node - 1] = (6.0 * c * s**2 - 9.0 * c**2 * s**4) / (s - c * s**3)
            ratio[node - 1] = -6.0 * c / (1.0 - c * s**2)
            psi_ss[node - 1] = -6.0 * c * s

    psi_t = psi_ss - (n - 2) * singular
    phi_t = (n - 1) * phi[1:-1] * ratio
    return psi_t, phi_t


def _close_poles(psi: np.ndarray, phi: np.ndarray):
    psi[0] = psi[-1] = 0.0
    phi[0] = (4.0 * phi[1] - phi[2]) / 3.0
    phi[-1] = (4.0 * phi[-2] - phi[-3]) / 3.0


def evolve(
    n: int,
    initial_profile: Union[str, Callable[[np.ndarray], np.ndarray]],
    grid: GridSpec,
    t_end: float,
) -> GridFlow:
    """Explicit Euler for phi_t = (n-1) phi psi_ss/psi, psi_t = psi_ss - (n-2)(1 - psi_s^2)/psi.

    s is arclength, d/ds = phi^{-1} d/dx, and phi = 1 at t = 0. Near each pole
    the singular quotients come from the series psi ~ sigma - c sigma^3.
    Stops early (with a warning) if psi reaches zero inside or the CFL bound
    stops holding as phi shrinks.
    """
    if n < 2:
        raise ValueError("warped flows need n >= 2")
    profile = PROFILES[initial_profile]() if isinstance(initial_profile, str) else initial_profile
    x = np.linspace(0.0, grid.length, grid.ns)
    dx = grid.dx
    psi = np.asarray(profile(x), dtype=float).copy()
    phi = np.ones_like(psi)
    if np.any(psi[1:-1] <= 0) or abs(psi[0]) > 1e-12 or abs(psi[-1]) > 1e-12:
        raise FlowError("initial profile must vanish at the poles and be positive inside")
    slope = (psi[1] - psi[0]) / dx, (psi[-2] - psi[-1]) / dx
    if abs(slope[0] - 1.0) > 0.05 or abs(slope[1] - 1.0) > 0.05:
        raise FlowError("initial profile does not close smoothly at the poles (|psi_s| must be 1)")
    _close_poles(psi, phi)

    dt = grid.step()
    if dt > CFL_LIMIT * (phi.min() * dx) ** 2:
        raise FlowError(f"time step {dt:.3e} violates the CFL bound {CFL_LIMIT * dx ** 2:.3e}")

    steps = int(round(t_end / dt))
    times, psis, phis = [0.0], [psi.copy()], [phi.copy()]
    events = []
    for k in range(1, steps + 1):
        if dt > CFL_LIMIT * (phi.min() * dx) ** 2:
            events.append(f"CFL bound lost at t={(k - 1) * dt:.6g}")
            logger.warning("warped flow truncated: %s", events[-1])
            break
        psi_t, phi_t = _flow_rates(n, psi, phi, dx)
        psi[1:-1] += dt * psi_t
        phi[1:-1] += dt * phi_t
        _close_poles(psi, phi)
        if np.any(psi[1:-1] <= 0) or not np.all(np.isfinite(psi)):
            events.append(f"neck pinch at t={k * dt:.6g}")
            logger.warning("warped flow truncated: %s", events[-1])
            break
        if k % grid.save_every == 0:
            times.append(k * dt)
            psis.append(psi.copy())
            phis.append(phi.copy())
    logger.info("evolved warped flow n=%d ns=%d to t=%.4g (%d snapshots)", n, grid.ns, times[-1], len(times))
    return GridFlow(n=n, length=grid.length, times=np.array(times), psi=np.array(psis), phi=np.array(phis), events=events)


class WarpedFlow(GeometryProvider):
    """Gridded rotationally symmetric flow on S^n.

    Coordinates are (x, theta_1, ..., theta_{n-1}) with
    g = phi^2 dx^2 + psi^2 (dtheta_1^2 + sin^2 theta_1 dtheta_2^2 + ...).
    Near a query point the profiles are replaced by their interpolating
    polynomial over `width` nodes and a quadratic in time through three
    snapshots, and jax differentiates that local model.
    """

    kind = "warped"
    closed_form = False

    def __init__(self, flow: GridFlow, source: Optional[str] = None, grid: Optional[GridSpec] = None):
        super().__init__(flow.n)
        self.flow = flow
        self.source = source
        self.grid = grid
        self.derivative_order = DEFAULT_STENCIL.width - 1

    @staticmethod
    def metric(z, params):
        xi = (z[0] - params["x0"]) / params["dx"]
        tau = (z[-1] - params["t0"]) / params["dt"]

        def profile(coeffs):
            lo, mid, hi = (jnp.polyval(c, xi) for c in coeffs)
            return mid + 0.5 * tau * (hi - lo) + 0.5 * tau**2 * (hi - 2.0 * mid + lo)

        phi = profile(params["phi"])
        psi = profile(params["psi"])
        angles = z[1:-1]
        weights = jnp.concatenate([jnp.ones(1, dtype=z.dtype), jnp.cumprod(jnp.sin(angles[:-1]) ** 2)])
        return jnp.diag(jnp.concatenate([jnp.reshape(phi**2, (1,)), psi**2 * weights]))

    @property
    def grid_spacing(self) -> float:
        return self.flow.dx

    def time_step(self) -> float:
        if self.flow.nt < 2:
            return math.inf
        return float(self.flow.times[1] - self.flow.times[0])

    def time_domain(self):
        return float(self.flow.times[0]), float(self.flow.times[-1])

    def contains_x(self, x):
        return 0.0 < x[0] < self.flow.length and bool(np.all((x[1:] > 0.0) & (x[1:] < math.pi)))

    def node_index(self, x0: float) -> int:
        return int(round(x0 / self.flow.dx))

    def snapshot_index(self, t: float) -> int:
        return int(np.argmin(np.abs(self.flow.times - t)))

    def params_at(self, x, t, stencil=DEFAULT_STENCIL):
        flow = self.flow
        half = stencil.width // 2
        i = self.node_index(float(x[0]))
        if i - half < 0 or i + half > flow.ns - 1:
            raise StencilError(f"x={x[0]:.4g} has no room for a {stencil.width}-node window")
        k = self.snapshot_index(t)
        o = stencil.time_offset
        if k - o < 0 or k + o > flow.nt - 1:
            raise StencilError(f"t={t:.4g} has no room for a time offset of {o} snapshots")
        spacing = flow.times[k + o] - flow.times[k]
        if abs(flow.times[k] - flow.times[k - o] - spacing) > 1e-9 * spacing:
            raise StencilError("snapshots around t are not uniformly spaced")

        xi = np.arange(-half, half + 1, dtype=float)
        nodes = slice(i - half, i + half + 1)

        def fits(samples):
            # highest degree first, as jnp.polyval expects
            return np.array([polynomial.polyfit(xi, samples[k + j, nodes], 2 * half)[::-1] for j in (-o, 0, o)])

        return {
            "phi": jnp.asarray(fits(flow.phi)),
            "psi": jnp.asarray(fits(flow.psi)),
            "x0": jnp.asarray(i * flow.dx),
            "dx": jnp.asarray(flow.dx),
            "t0": jnp.asarray(flow.times[k]),
            "dt": jnp.asarray(spacing),
        }

    def sample_points(self, nx=5, nt=5, stencil=DEFAULT_STENCIL, t_min: float = 0.0):
        flow = self.flow
        half = stencil.width // 2
        o = stencil.time_offset
        first = max(half, int(0.15 * (flow.ns - 1)))
        nodes = np.unique(np.linspace(first, flow.ns - 1 - first, nx).round().astype(int))
        candidates = [k for k in range(o, flow.nt - o) if flow.times[k] >= max(t_min, 5.0 * self.time_step())]
        if not candidates:
            raise StencilError("flow has too few snapshots for the requested stencil")
        picks = np.unique(np.linspace(0, len(candidates) - 1, nt).round().astype(int))
        angles = [math.pi / 2 - 0.3 + 0.2 * k for k in range(self.n - 1)]
        return [
            (np.array([node * flow.dx] + angles), float(flow.times[candidates[p]]))
            for p in picks
            for node in nodes
        ]

    def spec(self):
        if self.source:
            return f"warped:{self.source}"
        return f"warped:n={self.n},ns={self.flow.ns}"


def flat_flow(n: int) -> FlatFlow:
    return FlatFlow(n)


def sphere_flow(n: int, r0: float = 1.0) -> SphereFlow:
    return SphereFlow(n, r0)


def cigar_flow() -> CigarFlow:
    return CigarFlow()


def warped_flow(
    n: int,
    initial_profile: Union[str, Callable] = "perturbed",
    grid: Optional[GridSpec] = None,
    t_end: float = 0.05,
) -> WarpedFlow:
    grid = grid or GridSpec()
    return WarpedFlow(evolve(n, initial_profile, grid, t_end), grid=grid)


def save_snapshot(flow: GridFlow, path: Union[str, Path]) -> Path:
    """Header `warped n= L= ns= nt=`, the times, nt lines of psi, then nt lines of phi."""
    lines = [f"warped n={flow.n} L={flow.length!r} ns={flow.ns} nt={flow.nt}"]
    lines.append(" ".join(repr(float(t)) for t in flow.times))
    for rows in (flow.psi, flow.phi):
        lines.extend(" ".join(repr(float(v)) for v in row) for row in rows)
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def load_snapshot(path: Union[str, Path]) -> GridFlow:
    lines = [line for line in Path(path).read_text().splitlines() if line.strip()]
    if not lines or not lines[0].startswith("warped "):
        raise ConfigError(f"{path}: missing `warped n=<n> L=<L> ns=<ns> nt=<nt>` header")
    try:
        header = dict(item.split("=", 1) for item in lines[0].split()[1:])
        n, length, ns, nt = int(header["n"]), float(header["L"]), int(header["ns"]), int(header["nt"])
        times = np.array([float(v) for v in lines[1].split()])
        rows = np.array([[float(v) for v in line.split()] for line in lines[2:]])
    except (KeyError, ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: malformed snapshot ({exc})") from exc
    if times.shape != (nt,) or rows.shape not in ((nt, ns), (2 * nt, ns)):
        raise ConfigError(f"{path}: expected {nt} times and {nt} or {2 * nt} rows of {ns} samples")
    psi = rows[:nt]
    if rows.shape[0] == 2 * nt:
        phi = rows[nt:]
    else:
        # psi-only files come from an arclength-parametrized solver
        phi = np.ones_like(psi)
    return GridFlow(n=n, length=length, times=times, psi=psi, phi=phi)


def _parse_params(text: str) -> dict:
    params = {}
    for item in filter(None, text.split(",")):
        if "=" not in item:
            raise ConfigError(f"expected key=value in provider spec, got {item!r}")
        key, value = item.split("=", 1)
        params[key.strip()] = value.strip()
    return params


def provider_from_spec(spec: str) -> GeometryProvider:
    """`sphere:n=3,r0=1`, `flat:n=3`, `cigar`, `warped:<snapshot>` or `warped:n=3,ns=41,t_end=0.05,profile=perturbed`."""
    kind, _, rest = spec.strip().partition(":")
    try:
        if kind == "flat":
            return flat_flow(int(_parse_params(rest).get("n", 3)))
        if kind == "sphere":
            params = _parse_params(rest)
            return sphere_flow(int(params.get("n", 3)), float(params.get("r0", 1.0)))
        if kind == "cigar":
            return cigar_flow()
        if kind == "warped":
            if rest and "=" not in rest:
                return WarpedFlow(load_snapshot(rest), source=rest)
            params = _parse_params(rest)
            grid = GridSpec(ns=int(params.get("ns", 41)), save_every=int(params.get("save_every", 4)))
            return warped_flow(
                int(params.get("n", 3)),
                params.get("profile", "perturbed"),
                grid,
                float(params.get("t_end", 0.05)),
            )
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad provider spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown provider kind {kind!r} in {spec!r}")


def flow_equation_residual(provider: GeometryProvider, x, t, stencil: StencilSpec = DEFAULT_STENCIL) -> float:
    """max |d_t g + 2 Ric| at (x, t)."""
    provider.require(x, t)
    z = provider.evaluation_point(x, t)
    residual = provider.engine(stencil).flow(z, provider.params_at(x, t, stencil))
    return float(np.max(np.abs(np.asarray(residual))))


def warped_sectional_curvatures(provider: WarpedFlow, x, t) -> Tuple[float, float, float, float]:
    """(K_rad formula, K_rad coordinate, K_sph formula, K_sph coordinate) at the grid point nearest (x, t).

    The formula path uses -psi_ss/psi and (1 - psi_s^2)/psi^2 from grid
    differences; the coordinate path reads the Riemann tensor of the local
    metric model. K_sph is nan for n = 2.
    """
    flow = provider.flow
    i = provider.node_index(float(x[0]))
    k = provider.snapshot_index(t)
    if i < 1 or i > flow.ns - 2:
        raise StencilError("sectional curvatures need an interior node")
    psi, phi, dx = flow.psi[k], flow.phi[k], flow.dx
    seg_right = 0.5 * (phi[i + 1] + phi[i]) * dx
    seg_left = 0.5 * (phi[i] + phi[i - 1]) * dx
    psi_s = (psi[i + 1] - psi[i - 1]) / (2.0 * dx * phi[i])
    psi_ss = ((psi[i + 1] - psi[i]) / seg_right - (psi[i] - psi[i - 1]) / seg_left) / (phi[i] * dx)
    k_rad = -psi_ss / psi[i]
    k_sph = (1.0 - psi_s**2) / psi[i] ** 2 if provider.n > 2 else math.nan

    point = np.array(x, dtype=float)
    point[0] = i * dx
    t_node = float(flow.times[k])
    data = provider.engine().point(provider.evaluation_point(point, t_node), provider.params_at(point, t_node), 0.0)
    g = np.asarray(data["g"])
    R = np.asarray(data["riemann"])
    coord_rad = R[0, 1, 0, 1] / (g[0, 0] * g[1, 1])
    coord_sph = R[1, 2, 1, 2] / (g[1, 1] * g[2, 2]) if provider.n > 2 else math.nan
    return float(k_rad), float(coord_rad), float(k_sph), float(coord_sph)


def nic_report(provider: GeometryProvider, points: Sequence[Tuple[np.ndarray, float]], starts: int = 8, seed: int = 0):
    """Cone membership of the spatial curvature tensor, embedded in R^{n+1}, at each sample point.

    Nonnegative isotropic curvature of M x R^2 is checked, never assumed;
    failures are logged as warnings and returned with the certificates.
    """
    from services.cone import cone_membership

    certificates = []
    engine = provider.engine()
    for x, t in points:
        data = engine.point(provider.evaluation_point(x, t), provider.params_at(x, t), 0.0)
        spatial = AlgCurvTensor(np.asarray(data["riemann"])).embed(provider.n + 1)
        cert = cone_membership(spatial, starts=starts, seed=seed)
        if not cert.member:
            logger.warning("NIC fails for %s at x=%s t=%.4g (min %.3e)", provider.spec(), np.round(x, 4).tolist(), t, cert.min_value)
        certificates.append(cert)
    return certificates
