# cone.py
"""The cone K of algebraic curvature tensors with nonnegative isotropic form."""

import json
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from services.acvt import (
    AlgCurvTensor,
    ContractionMetric,
    axiom_residuals,
    constant_curvature,
    q_map,
    validate_acvt,
)
from services.errors import DimensionMismatchError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_STARTS = 32
MAX_ROUNDS = 500
STALL_ROUNDS = 3
STALL_TOL = 1.0e-14


@dataclass(frozen=True, eq=False)
class FourTuple:
    v1: np.ndarray
    v2: np.ndarray
    v3: np.ndarray
    v4: np.ndarray

    @classmethod
    def from_array(cls, rows) -> "FourTuple":
        rows = np.asarray(rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] != 4:
            raise DimensionMismatchError(f"expected a 4 x d array, got shape {rows.shape}")
        return cls(*(rows[i].copy() for i in range(4)))

    @property
    def dim(self) -> int:
        return self.v1.shape[0]

    def as_array(self) -> np.ndarray:
        return np.stack([self.v1, self.v2, self.v3, self.v4])

    def normalized(self) -> "FourTuple":
        first = np.sqrt(self.v1 @ self.v1 + self.v2 @ self.v2)
        second = np.sqrt(self.v3 @ self.v3 + self.v4 @ self.v4)
        if first == 0 or second == 0:
            raise ValueError("cannot normalize a tuple with a vanishing pair")
        return FourTuple(self.v1 / first, self.v2 / first, self.v3 / second, self.v4 / second)

    def swapped(self) -> "FourTuple":
        """(v2, -v1, v4, -v3)."""
        return FourTuple(self.v2, -self.v1, self.v4, -self.v3)

    def __add__(self, other: "FourTuple") -> "FourTuple":
        return FourTuple.from_array(self.as_array() + other.as_array())

    def __mul__(self, scalar: float) -> "FourTuple":
        return FourTuple.from_array(scalar * self.as_array())

    __rmul__ = __mul__


@dataclass
class ConeCertificate:
    min_value: float
    argmin: FourTuple
    starts: int
    converged_starts: int
    member: bool
    tol: float
    scale: float
    nondegeneracy: float

    def to_dict(self) -> dict:
        return {
            "min_value": self.min_value,
            "member": self.member,
            "tol": self.tol,
            "argmin": self.argmin.as_array().tolist(),
            "starts": self.starts,
            "converged_starts": self.converged_starts,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass
class BlockMatrixBundle:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    e: np.ndarray
    f: np.ndarray
    big: np.ndarray

    def min_eigenvalue(self) -> float:
        return float(scipy.linalg.eigh(self.big, eigvals_only=True, subset_by_index=[0, 0])[0])


def _check_tuple(S: AlgCurvTensor, t: FourTuple):
    if t.dim != S.dim:
        raise DimensionMismatchError(f"tuple lives in R^{t.dim}, tensor in R^{S.dim}")


def isotropic_form(S: AlgCurvTensor, t: FourTuple) -> float:
    """S(v1,v3,v1,v3) + S(v1,v4,v1,v4) + S(v2,v3,v2,v3) + S(v2,v4,v2,v4) - 2 S(v1,v2,v3,v4)."""
    _check_tuple(S, t)
    v1, v2, v3, v4 = t.v1, t.v2, t.v3, t.v4
    return S(v1, v3, v1, v3) + S(v1, v4, v1, v4) + S(v2, v3, v2, v3) + S(v2, v4, v2, v4) - 2.0 * S(v1, v2, v3, v4)


def frame_form(S: AlgCurvTensor, frame, lam: float, mu: float) -> float:
    """Four-frame form; equals isotropic_form at (e1, mu e2, e3, lam e4)."""
    frame = np.asarray(frame, dtype=float)
    if frame.shape != (4, S.dim):
        raise DimensionMismatchError(f"expected a 4 x {S.dim} frame, got shape {frame.shape}")
    if np.max(np.abs(frame @ frame.T - np.eye(4))) > 1.0e-10:
        raise ValidationError("frame is not orthonormal")
    e1, e2, e3, e4 = frame
    return (
        S(e1, e3, e1, e3)
        + lam**2 * S(e1, e4, e1, e4)
        + mu**2 * S(e2, e3, e2, e3)
        + lam**2 * mu**2 * S(e2, e4, e2, e4)
        - 2.0 * lam * mu * S(e1, e2, e3, e4)
    )


def tuple_nondegeneracy(t: FourTuple) -> float:
    """|v1^v3 + v4^v2|^2 + |v1^v4 + v2^v3|^2; zero on the trivial zeros of every isotropic form."""

    def wedge(x, y):
        return np.outer(x, y) - np.outer(y, x)

    first = wedge(t.v1, t.v3) + wedge(t.v4, t.v2)
    second = wedge(t.v1, t.v4) + wedge(t.v2, t.v3)
    return 0.5 * float(np.sum(first * first) + np.sum(second * second))


def _min_eigvec(matrix: np.ndarray) -> Tuple[float, np.ndarray]:
    value, vector = scipy.linalg.eigh(matrix, subset_by_index=[0, 0])
    return float(value[0]), vector[:, 0]


def _first_pair_matrix(S: np.ndarray, v3: np.ndarray, v4: np.ndarray) -> np.ndarray:
    # quadratic form in (v1, v2) for fixed (v3, v4)
    diag = np.einsum("ajbk,j,k->ab", S, v3, v3) + np.einsum("ajbk,j,k->ab", S, v4, v4)
    cross = np.einsum("abjk,j,k->ab", S, v3, v4)
    return np.block([[diag, -cross], [-cross.T, diag]])


def _second_pair_matrix(S: np.ndarray, v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    # quadratic form in (v3, v4) for fixed (v1, v2)
    diag = np.einsum("iajb,i,j->ab", S, v1, v1) + np.einsum("iajb,i,j->ab", S, v2, v2)
    cross = np.einsum("ijab,i,j->ab", S, v1, v2)
    return np.block([[diag, -cross], [-cross.T, diag]])


def _unit_pair(rng: np.random.Generator, d: int) -> np.ndarray:
    x = rng.standard_normal(2 * d)
    return x / np.linalg.norm(x)


def _alternate(S: np.ndarray, start: np.ndarray, scale: float) -> Tuple[float, np.ndarray, bool]:
    """Alternating exact minimization from a starting (v3, v4); returns (value, 4 x d tuple, converged)."""
    d = S.shape[0]
    second = start
    best = np.inf
    stalled = 0
    first = np.zeros(2 * d)
    for _ in range(MAX_ROUNDS):
        _, first = _min_eigvec(_first_pair_matrix(S, second[:d], second[d:]))
        value, second = _min_eigvec(_second_pair_matrix(S, first[:d], first[d:]))
        if best - value < STALL_TOL * scale:
            stalled += 1
        else:
            stalled = 0
        best = min(best, value)
        if stalled >= STALL_ROUNDS:
            return value, np.stack([first[:d], first[d:], second[:d], second[d:]]), True
    return value, np.stack([first[:d], first[d:], second[:d], second[d:]]), False


def cone_membership(
    S: AlgCurvTensor,
    starts: int = DEFAULT_STARTS,
    tol: float = 1.0e-8,
    seed: int = 0,
    initial: Optional[Sequence[FourTuple]] = None,
) -> ConeCertificate:
    """Best-found minimum of the isotropic form over normalized four-tuples.

    A negative minimum with its tuple is an exact certificate of non-membership;
    membership only means no violation was found.
    """
    if starts <= 0:
        raise ValueError("starts must be positive")
    report = validate_acvt(S, 1.0e-8)
    if not report.ok:
        raise ValidationError(f"not an algebraic curvature tensor: {', '.join(report.violations)}")

    comps = S.comps
    d = S.dim
    scale = S.norm()
    seeds = np.random.SeedSequence(seed).spawn(starts)
    seeds_start = [_unit_pair(np.random.default_rng(s), d) for s in seeds]
    for guess in initial or ():
        arr = guess.normalized().as_array()
        seeds_start.append(np.concatenate([arr[2], arr[3]]))

    best_value, best_tuple = np.inf, None
    converged = 0
    for start in seeds_start:
        value, rows, ok = _alternate(comps, start, max(scale, 1.0e-300))
        converged += int(ok)
        if value < best_value:
            best_value, best_tuple = value, rows

    argmin = FourTuple.from_array(best_tuple)
    min_value = isotropic_form(S, argmin)
    certificate = ConeCertificate(
        min_value=min_value,
        argmin=argmin,
        starts=len(seeds_start),
        converged_starts=converged,
        member=bool(min_value >= -tol * scale),
        tol=tol,
        scale=scale,
        nondegeneracy=tuple_nondegeneracy(argmin),
    )
    logger.debug("cone membership d=%d min=%.3e member=%s", d, min_value, certificate.member)
    return certificate


def frame_scan_min(S: AlgCurvTensor, samples: int = 200, seed: int = 0, lattice: int = 9) -> float:
    """Minimum of frame_form over random orthonormal four-frames and a lam, mu lattice in [-1, 1]."""
    if S.dim < 4:
        raise DimensionMismatchError("four-frames need dimension at least 4")
    rng = np.random.default_rng(seed)
    grid = np.linspace(-1.0, 1.0, lattice)
    best = np.inf
    for _ in range(samples):
        q, _ = np.linalg.qr(rng.standard_normal((S.dim, 4)))
        frame = q.T
        e1, e2, e3, e4 = frame
        r13 = S(e1, e3, e1, e3)
        r14 = S(e1, e4, e1, e4)
        r23 = S(e2, e3, e2, e3)
        r24 = S(e2, e4, e2, e4)
        r1234 = S(e1, e2, e3, e4)
        lam, mu = np.meshgrid(grid, grid, indexing="ij")
        values = r13 + lam**2 * r14 + mu**2 * r23 + lam**2 * mu**2 * r24 - 2.0 * lam * mu * r1234
        best = min(best, float(values.min()))
    return best


def second_variation_form(S: AlgCurvTensor, v: FourTuple, w: FourTuple) -> float:
    _check_tuple(S, v)
    _check_tuple(S, w)
    v1, v2, v3, v4 = v.v1, v.v2, v.v3, v.v4
    w1, w2, w3, w4 = w.v1, w.v2, w.v3, w.v4
    return (
        S(w1, v3, w1, v3) + S(w1, v4, w1, v4) + S(w2, v3, w2, v3) + S(w2, v4, w2, v4)
        + S(v1, w3, v1, w3) + S(v1, w4, v1, w4) + S(v2, w3, v2, w3) + S(v2, w4, v2, w4)
        - 2.0 * (S(v3, w1, v1, w3) + S(v4, w1, v2, w3))
        - 2.0 * (S(v4, w1, v1, w4) - S(v3, w1, v2, w4))
        + 2.0 * (S(v4, w2, v1, w3) - S(v3, w2, v2, w3))
        - 2.0 * (S(v3, w2, v1, w4) + S(v4, w2, v2, w4))
        - 2.0 * S(w1, w2, v3, v4)
        - 2.0 * S(v1, v2, w3, w4)
    )


def second_variation_fd(S: AlgCurvTensor, v: FourTuple, w: FourTuple, step: float = 1.0e-3) -> float:
    """Mean s^2 coefficient of I(v + s w) and I(v' + s w), v' = (v2, -v1, v4, -v3).

    Uses the fourth-order central stencil for the second derivative, exact for
    the quartic s -> I(v + s w) up to roundoff.
    """

    def second_derivative(base: FourTuple) -> float:
        f = [isotropic_form(S, base + k * step * w) for k in (-2, -1, 0, 1, 2)]
        return (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * step**2)

    return 0.25 * (second_derivative(v) + second_derivative(v.swapped()))


def build_block_matrix(S: AlgCurvTensor, v: FourTuple, n: Optional[int] = None) -> BlockMatrixBundle:
    """Blocks a..f over the spatial basis e_0..e_{n-1} of R^n x R and the 4n x 4n matrix."""
    _check_tuple(S, v)
    n = S.dim - 1 if n is None else n
    if n < 2 or n > S.dim:
        raise DimensionMismatchError(f"spatial dimension {n} invalid for a tensor on R^{S.dim}")
    T = S.comps
    v1, v2, v3, v4 = v.v1, v.v2, v.v3, v.v4

    def mixed(x, y):
        # S(x, e_p, y, e_q)
        return np.einsum("ipjq,i,j->pq", T, x, y)[:n, :n]

    def pair(x, y):
        # S(x, y, e_p, e_q)
        return np.einsum("ijpq,i,j->pq", T, x, y)[:n, :n]

    a = mixed(v1, v1) + mixed(v2, v2)
    b = mixed(v3, v3) + mixed(v4, v4)
    c = mixed(v3, v1) + mixed(v4, v2)
    d = mixed(v4, v1) - mixed(v3, v2)
    e = pair(v1, v2)
    f = pair(v3, v4)
    big = np.block(
        [
            [b, -f, -c, -d],
            [f, b, d, -c],
            [-c.T, d.T, a, -e],
            [-d.T, -c.T, e, a],
        ]
    )
    return BlockMatrixBundle(a=a, b=b, c=c, d=d, e=e, f=f, big=big)


def trace_inequality_value(bundle: BlockMatrixBundle) -> float:
    """sum a_pq b_pq - sum e_pq f_pq - sum c_pq c_qp - sum d_pq d_qp."""
    return float(
        np.sum(bundle.a * bundle.b)
        - np.sum(bundle.e * bundle.f)
        - np.sum(bundle.c * bundle.c.T)
        - np.sum(bundle.d * bundle.d.T)
    )


def q_boundary_decomposition(S: AlgCurvTensor, v: FourTuple, n: Optional[int] = None, bianchi_tol: float = 1.0e-10) -> Tuple[float, float]:
    """Both sides of the sum-of-squares identity for the isotropic form of Q(S)."""
    _check_tuple(S, v)
    n = S.dim - 1 if n is None else n
    bianchi = axiom_residuals(S.comps)["first_bianchi"]
    if bianchi > bianchi_tol * max(1.0, S.scale()):
        raise ValidationError(f"first Bianchi residual {bianchi:.3e} above tolerance")
    weights = np.zeros((S.dim, S.dim))
    weights[:n, :n] = np.eye(n)
    lhs = isotropic_form(q_map(S, ContractionMetric(weights)), v)

    T = S.comps

    def pair(x, y):
        return np.einsum("ijpq,i,j->pq", T, x, y)[:n, :n]

    bundle = build_block_matrix(S, v, n)
    first = pair(v.v1, v.v3) - pair(v.v2, v.v4)
    second = pair(v.v1, v.v4) + pair(v.v2, v.v3)
    rhs = float(np.sum(first**2) + np.sum(second**2)) + 2.0 * trace_inequality_value(bundle)
    return lhs, rhs


def deform_to_boundary(
    S: AlgCurvTensor,
    seed: int = 0,
    starts: int = 8,
    max_iterations: int = 50,
    window: float = 1.0e-10,
) -> Tuple[AlgCurvTensor, FourTuple, float]:
    """Moves S in K onto the boundary of K along -theta * (1/2)(g o g).

    theta follows the ratio iteration theta <- I_S(t) / I_C(t) at the current
    minimizing tuple t, which decreases monotonically onto the boundary value.
    Every iterate keeps a tuple on which the isotropic form of S - theta C
    vanishes exactly; the loop stops once the membership minimum is no lower
    than -window * |S|. Returns the boundary tensor, that tuple and theta.
    """
    d = S.dim
    C = constant_curvature(1.0, np.eye(d))
    scale = max(S.norm(), 1.0e-300)
    rng = np.random.default_rng(seed)

    theta, witness = np.inf, None
    for _ in range(64):
        t = FourTuple.from_array(rng.standard_normal((4, d))).normalized()
        denominator = isotropic_form(C, t)
        if denominator > 1.0e-3:
            ratio = isotropic_form(S, t) / denominator
            if ratio < theta:
                theta, witness = ratio, t
    if witness is None:
        raise ValidationError("no nondegenerate tuple found to start the boundary deformation")

    for iteration in range(max_iterations):
        candidate = S - theta * C
        cert = cone_membership(candidate, starts=starts, seed=seed + iteration, initial=[witness])
        if cert.min_value >= -window * scale:
            logger.debug("boundary reached after %d iterations, theta=%.12g", iteration + 1, theta)
            return candidate, witness, theta
        ratio = isotropic_form(S, cert.argmin) / isotropic_form(C, cert.argmin)
        if not ratio < theta:
            break
        theta, witness = ratio, cert.argmin
    logger.warning("boundary deformation stopped before the window was reached (theta=%.12g)", theta)
    return S - theta * C, witness, theta
