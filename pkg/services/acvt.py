# acvt.py
"""Dense algebraic curvature tensors on R^d.

Components are stored as a full d x d x d x d array; the curvature symmetries
are validated, never structurally enforced. Sign convention: R(v,w,v,w) > 0 on
the round sphere, and Ric_jl = sum_ik g^{ik} R_ijkl.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, TextIO, Union

import numpy as np

from services.errors import DimensionMismatchError, ValidationError

logger = logging.getLogger(__name__)

MAX_DIM = 16
AXIOMS = ("antisymmetry", "pair_symmetry", "first_bianchi")


@dataclass(frozen=True, eq=False)
class AlgCurvTensor:
    comps: np.ndarray

    def __post_init__(self):
        comps = np.array(self.comps, dtype=float)
        if comps.ndim != 4 or len(set(comps.shape)) != 1 or comps.shape[0] < 1:
            raise DimensionMismatchError(f"expected a d x d x d x d array, got shape {comps.shape}")
        if comps.shape[0] > MAX_DIM:
            raise DimensionMismatchError(f"dimension {comps.shape[0]} exceeds {MAX_DIM}")
        comps.setflags(write=False)
        object.__setattr__(self, "comps", comps)

    @property
    def dim(self) -> int:
        return self.comps.shape[0]

    @classmethod
    def zeros(cls, dim: int) -> "AlgCurvTensor":
        return cls(np.zeros((dim,) * 4))

    def __call__(self, a, b, c, d) -> float:
        return float(np.einsum("ijkl,i,j,k,l->", self.comps, a, b, c, d))

    def __add__(self, other: "AlgCurvTensor") -> "AlgCurvTensor":
        _check_dims(self.dim, other.dim)
        return AlgCurvTensor(self.comps + other.comps)

    def __sub__(self, other: "AlgCurvTensor") -> "AlgCurvTensor":
        _check_dims(self.dim, other.dim)
        return AlgCurvTensor(self.comps - other.comps)

    def __mul__(self, scalar: float) -> "AlgCurvTensor":
        return AlgCurvTensor(float(scalar) * self.comps)

    __rmul__ = __mul__

    def __neg__(self) -> "AlgCurvTensor":
        return AlgCurvTensor(-self.comps)

    def norm(self) -> float:
        """Euclidean (Frobenius) norm of the components."""
        return float(np.linalg.norm(self.comps))

    def scale(self) -> float:
        return float(np.max(np.abs(self.comps))) if self.comps.size else 0.0

    def embed(self, dim: int) -> "AlgCurvTensor":
        """Zero-pads the tensor into R^dim (the extra directions carry no curvature)."""
        if dim < self.dim:
            raise DimensionMismatchError(f"cannot embed dimension {self.dim} into {dim}")
        comps = np.zeros((dim,) * 4)
        d = self.dim
        comps[:d, :d, :d, :d] = self.comps
        return AlgCurvTensor(comps)


@dataclass(frozen=True, eq=False)
class ContractionMetric:
    """PSD weights g^{pq} used on dummy indices; rank deficiency is allowed."""

    comps: np.ndarray

    def __post_init__(self):
        comps = as_sym2(self.comps)
        eigenvalues = np.linalg.eigvalsh(comps)
        radius = max(float(np.max(np.abs(eigenvalues))), 1.0e-300)
        if eigenvalues[0] < -1.0e-12 * radius:
            raise ValidationError(f"contraction metric is not PSD (smallest eigenvalue {eigenvalues[0]:.3e})")
        comps.setflags(write=False)
        object.__setattr__(self, "comps", comps)

    @property
    def dim(self) -> int:
        return self.comps.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "ContractionMetric":
        return cls(np.eye(dim))

    @classmethod
    def spatial(cls, g_inv, total_dim: int = None) -> "ContractionMetric":
        """diag(g_inv, 0): spatial-only contraction on R^n x R."""
        g_inv = np.asarray(g_inv, dtype=float)
        n = g_inv.shape[0]
        total_dim = n + 1 if total_dim is None else total_dim
        comps = np.zeros((total_dim, total_dim))
        comps[:n, :n] = g_inv
        return cls(comps)


@dataclass
class ValidationReport:
    residuals: Dict[str, float]
    scale: float
    tol: float
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def max_residual(self) -> float:
        return max(self.residuals.values())


def _check_dims(*dims):
    if len(set(dims)) != 1:
        raise DimensionMismatchError(f"dimension mismatch: {dims}")


def as_sym2(matrix, tol: float = 1.0e-12) -> np.ndarray:
    """Validates a symmetric matrix (relative tolerance) and returns a float copy."""
    matrix = np.array(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {matrix.shape}")
    scale = max(float(np.max(np.abs(matrix))) if matrix.size else 0.0, 1.0)
    if np.max(np.abs(matrix - matrix.T), initial=0.0) > tol * scale:
        raise ValidationError("matrix is not symmetric")
    return matrix


def axiom_residuals(comps: np.ndarray) -> Dict[str, float]:
    """Max absolute residual of each curvature symmetry."""
    comps = np.asarray(comps)
    antisym = comps + np.einsum("jikl->ijkl", comps)
    pair = comps - np.einsum("klij->ijkl", comps)
    bianchi = comps + np.einsum("jkil->ijkl", comps) + np.einsum("kijl->ijkl", comps)
    return {
        "antisymmetry": float(np.max(np.abs(antisym), initial=0.0)),
        "pair_symmetry": float(np.max(np.abs(pair), initial=0.0)),
        "first_bianchi": float(np.max(np.abs(bianchi), initial=0.0)),
    }


def validate_acvt(T: AlgCurvTensor, tol: float = 1.0e-12) -> ValidationReport:
    """Residuals of the three curvature symmetries; violations are those above tol * max(1, max|comps|)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    residuals = axiom_residuals(T.comps)
    scale = max(1.0, T.scale())
    violations = [name for name in AXIOMS if residuals[name] > tol * scale]
    return ValidationReport(residuals=residuals, scale=scale, tol=tol, violations=violations)


def require_valid(T: AlgCurvTensor, tol: float = 1.0e-8, what: str = "tensor") -> None:
    report = validate_acvt(T, tol)
    if not report.ok:
        raise ValidationError(f"{what} violates {', '.join(report.violations)} (max residual {report.max_residual():.3e})")


def kulkarni_nomizu(A, B) -> AlgCurvTensor:
    """(A o B)_ijkl = A_ik B_jl + A_jl B_ik - A_il B_jk - A_jk B_il."""
    A = as_sym2(A)
    B = as_sym2(B)
    _check_dims(A.shape[0], B.shape[0])
    comps = (
        np.einsum("ik,jl->ijkl", A, B)
        + np.einsum("jl,ik->ijkl", A, B)
        - np.einsum("il,jk->ijkl", A, B)
        - np.einsum("jk,il->ijkl", A, B)
    )
    return AlgCurvTensor(comps)


def constant_curvature(kappa: float, g) -> AlgCurvTensor:
    """kappa * (1/2) g o g, the space form of sectional curvature kappa."""
    return 0.5 * kappa * kulkarni_nomizu(g, g)


def contract_ricci(R: AlgCurvTensor, g_inv: ContractionMetric) -> np.ndarray:
    _check_dims(R.dim, g_inv.dim)
    ric = np.einsum("ik,ijkl->jl", g_inv.comps, R.comps)
    return 0.5 * (ric + ric.T)


def contract_scal(ric, g_inv: ContractionMetric) -> float:
    ric = np.asarray(ric, dtype=float)
    _check_dims(ric.shape[0], g_inv.dim)
    return float(np.einsum("ij,ij->", g_inv.comps, ric))


def q_components(S, C, xp=np):
    """Q(S)_abcd = sum C^pq C^rs [S_abpr S_cdqs + 2 S_apcr S_bqds - 2 S_apdr S_bqcs].

    xp is the array module (numpy or jax.numpy), so the same contraction runs
    inside traced geometry code.
    """
    raised = xp.einsum("apcr,pq,rs->aqcs", S, C, C)
    pair = xp.einsum("abpr,cdpr->abcd", S, xp.einsum("pq,rs,cdqs->cdpr", C, C, S))
    cross = xp.einsum("aqcs,bqds->abcd", raised, S)
    return pair + 2.0 * cross - 2.0 * xp.einsum("abdc->abcd", cross)


def q_map(S: AlgCurvTensor, C: ContractionMetric) -> AlgCurvTensor:
    _check_dims(S.dim, C.dim)
    return AlgCurvTensor(q_components(S.comps, C.comps))


def random_psd(rng: np.random.Generator, d: int) -> np.ndarray:
    """Square of a random symmetric matrix."""
    B = rng.standard_normal((d, d))
    B = 0.5 * (B + B.T)
    return B @ B


def random_cone_tensor(seed: int, d: int, terms: int = 3) -> AlgCurvTensor:
    """Sum of A o A over random PSD A: nonnegative curvature operator, hence in K."""
    if terms < 1:
        raise ValueError("terms must be at least 1")
    rng = np.random.default_rng(seed)
    comps = np.zeros((d,) * 4)
    for _ in range(terms):
        A = random_psd(rng, d)
        comps += kulkarni_nomizu(A, A).comps
    return AlgCurvTensor(comps)


def random_acvt(rng: np.random.Generator, d: int, terms: int = 4) -> AlgCurvTensor:
    """A generic algebraic curvature tensor (not in K in general): signed sums of KN products."""
    comps = np.zeros((d,) * 4)
    for _ in range(terms):
        A = rng.standard_normal((d, d))
        B = rng.standard_normal((d, d))
        comps += kulkarni_nomizu(A + A.T, B + B.T).comps * rng.choice((-1.0, 1.0))
    return AlgCurvTensor(comps)


def tensor_norm(T: Union[AlgCurvTensor, np.ndarray], C: Union[ContractionMetric, np.ndarray]) -> float:
    """sqrt of the full contraction of T x T with C on every index."""
    comps = T.comps if isinstance(T, AlgCurvTensor) else np.asarray(T, dtype=float)
    weights = C.comps if isinstance(C, ContractionMetric) else np.asarray(C, dtype=float)
    for axis in range(comps.ndim):
        if comps.shape[axis] != weights.shape[0]:
            raise DimensionMismatchError(f"index {axis} has size {comps.shape[axis]}, metric has {weights.shape[0]}")
    raised = comps
    for axis in range(comps.ndim):
        raised = np.moveaxis(np.tensordot(weights, raised, axes=([1], [axis])), 0, axis)
    value = float(np.sum(raised * comps))
    return float(np.sqrt(max(value, 0.0)))


def pullback(S: AlgCurvTensor, L) -> AlgCurvTensor:
    """(L.S)(a,b,c,d) = S(La, Lb, Lc, Ld)."""
    L = np.asarray(L, dtype=float)
    _check_dims(S.dim, L.shape[0], L.shape[1])
    return AlgCurvTensor(np.einsum("ia,jb,kc,ld,ijkl->abcd", L, L, L, L, S.comps))


def dump_acvt(T: AlgCurvTensor, target: Union[str, Path, TextIO]) -> None:
    """Writes `acvt d=<d>` followed by `i j k l value` for every nonzero component."""
    lines = [f"acvt d={T.dim}"]
    for index in zip(*np.nonzero(T.comps)):
        i, j, k, l = (int(v) for v in index)
        lines.append(f"{i} {j} {k} {l} {float(T.comps[i, j, k, l])!r}")
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        Path(target).write_text(text)


def load_acvt(source: Union[str, Path, TextIO]) -> AlgCurvTensor:
    text = source.read() if hasattr(source, "read") else Path(source).read_text()
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith("acvt d="):
        raise ValidationError("missing `acvt d=<d>` header")
    try:
        d = int(lines[0].split("=", 1)[1])
    except ValueError as exc:
        raise ValidationError(f"bad header: {lines[0]!r}") from exc
    comps = np.zeros((d,) * 4)
    for number, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 5:
            raise ValidationError(f"line {number}: expected `i j k l value`, got {line!r}")
        i, j, k, l = (int(p) for p in parts[:4])
        if not all(0 <= index < d for index in (i, j, k, l)):
            raise ValidationError(f"line {number}: index out of range for d={d}: {line!r}")
        comps[i, j, k, l] = float(parts[4])
    return AlgCurvTensor(comps)
