"""Selfdual spaces with antiunitary involution and Bogoliubov maps between them.

A truncated selfdual space of ``k`` modes is C^(2k) with the conjugation
J(x1, x2) = (conj(x2), conj(x1)) acting blockwise, the distinguished basis
projection P1 = diag(1, 0), and, in the bosonic case, the nondegenerate
form kappa(f, g) = <f, C g> with C = diag(1, -1).  A Bogoliubov map is a
conjugation-equivariant isometry (fermionic) or kappa-isometry (bosonic)
from a 2n-dimensional space into a 2m-dimensional one with m >= n.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CAR",
    "CCR",
    "SelfdualSpace",
    "BogoliubovMap",
    "IndexData",
    "ValidationReport",
    "StructuralError",
    "NumericalValidityError",
    "PreconditionError",
    "ResourceError",
    "components",
    "assemble_blocks",
    "conjugate_operator",
    "kappa_adjoint",
    "index_data",
    "validate",
    "pseudo_inverse",
    "kernel_basis",
    "cokernel_basis",
    "psd_sqrt",
    "psd_inv_sqrt",
    "deterministic_onb",
    "real_basis",
    "operator_to_dict",
    "operator_from_dict",
    "save_operator",
    "load_operator",
]

CAR = "CAR"
CCR = "CCR"

DEFAULT_RANK_TOL = 1e-10


class StructuralError(ValueError):
    """Malformed input: wrong shapes, kinds, or schema."""


class NumericalValidityError(ValueError):
    """Structurally sound input that fails a numerical contract."""


class PreconditionError(ValueError):
    """An operation was called outside its stated domain."""


class ResourceError(RuntimeError):
    """A requested truncation exceeds the configured resource cap."""


@dataclass(frozen=True)
class SelfdualSpace:
    """A truncated selfdual space: ``modes`` particle modes, total dimension 2*modes."""

    kind: str
    modes: int

    def __post_init__(self) -> None:
        if self.kind not in (CAR, CCR):
            raise StructuralError(f"kind must be CAR or CCR, got {self.kind!r}")
        if self.modes < 1:
            raise StructuralError(f"modes must be positive, got {self.modes}")

    @property
    def total_dim(self) -> int:
        return 2 * self.modes

    def p1(self) -> np.ndarray:
        """Orthogonal projection onto the particle block."""
        d = np.zeros(self.total_dim)
        d[: self.modes] = 1.0
        return np.diag(d).astype(complex)

    def p2(self) -> np.ndarray:
        return np.eye(self.total_dim, dtype=complex) - self.p1()

    def c_matrix(self) -> np.ndarray:
        """Signature matrix C = P1 - P2; kappa(f, g) = <f, C g>."""
        d = np.ones(self.total_dim)
        d[self.modes :] = -1.0
        return np.diag(d).astype(complex)

    def conjugate_vector(self, f: np.ndarray) -> np.ndarray:
        """Antiunitary involution f -> f*."""
        k = self.modes
        out = np.empty_like(f, dtype=complex)
        out[:k] = np.conj(f[k:])
        out[k:] = np.conj(f[:k])
        return out

    def kappa(self, f: np.ndarray, g: np.ndarray) -> complex:
        """kappa(f, g) = <f, C g>; only meaningful for CCR spaces."""
        k = self.modes
        return complex(np.vdot(f[:k], g[:k]) - np.vdot(f[k:], g[k:]))


def _as_matrix(matrix: np.ndarray) -> np.ndarray:
    out = np.array(matrix, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class BogoliubovMap:
    """A conjugation-equivariant map between two selfdual spaces of the same kind.

    The matrix has shape (target.total_dim, source.total_dim).  Validity as an
    isometry / kappa-isometry is checked by :func:`validate`, not on
    construction, so invalid candidates can be represented and diagnosed.
    """

    source: SelfdualSpace
    target: SelfdualSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.source.kind != self.target.kind:
            raise StructuralError(
                f"kind mismatch: source {self.source.kind}, target {self.target.kind}"
            )
        if self.target.modes < self.source.modes:
            raise StructuralError(
                "target must have at least as many modes as the source "
                f"({self.target.modes} < {self.source.modes})"
            )
        expected = (self.target.total_dim, self.source.total_dim)
        mat = np.asarray(self.matrix)
        if mat.shape != expected:
            raise StructuralError(f"matrix shape {mat.shape}, expected {expected}")
        object.__setattr__(self, "matrix", _as_matrix(mat))

    @property
    def kind(self) -> str:
        return self.source.kind

    @property
    def is_square(self) -> bool:
        return self.source.modes == self.target.modes


def components(v: BogoliubovMap) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Split into the four block components (V11, V12, V21, V22).

    V11 maps particle coordinates to particle coordinates, V12 hole to
    particle, V21 particle to hole, V22 hole to hole; each block is
    (target.modes x source.modes).
    """
    m, n = v.target.modes, v.source.modes
    a = v.matrix
    return a[:m, :n], a[:m, n:], a[m:, :n], a[m:, n:]


def assemble_blocks(
    source: SelfdualSpace,
    target: SelfdualSpace,
    v11: np.ndarray,
    v12: np.ndarray,
    v21: np.ndarray,
    v22: np.ndarray,
) -> BogoliubovMap:
    """Inverse of :func:`components`."""
    top = np.hstack([v11, v12])
    bot = np.hstack([v21, v22])
    return BogoliubovMap(source, target, np.vstack([top, bot]))


def conjugate_operator(a: np.ndarray, source: SelfdualSpace, target: SelfdualSpace) -> np.ndarray:
    """J_target A J_source for a (2m x 2n) matrix; blockwise swap-and-conjugate."""
    m, n = target.modes, source.modes
    a = np.asarray(a)
    a11, a12 = a[:m, :n], a[:m, n:]
    a21, a22 = a[m:, :n], a[m:, n:]
    top = np.hstack([np.conj(a22), np.conj(a21)])
    bot = np.hstack([np.conj(a12), np.conj(a11)])
    return np.vstack([top, bot])


def kappa_adjoint(a: np.ndarray, source: SelfdualSpace, target: SelfdualSpace) -> np.ndarray:
    """Adjoint with respect to kappa: C_source A^H C_target, shape (2n x 2m)."""
    cs = source.c_matrix()
    ct = target.c_matrix()
    return cs @ a.conj().T @ ct


@dataclass(frozen=True)
class IndexData:
    """Index invariants of a Bogoliubov map.

    index = source_dim - target_dim (never positive here), defect = -index/2,
    statistics_dimension = 2**defect for CAR and 1 or inf for CCR.
    """

    index: int
    defect: int
    statistics_dimension: float

    def as_dict(self) -> dict:
        sd = self.statistics_dimension
        return {
            "index": self.index,
            "defect": self.defect,
            "statistics_dimension": None if math.isinf(sd) else int(sd),
        }


def index_data(v: BogoliubovMap) -> IndexData:
    ind = v.source.total_dim - v.target.total_dim
    defect = -ind // 2
    if v.kind == CAR:
        dim = float(2**defect)
    else:
        dim = 1.0 if defect == 0 else math.inf
    return IndexData(index=ind, defect=defect, statistics_dimension=dim)


@dataclass(frozen=True)
class ValidationReport:
    kind: str
    isometry_residual: float
    conjugation_residual: float
    tol: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "isometry_residual": self.isometry_residual,
            "conjugation_residual": self.conjugation_residual,
            "tol": self.tol,
            "passed": self.passed,
        }


def validate(v: BogoliubovMap, tol: float = 1e-10) -> ValidationReport:
    """Check the two defining relations and report the residuals in operator norm.

    Fermionic maps must satisfy V^H V = 1, bosonic ones dagger(V) V = 1 with
    dagger the kappa-adjoint; both must commute with the conjugations.
    """
    eye = np.eye(v.source.total_dim)
    if v.kind == CAR:
        gram = v.matrix.conj().T @ v.matrix
    else:
        gram = kappa_adjoint(v.matrix, v.source, v.target) @ v.matrix
    iso = float(np.linalg.norm(gram - eye, 2))
    conj_res = float(
        np.linalg.norm(conjugate_operator(v.matrix, v.source, v.target) - v.matrix, 2)
    )
    return ValidationReport(
        kind=v.kind,
        isometry_residual=iso,
        conjugation_residual=conj_res,
        tol=tol,
        passed=bool(iso <= tol and conj_res <= tol),
    )


def _rank_cutoff(s: np.ndarray, rank_tol: float) -> float:
    # blocks of isometries and projectors live at scale O(1); tying the
    # cutoff to max(1, s_max) makes numerically-zero matrices rank zero
    # instead of promoting their noise floor to full rank
    smax = float(s[0]) if s.size else 0.0
    return rank_tol * max(1.0, smax)


def pseudo_inverse(a: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Moore-Penrose inverse with a singular value cutoff.

    Singular values at or below the cutoff are treated as zero, so the result
    inverts A on its numerical range and vanishes on the numerical cokernel.
    """
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return a.conj().T.copy()
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros_like(a.conj().T)
    cut = _rank_cutoff(s, rank_tol)
    inv = np.where(s > cut, 1.0 / np.where(s > 0, s, 1.0), 0.0)
    return vh.conj().T @ np.diag(inv).astype(complex) @ u.conj().T


def kernel_basis(a: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the numerical null space, as columns.

    Always returns an array of shape (cols, r); r may be zero.
    """
    a = np.asarray(a, dtype=complex)
    rows, cols = a.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=complex)
    if rows == 0:
        return np.eye(cols, dtype=complex)
    u, s, vh = np.linalg.svd(a, full_matrices=True)
    rank = int(np.sum(s > _rank_cutoff(s, rank_tol)))
    return vh.conj().T[:, rank:]


def cokernel_basis(a: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis of ker A^H (the orthogonal complement of ran A)."""
    return kernel_basis(np.asarray(a, dtype=complex).conj().T, rank_tol)


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Positive square root of a Hermitian positive semidefinite matrix."""
    w, q = np.linalg.eigh(np.asarray(a, dtype=complex))
    w = np.clip(w, 0.0, None)
    return (q * np.sqrt(w)) @ q.conj().T


def psd_inv_sqrt(a: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Inverse positive square root with a relative eigenvalue floor.

    Eigenvalues below rank_tol times the largest are floored there before
    inversion, which keeps near-singular Gram matrices diagnosable instead of
    amplifying noise.
    """
    w, q = np.linalg.eigh(np.asarray(a, dtype=complex))
    top = float(w[-1]) if w.size else 0.0
    if top <= 0.0:
        raise NumericalValidityError("matrix is not positive semidefinite")
    floor = rank_tol * top
    w = np.clip(w, floor, None)
    return (q / np.sqrt(w)) @ q.conj().T


def deterministic_onb(columns: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Canonical orthonormal basis of the column span, stable across runs.

    The span's orthogonal projector is formed from an SVD (rank decided by the
    singular value cutoff), then its columns are Gram-Schmidt processed in coordinate
    order; each basis vector's phase is fixed by making its first coordinate of
    modulus above the cutoff real and positive.  Ties between degenerate
    singular directions are thereby resolved by lowest coordinate index.
    """
    cols = np.asarray(columns, dtype=complex)
    dim = cols.shape[0]
    if cols.size == 0:
        return np.zeros((dim, 0), dtype=complex)
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    rank = int(np.sum(s > _rank_cutoff(s, rank_tol)))
    if rank == 0:
        return np.zeros((dim, 0), dtype=complex)
    proj = u[:, :rank] @ u[:, :rank].conj().T
    basis: list[np.ndarray] = []
    for i in range(dim):
        vec = proj[:, i].copy()
        for b in basis:
            vec -= b * np.vdot(b, vec)
        norm = np.linalg.norm(vec)
        if norm <= math.sqrt(rank_tol):
            continue
        vec /= norm
        j = int(np.argmax(np.abs(vec) > math.sqrt(rank_tol)))
        phase = vec[j] / abs(vec[j])
        basis.append(vec * np.conj(phase))
        if len(basis) == rank:
            break
    return np.stack(basis, axis=1)


def real_basis(space: SelfdualSpace) -> np.ndarray:
    """Unitary whose columns are the conjugation-fixed modes.

    Column i is (e_i + e_i*)/sqrt(2) and column modes+i is i(e_i - e_i*)/sqrt(2);
    both are fixed points of the involution.  Conjugation-equivariant maps are
    exactly those with a real matrix in this basis.
    """
    k = space.modes
    r = np.zeros((2 * k, 2 * k), dtype=complex)
    inv = 1.0 / math.sqrt(2.0)
    for i in range(k):
        r[i, i] = inv
        r[k + i, i] = inv
        r[i, k + i] = 1j * inv
        r[k + i, k + i] = -1j * inv
    return r


def diagonal_embedding(source: SelfdualSpace, target: SelfdualSpace) -> BogoliubovMap:
    """The canonical mode-shift isometry between truncation levels.

    Particle mode i of the source goes to particle mode i + (m - n) of the
    target and likewise for hole modes, so the defect modes are the lowest
    m - n particle and hole modes.  Works for either kind.
    """
    if source.kind != target.kind:
        raise StructuralError("kind mismatch")
    n, m = source.modes, target.modes
    if m < n:
        raise StructuralError("target must have at least as many modes")
    shift = np.zeros((m, n))
    shift[m - n:, :] = np.eye(n)
    mat = np.zeros((2 * m, 2 * n), dtype=complex)
    mat[:m, :n] = shift
    mat[m:, n:] = shift
    return BogoliubovMap(source=source, target=target, matrix=mat)


def operator_to_dict(v: BogoliubovMap) -> dict:
    """Serialize to the interchange schema; floats survive a round trip bit-exactly."""
    mat = [
        [[float(z.real), float(z.imag)] for z in row]
        for row in np.asarray(v.matrix)
    ]
    return {
        "kind": v.kind,
        "source_modes": v.source.modes,
        "target_modes": v.target.modes,
        "matrix": mat,
    }


def operator_from_dict(data: dict) -> BogoliubovMap:
    try:
        kind = data["kind"]
        n = int(data["source_modes"])
        m = int(data["target_modes"])
        raw = data["matrix"]
    except (KeyError, TypeError) as exc:
        raise StructuralError(f"malformed operator record: {exc}") from exc
    if kind not in (CAR, CCR):
        raise StructuralError(f"kind must be CAR or CCR, got {kind!r}")
    try:
        mat = np.array(
            [[complex(entry[0], entry[1]) for entry in row] for row in raw],
            dtype=complex,
        )
    except (TypeError, IndexError, ValueError) as exc:
        raise StructuralError(f"malformed matrix entries: {exc}") from exc
    if mat.shape != (2 * m, 2 * n):
        raise StructuralError(f"matrix shape {mat.shape}, expected {(2 * m, 2 * n)}")
    return BogoliubovMap(SelfdualSpace(kind, n), SelfdualSpace(kind, m), mat)


def save_operator(v: BogoliubovMap, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(operator_to_dict(v), fh, sort_keys=True)
        fh.write("\n")


def load_operator(path: str) -> BogoliubovMap:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise StructuralError(f"invalid JSON in {path}: {exc}") from exc
    return operator_from_dict(data)
