"""Structure theory of fermionic Bogoliubov maps.

Every fermionic Bogoliubov map V factors as V = U_V W_V with W_V diagonal
(no particle-hole mixing) and U_V a square unitary built from two pieces of
data on the target space: an antisymmetric Hilbert-Schmidt pairing block T
and a finite-dimensional hole subspace h annihilated by T.  The pair (T, h)
also parameterizes the basis projections of the target space, hence the pure
quasi-free states, and the map V -> (T_V, h_V) is the canonical choice
attached to the state transported by V.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .selfdual import (
    CAR,
    BogoliubovMap,
    NumericalValidityError,
    PreconditionError,
    SelfdualSpace,
    StructuralError,
    components,
    conjugate_operator,
    deterministic_onb,
    index_data,
    kernel_basis,
    pseudo_inverse,
    psd_inv_sqrt,
)

__all__ = [
    "FockStateParamCAR",
    "CanonicalCarData",
    "SpectralProfile",
    "state_operator",
    "spectral_profile",
    "purity_class",
    "param_to_projection",
    "projection_to_param",
    "canonical_T_h",
    "rotation_U_T",
    "rotation_U_h",
    "decompose",
    "chi_character",
    "equivalence_diagnostic",
]

_ATOL = 1e-8


@dataclass(frozen=True)
class FockStateParamCAR:
    """Parameters (T, h) of a pure quasi-free fermion state.

    t is the antisymmetric pairing block (particle -> hole coordinates) and h
    holds orthonormal columns spanning the hole subspace; T must annihilate h.
    """

    t: np.ndarray = field(repr=False)
    h: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        t = np.array(self.t, dtype=complex)
        h = np.array(self.h, dtype=complex)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise StructuralError(f"pairing block must be square, got {t.shape}")
        k = t.shape[0]
        if h.ndim != 2 or h.shape[0] != k:
            raise StructuralError(f"hole basis shape {h.shape} incompatible with {k} modes")
        if np.linalg.norm(t + t.T) > _ATOL * max(1.0, np.linalg.norm(t)):
            raise StructuralError("pairing block is not antisymmetric")
        if h.shape[1]:
            gram = h.conj().T @ h
            if np.linalg.norm(gram - np.eye(h.shape[1])) > _ATOL:
                raise StructuralError("hole basis is not orthonormal")
            if np.linalg.norm(t @ h) > _ATOL:
                raise StructuralError("pairing block does not annihilate the hole subspace")
        t.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "h", h)

    @property
    def modes(self) -> int:
        return self.t.shape[0]

    @property
    def hole_dim(self) -> int:
        return self.h.shape[1]


@dataclass(frozen=True)
class CanonicalCarData:
    """Canonical decomposition data of a fermionic Bogoliubov map.

    param lives on the target space; k_v holds an orthonormal basis of the
    defect space P_V(ker V^H); n_v counts ker V^H directions inside the
    particle block, l_v = dim h_V.
    """

    param: FockStateParamCAR
    k_v: np.ndarray = field(repr=False)
    p_v: np.ndarray = field(repr=False)
    u_v: BogoliubovMap
    w_v: BogoliubovMap
    n_v: int
    l_v: int


def state_operator(v: BogoliubovMap) -> np.ndarray:
    """Covariance operator on the source space of the transported Fock state."""
    p1 = v.target.p1()
    return v.matrix.conj().T @ p1 @ v.matrix


@dataclass(frozen=True)
class SpectralProfile:
    """Spectrum of a covariance operator, split by the symmetry s -> 1-s.

    codim is the dimension of the part with spectrum inside (0, 1), pairs
    lists (eigenvalue, multiplicity) for the mirrored pairs with eigenvalue
    below 1/2, half_multiplicity counts the self-mirrored eigenvalue 1/2.
    """

    codim: int
    pairs: tuple[tuple[float, int], ...]
    half_multiplicity: int

    def as_dict(self) -> dict:
        return {
            "codim": self.codim,
            "pairs": [[lam, mult] for lam, mult in self.pairs],
            "half_multiplicity": self.half_multiplicity,
        }


def spectral_profile(s: np.ndarray, tol: float = 1e-10) -> SpectralProfile:
    s = np.asarray(s, dtype=complex)
    if np.linalg.norm(s - s.conj().T) > tol * max(1.0, np.linalg.norm(s)):
        raise NumericalValidityError("covariance operator is not Hermitian")
    eig = np.linalg.eigvalsh(s)
    if eig.size and (eig[0] < -tol or eig[-1] > 1.0 + tol):
        raise NumericalValidityError(
            f"covariance spectrum escapes [0, 1]: range [{eig[0]}, {eig[-1]}]"
        )
    interior = [float(x) for x in eig if tol < x < 1.0 - tol]
    half = sum(1 for x in interior if abs(x - 0.5) <= tol)
    lower = sorted(x for x in interior if x < 0.5 - tol)
    upper = sorted(1.0 - x for x in interior if x > 0.5 + tol)
    if len(lower) != len(upper):
        raise NumericalValidityError("spectrum is not mirror symmetric about 1/2")
    pairs: list[tuple[float, int]] = []
    for lo, up in zip(lower, upper):
        if abs(lo - up) > 10 * tol:
            raise NumericalValidityError(
                f"unmatched mirror pair: {lo} vs {1.0 - up}"
            )
        if pairs and abs(pairs[-1][0] - lo) <= 10 * tol:
            lam, mult = pairs[-1]
            pairs[-1] = (lam, mult + 1)
        else:
            pairs.append((lo, 1))
    return SpectralProfile(
        codim=len(interior),
        pairs=tuple(pairs),
        half_multiplicity=half,
    )


def purity_class(v: BogoliubovMap, tol: float = 1e-10) -> str:
    """Classify the transported state: pure, a two-term disjoint mixture, or mixed.

    Decided by the rank of the commutator of the particle projection with the
    range projection V V^H: rank 0 means the covariance is again a basis
    projection, rank 2 is the borderline mixture of two disjoint pure states.
    """
    p1 = v.target.p1()
    r = v.matrix @ v.matrix.conj().T
    comm = p1 @ r - r @ p1
    svals = np.linalg.svd(comm, compute_uv=False)
    rank = int(np.sum(svals > tol))
    if rank == 0:
        return "pure"
    if rank == 2:
        return "two_disjoint_pure"
    return "mixed"


def param_to_projection(space: SelfdualSpace, param: FockStateParamCAR) -> np.ndarray:
    """Basis projection of the space determined by the pair (T, h)."""
    if param.modes != space.modes:
        raise StructuralError(
            f"parameter has {param.modes} modes, space has {space.modes}"
        )
    t, h = param.t, param.h
    k = space.modes
    x = np.linalg.inv(np.eye(k) + t.conj().T @ t)
    p = np.zeros((2 * k, 2 * k), dtype=complex)
    p[:k, :k] = x
    p[:k, k:] = x @ t.conj().T
    p[k:, :k] = t @ x
    p[k:, k:] = t @ x @ t.conj().T
    if h.shape[1]:
        ph = h @ h.conj().T
        p[:k, :k] -= ph
        p[k:, k:] += ph.conj()
    return p


def projection_to_param(
    space: SelfdualSpace,
    p: np.ndarray,
    rank_tol: float = 1e-10,
    tol: float = 1e-8,
) -> FockStateParamCAR:
    """Invert :func:`param_to_projection`; the hole basis is canonical.

    Requires P to be a basis projection: Hermitian, idempotent, and summing
    with its conjugate to the identity.
    """
    p = np.asarray(p, dtype=complex)
    k = space.modes
    if p.shape != (2 * k, 2 * k):
        raise StructuralError(f"projection shape {p.shape}, expected {(2 * k, 2 * k)}")
    if np.linalg.norm(p - p.conj().T) > tol or np.linalg.norm(p @ p - p) > tol:
        raise StructuralError("input is not a Hermitian idempotent")
    if np.linalg.norm(p + conjugate_operator(p, space, space) - np.eye(2 * k)) > tol:
        raise StructuralError("projection does not complement its conjugate")
    p11 = p[:k, :k]
    p21 = p[k:, :k]
    t = p21 @ pseudo_inverse(p11, rank_tol)
    t = 0.5 * (t - t.T)  # exact antisymmetrization of rounding noise
    h = kernel_basis(p11, rank_tol)
    if h.shape[1]:
        h = deterministic_onb(h, rank_tol)
    return FockStateParamCAR(t=t, h=h)


def canonical_T_h(
    v: BogoliubovMap, rank_tol: float = 1e-10
) -> tuple[np.ndarray, np.ndarray]:
    """Canonical (T, h) on the target space attached to a fermionic map.

    h is the image of ker V22 under V12; T is the unique minimal-norm
    antisymmetric solution of T V11 = V21 (restricted to ran V11^H) that
    annihilates h.
    """
    if v.kind != CAR:
        raise PreconditionError("canonical_T_h requires a fermionic map")
    v11, v12, v21, v22 = components(v)
    m = v.target.modes
    v11_pinv = pseudo_inverse(v11, rank_tol)
    proj_coker = np.eye(m) - v11 @ v11_pinv
    v22_pinv = pseudo_inverse(v22, rank_tol)
    t = v21 @ v11_pinv - v22_pinv.conj().T @ v12.conj().T @ proj_coker
    t = 0.5 * (t - t.T)
    ker22 = kernel_basis(v22, rank_tol)
    if ker22.shape[1]:
        h = deterministic_onb(v12 @ ker22, rank_tol)
    else:
        h = np.zeros((m, 0), dtype=complex)
    return t, h


def rotation_U_T(space: SelfdualSpace, t: np.ndarray) -> BogoliubovMap:
    """Square unitary rotating the particle projection onto the pairing projection."""
    t = np.asarray(t, dtype=complex)
    k = space.modes
    if t.shape != (k, k):
        raise StructuralError(f"pairing block shape {t.shape}, expected {(k, k)}")
    x_half = psd_inv_sqrt(np.eye(k) + t.conj().T @ t)
    y_half = psd_inv_sqrt(np.eye(k) + t @ t.conj().T)
    u = np.zeros((2 * k, 2 * k), dtype=complex)
    u[:k, :k] = x_half
    u[:k, k:] = t.conj() @ y_half
    u[k:, :k] = t @ x_half
    u[k:, k:] = y_half
    return BogoliubovMap(space, space, u)


def rotation_U_h(space: SelfdualSpace, h: np.ndarray) -> BogoliubovMap:
    """Self-adjoint unitary exchanging the hole modes with their conjugates."""
    h = np.asarray(h, dtype=complex)
    k = space.modes
    if h.ndim != 2 or h.shape[0] != k:
        raise StructuralError(f"hole basis shape {h.shape} incompatible with {k} modes")
    u = np.eye(2 * k, dtype=complex)
    if h.shape[1]:
        ph = h @ h.conj().T
        cross = h @ h.T
        u[:k, :k] -= ph
        u[:k, k:] -= cross
        u[k:, :k] -= cross.conj()
        u[k:, k:] -= ph.conj()
    return BogoliubovMap(space, space, u)


def decompose(v: BogoliubovMap, rank_tol: float = 1e-10) -> CanonicalCarData:
    """Full canonical decomposition V = U_V W_V with its state data.

    Returns the canonical parameter (T_V, h_V), the basis projection P_V it
    generates, the defect basis k_v inside ran P_V, the unitary U_V, and the
    diagonal remainder W_V = U_V^H V.
    """
    if v.kind != CAR:
        raise PreconditionError("decompose requires a fermionic map")
    t, h = canonical_T_h(v, rank_tol)
    param = FockStateParamCAR(t=t, h=h)
    target = v.target
    u_t = rotation_U_T(target, param.t)
    u_h = rotation_U_h(target, param.h)
    u_v = BogoliubovMap(target, target, u_t.matrix @ u_h.matrix)
    w_v = BogoliubovMap(v.source, target, u_v.matrix.conj().T @ v.matrix)
    p_v = param_to_projection(target, param)
    m = target.modes
    range_proj = v.matrix @ v.matrix.conj().T
    defect_proj = np.eye(2 * m) - range_proj
    k_v = deterministic_onb(p_v @ defect_proj, rank_tol)
    n_v = kernel_basis(range_proj[:m, :m], rank_tol).shape[1]
    return CanonicalCarData(
        param=param,
        k_v=k_v,
        p_v=p_v,
        u_v=u_v,
        w_v=w_v,
        n_v=n_v,
        l_v=param.hole_dim,
    )


def chi_character(v: BogoliubovMap, rank_tol: float = 1e-10) -> int:
    """Sign character (-1)**dim(h_V); not multiplicative on the full semigroup."""
    if v.kind != CAR:
        raise PreconditionError("chi_character requires a fermionic map")
    _, _, _, v22 = components(v)
    return -1 if kernel_basis(v22, rank_tol).shape[1] % 2 else 1


def equivalence_diagnostic(
    v: BogoliubovMap, w: BogoliubovMap
) -> tuple[bool, float]:
    """Compare the sectors of two maps with common source.

    Returns (same index, Hilbert-Schmidt distance of the covariance
    operators); the induced representations are equivalent exactly when the
    indices agree and the distance is Hilbert-Schmidt small, which at finite
    truncation means comparable to zero.
    """
    if v.source != w.source or v.kind != w.kind:
        raise StructuralError("equivalence test needs a common source space")
    same_index = index_data(v).index == index_data(w).index
    dist = float(np.linalg.norm(state_operator(v) - state_operator(w), "fro"))
    return same_index, dist


def diagonal_part_is_exact(v: BogoliubovMap, tol: float = 1e-10) -> bool:
    """True when V has no particle-hole mixing (both off-diagonal blocks vanish)."""
    _, v12, v21, _ = components(v)
    return bool(np.linalg.norm(v12) <= tol and np.linalg.norm(v21) <= tol)
