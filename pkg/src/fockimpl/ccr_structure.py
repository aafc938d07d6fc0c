"""Symplectic structure theory for bosonic Bogoliubov maps.

Bosonic Fock states correspond to basis projections P with P = P^kappa,
P + conj(P) = 1 and C positive definite on ran P; these are parameterized by
symmetric matrices Z of norm below one (the finite-dimensional Siegel disk).
A general kappa-isometry V factors as a disk rotation U_V times a diagonal
map W_V, with the defect of V carried by a basis projection of ker V^kappa
obtained from the spectral splitting of the compressed form C.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .selfdual import (
    CCR,
    BogoliubovMap,
    NumericalValidityError,
    PreconditionError,
    SelfdualSpace,
    StructuralError,
    ValidationReport,
    assemble_blocks,
    components,
    deterministic_onb,
    kappa_adjoint,
    psd_inv_sqrt,
    validate,
)

__all__ = [
    "FockStateParamCCR",
    "CanonicalCcrData",
    "validate_ccr",
    "Z_from_projection",
    "projection_from_Z",
    "rotation_U_Z",
    "moebius_action",
    "canonical_pV",
    "decompose_ccr",
]


@dataclass(frozen=True)
class FockStateParamCCR:
    """Disk parameter of a bosonic Fock state.

    z maps particle modes to hole modes, is symmetric as a matrix, and has
    operator norm strictly below one.
    """

    z: np.ndarray = field(repr=False)

    def __post_init__(self):
        z = np.asarray(self.z, dtype=complex)
        object.__setattr__(self, "z", z)
        if z.ndim != 2 or z.shape[0] != z.shape[1]:
            raise StructuralError(f"disk parameter must be square, got {z.shape}")
        scale = max(1.0, float(np.linalg.norm(z)))
        if np.linalg.norm(z - z.T) > 1e-10 * scale:
            raise StructuralError("disk parameter must be symmetric")
        if z.size and np.linalg.norm(z, 2) >= 1.0:
            raise PreconditionError("disk parameter must have norm below one")

    @property
    def modes(self) -> int:
        return self.z.shape[0]


@dataclass(frozen=True)
class CanonicalCcrData:
    """Canonical decomposition data of a bosonic Bogoliubov map.

    param holds the disk parameter Z_V of the extended basis projection p_v;
    p_ker is the basis projection of ker V^kappa it extends by, k_v a
    kappa-orthonormal basis of its range, m_v the defect mode count.
    """

    param: FockStateParamCCR
    k_v: np.ndarray = field(repr=False)
    p_v: np.ndarray = field(repr=False)
    p_ker: np.ndarray = field(repr=False)
    u_v: BogoliubovMap
    w_v: BogoliubovMap
    m_v: int


def validate_ccr(v: BogoliubovMap, tol: float = 1e-10) -> ValidationReport:
    """Bosonic validity: kappa-isometry and conjugation equivariance.

    The kernel of V^kappa is automatically even-dimensional here since source
    and target carry 2n and 2m modes; nondegeneracy of kappa on that kernel
    is checked spectrally by canonical_pV.
    """
    if v.kind != CCR:
        raise PreconditionError("validate_ccr requires a bosonic map")
    return validate(v, tol)


def _disk_param(z) -> FockStateParamCCR:
    if isinstance(z, FockStateParamCCR):
        return z
    return FockStateParamCCR(z=np.asarray(z, dtype=complex))


def Z_from_projection(p: np.ndarray, rank_tol: float = 1e-10) -> FockStateParamCCR:
    """Disk parameter of a bosonic basis projection, Z = P21 P11^(-1).

    P11 is bounded below by the identity for any valid basis projection near
    the reference one, so failure of invertibility signals an invalid input.
    """
    p = np.asarray(p, dtype=complex)
    if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] % 2:
        raise StructuralError(f"projection must be square of even size, got {p.shape}")
    n = p.shape[0] // 2
    p11, p21 = p[:n, :n], p[n:, :n]
    s = np.linalg.svd(p11, compute_uv=False)
    if s.size and s[-1] <= rank_tol * max(1.0, s[0]):
        raise StructuralError("particle block of the projection is singular")
    return _disk_param(p21 @ np.linalg.inv(p11))


def projection_from_Z(z) -> np.ndarray:
    """Basis projection with disk parameter z.

    In block form, with Y = (1 - conj(z) z)^(-1):
    P11 = Y, P12 = -Y conj(z), P21 = z Y, P22 = -z Y conj(z).
    """
    param = _disk_param(z)
    z = param.z
    n = param.modes
    y = np.linalg.inv(np.eye(n) - z.conj() @ z)
    p = np.zeros((2 * n, 2 * n), dtype=complex)
    p[:n, :n] = y
    p[:n, n:] = -y @ z.conj()
    p[n:, :n] = z @ y
    p[n:, n:] = -z @ y @ z.conj()
    return p


def rotation_U_Z(z, space: SelfdualSpace | None = None) -> BogoliubovMap:
    """Symplectic rotation taking the reference projection to the one of z.

    Blocks: U11 = Y^(1/2), U12 = conj(z) Ybar^(1/2), U21 = z Y^(1/2),
    U22 = Ybar^(1/2) with Y = (1 - conj(z) z)^(-1), Ybar its conjugate.
    """
    param = _disk_param(z)
    z = param.z
    n = param.modes
    if space is None:
        space = SelfdualSpace(kind=CCR, modes=n)
    elif space.modes != n or space.kind != CCR:
        raise StructuralError("space does not match the disk parameter")
    y_half = psd_inv_sqrt(np.eye(n) - z.conj() @ z)
    ybar_half = psd_inv_sqrt(np.eye(n) - z @ z.conj())
    return assemble_blocks(
        space, space, y_half, z.conj() @ ybar_half, z @ y_half, ybar_half
    )


def moebius_action(u: BogoliubovMap, z) -> FockStateParamCCR:
    """Action of a symplectic map on the disk, z -> (U21 + U22 z)(U11 + U12 z)^(-1)."""
    if u.kind != CCR or not u.is_square:
        raise PreconditionError("disk action needs a square bosonic map")
    param = _disk_param(z)
    u11, u12, u21, u22 = components(u)
    denom = u11 + u12 @ param.z
    return _disk_param((u21 + u22 @ param.z) @ np.linalg.inv(denom))


def canonical_pV(
    v: BogoliubovMap, rank_tol: float = 1e-10
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spectral basis projection of the kappa-kernel of a bosonic map.

    E is the orthogonal projection onto ker V^kappa, computed from the
    isometric polar part of V; A = ECE is the compressed form, invertible on
    that kernel with signature (M, M); p_V = A_+^(-1) C is the canonical
    basis projection of the kernel, reducing to P1 E whenever E commutes
    with P1.
    """
    if v.kind != CCR:
        raise PreconditionError("canonical_pV requires a bosonic map")
    mat = v.matrix
    m2 = mat.shape[0]
    c = v.target.c_matrix()
    # isometric polar part; for an exact kappa-isometry V^H V is invertible
    v_iso = mat @ psd_inv_sqrt(mat.conj().T @ mat)
    e = c @ (np.eye(m2) - v_iso @ v_iso.conj().T) @ c
    a = e @ c @ e
    defect = m2 - mat.shape[1]
    if defect == 0:
        zero = np.zeros((m2, m2))
        return e, a, zero
    eigvals, eigvecs = np.linalg.eigh(a)
    order = np.argsort(-np.abs(eigvals))
    kernel_vals = eigvals[order[:defect]]
    rest = np.abs(eigvals[order[defect:]])
    if np.min(np.abs(kernel_vals)) <= max(rank_tol, rest.max() if rest.size else 0.0):
        raise NumericalValidityError(
            "compressed form is numerically degenerate on the kernel; "
            "raise rank_tol or supply a cleaner map"
        )
    pos = order[:defect][kernel_vals > 0]
    if 2 * pos.size != defect:
        raise NumericalValidityError("kernel form does not have split signature")
    a_plus_inv = (eigvecs[:, pos] / eigvals[pos]) @ eigvecs[:, pos].conj().T
    p_ker = a_plus_inv @ c
    return e, a, p_ker


def _kappa_gram_schmidt(columns: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Orthonormalize columns with respect to the form <f, C g>.

    The form must be positive definite on the span (true on the range of a
    basis projection).
    """
    out = []
    for j in range(columns.shape[1]):
        g = columns[:, j].astype(complex)
        for k in out:
            g = g - k * (k.conj() @ c @ g)
        norm_sq = (g.conj() @ c @ g).real
        if norm_sq <= 0:
            raise NumericalValidityError("form is not positive on the given span")
        out.append(g / np.sqrt(norm_sq))
    return np.stack(out, axis=1) if out else np.zeros((columns.shape[0], 0))


def decompose_ccr(v: BogoliubovMap, rank_tol: float = 1e-10) -> CanonicalCcrData:
    """Product decomposition V = U_V W_V of a bosonic Bogoliubov map.

    The basis projection P_V = V P1 V^kappa + p_V extends the transported
    reference projection by the canonical kernel projection; its disk
    parameter determines the rotation U_V, and W_V = U_V^kappa V is diagonal
    with trivial disk parameter and the same index as V.
    """
    if v.kind != CCR:
        raise PreconditionError("decompose_ccr requires a bosonic map")
    n, m = v.source.modes, v.target.modes
    _, _, p_ker = canonical_pV(v, rank_tol)
    v_dag = kappa_adjoint(v.matrix, v.source, v.target)
    p_v = v.matrix @ v.source.p1() @ v_dag + p_ker
    param = Z_from_projection(p_v, rank_tol)
    u_v = rotation_U_Z(param, v.target)
    w_mat = kappa_adjoint(u_v.matrix, v.target, v.target) @ v.matrix
    w_v = BogoliubovMap(source=v.source, target=v.target, matrix=w_mat)
    basis = deterministic_onb(p_ker, rank_tol)
    k_v = _kappa_gram_schmidt(basis, v.target.c_matrix())
    return CanonicalCcrData(
        param=param,
        k_v=k_v,
        p_v=p_v,
        p_ker=p_ker,
        u_v=u_v,
        w_v=w_v,
        m_v=m - n,
    )
