"""Truncated symmetric Fock space, Weyl operators, and bosonic implementers.

Everything here lives under a total-particle cutoff n_max.  Operator
identities that hold exactly on the full space (commutation relations, Weyl
relations, intertwining) hold on the truncated space only below the cutoff;
each verification therefore reports residuals compressed to a protected
low-particle sector, and correctness manifests as monotone decay of those
residuals along an n_max ladder rather than as exact equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np
from scipy import sparse

from .car_fock import _exp_nilpotent, _maybe_sparse, _mul, dag, to_dense
from .ccr_structure import CanonicalCcrData, FockStateParamCCR, decompose_ccr
from .selfdual import (
    CCR,
    BogoliubovMap,
    NumericalValidityError,
    PreconditionError,
    ResourceError,
    SelfdualSpace,
    StructuralError,
    components,
    kernel_basis,
)

__all__ = [
    "DEFAULT_N_MAX",
    "DEFAULT_DIM_CAP",
    "FockSpaceCCR",
    "FockRepCCR",
    "build_rep_ccr",
    "weyl",
    "lambda_multiplicative_ccr",
    "WickBlocksCCR",
    "wick_exponential_ccr",
    "hamiltonian_from_Z",
    "multi_indices_weak",
    "ImplementerFamilyCCR",
    "implementers_ccr",
    "CcrFamilyReport",
    "verify_ccr_family",
    "decomposition_subspaces_ccr",
]

DEFAULT_N_MAX = 12
DEFAULT_DIM_CAP = 20000


class FockSpaceCCR:
    """Symmetric Fock space over k modes, truncated at total particle number n_max.

    Basis states are occupation tuples in graded lexicographic order; the
    canonical commutation relation [a_i, a_j*] = delta_ij holds exactly on
    the subspace of total particle number at most n_max - 1.
    """

    def __init__(self, modes: int, n_max: int = DEFAULT_N_MAX,
                 dim_cap: int = DEFAULT_DIM_CAP):
        if modes < 0 or n_max < 0:
            raise StructuralError("modes and n_max must be nonnegative")
        dim = math.comb(modes + n_max, modes)
        if dim > dim_cap:
            raise ResourceError(
                f"truncated dimension {dim} exceeds the configured cap of {dim_cap}"
            )
        self.modes = modes
        self.n_max = n_max
        states: list[tuple[int, ...]] = []
        def grow(prefix, remaining, slots):
            if slots == 0:
                states.append(tuple(prefix))
                return
            for n in range(remaining + 1):
                grow(prefix + [n], remaining - n, slots - 1)
        grow([], n_max, modes)
        states.sort(key=lambda nu: (sum(nu), nu))
        self.states = states
        self.dim = len(states)
        self.index = {nu: i for i, nu in enumerate(states)}
        self.occupations = np.array(states, dtype=np.int64).reshape(self.dim, modes)
        self._annihilators = [self._build_annihilator(i) for i in range(modes)]

    def _build_annihilator(self, i: int) -> sparse.csr_matrix:
        rows, cols, vals = [], [], []
        for s, nu in enumerate(self.states):
            if nu[i] == 0:
                continue
            lower = list(nu)
            lower[i] -= 1
            rows.append(self.index[tuple(lower)])
            cols.append(s)
            vals.append(np.sqrt(nu[i]))
        return sparse.csr_matrix(
            (vals, (rows, cols)), shape=(self.dim, self.dim), dtype=complex
        )

    def annihilator_of_mode(self, i: int) -> sparse.csr_matrix:
        return self._annihilators[i]

    def total_numbers(self) -> np.ndarray:
        return self.occupations.sum(axis=1)

    def number_operator(self) -> sparse.csr_matrix:
        return sparse.diags(self.total_numbers().astype(complex), format="csr")

    def sector_projector(self, n_limit: int) -> sparse.csr_matrix:
        """Orthogonal projection onto total particle number <= n_limit."""
        mask = (self.total_numbers() <= n_limit).astype(complex)
        return sparse.diags(mask, format="csr")

    def vacuum(self) -> np.ndarray:
        vac = np.zeros(self.dim, dtype=complex)
        vac[0] = 1.0
        return vac


@dataclass(frozen=True)
class FockRepCCR:
    """Bosonic field operators on a truncated symmetric Fock space."""

    space: SelfdualSpace
    fock: FockSpaceCCR

    def annihilator(self, g: np.ndarray) -> sparse.csr_matrix:
        g = np.asarray(g, dtype=complex)
        out = None
        for i in range(self.space.modes):
            if g[i] == 0:
                continue
            term = np.conj(g[i]) * self.fock.annihilator_of_mode(i)
            out = term if out is None else out + term
        if out is None:
            out = sparse.csr_matrix((self.fock.dim, self.fock.dim), dtype=complex)
        return out

    def creator(self, g: np.ndarray) -> sparse.csr_matrix:
        return dag(self.annihilator(np.asarray(g, dtype=complex)))

    def pi(self, f: np.ndarray) -> sparse.csr_matrix:
        """Field operator a*(P1 f) + a(P1 f^*)."""
        f = np.asarray(f, dtype=complex)
        k = self.space.modes
        return self.creator(f[:k]) + self.annihilator(np.conj(f[k:]))

    def vacuum(self) -> np.ndarray:
        return self.fock.vacuum()


def build_rep_ccr(
    space: SelfdualSpace,
    n_max: int = DEFAULT_N_MAX,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> FockRepCCR:
    if space.kind != CCR:
        raise PreconditionError("build_rep_ccr requires a bosonic space")
    return FockRepCCR(space=space, fock=FockSpaceCCR(space.modes, n_max, dim_cap))


def weyl(f: np.ndarray, rep: FockRepCCR) -> np.ndarray:
    """Unitary Weyl operator exp(i pi(f)) of a conjugation-invariant vector."""
    f = np.asarray(f, dtype=complex)
    if np.linalg.norm(rep.space.conjugate_vector(f) - f) > 1e-10 * max(
        1.0, float(np.linalg.norm(f))
    ):
        raise PreconditionError("Weyl operator needs a conjugation-invariant vector")
    h = to_dense(rep.pi(f))
    w, q = np.linalg.eigh(h)
    return (q * np.exp(1j * w)) @ q.conj().T


def _quadratic_creation_ccr(b: np.ndarray, rep: FockRepCCR) -> sparse.csr_matrix:
    """(1/2) sum b_pq a*_p a*_q for symmetric b."""
    k = rep.space.modes
    b = np.asarray(b, dtype=complex)
    if b.shape != (k, k):
        raise StructuralError(f"pair block shape {b.shape}, expected {(k, k)}")
    scale = max(1.0, float(np.linalg.norm(b)))
    if np.linalg.norm(b - b.T) > 1e-10 * scale:
        raise StructuralError("pair block must be symmetric")
    out = sparse.csr_matrix((rep.fock.dim, rep.fock.dim), dtype=complex)
    for p in range(k):
        row = b[p, :]
        if not np.any(row):
            continue
        out = out + dag(rep.fock.annihilator_of_mode(p)) @ rep.creator(row)
    return 0.5 * out


def lambda_multiplicative_ccr(
    a_block: np.ndarray, rep_source: FockRepCCR, rep_target: FockRepCCR
):
    """Multiplicative second quantization on the truncated symmetric space.

    Acts as the n-fold tensor power of the block map on each n-particle
    sector; since particle number is preserved, no cutoff error arises.
    """
    a_block = np.asarray(a_block, dtype=complex)
    m, n = rep_target.space.modes, rep_source.space.modes
    if a_block.shape != (m, n):
        raise StructuralError(f"block shape {a_block.shape}, expected {(m, n)}")
    if rep_source.fock.n_max > rep_target.fock.n_max:
        raise PreconditionError("target cutoff must dominate the source cutoff")
    creators = [rep_target.creator(a_block[:, i]) for i in range(n)]
    src = rep_source.fock
    out = np.zeros((rep_target.fock.dim, src.dim), dtype=complex)
    out[0, 0] = 1.0
    for s in range(1, src.dim):
        nu = src.states[s]
        i = next(j for j, occ in enumerate(nu) if occ > 0)
        lower = list(nu)
        lower[i] -= 1
        out[:, s] = (creators[i] @ out[:, src.index[tuple(lower)]]) / np.sqrt(nu[i])
    return _maybe_sparse(out)


@dataclass(frozen=True)
class WickBlocksCCR:
    """Blocks of a bosonic quadratic intertwining Hamiltonian.

    Same layout as the fermionic version but with symmetric pair blocks; the
    pair-creation block must have norm below one for the Wick exponential to
    define an operator.
    """

    creation_pair: np.ndarray = field(repr=False)
    mixed: np.ndarray = field(repr=False)
    annihilation_pair: np.ndarray = field(repr=False)

    def full(self) -> np.ndarray:
        m = self.creation_pair.shape[0]
        n = self.annihilation_pair.shape[0]
        if m != n:
            raise PreconditionError("full Hamiltonian exists only in the square case")
        h11 = self.mixed - np.eye(m)
        h = np.zeros((2 * m, 2 * m), dtype=complex)
        h[:m, :m] = h11
        h[:m, m:] = self.creation_pair
        h[m:, :m] = self.annihilation_pair
        h[m:, m:] = h11.T
        return h


def _split_square_ccr(h: np.ndarray, modes: int, tol: float = 1e-10) -> WickBlocksCCR:
    h = np.asarray(h, dtype=complex)
    k = modes
    if h.shape != (2 * k, 2 * k):
        raise StructuralError(f"Hamiltonian shape {h.shape}, expected {(2 * k, 2 * k)}")
    h11, h12 = h[:k, :k], h[:k, k:]
    h21, h22 = h[k:, :k], h[k:, k:]
    scale = max(1.0, float(np.linalg.norm(h)))
    if (
        np.linalg.norm(h12 - h12.T) > tol * scale
        or np.linalg.norm(h21 - h21.T) > tol * scale
        or np.linalg.norm(h22 - h11.T) > tol * scale
    ):
        raise StructuralError("Hamiltonian is not symmetric")
    return WickBlocksCCR(
        creation_pair=h12, mixed=np.eye(k) + h11, annihilation_pair=h21
    )


def wick_exponential_ccr(
    h: np.ndarray | WickBlocksCCR,
    rep: FockRepCCR,
    rep_source: FockRepCCR | None = None,
):
    """Wick-ordered exponential of a symmetric quadratic Hamiltonian.

    Factorizes exactly into pair-creation exponential, multiplicative second
    quantization of P1 + H11, and pair-annihilation exponential; bosonic
    normal ordering produces no cross terms between the three groups.
    """
    if rep_source is None:
        rep_source = rep
    if isinstance(h, WickBlocksCCR):
        blocks = h
    else:
        if rep_source is not rep:
            raise PreconditionError("matrix-form Hamiltonians must be square")
        blocks = _split_square_ccr(h, rep.space.modes)
    b = np.asarray(blocks.creation_pair, dtype=complex)
    if b.size and np.linalg.norm(b, 2) >= 1.0:
        raise PreconditionError("pair-creation block must have norm below one")
    exp_cre = _exp_nilpotent(_quadratic_creation_ccr(b, rep))
    exp_ann = dag(
        _exp_nilpotent(
            _quadratic_creation_ccr(np.conj(blocks.annihilation_pair), rep_source)
        )
    )
    mid = lambda_multiplicative_ccr(blocks.mixed, rep_source, rep)
    return _mul(_mul(exp_cre, mid), exp_ann)


def hamiltonian_from_Z(v: BogoliubovMap, z) -> WickBlocksCCR:
    """Quadratic Hamiltonian whose Wick exponential intertwines pi and pi o V.

    z must solve Z V11 = V21; the blocks are H12 = -conj(Z) (the form adjoint
    of Z), P1 + H11 = V11 + H12 V21 and H21 = (V22^H + V12^H H12) V21.
    """
    if v.kind != CCR:
        raise PreconditionError("hamiltonian_from_Z requires a bosonic map")
    if isinstance(z, FockStateParamCCR):
        z = z.z
    z = np.asarray(z, dtype=complex)
    v11, v12, v21, v22 = components(v)
    m = v.target.modes
    if z.shape != (m, m):
        raise StructuralError(f"disk parameter shape {z.shape}, expected {(m, m)}")
    defect = np.linalg.norm(z @ v11 - v21)
    if defect > 1e-8 * max(1.0, float(np.linalg.norm(v.matrix))):
        raise PreconditionError(
            f"parameter does not solve Z V11 = V21 (residual {defect:.3e})"
        )
    zd = -z.conj()
    return WickBlocksCCR(
        creation_pair=zd,
        mixed=v11 + zd @ v21,
        annihilation_pair=(v22.conj().T + v12.conj().T @ zd) @ v21,
    )


def _defect_isometry(mat: np.ndarray) -> np.ndarray:
    """Isometric polar part of a defect field on the truncated space.

    For a kappa-normalized defect vector, pi(g)^H pi(g) = pi(g) pi(g)^H + 1,
    so the true spectrum lies above one; smaller spectral values are cutoff
    artifacts and are floored before inverting so that the junk they carry
    stays localized near the top particle sector.
    """
    b = mat.conj().T @ mat
    lam, q = np.linalg.eigh(b)
    inv_root = (q * np.maximum(lam.real, 1.0) ** -0.5) @ q.conj().T
    return mat @ inv_root


def multi_indices_weak(m: int, max_len: int) -> tuple[tuple[int, ...], ...]:
    """Weakly increasing multi-indices over {0..m-1} up to the given length,
    in graded lexicographic order."""
    out: list[tuple[int, ...]] = []
    for l in range(max_len + 1):
        out.extend(combinations_with_replacement(range(m), l))
        if m == 0:
            break
    return tuple(out)


@dataclass(frozen=True)
class ImplementerFamilyCCR:
    """Finitely many members of the isometry family implementing a bosonic map.

    The full family is infinite whenever the map is non-unitary; members are
    enumerated over weakly increasing multi-indices up to length n_terms.
    """

    v: BogoliubovMap
    data: CanonicalCcrData
    rep_source: FockRepCCR
    rep_target: FockRepCCR
    indices: tuple[tuple[int, ...], ...]
    members: tuple = field(repr=False)
    defect_isometries: tuple = field(repr=False)
    defect_basis: np.ndarray = field(repr=False)
    n_terms: int

    def member(self, index: tuple[int, ...]):
        return self.members[self.indices.index(tuple(index))]


def implementers_ccr(
    v: BogoliubovMap,
    data: CanonicalCcrData | None = None,
    rep_source: FockRepCCR | None = None,
    rep_target: FockRepCCR | None = None,
    n_terms: int = 2,
    defect_basis: np.ndarray | None = None,
    n_max: int = DEFAULT_N_MAX,
    cutoff_tol: float = 1e-3,
) -> ImplementerFamilyCCR:
    """Construct bosonic implementers up to multi-index length n_terms.

    The base member is det(1 - conj(Z) Z)^(1/4) times the Wick exponential;
    the others apply polar isometries of the defect fields pi(g_j).  If the
    base member fails to be isometric on the vacuum to within cutoff_tol,
    the cutoff is too small for this map and a diagnostic error is raised.
    """
    if v.kind != CCR:
        raise PreconditionError("implementers_ccr requires a bosonic map")
    if data is None:
        data = decompose_ccr(v)
    if rep_source is None:
        rep_source = build_rep_ccr(v.source, n_max)
    if rep_target is None:
        rep_target = build_rep_ccr(v.target, n_max)
    if defect_basis is None:
        defect_basis = data.k_v
    z = data.param.z
    blocks = hamiltonian_from_Z(v, z)
    eta = wick_exponential_ccr(blocks, rep_target, rep_source)
    det_factor = np.linalg.det(
        np.eye(z.shape[0]) - z.conj() @ z
    ).real ** 0.25
    base = det_factor * eta
    vac_norm = np.linalg.norm(to_dense(_mul(base, rep_source.vacuum())).ravel())
    if abs(vac_norm - 1.0) > cutoff_tol:
        raise NumericalValidityError(
            f"base implementer has vacuum norm {vac_norm:.6f}; the particle "
            f"cutoff n_max={rep_target.fock.n_max} is too small for this map "
            f"(try the ladder 8 -> 16 -> 24)"
        )
    m_v = defect_basis.shape[1]
    isometries = []
    for j in range(m_v):
        mat = to_dense(rep_target.pi(defect_basis[:, j]))
        isometries.append(_maybe_sparse(_defect_isometry(mat)))
    indices = multi_indices_weak(m_v, n_terms)
    members = []
    for alpha in indices:
        op = base
        for j in reversed(alpha):
            op = _mul(isometries[j], op)
        members.append(op)
    return ImplementerFamilyCCR(
        v=v,
        data=data,
        rep_source=rep_source,
        rep_target=rep_target,
        indices=indices,
        members=tuple(members),
        defect_isometries=tuple(isometries),
        defect_basis=np.asarray(defect_basis, dtype=complex),
        n_terms=n_terms,
    )


def _compressed_residual(x, proj_left, proj_right=None) -> float:
    """Spectral norm of the two-sided compression of x to protected sectors."""
    if proj_right is None:
        proj_right = proj_left
    y = to_dense(_mul(proj_left, _mul(x, proj_right)))
    return float(np.linalg.norm(y, 2))


@dataclass(frozen=True)
class CcrFamilyReport:
    """Cutoff-aware verification of a bosonic implementer family.

    All residuals are compressed to the protected sector of total particle
    number at most n_protected; completeness over a finite batch of members
    cannot reach the identity and is reported, not asserted.
    """

    gram_residual: float
    base_orthogonality_residual: float
    intertwining_residual: float
    completeness_gap: float
    n_protected: int
    tol: float

    @property
    def passed(self) -> bool:
        return (
            self.gram_residual <= self.tol
            and self.base_orthogonality_residual <= self.tol
            and self.intertwining_residual <= self.tol
        )

    def as_dict(self) -> dict:
        return {
            "gram_residual": self.gram_residual,
            "base_orthogonality_residual": self.base_orthogonality_residual,
            "intertwining_residual": self.intertwining_residual,
            "completeness_gap": self.completeness_gap,
            "n_protected": self.n_protected,
            "tol": self.tol,
            "passed": self.passed,
        }


def verify_ccr_family(
    family: ImplementerFamilyCCR,
    n_protected: int | None = None,
    tol: float = 1e-6,
    weyl_samples: int = 2,
    seed: int = 7,
) -> CcrFamilyReport:
    """Check orthogonality, base-member annihilation, and Weyl intertwining.

    Residuals are measured on the protected sector; they decay with growing
    n_max but never vanish exactly at finite cutoff.
    """
    src = family.rep_source.fock
    if n_protected is None:
        n_protected = src.n_max // 2
    proj_s = src.sector_projector(n_protected)
    proj_t = family.rep_target.fock.sector_projector(n_protected)
    eye_s = sparse.identity(src.dim, dtype=complex, format="csr")
    gram_res = 0.0
    for i, a in enumerate(family.members):
        for j, b in enumerate(family.members):
            prod = _mul(dag(a), b)
            ref = eye_s if i == j else 0.0 * eye_s
            gram_res = max(gram_res, _compressed_residual(prod - ref, proj_s))
    base = family.member(())
    base_res = 0.0
    for psi in family.defect_isometries:
        base_res = max(
            base_res, _compressed_residual(_mul(dag(psi), base), proj_t, proj_s)
        )
    rng = np.random.default_rng(seed)
    k_s = family.rep_source.space.modes
    inter_res = 0.0
    for _ in range(weyl_samples):
        f1 = rng.normal(size=k_s) + 1j * rng.normal(size=k_s)
        f = np.concatenate([f1, np.conj(f1)])
        w_s = weyl(f, family.rep_source)
        w_t = weyl(family.v.matrix @ f, family.rep_target)
        for a in family.members:
            diff = _mul(a, w_s) - _mul(w_t, a)
            inter_res = max(
                inter_res, _compressed_residual(diff, proj_t, proj_s)
            )
    total = None
    for a in family.members:
        term = _mul(a, dag(a))
        total = term if total is None else total + term
    proj_t = family.rep_target.fock.sector_projector(n_protected)
    dim_t = family.rep_target.fock.dim
    comp_gap = _compressed_residual(
        total - sparse.identity(dim_t, dtype=complex, format="csr"), proj_t
    )
    return CcrFamilyReport(
        gram_residual=float(gram_res),
        base_orthogonality_residual=float(base_res),
        intertwining_residual=float(inter_res),
        completeness_gap=float(comp_gap),
        n_protected=n_protected,
        tol=tol,
    )


def decomposition_subspaces_ccr(
    v: BogoliubovMap,
    rep_source: FockRepCCR,
    rep_target: FockRepCCR,
    n_terms: int = 2,
    rank_tol: float = 1e-10,
    span_tol: float = 1e-8,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Cyclic vectors and subspace projectors of the transported Weyl algebra.

    Seeds are phi_alpha = c_alpha a*(f_a1) ... a*(f_al) vacuum over an
    orthonormal basis of the particle modes annihilated by V^kappa, with
    c_alpha the inverse square root of the occupation factorials; projectors
    are built by closing each seed under the transported field operators.
    """
    if v.kind != CCR:
        raise PreconditionError("decomposition_subspaces_ccr needs a bosonic map")
    m = v.target.modes
    # particle vectors x with (x, 0) in ker V^kappa
    f_block = kernel_basis(v.matrix[:m, :].conj().T, rank_tol)
    n_v = f_block.shape[1]
    dim_t = rep_target.fock.dim
    generators = []
    for i in range(v.source.total_dim):
        f = np.zeros(v.source.total_dim, dtype=complex)
        f[i] = 1.0
        generators.append(to_dense(rep_target.pi(v.matrix @ f)))
    out = []
    for alpha in multi_indices_weak(n_v, n_terms):
        counts = np.bincount(alpha, minlength=n_v) if alpha else np.zeros(n_v, int)
        c_alpha = 1.0 / np.sqrt(np.prod([math.factorial(int(c)) for c in counts]))
        vec = rep_target.vacuum()
        for j in reversed(alpha):
            vec = to_dense(rep_target.creator(f_block[:, j]) @ vec).ravel()
        seed = c_alpha * vec
        basis = [seed / np.linalg.norm(seed)]
        frontier = list(basis)
        while frontier:
            new_frontier = []
            for w in frontier:
                for gen in generators:
                    cand = gen @ w
                    for b in basis:
                        cand = cand - b * np.vdot(b, cand)
                    nrm = np.linalg.norm(cand)
                    if nrm > span_tol:
                        cand /= nrm
                        basis.append(cand)
                        new_frontier.append(cand)
            frontier = new_frontier
        mat = np.stack(basis, axis=1)
        out.append((seed, mat @ mat.conj().T))
    return out
