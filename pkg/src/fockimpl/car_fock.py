"""Antisymmetric Fock representation and explicit implementer families.

Operators on the 2**k dimensional Fock space are held either as scipy
sparse matrices or dense arrays; structured maps (mode shifts, gauge
rotations) stay sparse end to end, which is what makes the larger
truncations affordable.  The central construction is the family of 2**M
isometries implementing a fermionic Bogoliubov map V with defect M: they
satisfy the Cuntz relations between the source and target Fock spaces and
intertwine the two field representations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import chain as _chain, combinations

import numpy as np
from scipy import sparse

from .selfdual import (
    CAR,
    BogoliubovMap,
    PreconditionError,
    ResourceError,
    SelfdualSpace,
    StructuralError,
    components,
    kernel_basis,
)
from .car_structure import CanonicalCarData, decompose

__all__ = [
    "DEFAULT_MODE_CAP",
    "FockSpaceCAR",
    "FockRep",
    "WickBlocks",
    "ImplementerFamily",
    "CuntzReport",
    "build_rep",
    "to_dense",
    "frob_norm",
    "residual",
    "multi_indices_strict",
    "wick_exponential",
    "hamiltonian_from_T",
    "implementers",
    "verify_cuntz",
    "matrix_units",
    "bosonized_statistics",
    "left_inverse",
    "central_state",
    "param_to_vector",
    "decomposition_subspaces",
]

DEFAULT_MODE_CAP = 14

_SPARSE_DENSITY = 0.05


def to_dense(a) -> np.ndarray:
    return a.toarray() if sparse.issparse(a) else np.asarray(a)


def _mul(a, b):
    if sparse.issparse(a):
        return a @ b
    if sparse.issparse(b):
        return (b.T @ a.T).T
    return a @ b


def matmul_chain(*mats):
    out = mats[0]
    for m in mats[1:]:
        out = _mul(out, m)
    return out


def dag(a):
    if sparse.issparse(a):
        return a.conj().T.tocsr()
    return np.asarray(a).conj().T


def frob_norm(a) -> float:
    if sparse.issparse(a):
        return float(sparse.linalg.norm(a, "fro"))
    return float(np.linalg.norm(a, "fro"))


def residual(a, b) -> float:
    if sparse.issparse(a) and sparse.issparse(b):
        return frob_norm((a - b).tocsr())
    return float(np.linalg.norm(to_dense(a) - to_dense(b), "fro"))


def _maybe_sparse(a):
    if sparse.issparse(a):
        return a
    a = np.asarray(a)
    nnz = int(np.count_nonzero(a))
    if nnz <= _SPARSE_DENSITY * a.size:
        return sparse.csr_matrix(a)
    return a


class FockSpaceCAR:
    """Finite fermionic Fock space over k modes.

    Basis states are occupation bitmasks 0 .. 2**k - 1 (bit i set means mode
    i occupied), ordered by integer value; a mode-i creator picks up the sign
    (-1)**(number of occupied modes below i).
    """

    def __init__(self, modes: int, mode_cap: int = DEFAULT_MODE_CAP):
        if modes > mode_cap:
            raise ResourceError(
                f"{modes} modes exceed the configured cap of {mode_cap}"
            )
        if modes < 1:
            raise StructuralError("a Fock space needs at least one mode")
        self.modes = modes
        self.dim = 1 << modes
        states = np.arange(self.dim, dtype=np.int64)
        pop = np.zeros(self.dim, dtype=np.int64)
        for b in range(modes):
            pop += (states >> b) & 1
        self._popcount = pop
        self._annihilators = [self._build_annihilator(i, states) for i in range(modes)]
        self._parity = sparse.diags(
            np.where(pop % 2, -1.0, 1.0).astype(complex), format="csr"
        )

    def _build_annihilator(self, i: int, states: np.ndarray) -> sparse.csr_matrix:
        bit = 1 << i
        occupied = states[(states & bit) != 0]
        below = occupied & (bit - 1)
        signs = np.ones(occupied.size)
        for b in range(i):
            signs *= np.where((below >> b) & 1, -1.0, 1.0)
        rows = occupied - bit
        return sparse.csr_matrix(
            (signs.astype(complex), (rows, occupied)),
            shape=(self.dim, self.dim),
        )

    def annihilator_of_mode(self, i: int) -> sparse.csr_matrix:
        return self._annihilators[i]

    def parity(self) -> sparse.csr_matrix:
        return self._parity

    def occupation_numbers(self) -> np.ndarray:
        return self._popcount.copy()

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v


@dataclass(frozen=True)
class FockRep:
    """Fock representation of a fermionic selfdual space."""

    space: SelfdualSpace
    fock: FockSpaceCAR

    def annihilator(self, g: np.ndarray) -> sparse.csr_matrix:
        """a(g) = sum conj(g_i) a_i; antilinear in g."""
        out = sparse.csr_matrix((self.fock.dim, self.fock.dim), dtype=complex)
        for i, coeff in enumerate(np.asarray(g, dtype=complex)):
            if coeff != 0:
                out = out + np.conj(coeff) * self.fock.annihilator_of_mode(i)
        return out

    def creator(self, g: np.ndarray) -> sparse.csr_matrix:
        return dag(self.annihilator(g))

    def pi(self, f: np.ndarray) -> sparse.csr_matrix:
        """Selfdual field f -> a*(P1 f) + a(P1 f*); linear in f."""
        f = np.asarray(f, dtype=complex)
        k = self.space.modes
        if f.shape != (2 * k,):
            raise StructuralError(f"field vector length {f.shape}, expected {2 * k}")
        return self.creator(f[:k]) + self.annihilator(np.conj(f[k:]))

    def parity(self) -> sparse.csr_matrix:
        return self.fock.parity()

    def psi(self, f: np.ndarray) -> sparse.csr_matrix:
        """Twisted field i * pi(f) * parity; commutes with even products of pi's."""
        return 1j * (self.pi(f) @ self.fock.parity())

    def psi_word(self, vectors) -> sparse.csr_matrix:
        out = sparse.identity(self.fock.dim, dtype=complex, format="csr")
        for vec in vectors:
            out = out @ self.psi(vec)
        return out

    def vacuum(self) -> np.ndarray:
        return self.fock.vacuum()


def build_rep(space: SelfdualSpace, mode_cap: int = DEFAULT_MODE_CAP) -> FockRep:
    if space.kind != CAR:
        raise PreconditionError("build_rep requires a fermionic space")
    return FockRep(space=space, fock=FockSpaceCAR(space.modes, mode_cap))


def _quadratic_creation(b: np.ndarray, rep: FockRep) -> sparse.csr_matrix:
    """(1/2) sum b_pq a*_p a*_q for antisymmetric b."""
    k = rep.space.modes
    out = sparse.csr_matrix((rep.fock.dim, rep.fock.dim), dtype=complex)
    for p in range(k):
        ap = dag(rep.fock.annihilator_of_mode(p))
        for q in range(p + 1, k):
            if b[p, q] != 0:
                out = out + b[p, q] * (ap @ dag(rep.fock.annihilator_of_mode(q)))
    return out


def _quadratic_annihilation(b: np.ndarray, rep: FockRep) -> sparse.csr_matrix:
    k = rep.space.modes
    out = sparse.csr_matrix((rep.fock.dim, rep.fock.dim), dtype=complex)
    for p in range(k):
        ap = rep.fock.annihilator_of_mode(p)
        for q in range(p + 1, k):
            if b[p, q] != 0:
                out = out + b[p, q] * (ap @ rep.fock.annihilator_of_mode(q))
    return out


def _exp_nilpotent(x: sparse.csr_matrix) -> sparse.csr_matrix:
    out = sparse.identity(x.shape[0], dtype=complex, format="csr")
    term = sparse.identity(x.shape[0], dtype=complex, format="csr")
    j = 1
    while True:
        term = (term @ x) / j
        term.eliminate_zeros()
        if term.nnz == 0:
            break
        out = out + term
        j += 1
    return out.tocsr()


def lambda_multiplicative(
    a_block: np.ndarray, rep_source: FockRep, rep_target: FockRep
) -> np.ndarray | sparse.csr_matrix:
    """Multiplicative second quantization of a particle-block map.

    Sends a source Slater state built from modes i1 < ... < il to the target
    state built from the columns A e_i1, ..., A e_il; multiplicative in A and
    isometric exactly when A is.
    """
    a_block = np.asarray(a_block, dtype=complex)
    m, n = rep_target.space.modes, rep_source.space.modes
    if a_block.shape != (m, n):
        raise StructuralError(f"block shape {a_block.shape}, expected {(m, n)}")
    creators = [rep_target.creator(a_block[:, i]) for i in range(n)]
    dim_s, dim_t = rep_source.fock.dim, rep_target.fock.dim
    out = np.zeros((dim_t, dim_s), dtype=complex)
    out[0, 0] = 1.0
    for s in range(1, dim_s):
        low = (s & -s).bit_length() - 1
        out[:, s] = creators[low] @ out[:, s ^ (1 << low)]
    return _maybe_sparse(out)


@dataclass(frozen=True)
class WickBlocks:
    """Blocks of a quadratic intertwining Hamiltonian.

    creation_pair acts on the target space, annihilation_pair on the source
    space, and mixed is the particle-block map P1 + H11 whose multiplicative
    second quantization forms the middle factor of the Wick exponential.
    """

    creation_pair: np.ndarray = field(repr=False)
    mixed: np.ndarray = field(repr=False)
    annihilation_pair: np.ndarray = field(repr=False)

    def full(self) -> np.ndarray:
        """Assemble the square Hamiltonian; only defined for equal mode counts."""
        m = self.creation_pair.shape[0]
        n = self.annihilation_pair.shape[0]
        if m != n:
            raise PreconditionError("full Hamiltonian exists only in the square case")
        h11 = self.mixed - np.eye(m)
        h = np.zeros((2 * m, 2 * m), dtype=complex)
        h[:m, :m] = h11
        h[:m, m:] = self.creation_pair
        h[m:, :m] = self.annihilation_pair
        h[m:, m:] = -h11.T
        return h


def _split_square_hamiltonian(h: np.ndarray, modes: int, tol: float = 1e-10) -> WickBlocks:
    h = np.asarray(h, dtype=complex)
    k = modes
    if h.shape != (2 * k, 2 * k):
        raise StructuralError(f"Hamiltonian shape {h.shape}, expected {(2 * k, 2 * k)}")
    h11, h12 = h[:k, :k], h[:k, k:]
    h21, h22 = h[k:, :k], h[k:, k:]
    scale = max(1.0, float(np.linalg.norm(h)))
    if (
        np.linalg.norm(h12 + h12.T) > tol * scale
        or np.linalg.norm(h21 + h21.T) > tol * scale
        or np.linalg.norm(h22 + h11.T) > tol * scale
    ):
        raise StructuralError("Hamiltonian is not antisymmetric")
    return WickBlocks(
        creation_pair=h12, mixed=np.eye(k) + h11, annihilation_pair=h21
    )


def wick_exponential(
    h: np.ndarray | WickBlocks,
    rep: FockRep,
    rep_source: FockRep | None = None,
):
    """Wick-ordered exponential of a quadratic Hamiltonian.

    Evaluated in factorized form: pair-creation exponential, multiplicative
    second quantization of P1 + H11, pair-annihilation exponential.  The
    normal-ordered series has no cross contractions between the three groups,
    so this product is the exact sum of the series.
    """
    if rep_source is None:
        rep_source = rep
    if isinstance(h, WickBlocks):
        blocks = h
    else:
        if rep_source is not rep:
            raise PreconditionError("matrix-form Hamiltonians must be square")
        blocks = _split_square_hamiltonian(h, rep.space.modes)
    exp_cre = _exp_nilpotent(_quadratic_creation(blocks.creation_pair, rep))
    exp_ann = _exp_nilpotent(_quadratic_annihilation(blocks.annihilation_pair, rep_source))
    mid = lambda_multiplicative(blocks.mixed, rep_source, rep)
    return matmul_chain(exp_cre, mid, exp_ann)


def hamiltonian_from_T(v: BogoliubovMap, t: np.ndarray) -> WickBlocks:
    """Quadratic Hamiltonian whose Wick exponential intertwines pi and pi o V.

    t must solve T V11 = V21 on ran V11^H (the canonical choice does); the
    blocks are then H12 = conj(T), P1 + H11 = V11 + T^H V21 and
    H21 = (V22^H - V12^H T^H) V21.
    """
    if v.kind != CAR:
        raise PreconditionError("hamiltonian_from_T requires a fermionic map")
    v11, v12, v21, v22 = components(v)
    t = np.asarray(t, dtype=complex)
    m = v.target.modes
    if t.shape != (m, m):
        raise StructuralError(f"pairing block shape {t.shape}, expected {(m, m)}")
    return WickBlocks(
        creation_pair=t.conj(),
        mixed=v11 + t.conj().T @ v21,
        annihilation_pair=(v22.conj().T - v12.conj().T @ t.conj().T) @ v21,
    )


def multi_indices_strict(m: int) -> tuple[tuple[int, ...], ...]:
    """All strictly increasing multi-indices over {0, ..., m-1}, lexicographic."""
    return tuple(
        sorted(_chain.from_iterable(combinations(range(m), l) for l in range(m + 1)))
    )


def _shuffle_sign(subset: tuple[int, ...]) -> int:
    # sign of the permutation sorting (subset, complement) back to 1..L
    return -1 if sum(i - j for j, i in enumerate(subset)) % 2 else 1


@dataclass(frozen=True)
class ImplementerFamily:
    """The 2**M isometries implementing a fermionic Bogoliubov map."""

    v: BogoliubovMap
    data: CanonicalCarData
    rep_source: FockRep
    rep_target: FockRep
    indices: tuple[tuple[int, ...], ...]
    members: tuple = field(repr=False)
    defect_basis: np.ndarray = field(repr=False)

    @property
    def statistics_dimension(self) -> int:
        return len(self.members)

    def member(self, index: tuple[int, ...]):
        return self.members[self.indices.index(tuple(index))]


def implementers(
    v: BogoliubovMap,
    data: CanonicalCarData | None = None,
    rep_source: FockRep | None = None,
    rep_target: FockRep | None = None,
    defect_basis: np.ndarray | None = None,
    mode_cap: int = DEFAULT_MODE_CAP,
) -> ImplementerFamily:
    """Construct the canonical implementer family of a fermionic map.

    Each member is an isometry from the source Fock space to the target Fock
    space, indexed by a strictly increasing multi-index over the defect basis
    of P_V(ker V^H); an alternative orthonormal defect basis may be supplied.
    """
    if v.kind != CAR:
        raise PreconditionError("implementers requires a fermionic map")
    if data is None:
        data = decompose(v)
    if rep_source is None:
        rep_source = build_rep(v.source, mode_cap)
    if rep_target is None:
        rep_target = build_rep(v.target, mode_cap)
    t, h = data.param.t, data.param.h
    m = v.target.modes
    g_basis = data.k_v if defect_basis is None else np.asarray(defect_basis, dtype=complex)
    m_v = g_basis.shape[1]
    l_v = h.shape[1]

    blocks = hamiltonian_from_T(v, t)
    eta = wick_exponential(blocks, rep_target, rep_source)
    norm_factor = float(
        np.exp(-0.25 * np.linalg.slogdet(np.eye(m) + t.conj().T @ t)[1])
    )

    # hole-mode fields on the target, their partner fields on the source
    psi_holes_t = []
    psi_holes_s = []
    for r in range(l_v):
        e_full = np.concatenate([h[:, r], np.zeros(m, dtype=complex)])
        psi_holes_t.append(rep_target.psi(e_full))
        psi_holes_s.append(rep_source.psi(v.matrix.conj().T @ e_full))

    core = None
    for subset in multi_indices_strict(l_v):
        comp = tuple(i for i in range(l_v) if i not in subset)
        sign = _shuffle_sign(subset) * (-1) ** len(comp)
        term = eta
        for r in reversed(subset):
            term = _mul(psi_holes_t[r], term)
        for r in comp:
            term = _mul(term, psi_holes_s[r])
        core = sign * term if core is None else core + sign * term
    core = norm_factor * core

    indices = multi_indices_strict(m_v)
    psi_defect = [rep_target.psi(g_basis[:, j]) for j in range(m_v)]
    members = []
    for alpha in indices:
        op = core
        for j in reversed(alpha):
            op = _mul(psi_defect[j], op)
        members.append(op)
    return ImplementerFamily(
        v=v,
        data=data,
        rep_source=rep_source,
        rep_target=rep_target,
        indices=indices,
        members=tuple(members),
        defect_basis=g_basis,
    )


@dataclass(frozen=True)
class CuntzReport:
    gram_residual: float
    completeness_residual: float
    intertwining_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return (
            self.gram_residual <= self.tol
            and self.completeness_residual <= self.tol
            and self.intertwining_residual <= self.tol
        )

    def as_dict(self) -> dict:
        return {
            "gram_residual": self.gram_residual,
            "completeness_residual": self.completeness_residual,
            "intertwining_residual": self.intertwining_residual,
            "tol": self.tol,
            "passed": self.passed,
        }


def verify_cuntz(family: ImplementerFamily, tol: float = 1e-10) -> CuntzReport:
    """Check orthonormality, completeness, and the intertwining relation."""
    dim_s = family.rep_source.fock.dim
    dim_t = family.rep_target.fock.dim
    eye_s = sparse.identity(dim_s, dtype=complex, format="csr")
    gram_res = 0.0
    for i, a in enumerate(family.members):
        for j, b in enumerate(family.members):
            prod = _mul(dag(a), b)
            ref = eye_s if i == j else 0.0 * eye_s
            gram_res = max(gram_res, residual(prod, ref))
    total = None
    for a in family.members:
        term = _mul(a, dag(a))
        total = term if total is None else total + term
    comp_res = residual(total, sparse.identity(dim_t, dtype=complex, format="csr"))
    inter_res = 0.0
    n2 = family.v.source.total_dim
    for i in range(n2):
        f = np.zeros(n2, dtype=complex)
        f[i] = 1.0
        pi_s = family.rep_source.pi(f)
        pi_t = family.rep_target.pi(family.v.matrix @ f)
        for a in family.members:
            inter_res = max(inter_res, residual(_mul(a, pi_s), _mul(pi_t, a)))
    return CuntzReport(
        gram_residual=float(gram_res),
        completeness_residual=float(comp_res),
        intertwining_residual=float(inter_res),
        tol=tol,
    )


def _psi_defect_word(family: ImplementerFamily, alpha: tuple[int, ...]):
    g = family.defect_basis
    out = sparse.identity(family.rep_target.fock.dim, dtype=complex, format="csr")
    for j in alpha:
        out = _mul(out, family.rep_target.psi(g[:, j]))
    return out


def _gamma_word(rep: FockRep, vectors: np.ndarray, alpha, beta):
    """Twisted-field word of g_alpha (g_gamma)* g_gamma (g_beta)*.

    vectors holds the defect modes as columns; gamma runs over the modes
    outside alpha and beta.
    """
    gamma = tuple(sorted(set(range(vectors.shape[1])) - set(alpha) - set(beta)))

    def word(idx):
        out = sparse.identity(rep.fock.dim, dtype=complex, format="csr")
        for j in idx:
            out = _mul(out, rep.psi(vectors[:, j]))
        return out

    mid = word(gamma)
    return matmul_chain(word(alpha), dag(mid), mid, dag(word(beta)))


def matrix_units(
    family: ImplementerFamily, alpha: tuple[int, ...], beta: tuple[int, ...]
) -> tuple[object, object, float]:
    """Psi_alpha Psi_beta^H and its closed polynomial form in the defect fields.

    Returns the actual product, the twisted-field word of
    g_alpha (g_gamma)* g_gamma (g_beta)* with gamma the modes outside alpha
    and beta, and the deviation between the two.
    """
    alpha, beta = tuple(alpha), tuple(beta)
    product = _mul(family.member(alpha), dag(family.member(beta)))
    poly = _gamma_word(family.rep_target, family.defect_basis, alpha, beta)
    return product, poly, float(residual(product, poly))


def bosonized_statistics(
    family: ImplementerFamily,
    next_family: ImplementerFamily | None = None,
    tol: float = 1e-9,
) -> tuple[object, float, dict]:
    """Statistics operator and statistics parameter of the implemented map.

    The statistics operator is sum over (a, b) of Psi_a Psi_b Psi_a^H Psi_b^H;
    composing two implementers needs the endomorphism one truncation level up,
    so next_family must implement a map whose source is family's target (a
    square map composes with itself).  Returns the operator, the parameter
    (trace-normalized left inverse value, always 1/d here), and a report with
    the exchange, parameter, and closed-polynomial residuals.
    """
    if next_family is None:
        if not family.v.is_square:
            raise PreconditionError(
                "statistics of a non-square map needs the next-level family"
            )
        next_family = family
    if next_family.v.source != family.v.target:
        raise StructuralError("next-level family must start at the target space")
    if len(next_family.members) != len(family.members):
        raise StructuralError("the two families must have equal statistics dimension")
    d = len(family.members)
    eps = None
    for i in range(d):
        for j in range(d):
            left = _mul(next_family.members[i], family.members[j])
            right = _mul(next_family.members[j], family.members[i])
            term = _mul(left, dag(right))
            eps = term if eps is None else eps + term

    # closed form: signed sum of Gamma words times the transported words
    l_2 = next_family.data.param.h.shape[1]
    rep2 = next_family.rep_target
    poly = None
    for i, alpha in enumerate(family.indices):
        for j, beta in enumerate(family.indices):
            sign = (-1) ** ((len(alpha) + len(beta)) * (len(beta) + l_2))
            outer = _gamma_word(rep2, next_family.defect_basis, alpha, beta)
            inner = _gamma_word(
                rep2, next_family.v.matrix @ family.defect_basis, beta, alpha
            )
            term = sign * _mul(outer, inner)
            poly = term if poly is None else poly + term
    poly_res = residual(eps, poly)

    exchange_res = 0.0
    for i in range(d):
        for j in range(d):
            lhs = _mul(eps, _mul(next_family.members[i], family.members[j]))
            rhs = _mul(next_family.members[j], family.members[i])
            exchange_res = max(exchange_res, residual(lhs, rhs))
    lam_mat = None
    for a2 in next_family.members:
        term = _mul(dag(a2), _mul(eps, a2))
        lam_mat = term if lam_mat is None else lam_mat + term
    lam_mat = lam_mat / d
    dim_mid = family.rep_target.fock.dim
    lam = float(np.real(np.trace(to_dense(lam_mat)))) / dim_mid
    lam_res = residual(
        lam_mat, (1.0 / d) * sparse.identity(dim_mid, dtype=complex, format="csr")
    )
    report = {
        "exchange_residual": float(exchange_res),
        "parameter_residual": float(lam_res),
        "polynomial_residual": float(poly_res),
        "parameter": lam,
        "expected_parameter": 1.0 / d,
        "tol": tol,
        "passed": bool(
            exchange_res <= tol and lam_res <= tol and poly_res <= tol
        ),
    }
    return eps, lam, report


def left_inverse(family: ImplementerFamily, x):
    """(1/d) sum_j Psi_j^H x Psi_j; maps target-space operators to source-space ones."""
    d = len(family.members)
    out = None
    for a in family.members:
        term = _mul(dag(a), _mul(x, a))
        out = term if out is None else out + term
    return out / d


def central_state(rep: FockRep, x) -> complex:
    """The trace state, the unique value of the central quasi-free state."""
    return complex(np.trace(to_dense(x))) / rep.fock.dim


def param_to_vector(rep: FockRep, param) -> np.ndarray:
    """Normalized Fock vector whose two-point function is the given projection.

    Built as creators over the hole basis applied to the pair-condensate
    exponential of conj(T) acting on the vacuum.
    """
    t, h = param.t, param.h
    if t.shape[0] != rep.space.modes:
        raise StructuralError("parameter and representation mode counts differ")
    vec = _exp_nilpotent(_quadratic_creation(t.conj(), rep)) @ rep.vacuum()
    for r in range(h.shape[1] - 1, -1, -1):
        vec = rep.creator(h[:, r]) @ vec
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise PreconditionError("parameter produced a null vector")
    return vec / norm


def decomposition_subspaces(
    v: BogoliubovMap,
    rep_source: FockRep,
    rep_target: FockRep,
    rank_tol: float = 1e-10,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Cyclic decomposition of the target Fock space under the transported algebra.

    For each strictly increasing multi-index over an orthonormal basis of the
    particle modes annihilated by V^H, returns the seed vector (twisted fields
    of those modes applied to the vacuum) together with the projector onto the
    subspace it generates under the transported field operators.  The
    projectors are pairwise orthogonal and sum to the identity.
    """
    m = v.target.modes
    range_proj = v.matrix @ v.matrix.conj().T
    f_block = kernel_basis(range_proj[:m, :m], rank_tol)
    n_v = f_block.shape[1]
    dim_t = rep_target.fock.dim
    generators = []
    for i in range(v.source.total_dim):
        f = np.zeros(v.source.total_dim, dtype=complex)
        f[i] = 1.0
        generators.append(to_dense(rep_target.pi(v.matrix @ f)))
    out = []
    for alpha in multi_indices_strict(n_v):
        word = sparse.identity(dim_t, dtype=complex, format="csr")
        for j in alpha:
            f_full = np.concatenate([f_block[:, j], np.zeros(m, dtype=complex)])
            word = _mul(word, rep_target.psi(f_full))
        seed = to_dense(word @ rep_target.vacuum()).ravel()
        seed = seed / np.linalg.norm(seed)
        basis = [seed]
        frontier = list(basis)
        while frontier:
            new_frontier = []
            for vec in frontier:
                for gen in generators:
                    cand = gen @ vec
                    for b in basis:
                        cand = cand - b * np.vdot(b, cand)
                    nrm = np.linalg.norm(cand)
                    if nrm > 1e-8:
                        cand /= nrm
                        basis.append(cand)
                        new_frontier.append(cand)
            frontier = new_frontier
        mat = np.stack(basis, axis=1)
        out.append((seed, mat @ mat.conj().T))
    return out
