"""Gauge actions on selfdual spaces and the charge structure of implementers.

A gauge element is a unitary on particle modes acting diagonally against the
reference projection, U = diag(u, conj(u)).  For a gauge-invariant Bogoliubov
map the vacuum images of its implementer family span a finite-dimensional
representation of the gauge group; this module verifies the expected shape of
that representation (a determinant twist tensored with exterior powers of the
defect action for fermions, plain symmetric powers for bosons) and extracts
U(1) charges by counting kernels of the plus-corner block.

Fermionic checks are exact up to roundoff.  Bosonic ones inherit the
occupation cutoff of the representation, so their residuals carry the same
protected-sector caveats as the implementer machinery itself.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .selfdual import (
    CAR,
    BogoliubovMap,
    PreconditionError,
    SelfdualSpace,
    StructuralError,
    conjugate_operator,
    deterministic_onb,
    kernel_basis,
    psd_inv_sqrt,
)
from .car_structure import CanonicalCarData, decompose
from .ccr_structure import CanonicalCcrData, decompose_ccr
from .car_fock import (
    FockRep,
    ImplementerFamily,
    _exp_nilpotent,
    _quadratic_creation,
    implementers,
    lambda_multiplicative,
    to_dense,
)
from .ccr_fock import (
    DEFAULT_N_MAX,
    FockRepCCR,
    ImplementerFamilyCCR,
    implementers_ccr,
    lambda_multiplicative_ccr,
)

__all__ = [
    "GaugeElement",
    "GaugeInvarianceReport",
    "ChargeReportCAR",
    "ChargeReportCCR",
    "charge_conjugation",
    "charge_decomposition_car",
    "charge_decomposition_ccr",
    "charge_operator",
    "charge_projection",
    "conjugate_car",
    "is_gauge_invariant",
    "second_quantize",
    "u1_charge",
    "u1_element",
]


@dataclass(frozen=True)
class GaugeElement:
    """A diagonal gauge transformation, determined by its particle block.

    The full action on the selfdual space is diag(u11, conj(u11)), which
    commutes with the reference projection and conjugation by construction
    and is a (kappa-)unitary Bogoliubov map for either statistics.
    """

    u11: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        u = np.asarray(self.u11, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise StructuralError(f"gauge block must be square, got {u.shape}")
        defect = np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]))
        if defect > 1e-10 * max(1.0, u.shape[0]):
            raise StructuralError(
                f"gauge block must be unitary (defect {defect:.3e})"
            )
        object.__setattr__(self, "u11", u)

    @property
    def modes(self) -> int:
        return self.u11.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        k = self.modes
        out = np.zeros((2 * k, 2 * k), dtype=complex)
        out[:k, :k] = self.u11
        out[k:, k:] = self.u11.conj()
        return out

    def bogoliubov(self, space: SelfdualSpace) -> BogoliubovMap:
        if space.modes != self.modes:
            raise StructuralError(
                f"gauge element has {self.modes} modes, space has {space.modes}"
            )
        return BogoliubovMap(source=space, target=space, matrix=self.matrix)


def u1_element(lam: float, charges) -> GaugeElement:
    """Circle-group element exp(i lam q) acting mode-wise with integer charges."""
    charges = np.asarray(charges)
    return GaugeElement(np.diag(np.exp(1j * lam * charges).astype(complex)))


def _coerce_element(obj, modes: int | None = None) -> GaugeElement:
    el = obj if isinstance(obj, GaugeElement) else GaugeElement(np.asarray(obj))
    if modes is not None and el.modes != modes:
        raise StructuralError(
            f"gauge element acts on {el.modes} modes, expected {modes}"
        )
    return el


def _generator_pair(gen, v: BogoliubovMap) -> tuple[GaugeElement, GaugeElement]:
    """Normalize a generator to (source element, target element).

    A single element is used on both sides of a square map; a rectangular map
    needs an explicit pair giving the group action at both truncation levels.
    """
    if isinstance(gen, GaugeElement) or isinstance(gen, np.ndarray):
        el = _coerce_element(gen)
        if v.source.modes != v.target.modes:
            raise StructuralError(
                "a rectangular map needs gauge elements at both truncation levels"
            )
        return (
            _coerce_element(el, v.source.modes),
            _coerce_element(el, v.target.modes),
        )
    try:
        raw_s, raw_t = gen
    except (TypeError, ValueError):
        raise StructuralError(
            "generator must be a gauge element or a (source, target) pair"
        ) from None
    return (
        _coerce_element(raw_s, v.source.modes),
        _coerce_element(raw_t, v.target.modes),
    )


@dataclass(frozen=True)
class GaugeInvarianceReport:
    """Per-generator intertwining residuals ||V U_source - U_target V||."""

    residuals: tuple[float, ...]
    tol: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def __bool__(self) -> bool:
        return self.passed


def is_gauge_invariant(
    v: BogoliubovMap, generators, tol: float = 1e-10
) -> GaugeInvarianceReport:
    """Check that a Bogoliubov map intertwines the given gauge generators."""
    residuals = []
    for gen in generators:
        el_s, el_t = _generator_pair(gen, v)
        residuals.append(
            float(
                np.linalg.norm(
                    v.matrix @ el_s.matrix - el_t.matrix @ v.matrix, 2
                )
            )
        )
    return GaugeInvarianceReport(residuals=tuple(residuals), tol=tol)


def second_quantize(u: GaugeElement, rep):
    """Multiplicative quantization of a gauge element on a Fock representation.

    Fixes the vacuum, intertwines the fields with the one-particle action,
    and is multiplicative in the gauge element.
    """
    u = _coerce_element(u, rep.space.modes)
    if isinstance(rep, FockRepCCR):
        return lambda_multiplicative_ccr(u.u11, rep, rep)
    return lambda_multiplicative(u.u11, rep, rep)


def charge_operator(rep, charges) -> np.ndarray:
    """Diagonal Fock operator counting occupations weighted by mode charges.

    The quantization of u1_element(lam, charges) equals exp(i*lam*Q) with Q
    the returned diagonal.
    """
    charges = np.asarray(charges, dtype=float)
    if charges.shape != (rep.space.modes,):
        raise StructuralError(
            f"charge vector shape {charges.shape}, expected {(rep.space.modes,)}"
        )
    if isinstance(rep, FockRepCCR):
        weights = rep.fock.occupations @ charges
    else:
        states = np.arange(rep.fock.dim, dtype=np.int64)
        weights = np.zeros(rep.fock.dim)
        for i in range(rep.space.modes):
            weights += charges[i] * ((states >> i) & 1)
    return np.diag(weights.astype(complex))


# ---------------------------------------------------------------------------
# U(1) charge by kernel counting


def _check_secondary_projection(
    p: np.ndarray, space: SelfdualSpace, tol: float = 1e-10
) -> np.ndarray:
    p = np.asarray(p, dtype=complex)
    d = space.total_dim
    if p.shape != (d, d):
        raise StructuralError(f"projection shape {p.shape}, expected {(d, d)}")
    scale = max(1.0, float(np.linalg.norm(p, 2)))
    if np.linalg.norm(p @ p - p, 2) > tol * scale or np.linalg.norm(
        p - p.conj().T, 2
    ) > tol * scale:
        raise StructuralError("secondary projection must be an orthogonal projection")
    p1 = space.p1()
    if np.linalg.norm(p @ p1 - p1 @ p, 2) > tol:
        raise StructuralError(
            "secondary projection must commute with the reference projection"
        )
    comp = conjugate_operator(p, space, space)
    if np.linalg.norm(p + comp - np.eye(d), 2) > tol:
        raise StructuralError(
            "secondary projection must be complementary to its conjugate"
        )
    return p


def u1_charge(
    v: BogoliubovMap,
    p=None,
    p_target=None,
    rank_tol: float = 1e-10,
    tol: float = 1e-8,
) -> int:
    """Net U(1) charge of a gauge-invariant map, by corner kernel counting.

    p (and p_target for a rectangular map) is the secondary basis projection
    generating the circle action; it defaults to the reference projection, the
    total-number circle.  The charge is dim ker(V++^H) - dim ker(V++) for the
    plus-corner block V++ = p+ V p+, the step count of the shift that V
    performs across the charge grading.
    """
    space_s, space_t = v.source, v.target
    p_s = space_s.p1() if p is None else _check_secondary_projection(p, space_s)
    if p_target is None:
        if space_s.total_dim == space_t.total_dim:
            p_t = p_s
        elif p is None:
            p_t = space_t.p1()
        else:
            raise StructuralError(
                "a rectangular map needs secondary projections at both levels"
            )
    else:
        p_t = _check_secondary_projection(p_target, space_t)

    # V must preserve the charge grading: both off-corner blocks vanish.
    grading = max(
        np.linalg.norm((np.eye(space_t.total_dim) - p_t) @ v.matrix @ p_s, 2),
        np.linalg.norm(p_t @ v.matrix @ (np.eye(space_s.total_dim) - p_s), 2),
    )
    if grading > tol:
        raise PreconditionError(
            f"map is not invariant under the given circle action (residual {grading:.3e})"
        )

    basis_s = deterministic_onb(p_s @ space_s.p1(), rank_tol)
    basis_t = deterministic_onb(p_t @ space_t.p1(), rank_tol)
    corner = basis_t.conj().T @ v.matrix @ basis_s
    return int(
        kernel_basis(corner.conj().T, rank_tol).shape[1]
        - kernel_basis(corner, rank_tol).shape[1]
    )


# ---------------------------------------------------------------------------
# Charge conjugation


def charge_projection(space: SelfdualSpace, plus_modes) -> np.ndarray:
    """Secondary basis projection with p+ the given particle modes.

    Its range is spanned by the listed particle modes together with the hole
    modes over the complementary sites; the generated circle action gives the
    listed modes charge +1 and the remaining ones charge -1.
    """
    m = space.modes
    plus = sorted(set(int(i) for i in plus_modes))
    if plus and (plus[0] < 0 or plus[-1] >= m):
        raise StructuralError(f"mode indices {plus} out of range for {m} modes")
    out = np.zeros((2 * m, 2 * m), dtype=complex)
    for i in plus:
        out[i, i] = 1.0
    for j in range(m):
        if j not in plus:
            out[m + j, m + j] = 1.0
    return out


def charge_conjugation(
    space: SelfdualSpace, plus_modes, c_pm: np.ndarray | None = None
) -> BogoliubovMap:
    """Self-adjoint unitary swapping the charge-plus and charge-minus sectors.

    Built from a unitary c_pm carrying the minus-sector holes to the
    plus-sector particles; the full map is that corner plus its adjoint,
    extended equivariantly.  It squares to the identity, commutes with the
    circle action of charge_projection(space, plus_modes) composed with
    charge flip, and conjugating a Bogoliubov map by it flips its charge.
    """
    m = space.modes
    plus = sorted(set(int(i) for i in plus_modes))
    minus = [j for j in range(m) if j not in plus]
    if len(plus) != len(minus):
        raise StructuralError(
            f"charge conjugation needs a balanced split, got {len(plus)}+/{len(minus)}-"
        )
    if plus and (plus[0] < 0 or plus[-1] >= m):
        raise StructuralError(f"mode indices {plus} out of range for {m} modes")
    h = len(plus)
    if c_pm is None:
        c_pm = np.eye(h, dtype=complex)
    c_pm = np.asarray(c_pm, dtype=complex)
    if c_pm.shape != (h, h):
        raise StructuralError(f"corner shape {c_pm.shape}, expected {(h, h)}")
    if np.linalg.norm(c_pm.conj().T @ c_pm - np.eye(h)) > 1e-10 * max(1.0, h):
        raise StructuralError("corner must be unitary")

    b_plus = np.zeros((2 * m, h), dtype=complex)
    for col, i in enumerate(plus):
        b_plus[i, col] = 1.0
    b_minus = np.zeros((2 * m, h), dtype=complex)
    for col, j in enumerate(minus):
        b_minus[m + j, col] = 1.0
    corner = b_plus @ c_pm @ b_minus.conj().T
    half = corner + corner.conj().T
    mat = half + conjugate_operator(half, space, space)
    return BogoliubovMap(source=space, target=space, matrix=mat)


def _check_conjugation(c, space: SelfdualSpace, tol: float = 1e-10) -> np.ndarray:
    if isinstance(c, BogoliubovMap):
        if c.source is not space and c.source.total_dim != space.total_dim:
            raise StructuralError("conjugation level does not match the map")
        mat = c.matrix
    else:
        mat = np.asarray(c, dtype=complex)
    d = space.total_dim
    if mat.shape != (d, d):
        raise StructuralError(f"conjugation shape {mat.shape}, expected {(d, d)}")
    if np.linalg.norm(mat - mat.conj().T, 2) > tol:
        raise PreconditionError("conjugation must be self-adjoint")
    if np.linalg.norm(mat.conj().T @ mat - np.eye(d), 2) > tol:
        raise PreconditionError("conjugation must be unitary")
    if np.linalg.norm(conjugate_operator(mat, space, space) - mat, 2) > tol:
        raise PreconditionError("conjugation must be conjugation-equivariant")
    return mat


def conjugate_car(v: BogoliubovMap, c_target, c_source=None) -> BogoliubovMap:
    """Charge conjugate of a fermionic map: conjugation o V o conjugation.

    The involutions must be self-adjoint unitary Bogoliubov maps (squares to
    one follows); a rectangular map needs one at each truncation level.  The
    result has the same index and statistics dimension as the input, with the
    canonical subspaces carried across and the U(1) charge flipped in sign.
    """
    if v.kind != CAR:
        raise PreconditionError("conjugate_car requires a fermionic map")
    mat_t = _check_conjugation(c_target, v.target)
    if c_source is None:
        if not v.is_square:
            raise PreconditionError(
                "a rectangular map needs conjugations at both truncation levels"
            )
        mat_s = mat_t
    else:
        mat_s = _check_conjugation(c_source, v.source)
    return BogoliubovMap(
        source=v.source, target=v.target, matrix=mat_t @ v.matrix @ mat_s
    )


# ---------------------------------------------------------------------------
# Charge decomposition of the implementer span


def _gram_orthonormalized(images: np.ndarray, gamma) -> np.ndarray:
    """Matrix of the quantized gauge element on the span of the given vectors."""
    gram = images.conj().T @ images
    corr = psd_inv_sqrt(gram)
    return corr @ (images.conj().T @ to_dense(gamma @ images)) @ corr


def _weak_coeff(alpha: tuple[int, ...]) -> float:
    prod = 1.0
    for count in Counter(alpha).values():
        prod *= math.factorial(count)
    return prod ** -0.5


def _exterior_block(u_k: np.ndarray, det_h: complex, indices) -> np.ndarray:
    """det_h times the exterior-power action on strict multi-indices."""
    dim = len(indices)
    out = np.zeros((dim, dim), dtype=complex)
    for a, alpha in enumerate(indices):
        for b, beta in enumerate(indices):
            if len(alpha) != len(beta):
                continue
            if alpha:
                minor = np.linalg.det(u_k[np.ix_(beta, alpha)])
            else:
                minor = 1.0
            out[b, a] = det_h * minor
    return out


def _symmetric_block(u_k: np.ndarray, indices) -> np.ndarray:
    """Symmetric-power action on weak multi-indices, via permanent sums."""
    dim = len(indices)
    out = np.zeros((dim, dim), dtype=complex)
    for a, alpha in enumerate(indices):
        for b, beta in enumerate(indices):
            if len(alpha) != len(beta):
                continue
            l = len(alpha)
            total = 0.0 + 0.0j
            for sigma in itertools.permutations(range(l)):
                term = 1.0 + 0.0j
                for i in range(l):
                    term *= u_k[beta[sigma[i]], alpha[i]]
                total += term
            out[b, a] = _weak_coeff(beta) * _weak_coeff(alpha) * total
    return out


@dataclass(frozen=True)
class ChargeReportCAR:
    """Gauge action on a fermionic implementer span versus its charge model.

    The model is the determinant character on the hole subspace tensored with
    exterior powers of the gauge action on the defect subspace; equivalence
    is measured in Frobenius norm against the Gram-orthonormalized action on
    the vacuum images, one entry per generator.
    """

    hole_dim: int
    defect_dim: int
    block_dims: tuple[int, ...]
    characters: tuple[complex, ...]
    invariance_residuals: tuple[float, ...]
    subspace_residuals: tuple[float, ...]
    condensate_residuals: tuple[float, ...]
    pairing_residuals: tuple[float, ...]
    equivalence_residuals: tuple[float, ...]
    tol: float

    @property
    def max_equivalence_residual(self) -> float:
        return max(self.equivalence_residuals, default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_equivalence_residual <= self.tol

    def as_dict(self) -> dict:
        return {
            "kind": "CAR",
            "hole_dim": self.hole_dim,
            "defect_dim": self.defect_dim,
            "block_dims": list(self.block_dims),
            "characters": [[z.real, z.imag] for z in self.characters],
            "invariance_residuals": list(self.invariance_residuals),
            "subspace_residuals": list(self.subspace_residuals),
            "condensate_residuals": list(self.condensate_residuals),
            "pairing_residuals": list(self.pairing_residuals),
            "equivalence_residuals": list(self.equivalence_residuals),
            "tol": self.tol,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class ChargeReportCCR:
    """Gauge action on a bosonic implementer span versus its charge model.

    The model is the symmetric-power action on the defect subspace, with no
    determinant twist; residuals are cutoff-limited, certified on the sectors
    the occupation cutoff resolves.
    """

    defect_dim: int
    block_dims: tuple[int, ...]
    invariance_residuals: tuple[float, ...]
    subspace_residuals: tuple[float, ...]
    condensate_residuals: tuple[float, ...]
    pairing_residuals: tuple[float, ...]
    equivalence_residuals: tuple[float, ...]
    tol: float

    @property
    def max_equivalence_residual(self) -> float:
        return max(self.equivalence_residuals, default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_equivalence_residual <= self.tol

    def as_dict(self) -> dict:
        return {
            "kind": "CCR",
            "defect_dim": self.defect_dim,
            "block_dims": list(self.block_dims),
            "invariance_residuals": list(self.invariance_residuals),
            "subspace_residuals": list(self.subspace_residuals),
            "condensate_residuals": list(self.condensate_residuals),
            "pairing_residuals": list(self.pairing_residuals),
            "equivalence_residuals": list(self.equivalence_residuals),
            "tol": self.tol,
            "passed": self.passed,
        }


def _subspace_invariance(full: np.ndarray, basis: np.ndarray) -> float:
    """||(1 - P) U P|| for the orthogonal projection P onto the column span."""
    if basis.shape[1] == 0:
        return 0.0
    proj = basis @ basis.conj().T
    moved = (np.eye(full.shape[0]) - proj) @ full @ proj
    return float(np.linalg.norm(moved, 2))


def _pairing_invariance(u11: np.ndarray, t: np.ndarray) -> float:
    """Invariance of the pair-creation form: u conj-acts trivially on t."""
    if t.size == 0:
        return 0.0
    return float(np.linalg.norm(u11.conj() @ t @ u11.conj().T - t, 2))


def charge_decomposition_car(
    v: BogoliubovMap,
    generators,
    data: CanonicalCarData | None = None,
    family: ImplementerFamily | None = None,
    tol: float = 1e-9,
) -> ChargeReportCAR:
    """Match the gauge action on a fermionic implementer span to its model.

    For each generator: verifies invariance of the map, of the hole and
    defect subspaces, of the pairing block, and of the pair-condensate
    vector, then compares the quantized action on the vacuum images of the
    family against det(hole) times exterior powers of the defect action.
    """
    if v.kind != CAR:
        raise PreconditionError("charge_decomposition_car requires a fermionic map")
    generators = list(generators)
    pairs = [_generator_pair(gen, v) for gen in generators]
    inv = is_gauge_invariant(v, generators)
    if not inv.passed:
        raise PreconditionError(
            f"map is not gauge invariant (residual {inv.max_residual:.3e})"
        )
    if data is None:
        data = decompose(v)
    if family is None:
        family = implementers(v, data=data)
    rep_t = family.rep_target
    t_block, h_cols = data.param.t, data.param.h
    k_basis = family.defect_basis
    m_v = k_basis.shape[1]

    # pair-condensate vector exp((1/2) conj(T) a* a*) vacuum, unnormalized
    condensate = to_dense(
        _exp_nilpotent(_quadratic_creation(t_block.conj(), rep_t)) @ rep_t.vacuum()
    )
    cond_norm = float(np.linalg.norm(condensate))

    vac_s = family.rep_source.vacuum()
    images = np.column_stack([to_dense(op @ vac_s) for op in family.members])

    subspace_res = []
    condensate_res = []
    pairing_res = []
    equivalence_res = []
    characters = []
    for el_s, el_t in pairs:
        full_t = el_t.matrix
        res_h = _subspace_invariance(el_t.u11, h_cols)
        res_k = _subspace_invariance(full_t, k_basis)
        subspace_res.append(max(res_h, res_k))
        pairing_res.append(_pairing_invariance(el_t.u11, t_block))

        gamma = second_quantize(el_t, rep_t)
        condensate_res.append(
            float(np.linalg.norm(to_dense(gamma @ condensate) - condensate))
            / cond_norm
        )

        det_h = (
            complex(np.linalg.det(h_cols.conj().T @ el_t.u11 @ h_cols))
            if h_cols.shape[1]
            else 1.0 + 0.0j
        )
        characters.append(det_h)
        u_k = k_basis.conj().T @ full_t @ k_basis
        model = _exterior_block(u_k, det_h, family.indices)
        action = _gram_orthonormalized(images, gamma)
        equivalence_res.append(float(np.linalg.norm(action - model)))

    return ChargeReportCAR(
        hole_dim=h_cols.shape[1],
        defect_dim=m_v,
        block_dims=tuple(math.comb(m_v, l) for l in range(m_v + 1)),
        characters=tuple(characters),
        invariance_residuals=inv.residuals,
        subspace_residuals=tuple(subspace_res),
        condensate_residuals=tuple(condensate_res),
        pairing_residuals=tuple(pairing_res),
        equivalence_residuals=tuple(equivalence_res),
        tol=tol,
    )


def charge_decomposition_ccr(
    v: BogoliubovMap,
    generators,
    data: CanonicalCcrData | None = None,
    family: ImplementerFamilyCCR | None = None,
    tol: float = 1e-5,
    n_terms: int = 2,
    n_max: int = DEFAULT_N_MAX,
) -> ChargeReportCCR:
    """Match the gauge action on a bosonic implementer span to its model.

    The defect subspace carries the kappa inner product, so the gauge matrix
    on it is extracted kappa-orthonormally; the model on length-l words is
    the symmetric power of that matrix and there is no determinant factor.
    """
    if v.kind == CAR:
        raise PreconditionError("charge_decomposition_ccr requires a bosonic map")
    generators = list(generators)
    pairs = [_generator_pair(gen, v) for gen in generators]
    inv = is_gauge_invariant(v, generators)
    if not inv.passed:
        raise PreconditionError(
            f"map is not gauge invariant (residual {inv.max_residual:.3e})"
        )
    if data is None:
        data = decompose_ccr(v)
    if family is None:
        family = implementers_ccr(v, data=data, n_terms=n_terms, n_max=n_max)
    rep_t = family.rep_target
    z_block = data.param.z
    g_basis = family.defect_basis
    m_v = g_basis.shape[1]
    c_t = v.target.c_matrix()

    vac_s = family.rep_source.vacuum()
    images = np.column_stack([to_dense(op @ vac_s) for op in family.members])
    base = images[:, 0]
    base_norm = float(np.linalg.norm(base))

    # kappa projection onto the defect subspace; g is kappa-orthonormal
    kappa_dual = g_basis.conj().T @ c_t

    subspace_res = []
    condensate_res = []
    pairing_res = []
    equivalence_res = []
    lengths = sorted({len(alpha) for alpha in family.indices})
    for el_s, el_t in pairs:
        full_t = el_t.matrix
        if m_v:
            proj = g_basis @ kappa_dual
            moved = (np.eye(full_t.shape[0]) - proj) @ full_t @ proj
            subspace_res.append(float(np.linalg.norm(moved, 2)))
        else:
            subspace_res.append(0.0)
        pairing_res.append(_pairing_invariance(el_t.u11, z_block))

        gamma = second_quantize(el_t, rep_t)
        condensate_res.append(
            float(np.linalg.norm(to_dense(gamma @ base) - base)) / base_norm
        )

        u_k = kappa_dual @ full_t @ g_basis
        model = _symmetric_block(u_k, family.indices)
        action = _gram_orthonormalized(images, gamma)
        equivalence_res.append(float(np.linalg.norm(action - model)))

    return ChargeReportCCR(
        defect_dim=m_v,
        block_dims=tuple(
            math.comb(m_v + l - 1, l) if m_v else (1 if l == 0 else 0)
            for l in lengths
        ),
        invariance_residuals=inv.residuals,
        subspace_residuals=tuple(subspace_res),
        condensate_residuals=tuple(condensate_res),
        pairing_residuals=tuple(pairing_res),
        equivalence_residuals=tuple(equivalence_res),
        tol=tol,
    )
