"""Worked examples used as regression experiments.

Three constructions are covered.  The rotating two-mode family V(phi) mixes
the lowest particle and hole mode while shifting everything else up one slot;
its transported vacuum state has a single free eigenvalue (1 + sin 2*phi)/2,
so the family sweeps an entire interval of inequivalent sectors at constant
index.  The companion unitary U repairs the kernel of V(3*pi/4)'s plus
corner, giving the standard counterexample to multiplicativity of the sign
character.  Finally, a chiral shift localized on the left half of the unit
circle is assembled from its Fourier coefficients; its off-diagonal blocks
against the Hardy projections stay Hilbert-Schmidt, which we track through a
ladder of truncation levels.

All builders are deterministic: identical inputs give bit-identical arrays.
The circle-picture computations live entirely in the Fourier window
|n| <= n_max, so statements that are exact in the full space hold here up to
a quantifiable leakage term; reports carry that term alongside the residual
it explains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .selfdual import (
    CAR,
    BogoliubovMap,
    NumericalValidityError,
    PreconditionError,
    SelfdualSpace,
    StructuralError,
    index_data,
    kernel_basis,
    real_basis,
    validate,
)
from .car_structure import chi_character, state_operator

# Closed-form majorants of the double sums defining the squared
# Hilbert-Schmidt norms of the two off-diagonal blocks.  The truncated values
# must stay strictly below these at every level.
HS_BOUND_PLUS_MINUS = 9.0 / math.pi**2 + (11.0 / 6.0) ** 2
HS_BOUND_MINUS_PLUS = math.pi**2 / 16.0 + 16.0 / 9.0


def _real_block_isometry(mat: np.ndarray, source: SelfdualSpace, target: SelfdualSpace) -> BogoliubovMap:
    """Wrap a matrix written in the conjugation-fixed real bases."""
    full = real_basis(target) @ mat @ real_basis(source).conj().T
    return BogoliubovMap(source=source, target=target, matrix=full)


def build_example_vphi(phi: float, k: int) -> BogoliubovMap:
    """Rotating two-mode family on k source modes, landing one level up.

    In the real basis f_n^+ = (f_n + f_n^*)/sqrt(2), f_n^- = i(f_n - f_n^*)/sqrt(2):

        V f_0^+ = cos(phi) f_0^+ + sin(phi) f_1^-
        V f_0^- = sin(phi) f_0^- - cos(phi) f_1^+
        V f_n^s = f_{n+1}^s              for n >= 1.

    The index is -2 for every phi, while the transported vacuum state has the
    covariance eigenvalue (1 + sin 2*phi)/2 on the lowest mode, so the family
    interpolates between all admissible values at fixed index.
    """
    if k < 2:
        raise PreconditionError("the rotating family needs at least two source modes")
    src = SelfdualSpace(CAR, k)
    tgt = SelfdualSpace(CAR, k + 1)
    m = k + 1
    c, s = math.cos(phi), math.sin(phi)
    mat = np.zeros((2 * m, 2 * k))
    mat[0, 0] = c
    mat[m + 1, 0] = s
    mat[m, k] = s
    mat[1, k] = -c
    for n in range(1, k):
        mat[n + 1, n] = 1.0
        mat[m + n + 1, k + n] = 1.0
    return _real_block_isometry(mat, src, tgt)


def build_example_ex2_u(modes: int) -> BogoliubovMap:
    """Square unitary pairing the two lowest modes, identity above them.

    Its plus corner has singular values {1/sqrt(2), 1/sqrt(2), 1, ...} and a
    trivial kernel, so its sign character is +1; composed with V(3*pi/4) it
    straightens the rotation into V(pi/2).
    """
    if modes < 2:
        raise PreconditionError("the pairing unitary needs at least two modes")
    sp = SelfdualSpace(CAR, modes)
    r = 1.0 / math.sqrt(2.0)
    mat = np.zeros((2 * modes, 2 * modes))
    mat[0, 0] = r
    mat[modes + 1, 0] = -r
    mat[1, modes] = -r
    mat[modes, modes] = r
    mat[1, 1] = r
    mat[modes, 1] = r
    mat[0, modes + 1] = r
    mat[modes + 1, modes + 1] = r
    for n in range(2, modes):
        mat[n, n] = 1.0
        mat[modes + n, modes + n] = 1.0
    return _real_block_isometry(mat, sp, sp)


def run_example_vphi(phi: float, k: int = 4, tol: float = 1e-12) -> dict:
    """Build V(phi) and check its index and covariance eigenvalue.

    Returns a JSON-ready report; raises NumericalValidityError if the
    computed eigenvalue drifts from (1 + sin 2*phi)/2 by more than tol.
    """
    v = build_example_vphi(phi, k)
    report = validate(v)
    s_op = state_operator(v)
    lam = float(s_op[0, 0].real)
    lam_formula = 0.5 * (1.0 + math.sin(2.0 * phi))
    expected = np.zeros(2 * k, dtype=complex)
    expected[0] = lam_formula
    expected[1:k] = 1.0
    expected[k] = 1.0 - lam_formula
    profile_residual = float(np.abs(s_op - np.diag(expected)).max())
    out = {
        "phi": float(phi),
        "modes": int(k),
        "index": index_data(v).index,
        "lambda": lam,
        "lambda_formula": lam_formula,
        "lambda_residual": abs(lam - lam_formula),
        "state_profile_residual": profile_residual,
        "isometry_residual": report.isometry_residual,
        "tol": float(tol),
    }
    if abs(lam - lam_formula) > tol or profile_residual > math.sqrt(tol):
        raise NumericalValidityError(
            f"covariance eigenvalue off by {abs(lam - lam_formula):.3e} at phi={phi}"
        )
    if index_data(v).index != -2:
        raise NumericalValidityError("rotating family must have index -2")
    return out


def run_example_ex2(k: int = 4, tol: float = 1e-12) -> dict:
    """Reproduce the sign-character pathology on k source modes.

    Asserts U V(3*pi/4) = V(pi/2) within tol and the non-multiplicative
    character triple chi(UV) = +1 while chi(U) chi(V) = -1.  The kernel of
    the plus corner of V(3*pi/4) is the lowest particle mode, which is what
    makes its character negative.
    """
    if k < 3:
        raise PreconditionError("the character pathology needs at least three source modes")
    v34 = build_example_vphi(3.0 * math.pi / 4.0, k)
    v12 = build_example_vphi(math.pi / 2.0, k)
    u = build_example_ex2_u(k + 1)
    uv = BogoliubovMap(
        source=v34.source, target=u.target, matrix=u.matrix @ v34.matrix
    )
    comp_residual = float(np.linalg.norm(uv.matrix - v12.matrix, 2))
    chi_v = chi_character(v34)
    chi_u = chi_character(u)
    chi_uv = chi_character(uv)
    m = k + 1
    u11_singvals = np.linalg.svd(u.matrix[:m, :m], compute_uv=False)
    ker_v11 = kernel_basis(v34.matrix[:m, :k])
    ker_alignment = float(np.abs(ker_v11[0, 0])) if ker_v11.shape[1] == 1 else 0.0
    out = {
        "modes": int(k),
        "composition_residual": comp_residual,
        "chi_v": chi_v,
        "chi_u": chi_u,
        "chi_uv": chi_uv,
        "chi_product": chi_u * chi_v,
        "multiplicative": chi_uv == chi_u * chi_v,
        "u11_singular_values": [float(s) for s in u11_singvals],
        "v11_kernel_dim": int(ker_v11.shape[1]),
        "v11_kernel_alignment": ker_alignment,
        "tol": float(tol),
    }
    if comp_residual > tol:
        raise NumericalValidityError(
            f"U V(3pi/4) differs from V(pi/2) by {comp_residual:.3e}"
        )
    if not (chi_v == -1 and chi_u == 1 and chi_uv == 1):
        raise NumericalValidityError("character triple came out wrong")
    return out


@dataclass(frozen=True)
class DiracTruncation:
    """Fourier window for the circle picture of the chiral shift.

    The plane-wave basis e_n(z) = z^n is kept for |n| <= n_max.  The interval
    basis f_m(z) = sqrt(2) (-1)^m z^{2m} on the left half-circle
    I = {exp(i lam): pi/2 <= lam <= 3 pi/2} is kept for |m| <= m_max.  Its
    coefficients are

        <e_l, f_m> = (-1)^m / sqrt(2)                     l even, l = 2m
        <e_l, f_m> = (sqrt(2)/pi) (-1)^{(l-1)/2} / (2m-l)  l odd,

    and zero for other even l.  Vectors with 2|m| near n_max lose a visible
    part of their odd-frequency tail, so orthonormality of the window columns
    only holds up to a leakage of order 1/n_max.
    """

    n_max: int
    m_max: int

    def __post_init__(self):
        if self.n_max < 1 or self.m_max < 0:
            raise StructuralError("truncation window must be nonempty")
        if 2 * self.m_max > self.n_max:
            raise StructuralError("interval basis must fit the Fourier window")

    @property
    def dim(self) -> int:
        return 2 * self.n_max + 1

    @property
    def interval(self) -> tuple[float, float]:
        return (math.pi / 2.0, 3.0 * math.pi / 2.0)

    def index(self, l: int) -> int:
        """Row position of the frequency-l coefficient."""
        if abs(l) > self.n_max:
            raise StructuralError("frequency outside the window")
        return l + self.n_max

    def local_matrix(self, m_lo: int, m_hi: int) -> np.ndarray:
        """Columns are the coefficient vectors of f_m for m = m_lo .. m_hi."""
        if m_lo > m_hi:
            raise StructuralError("empty interval-basis range")
        if abs(m_lo) > self.m_max or abs(m_hi) > self.m_max:
            raise StructuralError("interval basis index outside the window")
        ls = np.arange(-self.n_max, self.n_max + 1)
        ms = np.arange(m_lo, m_hi + 1)
        out = np.zeros((ls.size, ms.size))
        odd = (ls % 2) != 0
        lo = ls[odd]
        sign = np.where(((lo - 1) // 2) % 2 == 0, 1.0, -1.0)
        out[odd, :] = (math.sqrt(2.0) / math.pi) * sign[:, None] / (
            2 * ms[None, :] - lo[:, None]
        )
        for j, m in enumerate(ms):
            out[2 * m + self.n_max, j] = (-1.0) ** (m % 2) / math.sqrt(2.0)
        return out

    def local_vector(self, m: int) -> np.ndarray:
        return self.local_matrix(m, m)[:, 0]


def dirac_truncation(n_max: int) -> DiracTruncation:
    """Window with the largest interval basis the shift can act on.

    m_max = (n_max - 2) // 2 keeps every f_m the shift produces, including
    the top image f_{m_max}, inside the Fourier window.
    """
    if n_max < 2:
        raise StructuralError("window too small for any shifted mode")
    return DiracTruncation(n_max=n_max, m_max=(n_max - 2) // 2)


def _shift_factors(t: DiracTruncation) -> tuple[np.ndarray, np.ndarray]:
    """Rank factors of v - 1: columns f_{m+1} - f_m against columns f_m."""
    if 2 * t.m_max + 2 > t.n_max:
        raise StructuralError(
            "shift image f_{m_max} must fit the Fourier window: need 2*m_max + 2 <= n_max"
        )
    f = t.local_matrix(0, t.m_max)
    return f[:, 1:] - f[:, :-1], f[:, :-1]


def build_dirac_v(t: DiracTruncation) -> np.ndarray:
    """Chiral shift localized on the left half-circle, as a dense window matrix.

    v = 1 + sum_{m=0}^{m_max-1} (f_{m+1} - f_m) <f_m, .> acts as the unilateral
    shift on the interval basis with m >= 0, as the identity on m < 0, and as
    the identity on anything supported off the interval.  In exact arithmetic
    on the full space v is an isometry; on the window the defect is controlled
    by the leakage of the interval-basis Gram matrix.
    """
    diff, base = _shift_factors(t)
    return np.eye(t.dim) + diff @ base.T


def off_interval_sample(t: DiracTruncation, half_width: float = 1.2, grid: int = 1 << 15) -> np.ndarray:
    """Fourier coefficients of a smooth bump supported off the interval.

    The bump exp(-1/(1 - (lam/half_width)^2)) lives in |lam| < half_width,
    which stays inside the right half-circle for half_width < pi/2.  Smooth
    compact support makes the coefficients decay faster than any power, so
    window leakage dies out rapidly as n_max grows.
    """
    if not 0.0 < half_width < math.pi / 2.0:
        raise StructuralError("bump must sit strictly inside the right half-circle")
    if grid < 4 * t.n_max + 4:
        raise StructuralError("quadrature grid too coarse for the window")
    lam = 2.0 * math.pi * np.arange(grid) / grid
    lam = np.where(lam > math.pi, lam - 2.0 * math.pi, lam)
    x = lam / half_width
    inside = np.abs(x) < 1.0
    g = np.zeros(grid)
    g[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    coeff = np.fft.fft(g) / grid
    out = np.concatenate([coeff[grid - t.n_max :], coeff[: t.n_max + 1]])
    # the bump is even in lam, so the coefficients are real
    return np.ascontiguousarray(out.real)


@dataclass(frozen=True)
class DiracLadderRow:
    n_max: int
    m_max: int
    hs_plus_minus: float
    hs_minus_plus: float


@dataclass(frozen=True)
class DiracLadder:
    """Squared Hilbert-Schmidt norms of the off-diagonal blocks per level."""

    rows: tuple[DiracLadderRow, ...]

    @property
    def monotone(self) -> bool:
        pm = [r.hs_plus_minus for r in self.rows]
        mp = [r.hs_minus_plus for r in self.rows]
        return all(a <= b for a, b in zip(pm, pm[1:])) and all(
            a <= b for a, b in zip(mp, mp[1:])
        )

    @property
    def below_bounds(self) -> bool:
        return all(
            r.hs_plus_minus < HS_BOUND_PLUS_MINUS
            and r.hs_minus_plus < HS_BOUND_MINUS_PLUS
            for r in self.rows
        )

    def as_dict(self) -> dict:
        return {
            "rows": [
                {
                    "n_max": r.n_max,
                    "m_max": r.m_max,
                    "hs_plus_minus": r.hs_plus_minus,
                    "hs_minus_plus": r.hs_minus_plus,
                }
                for r in self.rows
            ],
            "bound_plus_minus": HS_BOUND_PLUS_MINUS,
            "bound_minus_plus": HS_BOUND_MINUS_PLUS,
            "monotone": self.monotone,
            "below_bounds": self.below_bounds,
        }


def _hs_level(t: DiracTruncation) -> DiracLadderRow:
    # Only the rank part of v reaches across the frequency split, so both
    # squared norms reduce to traces of products of m_max-sized Gram
    # matrices; the dense window matrix is never formed.
    diff, base = _shift_factors(t)
    pos = slice(t.n_max, None)
    neg = slice(0, t.n_max)

    def hs_sq(rows_of_diff: slice, rows_of_base: slice) -> float:
        gd = diff[rows_of_diff, :].T @ diff[rows_of_diff, :]
        gb = base[rows_of_base, :].T @ base[rows_of_base, :]
        return float(np.sum(gd * gb))

    return DiracLadderRow(
        n_max=t.n_max,
        m_max=t.m_max,
        hs_plus_minus=hs_sq(pos, neg),
        hs_minus_plus=hs_sq(neg, pos),
    )


def dirac_hs_ladder(levels) -> DiracLadder:
    """Off-diagonal Hilbert-Schmidt norms along increasing truncation levels.

    Levels may be integers (widest admissible interval basis per window) or
    explicit DiracTruncation values; n_max must be strictly increasing.
    """
    ts = [dirac_truncation(x) if isinstance(x, (int, np.integer)) else x for x in levels]
    if not ts:
        raise StructuralError("empty ladder")
    if any(b.n_max <= a.n_max for a, b in zip(ts, ts[1:])):
        raise StructuralError("ladder levels must have strictly increasing n_max")
    return DiracLadder(rows=tuple(_hs_level(t) for t in ts))


@dataclass(frozen=True)
class LocalizationSample:
    """How close the shift is to the identity on one test vector.

    residual is ||v g - g|| / ||g||, leakage is the overlap of g with the
    shift's own interval basis (zero in exact arithmetic for vectors
    supported off the interval, so whatever remains is a window artifact),
    and phase is the Rayleigh quotient <g, v g> / <g, g>, which recovers the
    scalar when v acts as a constant multiple of the identity off the
    interval.
    """

    label: str
    residual: float
    leakage: float
    phase: complex


@dataclass(frozen=True)
class LocalizationReport:
    samples: tuple[LocalizationSample, ...]
    tol: float | None = None

    @property
    def max_residual(self) -> float:
        return max(s.residual for s in self.samples)

    @property
    def passed(self) -> bool:
        return self.tol is None or self.max_residual <= self.tol

    def as_dict(self) -> dict:
        return {
            "samples": [
                {
                    "label": s.label,
                    "residual": s.residual,
                    "leakage": s.leakage,
                    "phase": [s.phase.real, s.phase.imag],
                }
                for s in self.samples
            ],
            "max_residual": self.max_residual,
            "tol": self.tol,
            "passed": self.passed,
        }


def localization_check(v: np.ndarray, t: DiracTruncation, samples, tol: float | None = None) -> LocalizationReport:
    """Measure how far v is from the identity on labelled sample vectors.

    samples is an iterable of (label, coefficient vector) pairs.  Each row
    reports the relative residual together with the interval-basis leakage
    that explains it, plus the detected scalar phase.
    """
    _, base = _shift_factors(t)
    rows = []
    for label, g in samples:
        g = np.asarray(g)
        norm = np.linalg.norm(g)
        if norm == 0.0:
            raise StructuralError(f"sample {label!r} is zero")
        vg = v @ g
        rows.append(
            LocalizationSample(
                label=str(label),
                residual=float(np.linalg.norm(vg - g) / norm),
                leakage=float(np.linalg.norm(base.T @ g) / norm),
                phase=complex(np.vdot(g, vg) / np.vdot(g, g)),
            )
        )
    if not rows:
        raise StructuralError("no samples given")
    return LocalizationReport(samples=tuple(rows), tol=tol)
