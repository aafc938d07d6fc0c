"""Gauge invariance, charge counting, and the charge models of implementer spans.

Oracles: the worked examples are small enough that the expected characters,
charges, and transported subspaces are known in closed form (diagonal circle
actions, particle-hole corners, shift embeddings).  The fermionic model
comparisons are exact up to roundoff; the bosonic example is charge-graded,
so its sectors are resolved exactly by the cutoff as well.
"""

import math

import numpy as np
import pytest

from fockimpl import (
    CAR,
    CCR,
    BogoliubovMap,
    GaugeElement,
    PreconditionError,
    SelfdualSpace,
    StructuralError,
    build_rep,
    build_rep_ccr,
    charge_conjugation,
    charge_decomposition_car,
    charge_decomposition_ccr,
    charge_operator,
    charge_projection,
    conjugate_car,
    decompose,
    decompose_ccr,
    implementers,
    implementers_ccr,
    is_gauge_invariant,
    rotation_U_T,
    rotation_U_Z,
    second_quantize,
    u1_charge,
    u1_element,
    validate,
)
from fockimpl.car_fock import to_dense
from fockimpl.selfdual import assemble_blocks

LAM = 0.7


def car_space(k: int) -> SelfdualSpace:
    return SelfdualSpace(CAR, k)


def ccr_space(k: int) -> SelfdualSpace:
    return SelfdualSpace(CCR, k)


def particle_hole_map() -> BogoliubovMap:
    """Isometry K(2) -> K(3) shifting the plus mode and converting a hole.

    Source modes carry charges (+1, -1), target modes (+1, +1, -1); the map
    sends the plus particle up one step and the minus hole to the bottom plus
    particle, so its hole subspace is the bottom mode and its determinant
    character under the circle is exp(i*lam).
    """
    v11 = np.zeros((3, 2), dtype=complex)
    v11[1, 0] = 1.0
    v12 = np.zeros((3, 2), dtype=complex)
    v12[0, 1] = 1.0
    return assemble_blocks(car_space(2), car_space(3), v11, v12, v12.conj(), v11.conj())


def wide_particle_hole_map() -> BogoliubovMap:
    """Same corner action as particle_hole_map, embedded K(2) -> K(4)."""
    v11 = np.zeros((4, 2), dtype=complex)
    v11[1, 0] = 1.0
    v12 = np.zeros((4, 2), dtype=complex)
    v12[0, 1] = 1.0
    return assemble_blocks(car_space(2), car_space(4), v11, v12, v12.conj(), v11.conj())


def mode_flip(modes: int, site: int) -> BogoliubovMap:
    """Square unitary exchanging particle and hole on one site."""
    sp = car_space(modes)
    v11 = np.eye(modes, dtype=complex)
    v11[site, site] = 0.0
    v12 = np.zeros((modes, modes), dtype=complex)
    v12[site, site] = 1.0
    return assemble_blocks(sp, sp, v11, v12, v12.conj(), v11.conj())


def shift_embedding(n: int, k: int) -> BogoliubovMap:
    """Diagonal isometry K(n) -> K(n+k) moving every mode up by k steps."""
    m = n + k
    v11 = np.zeros((m, n), dtype=complex)
    for i in range(n):
        v11[i + k, i] = 1.0
    zero = np.zeros((m, n), dtype=complex)
    return assemble_blocks(car_space(n), car_space(m), v11, zero, zero, v11.conj())


def squeeze_map() -> BogoliubovMap:
    """Bosonic isometry K(1) -> K(2), charge (-1) source into (+1, -1) target.

    The embedded mode is squeezed against the hole of the remaining mode; the
    pairing is charge balanced, so the map commutes with the circle action.
    """
    b1, b2 = ccr_space(1), ccr_space(2)
    z = np.array([[0.0, 0.25], [0.25, 0.0]], dtype=complex)
    u_sq = rotation_U_Z(z, b2)
    e11 = np.array([[0.0], [1.0]], dtype=complex)
    zero = np.zeros((2, 1), dtype=complex)
    emb = assemble_blocks(b1, b2, e11, zero, zero, e11.conj())
    return BogoliubovMap(source=b1, target=b2, matrix=u_sq.matrix @ emb.matrix)


class TestGaugeElement:
    def test_matrix_is_diagonal_against_reference(self):
        u = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        el = GaugeElement(u)
        full = el.matrix
        assert np.allclose(full[:2, :2], u)
        assert np.allclose(full[2:, 2:], u.conj())
        assert np.allclose(full[:2, 2:], 0.0)
        assert np.allclose(full[2:, :2], 0.0)

    def test_u1_element_phases(self):
        el = u1_element(LAM, [1, -1, 2])
        want = np.diag(np.exp(1j * LAM * np.array([1, -1, 2])))
        assert np.allclose(el.u11, want)

    def test_rejects_nonunitary(self):
        with pytest.raises(StructuralError, match="unitary"):
            GaugeElement(np.array([[1.0, 0.0], [0.0, 2.0]]))

    def test_rejects_nonsquare(self):
        with pytest.raises(StructuralError, match="square"):
            GaugeElement(np.zeros((2, 3)))

    def test_bogoliubov_wrapper_is_valid_for_both_kinds(self):
        el = u1_element(0.3, [1, -1])
        for space in (car_space(2), ccr_space(2)):
            v = el.bogoliubov(space)
            assert validate(v).passed

    def test_bogoliubov_mode_mismatch(self):
        with pytest.raises(StructuralError, match="modes"):
            u1_element(0.3, [1, -1]).bogoliubov(car_space(3))


class TestIsGaugeInvariant:
    def test_invariant_map_passes(self):
        v = particle_hole_map()
        gen = (u1_element(LAM, [1, -1]), u1_element(LAM, [1, 1, -1]))
        report = is_gauge_invariant(v, [gen])
        assert report.passed and bool(report)
        assert report.max_residual <= 1e-14

    def test_violating_map_fails_with_residual(self):
        v = mode_flip(2, 0)
        report = is_gauge_invariant(v, [u1_element(LAM, [1, 1])])
        assert not report.passed
        # the flip anticommutes with the phase: residual |e^{i lam} - e^{-i lam}|
        want = abs(np.exp(1j * LAM) - np.exp(-1j * LAM))
        assert report.residuals[0] == pytest.approx(want, rel=1e-12)

    def test_rectangular_needs_generator_pair(self):
        v = particle_hole_map()
        with pytest.raises(StructuralError, match="both truncation levels"):
            is_gauge_invariant(v, [u1_element(LAM, [1, -1])])

    def test_size_mismatch_rejected(self):
        v = particle_hole_map()
        bad = (u1_element(LAM, [1, -1, 1]), u1_element(LAM, [1, 1, -1]))
        with pytest.raises(StructuralError, match="modes"):
            is_gauge_invariant(v, [bad])


class TestSecondQuantize:
    def test_car_homomorphism(self):
        rng = np.random.default_rng(11)
        rep = build_rep(car_space(3))
        x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        u = np.linalg.qr(x)[0]
        w = np.linalg.qr(x + 1.0)[0]
        gu = to_dense(second_quantize(GaugeElement(u), rep))
        gw = to_dense(second_quantize(GaugeElement(w), rep))
        guw = to_dense(second_quantize(GaugeElement(u @ w), rep))
        assert np.linalg.norm(gu @ gw - guw) <= 1e-11
        assert np.linalg.norm(gu.conj().T @ gu - np.eye(gu.shape[0])) <= 1e-11

    def test_car_field_intertwining(self):
        rng = np.random.default_rng(12)
        space = car_space(3)
        rep = build_rep(space)
        u = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))[0]
        el = GaugeElement(u)
        gamma = to_dense(second_quantize(el, rep))
        f = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        lhs = gamma @ to_dense(rep.pi(f)) @ gamma.conj().T
        rhs = to_dense(rep.pi(el.matrix @ f))
        assert np.linalg.norm(lhs - rhs) <= 1e-11

    def test_car_fixes_vacuum(self):
        rep = build_rep(car_space(2))
        gamma = to_dense(second_quantize(u1_element(0.4, [1, -1]), rep))
        assert np.linalg.norm(gamma @ rep.vacuum() - rep.vacuum()) <= 1e-14

    def test_ccr_homomorphism(self):
        rng = np.random.default_rng(13)
        rep = build_rep_ccr(ccr_space(2), n_max=6)
        x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        u = np.linalg.qr(x)[0]
        w = np.linalg.qr(x + 0.5)[0]
        gu = to_dense(second_quantize(GaugeElement(u), rep))
        gw = to_dense(second_quantize(GaugeElement(w), rep))
        guw = to_dense(second_quantize(GaugeElement(u @ w), rep))
        assert np.linalg.norm(gu @ gw - guw) <= 1e-11

    def test_charge_operator_generates_circle_car(self):
        rep = build_rep(car_space(3))
        charges = [1, -1, 2]
        q = charge_operator(rep, charges)
        gamma = to_dense(second_quantize(u1_element(LAM, charges), rep))
        want = np.diag(np.exp(1j * LAM * np.diag(q)))
        assert np.linalg.norm(gamma - want) <= 1e-12

    def test_charge_operator_generates_circle_ccr(self):
        rep = build_rep_ccr(ccr_space(2), n_max=5)
        charges = [1, -1]
        q = charge_operator(rep, charges)
        gamma = to_dense(second_quantize(u1_element(LAM, charges), rep))
        want = np.diag(np.exp(1j * LAM * np.diag(q)))
        assert np.linalg.norm(gamma - want) <= 1e-12

    def test_charge_vector_shape_checked(self):
        rep = build_rep(car_space(2))
        with pytest.raises(StructuralError, match="charge vector"):
            charge_operator(rep, [1, -1, 1])


class TestU1Charge:
    def test_identity_is_neutral(self):
        sp = car_space(3)
        v = BogoliubovMap(sp, sp, np.eye(6, dtype=complex))
        assert u1_charge(v) == 0

    @pytest.mark.parametrize("k", [1, 2])
    def test_shift_embedding_carries_its_step_count(self, k):
        assert u1_charge(shift_embedding(4, k)) == k

    def test_graded_square_unitary_is_neutral(self):
        sp = car_space(2)
        g11 = np.diag([np.exp(0.2j), np.exp(-0.5j)])
        zero = np.zeros((2, 2), dtype=complex)
        v = assemble_blocks(sp, sp, g11, zero, zero, g11.conj())
        assert u1_charge(v, charge_projection(sp, [0])) == 0

    def test_particle_hole_corner_charge(self):
        v = wide_particle_hole_map()
        p_s = charge_projection(car_space(2), [0])
        p_t = charge_projection(car_space(4), [0, 1])
        assert u1_charge(v, p_s, p_t) == 1

    def test_non_invariant_map_rejected(self):
        v = mode_flip(2, 0)
        with pytest.raises(PreconditionError, match="circle"):
            u1_charge(v, charge_projection(car_space(2), [0]))

    def test_rejects_non_basis_projection(self):
        sp = car_space(2)
        v = BogoliubovMap(sp, sp, np.eye(4, dtype=complex))
        p = np.diag([1.0, 0.0, 0.0, 0.0]).astype(complex)
        with pytest.raises(StructuralError, match="complementary"):
            u1_charge(v, p)

    def test_rectangular_needs_both_projections(self):
        v = wide_particle_hole_map()
        p_s = charge_projection(car_space(2), [0])
        with pytest.raises(StructuralError, match="both levels"):
            u1_charge(v, p_s)


class TestChargeConjugation:
    def test_structure(self):
        sp = car_space(4)
        c = charge_conjugation(sp, [0, 1])
        mat = c.matrix
        assert validate(c).passed
        assert np.linalg.norm(mat - mat.conj().T) <= 1e-14
        assert np.linalg.norm(mat @ mat - np.eye(8)) <= 1e-14

    def test_unbalanced_split_rejected(self):
        with pytest.raises(StructuralError, match="balanced"):
            charge_conjugation(car_space(3), [0])

    def test_nonunitary_corner_rejected(self):
        with pytest.raises(StructuralError, match="unitary"):
            charge_conjugation(car_space(2), [0], c_pm=np.array([[2.0]]))

    def test_conjugate_requires_fermionic_map(self):
        b = ccr_space(2)
        v = BogoliubovMap(b, b, np.eye(4, dtype=complex))
        with pytest.raises(PreconditionError, match="fermionic"):
            conjugate_car(v, np.eye(4, dtype=complex))

    def test_conjugation_must_be_selfadjoint(self):
        sp = car_space(2)
        v = BogoliubovMap(sp, sp, np.eye(4, dtype=complex))
        u11 = np.diag([1j, 1.0])
        zero = np.zeros((2, 2), dtype=complex)
        bad = assemble_blocks(sp, sp, u11, zero, zero, u11.conj())
        with pytest.raises(PreconditionError, match="self-adjoint"):
            conjugate_car(v, bad)

    def test_rectangular_needs_both_levels(self):
        v = wide_particle_hole_map()
        c_t = charge_conjugation(car_space(4), [0, 1])
        with pytest.raises(PreconditionError, match="both truncation levels"):
            conjugate_car(v, c_t)

    def test_involutive(self):
        v = wide_particle_hole_map()
        c_t = charge_conjugation(car_space(4), [0, 1])
        c_s = charge_conjugation(car_space(2), [0])
        v_cc = conjugate_car(conjugate_car(v, c_t, c_s), c_t, c_s)
        assert np.linalg.norm(v_cc.matrix - v.matrix) <= 1e-14

    def test_pairing_block_transport(self):
        # charge-neutral pairing between the plus and minus sectors
        sp = car_space(4)
        rng = np.random.default_rng(5)
        tau = 0.3 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        t = np.zeros((4, 4), dtype=complex)
        t[:2, 2:] = tau
        t[2:, :2] = -tau.T
        v = rotation_U_T(sp, t)
        c = charge_conjugation(sp, [0, 1])
        vc = conjugate_car(v, c)
        assert validate(vc).passed
        t_v = decompose(v).param.t
        t_vc = decompose(vc).param.t
        c21 = c.matrix[4:, :4]
        assert np.linalg.norm(c21 @ t_v.conj() @ c21.T - t_vc) <= 1e-12

    def test_subspace_transport(self):
        v = wide_particle_hole_map()
        sp_t = car_space(4)
        c_t = charge_conjugation(sp_t, [0, 1])
        c_s = charge_conjugation(car_space(2), [0])
        vc = conjugate_car(v, c_t, c_s)
        d, dc = decompose(v), decompose(vc)
        assert dc.k_v.shape[1] == d.k_v.shape[1]
        assert dc.l_v == d.l_v

        def transported(cols):
            conj_cols = np.column_stack(
                [sp_t.conjugate_vector(cols[:, j]) for j in range(cols.shape[1])]
            )
            return c_t.matrix @ conj_cols

        k_want = transported(d.k_v)
        assert np.linalg.norm(
            k_want @ np.linalg.pinv(k_want) - dc.k_v @ dc.k_v.conj().T
        ) <= 1e-12
        h_full = np.vstack([d.param.h, np.zeros_like(d.param.h)])
        hc_full = np.vstack([dc.param.h, np.zeros_like(dc.param.h)])
        h_want = transported(h_full)
        assert np.linalg.norm(
            h_want @ np.linalg.pinv(h_want) - hc_full @ np.linalg.pinv(hc_full)
        ) <= 1e-12


class TestChargeDecompositionCAR:
    def test_particle_hole_example(self):
        v = particle_hole_map()
        gen = (u1_element(LAM, [1, -1]), u1_element(LAM, [1, 1, -1]))
        report = charge_decomposition_car(v, [gen])
        assert report.hole_dim == 1
        assert report.defect_dim == 1
        assert report.block_dims == (1, 1)
        assert report.characters[0] == pytest.approx(np.exp(1j * LAM), abs=1e-12)
        assert report.max_equivalence_residual <= 1e-12
        assert max(report.subspace_residuals) <= 1e-12
        assert max(report.condensate_residuals) <= 1e-12
        assert max(report.pairing_residuals) <= 1e-12
        assert report.passed

    def test_mode_flip_character(self):
        v = mode_flip(2, 0)
        gen = GaugeElement(np.diag([-1.0, np.exp(0.3j)]))
        report = charge_decomposition_car(v, [gen])
        assert report.hole_dim == 1
        assert report.defect_dim == 0
        assert report.characters[0] == pytest.approx(-1.0, abs=1e-12)
        assert report.max_equivalence_residual <= 1e-12

    def test_character_additivity_on_unitary_pairs(self):
        # flips on different sites compose to the double flip
        v, w = mode_flip(2, 0), mode_flip(2, 1)
        vw = BogoliubovMap(v.source, v.target, v.matrix @ w.matrix)
        gens = [
            GaugeElement(np.diag([-1.0, -1.0])),
            GaugeElement(np.diag([1.0, -1.0])),
        ]
        rv = charge_decomposition_car(v, gens)
        rw = charge_decomposition_car(w, gens)
        rvw = charge_decomposition_car(vw, gens)
        for i in range(len(gens)):
            assert rvw.characters[i] == pytest.approx(
                rv.characters[i] * rw.characters[i], abs=1e-12
            )

    def test_character_conjugate_under_charge_conjugation(self):
        v = wide_particle_hole_map()
        gen = (u1_element(LAM, [1, -1]), u1_element(LAM, [1, 1, -1, -1]))
        c_t = charge_conjugation(car_space(4), [0, 1])
        c_s = charge_conjugation(car_space(2), [0])
        vc = conjugate_car(v, c_t, c_s)
        r = charge_decomposition_car(v, [gen])
        rc = charge_decomposition_car(vc, [gen])
        assert rc.characters[0] == pytest.approx(np.conj(r.characters[0]), abs=1e-12)
        assert rc.max_equivalence_residual <= 1e-12

    def test_character_matches_kernel_count_charge(self):
        v = wide_particle_hole_map()
        p_s = charge_projection(car_space(2), [0])
        p_t = charge_projection(car_space(4), [0, 1])
        charge = u1_charge(v, p_s, p_t)
        gen = (u1_element(LAM, [1, -1]), u1_element(LAM, [1, 1, -1, -1]))
        report = charge_decomposition_car(v, [gen])
        assert report.defect_dim == 2
        assert report.block_dims == (1, 2, 1)
        assert report.characters[0] == pytest.approx(np.exp(1j * LAM * charge), abs=1e-12)
        assert report.max_equivalence_residual <= 1e-12

    def test_non_invariant_map_rejected(self):
        v = mode_flip(2, 0)
        with pytest.raises(PreconditionError, match="gauge invariant"):
            charge_decomposition_car(v, [u1_element(LAM, [1, 1])])

    def test_bosonic_map_rejected(self):
        with pytest.raises(PreconditionError, match="fermionic"):
            charge_decomposition_car(squeeze_map(), [])


class TestChargeDecompositionCCR:
    def test_squeeze_example(self):
        v = squeeze_map()
        gen = (u1_element(LAM, [-1]), u1_element(LAM, [1, -1]))
        data = decompose_ccr(v)
        family = implementers_ccr(v, data=data, n_terms=3, n_max=12)
        report = charge_decomposition_ccr(v, [gen], data=data, family=family)
        assert report.defect_dim == 1
        assert report.block_dims == (1, 1, 1, 1)
        assert report.max_equivalence_residual <= 1e-10
        assert max(report.subspace_residuals) <= 1e-10
        assert max(report.condensate_residuals) <= 1e-10
        assert max(report.pairing_residuals) <= 1e-10
        assert report.passed

    def test_length_sectors_carry_integer_charges(self):
        # one defect direction of charge +1: length-l words transform by e^{il lam}
        v = squeeze_map()
        gen = (u1_element(LAM, [-1]), u1_element(LAM, [1, -1]))
        family = implementers_ccr(v, n_terms=3, n_max=12)
        report = charge_decomposition_ccr(v, [gen], family=family)
        vac = family.rep_source.vacuum()
        gamma = second_quantize(u1_element(LAM, [1, -1]), family.rep_target)
        for alpha, member in zip(family.indices, family.members):
            image = to_dense(member @ vac)
            want = np.exp(1j * LAM * len(alpha)) * image
            assert np.linalg.norm(to_dense(gamma @ image) - want) <= 1e-10
        assert report.passed

    def test_fermionic_map_rejected(self):
        with pytest.raises(PreconditionError, match="bosonic"):
            charge_decomposition_ccr(particle_hole_map(), [])

    def test_non_invariant_map_rejected(self):
        v = squeeze_map()
        bad = (u1_element(LAM, [1]), u1_element(LAM, [1, -1]))
        with pytest.raises(PreconditionError, match="gauge invariant"):
            charge_decomposition_ccr(v, [bad])


class TestChargeSectorTransport:
    """A shift embedding moves every total-number eigenspace up by its charge."""

    @pytest.mark.parametrize("k", [1, 2])
    def test_top_member_shifts_sectors(self, k):
        n = 3
        v = shift_embedding(n, k)
        charge = u1_charge(v)
        assert charge == k
        family = implementers(v)
        top = family.member(tuple(range(k)))
        rep_s, rep_t = family.rep_source, family.rep_target
        q_s = np.diag(charge_operator(rep_s, np.ones(n))).real.astype(int)
        q_t = np.diag(charge_operator(rep_t, np.ones(n + k))).real.astype(int)
        dense = to_dense(top)
        # operator phase identity: quantized circle conjugation gives e^{ik lam}
        gamma_s = np.diag(np.exp(1j * LAM * q_s))
        gamma_t = np.diag(np.exp(1j * LAM * q_t))
        assert np.linalg.norm(
            gamma_t @ dense @ gamma_s.conj().T - np.exp(1j * LAM * k) * dense
        ) <= 1e-12
        # sector-by-sector: the charge-q eigenspace lands in charge q + k
        for q in range(n + 1):
            cols = dense[:, q_s == q]
            outside = cols[q_t != q + k, :]
            assert np.linalg.norm(outside) <= 1e-14
            # isometric on the sector, so the image spans rank-many directions
            assert np.linalg.matrix_rank(cols) == cols.shape[1]
