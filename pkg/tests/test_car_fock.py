"""Fermionic Fock representations, Wick exponentials, and implementer families.

The Wick exponential has no independent closed form to compare against, but it
is uniquely determined by its vacuum image together with the two commutation
identities against creators and annihilators (induction on particle number),
so those three checks form a complete oracle.
"""

import numpy as np
import pytest
from scipy import sparse
from scipy.linalg import expm

from fockimpl import (
    CAR,
    CCR,
    BogoliubovMap,
    FockSpaceCAR,
    FockStateParamCAR,
    PreconditionError,
    ResourceError,
    SelfdualSpace,
    StructuralError,
    WickBlocks,
    bosonized_statistics,
    build_rep,
    central_state,
    decompose,
    decomposition_subspaces,
    hamiltonian_from_T,
    implementers,
    lambda_multiplicative,
    left_inverse,
    matrix_units,
    multi_indices_strict,
    param_to_projection,
    param_to_vector,
    verify_cuntz,
    wick_exponential,
)
from fockimpl.car_fock import (
    _exp_nilpotent,
    _quadratic_creation,
    _split_square_hamiltonian,
    dag,
    matmul_chain,
    residual,
    to_dense,
)

from util_random import car_map_with_holes, random_car_map, random_param_car


def dense(x):
    return to_dense(x)


def random_antisymmetric(rng, k):
    a = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    return a - a.T


def anticommutator(x, y):
    return dense(x @ y + y @ x)


# ---------------------------------------------------------------------------
# Fock space and field operators


def test_fock_space_dimensions_and_vacuum():
    fock = FockSpaceCAR(4)
    assert fock.dim == 16
    vac = fock.vacuum()
    assert vac[0] == 1.0 and np.linalg.norm(vac) == 1.0
    occ = fock.occupation_numbers()
    assert occ[0] == 0 and occ[-1] == 4
    # each annihilator kills the vacuum
    for i in range(4):
        assert np.linalg.norm(fock.annihilator_of_mode(i) @ vac) == 0.0


def test_mode_cap_is_enforced():
    with pytest.raises(ResourceError):
        FockSpaceCAR(15)
    with pytest.raises(ResourceError):
        build_rep(SelfdualSpace(kind=CAR, modes=16))
    # a raised cap is honored
    assert FockSpaceCAR(15, mode_cap=15).dim == 2**15


def test_build_rep_rejects_bosonic_space():
    with pytest.raises(PreconditionError):
        build_rep(SelfdualSpace(kind=CCR, modes=2))


def test_mode_anticommutation_relations():
    fock = FockSpaceCAR(4)
    eye = np.eye(fock.dim)
    for i in range(4):
        ai = fock.annihilator_of_mode(i)
        for j in range(4):
            aj = fock.annihilator_of_mode(j)
            assert np.allclose(anticommutator(ai, aj), 0.0, atol=1e-14)
            expected = eye if i == j else 0.0 * eye
            assert np.allclose(anticommutator(ai, dag(aj)), expected, atol=1e-14)


def test_field_anticommutator_is_the_pairing():
    rng = np.random.default_rng(11)
    space = SelfdualSpace(kind=CAR, modes=3)
    rep = build_rep(space)
    eye = np.eye(rep.fock.dim)
    for _ in range(4):
        f = rng.normal(size=6) + 1j * rng.normal(size=6)
        g = rng.normal(size=6) + 1j * rng.normal(size=6)
        pairing = np.vdot(space.conjugate_vector(f), g)
        assert np.allclose(
            anticommutator(rep.pi(f), rep.pi(g)), pairing * eye, atol=1e-12
        )


def test_field_adjoint_is_conjugated_argument():
    rng = np.random.default_rng(12)
    space = SelfdualSpace(kind=CAR, modes=3)
    rep = build_rep(space)
    f = rng.normal(size=6) + 1j * rng.normal(size=6)
    assert residual(dag(rep.pi(f)), rep.pi(space.conjugate_vector(f))) < 1e-14


def test_parity_grades_the_fields():
    space = SelfdualSpace(kind=CAR, modes=3)
    rep = build_rep(space)
    gamma = rep.parity()
    assert residual(gamma @ gamma, sparse.identity(8, format="csr")) < 1e-14
    assert np.allclose(dense(gamma)[:, 0], rep.vacuum())
    f = np.arange(1.0, 7.0) + 0.5j
    assert residual(gamma @ rep.pi(f) @ gamma, -rep.pi(f)) < 1e-13


def test_twisted_fields_satisfy_the_same_relations():
    rng = np.random.default_rng(13)
    space = SelfdualSpace(kind=CAR, modes=3)
    rep = build_rep(space)
    eye = np.eye(rep.fock.dim)
    f = rng.normal(size=6) + 1j * rng.normal(size=6)
    g = rng.normal(size=6) + 1j * rng.normal(size=6)
    pairing = np.vdot(space.conjugate_vector(f), g)
    assert np.allclose(
        anticommutator(rep.psi(f), rep.psi(g)), pairing * eye, atol=1e-12
    )
    # orthogonal twisted fields commute with plain fields
    g_perp = g - f * (np.vdot(space.conjugate_vector(f), g)
                      / np.vdot(space.conjugate_vector(f), f))
    comm = dense(rep.psi(f) @ rep.pi(g_perp) - rep.pi(g_perp) @ rep.psi(f))
    assert np.max(np.abs(comm)) < 1e-12


# ---------------------------------------------------------------------------
# quadratic exponentials and multiplicative second quantization


def test_quadratic_creation_matches_pair_sum():
    rng = np.random.default_rng(20)
    space = SelfdualSpace(kind=CAR, modes=4)
    rep = build_rep(space)
    b = random_antisymmetric(rng, 4)
    direct = np.zeros((16, 16), dtype=complex)
    for p in range(4):
        for q in range(p + 1, 4):
            cp = dag(rep.fock.annihilator_of_mode(p))
            cq = dag(rep.fock.annihilator_of_mode(q))
            direct += b[p, q] * dense(cp @ cq)
    assert residual(_quadratic_creation(b, rep), direct) < 1e-13


def test_nilpotent_exponential_matches_dense_expm():
    rng = np.random.default_rng(21)
    space = SelfdualSpace(kind=CAR, modes=4)
    rep = build_rep(space)
    x = _quadratic_creation(random_antisymmetric(rng, 4), rep)
    assert residual(_exp_nilpotent(x), expm(dense(x))) < 1e-11


def test_lambda_multiplicative_functorial():
    rng = np.random.default_rng(22)
    space = SelfdualSpace(kind=CAR, modes=3)
    rep = build_rep(space)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    lam = lambda_multiplicative
    assert residual(lam(np.eye(3), rep, rep), np.eye(8)) < 1e-14
    assert residual(lam(a @ b, rep, rep), dense(lam(a, rep, rep)) @ dense(lam(b, rep, rep))) < 1e-12
    u = np.linalg.qr(a)[0]
    lu = dense(lam(u, rep, rep))
    assert residual(lu.conj().T @ lu, np.eye(8)) < 1e-12
    # vacuum and one-particle action
    vac = rep.vacuum()
    assert np.allclose(dense(lam(a, rep, rep)) @ vac, vac)
    for i in range(3):
        e = np.zeros(3, dtype=complex)
        e[i] = 1.0
        lhs = dense(lam(a, rep, rep)) @ (dag(rep.fock.annihilator_of_mode(i)) @ vac)
        rhs = rep.creator(a[:, i]) @ vac
        assert np.allclose(lhs, dense(rhs).reshape(-1) if sparse.issparse(rhs) else rhs, atol=1e-12)


def test_lambda_multiplicative_rectangular_isometry():
    rng = np.random.default_rng(23)
    rep_s = build_rep(SelfdualSpace(kind=CAR, modes=2))
    rep_t = build_rep(SelfdualSpace(kind=CAR, modes=4))
    a = np.linalg.qr(rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2)))[0]
    lam = dense(lambda_multiplicative(a, rep_s, rep_t))
    assert lam.shape == (16, 4)
    assert residual(lam.conj().T @ lam, np.eye(4)) < 1e-12


# ---------------------------------------------------------------------------
# Wick exponential: vacuum image plus the two commutation identities
# characterize the operator, so these three checks are a complete oracle.


def _square_blocks(rng, k):
    h11 = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    h12 = random_antisymmetric(rng, k)
    h21 = random_antisymmetric(rng, k)
    h = np.zeros((2 * k, 2 * k), dtype=complex)
    h[:k, :k] = h11
    h[:k, k:] = h12
    h[k:, :k] = h21
    h[k:, k:] = -h11.T
    return h, h11, h12, h21


def test_wick_exponential_vacuum_image():
    rng = np.random.default_rng(30)
    space = SelfdualSpace(kind=CAR, modes=5)
    rep = build_rep(space)
    h, _, h12, _ = _square_blocks(rng, 5)
    eta = wick_exponential(h, rep)
    vac_image = dense(eta @ rep.vacuum()).ravel()
    expected = dense(_exp_nilpotent(_quadratic_creation(h12, rep)) @ rep.vacuum()).ravel()
    assert np.linalg.norm(vac_image - expected) < 1e-10


def test_wick_exponential_commutation_identities():
    rng = np.random.default_rng(31)
    k = 5
    space = SelfdualSpace(kind=CAR, modes=k)
    rep = build_rep(space)
    h, h11, h12, h21 = _square_blocks(rng, k)
    eta = dense(wick_exponential(h, rep))
    for _ in range(3):
        f = rng.normal(size=k) + 1j * rng.normal(size=k)
        g = rng.normal(size=k) + 1j * rng.normal(size=k)
        cre = dense(rep.creator(f))
        lhs = eta @ cre - cre @ eta
        rhs = dense(rep.creator(h11 @ f)) @ eta + eta @ dense(
            rep.annihilator(np.conj(h21 @ f))
        )
        assert np.max(np.abs(lhs - rhs)) < 1e-10
        ann = dense(rep.annihilator(g))
        lhs2 = eta @ ann - ann @ eta
        rhs2 = dense(rep.creator(h12 @ np.conj(g))) @ eta - eta @ dense(
            rep.annihilator(h11.conj().T @ g)
        )
        assert np.max(np.abs(lhs2 - rhs2)) < 1e-10


def test_wick_exponential_block_and_matrix_forms_agree():
    rng = np.random.default_rng(32)
    space = SelfdualSpace(kind=CAR, modes=4)
    rep = build_rep(space)
    h, h11, h12, h21 = _square_blocks(rng, 4)
    blocks = WickBlocks(
        creation_pair=h12, mixed=np.eye(4) + h11, annihilation_pair=h21
    )
    assert residual(wick_exponential(h, rep), wick_exponential(blocks, rep)) < 1e-12


def test_wick_blocks_roundtrip_and_square_guard():
    rng = np.random.default_rng(33)
    h, h11, h12, h21 = _square_blocks(rng, 3)
    blocks = _split_square_hamiltonian(h, 3)
    assert np.allclose(blocks.creation_pair, h12)
    assert np.allclose(blocks.mixed, np.eye(3) + h11)
    assert np.allclose(blocks.annihilation_pair, h21)
    assert np.allclose(blocks.full(), h)
    rect = WickBlocks(
        creation_pair=np.zeros((3, 3)),
        mixed=np.zeros((3, 2)),
        annihilation_pair=np.zeros((2, 2)),
    )
    with pytest.raises(PreconditionError):
        rect.full()
    bad = h.copy()
    bad[0, 4] = 1.0  # breaks antisymmetry of the creation block
    with pytest.raises(StructuralError):
        _split_square_hamiltonian(bad, 3)


def test_pair_exponential_vacuum_norm():
    # ||exp((1/2) b a* a*) vacuum|| = det(1 + b b^H)^(1/4)
    rng = np.random.default_rng(34)
    for k in (2, 3, 4, 5, 6):
        space = SelfdualSpace(kind=CAR, modes=k)
        rep = build_rep(space)
        b = random_antisymmetric(rng, k)
        vec = dense(_exp_nilpotent(_quadratic_creation(b, rep)) @ rep.vacuum()).ravel()
        expected = np.linalg.det(np.eye(k) + b @ b.conj().T).real ** 0.25
        assert abs(np.linalg.norm(vec) - expected) < 1e-10


# ---------------------------------------------------------------------------
# intertwining Hamiltonian


def test_hamiltonian_of_diagonal_map_is_second_quantization():
    rng = np.random.default_rng(40)
    k = 3
    u = np.linalg.qr(rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k)))[0]
    space = SelfdualSpace(kind=CAR, modes=k)
    mat = np.zeros((2 * k, 2 * k), dtype=complex)
    mat[:k, :k] = u
    mat[k:, k:] = u.conj()
    v = BogoliubovMap(source=space, target=space, matrix=mat)
    blocks = hamiltonian_from_T(v, np.zeros((k, k)))
    assert np.allclose(blocks.creation_pair, 0.0)
    assert np.allclose(blocks.mixed, u)
    assert np.allclose(blocks.annihilation_pair, 0.0)
    full = blocks.full()
    assert np.allclose(full[:k, :k], u - np.eye(k))
    assert np.allclose(full[k:, k:], np.eye(k) - u.T)
    rep = build_rep(space)
    assert residual(wick_exponential(blocks, rep), lambda_multiplicative(u, rep, rep)) < 1e-12


def test_hamiltonian_from_T_validates_input():
    rng = np.random.default_rng(41)
    v = random_car_map(rng, 2, 3)
    with pytest.raises(StructuralError):
        hamiltonian_from_T(v, np.zeros((2, 2)))


# ---------------------------------------------------------------------------
# implementer families


def test_implementer_of_diagonal_unitary_is_second_quantization():
    rng = np.random.default_rng(50)
    k = 3
    u = np.linalg.qr(rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k)))[0]
    space = SelfdualSpace(kind=CAR, modes=k)
    mat = np.zeros((2 * k, 2 * k), dtype=complex)
    mat[:k, :k] = u
    mat[k:, k:] = u.conj()
    v = BogoliubovMap(source=space, target=space, matrix=mat)
    rep = build_rep(space)
    family = implementers(v, rep_source=rep, rep_target=rep)
    assert family.statistics_dimension == 1
    member = dense(family.member(()))
    assert residual(member, lambda_multiplicative(u, rep, rep)) < 1e-10
    assert residual(member.conj().T @ member, np.eye(8)) < 1e-10
    assert verify_cuntz(family).passed


def test_verify_cuntz_battery():
    rng = np.random.default_rng(51)
    cases = [
        random_car_map(rng, 2, 3),
        random_car_map(rng, 3, 3, det_sign=-1),
        random_car_map(rng, 2, 4),
        car_map_with_holes(rng, 2, 3, holes=1),
    ]
    for v in cases:
        family = implementers(v)
        report = verify_cuntz(family)
        assert report.gram_residual < 1e-10
        assert report.completeness_residual < 1e-10
        assert report.intertwining_residual < 1e-10
        assert report.passed
        d = report.as_dict()
        assert d["passed"] and d["tol"] == 1e-10


def test_family_size_counts_defect_subsets():
    rng = np.random.default_rng(52)
    v = random_car_map(rng, 2, 4)
    family = implementers(v)
    assert family.statistics_dimension == 4
    assert family.indices == multi_indices_strict(2)
    assert family.indices == ((), (0,), (0, 1), (1,))


def test_members_are_twisted_translates_of_the_base():
    rng = np.random.default_rng(53)
    v = car_map_with_holes(rng, 2, 3, holes=1)
    family = implementers(v)
    base = family.member(())
    g = family.defect_basis
    rep = family.rep_target
    assert residual(family.member((0,)), rep.psi(g[:, 0]) @ base) < 1e-12


def test_parity_conjugation_sign():
    rng = np.random.default_rng(54)
    for v in (random_car_map(rng, 2, 3), car_map_with_holes(rng, 2, 3, holes=1)):
        family = implementers(v)
        data = decompose(v)
        gamma_t = family.rep_target.parity()
        gamma_s = family.rep_source.parity()
        for alpha in family.indices:
            sign = (-1) ** (len(alpha) + data.l_v)
            lhs = gamma_t @ family.member(alpha) @ gamma_s
            assert residual(lhs, sign * family.member(alpha)) < 1e-12


def test_base_vacuum_image_in_closed_form():
    rng = np.random.default_rng(55)
    for v in (random_car_map(rng, 3, 3, det_sign=-1),
              car_map_with_holes(rng, 2, 3, holes=1)):
        data = decompose(v)
        family = implementers(v, data)
        rep = family.rep_target
        t, h = data.param.t, data.param.h
        det_factor = np.linalg.det(
            np.eye(t.shape[0]) + t.conj().T @ t
        ).real ** (-0.25)
        word = sparse.identity(rep.fock.dim, dtype=complex, format="csr")
        for r in range(h.shape[1]):
            col = np.concatenate([h[:, r], np.zeros(h.shape[0])])
            word = word @ rep.psi(col)
        pair = _exp_nilpotent(_quadratic_creation(t.conj(), rep))
        expected = det_factor * dense(word @ pair @ rep.vacuum()).ravel()
        got = dense(family.member(()) @ family.rep_source.vacuum()).ravel()
        assert np.linalg.norm(got - expected) < 1e-10


def test_base_vacuum_image_matches_parameter_vector():
    rng = np.random.default_rng(56)
    v = car_map_with_holes(rng, 2, 3, holes=1)
    data = decompose(v)
    family = implementers(v, data)
    got = dense(family.member(()) @ family.rep_source.vacuum()).ravel()
    assert abs(np.linalg.norm(got) - 1.0) < 1e-10
    ref = param_to_vector(family.rep_target, data.param)
    assert abs(abs(np.vdot(ref, got)) - 1.0) < 1e-10


def test_custom_defect_basis_phase():
    rng = np.random.default_rng(57)
    v = random_car_map(rng, 2, 3)
    family = implementers(v)
    phase = np.exp(0.7j)
    rotated = implementers(v, defect_basis=phase * family.defect_basis,
                           rep_source=family.rep_source,
                           rep_target=family.rep_target)
    assert residual(rotated.member(()), family.member(())) < 1e-12
    assert residual(rotated.member((0,)), phase * family.member((0,))) < 1e-12
    assert verify_cuntz(rotated).passed


def test_factorization_through_canonical_parts():
    # full implementer = second quantization of the unitary part composed
    # with the implementer of the diagonal part, once the defect basis is
    # transported (with a sign from the hole dimension).
    rng = np.random.default_rng(58)
    cases = [
        random_car_map(rng, 2, 3),
        random_car_map(rng, 3, 3, det_sign=-1),
        car_map_with_holes(rng, 2, 3, holes=1),
    ]
    for v in cases:
        data = decompose(v)
        family = implementers(v, data)
        rep_s, rep_t = family.rep_source, family.rep_target
        gamma_u = implementers(data.u_v, rep_source=rep_t, rep_target=rep_t).member(())
        transported = ((-1) ** data.l_v) * (
            data.u_v.matrix.conj().T @ family.defect_basis
        )
        fam_w = implementers(data.w_v, rep_source=rep_s, rep_target=rep_t,
                             defect_basis=transported)
        for alpha in family.indices:
            assert residual(family.member(alpha),
                            gamma_u @ fam_w.member(alpha)) < 1e-10


def test_fock_structure_of_vacuum_images():
    # the vectors Psi_alpha vacuum are orthonormal, matching the Gram matrix
    # of the defect-mode Slater states they correspond to
    rng = np.random.default_rng(59)
    v = random_car_map(rng, 2, 4)
    family = implementers(v)
    vecs = [dense(family.member(a) @ family.rep_source.vacuum()).ravel()
            for a in family.indices]
    gram = np.array([[np.vdot(x, y) for y in vecs] for x in vecs])
    assert residual(gram, np.eye(len(vecs))) < 1e-10


# ---------------------------------------------------------------------------
# matrix units and statistics


def test_matrix_units_closed_form():
    rng = np.random.default_rng(60)
    v = random_car_map(rng, 2, 4)
    family = implementers(v)
    total = None
    for alpha in family.indices:
        for beta in family.indices:
            product, poly, res = matrix_units(family, alpha, beta)
            assert res < 1e-10
            # partial isometry with adjoint symmetry
            back = matrix_units(family, beta, alpha)[0]
            assert residual(dag(product), back) < 1e-10
            assert residual(product @ dag(product) @ product, product) < 1e-10
        diag = matrix_units(family, alpha, alpha)[0]
        total = diag if total is None else total + diag
    assert residual(total, sparse.identity(family.rep_target.fock.dim,
                                           dtype=complex, format="csr")) < 1e-10


def test_statistics_of_unitary_map_is_trivial():
    rng = np.random.default_rng(61)
    k = 2
    u = np.linalg.qr(rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k)))[0]
    space = SelfdualSpace(kind=CAR, modes=k)
    mat = np.zeros((2 * k, 2 * k), dtype=complex)
    mat[:k, :k] = u
    mat[k:, k:] = u.conj()
    v = BogoliubovMap(source=space, target=space, matrix=mat)
    family = implementers(v)
    eps, lam, report = bosonized_statistics(family)
    assert residual(eps, sparse.identity(4, dtype=complex, format="csr")) < 1e-12
    assert abs(lam - 1.0) < 1e-12
    assert report["passed"]


def test_statistics_parameter_two_levels():
    rng = np.random.default_rng(62)
    # one defect mode, with a nonzero hole dimension at the second level
    fam1 = implementers(random_car_map(rng, 2, 3))
    fam2 = implementers(car_map_with_holes(rng, 3, 4, holes=1))
    eps, lam, report = bosonized_statistics(fam1, fam2)
    assert abs(lam - 0.5) < 1e-10
    assert report["exchange_residual"] < 1e-10
    assert report["parameter_residual"] < 1e-10
    assert report["polynomial_residual"] < 1e-9
    assert report["passed"]


def test_statistics_parameter_four_dimensional():
    rng = np.random.default_rng(63)
    fam1 = implementers(random_car_map(rng, 2, 4))
    fam2 = implementers(random_car_map(rng, 4, 6))
    eps, lam, report = bosonized_statistics(fam1, fam2)
    assert abs(lam - 0.25) < 1e-10
    assert report["passed"]


def test_statistics_requires_matching_levels():
    rng = np.random.default_rng(64)
    fam1 = implementers(random_car_map(rng, 2, 3))
    with pytest.raises(PreconditionError):
        bosonized_statistics(fam1)
    fam_bad = implementers(random_car_map(rng, 2, 3))
    with pytest.raises(StructuralError):
        bosonized_statistics(fam1, fam_bad)


def test_left_inverse_and_central_state():
    rng = np.random.default_rng(65)
    v = random_car_map(rng, 2, 3)
    family = implementers(v)
    rep_t = family.rep_target
    dim_t = rep_t.fock.dim
    eye_t = sparse.identity(dim_t, dtype=complex, format="csr")
    eye_s = sparse.identity(family.rep_source.fock.dim, dtype=complex, format="csr")
    assert residual(left_inverse(family, eye_t), eye_s) < 1e-12
    assert abs(central_state(rep_t, eye_t) - 1.0) < 1e-14
    g = family.defect_basis[:, 0]
    number = dag(rep_t.psi(g)) @ rep_t.psi(g)
    assert abs(central_state(rep_t, number) - 0.5) < 1e-12
    # off-diagonal matrix units have vanishing central state
    poly = matrix_units(family, (), (0,))[1]
    assert abs(central_state(rep_t, poly)) < 1e-12
    diag = matrix_units(family, (0,), (0,))[0]
    assert abs(central_state(rep_t, diag) - 0.5) < 1e-12


def test_central_state_is_tracial():
    rng = np.random.default_rng(66)
    space = SelfdualSpace(kind=CAR, modes=3)
    rep = build_rep(space)
    f = rng.normal(size=6) + 1j * rng.normal(size=6)
    g = rng.normal(size=6) + 1j * rng.normal(size=6)
    x, y = dense(rep.psi(f)), dense(rep.psi(g))
    assert abs(central_state(rep, x @ y) - central_state(rep, y @ x)) < 1e-12


# ---------------------------------------------------------------------------
# parameter vectors and cyclic subspaces


def test_param_to_vector_base_cases():
    space = SelfdualSpace(kind=CAR, modes=3)
    rep = build_rep(space)
    trivial = FockStateParamCAR(t=np.zeros((3, 3)), h=np.zeros((3, 0)))
    assert np.allclose(param_to_vector(rep, trivial), rep.vacuum())
    h = np.zeros((3, 1), dtype=complex)
    h[1, 0] = 1.0
    one_hole = FockStateParamCAR(t=np.zeros((3, 3)), h=h)
    expected = dense(rep.creator(h[:, 0]) @ rep.vacuum()).ravel()
    assert np.allclose(param_to_vector(rep, one_hole), expected)


def test_param_to_vector_two_point_function():
    rng = np.random.default_rng(70)
    space = SelfdualSpace(kind=CAR, modes=3)
    rep = build_rep(space)
    param = random_param_car(rng, 3, holes=1)
    vec = param_to_vector(rep, param)
    proj = param_to_projection(SelfdualSpace(kind=CAR, modes=3), param)
    two_point = np.zeros((6, 6), dtype=complex)
    for i in range(6):
        ei = np.zeros(6)
        ei[i] = 1.0
        for j in range(6):
            ej = np.zeros(6)
            ej[j] = 1.0
            two_point[i, j] = np.vdot(rep.pi(ei) @ vec, rep.pi(ej) @ vec)
    assert residual(two_point, proj) < 1e-10


def test_decomposition_subspaces_unitary_target():
    rng = np.random.default_rng(71)
    v = random_car_map(rng, 3, 3, det_sign=1)
    rep = build_rep(v.source)
    subspaces = decomposition_subspaces(v, rep, rep)
    assert len(subspaces) == 1
    seed, proj = subspaces[0]
    assert residual(proj, np.eye(8)) < 1e-8


def test_decomposition_subspaces_of_an_embedding():
    space_s = SelfdualSpace(kind=CAR, modes=2)
    space_t = SelfdualSpace(kind=CAR, modes=3)
    from fockimpl import diagonal_embedding

    v = diagonal_embedding(space_s, space_t)
    rep_s, rep_t = build_rep(space_s), build_rep(space_t)
    subspaces = decomposition_subspaces(v, rep_s, rep_t)
    assert len(subspaces) == 2
    projs = [p for _, p in subspaces]
    dim_t = rep_t.fock.dim
    assert residual(sum(projs), np.eye(dim_t)) < 1e-8
    assert residual(projs[0] @ projs[1], np.zeros((dim_t, dim_t))) < 1e-8
    for _, p in subspaces:
        assert abs(np.trace(p).real - dim_t / 2) < 1e-8
    # every seed induces the same transported expectation values
    rng = np.random.default_rng(72)
    for _ in range(3):
        f = rng.normal(size=4) + 1j * rng.normal(size=4)
        g = rng.normal(size=4) + 1j * rng.normal(size=4)
        word = rep_t.pi(v.matrix @ f) @ rep_t.pi(v.matrix @ g)
        values = [np.vdot(seed, dense(word @ seed).ravel()) for seed, _ in subspaces]
        assert abs(values[0] - values[1]) < 1e-10
    # ranges of the implementer family members fill exactly these subspaces
    family = implementers(v, rep_source=rep_s, rep_target=rep_t)
    range_projs = [dense(m @ dag(m)) for m in family.members]
    for rp in range_projs:
        assert any(residual(rp, p) < 1e-8 for p in projs)


def test_multi_indices_order():
    assert multi_indices_strict(0) == ((),)
    assert multi_indices_strict(2) == ((), (0,), (0, 1), (1,))
    assert len(multi_indices_strict(3)) == 8
