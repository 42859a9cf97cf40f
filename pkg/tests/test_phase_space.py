import numpy as np
import pytest

from otoclab.phase_space import (MOMENTUM, POSITION, ChordCoefficients, OperatorMatrix,
                                 PhaseVector, TorusSpace, change_basis, chord_inverse,
                                 chord_transform, clock_u, coherent_state, hermitian_f,
                                 hermiticity_defect, shift_v, sine_momentum, sine_position,
                                 symplectic_product, translation, unitarity_defect)


def test_torus_space_rejects_small_dims():
    with pytest.raises(ValueError):
        TorusSpace(1)
    with pytest.raises(ValueError):
        TorusSpace(0)


@pytest.mark.parametrize("n", [2, 3, 7, 64, 1000])
def test_tau_is_2n_th_root_of_unity(n):
    space = TorusSpace(n)
    assert abs(space.tau ** (2 * n) - 1.0) < 1e-12
    assert abs(abs(space.tau) - 1.0) < 1e-15


def test_h_eff_stored():
    space = TorusSpace(100)
    assert space.h_eff == pytest.approx(1.0 / (200 * np.pi))


def test_shift_n2_is_swap():
    v = shift_v(TorusSpace(2)).entries
    assert np.array_equal(v, np.array([[0, 1], [1, 0]], dtype=complex))


def test_shift_periodicity_n3():
    v = shift_v(TorusSpace(3)).entries
    assert np.abs(v @ v @ v - np.eye(3)).max() < 1e-15


def test_shift_wraps_last_basis_column():
    v = shift_v(TorusSpace(8)).entries
    e7 = np.zeros(8)
    e7[7] = 1.0
    out = v @ e7
    assert out[0] == 1.0 and np.abs(out[1:]).max() == 0.0


def test_clock_entries():
    u4 = clock_u(TorusSpace(4)).entries
    assert abs(u4[1, 1] - 1j) < 1e-15
    u2 = clock_u(TorusSpace(2)).entries
    assert np.allclose(np.diag(u2), [1, -1])


@pytest.mark.parametrize("n", [2, 3, 4, 5, 9, 17])
def test_clock_traceless_and_unitary(n):
    u = clock_u(TorusSpace(n)).entries
    assert abs(np.trace(u)) < 1e-12
    assert unitarity_defect(u) < 1e-12
    assert np.abs(np.linalg.matrix_power(u, n) - np.eye(n)).max() < 1e-10


def test_symplectic_product_values():
    # sign fixed so that the evolved sine pair reproduces the cat OTOC law
    assert symplectic_product((1, 0), (0, 1)) == -1
    assert symplectic_product((2, 3), (5, 7)) == 1
    for xi in [(0, 0), (1, 2), (-3, 5)]:
        assert symplectic_product(xi, xi) == 0
    assert symplectic_product((1, 2), (3, 4)) == -symplectic_product((3, 4), (1, 2))


def test_translation_generators():
    space = TorusSpace(6)
    assert np.abs(translation(space, (0, 0)).entries - np.eye(6)).max() == 0.0
    assert np.array_equal(translation(space, (1, 0)).entries, shift_v(space).entries)
    assert np.array_equal(translation(space, (0, 1)).entries, clock_u(space).entries)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 8])
def test_translation_algebra_exhaustive(n):
    """T_xi T_chi = tau^<xi,chi> T_{xi+chi}, commutator included, all pairs."""
    space = TorusSpace(n)
    ts = {(a, b): translation(space, (a, b)).entries for a in range(n) for b in range(n)}
    worst_prod = 0.0
    worst_comm = 0.0
    for (aq, ap), ta in ts.items():
        for (bq, bp), tb in ts.items():
            s = symplectic_product((aq, ap), (bq, bp))
            tsum = translation(space, (aq + bq, ap + bp)).entries
            lhs = ta @ tb
            worst_prod = max(worst_prod, np.abs(lhs - space.tau_power(s) * tsum).max())
            comm = lhs - tb @ ta
            target = 2j * np.sin(np.pi * s / n) * tsum
            worst_comm = max(worst_comm, np.abs(comm - target).max())
    assert worst_prod < 1e-12
    assert worst_comm < 1e-12


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_translations_orthogonal(n):
    space = TorusSpace(n)
    vecs = [(a, b) for a in range(n) for b in range(n)]
    for xi in vecs:
        txi = translation(space, xi).entries
        for chi in vecs:
            tchi = translation(space, chi).entries
            overlap = np.trace(txi.conj().T @ tchi) / n
            expected = 1.0 if xi == chi else 0.0
            assert abs(overlap - expected) < 1e-12


def test_translation_unitary_large_components():
    space = TorusSpace(8)
    t = translation(space, (13, -5))
    assert unitarity_defect(t.entries) < 1e-12


def test_sine_position_n4():
    x = sine_position(TorusSpace(4)).entries
    assert np.allclose(x, np.diag([0.0, 1.0, 0.0, -1.0]), atol=1e-15)


@pytest.mark.parametrize("n", [3, 4, 7, 32])
def test_sine_operators_traceless_with_half_second_moment(n):
    space = TorusSpace(n)
    for op in (sine_position(space), sine_momentum(space)):
        e = op.entries
        assert hermiticity_defect(e) < 1e-14
        assert abs(np.trace(e)) < 1e-12
        assert abs(np.trace(e @ e) / n - 0.5) < 1e-12


def test_commutator_scales_as_inverse_dimension():
    norms = {}
    for n in [128, 256, 512]:
        space = TorusSpace(n)
        x = sine_position(space).entries
        p = sine_momentum(space).entries
        norms[n] = np.linalg.norm(x @ p - p @ x, 2)
    scaled = [norms[n] * n for n in norms]
    assert max(scaled) / min(scaled) < 1.05
    assert norms[512] < 10.0 / 512


def test_hermitian_f_zero_vector():
    assert np.abs(hermitian_f(TorusSpace(5), (0, 0)).entries).max() == 0.0


def test_hermitian_f_matches_sine_operators_bitwise():
    space = TorusSpace(12)
    assert np.array_equal(hermitian_f(space, (1, 0)).entries, sine_momentum(space).entries)
    assert np.array_equal(hermitian_f(space, (0, 1)).entries, sine_position(space).entries)


@pytest.mark.parametrize("xi", [(1, 1), (2, 3), (3, 1)])
def test_hermitian_f_is_hermitian_traceless(xi):
    space = TorusSpace(4)
    f = hermitian_f(space, xi).entries
    assert hermiticity_defect(f) < 1e-14
    assert abs(np.trace(f)) < 1e-13


def test_chord_of_identity_is_delta():
    space = TorusSpace(8)
    c = chord_transform(space, np.eye(8, dtype=complex)).coeffs
    assert abs(c[0, 0] - 1.0) < 1e-13
    c[0, 0] = 0.0
    assert np.abs(c).max() < 1e-13


def test_chord_of_translation_is_unit_coefficient():
    space = TorusSpace(8)
    c = chord_transform(space, translation(space, (2, 3))).coeffs
    assert abs(c[2, 3] - 1.0) < 1e-12
    c[2, 3] = 0.0
    assert np.abs(c).max() < 1e-12


def test_chord_round_trip_and_parseval():
    space = TorusSpace(16)
    rng = np.random.default_rng(42)
    raw = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    a = (raw + raw.conj().T) / 2
    coeffs = chord_transform(space, a)
    back = chord_inverse(space, coeffs).entries
    assert np.abs(back - a).max() < 1e-10
    hs = np.trace(a.conj().T @ a).real / 16
    assert abs((np.abs(coeffs.coeffs) ** 2).sum() - hs) < 1e-10


def test_change_basis_round_trip_and_momentum_diagonals():
    space = TorusSpace(32)
    rng = np.random.default_rng(3)
    a = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
    there = change_basis(space, a, POSITION, MOMENTUM)
    back = change_basis(space, there, MOMENTUM, POSITION)
    assert np.abs(back - a).max() < 1e-12
    # the shift is diagonal in momentum; the clock shifts momentum up by one
    v_mom = change_basis(space, shift_v(space).entries, POSITION, MOMENTUM)
    p = np.arange(32)
    assert np.abs(v_mom - np.diag(np.exp(-2j * np.pi * p / 32))).max() < 1e-12
    u_mom = change_basis(space, clock_u(space).entries, POSITION, MOMENTUM)
    assert np.abs(u_mom - shift_v(space).entries).max() < 1e-12


def test_operator_matrix_wrapper():
    with pytest.raises(ValueError):
        OperatorMatrix(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        OperatorMatrix(np.eye(2), basis="fourier")
    op = OperatorMatrix(np.eye(3), basis=POSITION)
    assert op.dim == 3
    assert op.dagger().basis == POSITION


def test_phase_vector_canonical():
    assert PhaseVector(-1, 7).canonical(5) == PhaseVector(4, 2)


def test_coherent_state_centers():
    space = TorusSpace(512)
    q0, p0 = 154 / 512, 301 / 512
    psi = coherent_state(space, q0, p0)
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-12
    x = (psi.conj() @ sine_position(space).entries @ psi).real
    p = (psi.conj() @ sine_momentum(space).entries @ psi).real
    assert abs(x - np.sin(2 * np.pi * q0)) < 5.0 / 512
    assert abs(p - np.sin(2 * np.pi * p0)) < 5.0 / 512
