import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zakscatter.errors import RankDeficient
from zakscatter.fiducials import packaged_fiducial
from zakscatter.tfcore import (ambiguity, build_frame, build_K, frame_columns, full_boxes,
                               offpeak_max, predicted_singular_values, random_unimodular,
                               random_unit_norm, selfkron, spectral_check, tf_shift, vec,
                               welch_bound)

from conftest import crandn


def test_tf_shift_identity_and_periodicity(rng):
    c = crandn(rng, 5)
    assert np.array_equal(tf_shift(c, 0, 0), c)
    assert np.allclose(tf_shift(c, 5, 5), c, atol=1e-15)


def test_tf_shift_delta_example():
    out = tf_shift([1, 0, 0, 0], 1, 2)
    assert np.allclose(out, [0, -1, 0, 0], atol=1e-15)


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, L=st.integers(1, 7), a=st.integers(-9, 9), b=st.integers(-9, 9),
       a2=st.integers(-9, 9), b2=st.integers(-9, 9))
def test_shift_composition_up_to_phase(seed, L, a, b, a2, b2):
    c = crandn(np.random.default_rng(seed), L)
    lhs = tf_shift(tf_shift(c, a, b), a2, b2)
    rhs = tf_shift(c, a + a2, b + b2)
    assert np.allclose(np.abs(lhs), np.abs(rhs), atol=1e-12)
    j = np.argmax(np.abs(rhs))
    phase = lhs[j] / rhs[j]
    assert abs(abs(phase) - 1) < 1e-12
    assert np.allclose(lhs, phase * rhs, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, L=st.integers(1, 8), a=st.integers(-20, 20), b=st.integers(-20, 20))
def test_shift_is_unitary(seed, L, a, b):
    c = crandn(np.random.default_rng(seed), L)
    assert abs(np.linalg.norm(tf_shift(c, a, b)) - np.linalg.norm(c)) < 1e-12


def test_random_unimodular_modulus(rng):
    c = random_unimodular(6, rng)
    assert np.allclose(np.abs(c), 1, atol=1e-12)
    assert abs(np.linalg.norm(random_unit_norm(6, rng)) - 1) < 1e-12


def test_ambiguity_matches_definition(rng):
    c = crandn(rng, 4)
    V = ambiguity(c)
    for a in range(4):
        for b in range(4):
            assert abs(V[a, b] - np.sum(c * np.conj(tf_shift(c, a, b)))) < 1e-12


def test_ambiguity_delta_seed():
    V = ambiguity([1, 0, 0, 0, 0])
    expected = np.zeros((5, 5))
    expected[0, :] = 1
    assert np.allclose(V, expected, atol=1e-15)


def test_ambiguity_peak_is_energy(rng):
    c = crandn(rng, 6)
    V = ambiguity(c)
    assert abs(V[0, 0] - np.vdot(c, c).real) < 1e-12
    assert abs(V[0, 0].imag) < 1e-12


@pytest.mark.parametrize("L", range(2, 9))
def test_ambiguity_energy_is_L_times_norm2_fourth(L, rng):
    # the tight-frame identity; the "4-norm" variant does not hold
    for _ in range(50):
        c = crandn(rng, L)
        energy = np.sum(np.abs(ambiguity(c)) ** 2)
        assert abs(energy / (L * np.linalg.norm(c) ** 4) - 1) < 1e-10


def test_unimodular_energy_value_L4(rng):
    c = random_unimodular(4, rng)
    assert abs(np.sum(np.abs(ambiguity(c)) ** 2) - 64) < 1e-10


def test_build_frame_small_cases():
    assert np.array_equal(build_frame([2.5]), np.array([[2.5]]))
    G = build_frame([1, 0])
    e0, e1 = np.array([1, 0]), np.array([0, 1])
    # order (0,0),(0,1),(1,0),(1,1); (0,1) only modulates e0
    for col, want in zip(G.T, (e0, e0, e1, -e1)):
        assert np.allclose(col, want, atol=1e-15)


def test_frame_columns_are_shifts_with_norm(rng):
    c = crandn(rng, 3)
    G = build_frame(c)
    for a in range(3):
        for b in range(3):
            assert np.array_equal(G[:, a * 3 + b], tf_shift(c, a, b))
            assert abs(np.linalg.norm(G[:, a * 3 + b]) - np.linalg.norm(c)) < 1e-12
    boxes = [(4, -1), (0, 2)]
    assert np.allclose(frame_columns(c, boxes), G[:, [1 * 3 + 2, 0 * 3 + 2]])


def test_vec_convention_2x2():
    x = np.array([1 + 2j, 3 - 1j])
    y = np.array([-2j, 0.5 + 1j])
    M = np.outer(x, y.conj())
    assert np.array_equal(vec(M), M.ravel())
    assert np.allclose(vec(M), np.kron(x, y.conj()))
    assert np.allclose(selfkron(x), vec(np.outer(x, x.conj())))


def test_build_K_L1():
    K = build_K([1], [(0, 0)])
    assert np.allclose(K.matrix, [[1]])


def test_build_K_delta_is_rank_deficient():
    with pytest.raises(RankDeficient):
        build_K([1, 0], full_boxes(2))
    with pytest.raises(RankDeficient):
        spectral_check([1, 0])


def test_unimodular_full_K_is_singular(rng):
    # V(0, b) = sum_j |c_j|^2 e^{-2 pi i j b/L} vanishes for b != 0
    for L in range(2, 7):
        with pytest.raises(RankDeficient):
            build_K(random_unimodular(L, rng), full_boxes(L))


@pytest.mark.parametrize("L", range(2, 7))
def test_generic_seeds_give_full_rank(L, rng):
    for _ in range(20):
        K = build_K(crandn(rng, L), full_boxes(L))
        assert K.singular_values[-1] / K.singular_values[0] > 1e-8
        assert np.linalg.matrix_rank(K.matrix) == L * L


def test_unimodular_partial_cover_is_fine(rng):
    K = build_K(random_unimodular(3, rng), [(0, 0), (1, 2), (2, 2)])
    assert K.shape == (9, 3)


def test_K_columns_and_solve(rng):
    c = crandn(rng, 3)
    boxes = [(0, 1), (2, 0), (1, 1)]
    K = build_K(c, boxes)
    for j, (a, b) in enumerate(boxes):
        g = tf_shift(c, a, b)
        assert np.allclose(K.matrix[:, j], np.kron(g, g.conj()))
    v = rng.standard_normal((3, 4, 2))
    rhs = np.einsum("kj,j...->k...", K.matrix, v)
    assert np.allclose(K.solve(rhs), v, atol=1e-12)
    assert np.allclose(K.pinv() @ K.matrix, np.eye(3), atol=1e-12)


@pytest.mark.parametrize("L", range(2, 7))
def test_spectral_identity(L, rng):
    for _ in range(20):
        c = random_unit_norm(L, rng)
        sv = spectral_check(c).singular_values
        assert np.allclose(sv, predicted_singular_values(c), rtol=0, atol=1e-8 * sv[0])


def test_spectral_fiducial_L2():
    rep = spectral_check(packaged_fiducial(2))
    assert abs(rep.cond - np.sqrt(3)) < 1e-6


@pytest.mark.parametrize("L", range(2, 7))
def test_welch_floor_and_condition_floor(L, rng):
    for _ in range(20):
        c = random_unit_norm(L, rng)
        assert offpeak_max(c) >= (1 - 1e-9) * welch_bound(L)
        assert spectral_check(c).cond >= np.sqrt(L + 1) * (1 - 1e-9)
