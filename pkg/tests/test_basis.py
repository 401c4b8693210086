import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qergo import (
    Basis,
    DimensionMismatch,
    IndexOutOfRange,
    NotOrthonormal,
    computational_basis,
    ergodic_prob,
    ergodic_table,
    fourier_basis,
    haar_random_basis,
    make_basis,
)

SQRT_HALF = 1.0 / np.sqrt(2.0)


class TestMakeBasis:
    def test_identity_columns_give_computational_basis(self):
        b = make_basis(np.eye(2))
        assert b.dim == 2
        assert b.labels == ("0", "1")
        np.testing.assert_allclose(b.vectors, np.eye(2))

    def test_hadamard_columns(self):
        b = make_basis(np.array([[1, 1], [1, -1]]) * SQRT_HALF)
        np.testing.assert_allclose(
            b.vectors, np.array([[1, 1], [1, -1]]) * SQRT_HALF, atol=1e-15
        )

    def test_duplicate_column_rejected(self):
        cols = np.array([[1, 1], [1, 1]]) * SQRT_HALF
        with pytest.raises(NotOrthonormal):
            make_basis(cols)

    def test_ragged_input_rejected(self):
        with pytest.raises(DimensionMismatch):
            make_basis([[1, 0], [0]])

    def test_non_square_rejected(self):
        with pytest.raises(DimensionMismatch):
            make_basis(np.ones((2, 3)))

    def test_dim_one_rejected(self):
        with pytest.raises(DimensionMismatch):
            make_basis(np.eye(1))

    def test_phase_convention_first_significant_component(self):
        # global phases on the columns are stripped
        mat = np.array([[1j, 0], [0, -1]], dtype=complex)
        b = make_basis(mat)
        np.testing.assert_allclose(b.vectors, np.eye(2), atol=1e-15)

    def test_phase_convention_idempotent(self):
        b = haar_random_basis(5, 123)
        again = make_basis(b.vectors, labels=b.labels)
        assert np.max(np.abs(again.vectors - b.vectors)) < 1e-12

    def test_values_length_checked(self):
        with pytest.raises(DimensionMismatch):
            make_basis(np.eye(3), values=[1.0, 2.0])

    def test_labels_length_checked(self):
        with pytest.raises(DimensionMismatch):
            make_basis(np.eye(3), labels=["a", "b"])


class TestFourierBasis:
    def test_d2_is_hadamard(self):
        f = fourier_basis(2)
        np.testing.assert_allclose(
            f.vectors, np.array([[1, 1], [1, -1]]) * SQRT_HALF, atol=1e-15
        )

    def test_d4_mutually_unbiased_with_computational(self):
        f = fourier_basis(4)
        probs = np.abs(f.vectors) ** 2
        np.testing.assert_allclose(probs, np.full((4, 4), 0.25), atol=1e-14)

    def test_d3_gram_matrix(self):
        f = fourier_basis(3)
        gram = f.vectors.conj().T @ f.vectors
        assert np.max(np.abs(gram - np.eye(3))) < 1e-12


class TestHaarRandomBasis:
    def test_deterministic_for_fixed_seed(self):
        a = haar_random_basis(2, 1)
        b = haar_random_basis(2, 1)
        assert np.array_equal(a.vectors, b.vectors)

    def test_different_seeds_differ(self):
        assert not np.allclose(
            haar_random_basis(3, 1).vectors, haar_random_basis(3, 2).vectors
        )

    def test_d8_orthonormal(self):
        b = haar_random_basis(8, 7)
        gram = b.vectors.conj().T @ b.vectors
        assert np.max(np.abs(gram - np.eye(8))) < 1e-10

    def test_first_moment_matches_haar_measure(self):
        # |<0|u_0>|^2 is Beta(1, d-1) under the Haar measure: mean 1/d,
        # variance (d-1)/(d^2 (d+1)).
        d, n = 2, 10_000
        samples = np.array(
            [abs(haar_random_basis(d, s).vectors[0, 0]) ** 2 for s in range(n)]
        )
        se = np.sqrt((d - 1) / (d**2 * (d + 1)) / n)
        assert abs(samples.mean() - 1.0 / d) < 3.0 * se


class TestErgodicProb:
    def test_same_outcome_is_one(self, z2):
        assert ergodic_prob(z2, 0, z2, 0) == pytest.approx(1.0)

    def test_unbiased_pair_is_one_over_d(self):
        z = computational_basis(4)
        f = fourier_basis(4)
        for j in range(4):
            for k in range(4):
                assert ergodic_prob(z, j, f, k) == pytest.approx(0.25)

    def test_z_zero_against_x_plus(self, z2, x2):
        assert ergodic_prob(z2, 0, x2, 0) == pytest.approx(0.5)

    def test_index_out_of_range(self, z2):
        with pytest.raises(IndexOutOfRange):
            ergodic_prob(z2, 2, z2, 0)

    def test_table_transpose_symmetry(self, z2, y2):
        t1 = ergodic_table(z2, y2)
        t2 = ergodic_table(y2, z2)
        np.testing.assert_allclose(t1.probs, t2.probs.T, atol=1e-15)

    def test_table_columns_sum_to_one(self):
        t = ergodic_table(haar_random_basis(6, 5), haar_random_basis(6, 6))
        np.testing.assert_allclose(t.column_sums(), np.ones(6), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(dim=st.integers(2, 8), seed=st.integers(0, 2**32 - 1))
def test_haar_basis_is_unitary_both_sides(dim, seed):
    b = haar_random_basis(dim, seed)
    eye = np.eye(dim)
    assert np.max(np.abs(b.vectors.conj().T @ b.vectors - eye)) < 1e-10
    assert np.max(np.abs(b.vectors @ b.vectors.conj().T - eye)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(dim=st.integers(2, 8), seed=st.integers(0, 2**32 - 1))
def test_phase_pivot_real_nonnegative(dim, seed):
    b = haar_random_basis(dim, seed)
    for k in range(dim):
        col = b.vectors[:, k]
        pivot = col[np.flatnonzero(np.abs(col) > 1e-12)[0]]
        assert abs(pivot.imag) < 1e-12
        assert pivot.real >= 0.0


class TestSerialization:
    def test_round_trip_bit_faithful(self):
        b = haar_random_basis(5, 99)
        again = Basis.from_json(b.to_json())
        assert np.array_equal(again.vectors, b.vectors)
        assert again.labels == b.labels
        assert again.values is None

    def test_round_trip_with_values(self):
        b = make_basis(np.eye(3), values=[0.5, -1.0, 2.0])
        again = Basis.from_json(b.to_json())
        assert np.array_equal(again.values, b.values)

    def test_bad_gram_rejected_on_load(self):
        b = computational_basis(2)
        import json

        payload = json.loads(b.to_json())
        payload["re"][0][0] = 2.0
        with pytest.raises(NotOrthonormal):
            Basis.from_json(json.dumps(payload))

    def test_immutability(self):
        b = haar_random_basis(3, 1)
        with pytest.raises(ValueError):
            b.vectors[0, 0] = 0.0
