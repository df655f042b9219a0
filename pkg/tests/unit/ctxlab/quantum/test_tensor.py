"""Unit tests for the qubit operator layer."""

import unittest

import numpy as np
import pytest
from parameterized import parameterized

from ctxlab.errors import DimensionError, NotHermitianError, NotInvolutionError, UnknownPauliLabelError
from ctxlab.quantum.tensor import (
    PAULI,
    Observable,
    bloch_observable,
    commutes,
    eigenprojectors,
    identity,
    is_involution,
    kron,
    kron_all,
    mutually_commuting,
    n_qubits_of,
    operator_product,
    pauli_string,
    register_size,
)

pytestmark = pytest.mark.unit

X, Y, Z, I2 = PAULI["X"], PAULI["Y"], PAULI["Z"], PAULI["I"]


class TestKron(unittest.TestCase):
    def test_kron_orders_qubit_one_first(self):
        # |10> is index 2: Z on qubit 1 gives -1 there
        self.assertEqual(kron(Z, I2)[2, 2], -1)
        self.assertEqual(kron(I2, Z)[2, 2], 1)

    def test_kron_all_folds_left_to_right(self):
        np.testing.assert_array_equal(kron_all(Z, X, Y), np.kron(np.kron(Z, X), Y))

    def test_kron_rejects_more_than_four_qubits(self):
        with self.assertRaises(DimensionError):
            kron(identity(3), identity(2))

    @parameterized.expand([("non_square", np.zeros((2, 4))), ("dim_3", np.eye(3)), ("dim_32", np.eye(32))])
    def test_n_qubits_of_rejects(self, _, matrix):
        with self.assertRaises(DimensionError):
            n_qubits_of(matrix)

    def test_pauli_products(self):
        np.testing.assert_allclose(Z @ X, 1j * Y, atol=1e-12)
        np.testing.assert_allclose(X @ Z, -1j * Y, atol=1e-12)
        for label, matrix in PAULI.items():
            self.assertTrue(is_involution(matrix), label)


class TestObservable(unittest.TestCase):
    def test_rejects_non_hermitian(self):
        with self.assertRaises(NotHermitianError):
            Observable("raise", (1,), np.array([[0, 1], [0, 0]]))

    def test_rejects_non_involution(self):
        with self.assertRaises(NotInvolutionError):
            Observable("double", (1,), 2 * Z)

    def test_rejects_shape_mismatch(self):
        with self.assertRaises(DimensionError):
            Observable("z", (1, 2), Z)

    def test_rejects_bad_qubits(self):
        with self.assertRaises(DimensionError):
            Observable("zz", (2, 2), kron(Z, Z))

    def test_matrix_is_read_only(self):
        o = pauli_string("Z", 1)
        with self.assertRaises(ValueError):
            o.matrix[0, 0] = 5

    def test_embed_pads_with_identities(self):
        o = pauli_string("Z", 1, first_qubit=3)
        np.testing.assert_array_equal(o.embed(3), kron_all(I2, I2, Z))
        np.testing.assert_array_equal(o.embed(4), kron_all(I2, I2, Z, I2))

    def test_embed_non_contiguous(self):
        o = Observable("z1x3", (1, 3), kron(Z, X))
        np.testing.assert_array_equal(o.embed(3), kron_all(Z, I2, X))

    def test_embed_reversed_qubits(self):
        o = Observable("z3x1", (3, 1), kron(Z, X))
        np.testing.assert_array_equal(o.embed(3), kron_all(X, I2, Z))

    def test_embed_rejects_small_register(self):
        with self.assertRaises(DimensionError):
            pauli_string("Z", 1, first_qubit=4).embed(3)


class TestPauliString(unittest.TestCase):
    @parameterized.expand([(("Z", "X"), "z1x2"), ("YY", "y1y2"), ("IZ", "z2"), ("II", "I")])
    def test_names(self, spec, expected):
        self.assertEqual(pauli_string(spec, 2).name, expected)

    def test_offset_and_explicit_name(self):
        o = pauli_string("X", 1, name="Q", first_qubit=3)
        self.assertEqual((o.name, o.qubits), ("Q", (3,)))

    def test_unknown_label(self):
        with self.assertRaises(UnknownPauliLabelError):
            pauli_string("ZW", 2)

    def test_label_count_mismatch(self):
        with self.assertRaises(DimensionError):
            pauli_string("ZXZ", 2)


class TestBloch(unittest.TestCase):
    def test_bloch_observable(self):
        r = np.sqrt(0.5)
        o = bloch_observable("P", 3, (-r, 0, -r))
        np.testing.assert_allclose(o.matrix, -(Z + X) * r, atol=1e-12)

    def test_non_unit_vector(self):
        with self.assertRaises(NotInvolutionError):
            bloch_observable("P", 3, (1, 0, 1))


class TestCommutation(unittest.TestCase):
    def test_anticommuting_factors_on_both_qubits_commute(self):
        self.assertTrue(commutes(pauli_string("ZX", 2), pauli_string("XZ", 2)))

    def test_anticommuting_pair(self):
        self.assertFalse(commutes(pauli_string("ZI", 2), pauli_string("XZ", 2)))

    def test_different_qubits_commute(self):
        self.assertTrue(commutes(pauli_string("ZZ", 2), pauli_string("X", 1, first_qubit=3)))

    def test_mutually_commuting(self):
        row = [pauli_string(s, 2) for s in ("ZX", "XZ", "YY")]
        self.assertTrue(mutually_commuting(row))
        self.assertFalse(mutually_commuting(row + [pauli_string("ZI", 2)]))
        self.assertTrue(mutually_commuting([]))

    def test_register_size(self):
        self.assertEqual(register_size(pauli_string("ZZ", 2), pauli_string("X", 1, first_qubit=4)), 4)


class TestEigenprojectors(unittest.TestCase):
    def test_projectors_of_two_qubit_observable(self):
        plus, minus = eigenprojectors(pauli_string("ZZ", 2))
        np.testing.assert_allclose(plus + minus, identity(2), atol=1e-12)
        np.testing.assert_allclose(plus @ minus, np.zeros((4, 4)), atol=1e-12)
        self.assertAlmostEqual(np.trace(plus).real, 2)

    def test_projectors_embedded(self):
        plus, _ = eigenprojectors(pauli_string("Z", 1), n_qubits=3)
        self.assertEqual(plus.shape, (8, 8))
        self.assertAlmostEqual(np.trace(plus).real, 4)

    def test_projectors_of_matrix(self):
        plus, minus = eigenprojectors(X)
        np.testing.assert_allclose(plus - minus, X, atol=1e-12)

    def test_projectors_reject_non_observable(self):
        with self.assertRaises(NotInvolutionError):
            eigenprojectors(2 * X)


def test_operator_product():
    np.testing.assert_allclose(operator_product(Z, X, Z), -X, atol=1e-12)
