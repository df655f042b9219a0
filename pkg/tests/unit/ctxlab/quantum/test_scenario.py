"""Unit tests for scenario construction: Mermin square, settings, states and expressions."""

import math
import unittest
from fractions import Fraction

import numpy as np
import pytest
from parameterized import parameterized

from ctxlab.errors import InvalidParameterError, InvalidSpecError, ProbabilityError
from ctxlab.quantum.scenario import (
    BIPARTITE_PARTIES,
    CONTEXT_PRODUCT_SIGN,
    CONTEXTS,
    RELATION_PAIRS,
    S_ORDER,
    SEQUENCES,
    CorrelationSpec,
    QuantumState,
    bob_settings_nonmax,
    bob_settings_singlet,
    build_expression_bell_sum,
    build_expression_chsh,
    build_expression_S,
    build_expression_S_prime,
    build_expression_T,
    build_state_ghz,
    build_state_nonmax,
    build_state_singlet,
    context_of,
    ghz_settings,
    ghz_vector,
    mermin_square,
    random_alice_state,
)
from ctxlab.quantum.tensor import PAULI, identity, kron_all, mutually_commuting, operator_product

pytestmark = pytest.mark.unit

X, Z = PAULI["X"], PAULI["Z"]


class TestMerminSquare(unittest.TestCase):
    def setUp(self):
        self.square = mermin_square()

    def test_nine_observables_on_alice_qubits(self):
        self.assertEqual(len(self.square), 9)
        self.assertTrue(all(o.qubits == (1, 2) for o in self.square.values()))
        self.assertEqual(self.square["gamma"].name, "gamma")

    def test_contexts_commute(self):
        for label, observables in self.square.contexts().items():
            self.assertTrue(mutually_commuting(observables), label)

    def test_row_and_column_products(self):
        for names, sign in CONTEXT_PRODUCT_SIGN.items():
            product = operator_product(*(self.square[n].matrix for n in names))
            np.testing.assert_allclose(product, sign * identity(2), atol=1e-12, err_msg=str(names))

    def test_only_one_negative_context(self):
        self.assertEqual([names for names, sign in CONTEXT_PRODUCT_SIGN.items() if sign < 0], [("C", "c", "gamma")])

    def test_context_of(self):
        self.assertEqual(context_of(("alpha", "A")), ("A", "a", "alpha"))
        with self.assertRaises(InvalidSpecError):
            context_of(("A", "beta"))

    def test_contexts_cover_square(self):
        self.assertEqual(len(CONTEXTS), 6)
        self.assertEqual(set(self.square.contexts()), {" ".join(c) for c in CONTEXTS})


class TestSettings(unittest.TestCase):
    def test_singlet_settings(self):
        s = bob_settings_singlet()
        np.testing.assert_allclose(s.P.matrix, -(Z + X) / math.sqrt(2), atol=1e-12)
        np.testing.assert_allclose(s.Q.matrix, (X - Z) / math.sqrt(2), atol=1e-12)
        self.assertFalse(s.tripartite)

    def test_nonmax_reduces_to_singlet_at_quarter_pi(self):
        nonmax, singlet = bob_settings_nonmax(math.pi / 4), bob_settings_singlet()
        np.testing.assert_allclose(nonmax.P.matrix, singlet.P.matrix, atol=1e-12)
        np.testing.assert_allclose(nonmax.Q.matrix, singlet.Q.matrix, atol=1e-12)

    def test_printed_branch_collapses_q_onto_minus_p(self):
        s = bob_settings_nonmax(math.pi / 5, branch="printed")
        np.testing.assert_allclose(s.Q.matrix, -s.P.matrix, atol=1e-12)

    def test_unknown_branch(self):
        with self.assertRaises(InvalidParameterError):
            bob_settings_nonmax(0.3, branch="other")

    def test_ghz_settings(self):
        s = ghz_settings()
        self.assertTrue(s.tripartite)
        qubits = {name: o.qubits for name, o in s.as_dict().items()}
        self.assertEqual(qubits, {"P": (3,), "Q": (3,), "U": (4,), "V": (4,)})


class TestStates(unittest.TestCase):
    def test_singlet_state_layout(self):
        state = build_state_singlet()
        self.assertEqual(state.n_qubits, 3)
        self.assertEqual(state.qubits_of("Alice"), (1, 2))
        self.assertEqual(state.qubits_of("Bob"), (3,))

    def test_ancilla_marginal(self):
        chi = 0.3
        ancilla = build_state_singlet(chi).reduced([1])
        vector = np.array([math.cos(chi), math.sin(chi)])
        np.testing.assert_allclose(ancilla, np.outer(vector, vector), atol=1e-12)

    def test_singlet_pair_is_maximally_mixed_locally(self):
        np.testing.assert_allclose(build_state_singlet().reduced([2]), identity(1) / 2, atol=1e-12)

    def test_noisy_singlet(self):
        pair = build_state_singlet(visibility=0.5).reduced([2, 3])
        zz = np.trace(pair @ np.kron(Z, Z)).real
        self.assertAlmostEqual(zz, -0.5, places=12)

    @parameterized.expand([(-0.1,), (1.5,)])
    def test_visibility_range(self, visibility):
        with self.assertRaises(InvalidParameterError):
            build_state_singlet(visibility=visibility)

    @parameterized.expand(
        [
            ("singlet", lambda v: build_state_singlet(visibility=v), 3),
            ("nonmax", lambda v: build_state_nonmax(0.3, visibility=v), 3),
            ("ghz", lambda v: build_state_ghz(visibility=v), 4),
        ]
    )
    def test_density_is_a_state_across_visibilities(self, _, build, n_qubits):
        for visibility in np.linspace(0, 1, 11):
            state = build(visibility)
            rho = state.density
            self.assertEqual((state.n_qubits, rho.shape), (n_qubits, (2**n_qubits, 2**n_qubits)))
            self.assertAlmostEqual(np.trace(rho).real, 1, places=12)
            np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
            self.assertGreaterEqual(np.linalg.eigvalsh(rho).min(), -1e-10)

    def test_nonmax_at_quarter_pi_is_the_singlet(self):
        nonmax = build_state_nonmax(math.pi / 4, 1.0, math.pi / 8)
        singlet = build_state_singlet(math.pi / 8, 1.0)
        np.testing.assert_allclose(nonmax.density, singlet.density, atol=1e-12)

    def test_nonmax_correlations(self):
        theta = 0.4
        pair = build_state_nonmax(theta).reduced([2, 3])
        d1d2 = math.cos(theta) * math.sin(theta)
        self.assertAlmostEqual(np.trace(pair @ np.kron(Z, Z)).real, -1, places=12)
        self.assertAlmostEqual(np.trace(pair @ np.kron(X, X)).real, -2 * d1d2, places=12)
        self.assertAlmostEqual(np.trace(pair @ np.kron(Z, X)).real, 0, places=12)

    def test_nonmax_theta_range(self):
        with self.assertRaises(InvalidParameterError):
            build_state_nonmax(2.0)

    def test_ghz_three_body_values(self):
        triple = build_state_ghz().reduced([2, 3, 4])
        expected = {"XZZ": 1, "ZXZ": 1, "ZZX": 1, "XXX": -1, "ZZZ": 0, "XXZ": 0}
        for spec, value in expected.items():
            operator = kron_all(*(PAULI[label] for label in spec))
            self.assertAlmostEqual(np.trace(triple @ operator).real, value, places=12, msg=spec)

    def test_ghz_vector_is_normalized(self):
        self.assertAlmostEqual(np.linalg.norm(ghz_vector()), 1, places=12)

    def test_ghz_bipartitions_have_rank_two(self):
        marginal = build_state_ghz().reduced([2])
        np.testing.assert_allclose(marginal, identity(1) / 2, atol=1e-12)

    def test_random_alice_state(self):
        state = random_alice_state(np.random.default_rng(7))
        self.assertEqual(state.party_map, BIPARTITE_PARTIES)
        self.assertAlmostEqual(np.trace(state.density).real, 1, places=12)

    def test_state_rejects_bad_trace(self):
        with self.assertRaises(ProbabilityError):
            QuantumState(1, 2 * identity(1) / 2, {1: "Alice"})

    def test_state_rejects_negative_eigenvalue(self):
        with self.assertRaises(InvalidParameterError):
            QuantumState(1, np.diag([1.5, -0.5]), {1: "Alice"})

    def test_state_rejects_shape(self):
        with self.assertRaises(InvalidParameterError):
            QuantumState(2, identity(1) / 2, {})

    def test_from_vector(self):
        state = QuantumState.from_vector([0, 1], {1: "Bob"})
        self.assertEqual(state.n_qubits, 1)
        self.assertAlmostEqual(state.density[1, 1].real, 1)


class TestSequenceTable(unittest.TestCase):
    def test_sequences_are_contexts(self):
        for row in SEQUENCES:
            context_of(row.sequence)
            self.assertTrue(mutually_commuting([mermin_square()[n] for n in row.sequence]), row.sequence)

    def test_orders_and_pairs_are_permutations(self):
        self.assertEqual(sorted(S_ORDER), list(range(12)))
        self.assertEqual(sorted(i for pair in RELATION_PAIRS for i in pair), list(range(12)))

    def test_t_sign_matches_operator_product(self):
        """T terms are +1 on every state, so each t_sign equals the sequence's operator product sign."""
        square = mermin_square()
        for row in SEQUENCES:
            product = operator_product(*(square[n].matrix for n in row.sequence))
            np.testing.assert_allclose(product, row.t_sign * identity(2), atol=1e-12, err_msg=str(row.sequence))


class TestExpressions(unittest.TestCase):
    def test_t_expression(self):
        expr = build_expression_T()
        self.assertEqual(len(expr.terms), 12)
        self.assertEqual((expr.classical_bound, expr.bound_model), (Fraction(8), "NCHVT"))
        self.assertEqual(expr.terms[0].label, "<C A B>")
        self.assertEqual([t.sign for t in expr.terms].count(-1), 2)

    def test_s_expression_labels(self):
        expr = build_expression_S(bob_settings_singlet())
        self.assertEqual(expr.terms[0].label, "<A B P>_C")
        self.assertEqual(expr.terms[5].label, "<A a Q>_alpha")
        self.assertEqual(expr.terms[-1].label, "<b c Q>_a")
        self.assertEqual([t.sign for t in expr.terms].count(-1), 3)
        self.assertEqual(expr.distant_names, ("P", "Q"))

    def test_s_prime_expression(self):
        expr = build_expression_S_prime(ghz_settings())
        self.assertEqual(expr.terms[0].label, "<A B P V>_C")
        self.assertEqual(expr.distant_names, ("P", "Q", "U", "V"))
        self.assertEqual(expr.classical_bound, 12)

    def test_s_prime_needs_charlie(self):
        with self.assertRaises(InvalidSpecError):
            build_expression_S_prime(bob_settings_singlet())

    def test_sum_uses_joint_bound(self):
        total = build_expression_T() + build_expression_S(bob_settings_singlet())
        self.assertEqual((total.name, total.classical_bound, len(total.terms)), ("T+S", 18, 24))
        total = build_expression_T() + build_expression_S_prime(ghz_settings())
        self.assertEqual((total.name, total.classical_bound), ("T+S'", 18))

    @parameterized.expand(
        [
            (1, ["<C P>", "<C Q>", "<alpha P>", "<alpha Q>"]),
            (3, ["<B P>", "<B Q>", "<a P>", "<a Q>"]),
        ]
    )
    def test_chsh(self, which, labels):
        expr = build_expression_chsh(bob_settings_singlet(), which)
        self.assertEqual([t.label for t in expr.terms], labels)
        self.assertEqual([t.sign for t in expr.terms], [1, 1, 1, -1])
        self.assertEqual(expr.classical_bound, 2)

    def test_unknown_chsh(self):
        with self.assertRaises(InvalidSpecError):
            build_expression_chsh(bob_settings_singlet(), 4)

    def test_bell_sum_is_the_three_chsh(self):
        settings = bob_settings_singlet()
        bell = build_expression_bell_sum(settings)
        chsh = [(t.label, t.sign) for which in (1, 2, 3) for t in build_expression_chsh(settings, which).terms]
        self.assertEqual(sorted((t.label, t.sign) for t in bell.terms), sorted(chsh))
        self.assertEqual(bell.classical_bound, 6)

    def test_tripartite_bell_sum(self):
        bell = build_expression_bell_sum(ghz_settings(), "tripartite")
        self.assertEqual(len(bell.terms), 12)
        self.assertIn(("<alpha Q V>", -1), [(t.label, t.sign) for t in bell.terms])
        self.assertIn(("<C P V>", 1), [(t.label, t.sign) for t in bell.terms])


class TestCorrelationSpec(unittest.TestCase):
    def test_mask_out_of_range(self):
        square = mermin_square()
        with self.assertRaises(InvalidSpecError):
            CorrelationSpec((square["A"],), (0, 3))

    def test_bad_sign(self):
        with self.assertRaises(InvalidSpecError):
            CorrelationSpec((mermin_square()["A"],), (0,), sign=2)

    def test_conditioning_and_multiplied(self):
        square, settings = mermin_square(), bob_settings_singlet()
        spec = CorrelationSpec((square["C"], square["A"], square["B"]), (2, 1), (settings.P,))
        self.assertEqual(spec.product_mask, (1, 2))
        self.assertEqual(spec.conditioning, ("C",))
        self.assertEqual(spec.multiplied, ("A", "B", "P"))
