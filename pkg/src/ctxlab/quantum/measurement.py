"""Sequential projective measurement with the Lüders update rule.

A sequence (O1, ..., On) is measured by iterating rho -> P rho P with the full
eigenprojector of each outcome; the trace of the final unnormalized branch is the
probability of the outcome tuple. Conditioning observables are measured and then
marginalized, never post-selected.
"""

import itertools
import logging
import typing as t
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ctxlab.config import get_config
from ctxlab.errors import IncompatibleContextError, ProbabilityError, RegisterMismatchError
from ctxlab.quantum.scenario import ALICE, CorrelationSpec, InequalityExpression, QuantumState
from ctxlab.quantum.tensor import Observable, eigenprojectors, mutually_commuting, operator_product

logger = logging.getLogger(__name__)

CLAMP = 1e-12
PROBABILITY_TOLERANCE = get_config("tolerances.probability", 1e-10)
VIOLATION_TOLERANCE = get_config("tolerances.violation", 1e-9)

Outcome = tuple[int, ...]


@dataclass(frozen=True)
class JointOutcomeDistribution:
    """Probabilities of the outcome tuples of a measured sequence, in measurement order."""

    labels: tuple[str, ...]
    outcomes: dict[Outcome, float]
    compatible: bool = True

    def expectation(self, positions: t.Iterable[int]) -> float:
        """<product of the outcomes at ``positions``>."""
        positions = tuple(positions)
        return float(sum(p * np.prod([outcome[i] for i in positions]) for outcome, p in self.outcomes.items()))

    def marginal(self, position: int) -> dict[int, float]:
        ret = {1: 0.0, -1: 0.0}
        for outcome, p in self.outcomes.items():
            ret[outcome[position]] += p
        return ret

    def reordered(self, labels: t.Sequence[str]) -> "JointOutcomeDistribution":
        """Same distribution with tuple positions permuted to follow ``labels``."""
        if sorted(labels) != sorted(self.labels):
            raise RegisterMismatchError(f"cannot reorder {self.labels} as {tuple(labels)}")
        index = [self.labels.index(label) for label in labels]
        outcomes = {tuple(o[i] for i in index): p for o, p in self.outcomes.items()}
        return JointOutcomeDistribution(tuple(labels), outcomes, self.compatible)

    def support(self) -> list[Outcome]:
        return [outcome for outcome, p in self.outcomes.items() if p > 0]


def _check_register(state: QuantumState, alice_sequence: t.Sequence[Observable], distant: t.Sequence[Observable]):
    for o in list(alice_sequence) + list(distant):
        if max(o.qubits) > state.n_qubits:
            raise RegisterMismatchError(f"{o.name} acts on {o.qubits}, state has {state.n_qubits} qubits")
    alice_qubits = set(state.qubits_of(ALICE))
    for o in distant:
        if shared := alice_qubits & set(o.qubits):
            raise RegisterMismatchError(f"distant observable {o.name} acts on Alice's qubits {sorted(shared)}")


def joint_distribution(
    state: QuantumState, alice_sequence: t.Sequence[Observable], distant: t.Sequence[Observable] = ()
) -> JointOutcomeDistribution:
    """Outcome distribution of Alice's ordered sequence followed by the distant observables.

    Args:
        state: Joint state of all parties.
        alice_sequence: Alice's observables in measurement order.
        distant: Bob's (and Charlie's) observables, measured after Alice.

    Returns:
        Probabilities of every outcome tuple in measurement order, with ``compatible``
        telling whether the whole sequence commutes pairwise.

    Raises:
        RegisterMismatchError: If an observable lies outside the register or a distant one acts on Alice's qubits.
        ProbabilityError: If a branch probability is negative or the total differs from 1.
    """
    _check_register(state, alice_sequence, distant)
    sequence = tuple(alice_sequence) + tuple(distant)
    projectors = [eigenprojectors(o, state.n_qubits) for o in sequence]
    branches: list[tuple[Outcome, np.ndarray]] = [((), state.density)]
    for plus, minus in projectors:
        branches = [
            (outcome + (value,), projector @ rho @ projector)
            for outcome, rho in branches
            for value, projector in ((1, plus), (-1, minus))
        ]
    outcomes = {}
    for outcome, rho in branches:
        p = float(np.trace(rho).real)
        if p < -CLAMP:
            raise ProbabilityError(f"negative probability {p!r} for outcome {outcome}")
        outcomes[outcome] = 0.0 if abs(p) < CLAMP else p
    if abs(total := sum(outcomes.values()) - 1) > PROBABILITY_TOLERANCE:
        raise ProbabilityError(f"outcome probabilities sum to 1{total:+.3e}")
    return JointOutcomeDistribution(tuple(o.name for o in sequence), outcomes, mutually_commuting(sequence))


def _product_positions(spec: CorrelationSpec) -> tuple[int, ...]:
    n = len(spec.sequence)
    return spec.product_mask + tuple(range(n, n + len(spec.distant)))


def correlation(state: QuantumState, spec: CorrelationSpec) -> float:
    """Unsigned correlator of ``spec``; the conditioning observables are measured first."""
    dist = joint_distribution(state, spec.sequence, spec.distant)
    return dist.expectation(_product_positions(spec))


def direct_correlation(state: QuantumState, spec: CorrelationSpec) -> float:
    """Tr(rho M) with M the plain operator product of the multiplied observables (no sequential update)."""
    _check_register(state, spec.sequence, spec.distant)
    multiplied = [spec.sequence[i] for i in spec.product_mask] + list(spec.distant)
    matrix = operator_product(*(o.embed(state.n_qubits) for o in multiplied))
    return float(np.trace(state.density @ matrix).real)


@dataclass(frozen=True)
class TermValue:
    label: str
    sign: int
    value: float


@dataclass(frozen=True)
class EvaluationReport:
    name: str
    terms: tuple[TermValue, ...]
    total: float
    classical_bound: Fraction
    violated: bool
    per_term: dict[str, float] = field(default_factory=dict)


def evaluate_expression(state: QuantumState, expr: InequalityExpression) -> EvaluationReport:
    """Sum the signed term values in term order and compare with the classical bound."""
    terms = []
    for spec in expr.terms:
        value = correlation(state, spec)
        logger.debug("%s %s = %.12g", expr.name, spec.label, value)
        terms.append(TermValue(spec.label, spec.sign, value))
    total = float(sum(term.sign * term.value for term in terms))
    violated = total > float(expr.classical_bound) + VIOLATION_TOLERANCE
    return EvaluationReport(
        name=expr.name,
        terms=tuple(terms),
        total=total,
        classical_bound=expr.classical_bound,
        violated=violated,
        per_term={term.label: term.value for term in terms},
    )


class NoDisturbanceResult(t.NamedTuple):
    passed: bool
    worst_deviation: float


def no_disturbance_check(state: QuantumState, contexts: t.Iterable[t.Sequence[Observable]]) -> NoDisturbanceResult:
    """Compare every observable's outcome marginal across all contexts and orderings holding it."""
    marginals: dict[str, list[float]] = {}
    for context in contexts:
        if not mutually_commuting(context):
            raise IncompatibleContextError(f"context {[o.name for o in context]} is not mutually commuting")
        for ordering in itertools.permutations(context):
            dist = joint_distribution(state, ordering)
            for position, o in enumerate(ordering):
                marginals.setdefault(o.name, []).append(dist.marginal(position)[1])
    worst = max((max(ps) - min(ps) for ps in marginals.values()), default=0.0)
    logger.info("no-disturbance: %d observables, worst deviation %.3e", len(marginals), worst)
    return NoDisturbanceResult(worst <= VIOLATION_TOLERANCE, float(worst))
