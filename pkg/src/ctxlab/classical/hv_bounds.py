"""Exhaustive deterministic hidden-variable oracles.

Every model here is deterministic; mixtures over hidden variables cannot exceed the
deterministic maximum because each expression is linear in the behavior. All values
are exact integers. Enumeration runs over ``itertools.product((1, -1), ...)`` and
keeps the first maximum found. Ties therefore go to the lexicographically smallest
assignment under the ordering +1 < -1, taken in variable order: Mermin observables in
``MERMIN_NAMES`` order, then the distant outcomes P, Q, U, V. Read with the numeric
ordering -1 < +1 this is the lexicographically largest assignment.

Two model classes are covered:

- noncontextual: one value per observable, whatever sequence it appears in;
- local, order-dependent: an observable measured first in a sequence takes its
  "fresh" value, later slots are free per sequence, distant outcomes are fixed.
"""

import itertools
import logging
import typing as t
from dataclasses import dataclass, field, replace

from ctxlab.errors import BoundsError
from ctxlab.quantum.scenario import (
    MERMIN_NAMES,
    RELATION_PAIRS,
    SEQUENCES,
    InequalityExpression,
    bob_settings_singlet,
    build_expression_bell_sum,
    build_expression_chsh,
    build_expression_S,
    build_expression_T,
    ghz_settings,
)

logger = logging.getLogger(__name__)

DISTANT_NAMES = ("P", "Q", "U", "V")
FRESH_NAMES = tuple(dict.fromkeys(row.first for row in SEQUENCES))
SEQUENCE_INDEX = {row.sequence: i for i, row in enumerate(SEQUENCES)}
LATER_PAIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def signs(n: int) -> t.Iterator[tuple[int, ...]]:
    return itertools.product((1, -1), repeat=n)


@dataclass(frozen=True)
class NCAssignment:
    values: dict[str, int]
    distant: dict[str, int] = field(default_factory=dict)

    def as_dict(self) -> dict[str, int]:
        return self.values | self.distant


@dataclass(frozen=True)
class BoundResult:
    bound: int
    witness: t.Any
    enumerated: int


def _distant_names(expr: InequalityExpression) -> tuple[str, ...]:
    used = set(expr.distant_names)
    return tuple(name for name in DISTANT_NAMES if name in used)


def evaluate_noncontextual(expr: InequalityExpression, assignment: NCAssignment) -> int:
    """Signed sum of deterministic outcome products, one value per observable."""
    values = assignment.as_dict()
    total = 0
    for term in expr.terms:
        product = term.sign
        for name in term.multiplied:
            product *= values[name]
        total += product
    return total


def max_noncontextual(expr: InequalityExpression) -> BoundResult:
    """Maximum of ``expr`` over all noncontextual assignments of the observables it mentions.

    Mermin observables the expression never mentions are fixed to +1 in the witness.
    """
    mentioned = {name for term in expr.terms for name in term.names}
    alice = [name for name in MERMIN_NAMES if name in mentioned]
    distant = _distant_names(expr)
    # terms compiled to (sign, variable positions)
    variables = alice + list(distant)
    compiled = [(term.sign, [variables.index(n) for n in term.multiplied]) for term in expr.terms]
    best, best_point, count = None, None, 0
    for point in signs(len(variables)):
        count += 1
        value = 0
        for sign, positions in compiled:
            for i in positions:
                sign *= point[i]
            value += sign
        if best is None or value > best:
            best, best_point = value, point
    values = {name: 1 for name in MERMIN_NAMES} | dict(zip(alice, best_point))
    witness = NCAssignment(values, dict(zip(distant, best_point[len(alice) :])))  # noqa: E203
    logger.info("NC maximum of %s: %d over %d assignments", expr.name, best, count)
    return BoundResult(best, witness, count)


def max_nchvt_T() -> BoundResult:
    return max_noncontextual(build_expression_T())


def max_nclhvt_S(expr: InequalityExpression | None = None) -> BoundResult:
    """Noncontextual maximum of S, or of whichever S-type expression is given.

    Args:
        expr: S or S' built from its distant settings; S with the singlet settings when omitted.

    Returns:
        The maximum with a witness: 10 for both S and S'.
    """
    return max_noncontextual(expr if expr is not None else build_expression_S(bob_settings_singlet()))


def max_chsh(which: int) -> BoundResult:
    return max_noncontextual(build_expression_chsh(bob_settings_singlet(), which))


def max_bell_sum(kind: str = "bipartite") -> BoundResult:
    settings = ghz_settings() if kind == "tripartite" else bob_settings_singlet()
    return max_noncontextual(build_expression_bell_sum(settings, kind))


@dataclass(frozen=True)
class HVAssignment:
    """Deterministic local model with order-dependent later slots.

    ``later[i]`` holds the values of the second and third observable of ``SEQUENCES[i]``.
    """

    fresh: dict[str, int]
    later: tuple[tuple[int, int], ...]
    distant: dict[str, int] = field(default_factory=dict)

    def slot(self, sequence: tuple[str, ...], position: int) -> int:
        if position == 0:
            return self.fresh[sequence[0]]
        return self.later[sequence_index(sequence)][position - 1]

    def term_value(self, term) -> int:
        product = term.sign
        for position in term.product_mask:
            product *= self.slot(term.names, position)
        for name in term.distant_names:
            product *= self.distant[name]
        return product

    def value(self, expr: InequalityExpression) -> int:
        """Naive term-by-term evaluation."""
        return sum(self.term_value(term) for term in expr.terms)

    @classmethod
    def random(cls, rng, distant_names: t.Iterable[str] = ("P", "Q")) -> "HVAssignment":
        """Uniformly random assignment; ``rng`` is a ``numpy.random.Generator``."""

        def pick() -> int:
            return int(rng.choice((1, -1)))

        return cls(
            fresh={name: pick() for name in FRESH_NAMES},
            later=tuple((pick(), pick()) for _ in SEQUENCES),
            distant={name: pick() for name in distant_names},
        )


def sequence_index(sequence: tuple[str, ...]) -> int:
    try:
        return SEQUENCE_INDEX[tuple(sequence)]
    except KeyError as e:
        raise BoundsError(f"{sequence} is not one of the measured sequences") from e


class _Decomposition(t.NamedTuple):
    outer_terms: list  # terms depending on fresh and distant values only
    groups: dict[int, list]  # sequence index -> terms touching its later slots


def _decompose(expr: InequalityExpression) -> _Decomposition:
    outer, groups = [], {}
    for term in expr.terms:
        if any(position > 0 for position in term.product_mask):
            groups.setdefault(sequence_index(term.names), []).append(term)
        else:
            outer.append(term)
    return _Decomposition(outer, groups)


def _group_value(terms: list, index: int, fresh: dict, distant: dict, pair: tuple[int, int]) -> int:
    later = [(1, 1)] * len(SEQUENCES)
    later[index] = pair
    model = HVAssignment(fresh, tuple(later), distant)
    return sum(model.term_value(term) for term in terms)


def decomposed_value(expr: InequalityExpression, assignment: HVAssignment) -> int:
    """Evaluate ``expr`` as outer terms plus one contribution per sequence."""
    parts = _decompose(expr)
    fresh, distant = assignment.fresh, assignment.distant
    total = sum(assignment.term_value(term) for term in parts.outer_terms)
    for index, terms in parts.groups.items():
        total += _group_value(terms, index, fresh, distant, assignment.later[index])
    return total


def _best_in(parts: _Decomposition, fresh_names: list[str], distant_names: list[str], points: list) -> tuple | None:
    """First maximum over ``points`` (enumeration index, outer values) of one partition."""
    best = None
    for number, point in points:
        fresh = {name: 1 for name in FRESH_NAMES} | dict(zip(fresh_names, point))
        distant = dict(zip(distant_names, point[len(fresh_names) :]))  # noqa: E203
        later = [(1, 1)] * len(SEQUENCES)
        total = sum(HVAssignment(fresh, tuple(later), distant).term_value(term) for term in parts.outer_terms)
        for index, terms in parts.groups.items():
            values = [_group_value(terms, index, fresh, distant, pair) for pair in LATER_PAIRS]
            top = max(values)
            later[index] = LATER_PAIRS[values.index(top)]
            total += top
        if best is None or total > best[0]:
            best = (total, number, HVAssignment(fresh, tuple(later), distant))
    return best


def max_lhvt_total(expr: InequalityExpression, partitions: int = 1) -> BoundResult:
    """Maximum of ``expr`` over local order-dependent deterministic models.

    For each outer choice of fresh and distant values the expression splits into one
    contribution per sequence, each maximized independently over its four later-slot pairs.
    The outer space is cut into ``partitions`` contiguous chunks searched one by one and
    merged keeping the earliest maximum, so the result does not depend on ``partitions``.

    Args:
        expr: Any expression over Mermin sequences and distant outcomes, e.g. T + S.
        partitions: Number of chunks the outer fresh/distant space is split into.

    Returns:
        The bound, an ``HVAssignment`` witness and the size of the full search space.

    Raises:
        BoundsError: If ``partitions`` is not positive.
    """
    if partitions < 1:
        raise BoundsError(f"partitions must be positive: {partitions=}")
    parts = _decompose(expr)
    mentioned = {term.names[0] for term in expr.terms if 0 in term.product_mask}
    fresh_names = [name for name in FRESH_NAMES if name in mentioned]
    distant_names = list(_distant_names(expr))
    points = list(enumerate(signs(len(fresh_names) + len(distant_names))))
    size = -(-len(points) // partitions)
    chunks = [points[i : i + size] for i in range(0, len(points), size)]  # noqa: E203
    results = [r for chunk in chunks if (r := _best_in(parts, fresh_names, distant_names, chunk))]
    bound, _, witness = max(results, key=lambda r: (r[0], -r[1]))
    enumerated = len(points) * len(LATER_PAIRS) ** len(parts.groups)
    logger.info("LHVT maximum of %s: %d (%d outer points, %d partitions)", expr.name, bound, len(points), len(chunks))
    return BoundResult(bound, witness, enumerated)


@dataclass(frozen=True)
class RelationTerm:
    sign: int
    variables: tuple[str, ...]


@dataclass(frozen=True)
class Relation:
    """sum(left) >= sum(right) - slack, pointwise over +-1 values of its variables."""

    name: str
    left: tuple[RelationTerm, ...]
    right: tuple[RelationTerm, ...]
    slack: int = 2

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(v for term in self.left + self.right for v in term.variables))

    def margin(self, values: dict[str, int]) -> int:
        """left - right + slack; nonnegative where the relation holds."""

        def side(terms):
            total = 0
            for term in terms:
                product = term.sign
                for v in term.variables:
                    product *= values[v]
                total += product
            return total

        return side(self.left) - side(self.right) + self.slack

    def without_slack(self) -> "Relation":
        return replace(self, name=f"{self.name} without slack", slack=0)

    def with_flipped_sign(self, side: str, index: int) -> "Relation":
        terms = list(getattr(self, side))
        terms[index] = replace(terms[index], sign=-terms[index].sign)
        return replace(self, name=f"{self.name} with {side}[{index}] flipped", **{side: tuple(terms)})


def fresh_variable(name: str) -> str:
    return f"^{name}"


def slot_variable(sequence: tuple[str, ...], position: int) -> str:
    return f"{sequence[position]}|{' '.join(sequence)}"


def build_relations(kind: str = "bipartite") -> tuple[Relation, ...]:
    """The six pairwise relations whose left sides add up to the Bell sum of ``kind``.

    Per sequence: bell_sign * ^first * D >= t_sign * ^first * x * y + s_sign * x * y * D - 1,
    two sequences per relation.
    """
    if kind not in ("bipartite", "tripartite"):
        raise BoundsError(f"unknown relation set {kind=}")
    attr = "s_prime_distant" if kind == "tripartite" else "s_distant"
    relations = []
    for i, j in RELATION_PAIRS:
        left, right = [], []
        for row in (SEQUENCES[i], SEQUENCES[j]):
            distant = getattr(row, attr)
            first = fresh_variable(row.first)
            later = (slot_variable(row.sequence, 1), slot_variable(row.sequence, 2))
            left.append(RelationTerm(row.bell_sign, (first,) + distant))
            right.append(RelationTerm(row.t_sign, (first,) + later))
            right.append(RelationTerm(row.s_sign, later + distant))
        name = f"{kind} {' '.join(SEQUENCES[i].sequence)} / {' '.join(SEQUENCES[j].sequence)}"
        relations.append(Relation(name, tuple(left), tuple(right)))
    return tuple(relations)


class RelationCheck(t.NamedTuple):
    relation: str
    points: int
    counterexample: dict[str, int] | None

    @property
    def holds(self) -> bool:
        return self.counterexample is None


def check_relation(relation: Relation) -> RelationCheck:
    variables = relation.variables
    points = 0
    for point in signs(len(variables)):
        points += 1
        values = dict(zip(variables, point))
        if relation.margin(values) < 0:
            return RelationCheck(relation.name, points, values)
    return RelationCheck(relation.name, points, None)


class VerificationResult(t.NamedTuple):
    passed: bool
    checks: tuple[RelationCheck, ...]

    @property
    def counterexample(self) -> RelationCheck | None:
        return next((c for c in self.checks if not c.holds), None)


def verify_algebraic_relations(kind: str = "bipartite") -> VerificationResult:
    checks = tuple(check_relation(relation) for relation in build_relations(kind))
    passed = all(c.holds for c in checks)
    logger.info("%s relations: %s over %d points", kind, "hold" if passed else "FAIL", sum(c.points for c in checks))
    return VerificationResult(passed, checks)
