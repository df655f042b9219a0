"""Exact behavior tables over the six Mermin contexts.

Outcome triples follow the listed order of each context, e.g. ("A", "a", "alpha")
orders outcomes as (A, a, alpha).
"""

import itertools
import logging
import typing as t
from collections.abc import Mapping
from fractions import Fraction

from ctxlab.errors import BehaviorTableError
from ctxlab.quantum.scenario import CONTEXTS, MERMIN_NAMES, S_ORDER, SEQUENCES, context_label, context_of

logger = logging.getLogger(__name__)

Outcome = tuple[int, int, int]
TRIPLES: tuple[Outcome, ...] = tuple(itertools.product((1, -1), repeat=3))


class BehaviorTable(Mapping):
    """Context -> {outcome triple -> exact probability}, validated on construction."""

    def __init__(self, probabilities: Mapping[tuple[str, ...], Mapping[Outcome, t.Any]]):
        if missing := [context_label(c) for c in CONTEXTS if c not in probabilities]:
            raise BehaviorTableError(f"behavior table lacks contexts {missing}")
        if extra := [context_label(c) for c in probabilities if c not in CONTEXTS]:
            raise BehaviorTableError(f"behavior table has unknown contexts {extra}")
        self._table = {}
        for context in CONTEXTS:
            column = probabilities[context]
            if bad := [o for o in column if o not in TRIPLES]:
                raise BehaviorTableError(f"{context_label(context)}: invalid outcome triples {bad}")
            self._table[context] = {o: Fraction(column.get(o, 0)) for o in TRIPLES}
        self._validate()

    def __getitem__(self, context: tuple[str, ...]) -> dict[Outcome, Fraction]:
        return self._table[context]

    def __iter__(self):
        return iter(self._table)

    def __len__(self) -> int:
        return len(self._table)

    def _validate(self):
        for context, column in self._table.items():
            if negative := {o: p for o, p in column.items() if p < 0}:
                raise BehaviorTableError(f"{context_label(context)}: negative probabilities {negative}")
            if (total := sum(column.values())) != 1:
                raise BehaviorTableError(f"{context_label(context)}: probabilities sum to {total}")
        if violations := self.no_disturbance_violations():
            raise BehaviorTableError(f"no-disturbance violated for {violations}")

    def marginal(self, context: tuple[str, ...], name: str) -> Fraction:
        """p(name = +1) within ``context``."""
        i = context.index(name)
        return sum((p for o, p in self[context].items() if o[i] == 1), Fraction(0))

    def no_disturbance_violations(self) -> dict[str, list[Fraction]]:
        """Observables whose +1 marginal differs between the contexts holding them."""
        ret = {}
        for name in MERMIN_NAMES:
            marginals = [self.marginal(c, name) for c in CONTEXTS if name in c]
            if len(set(marginals)) > 1:
                ret[name] = marginals
        return ret

    def pair_correlation(self, first: str, second: str) -> Fraction:
        """<first second> read from the context holding both observables."""
        context = context_of((first, second))
        i, j = context.index(first), context.index(second)
        return sum((p * o[i] * o[j] for o, p in self[context].items()), Fraction(0))


def _two_point(context: tuple[str, ...], outcome: Outcome) -> tuple[tuple[str, ...], dict[Outcome, Fraction]]:
    opposite = tuple(-v for v in outcome)
    return context, {outcome: Fraction(1, 2), opposite: Fraction(1, 2)}


def locally_contextual_table() -> BehaviorTable:
    """Nondisturbing behavior reaching the algebraic maximum of S with P = Q = +1."""
    return BehaviorTable(
        dict(
            [
                _two_point(("A", "B", "C"), (1, 1, 1)),
                _two_point(("A", "a", "alpha"), (1, -1, 1)),
                _two_point(("a", "b", "c"), (1, 1, -1)),
                _two_point(("B", "b", "beta"), (1, 1, 1)),
                _two_point(("alpha", "beta", "gamma"), (1, 1, 1)),
                _two_point(("C", "c", "gamma"), (1, -1, 1)),
            ]
        )
    )


def uniform_table() -> BehaviorTable:
    return BehaviorTable({c: {o: Fraction(1, 8) for o in TRIPLES} for c in CONTEXTS})


def evaluate_behavior_S(
    table: BehaviorTable, distant: Mapping[str, int] | None = None, attr: str = "s_distant"
) -> Fraction:
    """S (or S' with ``attr="s_prime_distant"``) with Alice's pair correlators read from ``table``
    and deterministic distant outcomes (default all +1)."""
    distant = dict(distant or {})
    total = Fraction(0)
    for row in (SEQUENCES[i] for i in S_ORDER):
        names = getattr(row, attr)
        if bad := [n for n in names if distant.get(n, 1) not in (1, -1)]:
            raise BehaviorTableError(f"distant outcomes must be +1 or -1: {bad}")
        d = 1
        for name in names:
            d *= distant.get(name, 1)
        total += row.s_sign * d * table.pair_correlation(row.sequence[1], row.sequence[2])
    logger.debug("behavior S = %s with distant=%s", total, distant)
    return total
