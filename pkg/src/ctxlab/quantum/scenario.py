"""Observables, settings, states and correlation expressions of the nonlocality scenarios.

Alice holds qubits 1 and 2 and measures sequences of compatible observables from the
Mermin square; Bob holds qubit 3 (settings P, Q); in the GHZ scenario Charlie holds
qubit 4 (settings U, V). Qubit 1 is an ancilla in the state cos(chi)|0> + sin(chi)|1>.

Every expression (T, S, S', the relations of the LHVT proof and the Bell sums) is built
from one table of twelve measurement sequences, ``SEQUENCES``.
"""

import logging
import math
import typing as t
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ctxlab.config import get_config
from ctxlab.errors import InvalidParameterError, InvalidSpecError, ProbabilityError
from ctxlab.quantum.tensor import (
    TOLERANCE,
    Observable,
    bloch_observable,
    is_hermitian,
    kron_all,
    mutually_commuting,
    pauli_string,
)

logger = logging.getLogger(__name__)

STATE_TOLERANCE = get_config("tolerances.state", 1e-10)
DEFAULT_CHI = get_config("scenario.chi_angle", math.pi / 8)

ALICE, BOB, CHARLIE = "Alice", "Bob", "Charlie"
BIPARTITE_PARTIES = {1: ALICE, 2: ALICE, 3: BOB}
TRIPARTITE_PARTIES = {1: ALICE, 2: ALICE, 3: BOB, 4: CHARLIE}

MERMIN_PAULIS = {
    "A": "ZI",
    "B": "IZ",
    "C": "ZZ",
    "a": "IX",
    "b": "XI",
    "c": "XX",
    "alpha": "ZX",
    "beta": "XZ",
    "gamma": "YY",
}
MERMIN_NAMES = tuple(MERMIN_PAULIS)
MERMIN_ROWS = (("A", "B", "C"), ("a", "b", "c"), ("alpha", "beta", "gamma"))
MERMIN_COLUMNS = tuple(zip(*MERMIN_ROWS))

# Operator product of each row / column: +I everywhere except C.c.gamma = -I.
CONTEXT_PRODUCT_SIGN = {row: 1 for row in MERMIN_ROWS} | {col: 1 for col in MERMIN_COLUMNS}
CONTEXT_PRODUCT_SIGN[("C", "c", "gamma")] = -1

# Column order of the locally contextual behavior table
CONTEXTS = (
    ("A", "B", "C"),
    ("A", "a", "alpha"),
    ("a", "b", "c"),
    ("B", "b", "beta"),
    ("alpha", "beta", "gamma"),
    ("C", "c", "gamma"),
)


def context_label(names: t.Iterable[str]) -> str:
    return " ".join(names)


def context_of(names: t.Iterable[str]) -> tuple[str, ...]:
    """The Mermin context (in table column order) holding all ``names``."""
    wanted = set(names)
    for context in CONTEXTS:
        if wanted <= set(context):
            return context
    raise InvalidSpecError(f"no Mermin context contains {sorted(wanted)}")


class MerminSquare(Mapping):
    """The nine two-qubit observables A..gamma on Alice's qubits 1 and 2."""

    def __init__(self, observables: Mapping[str, Observable]):
        self._observables = dict(observables)

    def __getitem__(self, name: str) -> Observable:
        return self._observables[name]

    def __iter__(self):
        return iter(self._observables)

    def __len__(self) -> int:
        return len(self._observables)

    def rows(self) -> tuple[tuple[Observable, ...], ...]:
        return tuple(tuple(self[n] for n in row) for row in MERMIN_ROWS)

    def columns(self) -> tuple[tuple[Observable, ...], ...]:
        return tuple(tuple(self[n] for n in col) for col in MERMIN_COLUMNS)

    def contexts(self) -> dict[str, tuple[Observable, ...]]:
        return {context_label(ctx): tuple(self[n] for n in ctx) for ctx in CONTEXTS}


@lru_cache
def mermin_square() -> MerminSquare:
    return MerminSquare({name: pauli_string(spec, 2, name=name) for name, spec in MERMIN_PAULIS.items()})


@dataclass(frozen=True)
class DistantSettings:
    """Bob's settings P, Q and, in the GHZ scenario, Charlie's U, V."""

    P: Observable
    Q: Observable
    U: Observable | None = None
    V: Observable | None = None

    def as_dict(self) -> dict[str, Observable]:
        return {name: obs for name in ("P", "Q", "U", "V") if (obs := getattr(self, name)) is not None}

    @property
    def tripartite(self) -> bool:
        return self.U is not None and self.V is not None


def bob_settings_singlet() -> DistantSettings:
    """P = -(z3 + x3)/sqrt(2), Q = -(z3 - x3)/sqrt(2)."""
    r = math.sqrt(0.5)
    return DistantSettings(P=bloch_observable("P", 3, (-r, 0, -r)), Q=bloch_observable("Q", 3, (r, 0, -r)))


def nonmax_coefficients(theta: float) -> tuple[float, float]:
    """(d1, d2) = (cos theta, sin theta) for 0 <= theta <= pi/2."""
    if not -TOLERANCE <= theta <= math.pi / 2 + TOLERANCE:
        raise InvalidParameterError(f"theta out of [0, pi/2]: {theta=}")
    return math.cos(theta), math.sin(theta)


def bob_settings_nonmax(theta: float, branch: str = "reflected") -> DistantSettings:
    """P = -cos(t) z3 - sin(t) x3 and Q = cos(t') z3 - sin(t') x3, cos(t) = 1/sqrt(1 + 4 (d1 d2)^2).

    sin(t) is taken nonnegative and sin(t') = -sin(t). ``branch="reflected"`` sets
    t' = t + pi (cos(t') = -cos(t)), which reduces to the singlet settings at theta = pi/4;
    ``branch="printed"`` keeps cos(t') = cos(t), which makes Q = -P.
    """
    d1, d2 = nonmax_coefficients(theta)
    cos_t = 1 / math.sqrt(1 + 4 * (d1 * d2) ** 2)
    sin_t = math.sqrt(max(0.0, 1 - cos_t**2))
    if branch == "reflected":
        cos_tp, sin_tp = -cos_t, -sin_t
    elif branch == "printed":
        cos_tp, sin_tp = cos_t, -sin_t
    else:
        raise InvalidParameterError(f"unknown settings branch: {branch=}")
    P = bloch_observable("P", 3, (-sin_t, 0, -cos_t))
    Q = bloch_observable("Q", 3, (-sin_tp, 0, cos_tp))
    return DistantSettings(P=P, Q=Q)


def ghz_settings() -> DistantSettings:
    """P = z3, Q = x3; U = z4, V = x4."""
    return DistantSettings(
        P=pauli_string("Z", 1, name="P", first_qubit=3),
        Q=pauli_string("X", 1, name="Q", first_qubit=3),
        U=pauli_string("Z", 1, name="U", first_qubit=4),
        V=pauli_string("X", 1, name="V", first_qubit=4),
    )


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Density operator on 2-4 qubits together with the party owning each qubit."""

    n_qubits: int
    density: np.ndarray
    party_map: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        density = np.array(self.density, dtype=complex)
        dim = 2**self.n_qubits
        if density.shape != (dim, dim):
            raise InvalidParameterError(f"density shape {density.shape} does not match n_qubits={self.n_qubits}")
        if not is_hermitian(density):
            raise InvalidParameterError("density matrix is not Hermitian")
        if abs(np.trace(density).real - 1) > TOLERANCE:
            raise ProbabilityError(f"density matrix trace is {np.trace(density).real!r}, expected 1")
        if (min_eig := np.linalg.eigvalsh(density).min()) < -STATE_TOLERANCE:
            raise InvalidParameterError(f"density matrix is not positive semidefinite: {min_eig=}")
        density.setflags(write=False)
        object.__setattr__(self, "density", density)
        object.__setattr__(self, "party_map", dict(self.party_map))

    @classmethod
    def from_vector(cls, vector: t.Sequence[complex], party_map: Mapping[int, str]) -> "QuantumState":
        vector = np.asarray(vector, dtype=complex)
        n_qubits = int(vector.size).bit_length() - 1
        return cls(n_qubits, np.outer(vector, vector.conj()), party_map)

    def qubits_of(self, party: str) -> tuple[int, ...]:
        return tuple(q for q, p in sorted(self.party_map.items()) if p == party)

    def reduced(self, qubits: t.Iterable[int]) -> np.ndarray:
        """Partial trace keeping ``qubits`` (in register order)."""
        keep = set(qubits)
        rho = self.density.reshape([2] * (2 * self.n_qubits))
        remaining = self.n_qubits
        for qubit in sorted(set(range(1, self.n_qubits + 1)) - keep, reverse=True):
            rho = np.trace(rho, axis1=qubit - 1, axis2=qubit - 1 + remaining)
            remaining -= 1
        return rho.reshape(2**remaining, 2**remaining)


def check_visibility(visibility: float) -> float:
    if not 0 <= visibility <= 1:
        raise InvalidParameterError(f"visibility out of [0, 1]: {visibility=}")
    return float(visibility)


def ancilla_vector(chi_angle: float) -> np.ndarray:
    return np.array([math.cos(chi_angle), math.sin(chi_angle)], dtype=complex)


def mix_with_white_noise(vector: np.ndarray, visibility: float) -> np.ndarray:
    """v |psi><psi| + (1 - v) I / dim."""
    dim = vector.size
    return visibility * np.outer(vector, vector.conj()) + (1 - visibility) * np.eye(dim, dtype=complex) / dim


def _with_ancilla(chi_angle: float, shared: np.ndarray, party_map: Mapping[int, str]) -> QuantumState:
    chi = ancilla_vector(chi_angle)
    density = kron_all(np.outer(chi, chi.conj()), shared)
    return QuantumState(len(party_map), density, party_map)


def singlet_vector() -> np.ndarray:
    """(|01> - |10>)/sqrt(2)."""
    return np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)


def nonmax_vector(theta: float) -> np.ndarray:
    """d1 |01> - d2 |10>."""
    d1, d2 = nonmax_coefficients(theta)
    return np.array([0, d1, -d2, 0], dtype=complex)


def ghz_vector() -> np.ndarray:
    """Uniform superposition of |b2 b3 b4> with sign (-1)^(b2 b3 + b2 b4 + b3 b4)."""
    signs = [(-1) ** ((b >> 2 & 1) * (b >> 1 & 1) + (b >> 2 & 1) * (b & 1) + (b >> 1 & 1) * (b & 1)) for b in range(8)]
    return np.array(signs, dtype=complex) / (2 * math.sqrt(2))


def build_state_singlet(chi_angle: float = DEFAULT_CHI, visibility: float = 1.0) -> QuantumState:
    """|chi>_1 with the noisy singlet v |psi-><psi-| + (1 - v) I/4 on qubits 2-3.

    Args:
        chi_angle: Ancilla angle, |chi> = cos(chi) |0> + sin(chi) |1>.
        visibility: Weight v of the singlet against white noise, in [0, 1].

    Returns:
        A 3-qubit state with Alice on qubits 1-2 and Bob on qubit 3.

    Raises:
        InvalidParameterError: If ``visibility`` is outside [0, 1].
    """
    visibility = check_visibility(visibility)
    return _with_ancilla(chi_angle, mix_with_white_noise(singlet_vector(), visibility), BIPARTITE_PARTIES)


def build_state_nonmax(theta: float, visibility: float = 1.0, chi_angle: float = DEFAULT_CHI) -> QuantumState:
    """|chi>_1 with d1 |01> - d2 |10> (d1 = cos theta, d2 = sin theta) on qubits 2-3.

    Args:
        theta: Entanglement angle in [0, pi/2]; pi/4 gives the singlet.
        visibility: Weight of the pure pair against white noise, in [0, 1].
        chi_angle: Ancilla angle.

    Returns:
        A 3-qubit state with Alice on qubits 1-2 and Bob on qubit 3.

    Raises:
        InvalidParameterError: If ``theta`` or ``visibility`` is out of range.
    """
    visibility = check_visibility(visibility)
    return _with_ancilla(chi_angle, mix_with_white_noise(nonmax_vector(theta), visibility), BIPARTITE_PARTIES)


def build_state_ghz(visibility: float = 1.0, chi_angle: float = DEFAULT_CHI) -> QuantumState:
    """|chi>_1 with the noisy GHZ state v |psi><psi| + (1 - v) I/8 on qubits 2-4.

    Args:
        visibility: Weight of the GHZ state against white noise, in [0, 1].
        chi_angle: Ancilla angle.

    Returns:
        A 4-qubit state: Alice on qubits 1-2, Bob on 3, Charlie on 4.

    Raises:
        InvalidParameterError: If ``visibility`` is outside [0, 1].
    """
    visibility = check_visibility(visibility)
    return _with_ancilla(chi_angle, mix_with_white_noise(ghz_vector(), visibility), TRIPARTITE_PARTIES)


def random_density(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Ginibre-random full-rank density matrix."""
    dim = 2**n_qubits
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_alice_state(rng: np.random.Generator, n_qubits: int = 3) -> QuantumState:
    """Random state on Alice's qubits 1-2 times a random state of the remaining qubits."""
    density = kron_all(random_density(2, rng), random_density(n_qubits - 2, rng))
    party_map = TRIPARTITE_PARTIES if n_qubits == 4 else BIPARTITE_PARTIES
    return QuantumState(n_qubits, density, party_map)


@dataclass(frozen=True)
class SequenceRow:
    """One sequential measurement of Alice and the terms it carries.

    The T term multiplies all three outcomes with ``t_sign``; the S (S') term multiplies
    the second and third outcomes with the distant outcomes ``s_distant`` (``s_prime_distant``)
    and ``s_sign``, conditioned on the first observable.
    """

    sequence: tuple[str, str, str]
    t_sign: int
    s_sign: int
    s_distant: tuple[str, ...]
    s_prime_distant: tuple[str, ...]

    @property
    def first(self) -> str:
        return self.sequence[0]

    @property
    def bell_sign(self) -> int:
        """Sign of the Bell term <first D> this sequence bounds from below."""
        return self.t_sign * self.s_sign


# In the order of the T expression.
SEQUENCES = (
    SequenceRow(("C", "A", "B"), +1, +1, ("P",), ("P", "V")),
    SequenceRow(("B", "A", "C"), +1, +1, ("P",), ("P", "V")),
    SequenceRow(("alpha", "beta", "gamma"), +1, +1, ("P",), ("P", "U")),
    SequenceRow(("beta", "alpha", "gamma"), +1, +1, ("P",), ("P", "V")),
    SequenceRow(("a", "A", "alpha"), +1, +1, ("P",), ("P", "U")),
    SequenceRow(("alpha", "A", "a"), +1, -1, ("Q",), ("Q", "V")),
    SequenceRow(("B", "b", "beta"), +1, +1, ("Q",), ("Q", "U")),
    SequenceRow(("beta", "B", "b"), +1, +1, ("Q",), ("Q", "U")),
    SequenceRow(("c", "a", "b"), +1, +1, ("P",), ("P", "U")),
    SequenceRow(("a", "b", "c"), +1, -1, ("Q",), ("Q", "V")),
    SequenceRow(("C", "c", "gamma"), -1, -1, ("Q",), ("Q", "U")),
    SequenceRow(("c", "C", "gamma"), -1, +1, ("Q",), ("Q", "V")),
)
T_ORDER = tuple(range(12))
S_ORDER = (0, 1, 2, 3, 4, 5, 6, 7, 10, 11, 8, 9)
# Sequence pairs combined in each algebraic relation of the LHVT proof
RELATION_PAIRS = ((0, 1), (2, 3), (4, 5), (6, 7), (10, 11), (8, 9))

CHSH_SETS = {
    1: (("C", "P", +1), ("C", "Q", +1), ("alpha", "P", +1), ("alpha", "Q", -1)),
    2: (("beta", "P", +1), ("beta", "Q", +1), ("c", "P", +1), ("c", "Q", -1)),
    3: (("B", "P", +1), ("B", "Q", +1), ("a", "P", +1), ("a", "Q", -1)),
}

EXPECTED_TERMS = {"T": 12, "S": 12, "S'": 12}
CLASSICAL_BOUNDS = {
    "T": (Fraction(8), "NCHVT"),
    "S": (Fraction(12), "LHVT"),
    "S'": (Fraction(12), "LHVT"),
    "CHSH": (Fraction(2), "LHVT"),
    "BellSum": (Fraction(6), "LHVT"),
    "T+S": (Fraction(18), "LHVT"),
    "T+S'": (Fraction(18), "LHVT"),
}


@dataclass(frozen=True, eq=False)
class CorrelationSpec:
    """One signed correlation term: the ordered Alice sequence, which of its outcomes enter
    the product, and the distant observables whose outcomes are multiplied in as well."""

    sequence: tuple[Observable, ...]
    product_mask: tuple[int, ...]
    distant: tuple[Observable, ...] = ()
    sign: int = 1
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "sequence", tuple(self.sequence))
        object.__setattr__(self, "distant", tuple(self.distant))
        mask = tuple(sorted(set(self.product_mask)))
        if any(not 0 <= i < len(self.sequence) for i in mask):
            raise InvalidSpecError(f"product mask {self.product_mask} out of range for {self.names}")
        if self.sign not in (1, -1):
            raise InvalidSpecError(f"sign must be +1 or -1: {self.sign=}")
        object.__setattr__(self, "product_mask", mask)
        if not self.label:
            object.__setattr__(self, "label", self._default_label())

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(o.name for o in self.sequence)

    @property
    def distant_names(self) -> tuple[str, ...]:
        return tuple(o.name for o in self.distant)

    @property
    def multiplied(self) -> tuple[str, ...]:
        """Names whose outcomes enter the product, distant ones last."""
        return tuple(self.names[i] for i in self.product_mask) + self.distant_names

    @property
    def conditioning(self) -> tuple[str, ...]:
        """Measured but unmultiplied observables."""
        return tuple(name for i, name in enumerate(self.names) if i not in self.product_mask)

    def _default_label(self) -> str:
        label = f"<{' '.join(self.multiplied)}>"
        if self.conditioning:
            label += "_" + ",".join(self.conditioning)
        return label


@dataclass(frozen=True, eq=False)
class InequalityExpression:
    """Signed sum of correlation terms with its classical bound."""

    name: str
    terms: tuple[CorrelationSpec, ...]
    classical_bound: Fraction
    bound_model: str = "LHVT"

    def __add__(self, other: "InequalityExpression") -> "InequalityExpression":
        """Concatenate terms; the bound is the joint LHVT bound where one is known, else the sum."""
        name = f"{self.name}+{other.name}"
        bound, model = CLASSICAL_BOUNDS.get(name, (self.classical_bound + other.classical_bound, "LHVT"))
        return InequalityExpression(name, self.terms + other.terms, bound, model)

    @property
    def observables(self) -> dict[str, Observable]:
        ret = {}
        for term in self.terms:
            for obs in term.sequence + term.distant:
                ret.setdefault(obs.name, obs)
        return ret

    @property
    def distant_names(self) -> tuple[str, ...]:
        names = {name for term in self.terms for name in term.distant_names}
        return tuple(sorted(names))


def _checked(name: str, terms: list[CorrelationSpec], kind: str | None = None) -> InequalityExpression:
    for term in terms:
        if not mutually_commuting(term.sequence):
            raise InvalidSpecError(f"{name}: incompatible Alice sequence {term.names}")
    if (expected := EXPECTED_TERMS.get(name)) is not None and len(terms) != expected:
        raise InvalidSpecError(f"{name}: {len(terms)} terms, expected {expected}")
    bound, model = CLASSICAL_BOUNDS[kind or name]
    return InequalityExpression(name, tuple(terms), bound, model)


def _settings_lookup(settings: DistantSettings, names: t.Iterable[str]) -> tuple[Observable, ...]:
    available = settings.as_dict()
    try:
        return tuple(available[name] for name in names)
    except KeyError as e:
        raise InvalidSpecError(f"distant setting {e} missing from {sorted(available)}") from e


def build_expression_T() -> InequalityExpression:
    """The Alice-only sum of sequence correlators <CAB> + <BAC> + ... - <cC gamma>.

    Returns:
        Twelve full-product terms with noncontextual bound 8.
    """
    square = mermin_square()
    terms = []
    for row in (SEQUENCES[i] for i in T_ORDER):
        terms.append(CorrelationSpec(tuple(square[n] for n in row.sequence), (0, 1, 2), (), row.t_sign))
    return _checked("T", terms)


def _conditioned_terms(settings: DistantSettings, attr: str) -> list[CorrelationSpec]:
    square = mermin_square()
    terms = []
    for row in (SEQUENCES[i] for i in S_ORDER):
        distant = _settings_lookup(settings, getattr(row, attr))
        terms.append(CorrelationSpec(tuple(square[n] for n in row.sequence), (1, 2), distant, row.s_sign))
    return terms


def build_expression_S(settings: DistantSettings) -> InequalityExpression:
    """Alice-Alice-Bob correlators <ABP>_C + <ACP>_B + ... - <bcQ>_a.

    Args:
        settings: Bob's settings P and Q.

    Returns:
        Twelve conditioned terms carrying the local bound 12 (10 for noncontextual models).
    """
    return _checked("S", _conditioned_terms(settings, "s_distant"))


def build_expression_S_prime(settings: DistantSettings) -> InequalityExpression:
    """Alice-Alice-Bob-Charlie correlators <ABPV>_C + ... - <bcQV>_a.

    Args:
        settings: Tripartite settings P, Q (Bob) and U, V (Charlie).

    Returns:
        Twelve conditioned terms carrying the local bound 12 (10 for noncontextual models).

    Raises:
        InvalidSpecError: If ``settings`` lacks Charlie's observables.
    """
    if not settings.tripartite:
        raise InvalidSpecError("S' needs Charlie's settings U and V")
    return _checked("S'", _conditioned_terms(settings, "s_prime_distant"))


def build_expression_chsh(settings: DistantSettings, which: int) -> InequalityExpression:
    """One of the three CHSH inequalities between two of Alice's observables and P, Q.

    Args:
        settings: Distant settings supplying P and Q.
        which: 1, 2 or 3.

    Returns:
        Four single-correlator terms with local bound 2.

    Raises:
        InvalidSpecError: If ``which`` is not a known inequality.
    """
    square = mermin_square()
    try:
        spec = CHSH_SETS[which]
    except KeyError as e:
        raise InvalidSpecError(f"unknown CHSH inequality {which=}, expected one of {sorted(CHSH_SETS)}") from e
    terms = [
        CorrelationSpec((square[alice],), (0,), _settings_lookup(settings, [distant]), sign)
        for alice, distant, sign in spec
    ]
    return _checked(f"CHSH-{which}", terms, kind="CHSH")


def build_expression_bell_sum(settings: DistantSettings, kind: str = "bipartite") -> InequalityExpression:
    """Sum of the Bell terms sign * <first D> bounded by the algebraic relations.

    Args:
        settings: Bipartite or tripartite distant settings.
        kind: "bipartite" (first observable with one distant outcome) or "tripartite" (with two).

    Returns:
        Twelve single-correlator terms with classical bound 6.

    Raises:
        InvalidSpecError: If ``kind`` is unknown.
    """
    if kind not in ("bipartite", "tripartite"):
        raise InvalidSpecError(f"unknown Bell sum {kind=}")
    attr = "s_prime_distant" if kind == "tripartite" else "s_distant"
    square = mermin_square()
    terms = []
    for pair in RELATION_PAIRS:
        for row in (SEQUENCES[i] for i in pair):
            distant = _settings_lookup(settings, getattr(row, attr))
            terms.append(CorrelationSpec((square[row.first],), (0,), distant, row.bell_sign))
    name = "BellSum'" if kind == "tripartite" else "BellSum"
    return _checked(name, terms, kind="BellSum")
