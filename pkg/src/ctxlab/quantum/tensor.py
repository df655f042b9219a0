"""Exact small dense complex linear algebra for ±1-valued qubit observables.

Qubit 1 is the leftmost (most significant) tensor factor and computational basis
states are ordered |q1 q2 ...> with |0> before |1>. Registers hold at most four
qubits, so every operator is a dense matrix of dimension 2, 4, 8 or 16.
"""

import logging
import typing as t
from dataclasses import dataclass
from functools import reduce

import numpy as np

from ctxlab.config import get_config
from ctxlab.errors import DimensionError, NotHermitianError, NotInvolutionError, UnknownPauliLabelError

logger = logging.getLogger(__name__)

TOLERANCE = get_config("tolerances.structural", 1e-12)
MAX_QUBITS = 4
MAX_DIM = 2**MAX_QUBITS

PAULI = {
    "I": np.array([[1, 0], [0, 1]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def n_qubits_of(matrix: np.ndarray) -> int:
    """Number of qubits a square power-of-2 matrix acts on."""
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"matrix is not square: shape={matrix.shape}")
    dim = matrix.shape[0]
    if dim < 2 or dim & (dim - 1):
        raise DimensionError(f"dimension is not a power of 2: {dim=}")
    if dim > MAX_DIM:
        raise DimensionError(f"dimension exceeds {MAX_QUBITS} qubits: {dim=}")
    return dim.bit_length() - 1


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product with ``a`` as the left (more significant) factor."""
    n_qubits_of(a)
    n_qubits_of(b)
    if a.shape[0] * b.shape[0] > MAX_DIM:
        raise DimensionError(f"tensor product exceeds {MAX_QUBITS} qubits: {a.shape[0]}x{b.shape[0]}")
    return np.kron(a, b)


def kron_all(*matrices: np.ndarray) -> np.ndarray:
    """Left-to-right tensor product of several operators.

    Args:
        *matrices: Square operators, the first one acting on the lowest-numbered qubits.

    Returns:
        The product operator; ``DimensionError`` if it exceeds the register limit.
    """
    return reduce(kron, matrices)


def identity(n_qubits: int) -> np.ndarray:
    """Complex identity on ``n_qubits`` qubits.

    Args:
        n_qubits: Register size.

    Returns:
        A ``2**n_qubits`` square identity matrix.
    """
    return np.eye(2**n_qubits, dtype=complex)


def is_hermitian(matrix: np.ndarray, tol: float = TOLERANCE) -> bool:
    """Elementwise comparison of ``matrix`` with its conjugate transpose.

    Args:
        matrix: Square matrix to test.
        tol: Absolute tolerance per entry.

    Returns:
        True if every entry matches within ``tol``.
    """
    return bool(np.allclose(matrix, matrix.conj().T, rtol=0, atol=tol))


def is_involution(matrix: np.ndarray, tol: float = TOLERANCE) -> bool:
    return bool(np.allclose(matrix @ matrix, np.eye(matrix.shape[0]), rtol=0, atol=tol))


def check_observable_matrix(matrix: np.ndarray, name: str = "?") -> None:
    """Reject anything that is not a Hermitian involution (a ±1-valued observable)."""
    if not np.all(np.isfinite(matrix)):
        raise DimensionError(f"{name}: matrix has non-finite entries")
    if not is_hermitian(matrix):
        raise NotHermitianError(f"{name}: matrix is not Hermitian")
    if not is_involution(matrix):
        raise NotInvolutionError(f"{name}: matrix does not square to identity")


def observable_name(spec: t.Sequence[str], qubits: t.Sequence[int] | None = None) -> str:
    """Name a Pauli string in the lower-case subscript notation.

    >>> observable_name(("Z", "X"))
    'z1x2'
    >>> observable_name("IY", qubits=(3, 4))
    'y4'
    >>> observable_name(("I", "I"))
    'I'
    """
    qubits = qubits or range(1, len(spec) + 1)
    name = "".join(f"{label.lower()}{qubit}" for label, qubit in zip(spec, qubits) if label != "I")
    return name or "I"


@dataclass(frozen=True, eq=False)
class Observable:
    """A named ±1-valued observable acting on an ordered set of global qubits.

    ``matrix`` lives on the local space of ``qubits`` (first listed qubit is the left
    factor); ``embed`` pads it with identities for a full register.
    """

    name: str
    qubits: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        if len(set(qubits)) != len(qubits) or min(qubits) < 1:
            raise DimensionError(f"{self.name}: invalid qubit indices {qubits}")
        matrix = np.array(self.matrix, dtype=complex)
        if n_qubits_of(matrix) != len(qubits):
            raise DimensionError(f"{self.name}: matrix shape {matrix.shape} does not match {qubits=}")
        check_observable_matrix(matrix, self.name)
        matrix.setflags(write=False)
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "matrix", matrix)

    def embed(self, n_qubits: int) -> np.ndarray:
        """Full-register operator on ``n_qubits`` qubits."""
        if max(self.qubits) > n_qubits:
            raise DimensionError(f"{self.name} acts on {self.qubits}, register has {n_qubits} qubits")
        if n_qubits > MAX_QUBITS:
            raise DimensionError(f"register exceeds {MAX_QUBITS} qubits: {n_qubits=}")
        rest = [q for q in range(1, n_qubits + 1) if q not in self.qubits]
        padded = np.kron(self.matrix, identity(len(rest))) if rest else self.matrix
        order = list(self.qubits) + rest
        if order == sorted(order):
            return padded
        tensor = padded.reshape([2] * (2 * n_qubits))
        perm = [order.index(q) for q in range(1, n_qubits + 1)]
        perm += [n_qubits + axis for axis in perm]
        return tensor.transpose(perm).reshape(2**n_qubits, 2**n_qubits)

    def __repr__(self) -> str:
        return f"Observable({self.name!r}, qubits={self.qubits})"


def pauli_string(
    spec: t.Sequence[str], n_qubits: int, name: str | None = None, first_qubit: int = 1
) -> Observable:
    """Tensor product of Pauli labels, one per qubit, e.g. ``("Z", "X")`` is z1x2.

    ``first_qubit`` shifts the global indices (Bob's qubit 3 is ``pauli_string("Z", 1, first_qubit=3)``).
    """
    spec = tuple(label.upper() for label in spec)
    if len(spec) != n_qubits:
        raise DimensionError(f"Pauli string {spec} does not have {n_qubits=} labels")
    if unknown := [label for label in spec if label not in PAULI]:
        raise UnknownPauliLabelError(f"unknown Pauli labels {unknown} in {spec}")
    qubits = tuple(range(first_qubit, first_qubit + n_qubits))
    matrix = kron_all(*(PAULI[label] for label in spec))
    return Observable(name or observable_name(spec, qubits), qubits, matrix)


def bloch_observable(name: str, qubit: int, direction: t.Sequence[float]) -> Observable:
    """Single-qubit observable n·σ for a unit Bloch vector ``direction = (nx, ny, nz)``."""
    nx, ny, nz = (float(c) for c in direction)
    norm = np.sqrt(nx * nx + ny * ny + nz * nz)
    if abs(norm - 1) > TOLERANCE:
        raise NotInvolutionError(f"{name}: Bloch vector {direction} is not a unit vector ({norm=})")
    matrix = nx * PAULI["X"] + ny * PAULI["Y"] + nz * PAULI["Z"]
    return Observable(name, (qubit,), matrix)


def register_size(*observables: Observable) -> int:
    """Smallest register holding every observable.

    Args:
        *observables: Observables with 1-based qubit indices.

    Returns:
        The highest qubit index any of them acts on.
    """
    return max(max(o.qubits) for o in observables)


def commutes(o1: Observable, o2: Observable, n_qubits: int | None = None) -> bool:
    """True iff the commutator norm is below the structural tolerance."""
    n_qubits = n_qubits or register_size(o1, o2)
    m1, m2 = o1.embed(n_qubits), o2.embed(n_qubits)
    return bool(np.linalg.norm(m1 @ m2 - m2 @ m1) < TOLERANCE)


def mutually_commuting(observables: t.Sequence[Observable], n_qubits: int | None = None) -> bool:
    if not observables:
        return True
    n_qubits = n_qubits or register_size(*observables)
    return all(
        commutes(o1, o2, n_qubits) for i, o1 in enumerate(observables) for o2 in observables[i + 1 :]  # noqa: E203
    )


def eigenprojectors(o: Observable | np.ndarray, n_qubits: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Return (P+, P-) = ((I + O)/2, (I - O)/2).

    For an ``Observable`` the projectors live on ``n_qubits`` (default: its own local space);
    a bare matrix is used as given.
    """
    if isinstance(o, Observable):
        matrix = o.embed(n_qubits) if n_qubits else o.matrix
        name = o.name
    else:
        matrix = np.asarray(o, dtype=complex)
        n_qubits_of(matrix)
        name = "matrix"
        check_observable_matrix(matrix, name)
    eye = np.eye(matrix.shape[0], dtype=complex)
    return (eye + matrix) / 2, (eye - matrix) / 2


def operator_product(*matrices: np.ndarray) -> np.ndarray:
    return reduce(np.matmul, matrices)
