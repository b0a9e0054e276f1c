"""Dense complex state-vector engine over registers of named qubits.

A :class:`Register` couples an ordered tuple of qubit labels with a
unit-norm amplitude vector; ``labels[0]`` is the most significant bit of
the basis-state index.  Every operation is a pure function that returns a
fresh register, so values can be shared between threads without locking.

Measurements either sample an outcome (consuming exactly one uniform draw
from a caller-supplied ``numpy.random.Generator``) or force a requested
outcome; both report the exact Born probability, and the measured qubit is
removed from the collapsed register.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "ATOL",
    "GATES",
    "MAX_QUBITS",
    "DensityMatrix",
    "MeasureResult",
    "Register",
    "apply_cnot",
    "apply_gate1",
    "equal_up_to_global_phase",
    "fidelity_pure",
    "make_register",
    "measure",
    "outcome_probabilities",
    "permute",
    "reduced_density",
    "tensor",
]

#: Hard cap on register width; the protocol itself needs ten qubits.
MAX_QUBITS = 12

#: Tolerance for equality checks on norms, probabilities and amplitudes.
ATOL = 1e-12

#: Eigenvalue floor below which a density matrix is rejected as non-PSD.
PSD_FLOOR = -1e-10

#: Forcing an outcome whose Born probability is below this is an error.
MIN_FORCE_PROB = 1e-12

_SQRT_HALF = 1.0 / math.sqrt(2.0)

GATES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
    "H": np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) * _SQRT_HALF,
}

_CNOT = np.array(
    [
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
        [0, 0, 1, 0],
    ],
    dtype=complex,
)

#: Outcome alphabet of a conjugate-basis (X) measurement.
X_OUTCOMES = ("+", "-")

#: Outcome alphabet of a computational-basis (Z) measurement.
Z_OUTCOMES = (0, 1)


class Register:
    """Pure state over named qubits; treat instances as immutable.

    Args:
        labels: distinct qubit names, most significant index bit first.
        amps: ``2**len(labels)`` complex amplitudes; normalized on entry.

    Raises:
        ValueError: duplicate labels, too many qubits, wrong amplitude
            count, non-finite entries, or an all-zero vector.
    """

    __slots__ = ("labels", "amps")

    def __init__(self, labels: Sequence[str], amps: Iterable[complex]) -> None:
        labels = tuple(labels)
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate qubit labels in {labels!r}")
        if len(labels) > MAX_QUBITS:
            raise ValueError(f"{len(labels)} qubits exceeds the {MAX_QUBITS}-qubit cap")
        vec = np.asarray(amps, dtype=complex).reshape(-1)
        if vec.size != 1 << len(labels):
            raise ValueError(
                f"expected {1 << len(labels)} amplitudes for {len(labels)} qubits, got {vec.size}"
            )
        if not np.all(np.isfinite(vec.real)) or not np.all(np.isfinite(vec.imag)):
            raise ValueError("amplitudes must be finite")
        norm = float(np.linalg.norm(vec))
        if norm < 1e-12:
            raise ValueError("cannot build a register from the zero vector")
        vec = vec / norm
        vec.flags.writeable = False
        self.labels = labels
        self.amps = vec

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    def axis(self, label: str) -> int:
        """Position of ``label`` in the index bit order (0 = most significant)."""
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"no qubit labeled {label!r} in {self.labels!r}") from None

    def index_of(self, assignment: dict[str, int]) -> int:
        """Flat index of the basis state assigning each label its given bit."""
        if set(assignment) != set(self.labels):
            raise ValueError("assignment must cover exactly the register labels")
        idx = 0
        for label in self.labels:
            idx = (idx << 1) | (assignment[label] & 1)
        return idx

    def amplitude(self, bits: str) -> complex:
        """Amplitude of the basis state written as a bitstring in label order."""
        if len(bits) != self.n_qubits or set(bits) - {"0", "1"}:
            raise ValueError(f"expected a {self.n_qubits}-bit string, got {bits!r}")
        return complex(self.amps[int(bits, 2) if bits else 0])

    def nonzero_terms(self, tol: float = 1e-9) -> list[tuple[str, complex]]:
        """(bitstring, amplitude) pairs with magnitude above ``tol``."""
        n = self.n_qubits
        return [
            (format(i, f"0{n}b") if n else "", complex(a))
            for i, a in enumerate(self.amps)
            if abs(a) > tol
        ]

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        terms = " + ".join(f"({a:.4g})|{bits}>" for bits, a in self.nonzero_terms())
        return f"Register({','.join(self.labels)}: {terms})"


class MeasureResult(NamedTuple):
    outcome: int | str
    probability: float
    register: Register


@dataclass(frozen=True)
class DensityMatrix:
    """Reduced state over named qubits; validated Hermitian, unit-trace, PSD."""

    labels: tuple[str, ...]
    mat: np.ndarray

    def __post_init__(self) -> None:
        dim = 1 << len(self.labels)
        mat = np.asarray(self.mat, dtype=complex)
        if mat.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix for {self.labels!r}")
        if np.max(np.abs(mat - mat.conj().T)) > 1e-12:
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(mat).real - 1.0) > 1e-12 or abs(np.trace(mat).imag) > 1e-12:
            raise ValueError("density matrix must have unit trace")
        if float(np.linalg.eigvalsh(mat)[0]) < PSD_FLOOR:
            raise ValueError("density matrix must be positive semidefinite")
        mat.flags.writeable = False
        object.__setattr__(self, "mat", mat)

    def purity(self) -> float:
        return float(np.real(np.trace(self.mat @ self.mat)))


def make_register(
    entries: Iterable[tuple[str, complex]], labels: Sequence[str]
) -> Register:
    """Build a register from (bitstring, amplitude) pairs.

    Bitstrings are written in label order; repeated bitstrings accumulate.
    The result is normalized, so only amplitude ratios matter.
    """
    labels = tuple(labels)
    vec = np.zeros(1 << len(labels), dtype=complex)
    for bits, amp in entries:
        if len(bits) != len(labels) or set(bits) - {"0", "1"}:
            raise ValueError(f"basis string {bits!r} does not index {labels!r}")
        vec[int(bits, 2) if bits else 0] += amp
    return Register(labels, vec)


def tensor(first: Register, second: Register) -> Register:
    """Tensor product; ``first`` supplies the more significant index bits."""
    if set(first.labels) & set(second.labels):
        raise ValueError(
            f"label collision: {sorted(set(first.labels) & set(second.labels))}"
        )
    return Register(first.labels + second.labels, np.kron(first.amps, second.amps))


def _apply_matrix(reg: Register, qubits: Sequence[str], matrix: np.ndarray) -> np.ndarray:
    """Apply ``matrix`` to the listed qubits; returns the new flat vector."""
    n = reg.n_qubits
    axes = [reg.axis(q) for q in qubits]
    k = len(axes)
    psi = np.moveaxis(reg.amps.reshape((2,) * n), axes, range(k))
    psi = (matrix @ psi.reshape(1 << k, -1)).reshape((2,) * n)
    return np.moveaxis(psi, range(k), axes).reshape(-1)


def apply_gate1(reg: Register, qubit: str, gate: str) -> Register:
    """Apply a named single-qubit gate (one of I, X, Z, H)."""
    if gate not in GATES:
        raise ValueError(f"unknown gate {gate!r}; expected one of {sorted(GATES)}")
    return Register(reg.labels, _apply_matrix(reg, (qubit,), GATES[gate]))


def apply_cnot(reg: Register, control: str, target: str) -> Register:
    """Apply a controlled-NOT from ``control`` onto ``target``."""
    if control == target:
        raise ValueError("control and target must differ")
    return Register(reg.labels, _apply_matrix(reg, (control, target), _CNOT))


def _branch_vectors(reg: Register, qubit: str, basis: str) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized post-measurement vectors for the two outcomes of ``qubit``."""
    if basis not in ("Z", "X"):
        raise ValueError(f"basis must be 'Z' or 'X', got {basis!r}")
    axis = reg.axis(qubit)
    psi = np.moveaxis(reg.amps.reshape((2,) * reg.n_qubits), axis, 0).reshape(2, -1)
    if basis == "Z":
        return psi[0].copy(), psi[1].copy()
    return (psi[0] + psi[1]) * _SQRT_HALF, (psi[0] - psi[1]) * _SQRT_HALF


def outcome_probabilities(reg: Register, qubit: str, basis: str = "Z") -> tuple[float, float]:
    """Born probabilities of the two outcomes, in alphabet order (0/1 or +/-)."""
    lo, hi = _branch_vectors(reg, qubit, basis)
    return (
        float(np.real(np.vdot(lo, lo))),
        float(np.real(np.vdot(hi, hi))),
    )


def measure(
    reg: Register,
    qubit: str,
    basis: str = "Z",
    *,
    force: int | str | None = None,
    rng: np.random.Generator | None = None,
) -> MeasureResult:
    """Projectively measure one qubit and remove it from the register.

    Exactly one of ``force`` (a required outcome: 0/1 for Z, "+"/"-" for X)
    or ``rng`` (sampling mode; consumes one uniform draw) must be given.
    The returned probability is the exact Born probability of the reported
    outcome, and the collapsed register does not depend on which mode chose
    it.  Measuring the last qubit leaves an empty (scalar) register.
    """
    if (force is None) == (rng is None):
        raise ValueError("provide exactly one of force= or rng=")
    alphabet: tuple = Z_OUTCOMES if basis == "Z" else X_OUTCOMES
    branches = _branch_vectors(reg, qubit, basis)
    probs = [float(np.real(np.vdot(b, b))) for b in branches]
    if force is not None:
        if force not in alphabet:
            raise ValueError(f"outcome {force!r} not in {alphabet!r} for basis {basis}")
        pick = alphabet.index(force)
    else:
        pick = 0 if rng.random() < probs[0] else 1
    prob = probs[pick]
    if prob < MIN_FORCE_PROB:
        raise ValueError(
            f"outcome {alphabet[pick]!r} on {qubit!r} has probability {prob:.3e}"
        )
    remaining = tuple(l for l in reg.labels if l != qubit)
    collapsed = Register(remaining, branches[pick] / math.sqrt(prob))
    return MeasureResult(alphabet[pick], prob, collapsed)


def reduced_density(reg: Register, keep: Sequence[str]) -> DensityMatrix:
    """Partial trace onto ``keep`` (result labels follow the order given)."""
    keep = tuple(keep)
    if not keep:
        raise ValueError("keep must name at least one qubit")
    if len(set(keep)) != len(keep):
        raise ValueError(f"duplicate labels in keep list {keep!r}")
    axes = [reg.axis(q) for q in keep]
    k = len(axes)
    psi = np.moveaxis(reg.amps.reshape((2,) * reg.n_qubits), axes, range(k))
    psi = psi.reshape(1 << k, -1)
    return DensityMatrix(keep, psi @ psi.conj().T)


def fidelity_pure(rho: DensityMatrix, target: Register) -> float:
    """Overlap ``<target|rho|target>`` after aligning qubit order."""
    if sorted(rho.labels) != sorted(target.labels):
        raise ValueError(
            f"label mismatch: {sorted(rho.labels)} vs {sorted(target.labels)}"
        )
    vec = permute(target, rho.labels).amps
    return float(np.real(np.vdot(vec, rho.mat @ vec)))


def equal_up_to_global_phase(first: Register, second: Register, tol: float = 1e-10) -> bool:
    """Whether the two states differ only by a global phase.

    The phase is read off at ``first``'s largest-magnitude amplitude, then
    the full vectors are compared within ``tol``.
    """
    if sorted(first.labels) != sorted(second.labels):
        raise ValueError(
            f"label mismatch: {sorted(first.labels)} vs {sorted(second.labels)}"
        )
    other = permute(second, first.labels).amps
    k = int(np.argmax(np.abs(first.amps)))
    if abs(other[k]) < 1e-12:
        return False
    phase = first.amps[k] * np.conj(other[k])
    phase /= abs(phase)
    return bool(np.linalg.norm(first.amps - phase * other) <= tol)


def permute(reg: Register, new_order: Sequence[str]) -> Register:
    """Reorder the label tuple (and amplitudes to match); contents unchanged."""
    new_order = tuple(new_order)
    if sorted(new_order) != sorted(reg.labels):
        raise ValueError(f"{new_order!r} is not a permutation of {reg.labels!r}")
    if new_order == reg.labels:
        return reg
    axes = [reg.axis(l) for l in new_order]
    psi = reg.amps.reshape((2,) * reg.n_qubits).transpose(axes).reshape(-1)
    return Register(new_order, psi)
