"""The eight-state GHZ basis, GHZ-basis measurement, and entanglement
swapping between two GHZ triples.

Basis convention: index ``2k`` is ``(|s> + |s~>)/sqrt(2)`` and ``2k+1`` is
``(|s> - |s~>)/sqrt(2)`` where ``s`` runs over 000, 100, 010, 110 and
``s~`` is its bitwise complement.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .qsim import (
    MIN_FORCE_PROB,
    Register,
    equal_up_to_global_phase,
    make_register,
    tensor,
)

__all__ = [
    "GHZ_TERMS",
    "GhzMeasureResult",
    "SwapOutcome",
    "entanglement_swap",
    "ghz_basis_measure",
    "ghz_state",
]

#: (first ket, complementary ket, relative sign) for each of the 8 basis states.
GHZ_TERMS: tuple[tuple[str, str, int], ...] = (
    ("000", "111", +1),
    ("000", "111", -1),
    ("100", "011", +1),
    ("100", "011", -1),
    ("010", "101", +1),
    ("010", "101", -1),
    ("110", "001", +1),
    ("110", "001", -1),
)


def ghz_state(index: int, labels: Sequence[str]) -> Register:
    """GHZ basis state ``index`` (0..7) on three named qubits."""
    if not isinstance(index, int) or not 0 <= index <= 7:
        raise ValueError(f"GHZ index must be an int in 0..7, got {index!r}")
    if len(tuple(labels)) != 3:
        raise ValueError(f"a GHZ state needs exactly 3 labels, got {labels!r}")
    first, second, sign = GHZ_TERMS[index]
    return make_register([(first, 1.0), (second, float(sign))], labels)


def _basis_matrix() -> np.ndarray:
    rows = np.zeros((8, 8), dtype=complex)
    for i, (first, second, sign) in enumerate(GHZ_TERMS):
        rows[i, int(first, 2)] = 1.0
        rows[i, int(second, 2)] = float(sign)
    return rows / np.sqrt(2.0)


_BASIS = _basis_matrix()
_BASIS.flags.writeable = False


class GhzMeasureResult(NamedTuple):
    index: int
    probability: float
    register: Register


class SwapOutcome(NamedTuple):
    outcome: int
    probability: float
    remainder: Register
    matched: int | None


def _ghz_branches(reg: Register, triple: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """Probabilities and unnormalized remainders for all 8 GHZ outcomes."""
    triple = tuple(triple)
    if len(set(triple)) != 3:
        raise ValueError(f"need three distinct labels, got {triple!r}")
    axes = [reg.axis(q) for q in triple]
    psi = np.moveaxis(reg.amps.reshape((2,) * reg.n_qubits), axes, range(3))
    psi = psi.reshape(8, -1)
    branches = _BASIS.conj() @ psi
    probs = np.real(np.einsum("ij,ij->i", branches, branches.conj()))
    return probs, branches


def ghz_basis_measure(
    reg: Register,
    triple: Sequence[str],
    *,
    force: int | None = None,
    rng: np.random.Generator | None = None,
) -> GhzMeasureResult:
    """Project three qubits onto the GHZ basis and remove them.

    Sampling mode consumes one uniform draw; forcing a (near-)zero
    probability outcome raises.  The remaining qubits keep their original
    relative order.
    """
    if (force is None) == (rng is None):
        raise ValueError("provide exactly one of force= or rng=")
    triple = tuple(triple)
    probs, branches = _ghz_branches(reg, triple)
    if force is not None:
        if not isinstance(force, int) or not 0 <= force <= 7:
            raise ValueError(f"GHZ outcome must be an int in 0..7, got {force!r}")
        pick = force
    else:
        pick = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
        pick = min(pick, 7)
    prob = float(probs[pick])
    if prob < MIN_FORCE_PROB:
        raise ValueError(f"GHZ outcome {pick} has probability {prob:.3e}")
    remaining = tuple(l for l in reg.labels if l not in triple)
    collapsed = Register(remaining, branches[pick] / np.sqrt(prob))
    return GhzMeasureResult(pick, prob, collapsed)


def entanglement_swap(i: int, j: int) -> list[SwapOutcome]:
    """Swap entanglement between GHZ triples (1,2,3) and (4,5,6).

    Prepares ``ghz(i) x ghz(j)``, projects qubits (1,3,5) onto the GHZ
    basis, and classifies each nonzero remainder on (2,4,6) against the
    GHZ basis up to global phase (``matched`` is None if unclassifiable,
    which does not occur for GHZ inputs).
    """
    left = ghz_state(i, ("1", "2", "3"))
    right = ghz_state(j, ("4", "5", "6"))
    probs, branches = _ghz_branches(tensor(left, right), ("1", "3", "5"))
    outcomes = []
    for k in range(8):
        prob = float(probs[k])
        if prob < MIN_FORCE_PROB:
            continue
        remainder = Register(("2", "4", "6"), branches[k] / np.sqrt(prob))
        matched = next(
            (
                m
                for m in range(8)
                if equal_up_to_global_phase(
                    remainder, ghz_state(m, ("2", "4", "6")), tol=1e-10
                )
            ),
            None,
        )
        outcomes.append(SwapOutcome(k, prob, remainder, matched))
    return outcomes
