"""Bidirectional teleportation of two EPR-type payloads over a pair of
shared GHZ triples.

Alice holds channel qubits (a1, a2, a3) plus her input pair (A1, A2) in
the state ``c0|00> + c1|11>``; Bob holds (b1, b2, b3) and (B1, B2).  After
two local CNOTs and six local measurements -- computational basis on a1
and b3, conjugate basis on A2, B2, A1 and B1 -- Alice's payload lands on
Bob's (b1, b2) and Bob's on Alice's (a2, a3), each up to an outcome-keyed
Pauli correction.  All 64 measurement leaves occur with probability 1/64
regardless of the inputs.

The conventions used throughout:

* full register label order: (a1, b1, b2, a2, a3, b3, A1, A2, B1, B2);
* first measurement round order: a1, A2, b3, B2; second round: A1, B1;
* ``leaf_index`` packs outcomes into six bits in that same order, with
  0 / "+" as the zero bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .corrections import Table, apply_ops, encode_ops, load_table, minimal_correction
from .ghz import ghz_state
from .qsim import (
    Register,
    apply_cnot,
    fidelity_pure,
    make_register,
    measure,
    permute,
    reduced_density,
    tensor,
)

__all__ = [
    "ALICE_PAYLOAD_LABELS",
    "BOB_PAYLOAD_LABELS",
    "CHANNEL_LABELS",
    "FULL_LABELS",
    "PAYLOAD_LABELS",
    "REMAINDER_LABELS",
    "BranchLeaf",
    "EprInput",
    "Step3Result",
    "Step4Result",
    "correct",
    "encode",
    "enumerate_branches",
    "generate_correction_table",
    "leaf_index",
    "noncooperation_fidelity",
    "prepare_channel",
    "prepare_full_state",
    "step3_measure",
    "step4_measure",
]

CHANNEL_LABELS = ("a1", "b1", "b2", "a2", "a3", "b3")
ALICE_INPUT_LABELS = ("A1", "A2")
BOB_INPUT_LABELS = ("B1", "B2")
FULL_LABELS = CHANNEL_LABELS + ALICE_INPUT_LABELS + BOB_INPUT_LABELS

#: Unmeasured qubits after the first measurement round, in register order.
REMAINDER_LABELS = ("b1", "b2", "a2", "a3", "A1", "B1")

#: Unmeasured qubits after the second round.
PAYLOAD_LABELS = ("b1", "b2", "a2", "a3")
BOB_PAYLOAD_LABELS = ("b1", "b2")
ALICE_PAYLOAD_LABELS = ("a2", "a3")

_X = ("+", "-")


@dataclass(frozen=True)
class EprInput:
    """Two-qubit payload ``c0|00> + c1|11>`` with unit norm."""

    c0: complex
    c1: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "c0", complex(self.c0))
        object.__setattr__(self, "c1", complex(self.c1))
        norm_sq = abs(self.c0) ** 2 + abs(self.c1) ** 2
        if abs(norm_sq - 1.0) > 1e-12:
            raise ValueError(f"|c0|^2 + |c1|^2 = {norm_sq!r} is not 1")

    @classmethod
    def normalized(cls, c0: complex, c1: complex) -> "EprInput":
        """Rescale an arbitrary nonzero pair onto the unit sphere."""
        norm = np.hypot(abs(complex(c0)), abs(complex(c1)))
        if norm < 1e-12:
            raise ValueError("cannot normalize the zero pair")
        return cls(complex(c0) / norm, complex(c1) / norm)

    def register(self, labels: Sequence[str]) -> Register:
        return make_register([("00", self.c0), ("11", self.c1)], labels)


def prepare_channel() -> Register:
    """Shared six-qubit channel: one GHZ triple per teleportation direction."""
    return tensor(
        ghz_state(0, ("a1", "b1", "b2")),
        ghz_state(0, ("a2", "a3", "b3")),
    )


def prepare_full_state(alice: EprInput, bob: EprInput) -> Register:
    """Channel joined with both parties' input pairs (ten qubits)."""
    state = tensor(prepare_channel(), alice.register(ALICE_INPUT_LABELS))
    return tensor(state, bob.register(BOB_INPUT_LABELS))


def encode(full: Register) -> Register:
    """Couple the inputs to the channel: CNOT A1->a1 and CNOT B1->b3."""
    if sorted(full.labels) != sorted(FULL_LABELS):
        raise ValueError(f"expected the ten protocol qubits, got {full.labels!r}")
    state = permute(full, FULL_LABELS)
    state = apply_cnot(state, "A1", "a1")
    return apply_cnot(state, "B1", "b3")


class Step3Result(NamedTuple):
    a1: int
    A2: str
    b3: int
    B2: str
    probability: float
    register: Register  # over REMAINDER_LABELS


class Step4Result(NamedTuple):
    A1: str
    B1: str
    probability: float
    payload: Register  # over PAYLOAD_LABELS


def step3_measure(
    encoded: Register,
    *,
    force: Sequence[int | str] | None = None,
    rng: np.random.Generator | None = None,
) -> Step3Result:
    """First measurement round: Z on a1 and b3, X on A2 and B2.

    ``force`` is an (a1, A2, b3, B2) outcome tuple; sampling consumes four
    uniform draws in that fixed order.  The reported probability is the
    joint Born probability of the four outcomes.
    """
    if (force is None) == (rng is None):
        raise ValueError("provide exactly one of force= or rng=")
    wanted = tuple(force) if force is not None else (None,) * 4
    if len(wanted) != 4:
        raise ValueError(f"force must give (a1, A2, b3, B2), got {force!r}")
    state, prob = encoded, 1.0
    outcomes = []
    for (qubit, basis), want in zip(
        (("a1", "Z"), ("A2", "X"), ("b3", "Z"), ("B2", "X")), wanted
    ):
        res = measure(state, qubit, basis, force=want, rng=rng if want is None else None)
        state, prob = res.register, prob * res.probability
        outcomes.append(res.outcome)
    return Step3Result(outcomes[0], outcomes[1], outcomes[2], outcomes[3], prob, state)


def step4_measure(
    remainder: Register,
    *,
    force: Sequence[str] | None = None,
    rng: np.random.Generator | None = None,
) -> Step4Result:
    """Second measurement round: X on A1, then X on B1 (two draws if sampled)."""
    if (force is None) == (rng is None):
        raise ValueError("provide exactly one of force= or rng=")
    wanted = tuple(force) if force is not None else (None, None)
    if len(wanted) != 2:
        raise ValueError(f"force must give (A1, B1), got {force!r}")
    state, prob = remainder, 1.0
    outcomes = []
    for qubit, want in zip(("A1", "B1"), wanted):
        res = measure(state, qubit, "X", force=want, rng=rng if want is None else None)
        state, prob = res.register, prob * res.probability
        outcomes.append(res.outcome)
    return Step4Result(outcomes[0], outcomes[1], prob, state)


def correct(
    payload: Register,
    a1: int,
    A2: str,
    b3: int,
    B2: str,
    A1: str,
    B1: str,
    table: Table | None = None,
) -> Register:
    """Apply both parties' outcome-keyed corrections to the four-qubit payload."""
    if table is None:
        table = load_table()
    bob_ops, alice_ops = table[(a1, A2, b3, B2, A1, B1)]
    fixed = apply_ops(payload, BOB_PAYLOAD_LABELS, bob_ops)
    return apply_ops(fixed, ALICE_PAYLOAD_LABELS, alice_ops)


def leaf_index(a1: int, A2: str, b3: int, B2: str, A1: str, B1: str) -> int:
    """Pack the six outcomes into 0..63 (measurement order, 0/+ = zero bit)."""
    bits = (a1, A2 == "-", b3, B2 == "-", A1 == "-", B1 == "-")
    idx = 0
    for bit in bits:
        idx = (idx << 1) | int(bit)
    return idx


@dataclass(frozen=True)
class BranchLeaf:
    """One fully resolved measurement leaf of the protocol."""

    a1: int
    A2: str
    b3: int
    B2: str
    A1: str
    B1: str
    probability: float
    post_state: Register  # payload over (b1, b2, a2, a3) before correction
    bob_ops: str
    alice_ops: str
    fidelity_alice_to_bob: float  # Bob's corrected (b1, b2) against Alice's input
    fidelity_bob_to_alice: float  # Alice's corrected (a2, a3) against Bob's input

    @property
    def index(self) -> int:
        return leaf_index(self.a1, self.A2, self.b3, self.B2, self.A1, self.B1)

    def outcomes(self) -> dict[str, int | str]:
        return {
            "a1": self.a1,
            "A2": self.A2,
            "b3": self.b3,
            "B2": self.B2,
            "A1": self.A1,
            "B1": self.B1,
        }


def _step3_combinations() -> Iterable[tuple[int, str, int, str]]:
    for a1 in (0, 1):
        for A2 in _X:
            for b3 in (0, 1):
                for B2 in _X:
                    yield a1, A2, b3, B2


def enumerate_branches(
    alice: EprInput, bob: EprInput, table: Table | None = None
) -> list[BranchLeaf]:
    """Force every outcome combination and collect all 64 corrected leaves.

    Leaves are ordered by :func:`leaf_index`.  Each leaf's fidelities are
    those of the corrected payload halves against the intended inputs.
    """
    if table is None:
        table = load_table()
    encoded = encode(prepare_full_state(alice, bob))
    target_bob = alice.register(BOB_PAYLOAD_LABELS)
    target_alice = bob.register(ALICE_PAYLOAD_LABELS)
    leaves = []
    for a1, A2, b3, B2 in _step3_combinations():
        s3 = step3_measure(encoded, force=(a1, A2, b3, B2))
        for A1 in _X:
            for B1 in _X:
                s4 = step4_measure(s3.register, force=(A1, B1))
                fixed = correct(s4.payload, a1, A2, b3, B2, A1, B1, table)
                bob_ops, alice_ops = table[(a1, A2, b3, B2, A1, B1)]
                leaves.append(
                    BranchLeaf(
                        a1=a1,
                        A2=A2,
                        b3=b3,
                        B2=B2,
                        A1=A1,
                        B1=B1,
                        probability=s3.probability * s4.probability,
                        post_state=s4.payload,
                        bob_ops=bob_ops,
                        alice_ops=alice_ops,
                        fidelity_alice_to_bob=fidelity_pure(
                            reduced_density(fixed, BOB_PAYLOAD_LABELS), target_bob
                        ),
                        fidelity_bob_to_alice=fidelity_pure(
                            reduced_density(fixed, ALICE_PAYLOAD_LABELS), target_alice
                        ),
                    )
                )
    return leaves


def _payload_factors(payload: Register) -> tuple[Register, Register]:
    """Split the four-qubit payload into its (b1,b2) and (a2,a3) factors.

    The protocol guarantees a product state across this cut; a second
    singular value above 1e-10 raises.
    """
    mat = permute(payload, PAYLOAD_LABELS).amps.reshape(4, 4)
    u, s, vh = np.linalg.svd(mat)
    if s.shape[0] > 1 and s[1] > 1e-10:
        raise ValueError(f"payload is not a product across the party cut: {s!r}")
    return (
        Register(BOB_PAYLOAD_LABELS, u[:, 0]),
        Register(ALICE_PAYLOAD_LABELS, vh[0, :]),
    )


# Generic complex inputs used when deriving the correction table; any pair
# with four distinct, nonzero products would do, since the searched factors
# depend only on the leaf, not on the amplitudes.
_GENERIC_ALICE = EprInput(0.6, 0.8j)
_GENERIC_BOB = EprInput(0.8, complex(0.36, 0.48))


def generate_correction_table() -> dict[tuple, tuple[str, str]]:
    """Derive the minimal correction pair for every measurement leaf.

    For each leaf the payload factorizes into a (b1, b2) part carrying
    Alice's amplitudes and an (a2, a3) part carrying Bob's; each factor is
    searched independently for the smallest {I,Z,X,XZ} pair that restores
    the intended input up to global phase.
    """
    alice, bob = _GENERIC_ALICE, _GENERIC_BOB
    encoded = encode(prepare_full_state(alice, bob))
    target_bob = alice.register(BOB_PAYLOAD_LABELS)
    target_alice = bob.register(ALICE_PAYLOAD_LABELS)
    table: dict[tuple, tuple[str, str]] = {}
    for a1, A2, b3, B2 in _step3_combinations():
        s3 = step3_measure(encoded, force=(a1, A2, b3, B2))
        for A1 in _X:
            for B1 in _X:
                s4 = step4_measure(s3.register, force=(A1, B1))
                bob_part, alice_part = _payload_factors(s4.payload)
                table[(a1, A2, b3, B2, A1, B1)] = (
                    encode_ops(minimal_correction(bob_part, target_bob)),
                    encode_ops(minimal_correction(alice_part, target_alice)),
                )
    return table


def _withheld_substituted(key: tuple, withheld: str) -> tuple:
    """Table key with the withheld announcement replaced by its "+" default."""
    slot = {"A1": 4, "B1": 5}[withheld]
    out = list(key)
    out[slot] = "+"
    return tuple(out)


def noncooperation_fidelity(epr: EprInput, withheld: str = "A1") -> float:
    """Expected fidelity at the deprived receiver when one announcement is withheld.

    ``withheld="A1"`` starves Bob of Alice's second-round result (so
    ``epr`` is Alice's input); ``"B1"`` starves Alice.  The receiver still
    applies every correction derivable from the announcements it did get,
    with the withheld result defaulted to "+".  The returned value averages
    the receiver's corrected reduced state over the two equally likely
    withheld outcomes and equals ``|c0|**4 + |c1|**4``.
    """
    if withheld not in ("A1", "B1"):
        raise ValueError(f"withheld must be 'A1' or 'B1', got {withheld!r}")
    table = load_table()
    # The cooperative direction's input never influences the deprived side.
    other = EprInput(np.sqrt(0.5), np.sqrt(0.5))
    if withheld == "A1":
        alice, bob = epr, other
        receiver_labels, ops_slot = BOB_PAYLOAD_LABELS, 0
    else:
        alice, bob = other, epr
        receiver_labels, ops_slot = ALICE_PAYLOAD_LABELS, 1
    target = epr.register(receiver_labels)
    encoded = encode(prepare_full_state(alice, bob))
    expected = 0.0
    for a1, A2, b3, B2 in _step3_combinations():
        s3 = step3_measure(encoded, force=(a1, A2, b3, B2))
        for known_val in _X:
            group_prob = 0.0
            mixed = np.zeros((4, 4), dtype=complex)
            for hidden_val in _X:
                A1, B1 = (
                    (hidden_val, known_val)
                    if withheld == "A1"
                    else (known_val, hidden_val)
                )
                s4 = step4_measure(s3.register, force=(A1, B1))
                key = _withheld_substituted((a1, A2, b3, B2, A1, B1), withheld)
                ops = table[key][ops_slot]
                fixed = apply_ops(s4.payload, receiver_labels, ops)
                rho = reduced_density(fixed, receiver_labels).mat
                weight = s3.probability * s4.probability
                mixed += weight * rho
                group_prob += weight
            fidelity = float(
                np.real(np.vdot(target.amps, (mixed / group_prob) @ target.amps))
            )
            expected += group_prob * fidelity
    return expected
