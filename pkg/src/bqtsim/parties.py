"""Two-party protocol sessions with auditable transcripts.

Alice owns {a1, a2, a3, A1, A2} and Bob owns {b1, b2, b3, B1, B2}.  Every
gate, measurement, classical announcement, correction, and final fidelity
is recorded as a transcript event.  A session consumes exactly six uniform
draws from its seeded generator, one per measurement, in the fixed order
a1, A2, b3, B2, A1, B1.

Announcements travel in two rounds, Alice first within each round: after
the first measurement round each party announces both of its results, and
after the second round each party announces its conjugate-basis result --
unless the session's cooperation mode withholds it.  A party computes its
correction only from its own outcomes plus announcements actually
received, defaulting a withheld second-round announcement to "+".

Transcript JSON schema ``bqtsim.transcript/1``::

    {"schema": "bqtsim.transcript/1", "events": [...]}

Every event carries the same eight keys: step (1..4), actor ("Alice",
"Bob" or "channel"), kind ("prepare" | "gate" | "measure" | "message" |
"correct" | "fidelity"), qubits (list of labels), basis ("Z", "X" or
null), outcome (kind-specific; see below), probability (Born probability
for measure events, else null) and message_round (1 or 2 for message
events, else null).  Outcome payloads: gate events name the gate;
measure events give the result; message events give a list of
[qubit, basis, result] triples; correct events give the applied ops
string; fidelity events give the measured overlap.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .corrections import Table, apply_ops, load_table
from .protocol import (
    ALICE_PAYLOAD_LABELS,
    BOB_PAYLOAD_LABELS,
    EprInput,
    leaf_index,
    prepare_channel,
    prepare_full_state,
    step4_measure,
)
from .qsim import Register, apply_cnot, fidelity_pure, measure, reduced_density

__all__ = [
    "ALICE",
    "BOB",
    "COOPERATION_MODES",
    "OWNED",
    "TRANSCRIPT_SCHEMA",
    "Event",
    "Message",
    "Party",
    "SessionResult",
    "Transcript",
    "ownership_check",
    "run_session",
]

ALICE = "Alice"
BOB = "Bob"

OWNED: dict[str, frozenset[str]] = {
    ALICE: frozenset({"a1", "a2", "a3", "A1", "A2"}),
    BOB: frozenset({"b1", "b2", "b3", "B1", "B2"}),
}

COOPERATION_MODES = ("full", "alice_withholds_A1", "bob_withholds_B1")

TRANSCRIPT_SCHEMA = "bqtsim.transcript/1"

_MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class Message:
    """One classical announcement: (qubit, basis, outcome) triples."""

    sender: str
    round: int
    payload: tuple[tuple[str, str, int | str], ...]


@dataclass(frozen=True)
class Event:
    step: int
    actor: str
    kind: str
    qubits: tuple[str, ...]
    basis: str | None = None
    outcome: object = None
    probability: float | None = None
    message_round: int | None = None

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "actor": self.actor,
            "kind": self.kind,
            "qubits": list(self.qubits),
            "basis": self.basis,
            "outcome": self.outcome,
            "probability": self.probability,
            "message_round": self.message_round,
        }


@dataclass
class Transcript:
    events: list[Event] = field(default_factory=list)

    def add(self, event: Event) -> None:
        self.events.append(event)

    def of_kind(self, kind: str, actor: str | None = None) -> list[Event]:
        return [
            e for e in self.events if e.kind == kind and (actor is None or e.actor == actor)
        ]

    def to_json_obj(self) -> dict:
        return {"schema": TRANSCRIPT_SCHEMA, "events": [e.to_dict() for e in self.events]}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2, sort_keys=True)


@dataclass
class Party:
    """A protocol participant: its qubits, its input, and what it knows."""

    name: str
    owned: frozenset[str]
    input: EprInput
    received: list[Message] = field(default_factory=list)
    outcomes: dict[str, int | str] = field(default_factory=dict)

    def heard(self, qubit: str, default: int | str | None = None) -> int | str | None:
        for message in self.received:
            for label, _basis, outcome in message.payload:
                if label == qubit:
                    return outcome
        return default


@dataclass(frozen=True)
class SessionResult:
    transcript: Transcript
    fidelity_alice_to_bob: float
    fidelity_bob_to_alice: float
    expected_fidelity: float | None  # deprived direction when withholding, else None
    leaf: int
    outcomes: dict[str, int | str]
    seed: int
    cooperation: str


def _correction_key(party: Party) -> tuple:
    """Assemble the six-outcome table key from what this party can know."""
    if party.name == BOB:
        return (
            party.heard("a1"),
            party.heard("A2"),
            party.outcomes["b3"],
            party.outcomes["B2"],
            party.heard("A1", "+"),
            party.outcomes["B1"],
        )
    return (
        party.outcomes["a1"],
        party.outcomes["A2"],
        party.heard("b3"),
        party.heard("B2"),
        party.outcomes["A1"],
        party.heard("B1", "+"),
    )


def run_session(
    alice_input: EprInput,
    bob_input: EprInput,
    seed: int,
    cooperation: str = "full",
    table: Table | None = None,
) -> SessionResult:
    """Play one seeded session and return the transcript plus fidelities.

    Identical arguments reproduce the transcript byte for byte.  Under a
    withholding mode the deprived receiver corrects with the withheld
    announcement defaulted to "+", and ``expected_fidelity`` reports the
    density-matrix average of its corrected state over the two equally
    likely withheld outcomes (``|c0|**4 + |c1|**4`` of the undelivered
    input); under full cooperation it is None.
    """
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed <= _MAX_SEED:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    if cooperation not in COOPERATION_MODES:
        raise ValueError(f"cooperation must be one of {COOPERATION_MODES}")
    if table is None:
        table = load_table()
    rng = np.random.default_rng(seed)
    t = Transcript()
    alice = Party(ALICE, OWNED[ALICE], alice_input)
    bob = Party(BOB, OWNED[BOB], bob_input)

    t.add(Event(1, "channel", "prepare", prepare_channel().labels))
    t.add(Event(1, ALICE, "prepare", ("A1", "A2")))
    t.add(Event(1, BOB, "prepare", ("B1", "B2")))
    state = prepare_full_state(alice_input, bob_input)

    state = _gate(t, state, 2, ALICE, ("A1", "a1"))
    state = _gate(t, state, 2, BOB, ("B1", "b3"))

    for step, party, qubit, basis in (
        (3, alice, "a1", "Z"),
        (3, alice, "A2", "X"),
        (3, bob, "b3", "Z"),
        (3, bob, "B2", "X"),
    ):
        state = _measure(t, state, step, party, qubit, basis, rng)

    _announce(t, 3, alice, bob, 1, (("a1", "Z"), ("A2", "X")))
    _announce(t, 3, bob, alice, 1, (("b3", "Z"), ("B2", "X")))

    pre_step4 = state  # kept for the counterfactual average under withholding
    for step, party, qubit in ((4, alice, "A1"), (4, bob, "B1")):
        state = _measure(t, state, step, party, qubit, "X", rng)

    if cooperation != "alice_withholds_A1":
        _announce(t, 4, alice, bob, 2, (("A1", "X"),))
    if cooperation != "bob_withholds_B1":
        _announce(t, 4, bob, alice, 2, (("B1", "X"),))

    bob_ops = table[_correction_key(bob)][0]
    state = apply_ops(state, BOB_PAYLOAD_LABELS, bob_ops)
    t.add(Event(4, BOB, "correct", BOB_PAYLOAD_LABELS, outcome=bob_ops))
    alice_ops = table[_correction_key(alice)][1]
    state = apply_ops(state, ALICE_PAYLOAD_LABELS, alice_ops)
    t.add(Event(4, ALICE, "correct", ALICE_PAYLOAD_LABELS, outcome=alice_ops))

    fid_a2b = fidelity_pure(
        reduced_density(state, BOB_PAYLOAD_LABELS), alice_input.register(BOB_PAYLOAD_LABELS)
    )
    fid_b2a = fidelity_pure(
        reduced_density(state, ALICE_PAYLOAD_LABELS), bob_input.register(ALICE_PAYLOAD_LABELS)
    )
    t.add(Event(4, BOB, "fidelity", BOB_PAYLOAD_LABELS, outcome=fid_a2b))
    t.add(Event(4, ALICE, "fidelity", ALICE_PAYLOAD_LABELS, outcome=fid_b2a))

    expected = None
    if cooperation != "full":
        expected = _expected_deprived_fidelity(
            pre_step4, alice, bob, cooperation, table
        )

    outcomes = {**alice.outcomes, **bob.outcomes}
    return SessionResult(
        transcript=t,
        fidelity_alice_to_bob=fid_a2b,
        fidelity_bob_to_alice=fid_b2a,
        expected_fidelity=expected,
        leaf=leaf_index(
            outcomes["a1"],
            outcomes["A2"],
            outcomes["b3"],
            outcomes["B2"],
            outcomes["A1"],
            outcomes["B1"],
        ),
        outcomes=outcomes,
        seed=seed,
        cooperation=cooperation,
    )


def _gate(t: Transcript, state: Register, step: int, actor: str, qubits: tuple) -> Register:
    t.add(Event(step, actor, "gate", qubits, outcome="CNOT"))
    return apply_cnot(state, *qubits)


def _measure(
    t: Transcript,
    state: Register,
    step: int,
    party: Party,
    qubit: str,
    basis: str,
    rng: np.random.Generator,
) -> Register:
    res = measure(state, qubit, basis, rng=rng)
    party.outcomes[qubit] = res.outcome
    t.add(
        Event(
            step,
            party.name,
            "measure",
            (qubit,),
            basis=basis,
            outcome=res.outcome,
            probability=res.probability,
        )
    )
    return res.register


def _announce(
    t: Transcript,
    step: int,
    sender: Party,
    receiver: Party,
    round_no: int,
    items: Iterable[tuple[str, str]],
) -> None:
    payload = tuple((q, basis, sender.outcomes[q]) for q, basis in items)
    receiver.received.append(Message(sender.name, round_no, payload))
    t.add(
        Event(
            step,
            sender.name,
            "message",
            tuple(q for q, _ in items),
            outcome=[[q, basis, outcome] for q, basis, outcome in payload],
            message_round=round_no,
        )
    )


def _expected_deprived_fidelity(
    pre_step4: Register,
    alice: Party,
    bob: Party,
    cooperation: str,
    table: Table,
) -> float:
    """Average the deprived receiver's corrected state over the withheld bit."""
    if cooperation == "alice_withholds_A1":
        receiver, labels, slot, target = bob, BOB_PAYLOAD_LABELS, 0, alice.input
        known = ("B1", receiver.outcomes["B1"])
    else:
        receiver, labels, slot, target = alice, ALICE_PAYLOAD_LABELS, 1, bob.input
        known = ("A1", receiver.outcomes["A1"])
    ops = table[_correction_key(receiver)][slot]
    mixed = np.zeros((4, 4), dtype=complex)
    total = 0.0
    for hidden in ("+", "-"):
        forced = (hidden, known[1]) if known[0] == "B1" else (known[1], hidden)
        s4 = step4_measure(pre_step4, force=forced)
        fixed = apply_ops(s4.payload, labels, ops)
        mixed += s4.probability * reduced_density(fixed, labels).mat
        total += s4.probability
    target_vec = target.register(labels).amps
    return float(np.real(np.vdot(target_vec, (mixed / total) @ target_vec)))


def _other(name: str) -> str:
    return BOB if name == ALICE else ALICE


def ownership_check(transcript: Transcript, table: Table | None = None) -> bool:
    """Audit locality and classical information flow of a transcript.

    Returns False if any party touches a qubit it does not own, announces a
    result for a foreign qubit, sends messages out of round order, corrects
    before the required round-one announcements arrive, or applies a
    correction that differs from the one its own outcomes plus received
    announcements determine (withheld second-round announcements default to
    "+").  Physics is not re-simulated; the audit is purely structural.
    """
    if table is None:
        table = load_table()
    own_outcomes: dict[str, dict[str, int | str]] = {ALICE: {}, BOB: {}}
    heard: dict[str, dict[str, int | str]] = {ALICE: {}, BOB: {}}
    last_round = {ALICE: 0, BOB: 0}
    for event in transcript.events:
        actor = event.actor
        if actor not in (ALICE, BOB):
            if event.kind in ("gate", "measure", "message", "correct"):
                return False  # only parties act; "channel" may only prepare
            continue
        qubits = set(event.qubits)
        if event.kind in ("prepare", "gate", "measure", "correct") and not qubits <= OWNED[actor]:
            return False
        if event.kind == "measure":
            own_outcomes[actor][event.qubits[0]] = event.outcome
        elif event.kind == "message":
            if event.message_round is None or event.message_round <= last_round[actor]:
                return False
            last_round[actor] = event.message_round
            if not qubits <= OWNED[actor]:
                return False
            for label, _basis, outcome in event.outcome:
                if label not in OWNED[actor] or own_outcomes[actor].get(label) != outcome:
                    return False
                heard[_other(actor)][label] = outcome
        elif event.kind == "correct":
            expected = _audit_correction(actor, own_outcomes[actor], heard[actor], table)
            if expected is None or event.outcome != expected:
                return False
    return True


def _audit_correction(
    actor: str,
    own: dict[str, int | str],
    heard: dict[str, int | str],
    table: Table,
) -> str | None:
    """Reconstruct the correction the actor could justify, or None."""
    try:
        if actor == BOB:
            key = (
                heard["a1"],
                heard["A2"],
                own["b3"],
                own["B2"],
                heard.get("A1", "+"),
                own["B1"],
            )
            return table[key][0]
        key = (
            own["a1"],
            own["A2"],
            heard["b3"],
            heard["B2"],
            own["A1"],
            heard.get("B1", "+"),
        )
        return table[key][1]
    except KeyError:
        return None
