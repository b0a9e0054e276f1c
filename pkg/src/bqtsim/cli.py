"""Command-line interface.

Four subcommands cover the library surface::

    bqtsim enumerate   force all 64 measurement leaves and report fidelities
    bqtsim run         play seeded two-party sessions and tally leaf counts
    bqtsim swap        print the entanglement-swapping table for one channel pair
    bqtsim verify      execute the full self-verification battery

Input payloads are given either as amplitude pairs (``--alpha re,im,re,im``)
or in angle form (``--angles theta,phi`` meaning ``cos(theta)|00> +
exp(i*phi)*sin(theta)|11>``).  Amplitude pairs whose norm strays from 1 by
more than 1e-9 are rejected; accepted pairs are normalized exactly.

Reports are JSON by default (``--format text`` for a human summary) and are
byte-identical for identical configuration and seed, except for the
``timestamp`` field, which is excluded from that guarantee.  ``--out``
writes the report to a file; a relative path is resolved against
``$BQTSIM_OUTPUT_DIR`` when that variable is set.  Exit status: 0 when all
checks pass, 1 when a check fails, 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .corrections import load_table
from .ghz import entanglement_swap
from .parties import run_session
from .protocol import EprInput, enumerate_branches
from .verify import DEFAULT_SEED, run_all

__all__ = ["main", "entry"]

OUTPUT_DIR_ENV = "BQTSIM_OUTPUT_DIR"

#: Pre-normalization slack allowed on amplitude input pairs.
INPUT_NORM_TOL = 1e-9

_COOPERATION_FLAGS = {
    "full": "full",
    "withhold-a1": "alice_withholds_A1",
    "withhold-b1": "bob_withholds_B1",
}

_DEFAULT_ALPHA = EprInput(0.6, 0.8)
_DEFAULT_BETA = EprInput(math.sqrt(0.5), math.sqrt(0.5))


class ConfigError(Exception):
    """Invalid flag values (exit status 2)."""


def _parse_floats(text: str, n: int, what: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != n:
        raise ConfigError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"{what}: {exc}") from None


def _parse_amplitudes(text: str, what: str) -> EprInput:
    re0, im0, re1, im1 = _parse_floats(text, 4, what)
    c0, c1 = complex(re0, im0), complex(re1, im1)
    norm = math.hypot(abs(c0), abs(c1))
    if abs(norm - 1.0) > INPUT_NORM_TOL:
        raise ConfigError(
            f"{what}: |({c0}, {c1})| = {norm!r} deviates from 1 by more than "
            f"{INPUT_NORM_TOL} (angle form --angles is always normalized)"
        )
    return EprInput.normalized(c0, c1)


def _from_angles(theta: float, phi: float) -> EprInput:
    return EprInput(math.cos(theta), complex(math.cos(phi), math.sin(phi)) * math.sin(theta))


def _resolve_inputs(args: argparse.Namespace) -> tuple[EprInput, EprInput]:
    if getattr(args, "angles", None) is not None:
        if args.alpha is not None or args.beta is not None:
            raise ConfigError("--angles cannot be combined with --alpha/--beta")
        values = _parse_floats(args.angles, 4, "--angles") if args.angles.count(",") == 3 \
            else _parse_floats(args.angles, 2, "--angles") * 2
        return _from_angles(values[0], values[1]), _from_angles(values[2], values[3])
    alpha = _parse_amplitudes(args.alpha, "--alpha") if args.alpha else _DEFAULT_ALPHA
    beta = _parse_amplitudes(args.beta, "--beta") if args.beta else _DEFAULT_BETA
    return alpha, beta


def _seed(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    if not 0 <= seed < 2**64:
        raise ConfigError(f"--seed must be in [0, 2**64), got {seed}")
    return seed


def _pair(c: complex) -> list[float]:
    return [float(c.real), float(c.imag)]


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _emit(args: argparse.Namespace, report: dict, text: str) -> None:
    if args.format == "json":
        rendered = json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n"
    else:
        rendered = text
    out = getattr(args, "out", None)
    if out is None:
        sys.stdout.write(rendered)
        return
    path = Path(out)
    if not path.is_absolute():
        base = os.environ.get(OUTPUT_DIR_ENV)
        if base:
            path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(rendered)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_enumerate(args: argparse.Namespace) -> int:
    alpha, beta = _resolve_inputs(args)
    leaves = enumerate_branches(alpha, beta)
    threshold = 1.0 - 1e-10
    rows = [
        {
            "leaf": leaf.index,
            "a1": leaf.a1,
            "A2": leaf.A2,
            "b3": leaf.b3,
            "B2": leaf.B2,
            "A1": leaf.A1,
            "B1": leaf.B1,
            "probability": leaf.probability,
            "bob_ops": leaf.bob_ops,
            "alice_ops": leaf.alice_ops,
            "fidelity_alice_to_bob": leaf.fidelity_alice_to_bob,
            "fidelity_bob_to_alice": leaf.fidelity_bob_to_alice,
        }
        for leaf in leaves
    ]
    total = sum(leaf.probability for leaf in leaves)
    ok = (
        len(leaves) == 64
        and abs(total - 1.0) <= 1e-12
        and all(
            r["fidelity_alice_to_bob"] >= threshold
            and r["fidelity_bob_to_alice"] >= threshold
            for r in rows
        )
    )
    report = {
        "schema": "bqtsim.leaf-report/1",
        "timestamp": _timestamp(),
        "config": {"alpha": [_pair(alpha.c0), _pair(alpha.c1)],
                   "beta": [_pair(beta.c0), _pair(beta.c1)]},
        "leaves": rows,
        "total_probability": total,
        "pass": ok,
    }
    lines = [
        "leaf  a1 A2 b3 B2 A1 B1  prob      bob_ops alice_ops  fid(a->b)      fid(b->a)",
    ]
    for r in rows:
        lines.append(
            f"{r['leaf']:>4}  {r['a1']}  {r['A2']}  {r['b3']}  {r['B2']}  "
            f"{r['A1']}  {r['B1']}  {r['probability']:.6f}  {r['bob_ops']:<7}"
            f" {r['alice_ops']:<9} {r['fidelity_alice_to_bob']:.12f} "
            f"{r['fidelity_bob_to_alice']:.12f}"
        )
    lines.append(f"total probability {total:.12f}  ->  {'PASS' if ok else 'FAIL'}")
    _emit(args, report, "\n".join(lines) + "\n")
    return 0 if ok else 1


def _cmd_run(args: argparse.Namespace) -> int:
    alpha, beta = _resolve_inputs(args)
    seed = _seed(args)
    if args.trials < 1:
        raise ConfigError("--trials must be at least 1")
    cooperation = _COOPERATION_FLAGS[args.cooperation]
    table = load_table()
    threshold = 1.0 - 1e-10
    trials = []
    transcripts = []
    counts = np.zeros(64, dtype=int)
    ok = True
    for i in range(args.trials):
        result = run_session(alpha, beta, seed=(seed + i) % 2**64,
                             cooperation=cooperation, table=table)
        counts[result.leaf] += 1
        # only the cooperative directions are gated on perfect fidelity
        if cooperation != "alice_withholds_A1":
            ok = ok and result.fidelity_alice_to_bob >= threshold
        if cooperation != "bob_withholds_B1":
            ok = ok and result.fidelity_bob_to_alice >= threshold
        trials.append(
            {
                "trial": i,
                "seed": result.seed,
                "leaf": result.leaf,
                "outcomes": result.outcomes,
                "fidelity_alice_to_bob": result.fidelity_alice_to_bob,
                "fidelity_bob_to_alice": result.fidelity_bob_to_alice,
                "expected_fidelity": result.expected_fidelity,
            }
        )
        if args.transcripts:
            transcripts.append(result.transcript.to_json_obj())
    p = 1.0 / 64.0
    sigma = math.sqrt(p * (1 - p) / args.trials)
    freqs = counts / args.trials
    max_z = float(np.max(np.abs(freqs - p)) / sigma)
    expected_count = args.trials * p
    chi_square = float(np.sum((counts - expected_count) ** 2 / expected_count))
    report = {
        "schema": "bqtsim.session-report/1",
        "timestamp": _timestamp(),
        "config": {
            "alpha": [_pair(alpha.c0), _pair(alpha.c1)],
            "beta": [_pair(beta.c0), _pair(beta.c1)],
            "seed": seed,
            "trials": args.trials,
            "cooperation": cooperation,
        },
        "trials": trials,
        "histogram": {
            "counts": [int(c) for c in counts],
            "expected_count": expected_count,
            "max_abs_z": max_z,
            "within_4_sigma": max_z <= 4.0,
            "chi_square": chi_square,
            "degrees_of_freedom": 63,
        },
        "pass": ok,
    }
    if args.transcripts:
        report["transcripts"] = transcripts
    lines = [f"{args.trials} session(s), seed base {seed}, cooperation {cooperation}"]
    for t in trials[: min(len(trials), 20)]:
        exp = "-" if t["expected_fidelity"] is None else f"{t['expected_fidelity']:.6f}"
        lines.append(
            f"  trial {t['trial']:>4}  leaf {t['leaf']:>2}  "
            f"fid(a->b) {t['fidelity_alice_to_bob']:.12f}  "
            f"fid(b->a) {t['fidelity_bob_to_alice']:.12f}  expected {exp}"
        )
    if len(trials) > 20:
        lines.append(f"  ... {len(trials) - 20} more trials elided ...")
    lines.append(
        f"leaf histogram: max |z| = {max_z:.3f}, within 4 sigma: "
        f"{'yes' if max_z <= 4.0 else 'no'} (informational), "
        f"chi-square {chi_square:.1f} on 63 dof"
    )
    lines.append("PASS" if ok else "FAIL")
    _emit(args, report, "\n".join(lines) + "\n")
    return 0 if ok else 1


def _cmd_swap(args: argparse.Namespace) -> int:
    outcomes = entanglement_swap(args.i, args.j)
    total = sum(o.probability for o in outcomes)
    ok = (
        len(outcomes) == 4
        and abs(total - 1.0) <= 1e-12
        and all(o.matched is not None for o in outcomes)
    )
    report = {
        "schema": "bqtsim.swap-report/1",
        "timestamp": _timestamp(),
        "config": {"i": args.i, "j": args.j},
        "outcomes": [
            {"outcome": o.outcome, "probability": o.probability, "matched": o.matched}
            for o in outcomes
        ],
        "total_probability": total,
        "pass": ok,
    }
    lines = [f"channel ({args.i}, {args.j})"]
    for o in outcomes:
        lines.append(
            f"  outcome {o.outcome} -> remainder index {o.matched}  p = {o.probability:.12f}"
        )
    lines.append(f"total probability {total:.12f}  ->  {'PASS' if ok else 'FAIL'}")
    _emit(args, report, "\n".join(lines) + "\n")
    return 0 if ok else 1


def _cmd_verify(args: argparse.Namespace) -> int:
    seed = _seed(args)
    table = None
    if args.correction_table is not None:
        try:
            table = load_table(args.correction_table)
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"--correction-table: {exc}") from None
    results = run_all(seed=seed, table=table)
    ok = all(r.passed for r in results)
    report = {
        "schema": "bqtsim.verify-report/1",
        "timestamp": _timestamp(),
        "config": {"seed": seed, "correction_table": args.correction_table},
        "criteria": [
            {
                "name": r.name,
                "passed": r.passed,
                "elapsed_seconds": r.elapsed,
                "detail": r.detail,
            }
            for r in results
        ],
        "pass": ok,
    }
    lines = [r.line() for r in results]
    lines.append(f"{'PASS' if ok else 'FAIL'}  ({sum(r.passed for r in results)}/{len(results)} criteria)")
    _emit(args, report, "\n".join(lines) + "\n")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_input_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--alpha", metavar="RE,IM,RE,IM",
                     help="Alice's payload amplitudes (default 0.6,0,0.8,0)")
    sub.add_argument("--beta", metavar="RE,IM,RE,IM",
                     help="Bob's payload amplitudes (default balanced)")
    sub.add_argument("--angles", metavar="THETA,PHI[,THETA,PHI]",
                     help="angle-form inputs; one pair sets both payloads")


def _add_output_flags(sub: argparse.ArgumentParser, default_format: str = "json") -> None:
    sub.add_argument("--out", metavar="PATH",
                     help=f"write the report here (relative paths resolve against ${OUTPUT_DIR_ENV})")
    sub.add_argument("--format", choices=("json", "text"), default=default_format,
                     help=f"report format (default {default_format})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bqtsim",
        description="Bidirectional EPR-payload teleportation over two GHZ triples.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    enum = sub.add_parser("enumerate", help="force all 64 leaves and check fidelities")
    _add_input_flags(enum)
    _add_output_flags(enum)
    enum.set_defaults(func=_cmd_enumerate)

    run = sub.add_parser("run", help="play seeded sessions")
    _add_input_flags(run)
    _add_output_flags(run)
    run.add_argument("--seed", type=lambda s: int(s, 0), default=None,
                     help=f"base seed (default {hex(DEFAULT_SEED)}); trial i uses seed+i")
    run.add_argument("--trials", type=int, default=1, help="number of sessions (default 1)")
    run.add_argument("--cooperation", choices=sorted(_COOPERATION_FLAGS), default="full",
                     help="withhold one second-round announcement")
    run.add_argument("--transcripts", action="store_true",
                     help="embed full transcripts in the JSON report")
    run.set_defaults(func=_cmd_run)

    swap = sub.add_parser("swap", help="entanglement-swapping table for one channel pair")
    swap.add_argument("i", type=int, choices=range(8), help="first triple's basis index")
    swap.add_argument("j", type=int, choices=range(8), help="second triple's basis index")
    _add_output_flags(swap)
    swap.set_defaults(func=_cmd_swap)

    verify = sub.add_parser("verify", help="run the self-verification battery")
    verify.add_argument("--seed", type=lambda s: int(s, 0), default=None,
                        help=f"battery seed (default {hex(DEFAULT_SEED)})")
    verify.add_argument("--correction-table", metavar="PATH", default=None,
                        help="verify against a correction table loaded from PATH")
    _add_output_flags(verify, default_format="text")
    verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:  # console-script shim
    sys.exit(main())


if __name__ == "__main__":
    entry()
