"""Command-line scenario runner.

Every scenario in the harness is reachable by name; a run is fully
determined by the flags plus the seed, and protocol rejections are data
(exit status 0), not failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .adversary import SCENARIOS, Scenario, run_scenario
from .errors import AqsigError
from .keyring import KEY_MODES, PAPER_LITERAL
from .reporting import emit_report

SEED_ENV = "AQSIG_SEED"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="aqsig",
        description="Run arbitrated-quantum-signature protocol and attack scenarios.")
    p.add_argument("--scheme", choices=["a", "b"], default="b",
                   help="signature scheme to run (default: b)")
    p.add_argument("--n", type=int, default=8, help="message qubits (default: 8)")
    p.add_argument("--copies", type=int, default=3,
                   help="swap-test repetitions per comparison (default: 3)")
    p.add_argument("--trials", type=int, default=1,
                   help="independent trials (default: 1)")
    p.add_argument("--seed", type=int, default=None,
                   help=f"run seed; falls back to ${SEED_ENV}, else generated and echoed")
    p.add_argument("--scenario", default="honest", metavar="NAME",
                   help="one of: " + ", ".join(SCENARIOS))
    p.add_argument("--secrecy", action="store_true",
                   help="scheme B only: publish the nonce masked so the "
                        "arbitrator never learns the message")
    p.add_argument("--key-mode", choices=list(KEY_MODES), default=PAPER_LITERAL,
                   help="key segmentation mode (default: paper-literal)")
    p.add_argument("--format", choices=["lines", "text"], default="lines",
                   dest="fmt", help="report format (default: lines)")
    p.add_argument("--out", default=None, help="report path (default: stdout)")
    p.add_argument("--dump-keys", default=None, metavar="PATH",
                   help="write the sample run's key material and ledgers")
    p.add_argument("--dump-transcript", default=None, metavar="PATH",
                   help="write the sample run's transcript, one event per line")
    return p


def parse_config(argv=None) -> tuple[Scenario, argparse.Namespace, str]:
    parser = build_parser()
    args = parser.parse_args(argv)
    seed_source = "flag"
    seed = args.seed
    if seed is None:
        env = os.environ.get(SEED_ENV)
        if env is not None:
            try:
                seed = int(env)
            except ValueError:
                parser.error(f"${SEED_ENV}={env!r} is not an integer")
            seed_source = "env"
        else:
            seed = int.from_bytes(os.urandom(4), "big")
            seed_source = "generated"
    scenario = Scenario(
        name=args.scenario,
        scheme=args.scheme.upper(),
        n=args.n,
        copies=args.copies,
        trials=args.trials,
        seed=seed,
        secrecy=args.secrecy,
        key_mode=args.key_mode,
    )
    try:
        scenario.validate()
    except AqsigError as exc:
        parser.error(str(exc))
    return scenario, args, seed_source


def _write_dumps(report, args) -> None:
    if args.dump_keys:
        with open(args.dump_keys, "w", newline="\n") as fh:
            for record in report.key_sample:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
    if args.dump_transcript:
        with open(args.dump_transcript, "w", newline="\n") as fh:
            for record in report.transcript_sample:
                fh.write(json.dumps(record) + "\n")


def main(argv=None) -> int:
    scenario, args, seed_source = parse_config(argv)
    try:
        report = run_scenario(scenario)
        records = report.to_records()
        records[-1]["seed_source"] = seed_source
        if args.out:
            with open(args.out, "w", newline="\n") as fh:
                emit_report(records, args.fmt, fh)
        else:
            emit_report(records, args.fmt, sys.stdout)
        _write_dumps(report, args)
    except AqsigError as exc:
        print(f"aqsig: error: {exc}", file=sys.stderr)
        return 1
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
