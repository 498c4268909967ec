"""Command-line front end.

Exit status: 0 success, 1 a verification or adjudication found a problem,
2 usage or input error.  Reports go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .arbitrator import MissingPrerequisiteTxs, OutOfBandCopyFound, adjudicate
from .encoding import MalformedInput
from .ledger import Ledger, LedgerError
from .payloads import Violation
from .scenario import ScenarioError, parse_scenario, run
from .sla_oracle import DEFAULT_SLA, SlaSchemaError, SlaSpec, evaluate_window

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_FOUND, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_ledger(path: str) -> Ledger:
    try:
        return Ledger.deserialize(_read_bytes(path))
    except MalformedInput as exc:
        raise InputError(f"malformed ledger {path}: {exc}") from None


def _load_sla(path: str | None) -> SlaSpec:
    if path is None:
        return DEFAULT_SLA
    try:
        return SlaSpec.loads(_read_bytes(path).decode("utf-8"))
    except (SlaSchemaError, UnicodeDecodeError) as exc:
        raise InputError(f"bad SLA spec {path}: {exc}") from None


def load_evidence(path: str) -> OutOfBandCopyFound:
    """Evidence file: TOML with ``file_id``, ``ciphertext_hex`` and optional ``provenance``."""
    try:
        doc = tomllib.loads(_read_bytes(path).decode("utf-8"))
        unknown = set(doc) - {"file_id", "ciphertext_hex", "provenance"}
        if unknown:
            raise ValueError(f"unknown key(s) {', '.join(sorted(unknown))}")
        return OutOfBandCopyFound(str(doc["file_id"]), bytes.fromhex(doc["ciphertext_hex"]),
                                  str(doc.get("provenance", "")))
    except (tomllib.TOMLDecodeError, KeyError, ValueError, TypeError) as exc:
        raise InputError(f"bad evidence file {path}: {exc}") from None


def dump_evidence(evidence: OutOfBandCopyFound) -> str:
    return (f'file_id = "{evidence.file_id}"\n'
            f'ciphertext_hex = "{evidence.ciphertext.hex()}"\n'
            f'provenance = "{evidence.provenance}"\n')


def _write(path: str, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def cmd_run(args: argparse.Namespace) -> int:
    try:
        script = parse_scenario(_read_bytes(args.scenario))
    except ScenarioError as exc:
        raise InputError(f"{args.scenario}: {exc}") from None
    trace = run(script, seed=args.seed)
    _write(args.ledger_out, trace.ledger.serialize())
    _write(args.trace_out, trace.to_json().encode())
    for rec in trace.steps:
        status = rec.error or (rec.verdict.violation.name if rec.verdict else "ok")
        print(f"{rec.index}\t{rec.op}\t{len(rec.tx_ids)} tx\t{status}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    result = _load_ledger(args.ledger).verify_chain()
    print(result)
    return EXIT_OK if result.ok else EXIT_FOUND


def _verified(path: str) -> Ledger:
    ledger = _load_ledger(path)
    result = ledger.verify_chain()
    if not result.ok:
        raise InputError(f"refusing to use an unverifiable ledger: {result}")
    return ledger


def cmd_adjudicate(args: argparse.Namespace) -> int:
    ledger = _verified(args.ledger)
    sla = _load_sla(args.sla)
    evidence = None
    if args.kind == "retention":
        if args.evidence is None:
            raise InputError("--kind retention needs --evidence")
        evidence = load_evidence(args.evidence)
        if evidence.file_id != args.file_id:
            raise InputError(f"evidence concerns {evidence.file_id!r}, not {args.file_id!r}")
    try:
        verdict = adjudicate(ledger, args.kind, args.file_id, sla, evidence)
    except MissingPrerequisiteTxs as exc:
        raise InputError(str(exc)) from None
    print(verdict.report_line())
    return EXIT_OK if verdict.violation is Violation.NoViolation else EXIT_FOUND


def cmd_sla_eval(args: argparse.Namespace) -> int:
    ledger = _verified(args.ledger)
    sla = _load_sla(args.sla)
    try:
        result = evaluate_window(ledger, sla, args.window)
    except LedgerError as exc:
        raise InputError(str(exc)) from None
    sys.stdout.write(result.report())
    if args.figures:
        from . import plotting

        plotting.sla_window(result, sla, Path(args.figures) / "sla_window.png")
    return EXIT_OK if result.compliant else EXIT_FOUND


def cmd_tamper(args: argparse.Namespace) -> int:
    ledger = _load_ledger(args.ledger)
    try:
        tampered = ledger.tamper(args.block, args.tx, args.offset, args.byte)
    except (LedgerError, ValueError) as exc:
        raise InputError(str(exc)) from None
    _write(args.out, tampered.serialize())
    return EXIT_OK


REPORT_HEADER = "block\ttime\tsender\trecipient\tkind\tfile_id\tdigest"


def ledger_report(ledger: Ledger) -> str:
    lines = [REPORT_HEADER]
    for idx, tx in ledger.sealed():
        digest = getattr(tx.payload, "digest", None)
        lines.append("\t".join([
            str(idx), str(tx.logical_time), tx.sender.hex()[:8], tx.recipient.hex()[:8],
            tx.kind.name, tx.payload.file_id or "-", digest.hex()[:12] if digest else "-",
        ]))
    return "\n".join(lines) + "\n"


def cmd_report(args: argparse.Namespace) -> int:
    ledger = _load_ledger(args.ledger)
    try:
        text = ledger_report(ledger)
    except MalformedInput as exc:
        raise InputError(f"undecodable transaction: {exc}") from None
    sys.stdout.write(text)
    if args.figures:
        from . import plotting

        plotting.ledger_activity(ledger, Path(args.figures) / "ledger_activity.png")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cfdr", description="Cloud flight data recorder simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario script")
    p.add_argument("scenario")
    p.add_argument("--ledger-out", required=True)
    p.add_argument("--trace-out", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the script's seed")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="verify a ledger file")
    p.add_argument("ledger")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("adjudicate", help="adjudicate a dispute from a ledger file")
    p.add_argument("ledger")
    p.add_argument("--file-id", required=True)
    p.add_argument("--kind", required=True, choices=("missing", "altered", "retention"))
    p.add_argument("--evidence")
    p.add_argument("--sla", help="SLA spec providing the penalty (default base penalty 100)")
    p.set_defaults(func=cmd_adjudicate)

    p = sub.add_parser("sla-eval", help="evaluate a percentile SLA window")
    p.add_argument("ledger")
    p.add_argument("--sla", required=True)
    p.add_argument("--window", type=int, required=True, help="window start (logical time)")
    p.add_argument("--figures", help="directory for figure output")
    p.set_defaults(func=cmd_sla_eval)

    p = sub.add_parser("tamper", help="flip one byte of a sealed transaction (no rehash)")
    p.add_argument("ledger")
    p.add_argument("--block", type=int, required=True)
    p.add_argument("--tx", type=int, required=True)
    p.add_argument("--offset", type=int, required=True)
    p.add_argument("--byte", type=lambda s: int(s, 0), required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tamper)

    p = sub.add_parser("report", help="list ledger transactions")
    p.add_argument("ledger")
    p.add_argument("--figures", help="directory for figure output")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"cfdr: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
