"""Command-line interface: kbcheck, diagnose, consult, rulegen, cluster,
estimate, serve.

Exit codes: 0 success, 1 domain error (reported on stderr with an
"error:" prefix), 2 usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from .clustering import cluster_faults, cluster_symptoms
from .covering import covers_for_mode
from .errors import CoverdxError
from .estimation import estimate_weights, read_cases_csv
from .kb import Finding, check_document, load_kb_path, serialize_kb
from .rules import rule_generation_report, rules_to_json
from .scoring import rank_hypotheses
from .session import (
    SessionConfig,
    Status,
    start_session,
    submit_answer,
    summary,
)

MODE_ALIASES = {"single": "single-fault", "multiple": "multiple-fault"}


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


def run_command(argv, stdin=None, stdout=None, stderr=None) -> int:
    """Dispatch a CLI invocation; streams are injectable for testing."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr

    parser = _build_parser()
    with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
        try:
            args = parser.parse_args(argv)
        except SystemExit as exit_:  # argparse handles usage/help itself
            return int(exit_.code or 0)

    try:
        return args.handler(args, stdin, stdout, stderr)
    except (CoverdxError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coverdx", description=__doc__)
    parser.add_argument("--version", action="version", version=f"coverdx {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kbcheck", help="validate a knowledge-base document")
    p.add_argument("kb", help="path to the KB JSON document")
    p.add_argument("--lenient", action="store_true", help="warn on unknown keys instead of rejecting")
    p.set_defaults(handler=_cmd_kbcheck)

    p = sub.add_parser("diagnose", help="rank explanations for a batch of findings")
    _add_kb_flag(p)
    p.add_argument("--present", default="", help="comma-separated present symptom ids")
    p.add_argument("--absent", default="", help="comma-separated absent symptom ids")
    _add_session_flags(p)
    _add_format_flag(p)
    p.set_defaults(handler=_cmd_diagnose)

    p = sub.add_parser("consult", help="interactive question/answer session")
    _add_kb_flag(p)
    _add_session_flags(p)
    p.add_argument("--budget", type=int, default=50, help="maximum number of questions")
    p.add_argument("--costs", action="store_true", help="weigh questions by observation cost")
    p.set_defaults(handler=_cmd_consult)

    p = sub.add_parser("rulegen", help="compile symptoms => fault rules")
    _add_kb_flag(p)
    p.add_argument("--max-antecedent", type=int, default=3)
    _add_format_flag(p, default="json")
    p.set_defaults(handler=_cmd_rulegen)

    p = sub.add_parser("cluster", help="cluster faults or symptoms by profile similarity")
    _add_kb_flag(p)
    p.add_argument("--items", choices=["faults", "symptoms"], default="faults")
    p.add_argument("--format", choices=["newick", "json"], default="newick")
    p.set_defaults(handler=_cmd_cluster)

    p = sub.add_parser("estimate", help="re-estimate link weights from a case file")
    _add_kb_flag(p)
    p.add_argument("--cases", required=True, help="CSV case file")
    p.add_argument("--out", help="write the updated KB here instead of stdout")
    p.set_defaults(handler=_cmd_estimate)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--kb-dir", default="kb", help="directory of KB documents (COVERDX_KB_DIR overrides)")
    p.add_argument("--session-store", default="sessions", help="directory for session transcripts")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8756)
    p.add_argument("--max-sessions", type=int, default=256)
    p.set_defaults(handler=_cmd_serve)

    return parser


def _add_kb_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kb", required=True, help="path to the KB JSON document")


def _add_session_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["single", "multiple"], default="single")
    p.add_argument("--threshold", type=float, default=0.95, help="conclusion threshold")
    p.add_argument("--max-cover", type=int, default=4, help="largest fault set considered")


def _add_format_flag(p: argparse.ArgumentParser, default: str = "text") -> None:
    p.add_argument("--format", choices=["text", "json"], default=default)


def _split_ids(raw: str) -> list[str]:
    return [x.strip() for x in raw.split(",") if x.strip()]


def _fault_set_text(faults) -> str:
    return "{" + ", ".join(sorted(faults)) + "}"


# -- handlers --------------------------------------------------------------


def _cmd_kbcheck(args, stdin, stdout, stderr) -> int:
    data = Path(args.kb).read_bytes()
    _, violations = check_document(data, strict=not args.lenient)
    for v in violations:
        print(str(v), file=stdout)
    errors = sum(1 for v in violations if v.severity == "error")
    warnings = len(violations) - errors
    print(f"{errors} errors, {warnings} warnings", file=stdout)
    return 0 if errors == 0 else 1


def _cmd_diagnose(args, stdin, stdout, stderr) -> int:
    kb = load_kb_path(args.kb)
    obs: dict[str, Finding] = {s: Finding.PRESENT for s in _split_ids(args.present)}
    obs.update({s: Finding.ABSENT for s in _split_ids(args.absent)})
    mode = MODE_ALIASES[args.mode]
    present_ids = _split_ids(args.present)
    candidates = covers_for_mode(kb, present_ids, mode, args.max_cover)
    ranked = rank_hypotheses(kb, candidates or [frozenset()], obs)
    concluded = bool(present_ids) and ranked[0].posterior >= args.threshold and ranked[0].covers_all

    if args.format == "json":
        print(
            json.dumps(
                {
                    "present": sorted(_split_ids(args.present)),
                    "absent": sorted(_split_ids(args.absent)),
                    "explanations": [h.to_dict() for h in ranked],
                    "concluded": concluded,
                },
                indent=2,
            ),
            file=stdout,
        )
        return 0

    print(f"ranked explanations ({mode}, {len(ranked)} candidates):", file=stdout)
    for i, h in enumerate(ranked, 1):
        covers = "covers all" if h.covers_all else "partial"
        print(
            f"{i:3d}. {_fault_set_text(h.faults)}  posterior={h.posterior:.6f}  {covers}",
            file=stdout,
        )
    if concluded:
        print(f"conclusion: {_fault_set_text(ranked[0].faults)}", file=stdout)
    return 0


def _cmd_consult(args, stdin, stdout, stderr) -> int:
    kb = load_kb_path(args.kb)
    config = SessionConfig(
        mode=MODE_ALIASES[args.mode],
        max_cover_size=args.max_cover,
        conclusion_threshold=args.threshold,
        question_budget=args.budget,
        costs_enabled=args.costs,
    )
    state = start_session(kb, config)
    print(f"consulting {args.kb} ({config.mode}, threshold {config.conclusion_threshold})", file=stdout)

    while state.status == Status.IN_PROGRESS and state.next is not None:
        _print_leaders(state, stdout)
        node = kb.symptom(state.next)
        print(f"[{node.id}] {node.question} (p)resent / (a)bsent / (u)nknown / (q)uit:", file=stdout)
        line = stdin.readline()
        if not line:
            break
        answer = line.strip().lower()
        if answer in ("q", "quit"):
            break
        finding = {"p": "present", "a": "absent", "u": "unknown"}.get(answer, answer)
        try:
            state = submit_answer(state, node.id, finding)
        except ValueError as exc:
            print(f"error: {exc}", file=stderr)

    _print_summary(state, stdout)
    return 0


def _print_leaders(state, stdout) -> None:
    print("hypotheses:", file=stdout)
    for h in state.candidates[:5]:
        bar = "#" * round(20 * h.posterior)
        label = _fault_set_text(h.faults) if h.faults else "no fault"
        print(f"  {h.posterior:6.3f} |{bar:<20}| {label}", file=stdout)


def _print_summary(state, stdout) -> None:
    report = summary(state)
    print(f"status: {report.status.value} ({report.reason.value})", file=stdout)
    top = report.explanations[0]
    label = _fault_set_text(top.faults) if top.faults else "no fault"
    print(f"best explanation: {label} (posterior {top.posterior:.4f})", file=stdout)
    if report.uncovered:
        print(f"uncovered symptoms: {', '.join(report.uncovered)}", file=stdout)
    print(f"questions asked: {len(report.transcript)}", file=stdout)
    print(f"note: {report.note}", file=stdout)


def _cmd_rulegen(args, stdin, stdout, stderr) -> int:
    kb = load_kb_path(args.kb)
    report = rule_generation_report(kb, args.max_antecedent)
    if args.format == "json":
        stdout.write(rules_to_json(list(report.rules)))
    else:
        for rule in report.rules:
            print(f"{rule}  confidence={rule.confidence:.4f}", file=stdout)
        print(f"{len(report.rules)} rules", file=stdout)
    for fault in report.undiscriminated:
        print(f"warning: no discriminating symptom set for {fault}", file=stderr)
    return 0


def _cmd_cluster(args, stdin, stdout, stderr) -> int:
    kb = load_kb_path(args.kb)
    dendro = cluster_faults(kb) if args.items == "faults" else cluster_symptoms(kb)
    if args.format == "newick":
        print(dendro.to_newick(), file=stdout)
    else:
        doc = {
            "items": args.items,
            "leaves": list(dendro.leaves),
            "merges": [
                {"left": list(l), "right": list(r), "height": h} for l, r, h in dendro.merges
            ],
        }
        print(json.dumps(doc, indent=2), file=stdout)
    return 0


def _cmd_estimate(args, stdin, stdout, stderr) -> int:
    kb = load_kb_path(args.kb)
    with open(args.cases, newline="") as fh:
        cases = read_cases_csv(fh, kb)
    new_kb, report = estimate_weights(cases, kb)

    report_lines = [
        f"cases: {report.total_cases} total, {report.isolated_cases} isolated, "
        f"{report.multi_fault_skipped} multi-fault skipped",
    ]
    report_lines += [
        f"no isolated support for link {f}->{s} (left at smoothing midpoint)"
        for f, s in report.no_support
    ]

    if args.out:
        Path(args.out).write_text(serialize_kb(new_kb))
        print(f"wrote updated KB to {args.out}", file=stdout)
        for line in report_lines:
            print(line, file=stdout)
    else:
        stdout.write(serialize_kb(new_kb))
        for line in report_lines:
            print(line, file=stderr)
    return 0


def _cmd_serve(args, stdin, stdout, stderr) -> int:
    from .service import ServiceConfig, serve

    kb_dir = os.environ.get("COVERDX_KB_DIR") or args.kb_dir
    config = ServiceConfig(
        kb_dir=Path(kb_dir),
        session_store=Path(args.session_store),
        host=args.host,
        port=args.port,
        max_sessions=args.max_sessions,
    )
    print(f"serving KBs from {config.kb_dir} on {config.host}:{config.port}", file=stdout)
    serve(config)
    return 0


if __name__ == "__main__":
    main()
