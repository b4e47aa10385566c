"""Batch front-end: run engines, check domination witnesses, enumerate the
toy halting probability, and verify or replay recorded traces.

Exit codes: 0 all checks green, 1 a verification check failed or a replay
mismatched, 2 configuration error.  The output directory for run artifacts
is --out-dir, or the CELAB_OUT_DIR environment variable, or the current
directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import expansion, injury
from .config import ConfigError, build_stream, build_suite, load_config
from .omega import OmegaEnumeration
from .rationals import format_rational, parse_rational
from .solovay import (
    SolovayWitness,
    check_clause_a,
    check_clause_b_horizon,
    check_clause_c,
    speedup,
)
from .streams import Direction
from .trace import read_trace, write_trace, TraceFormatError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2


def _out_dir(args) -> Path:
    out = args.out_dir or os.environ.get("CELAB_OUT_DIR") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_reports(out: Path, name: str, report) -> None:
    (out / f"{name}.report.txt").write_text(report.render_text() + "\n")
    (out / f"{name}.report.json").write_text(
        json.dumps(report.to_dict(), indent=2) + "\n"
    )


def _stream_spec_arg(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"bad stream spec {text!r}: {e}") from None


def cmd_run_lemma2(args) -> int:
    rc = load_config(args.config)
    if rc.engine != "lemma2":
        raise ConfigError(f"config engine is {rc.engine!r}, expected 'lemma2'")
    alpha = build_stream(rc.alpha_spec, Direction.INCREASING, label="alpha")
    eta = build_stream(rc.eta_spec, Direction.INCREASING, label="eta")
    cfg = expansion.ExpansionConfig(
        alpha=alpha,
        eta=eta,
        suite=lambda view: build_suite(rc.suite_specs, view),
        stages=rc.stages,
    )
    engine = expansion.run_expansion(cfg)
    out = _out_dir(args)
    trace_path = out / "lemma2.trace.jsonl"
    write_trace(trace_path, {"engine": "lemma2", "stages": rc.stages},
                engine.events, engine.snapshot())
    report = expansion.verify_expansion(engine.events, engine.snapshot())
    _write_reports(out, "lemma2", report)
    print(report.render_text())
    print(f"trace: {trace_path}")
    return EXIT_OK if report.all_green else EXIT_CHECK_FAILED


def cmd_run_prop3(args) -> int:
    rc = load_config(args.config)
    if rc.engine != "prop3":
        raise ConfigError(f"config engine is {rc.engine!r}, expected 'prop3'")
    cfg = injury.InjuryConfig(
        suite=lambda view: build_suite(rc.suite_specs, view),
        stages=rc.stages,
    )
    engine = injury.run_injury(cfg)
    out = _out_dir(args)
    trace_path = out / "prop3.trace.jsonl"
    write_trace(trace_path, {"engine": "prop3", "stages": rc.stages},
                engine.events, engine.snapshot())
    report = injury.verify_injury(engine.events, engine.snapshot())
    _write_reports(out, "prop3", report)
    print(report.render_text())
    print(f"trace: {trace_path}")
    return EXIT_OK if report.all_green else EXIT_CHECK_FAILED


def cmd_solovay_check(args) -> int:
    alpha = build_stream(_stream_spec_arg(args.alpha), Direction.INCREASING, label="alpha")
    beta = build_stream(_stream_spec_arg(args.beta), Direction.INCREASING, label="beta")
    try:
        w = SolovayWitness(parse_rational(args.q), args.clause, alpha, beta)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    if args.clause == "a":
        verdict = check_clause_a(w, args.stages)
    elif args.clause == "c":
        verdict = check_clause_c(w, args.stages)
    else:
        horizon = args.horizon if args.horizon is not None else 2 * args.stages
        verdict = check_clause_b_horizon(w, args.stages, horizon)
        print("note: clause b is checked against a horizon proxy (diagnostic)")
    if verdict.holds:
        print(f"clause {args.clause} holds on prefix T={args.stages} at q={args.q}")
        return EXIT_OK
    print(f"clause {args.clause} fails at s={verdict.fails_at} (q={args.q})")
    return EXIT_CHECK_FAILED


def cmd_solovay_speedup(args) -> int:
    alpha = build_stream(_stream_spec_arg(args.alpha), Direction.INCREASING, label="alpha")
    beta = build_stream(_stream_spec_arg(args.beta), Direction.INCREASING, label="beta")
    try:
        gamma = speedup(alpha, beta, parse_rational(args.p))
    except ValueError as e:
        raise ConfigError(str(e)) from None
    for s in range(args.stages + 1):
        print(format_rational(gamma.value(s)))
    return EXIT_OK


def cmd_omega_enumerate(args) -> int:
    from .config import _load_machine  # shares bundled/file resolution

    machine = _load_machine({"machine": args.machine})
    enum = OmegaEnumeration(machine, args.length)
    for s in range(args.stages + 1):
        print(f"{s}\t{format_rational(enum.omega(s))}")
    return EXIT_OK


def _load_trace(path: str):
    try:
        return read_trace(path)
    except (OSError, TraceFormatError) as e:
        raise ConfigError(f"cannot read trace {path}: {e}") from None


def cmd_verify(args) -> int:
    header, events, final = _load_trace(args.trace)
    engine = header.get("engine")
    if engine == "lemma2":
        report = expansion.verify_expansion(events, final)
    elif engine == "prop3":
        report = injury.verify_injury(events, final)
    else:
        raise ConfigError(f"trace header names unknown engine {engine!r}")
    print(report.render_text())
    if report.all_green:
        return EXIT_OK
    print(f"first violated invariant: {report.first_failure()}")
    return EXIT_CHECK_FAILED


def cmd_replay(args) -> int:
    header, events, final = _load_trace(args.trace)
    engine = header.get("engine")
    if engine == "lemma2":
        rebuilt = expansion.replay_expansion(events)
    elif engine == "prop3":
        rebuilt = injury.replay_injury(events)
    else:
        raise ConfigError(f"trace header names unknown engine {engine!r}")
    recorded = {k: v for k, v in final.items() if k != "record"}
    if rebuilt == recorded:
        print("replay: final state reproduced bit-exactly")
        return EXIT_OK
    for key in sorted(set(rebuilt) | set(recorded)):
        if rebuilt.get(key) != recorded.get(key):
            print(f"replay mismatch at {key!r}:")
            print(f"  recorded: {recorded.get(key)}")
            print(f"  replayed: {rebuilt.get(key)}")
    return EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="celab",
        description="exact-arithmetic laboratory for c.e.-real approximation runs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run-lemma2", help="run the paced-growth engine from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_run_lemma2)

    p = sub.add_parser("run-prop3", help="run the finite-injury engine from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_run_prop3)

    p = sub.add_parser("solovay", help="domination witness checks and speed-up")
    ssub = p.add_subparsers(dest="solovay_command", required=True)
    pc = ssub.add_parser("check")
    pc.add_argument("--clause", choices=("a", "b", "c"), required=True)
    pc.add_argument("--q", required=True, help='rational "p/q"')
    pc.add_argument("--alpha", required=True, help="stream spec JSON")
    pc.add_argument("--beta", required=True, help="stream spec JSON")
    pc.add_argument("--stages", type=int, default=64)
    pc.add_argument("--horizon", type=int, default=None, help="clause b only")
    pc.set_defaults(func=cmd_solovay_check)
    ps = ssub.add_parser("speedup")
    ps.add_argument("--p", required=True, help='rational "p/q"')
    ps.add_argument("--alpha", required=True, help="stream spec JSON")
    ps.add_argument("--beta", required=True, help="stream spec JSON")
    ps.add_argument("--stages", type=int, default=64)
    ps.set_defaults(func=cmd_solovay_speedup)

    p = sub.add_parser("omega", help="toy halting-probability enumeration")
    osub = p.add_subparsers(dest="omega_command", required=True)
    pe = osub.add_parser("enumerate")
    pe.add_argument("--machine", default="pair", help="bundled name or definition file")
    pe.add_argument("--length", type=int, required=True, help="max program length")
    pe.add_argument("--stages", type=int, required=True)
    pe.set_defaults(func=cmd_omega_enumerate)

    p = sub.add_parser("verify", help="re-check every invariant of a recorded trace")
    p.add_argument("--trace", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("replay", help="rebuild the final state from a trace and compare")
    p.add_argument("--trace", required=True)
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
