"""Command-line entry point: ``fockrail simulate|sample|element|verify|gate``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import jsonio
from .dsl import DslError, parse_file
from .functor import matrix_element
from .klm import controlled_z, nonlinear_sign
from .rail import SamplingRun, build_rail, run_sampling, simulate, simulate_circuit
from .suites import SUITES

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_IO = 3
EXIT_INPUT = 4


def _occupation(text: str) -> tuple[int, ...]:
    parts = [p for p in text.replace(" ", "").split(",") if p != ""]
    try:
        values = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated photon counts, got {text!r}")
    if any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("photon counts must be nonnegative")
    return values


def _write(doc: dict, path: str | None) -> None:
    data = jsonio.dumps(doc)
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(path).write_bytes(data)


def cmd_simulate(args) -> int:
    prog = parse_file(args.file)
    layout, sched = prog.layout(), prog.schedule()
    if sched.rules or sched.postselect:
        result = simulate(layout, sched, args.truncation)
    else:
        result = simulate_circuit(layout, sched, args.truncation)
    doc = jsonio.distribution_doc(result.distribution, result.truncation, result.postselection_probability)
    _write(doc, args.json)
    return EXIT_OK


def cmd_sample(args) -> int:
    prog = parse_file(args.file)
    run = SamplingRun(prog.layout(), prog.schedule(), args.shots, args.seed, prog.encoding(), args.truncation)
    result = run_sampling(run)
    doc = jsonio.histogram_doc(result.counts, args.seed, result.truncation, result.residual, result.kind)
    if result.postselection_probability is not None:
        doc["postselection_probability"] = result.postselection_probability
    _write(doc, args.json)
    return EXIT_OK


def cmd_element(args) -> int:
    prog = parse_file(args.file)
    op = build_rail(prog.layout())
    if len(args.n_in) != op.dim or len(args.n_out) != op.dim:
        raise ValueError(f"occupations need {op.dim} entries: {op.internal} internal and {op.external} external")
    value = matrix_element(op.generator, args.n_in, args.n_out)
    _write(jsonio.element_doc(args.n_in, args.n_out, value), args.json)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = SUITES[args.suite]()
    for check in checks:
        print(check.line())
    ok = all(c.passed for c in checks)
    print(f"{args.suite}: {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_gate(args) -> int:
    if args.name == "ns":
        _, report = nonlinear_sign()
    else:
        _, report = controlled_z()
    print(f"{args.name}: success probability {report.success_probability!r}")
    _write(jsonio.gate_report_doc(report), args.report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fockrail", description="Photonic rail computer simulator")
    parser.add_argument("--error-json", action="store_true", help="print errors as JSON on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="exact outcome distribution of a program")
    p.add_argument("file")
    p.add_argument("--truncation", type=int)
    p.add_argument("--json", help="output path (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sample", help="seeded sampling of a program")
    p.add_argument("file")
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--truncation", type=int)
    p.add_argument("--json")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("element", help="matrix element of the whole-rail operator")
    p.add_argument("file")
    p.add_argument("--in", dest="n_in", type=_occupation, required=True)
    p.add_argument("--out", dest="n_out", type=_occupation, required=True)
    p.add_argument("--json")
    p.set_defaults(func=cmd_element)

    p = sub.add_parser("verify", help="run a self-check suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gate", help="gate report for the sign or controlled-Z gate")
    p.add_argument("name", choices=["ns", "cz"])
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_gate)
    return parser


def _fail(args, code: str, message: str, exit_code: int, extra: dict | None = None) -> int:
    if getattr(args, "error_json", False):
        doc = {"error": code, "message": message}
        doc.update(extra or {})
        sys.stderr.buffer.write(jsonio.dumps(doc))
    else:
        print(f"fockrail: {code}: {message}", file=sys.stderr)
    return exit_code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DslError as exc:
        where = f"{args.file}:{exc.line}:{exc.column}" if exc.line is not None else args.file
        return _fail(args, exc.code, f"{where}: {exc.message}", exc.exit_code, exc.to_dict())
    except OSError as exc:
        return _fail(args, "IO", str(exc), EXIT_IO)
    except ValueError as exc:
        return _fail(args, "INPUT", str(exc), EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
