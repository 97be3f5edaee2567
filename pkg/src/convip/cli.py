"""Command-line interface: profile, simulate, allocate, verify.

Exit codes: 0 success, 2 usage, 3 unreadable/malformed input, 4 constraint
violation (width, dimension, arity), 5 verification failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import zlib

import numpy as np

from .allocator import Workload, allocate, allocate_bruteforce, explain
from .exceptions import (
    ArityError,
    DimensionError,
    FileFormatError,
    PhaseError,
    SearchSpaceError,
    WidthError,
)
from .fixedpoint import FixedValue, QFormat, requantize
from .golden import convolve_golden
from .io import read_image, read_kernel, write_image
from .ip_models import IpVariant, layer_cycles, run_layer
from .resources import PROFILES, load_budget
from .verify import DEFAULT_SEED, equivalence_suite, sweep_packing

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_CONSTRAINT = 4
EXIT_VERIFY = 5

PROFILE_COLUMNS = ("ip", "luts", "regs", "clbs", "dsps", "wns_ns", "power_w")
_HEADER = ("IP", "LUTs", "Regs", "CLBs", "DSPs", "WNS(ns)", "Power(W)")


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.3f}"
    return str(v)


def _flatten(data, prefix=""):
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            yield from _flatten(value, name + ".")
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            for i, item in enumerate(value):
                yield from _flatten(item, f"{name}[{i}].")
        elif isinstance(value, list):
            yield name, ",".join(_fmt(v) for v in value) if value else "-"
        else:
            yield name, _fmt(value)


def render_text(report: dict) -> str:
    lines = []
    rows = report.get("profiles")
    if rows is not None:
        lines.append(" ".join(_HEADER))
        lines.extend(" ".join(_fmt(r[c]) for c in PROFILE_COLUMNS) for r in rows)
        rest = {k: v for k, v in report.items() if k != "profiles"}
    else:
        rest = report
    lines.extend(f"{k}: {v}" for k, v in _flatten(rest))
    return "\n".join(lines)


def emit(report: dict, as_json: bool, out=None):
    out = out or sys.stdout
    if as_json:
        json.dump(report, out, indent=2)
        out.write("\n")
    else:
        out.write(render_text(report) + "\n")


def profile_report() -> dict:
    return {"profiles": [
        {c: PROFILES[v].to_dict()[c] for c in PROFILE_COLUMNS} for v in IpVariant
    ]}


def cmd_profile(args) -> int:
    emit(profile_report(), args.json)
    return EXIT_OK


def checksum(values: np.ndarray) -> str:
    return f"{zlib.crc32(np.ascontiguousarray(values, dtype='<i8').tobytes()):08x}"


def cmd_simulate(args) -> int:
    variant = IpVariant.parse(args.variant)
    if args.bits > variant.max_operand_bits:
        raise WidthError(
            f"{variant.label} is limited to {variant.max_operand_bits}-bit operands, "
            f"got --bits {args.bits}"
        )
    images = [read_image(p, args.bits) for p in args.image]
    ker = read_kernel(args.kernel, args.bits)
    result = run_layer(variant, images, ker, operand_bits=args.bits, fault=args.inject_fault)
    golden = [convolve_golden(img, ker) for img in images]
    match = all(o == g for o, g in zip(result.outputs, golden))
    n_windows = sum(o.values.size for o in golden)

    report = {
        "command": "simulate",
        "variant": variant.label,
        "bits": args.bits,
        "kernel_size": ker.k,
        "streams": len(result.outputs),
        "outputs": n_windows,
        "cycles": result.cycles,
        "expected_cycles": layer_cycles(variant, n_windows, ker.k),
        "wide_multiplies": result.wide_multiplies,
        "acc_bits": result.outputs[0].acc_bits,
        "checksum": [checksum(o.values) for o in result.outputs],
        "golden_match": match,
        "status": "pass" if match else "fail",
    }
    if args.requantize:
        fmt = QFormat(args.requantize, 0)
        acc_fmt = QFormat(result.outputs[0].acc_bits, 0)
        narrowed = [
            np.array([[requantize(FixedValue(int(v), acc_fmt), fmt).raw for v in row]
                      for row in o.values], dtype=np.int64)
            for o in result.outputs
        ]
        report["requantize_bits"] = args.requantize
        report["requantized_checksum"] = [checksum(n) for n in narrowed]
        if args.output:
            paths = [args.output] if len(narrowed) == 1 else [
                f"{args.output}.{i}" for i in range(len(narrowed))
            ]
            for path, arr in zip(paths, narrowed):
                write_image(path, arr, args.requantize)
            report["written"] = paths
    emit(report, args.json)
    return EXIT_OK if match else EXIT_VERIFY


def cmd_allocate(args) -> int:
    budget = load_budget(args.budget)
    wl = Workload(args.bits, args.streams)
    alloc = allocate(budget, wl)
    report = {"command": "allocate", "operand_bits": args.bits,
              "streams_wanted": args.streams if args.streams is not None else "unbounded"}
    report.update(explain(alloc, budget))
    code = EXIT_OK
    if args.oracle:
        try:
            oracle = allocate_bruteforce(budget, wl)
        except SearchSpaceError as exc:
            report["oracle"] = f"skipped ({exc})"
        else:
            agree = oracle == alloc
            report["oracle"] = "agree" if agree else "disagree"
            report["oracle_counts"] = {v.label: n for v, n in oracle.counts.items()}
            if not agree:
                code = EXIT_VERIFY
    emit(report, args.json)
    return code


def cmd_verify(args) -> int:
    report = {"command": "verify", "seed": args.seed}
    ok = True
    if args.exhaustive_packing:
        sweep = sweep_packing()
        report["packing"] = {"cases": sweep.cases, "failures": sweep.failures,
                             "wide_multiplies": sweep.wide_multiplies}
        ok &= sweep.ok
    equiv = equivalence_suite(args.cases, args.seed, fault=args.inject_fault)
    report["equivalence"] = {
        label: {"passed": p, "cases": n} for label, (p, n) in equiv.items()
    }
    ok &= all(p == n for p, n in equiv.values())
    report["status"] = "pass" if ok else "fail"
    if args.json:
        emit(report, True)
    else:
        if "packing" in report:
            pk = report["packing"]
            print(f"{pk['cases']} packed cases, {pk['failures']} failures, "
                  f"{pk['wide_multiplies']} wide multiplies")
        for label, r in report["equivalence"].items():
            print(f"{label} engine equivalence: {r['passed']}/{r['cases']} bit-identical")
        print(f"seed: {args.seed}")
        print(f"status: {report['status']}")
    return EXIT_OK if ok else EXIT_VERIFY


def _positive(text):
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convip", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="print the per-IP resource profiles")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("simulate", help="run one IP model over an image")
    p.add_argument("--variant", required=True, choices=[v.key for v in IpVariant])
    p.add_argument("--image", required=True, action="append",
                   help="PGM or CSV image; give twice for paired streams")
    p.add_argument("--kernel", required=True)
    p.add_argument("--bits", type=_positive, default=8)
    p.add_argument("--requantize", type=_positive, metavar="N")
    p.add_argument("--output", help="file for the requantized output (.pgm or CSV)")
    p.add_argument("--inject-fault", action="store_true",
                   help="corrupt one result to exercise the golden comparison")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("allocate", help="choose IP counts for a resource budget")
    p.add_argument("--budget", required=True, help="JSON with luts, regs, clbs, dsps")
    p.add_argument("--bits", type=_positive, default=8)
    p.add_argument("--streams", type=int)
    p.add_argument("--oracle", action="store_true",
                   help="cross-check against exhaustive enumeration")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("verify", help="run the packing sweep and equivalence cases")
    p.add_argument("--cases", type=_positive, default=50)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--exhaustive-packing", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--inject-fault", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (WidthError, DimensionError, ArityError, PhaseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT


if __name__ == "__main__":
    sys.exit(main())
