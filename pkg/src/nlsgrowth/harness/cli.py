"""Command-line interface: simulate, verify, certify-bound, probe-resonance, fit."""

from __future__ import annotations

import argparse
import json
import sys

from ..dynamics import EquationError
from ..multiplier import MultiplierError, SmoothingParams, certify_psi_bound, probe_gamma6
from .config import ConfigError, load_config, load_suite
from .fit import FitError, fit_growth
from .simulate import read_series, run, write_outputs
from .verify import verify_claims, write_report

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY_FAILED = 2
EXIT_ABORT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(obj):
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    result = write_outputs(cfg, run(cfg), args.out)
    print(f"wrote {result.csv_path} ({len(result.records)} records) and {result.manifest_path}")
    if result.aborted:
        print(f"numerical abort at t = {result.manifest['abort_t']}", file=sys.stderr)
        return EXIT_ABORT
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify_claims(load_suite(args.suite))
    path = write_report(report, args.out)
    for entry in report["checks"]:
        status = "PASS" if entry["passed"] else "FAIL"
        kind = "hard" if entry["hard"] else "soft"
        print(f"{status}  {entry['name']} ({kind})")
    print(f"report: {path}")
    return EXIT_OK if report["passed"] else EXIT_VERIFY_FAILED


def cmd_certify(args) -> int:
    report = certify_psi_bound(SmoothingParams(args.s, args.threshold), None, args.band,
                               workers=args.workers)
    _emit(report.to_dict())
    return EXIT_OK


def _int_tuple(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def cmd_probe(args) -> int:
    _emit(probe_gamma6(args.base, args.scale, args.s).to_dict())
    return EXIT_OK


def cmd_fit(args) -> int:
    t, v = read_series(args.input, args.column)
    _emit(fit_growth(t, v, (args.t_min, args.t_max)).to_dict())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nlsgrowth", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run one configured simulation")
    p.add_argument("--config", required=True, help="JSON simulation config")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--suite", required=True, help="JSON suite config")
    p.add_argument("--out", required=True, help="output directory for report.json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("certify-bound", help="brute-force sup of |Psi| / majorant")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--band", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("probe-resonance", help="evaluate the sextic resonance function")
    p.add_argument("--base", type=_int_tuple, required=True, help='e.g. "6,-2,5,-3,1,-7"')
    p.add_argument("--scale", type=int, required=True)
    p.add_argument("--s", type=float, required=True)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("fit", help="fit value ~ C (1 + t)^alpha to a CSV column")
    p.add_argument("--input", required=True)
    p.add_argument("--column", required=True)
    p.add_argument("--t-min", type=float, required=True)
    p.add_argument("--t-max", type=float, required=True)
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
    except (EquationError, MultiplierError, FitError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
