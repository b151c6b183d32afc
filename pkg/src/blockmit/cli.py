"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 numerical or fit failure (including
a failed reproduction check), 3 I/O error. Progress goes to stderr; the
paths of written result files go to stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from blockmit import export as export_mod
from blockmit.errors import NumericalError, ValidationError
from blockmit.harness import ExperimentConfig, reproduce, run_experiment, run_sweep

log = logging.getLogger("blockmit")

# flag dest -> ExperimentConfig field
FIELD_FOR_FLAG = {
    "qubits": "n_qubits",
    "target": "target",
    "shots": "shots",
    "repeats": "repeats",
    "p1": "p1",
    "p2": "p2",
    "seed": "base_seed",
    "lambdas": "lambda_grid",
    "ks": "k_grid",
    "zne_method": "zne_method",
    "c_policy": "c_policy",
    "out": "output_dir",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _formats(text):
    values = [v.strip() for v in text.split(",") if v.strip()]
    bad = set(values) - set(export_mod.FORMATS)
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s) {sorted(bad)}; choose from "
                                         f"{export_mod.FORMATS}")
    return values


def _output_flags(p):
    p.add_argument("--out", help="output directory (default: results)")
    p.add_argument("--format", type=_formats, default=["json", "csv"],
                   help="comma-separated subset of csv,json,svg-plotdata (default: json,csv)")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")


def _experiment_flags(p, sweep=False):
    p.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")
    p.add_argument("--qubits", type=int, help="number of qubits n (default 6)")
    p.add_argument("--target", help="target bitstring (default all ones)")
    p.add_argument("--shots", type=int, help="shots per circuit per run (default 4000)")
    p.add_argument("--repeats", type=int, help="independent runs (default 10)")
    if sweep:
        p.add_argument("--p1", type=_float_list, help="one-qubit error rates (default p2/10)")
        p.add_argument("--p2", type=_float_list, default=[0.0005, 0.001, 0.005],
                       help="comma-separated two-qubit error rates (default 0.0005,0.001,0.005)")
    else:
        p.add_argument("--p1", type=float, help="one-qubit depolarizing probability (default 1e-4)")
        p.add_argument("--p2", type=float, help="two-qubit depolarizing probability (default 1e-3)")
    p.add_argument("--seed", type=int, help="base seed (default 0)")
    p.add_argument("--lambdas", type=_int_list, help="odd noise scales, e.g. 1,3,5")
    p.add_argument("--ks", type=_int_list, help="identity-pair repetitions, e.g. 1,2,3")
    p.add_argument("--zne-method", choices=["richardson", "exponential", "loglinear", "linear"])
    p.add_argument("--c-policy", choices=["assume_unit", "fit"])
    p.add_argument("--parallel", type=int, default=1, help="worker processes (default 1)")
    _output_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blockmit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in (("run", "unmitigated, ZNE and block-fidelity estimates"),
                       ("zne", "unmitigated and ZNE estimates only"),
                       ("blockfit", "unmitigated and block-fidelity estimates only")):
        _experiment_flags(sub.add_parser(name, help=text, description=text))
    p = sub.add_parser("sweep", help="one experiment per error rate",
                       description="one experiment per error rate (p1 defaults to p2/10)")
    _experiment_flags(p, sweep=True)
    p = sub.add_parser("reproduce", help="re-derive published reference values",
                       description="re-derive published reference values")
    p.add_argument("--table", required=True, choices=["1", "2", "3"])
    p.add_argument("--shots", type=int, default=4000, help="shots per circuit per run")
    p.add_argument("--repeats", type=int, default=10, help="independent runs")
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--no-sim", action="store_true", help="arithmetic checks only")
    p.add_argument("--parallel", type=int, default=1, help="worker processes (default 1)")
    _output_flags(p)
    return parser


def _config_from_args(args, methods, skip=()) -> dict:
    data = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValidationError("config file must hold a JSON object", "config")
    for flag, name in FIELD_FOR_FLAG.items():
        value = getattr(args, flag, None)
        if value is not None and flag not in skip:
            data[name] = value
    data["methods"] = methods
    return data


def _emit(paths):
    for path in paths:
        print(path)


def _dispatch(args) -> int:
    if args.command == "reproduce":
        report = reproduce(args.table, shots=args.shots, repeats=args.repeats, seed=args.seed,
                           simulate=not args.no_sim, parallel=args.parallel)
        for check in report.checks:
            log.info("%-5s %s: computed=%s expected=%s", check["status"].upper(), check["name"],
                     check["computed"], check["expected"])
        out = args.out or "results"
        _emit(p for fmt in args.format for p in export_mod.export(report, fmt, out))
        if not report.passed:
            log.error("reproduction checks failed")
            return 2
        return 0

    methods = {"run": ["zne", "blockfit"], "zne": ["zne"], "blockfit": ["blockfit"],
               "sweep": ["zne", "blockfit"]}[args.command]
    skip = ("p1", "p2") if args.command == "sweep" else ()
    config = ExperimentConfig.from_dict(_config_from_args(args, methods, skip))
    if args.command == "sweep":
        reports = run_sweep(config, args.p2, args.p1, parallel=args.parallel)
        stem = f"sweep_grover{config.n_qubits}_seed{config.base_seed}"
        _emit(p for fmt in args.format
              for p in export_mod.export_many(reports, fmt, config.output_dir, stem))
        return 0
    report = run_experiment(config)
    agg = report.aggregates
    log.info("theoretical %.4f | p_raw %.4f | p_zne %s | p_mit %s", report.theoretical,
             agg["p_raw"]["mean"],
             f"{agg['p_zne']['mean']:.4f}" if "p_zne" in agg else "-",
             f"{agg['p_mit']['mean']:.4f}" if "p_mit" in agg else "-")
    _emit(p for fmt in args.format for p in export_mod.export(report, fmt, config.output_dir))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return _dispatch(args)
    except ValidationError as exc:
        print(f"blockmit: invalid input: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"blockmit: numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"blockmit: I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
