"""Command-line interface: ``ms-wait {estimate,simulate,benchmark,transitions,curves}``.

Exit codes: 0 success, 1 invalid input or usage, 2 file-system error.
Diagnostics go to stderr; results go only to the files named on the command
line (``transitions`` prints its table to stdout when no ``--out`` is given).
"""

from __future__ import annotations

import argparse
import csv
import sys
import warnings
from pathlib import Path

from . import __version__
from .bench import DEFAULT_TARGETS, run_benchmark, write_report_csv
from .censor_weights import DEFAULT_FLOOR, aalen_censor_weights, censor_weights
from .errors import MsWaitError, ValidationError
from .estimators import REGIMES, StageFit, Target, conditional_incidence, conditional_waiting_distribution
from .graph import load_graph
from .records import parse_dataset, transition_table, write_dataset
from .simulator import load_scenario, preset, simulate
from .stepfun import write_curve_csv


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are input errors (exit 1), not argparse's 2
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _floor(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError("weight floor must lie in (0, 1]")
    return v


def _int_list(text: str) -> list[int]:
    try:
        out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("sample sizes must be positive")
    return out


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=_positive_int, default=1, help="worker processes (benchmark only)")
    common.add_argument("--weight-floor", type=_floor, default=DEFAULT_FLOOR, metavar="EPS",
                        help=f"lower bound for censoring weights (default {DEFAULT_FLOOR})")
    common.add_argument("--seed", type=_seed, default=None, help="master seed (required by simulate/benchmark)")

    p = _Parser(prog="ms-wait", description="Stage waiting-time estimation for progressive multi-stage models.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True

    e = sub.add_parser("estimate", parents=[common], help="estimate F_{j|k} or P_{jj'|k} from a subject CSV")
    e.add_argument("--data", required=True, type=Path)
    e.add_argument("--graph", required=True, type=Path)
    e.add_argument("--method", choices=REGIMES, default="ipcw")
    e.add_argument("--censoring", choices=("independent", "stage-dependent"), default="independent")
    e.add_argument("--quantity", choices=("F", "P"), required=True)
    e.add_argument("--from", dest="frm", type=int, required=True, help="conditioning stage k")
    e.add_argument("--stage", type=int, required=True, help="target stage j")
    e.add_argument("--to", type=int, default=None, help="destination j' (quantity P)")
    e.add_argument("--out", type=Path, required=True, help="curve CSV")
    e.add_argument("--sidecar", type=Path, default=None, help="JSON of branch probabilities (default: OUT.json)")
    e.add_argument("--psi-out", type=Path, default=None, help="fractional-observation diagnostics CSV (fre)")
    e.add_argument("--aalen-out", type=Path, default=None, help="Aalen coefficient curves CSV")

    s = sub.add_parser("simulate", parents=[common], help="simulate a dataset from a scenario")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", type=Path, help="scenario JSON")
    src.add_argument("--preset", help="built-in design, e.g. markov-wb-indep-low")
    s.add_argument("--n", type=_positive_int, default=None, help="sample size (overrides the scenario)")
    s.add_argument("--rep", type=int, default=0, help="replicate index")
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--truth-out", type=Path, default=None, help="complete-data CSV")
    s.add_argument("--graph-out", type=Path, default=None, help="write the scenario's graph JSON")

    b = sub.add_parser("benchmark", parents=[common], help="Monte Carlo L1 error of the estimators")
    bsrc = b.add_mutually_exclusive_group(required=True)
    bsrc.add_argument("--scenario", type=Path)
    bsrc.add_argument("--preset")
    b.add_argument("--reps", type=_positive_int, default=None, help="replicates (default 500; 5000 with --full)")
    b.add_argument("--ns", type=_int_list, default=None, help="sample sizes (default 100,300; 100,300,600 with --full)")
    b.add_argument("--methods", type=_str_list, default=["ipcw", "fre"])
    b.add_argument("--targets", type=_str_list, default=list(DEFAULT_TARGETS), help="e.g. F:3|1,P:3>5|1")
    b.add_argument("--weighting", choices=("aalen", "km", "auto"), default="aalen",
                   help="censoring weights; auto = km for independent, aalen for stage-dependent")
    b.add_argument("--n-truth", type=_positive_int, default=10_000)
    b.add_argument("--cache-dir", type=Path, default=None, help="directory for cached oracle curves")
    b.add_argument("--full", action="store_true", help="full-scale run: 5000 reps, n = 100,300,600")
    b.add_argument("--out", type=Path, required=True)

    t = sub.add_parser("transitions", parents=[common], help="observed transition counts")
    t.add_argument("--data", required=True, type=Path)
    t.add_argument("--graph", required=True, type=Path)
    t.add_argument("--out", type=Path, default=None, help="CSV instead of a printed table")

    c = sub.add_parser("curves", parents=[common], help="export counting processes and stage curves")
    c.add_argument("--data", required=True, type=Path)
    c.add_argument("--graph", required=True, type=Path)
    c.add_argument("--stage", type=int, required=True)
    c.add_argument("--method", choices=REGIMES, default="ipcw")
    c.add_argument("--censoring", choices=("independent", "stage-dependent"), default="independent")
    c.add_argument("--out-dir", type=Path, required=True)
    return p


def _load(args):
    graph = load_graph(args.graph)
    return parse_dataset(args.data, graph)


def cmd_estimate(args) -> int:
    ds = _load(args)
    if args.quantity == "P" and args.to is None:
        raise UsageError("--quantity P needs --to")
    if args.quantity == "F" and args.to is not None:
        raise UsageError("--to only applies to --quantity P")
    weights = None
    if args.method != "empirical":
        if args.censoring == "stage-dependent":
            fit, weights = aalen_censor_weights(ds, eps=args.weight_floor)
            if args.aalen_out:
                fit.write_csv(args.aalen_out)
        else:
            weights = censor_weights(ds, "independent", args.weight_floor)
    fit = StageFit(ds, args.method, weights=weights)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if args.quantity == "F":
            bundle = conditional_waiting_distribution(ds, None, args.method, args.stage, args.frm, fit=fit)
        else:
            bundle = conditional_incidence(ds, None, args.method, args.stage, args.to, args.frm, fit=fit)
    for msg in bundle.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    write_curve_csv(bundle.curve, args.out)
    sidecar = args.sidecar or args.out.with_name(args.out.name + ".json")
    bundle.write_sidecar(sidecar)
    if args.psi_out:
        if args.method != "fre":
            raise UsageError("--psi-out requires --method fre")
        fit.psi(args.stage).write_csv(args.psi_out)
    return 0


def _scenario(args):
    sc = load_scenario(args.scenario) if args.scenario else preset(args.preset)
    return sc


def cmd_simulate(args) -> int:
    sc = _scenario(args)
    seed = args.seed if args.seed is not None else sc.seed
    if seed is None:
        raise UsageError("simulate requires --seed")
    td = simulate(sc, seed=seed, n=args.n, rep=args.rep)
    write_dataset(td.observed, args.out)
    if args.truth_out:
        write_dataset(td.truth, args.truth_out)
    if args.graph_out:
        sc.graph.dump(args.graph_out)
    print(f"simulated {td.observed.n} subjects, censoring fraction {td.censoring_fraction:.3f}", file=sys.stderr)
    return 0


def cmd_benchmark(args) -> int:
    if args.seed is None:
        raise UsageError("benchmark requires --seed")
    sc = _scenario(args)
    reps = args.reps or (5000 if args.full else 500)
    ns = args.ns or ([100, 300, 600] if args.full else [100, 300])
    targets = [Target.parse(x) for x in args.targets]
    reports = run_benchmark(sc, targets, args.methods, ns, reps, args.seed, threads=args.threads,
                            n_truth=args.n_truth, cache_dir=args.cache_dir, weighting=args.weighting,
                            eps=args.weight_floor)
    write_report_csv(reports, args.out)
    for r in reports:
        print(f"{r.scenario} n={r.n} {r.method} {r.target}: delta={r.delta_mean:.4f} "
              f"(se {r.delta_se:.4f}) censoring={r.censor_rate:.3f} [{r.seconds:.1f}s]", file=sys.stderr)
    return 0


def cmd_transitions(args) -> int:
    tab = transition_table(_load(args))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(tab.to_csv_rows())
    else:
        print(tab.format())
    return 0


def cmd_curves(args) -> int:
    ds = _load(args)
    fit = StageFit(ds, args.method, censoring=args.censoring, eps=args.weight_floor)
    j = args.stage
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cs = fit.counts(j)
        out = args.out_dir
        out.mkdir(parents=True, exist_ok=True)
        write_curve_csv(cs.N, out / f"N_{j}.csv")
        for d in cs.children:
            write_curve_csv(cs.transitions(d), out / f"N_{j}_{d}.csv")
            write_curve_csv(fit.incidence(j, d), out / f"P_{j}_{d}.csv")
        write_curve_csv(cs.Y, out / f"Y_{j}.csv", point_values=True)
        write_curve_csv(fit.survival(j), out / f"S_{j}.csv")
    return 0


COMMANDS = {
    "estimate": cmd_estimate,
    "simulate": cmd_simulate,
    "benchmark": cmd_benchmark,
    "transitions": cmd_transitions,
    "curves": cmd_curves,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except MsWaitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
