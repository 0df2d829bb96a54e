"""Monte Carlo L1-error benchmark.

For a scenario, a target curve ``theta`` (e.g. ``F_{3|1}``) and an estimator,
the error of one replicate is

    Delta = (1/9) * sum_k |theta(t_k) - theta_hat(t_k)|,

where ``t_k`` (k = 1..9) are the deciles of the oracle curve normalised by
its total mass. The oracle is the empirical-regime estimate from one large
uncensored simulation. Replicate errors are averaged; the Monte Carlo
standard error is reported alongside.
"""

from __future__ import annotations

import csv
import hashlib
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .censor_weights import DEFAULT_FLOOR, aalen_censor_weights, km_censor_weights
from .errors import DegenerateTruth, TruncationWarning, ValidationError
from .estimators import StageFit, Target
from .simulator import SimScenario, simulate
from .stepfun import StepCurve

__all__ = [
    "percentile_grid",
    "l1_error",
    "BenchReport",
    "run_benchmark",
    "replicate_errors",
    "truth_curves",
    "write_report_csv",
    "TRUTH_REP",
    "DEFAULT_TARGETS",
]

TRUTH_REP = 2**32 - 1  # replicate index reserved for the oracle simulation
DEFAULT_TARGETS = ("F:3|1",)
METHODS = ("ipcw", "fre")
CSV_COLUMNS = ("scenario", "n", "method", "target", "delta_mean", "delta_se", "censor_rate")


def percentile_grid(truth: StepCurve, k: int = 9) -> np.ndarray:
    """``t_q = inf{t : truth(t) >= q/(k+1) * truth(inf)}`` for ``q = 1..k``."""
    total = truth.final
    if not (total > 0) or not truth.times.size:
        raise DegenerateTruth("oracle curve has no positive mass")
    levels = np.arange(1, k + 1) / (k + 1) * total
    vals = truth.values
    # right-continuous nondecreasing curve: first knot whose value reaches the level
    reach = np.maximum.accumulate(vals)
    pos = np.searchsorted(reach, levels - 1e-12 * total, side="left")
    pos = np.minimum(pos, vals.size - 1)
    return truth.times[pos]


def l1_error(truth: StepCurve, estimate: StepCurve, grid) -> float:
    grid = np.asarray(grid, dtype=float)
    return float(np.mean(np.abs(np.asarray(truth.eval(grid)) - np.asarray(estimate.eval(grid)))))


@dataclass
class BenchReport:
    scenario: str
    n: int
    method: str
    target: str
    reps: int
    deltas: np.ndarray = field(repr=False)
    censor_rate: float
    seconds: float = 0.0  # wall clock; metadata only, never written to CSV

    @property
    def delta_mean(self) -> float:
        return math.fsum(self.deltas) / self.deltas.size

    @property
    def delta_se(self) -> float:
        if self.deltas.size < 2:
            return 0.0
        m = self.delta_mean
        var = math.fsum((d - m) ** 2 for d in self.deltas) / (self.deltas.size - 1)
        return math.sqrt(var / self.deltas.size)

    def row(self) -> dict:
        return {
            "scenario": self.scenario,
            "n": self.n,
            "method": self.method,
            "target": self.target,
            "delta_mean": f"{self.delta_mean:.10g}",
            "delta_se": f"{self.delta_se:.10g}",
            "censor_rate": f"{self.censor_rate:.10g}",
        }


def _weights_for(ds, sc: SimScenario, weighting: str, eps: float):
    if weighting == "auto":
        weighting = "aalen" if sc.censoring == "stage-dependent" else "km"
    if weighting == "km":
        return km_censor_weights(ds, eps)
    if weighting == "aalen":
        return aalen_censor_weights(ds, eps=eps)[1]
    raise ValidationError(f"unknown weighting {weighting!r}")


def replicate_errors(sc: SimScenario, n: int, rep: int, seed: int, targets, grids, truths,
                     methods=METHODS, weighting: str = "aalen", eps: float = DEFAULT_FLOOR):
    """Errors of one replicate: ``({(method, target): delta}, censoring fraction)``."""
    td = simulate(sc, seed=seed, n=n, rep=rep)
    ds = td.observed
    weights = _weights_for(ds, sc, weighting, eps)
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        ipcw = StageFit(ds, "ipcw", weights=weights)
        fits = {"ipcw": ipcw}
        if "fre" in methods:
            fits["fre"] = StageFit(ds, "fre", weights=weights, base=ipcw)
        for m in methods:
            for t in targets:
                out[(m, t.label)] = l1_error(truths[t.label], t.evaluate(fits[m]), grids[t.label])
    return out, ds.censoring_fraction


def _truth_path(cache_dir, sc: SimScenario, seed: int, n_truth: int, target: Target) -> Path:
    h = hashlib.sha256(f"{sc.key()}|{seed}|{n_truth}|{target.label}".encode()).hexdigest()[:20]
    return Path(cache_dir) / f"truth-{h}.npz"


def truth_curves(sc: SimScenario, targets, seed: int, n_truth: int = 10_000, cache_dir=None) -> dict:
    """Oracle curves per target label, optionally cached on disk."""
    out, todo = {}, []
    for t in targets:
        if cache_dir is not None:
            p = _truth_path(cache_dir, sc, seed, n_truth, t)
            if p.exists():
                z = np.load(p)
                out[t.label] = StepCurve(z["times"], z["values"], float(z["initial"]))
                continue
        todo.append(t)
    if todo:
        td = simulate(sc.uncensored(), seed=seed, n=n_truth, rep=TRUTH_REP)
        fit = StageFit(td.truth, "empirical")
        for t in todo:
            c = t.evaluate(fit)
            out[t.label] = c
            if cache_dir is not None:
                Path(cache_dir).mkdir(parents=True, exist_ok=True)
                p = _truth_path(cache_dir, sc, seed, n_truth, t)
                tmp = p.with_suffix(f".{os.getpid()}.tmp.npz")
                np.savez(tmp, times=c.times, values=c.values, initial=c.initial)
                os.replace(tmp, p)
    return out


def _chunk(args):
    sc, n, reps, seed, targets, grids, truths, methods, weighting, eps = args
    res = []
    for r in reps:
        res.append((r,) + replicate_errors(sc, n, r, seed, targets, grids, truths, methods, weighting, eps))
    return res


def run_benchmark(sc: SimScenario, targets: Sequence = DEFAULT_TARGETS, methods: Sequence[str] = METHODS,
                  ns: Sequence[int] = (100, 300), reps: int = 500, seed: int = 0, threads: int = 1,
                  n_truth: int = 10_000, cache_dir=None, weighting: str = "aalen",
                  eps: float = DEFAULT_FLOOR) -> list[BenchReport]:
    """Average L1 error over `reps` replicates for each ``(n, method, target)``.

    Replicate ``r`` at sample size ``n`` always uses the stream
    ``(seed, n, r)``, and errors are summed in replicate order with
    :func:`math.fsum`, so the report does not depend on `threads`.
    """
    reps = int(reps)
    if reps < 1:
        raise ValidationError("reps must be at least 1")
    methods = tuple(methods)
    for m in methods:
        if m not in METHODS:
            raise ValidationError(f"unknown method {m!r}; expected one of {METHODS}")
    targets = [Target.parse(t) if isinstance(t, str) else t for t in targets]
    if not targets:
        raise ValidationError("no targets")
    ns = [int(n) for n in ns]
    truths = truth_curves(sc, targets, seed, n_truth, cache_dir)
    grids = {t.label: percentile_grid(truths[t.label]) for t in targets}
    threads = max(1, int(threads))
    reports = []
    for n in ns:
        t0 = time.perf_counter()
        idx = list(range(reps))
        if threads == 1:
            rows = _chunk((sc, n, idx, seed, targets, grids, truths, methods, weighting, eps))
        else:
            size = max(1, -(-reps // (threads * 4)))
            chunks = [idx[i:i + size] for i in range(0, reps, size)]
            with ProcessPoolExecutor(max_workers=threads) as ex:
                parts = ex.map(_chunk, [(sc, n, c, seed, targets, grids, truths, methods, weighting, eps) for c in chunks])
                rows = [r for part in parts for r in part]
        rows.sort(key=lambda r: r[0])
        secs = time.perf_counter() - t0
        rate = math.fsum(r[2] for r in rows) / reps
        for m in methods:
            for t in targets:
                d = np.array([r[1][(m, t.label)] for r in rows])
                reports.append(BenchReport(sc.name, n, m, t.label, reps, d, rate, secs))
    return reports


def write_report_csv(reports: Sequence[BenchReport], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in reports:
            w.writerow(r.row())
