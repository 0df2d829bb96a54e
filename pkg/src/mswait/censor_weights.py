"""Probability-of-remaining-uncensored curves ``K_i(t)`` on the calendar scale.

Two estimators are provided:

* :func:`km_censor_weights` -- one Kaplan-Meier curve of the censoring times
  (roles of event and censoring reversed), shared by every subject. Suitable
  under independent censoring.
* :func:`aalen_censor_weights` -- Aalen's additive hazards model for the
  censoring hazard with covariates "intercept + indicator of the stage
  occupied just before ``t``". Each subject gets its own curve, so the
  censoring hazard may depend on the current stage.

Both return a :class:`WeightCurveSet` whose values are floored at ``eps``.
:class:`KnownCensoringWeights` wraps a known censoring survival function
(for simulation studies).
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateDesignWarning, ValidationError
from .records import Dataset
from .stepfun import StepCurve, product_limit

__all__ = [
    "WeightCurveSet",
    "AalenFit",
    "KnownCensoringWeights",
    "km_censor_weights",
    "aalen_censor_weights",
    "censor_weights",
    "weight_at",
    "weight_at_left",
    "stage_at_left",
    "DEFAULT_FLOOR",
    "PINV_RCOND",
]

DEFAULT_FLOOR = 0.01
PINV_RCOND = 1e-10


def _check_floor(eps: float) -> float:
    eps = float(eps)
    if not 0 < eps <= 1:
        raise ValidationError(f"weight floor must lie in (0, 1], got {eps}")
    return eps


class WeightCurveSet:
    """Per-subject censoring-survival step curves, floored at `eps`.

    All curves jump only on a common grid of censoring times ``c_1 < ... <
    c_L``. For each subject the curve is a product of per-stage factors
    ``1 - h_m(c_l)`` over the grid points where it occupied stage ``m``; the
    cumulative logs of these factors are stored per stage so evaluation is
    a couple of `searchsorted` calls.

    Do not build directly; use :func:`km_censor_weights` or
    :func:`aalen_censor_weights`.
    """

    is_step = True

    def __init__(self, method, eps, grid, factors, ds: Dataset, common: StepCurve | None = None):
        self.method = method
        self.eps = _check_floor(eps)
        self.grid = np.asarray(grid, dtype=float)
        self.shared = common is not None
        self.n = ds.n
        self._ds = ds
        # factors: (L, S) array of 1 - hazard per grid point and stage column
        factors = np.asarray(factors, dtype=float).reshape(self.grid.size, len(ds.graph.stages))
        self.factors = factors
        with np.errstate(divide="ignore"):
            logs = np.where(factors > 0, np.log(np.where(factors > 0, factors, 1.0)), 0.0)
        zero = (factors <= 0).astype(np.int64)
        pad = np.zeros((1, factors.shape[1]))
        self._cumlog = np.vstack([pad, np.cumsum(logs, axis=0)])
        self._cumzero = np.vstack([pad.astype(np.int64), np.cumsum(zero, axis=0)])
        if common is not None:
            self._common = StepCurve(common.times, np.maximum(common.values, self.eps), 1.0)

    def _evaluate(self, idx, t, side: str):
        idx = np.asarray(idx, dtype=np.int64)
        t = np.asarray(t, dtype=float)
        idx, t = np.broadcast_arrays(idx, t)
        if self.shared:
            return self._common.eval(t) if side == "right" else self._common.eval_left(t)
        ds = self._ds
        upto_t = np.searchsorted(self.grid, t, side=side)
        logsum = np.zeros(t.shape)
        zeros = np.zeros(t.shape, dtype=np.int64)
        root = ds.graph.root
        for s in ds.graph.stages:
            c = ds.col[s]
            entry = ds.entry[idx, c]
            visited = ~np.isnan(entry)
            if not visited.any():
                continue
            end = np.where(visited, ds.exit[idx, c], -np.inf)
            entry = np.where(visited, entry, np.inf)
            lo = np.zeros(t.shape, dtype=np.int64) if s == root else np.searchsorted(self.grid, entry, side="right")
            hi = np.minimum(upto_t, np.searchsorted(self.grid, end, side="right"))
            hi = np.maximum(hi, lo)
            logsum += self._cumlog[hi, c] - self._cumlog[lo, c]
            zeros += self._cumzero[hi, c] - self._cumzero[lo, c]
        out = np.maximum(np.where(zeros > 0, 0.0, np.exp(logsum)), self.eps)
        return out

    def weight_at(self, idx, t):
        """``K_i(t)`` for subject indices `idx` (broadcast against `t`)."""
        out = self._evaluate(idx, t, "right")
        return out if np.ndim(out) else float(out)

    def weight_at_left(self, idx, t):
        """Left limit ``K_i(t-)``."""
        out = self._evaluate(idx, t, "left")
        return out if np.ndim(out) else float(out)

    def curve(self, i: int) -> StepCurve:
        """Subject `i`'s weight curve as a right-continuous :class:`StepCurve`."""
        if self.shared:
            return self._common
        if not self.grid.size:
            return StepCurve.constant(1.0)
        vals = self.weight_at(np.full(self.grid.size, i), self.grid)
        return StepCurve(self.grid, vals, 1.0).simplify()

    def __repr__(self):
        return f"WeightCurveSet(method={self.method!r}, n={self.n}, grid={self.grid.size}, eps={self.eps})"


def weight_at(ws, i, t):
    return ws.weight_at(i, t)


def weight_at_left(ws, i, t):
    return ws.weight_at_left(i, t)


class KnownCensoringWeights:
    """Weights from a known, common censoring survival function.

    Parameters
    ----------
    survival : callable
        Vectorized ``t -> Pr(C > t)``; assumed continuous, so left and right
        limits coincide.
    eps : float, optional
        Floor; the default 0 leaves the true weights untouched.
    """

    is_step = False
    method = "known"

    def __init__(self, survival: Callable, eps: float = 0.0):
        self.survival = survival
        self.eps = float(eps)

    def weight_at(self, idx, t):
        idx, t = np.broadcast_arrays(np.asarray(idx), np.asarray(t, dtype=float))
        out = np.maximum(np.asarray(self.survival(t), dtype=float), self.eps)
        return out if np.ndim(out) else float(out)

    weight_at_left = weight_at


def _censoring_events(ds: Dataset):
    T = ds.final_time
    cens = ds.censored
    return T, cens


def km_censor_weights(ds: Dataset, eps: float = DEFAULT_FLOOR) -> WeightCurveSet:
    """Reversed-role Kaplan-Meier estimate of the censoring survival.

    A subject with follow-up time ``T_i`` is at risk of censoring at ``c``
    when ``T_i >= c``; an observed terminal transition at ``c`` therefore
    keeps the subject in the risk set at ``c``.
    """
    T, cens = _censoring_events(ds)
    ct = np.sort(T[cens])
    grid = np.unique(ct)
    S = len(ds.graph.stages)
    if not grid.size:
        return WeightCurveSet("km", eps, grid, np.ones((0, S)), ds, common=StepCurve.constant(1.0))
    Ts = np.sort(T)
    at_risk = Ts.size - np.searchsorted(Ts, grid, side="left")
    Y = StepCurve(grid, at_risk.astype(float), initial=float(Ts.size))
    K = product_limit(ct, 1.0, Y)
    # per-point factor 1 - d/Y, identical for every stage column
    d = np.diff(np.concatenate(([0], np.searchsorted(ct, grid, side="right"))))
    fac = 1.0 - d / at_risk
    return WeightCurveSet("km", eps, grid, np.repeat(fac[:, None], S, axis=1), ds, common=K)


def stage_at_left(ds: Dataset, idx, c) -> np.ndarray:
    """Stage id occupied just before calendar time `c`, ``s_i(c-)``.

    A visit to stage ``m`` covers ``(entry, end]`` where ``end`` is the exit
    (or censoring) time; the root's visit also covers time 0. Returns -1 when
    ``c`` lies beyond the subject's follow-up.
    """
    idx = np.asarray(idx, dtype=np.int64)
    c = np.asarray(c, dtype=float)
    idx, c = np.broadcast_arrays(idx, c)
    out = np.full(c.shape, -1, dtype=np.int64)
    for s in ds.graph.stages:
        col = ds.col[s]
        entry = ds.entry[idx, col]
        end = ds.exit[idx, col]
        if s == ds.graph.root:
            hit = (entry <= c) & (c <= end)
        else:
            hit = (entry < c) & (c <= end)
        out = np.where(hit & (out < 0), s, out)
    return out


@dataclass(frozen=True)
class AalenFit:
    """Cumulative regression functions of Aalen's additive censoring model.

    ``increments[l, m]`` is ``dB_m`` at ``times[l]``; column 0 is the
    intercept and column ``m >= 1`` belongs to ``covariate_stages[m - 1]``.
    """

    times: np.ndarray
    increments: np.ndarray
    covariate_stages: tuple[int, ...]
    at_risk: np.ndarray  # (L, S) stage occupancy counts at each time
    degenerate: tuple[float, ...] = ()

    @property
    def labels(self) -> tuple[str, ...]:
        return ("intercept",) + tuple(f"stage_{s}" for s in self.covariate_stages)

    def coefficient(self, m: int) -> StepCurve:
        """``B_m`` as a right-continuous curve with ``B_m(0) = 0``."""
        if not self.times.size:
            return StepCurve.constant(0.0)
        return StepCurve(self.times, np.cumsum(self.increments[:, m]), 0.0)

    def write_csv(self, path) -> None:
        B = np.cumsum(self.increments, axis=0) if self.times.size else np.zeros((0, len(self.labels)))
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("t",) + self.labels)
            w.writerow(("0.0",) + ("0.0",) * len(self.labels))
            for t, row in zip(self.times, B):
                w.writerow((repr(float(t)),) + tuple(repr(float(x)) for x in row))


def aalen_censor_weights(ds: Dataset, graph=None, eps: float = DEFAULT_FLOOR):
    """Fit Aalen's additive hazards model to the censoring times.

    Covariates are ``Z_i0 = 1`` and ``Z_im(t) = I[s_i(t-) = m]`` for every
    non-root stage ``m``. At each distinct censoring time ``c`` the increment
    ``dB(c) = R(c)^+ d(c)`` uses the Moore-Penrose inverse of
    ``R(c) = sum_{T_i >= c} Z_i Z_i^T`` with relative cutoff
    :data:`PINV_RCOND`, where ``d(c)`` sums ``Z_i`` over subjects censored
    at ``c``. Subject hazards ``Z_i^T dB`` are clamped to ``[0, 1]``.

    Returns
    -------
    fit : AalenFit
    weights : WeightCurveSet
    """
    graph = graph or ds.graph
    if graph is not ds.graph and graph != ds.graph:
        raise ValidationError("graph does not match the dataset's graph")
    stages = ds.graph.stages
    S = len(stages)
    root_col = ds.col[ds.graph.root]
    cov_stages = tuple(s for s in stages if s != ds.graph.root)
    T, cens = _censoring_events(ds)
    cidx = np.flatnonzero(cens)
    grid = np.unique(T[cidx])
    L = grid.size
    if not L:
        fit = AalenFit(grid, np.zeros((0, S)), cov_stages, np.zeros((0, S), dtype=np.int64))
        return fit, WeightCurveSet("aalen", eps, grid, np.ones((0, S)), ds)

    # occupancy counts of each stage just before every grid time
    counts = np.zeros((L, S), dtype=np.int64)
    for s in stages:
        col = ds.col[s]
        entry = ds.entry[:, col]
        v = ~np.isnan(entry)
        e = np.sort(entry[v])
        x = np.sort(ds.exit[v, col])
        side = "right" if s == ds.graph.root else "left"
        counts[:, col] = np.searchsorted(e, grid, side=side) - np.searchsorted(x, grid, side="left")
    # censoring events by stage occupied at c-
    where = stage_at_left(ds, cidx, T[cidx])
    d = np.zeros((L, S))
    np.add.at(d, (np.searchsorted(grid, T[cidx]), np.array([ds.col[s] for s in where])), 1.0)

    # design in covariate order: intercept, then non-root stages
    order = [root_col] + [ds.col[s] for s in cov_stages]
    cnt = counts[:, order].astype(float)
    dd = d[:, order]
    R = np.zeros((L, S, S))
    R[:, 0, 0] = cnt.sum(axis=1)
    R[:, 0, 1:] = cnt[:, 1:]
    R[:, 1:, 0] = cnt[:, 1:]
    k = np.arange(1, S)
    R[:, k, k] = cnt[:, 1:]
    rhs = np.zeros((L, S))
    rhs[:, 0] = dd.sum(axis=1)
    rhs[:, 1:] = dd[:, 1:]
    degenerate = R[:, 0, 0] <= 0
    Rp = np.linalg.pinv(R, rcond=PINV_RCOND)
    dB = np.einsum("lij,lj->li", Rp, rhs)
    if degenerate.any():
        warnings.warn(
            f"censoring design vanished at {int(degenerate.sum())} time(s); increments skipped",
            DegenerateDesignWarning,
            stacklevel=2,
        )
        dB[degenerate] = 0.0
    # per-stage hazard: intercept plus the stage's own coefficient
    haz = np.empty((L, S))
    haz[:, root_col] = dB[:, 0]
    for m, s in enumerate(cov_stages, start=1):
        haz[:, ds.col[s]] = dB[:, 0] + dB[:, m]
    haz = np.clip(haz, 0.0, 1.0)
    fit = AalenFit(grid, dB, cov_stages, counts, tuple(grid[degenerate]))
    return fit, WeightCurveSet("aalen", eps, grid, 1.0 - haz, ds)


def censor_weights(ds: Dataset, censoring: str = "independent", eps: float = DEFAULT_FLOOR):
    """Dispatch on the censoring assumption: ``independent`` -> KM, ``stage-dependent`` -> Aalen."""
    if censoring in ("independent", "km"):
        return km_censor_weights(ds, eps)
    if censoring in ("stage-dependent", "aalen"):
        return aalen_censor_weights(ds, eps=eps)[1]
    raise ValidationError(f"unknown censoring assumption {censoring!r}")
