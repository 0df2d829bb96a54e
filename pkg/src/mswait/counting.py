"""Counting processes on the stage waiting-time scale.

For a stage ``j`` and a subject who entered it at ``T_ij`` and left (or was
censored) at ``U_ij`` the waiting time is ``w_ij = U_ij - T_ij``. Three
regimes are supported:

``empirical``
    Plain counts from complete data: ``N_jj'(t) = #{w <= t, exit to j'}``,
    ``Y_j(t) = #{w >= t}``.
``ipcw``
    Each exit is weighted by ``1 / K_i(U_ij-)`` and each at-risk
    contribution at waiting time ``t`` by ``1 / K_i(T_ij + t)``.
``fre``
    The IPCW counts, with the at-risk set enlarged by
    ``(sum of psi over subjects censored upstream) * S_j(t)``.

At-risk processes are left-continuous in ``t`` at exits, so they are stored
as :class:`~mswait.stepfun.StepCurve` objects carrying separate point
values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CensoredDataInEmpiricalRegime, UnknownDestination
from .records import Dataset
from .stepfun import StepCurve

__all__ = [
    "CountingSystem",
    "UnitWeights",
    "empirical_counts",
    "ipcw_counts",
    "at_risk_values",
    "fre_risk_set",
    "upstream_censored",
]


class UnitWeights:
    """``K_i == 1``: turns the IPCW construction into plain counting."""

    is_step = True
    method = "none"
    eps = 1.0
    grid = np.zeros(0)

    def weight_at(self, idx, t):
        return np.ones(np.broadcast(np.asarray(idx), np.asarray(t)).shape)

    weight_at_left = weight_at


@dataclass(frozen=True)
class CountingSystem:
    """``(N_jj', N_j, Y_j)`` for one stage under one weighting regime.

    The raw observed exits are kept (`exit_waits`, `exit_weights`,
    `exit_dest`) so estimators can work from jump lists directly.
    """

    stage: int
    regime: str
    children: tuple[int, ...]
    exit_waits: np.ndarray
    exit_weights: np.ndarray
    exit_dest: np.ndarray
    Y: StepCurve
    n_entered: int
    N_to: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        N_to = {}
        for c in self.children:
            m = self.exit_dest == c
            N_to[c] = StepCurve.from_increments(self.exit_waits[m], self.exit_weights[m])
        object.__setattr__(self, "N_to", N_to)

    @property
    def N(self) -> StepCurve:
        """Total exits ``N_j``."""
        return StepCurve.from_increments(self.exit_waits, self.exit_weights)

    def transitions(self, dest: int) -> StepCurve:
        if dest not in self.N_to:
            raise UnknownDestination(f"stage {dest} is not a child of stage {self.stage}")
        return self.N_to[dest]

    def at_risk(self, t):
        return self.Y.eval(t)

    def with_at_risk(self, Y: StepCurve, regime: str) -> CountingSystem:
        return replace(self, Y=Y, regime=regime)


def _at_risk_curve(T, w, idx, weights) -> StepCurve:
    """Exact step representation of ``sum_i I[w_i >= t] / K_i(T_i + t)``."""
    n = w.size
    if not n:
        return StepCurve.constant(0.0)
    inv0 = 1.0 / np.asarray(weights.weight_at(idx, T), dtype=float)
    inv_exit = 1.0 / np.asarray(weights.weight_at(idx, T + w), dtype=float)

    grid = np.asarray(weights.grid, dtype=float)
    change_t = np.zeros(0)
    change_d = np.zeros(0)
    if grid.size:
        lo = np.searchsorted(grid, T, side="right")
        hi = np.searchsorted(grid, T + w, side="right")
        cnt = np.maximum(hi - lo, 0)
        total = int(cnt.sum())
        if total:
            owner = np.repeat(np.arange(n), cnt)
            offs = np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt)
            g = lo[owner] + offs
            c = grid[g]
            who = idx[owner]
            d = 1.0 / weights.weight_at(who, c) - 1.0 / weights.weight_at_left(who, c)
            keep = d != 0
            change_t = (c - T[owner])[keep]
            change_d = d[keep]
            # guard against rounding pushing a change past the subject's exit
            change_t = np.minimum(change_t, w[owner][keep])

    knots = np.unique(np.concatenate((change_t, w)))
    d_pt = np.zeros(knots.size)
    d_exit = np.zeros(knots.size)
    np.add.at(d_pt, np.searchsorted(knots, change_t), change_d)
    np.add.at(d_exit, np.searchsorted(knots, w), inv_exit)
    initial = float(np.sum(inv0))
    values = initial + np.cumsum(d_pt - d_exit)
    at_jump = values + d_exit
    ws = np.sort(w)
    active = n - np.searchsorted(ws, knots, side="right")
    values = np.where(active == 0, 0.0, values)
    return StepCurve(knots, values, initial=initial, at_jump=at_jump)


def _build(ds: Dataset, weights, j: int, regime: str) -> CountingSystem:
    cols = ds.stage(j)
    w = cols.wait
    ex = cols.exited
    if ex.any():
        ew = 1.0 / np.asarray(weights.weight_at_left(cols.idx[ex], cols.exit[ex]), dtype=float)
    else:
        ew = np.zeros(0)
    if weights.is_step:
        Y = _at_risk_curve(cols.entry, w, cols.idx, weights)
    else:
        Y = _LiteralAtRisk(cols.entry, w, cols.idx, weights)
    return CountingSystem(
        stage=j,
        regime=regime,
        children=ds.graph.successors(j),
        exit_waits=w[ex],
        exit_weights=ew,
        exit_dest=cols.dest[ex],
        Y=Y,
        n_entered=int(cols.idx.size),
    )


class _LiteralAtRisk:
    """At-risk process for continuous weights, evaluated pointwise on demand."""

    def __init__(self, T, w, idx, weights):
        self.T, self.w, self.idx, self.weights = T, w, idx, weights

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        out = np.array([
            np.sum((self.w >= s) / np.asarray(self.weights.weight_at(self.idx, self.T + s)))
            for s in flat
        ])
        out = out.reshape(t.shape)
        return out if out.ndim else float(out)

    __call__ = eval


def empirical_counts(ds: Dataset, j: int) -> CountingSystem:
    """Unweighted counts; requires complete (uncensored) data."""
    if ds.censored.any():
        raise CensoredDataInEmpiricalRegime(
            f"{int(ds.censored.sum())} censored subject(s); the empirical regime needs complete data"
        )
    return _build(ds, UnitWeights(), j, "empirical")


def ipcw_counts(ds: Dataset, weights, j: int) -> CountingSystem:
    """Inverse-probability-of-censoring weighted counts for stage `j`."""
    return _build(ds, weights, j, "ipcw")


def at_risk_values(ds: Dataset, weights, j: int, t) -> np.ndarray:
    """Evaluate ``sum_i I[w_ij >= t] / K_i(T_ij + t)`` directly at each `t`."""
    cols = ds.stage(j)
    return _LiteralAtRisk(cols.entry, cols.wait, cols.idx, weights).eval(t)


def upstream_censored(ds: Dataset, j: int) -> np.ndarray:
    """Mask of subjects censored in a stage strictly above `j` on its root path."""
    path = ds.graph.path_from_root(j)[:-1]
    return ds.censored & np.isin(ds.last_stage, path)


def fre_risk_set(ds: Dataset, weights, psi, S_j: StepCurve, j: int, Y: StepCurve | None = None) -> StepCurve:
    """Fractional at-risk set ``Y_j(t) + (sum of upstream psi) * S_j(t)``.

    Parameters
    ----------
    psi : array_like, shape (n,)
        Fractional observations for target stage `j`, one per subject.
    S_j : StepCurve
        Survival curve of the stage-`j` waiting time (the IPCW estimate).
    Y : StepCurve, optional
        Precomputed IPCW at-risk curve for stage `j`.
    """
    if Y is None:
        Y = ipcw_counts(ds, weights, j).Y
    psi = np.asarray(psi, dtype=float)
    mass = float(np.sum(psi[upstream_censored(ds, j)]))
    if mass == 0.0:
        return Y
    return Y + mass * S_j
