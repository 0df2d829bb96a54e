"""Piecewise-constant curves on ``[0, inf)`` and the product-limit machinery.

A :class:`StepCurve` stores a value on every open interval between its knots
and, separately, the value *at* each knot. Right-continuous curves (counting
processes, survival and incidence curves) have ``at_jump == values``. At-risk
processes are predictable, so their value at a knot is generally the value
from the left; keeping both lets us evaluate them exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import RiskSetExhausted, ValidationError

__all__ = [
    "StepCurve",
    "merge_ties",
    "product_limit",
    "stieltjes_integrate",
    "write_curve_csv",
    "read_curve_csv",
]


class StepCurve:
    """Piecewise-constant function with finitely many knots.

    Parameters
    ----------
    times : array_like
        Strictly increasing, finite, nonnegative knot locations.
    values : array_like
        ``values[k]`` is the value on ``(times[k], times[k+1])``.
    initial : float
        Value on ``[0, times[0])`` (and the left limit at 0).
    at_jump : array_like, optional
        Value exactly at each knot. Defaults to `values`, which makes the
        curve right-continuous.
    """

    __slots__ = ("times", "values", "at_jump", "initial")

    def __init__(self, times=(), values=(), initial=0.0, at_jump=None):
        times = np.asarray(times, dtype=float).reshape(-1)
        values = np.asarray(values, dtype=float).reshape(-1)
        if times.shape != values.shape:
            raise ValidationError("times and values must have the same length")
        if times.size:
            if not np.all(np.isfinite(times)) or times[0] < 0:
                raise ValidationError("knot times must be finite and nonnegative")
            if np.any(np.diff(times) <= 0):
                raise ValidationError("knot times must be strictly increasing")
        if at_jump is None:
            at_jump = values
        else:
            at_jump = np.asarray(at_jump, dtype=float).reshape(-1)
            if at_jump.shape != times.shape:
                raise ValidationError("at_jump must match times in length")
        self.times = times
        self.values = values
        self.at_jump = at_jump
        self.initial = float(initial)

    @classmethod
    def constant(cls, value: float) -> StepCurve:
        return cls((), (), initial=value)

    @classmethod
    def from_increments(cls, times, increments, initial=0.0) -> StepCurve:
        """Right-continuous cumulative curve ``initial + sum(increments[t_k <= t])``.

        Tied times are merged; zero net increments are dropped.
        """
        t, inc = merge_ties(times, increments)
        keep = inc != 0
        t, inc = t[keep], inc[keep]
        return cls(t, initial + np.cumsum(inc), initial=initial)

    @property
    def is_right_continuous(self) -> bool:
        return self.at_jump is self.values or np.array_equal(self.at_jump, self.values)

    @property
    def final(self) -> float:
        """Value after the last knot (the curve's value "at infinity")."""
        return float(self.values[-1]) if self.values.size else self.initial

    def __len__(self) -> int:
        return self.times.size

    def __repr__(self) -> str:
        return f"StepCurve(knots={self.times.size}, initial={self.initial:g}, final={self.final:g})"

    def __call__(self, t):
        return self.eval(t)

    def eval(self, t):
        """Value at `t` (the point value when `t` is a knot)."""
        t_arr = np.asarray(t, dtype=float)
        if not self.times.size:
            out = np.full(t_arr.shape, self.initial)
        else:
            k = np.searchsorted(self.times, t_arr, side="right") - 1
            kk = np.maximum(k, 0)
            inside = np.where(self.times[kk] == t_arr, self.at_jump[kk], self.values[kk])
            out = np.where(k >= 0, inside, self.initial)
        return out if out.ndim else float(out)

    def eval_left(self, t):
        """Left limit ``c(t-)``; equals `initial` at and before the first knot."""
        t_arr = np.asarray(t, dtype=float)
        k = np.searchsorted(self.times, t_arr, side="left") - 1
        if self.times.size:
            out = np.where(k >= 0, self.values[np.maximum(k, 0)], self.initial)
        else:
            out = np.full(t_arr.shape, self.initial)
        return out if out.ndim else float(out)

    def eval_right(self, t):
        """Right limit ``c(t+)``."""
        t_arr = np.asarray(t, dtype=float)
        k = np.searchsorted(self.times, t_arr, side="right") - 1
        if self.times.size:
            out = np.where(k >= 0, self.values[np.maximum(k, 0)], self.initial)
        else:
            out = np.full(t_arr.shape, self.initial)
        return out if out.ndim else float(out)

    def increments(self) -> np.ndarray:
        """Jump sizes ``c(t_k+) - c(t_k-)`` at each knot."""
        prev = np.concatenate(([self.initial], self.values[:-1]))
        return self.values - prev

    # arithmetic -----------------------------------------------------------
    def _combine(self, other, op) -> StepCurve:
        if not isinstance(other, StepCurve):
            c = float(other)
            return StepCurve(self.times, op(self.values, c), op(self.initial, c), op(self.at_jump, c))
        times = np.union1d(self.times, other.times)
        return StepCurve(
            times,
            op(self.eval_right(times), other.eval_right(times)),
            op(self.initial, other.initial),
            op(np.asarray(self.eval(times)), np.asarray(other.eval(times))),
        )

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __rsub__(self, other):
        return (-1.0 * self) + other

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return -1.0 * self

    def simplify(self) -> StepCurve:
        """Drop knots where nothing changes."""
        if not self.times.size:
            return self
        prev = np.concatenate(([self.initial], self.values[:-1]))
        keep = (self.values != prev) | (self.at_jump != prev)
        return StepCurve(self.times[keep], self.values[keep], self.initial, self.at_jump[keep])

    def equals(self, other: StepCurve) -> bool:
        """Exact equality as functions (after dropping redundant knots)."""
        a, b = self.simplify(), other.simplify()
        return (
            a.initial == b.initial
            and np.array_equal(a.times, b.times)
            and np.array_equal(a.values, b.values)
            and np.array_equal(a.at_jump, b.at_jump)
        )


def merge_ties(times, weights):
    """Sort `times` and sum `weights` over exactly equal times.

    Summation within a tie follows the stable sort order, so the result is
    reproducible bit for bit.
    """
    times = np.asarray(times, dtype=float).reshape(-1)
    weights = np.broadcast_to(np.asarray(weights, dtype=float), times.shape)
    if not times.size:
        return times.copy(), np.zeros(0)
    order = np.argsort(times, kind="stable")
    t, w = times[order], weights[order]
    uniq, start = np.unique(t, return_index=True)
    return uniq, np.add.reduceat(w, start)


def product_limit(event_times, dN, at_risk: StepCurve) -> StepCurve:
    """Product-limit curve ``prod_{s <= t} (1 - dN(s) / Y(s))``.

    Parameters
    ----------
    event_times : array_like
        Event times, possibly with repeats.
    dN : array_like or float
        Weight of each event (1 for plain counts).
    at_risk : StepCurve
        The risk process ``Y``; evaluated at each distinct event time.

    Raises
    ------
    RiskSetExhausted
        If an event with positive weight meets ``Y(s) <= 0``.
    """
    t, d = merge_ties(event_times, dN)
    keep = d != 0
    t, d = t[keep], d[keep]
    if not t.size:
        return StepCurve.constant(1.0)
    y = np.asarray(at_risk.eval(t), dtype=float)
    bad = y <= 0
    if np.any(bad):
        raise RiskSetExhausted(f"positive event mass with empty risk set at t={t[bad][0]:g}")
    # dN <= Y holds exactly in theory; accumulated rounding in weighted risk
    # sets can push the last factor a few ulps below zero
    surv = np.cumprod(np.maximum(1.0 - d / y, 0.0))
    return StepCurve(t, surv, initial=1.0)


def stieltjes_integrate(integrand: StepCurve, times, increments) -> StepCurve:
    """Cumulative curve ``t -> sum_{u <= t} integrand(u-) * increment(u)``."""
    t, inc = merge_ties(times, increments)
    if not t.size:
        return StepCurve.constant(0.0)
    mass = np.asarray(integrand.eval_left(t), dtype=float) * inc
    return StepCurve(t, np.cumsum(mass), initial=0.0)


def write_curve_csv(curve: StepCurve, path, header=("t", "value"), point_values: bool = False) -> None:
    """Write ``t,value`` rows: the value at 0, then the right limit at each knot.

    With `point_values`, a third column holds the value exactly at each
    knot (relevant for at-risk processes, which are not right-continuous).
    """
    rows = [[0.0, curve.eval_right(0.0), curve.eval(0.0)]]
    for t, v, p in zip(curve.times, curve.values, curve.at_jump):
        if t == 0.0:
            rows[0] = [0.0, v, p]
        else:
            rows.append([t, v, p])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(tuple(header) + (("value_at_t",) if point_values else ()))
        for t, v, p in rows:
            out = [repr(float(t)), repr(float(v))]
            if point_values:
                out.append(repr(float(p)))
            w.writerow(out)


def read_curve_csv(path) -> StepCurve:
    """Inverse of :func:`write_curve_csv` for right-continuous curves."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0][:2]] != ["t", "value"]:
        raise ValidationError(f"{path}: expected a 't,value' header")
    data = np.array([[float(a), float(b)] for a, b in (r[:2] for r in rows[1:])])
    if not data.size:
        raise ValidationError(f"{path}: no rows")
    initial = data[0, 1]
    return StepCurve(data[1:, 0], data[1:, 1], initial=initial)
