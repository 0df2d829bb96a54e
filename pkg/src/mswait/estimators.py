"""Stage waiting-time survival, cumulative incidence and their conditional
versions under the empirical, IPCW and FRE regimes.

For stage ``j`` with counting system ``(N_jj', N_j, Y_j)``:

* ``S_j(t) = prod_{s <= t} (1 - dN_j(s) / Y_j(s))`` (product limit),
* ``P_jj'(t) = sum_{u <= t} S_j(u-) dN_jj'(u) / Y_j(u)`` (Aalen-Johansen),

and for an ancestor ``k`` of ``j`` with path edges ``(a, b)`` from ``k`` to
``j``:

* ``F_{j|k}(t) = [1 - S_j(t)] * prod P_ab(inf)``,
* ``P_{jj'|k}(t) = P_jj'(t) * prod P_ab(inf)``.

``P(inf)`` is the curve value after its last jump.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from .censor_weights import DEFAULT_FLOOR, censor_weights
from .counting import CountingSystem, empirical_counts, fre_risk_set, ipcw_counts
from .errors import TruncationWarning, UnknownDestination, ValidationError
from .fractional import fractional_vector
from .graph import StageGraph
from .records import Dataset
from .stepfun import StepCurve, merge_ties, product_limit, stieltjes_integrate

__all__ = [
    "REGIMES",
    "waiting_survival",
    "cumulative_incidence",
    "StageFit",
    "EstimateBundle",
    "Target",
    "conditional_waiting_distribution",
    "conditional_incidence",
]

REGIMES = ("empirical", "ipcw", "fre")


def _cutoff(cs: CountingSystem, warn: bool = True) -> float:
    """First exit time at which the risk set is empty (``inf`` if none)."""
    t, d = merge_ties(cs.exit_waits, cs.exit_weights)
    t = t[d != 0]
    if not t.size:
        return np.inf
    bad = np.flatnonzero(np.asarray(cs.at_risk(t), dtype=float) <= 0)
    if not bad.size:
        return np.inf
    cut = t[bad[0]]
    if warn:
        warnings.warn(
            f"stage {cs.stage}: risk set empty at waiting time {cut:g}; "
            f"{t.size - bad[0]} later increment(s) skipped",
            TruncationWarning,
            stacklevel=3,
        )
    return float(cut)


def _events(cs: CountingSystem, mask, cut: float):
    t, d = merge_ties(cs.exit_waits[mask], cs.exit_weights[mask])
    keep = (d != 0) & (t < cut)
    t, d = t[keep], d[keep]
    return t, d, np.asarray(cs.at_risk(t), dtype=float)


def waiting_survival(cs: CountingSystem) -> StepCurve:
    """Product-limit survival of the stage waiting time."""
    t, d, y = _events(cs, slice(None), _cutoff(cs))
    if not t.size:
        return StepCurve.constant(1.0)
    return product_limit(t, d, StepCurve(t, y, initial=1.0))


def cumulative_incidence(cs: CountingSystem, dest: int, S: StepCurve | None = None) -> StepCurve:
    """Aalen-Johansen cumulative incidence of the transition ``stage -> dest``."""
    if dest not in cs.children:
        raise UnknownDestination(f"stage {dest} is not a child of stage {cs.stage}")
    if S is None:
        S = waiting_survival(cs)
    t, d, y = _events(cs, cs.exit_dest == dest, _cutoff(cs, warn=False))
    return stieltjes_integrate(S, t, d / y)


class StageFit:
    """Per-stage curves for one dataset and regime, computed lazily and cached.

    Parameters
    ----------
    ds : Dataset
    regime : {"empirical", "ipcw", "fre"}
    weights : optional
        Censoring weights (anything with ``weight_at``/``weight_at_left``).
        Built from `censoring` and `eps` when omitted.
    censoring : {"independent", "stage-dependent"}
        Selects Kaplan-Meier or Aalen censoring weights.
    eps : float
        Weight floor.
    base : StageFit, optional
        IPCW fit supplying the survival and incidence curves used for the
        fractional observations (FRE only). Built on demand.
    """

    def __init__(self, ds: Dataset, regime: str = "ipcw", weights=None,
                 censoring: str = "independent", eps: float = DEFAULT_FLOOR, base: StageFit | None = None):
        if regime not in REGIMES:
            raise ValidationError(f"unknown regime {regime!r}; expected one of {REGIMES}")
        self.ds = ds
        self.graph = ds.graph
        self.regime = regime
        if regime != "empirical" and weights is None:
            weights = censor_weights(ds, censoring, eps)
        self.weights = weights
        if regime == "fre" and base is None:
            base = StageFit(ds, "ipcw", weights=weights)
        self.base = base
        self._counts: dict = {}
        self._surv: dict = {}
        self._inc: dict = {}
        self._psi: dict = {}

    def counts(self, j: int) -> CountingSystem:
        if j not in self._counts:
            if self.regime == "empirical":
                cs = empirical_counts(self.ds, j)
            elif self.regime == "ipcw":
                cs = ipcw_counts(self.ds, self.weights, j)
            else:
                b = self.base.counts(j)
                Yf = fre_risk_set(self.ds, self.weights, self.psi(j).values, self.base.survival(j), j, Y=b.Y)
                cs = b.with_at_risk(Yf, "fre")
            self._counts[j] = cs
        return self._counts[j]

    def psi(self, j: int):
        """Fractional observations for target `j` from the IPCW base curves."""
        if j not in self._psi:
            src = self.base if self.base is not None else self
            path = self.graph.path_from_root(j)
            inc = {(a, b): src.incidence(a, b) for a, b in zip(path[:-1], path[1:])}
            self._psi[j] = fractional_vector(self.ds, j, self.graph, inc)
        return self._psi[j]

    def survival(self, j: int) -> StepCurve:
        if j not in self._surv:
            self._surv[j] = waiting_survival(self.counts(j))
        return self._surv[j]

    def incidence(self, j: int, dest: int) -> StepCurve:
        if (j, dest) not in self._inc:
            self._inc[(j, dest)] = cumulative_incidence(self.counts(j), dest, self.survival(j))
        return self._inc[(j, dest)]

    def branch_probability(self, a: int, b: int) -> float:
        return self.incidence(a, b).final

    def path_product(self, k: int, j: int) -> tuple[float, dict]:
        """``prod P_ab(inf)`` over the path edges from `k` to `j`."""
        prod, parts = 1.0, {}
        for a, b in self.graph.path_edges(k, j):
            p = self.branch_probability(a, b)
            parts[(a, b)] = p
            prod *= p
        return prod, parts

    def waiting_distribution(self, j: int, k: int) -> StepCurve:
        prod, _ = self.path_product(k, j)
        S = self.survival(j)
        return StepCurve(S.times, (1.0 - S.values) * prod, (1.0 - S.initial) * prod)

    def conditional_incidence(self, j: int, dest: int, k: int) -> StepCurve:
        prod, _ = self.path_product(k, j)
        P = self.incidence(j, dest)
        return StepCurve(P.times, P.values * prod, P.initial * prod)


_TARGET_RE = re.compile(r"^\s*([FP])\s*:\s*(-?\d+)\s*(?:>\s*(-?\d+)\s*)?\|\s*(-?\d+)\s*$")


@dataclass(frozen=True)
class Target:
    """An estimation target: ``F_{stage|frm}`` or ``P_{stage,dest|frm}``.

    Text form: ``"F:3|1"`` or ``"P:3>5|1"``.
    """

    quantity: str
    stage: int
    frm: int
    dest: int | None = None

    def __post_init__(self):
        if self.quantity not in ("F", "P"):
            raise ValidationError(f"quantity must be F or P, got {self.quantity!r}")
        if (self.quantity == "P") != (self.dest is not None):
            raise ValidationError("P targets need a destination; F targets must not have one")

    @classmethod
    def parse(cls, text: str) -> Target:
        m = _TARGET_RE.match(text)
        if not m:
            raise ValidationError(f"bad target {text!r}; expected e.g. 'F:3|1' or 'P:3>5|1'")
        q, j, d, k = m.groups()
        return cls(q, int(j), int(k), None if d is None else int(d))

    @property
    def label(self) -> str:
        if self.quantity == "F":
            return f"F:{self.stage}|{self.frm}"
        return f"P:{self.stage}>{self.dest}|{self.frm}"

    def __str__(self):
        return self.label

    def evaluate(self, fit: StageFit) -> StepCurve:
        if self.quantity == "F":
            return fit.waiting_distribution(self.stage, self.frm)
        return fit.conditional_incidence(self.stage, self.dest, self.frm)


@dataclass
class EstimateBundle:
    """A conditional estimate together with the pieces it was built from."""

    regime: str
    target: Target
    curve: StepCurve
    components: dict = field(default_factory=dict)
    branch_probabilities: dict = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    def sidecar(self) -> dict:
        return {
            "regime": self.regime,
            "target": self.target.label,
            "quantity": self.target.quantity,
            "stage": self.target.stage,
            "from": self.target.frm,
            "to": self.target.dest,
            "path_product": float(np.prod(list(self.branch_probabilities.values()))) if self.branch_probabilities else 1.0,
            "branch_probabilities": {f"{a}->{b}": v for (a, b), v in self.branch_probabilities.items()},
            "warnings": list(self.warnings),
        }

    def write_sidecar(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.sidecar(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _bundle(ds, graph, regime, target: Target, weights, censoring, eps, fit) -> EstimateBundle:
    if graph is not None and graph != ds.graph:
        raise ValidationError("graph does not match the dataset's graph")
    g: StageGraph = ds.graph
    g.unique_path(target.frm, target.stage)  # NoPath early
    if target.dest is not None and target.dest not in g.successors(target.stage):
        raise UnknownDestination(f"stage {target.dest} is not a child of stage {target.stage}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TruncationWarning)
        if fit is None:
            fit = StageFit(ds, regime, weights=weights, censoring=censoring, eps=eps)
        curve = target.evaluate(fit)
        _, parts = fit.path_product(target.frm, target.stage)
        comps = {f"S_{target.stage}": fit.survival(target.stage)}
        if target.dest is not None:
            comps[f"P_{target.stage}{target.dest}"] = fit.incidence(target.stage, target.dest)
        for a, b in parts:
            comps[f"P_{a}{b}"] = fit.incidence(a, b)
    msgs = tuple(str(w.message) for w in caught if issubclass(w.category, TruncationWarning))
    for w in caught:
        if not issubclass(w.category, TruncationWarning):
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    for m in msgs:
        warnings.warn(m, TruncationWarning, stacklevel=3)
    return EstimateBundle(fit.regime, target, curve, comps, parts, msgs)


def conditional_waiting_distribution(ds: Dataset, graph=None, regime: str = "ipcw", j: int = 0, k: int = 0, *,
                                     weights=None, censoring: str = "independent",
                                     eps: float = DEFAULT_FLOOR, fit: StageFit | None = None) -> EstimateBundle:
    """``F_{j|k}``: probability of entering `j` and leaving it within ``t``, given `k` was visited."""
    return _bundle(ds, graph, regime, Target("F", j, k), weights, censoring, eps, fit)


def conditional_incidence(ds: Dataset, graph=None, regime: str = "ipcw", j: int = 0, dest: int = 0, k: int = 0, *,
                          weights=None, censoring: str = "independent",
                          eps: float = DEFAULT_FLOOR, fit: StageFit | None = None) -> EstimateBundle:
    """``P_{j dest|k}``: cumulative incidence of ``j -> dest`` given `k` was visited."""
    return _bundle(ds, graph, regime, Target("P", j, k, dest), weights, censoring, eps, fit)
