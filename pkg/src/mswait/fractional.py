"""Fractional observations: how likely an upstream-censored subject was to
reach a target stage.

For target stage ``j`` a subject gets

* ``psi = 1`` if it was observed entering ``j``;
* ``psi = 0`` if it entered a stage off the root path of ``j`` (it can no
  longer reach ``j``);
* otherwise, censored in stage ``c`` on that path after waiting ``w`` there,
  ``psi = [P_{c,c+}(inf) - P_{c,c+}(w)] * prod P_{a,b}(inf)`` where ``c+`` is
  the next stage toward ``j`` and the product runs over the path edges from
  ``c+`` down to ``j``. The value is clamped to ``[0, 1]``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import MissingIncidenceCurve
from .graph import StageGraph
from .records import Dataset, SubjectRecord
from .stepfun import StepCurve

__all__ = [
    "FractionalAssignment",
    "FractionalVector",
    "fractional_observation",
    "fractional_vector",
    "OBSERVED",
    "OFF_PATH",
    "CENSORED_UPSTREAM",
]

OBSERVED = "observed-entry"
OFF_PATH = "off-path"
CENSORED_UPSTREAM = "censored-upstream"


@dataclass(frozen=True)
class FractionalAssignment:
    subject_id: str
    target: int
    value: float
    provenance: str
    raw: float  # value before clamping


def _curve(incidence: Mapping, a: int, b: int) -> StepCurve:
    try:
        return incidence[(a, b)]
    except KeyError:
        raise MissingIncidenceCurve(f"no incidence curve for edge {a}->{b}") from None


def _tail_product(graph: StageGraph, start: int, j: int, incidence: Mapping) -> float:
    prod = 1.0
    for a, b in graph.path_edges(start, j):
        prod *= _curve(incidence, a, b).final
    return prod


def fractional_observation(rec: SubjectRecord, j: int, graph: StageGraph, incidence: Mapping) -> FractionalAssignment:
    """Fractional observation of a single subject for target stage `j`."""
    path = graph.path_from_root(j)
    if rec.gamma(j):
        return FractionalAssignment(rec.subject_id, j, 1.0, OBSERVED, 1.0)
    last = rec.last_stage
    if not rec.censored or last not in path:
        return FractionalAssignment(rec.subject_id, j, 0.0, OFF_PATH, 0.0)
    nxt = path[path.index(last) + 1]
    P = _curve(incidence, last, nxt)
    wait = rec.visits[-1].waiting_time
    raw = (P.final - float(P.eval(wait))) * _tail_product(graph, nxt, j, incidence)
    return FractionalAssignment(rec.subject_id, j, float(np.clip(raw, 0.0, 1.0)), CENSORED_UPSTREAM, raw)


@dataclass(frozen=True)
class FractionalVector:
    """Fractional observations of every subject for one target stage."""

    target: int
    subject_ids: tuple[str, ...]
    values: np.ndarray
    raw: np.ndarray
    provenance: np.ndarray  # object array of provenance labels

    def __len__(self):
        return self.values.size

    def assignments(self) -> list[FractionalAssignment]:
        return [
            FractionalAssignment(s, self.target, float(v), str(p), float(r))
            for s, v, p, r in zip(self.subject_ids, self.values, self.provenance, self.raw)
        ]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("subject_id", "target_stage", "psi", "provenance", "psi_unclamped"))
            for s, v, p, r in zip(self.subject_ids, self.values, self.provenance, self.raw):
                w.writerow((s, self.target, repr(float(v)), p, repr(float(r))))


def fractional_vector(ds: Dataset, j: int, graph: StageGraph | None = None, incidence: Mapping | None = None) -> FractionalVector:
    """Vectorized :func:`fractional_observation` over all subjects of `ds`."""
    graph = graph or ds.graph
    incidence = incidence or {}
    path = graph.path_from_root(j)
    n = ds.n
    raw = np.zeros(n)
    prov = np.full(n, OFF_PATH, dtype=object)
    entered = ~np.isnan(ds.entry[:, ds.col[j]])
    raw[entered] = 1.0
    prov[entered] = OBSERVED
    for pos, c in enumerate(path[:-1]):
        m = ds.censored & (ds.last_stage == c)
        if not m.any():
            continue
        nxt = path[pos + 1]
        P = _curve(incidence, c, nxt)
        col = ds.col[c]
        wait = ds.exit[m, col] - ds.entry[m, col]
        raw[m] = (P.final - np.asarray(P.eval(wait))) * _tail_product(graph, nxt, j, incidence)
        prov[m] = CENSORED_UPSTREAM
    return FractionalVector(j, ds.subject_ids, np.clip(raw, 0.0, 1.0), raw, prov)
