"""Small-dataset builders and hypothesis strategies shared by the tests."""

from __future__ import annotations

import warnings

import numpy as np
from hypothesis import strategies as st

from oracle import Oracle, probe_times

from mswait.censor_weights import aalen_censor_weights, km_censor_weights
from mswait.estimators import StageFit
from mswait.graph import six_stage_graph
from mswait.records import Dataset, StageVisit, SubjectRecord


def subject(sid, steps, censored=False, t0=0.0):
    """Build a record from ``[(stage, wait), ..., terminal]``.

    Each ``(stage, wait)`` pair is a visit; consecutive pairs are observed
    transitions. A trailing bare integer is the terminal stage entered. With
    ``censored=True`` the final pair is the visit in which follow-up ended.
    """
    visits = []
    t = t0
    items = list(steps)
    terminal = items.pop() if items and isinstance(items[-1], int) else None
    for k, (s, w) in enumerate(items):
        last = k == len(items) - 1
        if last and terminal is None:
            visits.append(StageVisit(s, t, t + w, False))
        else:
            nxt = terminal if last else items[k + 1][0]
            visits.append(StageVisit(s, t, t + w, True, nxt))
        t += w
    if terminal is not None:
        visits.append(StageVisit(terminal, t, t, False))
    status = "censored" if censored else "terminal"
    return SubjectRecord(str(sid), tuple(visits), status)


def dataset(graph, subjects):
    return Dataset.from_records(graph, subjects)


def fig1():
    return six_stage_graph()


# --- hand fixtures (at most six subjects each) ----------------------------

def tiny_three():
    """Two subjects 1 -> 3 -> 5 (waits in 1: 1, 2; in 3: 1, 1) and one 1 -> 4 (wait 1)."""
    g = fig1()
    return dataset(g, [
        subject(1, [(0, 0.5), (1, 1.0), (3, 1.0), 5]),
        subject(2, [(0, 0.5), (1, 2.0), (3, 1.0), 5]),
        subject(3, [(0, 0.5), (1, 1.0), 4]),
    ])


def tiny_censored():
    """Six subjects with censoring in stages 0, 1 and 3 and a tie between an
    exit and a censoring time."""
    g = fig1()
    return dataset(g, [
        subject(1, [(0, 1.0), (1, 1.0), (3, 2.0), 5]),
        subject(2, [(0, 2.0), (1, 0.5)], censored=True),
        subject(3, [(0, 1.5), 2]),
        subject(4, [(0, 0.5), (1, 2.0), (3, 1.0)], censored=True),
        subject(5, [(0, 3.0)], censored=True),
        subject(6, [(0, 1.0), (1, 1.5), (3, 0.5), 5]),
    ])


def tiny_ties():
    """Uncensored; tied waits within and across stages, including a zero wait."""
    g = fig1()
    return dataset(g, [
        subject(1, [(0, 1.0), (1, 1.0), (3, 1.0), 5]),
        subject(2, [(0, 1.0), (1, 1.0), 4]),
        subject(3, [(0, 1.0), 2]),
        subject(4, [(0, 2.0), (1, 0.0), (3, 2.0), 5]),
        subject(5, [(0, 2.0), (1, 3.0), 4]),
    ])


def tiny_censor_heavy():
    """Censoring at the same calendar time in different stages."""
    g = fig1()
    return dataset(g, [
        subject(1, [(0, 1.0), (1, 1.0)], censored=True),
        subject(2, [(0, 2.0)], censored=True),
        subject(3, [(0, 0.5), (1, 0.5), (3, 1.0)], censored=True),
        subject(4, [(0, 0.5), (1, 1.0), (3, 2.0), 5]),
        subject(5, [(0, 1.0), (1, 2.5), 4]),
    ])


UNCENSORED_FIXTURES = {"tiny_three": tiny_three, "tiny_ties": tiny_ties}
CENSORED_FIXTURES = {"tiny_censored": tiny_censored, "tiny_censor_heavy": tiny_censor_heavy}
ALL_FIXTURES = {**UNCENSORED_FIXTURES, **CENSORED_FIXTURES}


# --- oracle comparison ---------------------------------------------------

def oracle_gap(ds, regime, censoring="km"):
    """Largest absolute gap between the package estimates and :class:`oracle.Oracle`
    over every stage curve, on the oracle's probe times."""
    recs = list(ds.records)
    g = ds.graph
    if regime == "empirical":
        w = None
    elif censoring == "km":
        w = km_censor_weights(ds)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            w = aalen_censor_weights(ds)[1]
    fit = StageFit(ds, regime, weights=w)
    o = Oracle(recs, g, regime, censoring)
    t = np.array(probe_times(recs))
    worst = 0.0
    for j in g.transient_stages:
        worst = max(worst, np.max(np.abs(fit.survival(j).eval(t) - [o.S(j, x) for x in t])))
        for c in g.successors(j):
            worst = max(worst, np.max(np.abs(fit.incidence(j, c).eval(t) - [o.P(j, c, x) for x in t])))
        for k in g.path_from_root(j):
            worst = max(worst, np.max(np.abs(fit.waiting_distribution(j, k).eval(t)
                                             - [o.F(j, k, x) for x in t])))
            for c in g.successors(j):
                worst = max(worst, np.max(np.abs(fit.conditional_incidence(j, c, k).eval(t)
                                                 - [o.Pk(j, c, k, x) for x in t])))
    return worst


# --- hypothesis -----------------------------------------------------------

WAITS = st.sampled_from([0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.5])


@st.composite
def histories(draw, graph=None, min_subjects=1, max_subjects=6, censoring=True):
    """Random valid subject histories on `graph` (default: the six-stage tree).

    Waits come from a small set so that ties are common.
    """
    g = graph or fig1()
    n = draw(st.integers(min_subjects, max_subjects))
    subjects = []
    for i in range(n):
        steps = []
        s = g.root
        censored = False
        while True:
            w = draw(WAITS)
            if w == 0.0 and draw(st.booleans()):
                w = 1.0  # keep zero waits in play but not dominant
            steps.append((s, w))
            if censoring and draw(st.integers(0, 3)) == 0:
                censored = True
                break
            kids = g.successors(s)
            nxt = draw(st.sampled_from(kids))
            if g.is_terminal(nxt):
                steps.append(nxt)
                break
            s = nxt
        if censored and steps[-1][1] == 0.0 and len(steps) == 1:
            steps[-1] = (steps[-1][0], 1.0)
        subjects.append(subject(i + 1, steps, censored=censored))
    return Dataset.from_records(g, subjects)
