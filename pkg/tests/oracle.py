"""Brute-force reference evaluator used as a test oracle.

Everything here works on plain Python lists of subject records and evaluates
each quantity by a direct sum or product over sorted waiting times, without
touching the package's step-curve machinery. It is deliberately slow and
literal.
"""

from __future__ import annotations

import math


def _visits(records, j):
    """(subject index, entry, wait, exited, dest, exit) for every visit of `j`."""
    out = []
    for i, rec in enumerate(records):
        for v in rec.visits:
            if v.stage == j:
                out.append((i, v.entry, v.exit - v.entry, v.exited, v.to, v.exit))
    return out


def unit_weight(i, t, left=False):
    return 1.0


def km_censoring_weight(records, eps=0.01):
    """Reversed-role Kaplan-Meier ``K(t)`` shared by all subjects, floored at `eps`."""
    final = [rec.final_time for rec in records]
    cens_times = sorted({rec.final_time for rec in records if rec.censored})
    factors = []
    for c in cens_times:
        d = sum(1 for rec in records if rec.censored and rec.final_time == c)
        r = sum(1 for T in final if T >= c)
        factors.append((c, 1.0 - d / r))

    def K(i, t, left=False):
        p = 1.0
        for c, f in factors:
            if c < t or (c == t and not left):
                p *= f
        return max(p, eps)

    return K


def stage_at_left(rec, c):
    """Stage occupied just before calendar time `c` (c > 0)."""
    for v in rec.visits:
        if v.entry < c <= v.exit:
            return v.stage
    return rec.visits[0].stage if c <= rec.visits[0].exit else rec.visits[-1].stage


def stratified_censoring_weights(records, eps=0.01):
    """Per-subject ``K_i`` from a stage-stratified Nelson-Aalen censoring hazard.

    At each censoring time ``c`` the hazard for stage ``m`` is the number of
    subjects censored at ``c`` while in ``m`` divided by the number at risk
    (follow-up ``>= c``) who occupy ``m`` just before ``c``.
    """
    cens_times = sorted({rec.final_time for rec in records if rec.censored})
    table = []
    for c in cens_times:
        risk = [k for k, rec in enumerate(records) if rec.final_time >= c]
        haz = {}
        for k in risk:
            m = stage_at_left(records[k], c)
            if m in haz:
                continue
            r = sum(1 for q in risk if stage_at_left(records[q], c) == m)
            d = sum(1 for q in risk if records[q].censored and records[q].final_time == c
                    and stage_at_left(records[q], c) == m)
            haz[m] = min(max(d / r, 0.0), 1.0)
        table.append((c, haz))

    def K(i, t, left=False):
        rec = records[i]
        p = 1.0
        for c, haz in table:
            if c > rec.final_time:
                break
            if c < t or (c == t and not left):
                p *= 1.0 - haz[stage_at_left(rec, c)]
        return max(p, eps)

    return K


class StageOracle:
    """Direct evaluation of ``S_j``, ``P_jj'`` for one stage under weights ``K``.

    Parameters
    ----------
    records : list of SubjectRecord
    j : int
    K : callable ``(i, t, left) -> float``
    extra : callable ``t -> float``, optional
        Additional at-risk mass (the fractional term of the FRE regime).
    """

    def __init__(self, records, j, K=unit_weight, extra=None):
        self.j = j
        self.vis = _visits(records, j)
        self.K = K
        self.extra = extra
        ex = sorted({w for (_, _, w, e, _, _) in self.vis if e})
        self.events = []
        for s in ex:
            y = self.Y(s)
            if y <= 0:
                break  # risk set exhausted: later increments are skipped
            self.events.append(s)

    def Y(self, s):
        y = 0.0
        for i, T, w, _, _, _ in self.vis:
            if w >= s:
                y += 1.0 / self.K(i, T + s)
        if self.extra is not None:
            y += self.extra(s)
        return y

    def dN(self, s, dest=None):
        tot = 0.0
        for i, _, w, e, d, U in self.vis:
            if e and w == s and (dest is None or d == dest):
                tot += 1.0 / self.K(i, U, left=True)
        return tot

    def S(self, t, left=False):
        p = 1.0
        for s in self.events:
            if s < t or (s == t and not left):
                p *= 1.0 - self.dN(s) / self.Y(s)
        return p

    def P(self, dest, t):
        tot = 0.0
        for s in self.events:
            if s <= t:
                tot += self.S(s, left=True) * self.dN(s, dest) / self.Y(s)
        return tot

    def P_inf(self, dest):
        return self.P(dest, math.inf)


class Oracle:
    """All-stage oracle for one dataset and one regime.

    regime : {"empirical", "ipcw", "fre"}
    censoring : {"km", "stratified"}
    """

    def __init__(self, records, graph, regime="empirical", censoring="km", eps=0.01):
        self.records = list(records)
        self.graph = graph
        self.regime = regime
        if regime == "empirical":
            self.K = unit_weight
        elif censoring == "km":
            self.K = km_censoring_weight(self.records, eps)
        else:
            self.K = stratified_censoring_weights(self.records, eps)
        self._stage = {}
        self._base = Oracle(records, graph, "ipcw", censoring, eps) if regime == "fre" else None

    def stage(self, j):
        if j not in self._stage:
            extra = None
            if self.regime == "fre":
                base = self._base
                mass = sum(base.psi(rec, j) for rec in self.records if self._upstream(rec, j))
                if mass:
                    bs = base.stage(j)
                    extra = lambda t: mass * bs.S(t)  # noqa: E731
            self._stage[j] = StageOracle(self.records, j, self.K, extra)
        return self._stage[j]

    def _upstream(self, rec, j):
        return rec.censored and rec.last_stage in self.graph.path_from_root(j)[:-1]

    def psi(self, rec, j):
        path = self.graph.path_from_root(j)
        if any(v.stage == j for v in rec.visits):
            return 1.0
        if not rec.censored or rec.last_stage not in path:
            return 0.0
        c = rec.last_stage
        nxt = path[path.index(c) + 1]
        w = rec.visits[-1].exit - rec.visits[-1].entry
        st = self.stage(c)
        val = st.P_inf(nxt) - st.P(nxt, w)
        for a, b in zip(path[path.index(nxt):-1], path[path.index(nxt) + 1:]):
            val *= self.stage(a).P_inf(b)
        return min(max(val, 0.0), 1.0)

    def path_product(self, k, j):
        path = self.graph.unique_path(k, j)
        p = 1.0
        for a, b in zip(path[:-1], path[1:]):
            p *= self.stage(a).P_inf(b)
        return p

    def S(self, j, t):
        return self.stage(j).S(t)

    def P(self, j, dest, t):
        return self.stage(j).P(dest, t)

    def F(self, j, k, t):
        return (1.0 - self.stage(j).S(t)) * self.path_product(k, j)

    def Pk(self, j, dest, k, t):
        return self.stage(j).P(dest, t) * self.path_product(k, j)


def probe_times(records):
    """Every waiting time and calendar time in the data, their midpoints, and
    points beyond the largest."""
    pts = {0.0}
    for rec in records:
        for v in rec.visits:
            pts.update((v.exit - v.entry, v.entry, v.exit))
    pts = sorted(pts)
    mids = [(a + b) / 2 for a, b in zip(pts[:-1], pts[1:])]
    return sorted(set(pts) | set(mids) | {pts[-1] + 1.0, 1e9})
