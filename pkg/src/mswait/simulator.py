"""Synthetic multi-stage event histories with known full data.

Waiting times follow either

* a **Markov** model -- calendar exit times are chained through
  ``U_next = D^{-1}(D(U_prev) + R)``, ``R ~ U[0, 1 - D(U_prev)]``, so the
  next exit time is a draw from ``D`` conditioned to exceed the previous one;
* a **semi-Markov** model -- independent per-stage waiting-time draws.

A log-normal frailty ``z_i`` (log-mean 0, log-scale ``tau``) multiplies every
waiting time. At each transient stage a subject moves to its first child with
probability ``expit(alpha + beta * w_ij)``, otherwise to the second.

Censoring is ``none``, ``independent`` (one censoring time per subject from
the root stage's distribution) or ``stage-dependent`` (root censoring time
first, then one per deeper stage chained by the same Markov transform).

Randomness: each replicate draws an ``(n, B)`` block of uniforms from a
counter-based Philox stream keyed by ``(seed, n, replicate)``; row ``i``
belongs to subject ``i``. Results therefore depend only on
``(scenario, seed, n, replicate)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy import special, stats

from .errors import InvalidScenario, MissingCensoringParams, ValidationError
from .graph import StageGraph, graph_from_dict, six_stage_graph
from .records import Dataset, write_dataset

__all__ = [
    "Dist",
    "SimScenario",
    "TruthDataset",
    "simulate",
    "markov_chain_next",
    "draw_censoring_times",
    "censor",
    "apply_censoring",
    "empirical_truth",
    "design_scenario",
    "preset",
    "write_truth",
    "DESIGN_PRESETS",
    "load_scenario",
    "scenario_from_dict",
    "subject_uniforms",
]

FAMILIES = ("weibull", "lognormal")
MODELS = ("markov", "semi-markov")
CENSORING = ("none", "independent", "stage-dependent")


@dataclass(frozen=True)
class Dist:
    """Weibull ``(shape, scale)`` or log-normal ``(logmean, logscale)``."""

    family: str
    a: float
    b: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidScenario(f"unknown distribution family {self.family!r}")
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise InvalidScenario("distribution parameters must be finite")
        if self.b <= 0 or (self.family == "weibull" and self.a <= 0):
            raise InvalidScenario(f"invalid {self.family} parameters ({self.a}, {self.b})")

    @property
    def frozen(self):
        if self.family == "weibull":
            return stats.weibull_min(self.a, scale=self.b)
        return stats.lognorm(self.b, scale=np.exp(self.a))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "weibull":
            out = np.exp(-((np.maximum(x, 0.0) / self.b) ** self.a))
        else:
            with np.errstate(divide="ignore"):
                out = special.ndtr((self.a - np.log(np.maximum(x, 0.0))) / self.b)
        return out if out.ndim else float(out)

    def cdf(self, x):
        return 1.0 - self.sf(x)

    def isf(self, q):
        """Inverse survival function ``x`` with ``sf(x) = q``."""
        q = np.maximum(np.asarray(q, dtype=float), np.finfo(float).tiny)
        if self.family == "weibull":
            return self.b * (-np.log(q)) ** (1.0 / self.a)
        return np.exp(self.a - self.b * special.ndtri(q))

    def ppf(self, p):
        return self.isf(1.0 - np.asarray(p, dtype=float))

    def mean(self) -> float:
        return float(self.frozen.mean())

    def to_json(self):
        return {"family": self.family, "params": [self.a, self.b]}

    @classmethod
    def weibull(cls, shape, scale):
        return cls("weibull", float(shape), float(scale))

    @classmethod
    def lognormal(cls, logmean, logscale):
        return cls("lognormal", float(logmean), float(logscale))


WB, LN = Dist.weibull, Dist.lognormal


def markov_chain_next(D: Dist, u_prev, rng=None, r=None):
    """Next calendar event time given the previous one.

    ``U_next = D^{-1}(D(u_prev) + R)`` with ``R ~ U[0, 1 - D(u_prev)]``.
    Pass `r` to force ``R`` (it must lie in ``[0, 1 - D(u_prev))``);
    otherwise it is drawn from `rng`.

    Evaluated as ``isf(sf(u_prev) * (1 - v))`` with ``v = R / sf(u_prev)``,
    which keeps full precision in the upper tail.
    """
    u_prev = np.asarray(u_prev, dtype=float)
    s = D.sf(u_prev)
    if r is None:
        rng = rng if rng is not None else np.random.default_rng()
        v = _open_uniform(rng.random(u_prev.shape))
        out = D.isf(s * (1.0 - v))
    else:
        out = D.isf(s - np.asarray(r, dtype=float))
    return out if np.ndim(out) else float(out)


def _open_uniform(u):
    """Map ``[0, 1)`` draws into ``(0, 1)``."""
    return np.asarray(u, dtype=float) + 2.0 ** -54


@dataclass(frozen=True)
class SimScenario:
    """One simulation design.

    Parameters
    ----------
    waits : mapping stage -> Dist
        Per transient stage: the waiting-time distribution (semi-Markov) or
        the calendar exit-time distribution ``D`` (Markov).
    censor_dists : mapping stage -> Dist
        Censoring distributions; independent censoring uses the root entry.
    """

    name: str = "custom"
    model: str = "semi-markov"
    waits: Mapping[int, Dist] = field(default_factory=dict)
    tau: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    censoring: str = "none"
    censor_dists: Mapping[int, Dist] = field(default_factory=dict)
    level: str | None = None
    n: int = 300
    seed: int | None = None
    graph: StageGraph = field(default_factory=six_stage_graph, compare=False)

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidScenario(f"model must be one of {MODELS}, got {self.model!r}")
        if self.censoring not in CENSORING:
            raise InvalidScenario(f"censoring must be one of {CENSORING}, got {self.censoring!r}")
        if not (np.isfinite(self.tau) and self.tau >= 0):
            raise InvalidScenario("frailty log-scale tau must be >= 0")
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta)):
            raise InvalidScenario("branching coefficients must be finite")
        if int(self.n) < 1:
            raise InvalidScenario("n must be at least 1")
        g = self.graph
        for s in g.transient_stages:
            if s not in self.waits:
                raise InvalidScenario(f"no waiting-time distribution for stage {s}")
            if len(g.successors(s)) > 2:
                raise InvalidScenario(f"stage {s} has more than two children; binary branching only")
        if self.censoring == "independent" and g.root not in self.censor_dists:
            raise MissingCensoringParams(f"independent censoring needs a distribution for root stage {g.root}")
        if self.censoring == "stage-dependent":
            missing = [s for s in g.transient_stages if s not in self.censor_dists]
            if missing:
                raise MissingCensoringParams(f"stage-dependent censoring lacks distributions for stages {missing}")

    @property
    def block(self) -> int:
        """Uniform columns per subject: frailty + (wait, branch, censor) per transient stage."""
        k = 1 + 3 * len(self.graph.transient_stages)
        return -(-k // 4) * 4

    def uncensored(self) -> SimScenario:
        return replace(self, censoring="none", censor_dists={}, level=None, name=self.name + "/uncensored")

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "model": self.model,
            "graph": self.graph.to_dict(),
            "waiting": {str(s): v.to_json() for s, v in sorted(self.waits.items())},
            "frailty": self.tau,
            "branching": {"alpha": self.alpha, "beta": self.beta},
            "censoring": {
                "type": self.censoring,
                "level": self.level,
                "params": {str(s): v.to_json() for s, v in sorted(self.censor_dists.items())},
            },
            "n": int(self.n),
        }
        if self.seed is not None:
            d["seed"] = int(self.seed)
        return d

    def key(self) -> str:
        """Canonical JSON used for caching."""
        d = self.to_dict()
        d.pop("name")
        d.pop("seed", None)
        d.pop("n")
        return json.dumps(d, sort_keys=True)


# --- the six-stage designs ------------------------------------------------

_MARKOV_D = {"weibull": WB(2, 4), "lognormal": LN(0.9, 0.5)}
_SEMI = {
    "weibull": {0: WB(2, 4), 1: WB(3, 4), 3: WB(1, 2)},
    "lognormal": {0: LN(0.9, 0.5), 1: LN(0.8, 0.5), 3: LN(0.7, 0.5)},
}
_CENSOR = {
    ("weibull", "independent", "high"): {0: WB(3, 6)},
    ("weibull", "independent", "low"): {0: WB(3, 9)},
    ("weibull", "stage-dependent", "high"): {0: WB(3, 5), 1: WB(2, 3), 3: WB(2, 2)},
    ("weibull", "stage-dependent", "low"): {0: WB(3, 7), 1: WB(2, 5), 3: WB(2, 3)},
    ("lognormal", "independent", "high"): {0: LN(1, 0.8)},
    ("lognormal", "independent", "low"): {0: LN(1.8, 1)},
    ("lognormal", "stage-dependent", "high"): {0: LN(1, 0.6), 1: LN(0.9, 0.5), 3: LN(0.8, 0.4)},
    ("lognormal", "stage-dependent", "low"): {0: LN(1.8, 0.8), 1: LN(1.2, 0.6), 3: LN(0.6, 0.4)},
}
_FAMILY_ALIASES = {"wb": "weibull", "weibull": "weibull", "ln": "lognormal", "lognormal": "lognormal"}
_CENSOR_ALIASES = {
    "none": "none", "uncensored": "none",
    "indep": "independent", "independent": "independent",
    "dep": "stage-dependent", "stage-dependent": "stage-dependent", "dependent": "stage-dependent",
}
_MODEL_ALIASES = {"markov": "markov", "semi": "semi-markov", "semi-markov": "semi-markov", "semimarkov": "semi-markov"}


def design_scenario(model: str = "markov", family: str = "weibull", censoring: str = "independent",
                   level: str | None = "low", n: int = 300, tau: float = 0.0,
                   alpha: float = 0.0, beta: float = 0.0) -> SimScenario:
    """One of the six-stage designs (Markov / semi-Markov x WB / LN x censoring)."""
    try:
        model = _MODEL_ALIASES[model.lower()]
        family = _FAMILY_ALIASES[family.lower()]
        censoring = _CENSOR_ALIASES[censoring.lower()]
    except KeyError as exc:
        raise InvalidScenario(f"unknown scenario component {exc.args[0]!r}") from None
    if model == "markov":
        waits = {s: _MARKOV_D[family] for s in (0, 1, 3)}
    else:
        waits = dict(_SEMI[family])
    if censoring == "none":
        cens, level = {}, None
    else:
        level = (level or "").lower()
        if level not in ("low", "high"):
            raise InvalidScenario(f"censoring level must be low or high, got {level!r}")
        cens = dict(_CENSOR[(family, censoring, level)])
    fam = "wb" if family == "weibull" else "ln"
    cname = {"none": "none", "independent": "indep", "stage-dependent": "dep"}[censoring]
    name = f"{model}-{fam}-{cname}" + (f"-{level}" if level else "")
    return SimScenario(name=name, model=model, waits=waits, tau=tau, alpha=alpha, beta=beta,
                       censoring=censoring, censor_dists=cens, level=level, n=n)


def _preset_names():
    out = []
    for m in ("markov", "semi"):
        for f in ("wb", "ln"):
            out.append(f"{m}-{f}-none")
            for c in ("indep", "dep"):
                for lv in ("low", "high"):
                    out.append(f"{m}-{f}-{c}-{lv}")
    return tuple(out)


DESIGN_PRESETS = _preset_names()


def preset(name: str, n: int = 300) -> SimScenario:
    parts = name.lower().split("-")
    if parts[0] == "semi" and len(parts) > 1 and parts[1] == "markov":
        parts = ["semi"] + parts[2:]
    if len(parts) not in (3, 4):
        raise InvalidScenario(f"unknown preset {name!r}; known: {', '.join(DESIGN_PRESETS)}")
    level = parts[3] if len(parts) == 4 else None
    return design_scenario(parts[0], parts[1], parts[2], level, n=n)


# --- JSON -----------------------------------------------------------------

def _dist_from_json(obj, default_family=None) -> Dist:
    if isinstance(obj, Mapping):
        fam = obj.get("family", default_family)
        params = obj.get("params")
    else:
        fam, params = default_family, obj
    if fam is None or params is None or len(params) != 2:
        raise InvalidScenario(f"bad distribution {obj!r}")
    fam = _FAMILY_ALIASES.get(str(fam).lower())
    if fam is None:
        raise InvalidScenario(f"unknown distribution family in {obj!r}")
    try:
        return Dist(fam, float(params[0]), float(params[1]))
    except (TypeError, ValueError):
        raise InvalidScenario(f"bad distribution parameters {params!r}") from None


def _stage_dists(obj, graph: StageGraph, stages, default_family=None) -> dict:
    """Accept either a per-stage mapping ``{"stage": dist}`` or one dist shared by `stages`."""
    if isinstance(obj, Mapping) and ("params" in obj or "family" in obj) and not any(k.isdigit() for k in obj):
        fam = obj.get("family", default_family)
        p = obj["params"]
        if isinstance(p, Mapping):
            return {int(s): _dist_from_json(v, fam) for s, v in p.items()}
        d = _dist_from_json(obj, default_family)
        return {s: d for s in stages}
    if isinstance(obj, Mapping):
        return {int(s): _dist_from_json(v, default_family) for s, v in obj.items()}
    raise InvalidScenario(f"bad stage distribution block {obj!r}")


def scenario_from_dict(doc: Mapping) -> SimScenario:
    """Build a scenario from its JSON form (see README for the schema)."""
    if not isinstance(doc, Mapping):
        raise InvalidScenario("scenario must be a JSON object")
    try:
        if "preset" in doc:
            sc = preset(str(doc["preset"]), n=int(doc.get("n", 300)))
            br = doc.get("branching", {})
            sc = replace(sc, tau=float(doc.get("frailty", sc.tau)),
                         alpha=float(br.get("alpha", sc.alpha)), beta=float(br.get("beta", sc.beta)),
                         seed=doc.get("seed"), name=str(doc.get("name", sc.name)))
            return sc
        graph = graph_from_dict(doc["graph"], "scenario graph") if "graph" in doc else six_stage_graph()
        model = _MODEL_ALIASES.get(str(doc.get("model", "semi-markov")).lower())
        if model is None:
            raise InvalidScenario(f"unknown model {doc.get('model')!r}")
        if "waiting" not in doc:
            raise InvalidScenario("scenario needs a 'waiting' block")
        waits = _stage_dists(doc["waiting"], graph, graph.transient_stages)
        cdoc = doc.get("censoring", {"type": "none"})
        ctype = _CENSOR_ALIASES.get(str(cdoc.get("type", "none")).lower())
        if ctype is None:
            raise InvalidScenario(f"unknown censoring type {cdoc.get('type')!r}")
        level = cdoc.get("level")
        if ctype == "none":
            cens = {}
        elif "params" in cdoc:
            shared_stages = [graph.root] if ctype == "independent" else graph.transient_stages
            cens = _stage_dists(cdoc if "family" in cdoc else cdoc["params"], graph, shared_stages)
        else:
            fams = {d.family for d in waits.values()}
            if level is None or len(fams) != 1:
                raise MissingCensoringParams("censoring block needs 'params' (or a level with a single family)")
            cens = dict(_CENSOR.get((fams.pop(), ctype, str(level).lower()), {}))
            if not cens:
                raise MissingCensoringParams(f"no built-in parameters for level {level!r}")
        br = doc.get("branching", {})
        seed = doc.get("seed")
        return SimScenario(
            name=str(doc.get("name", "custom")), model=model, waits=waits,
            tau=float(doc.get("frailty", 0.0)), alpha=float(br.get("alpha", 0.0)), beta=float(br.get("beta", 0.0)),
            censoring=ctype, censor_dists=cens, level=None if level is None else str(level),
            n=int(doc.get("n", 300)), seed=None if seed is None else int(seed), graph=graph,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise InvalidScenario(f"malformed scenario: {exc}") from None


def load_scenario(path) -> SimScenario:
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidScenario(f"{path}: not valid JSON ({exc})") from None
    return scenario_from_dict(doc)


# --- generation -----------------------------------------------------------

def subject_uniforms(seed: int, n: int, rep: int, block: int) -> np.ndarray:
    """``(n, block)`` uniforms in ``(0, 1)`` from the Philox stream of ``(seed, n, rep)``."""
    ss = np.random.SeedSequence([int(seed), int(n), int(rep)])
    key = ss.generate_state(2, dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    return _open_uniform(gen.random((n, block)))


@dataclass(frozen=True)
class TruthDataset:
    """Censored observations together with the complete histories behind them."""

    scenario: SimScenario
    truth: Dataset  # complete data (no censoring)
    observed: Dataset
    censor_times: np.ndarray  # (n, S) per-stage censoring times (inf when uncensored)
    frailty: np.ndarray

    @property
    def dataset(self) -> Dataset:
        return self.observed

    @property
    def censoring_fraction(self) -> float:
        return self.observed.censoring_fraction


def _columns(sc: SimScenario):
    cols = {}
    for k, s in enumerate(sc.graph.transient_stages):
        cols[s] = (1 + 3 * k, 2 + 3 * k, 3 + 3 * k)  # wait, branch, censor
    return cols


def _generate_truth(sc: SimScenario, U: np.ndarray):
    g = sc.graph
    n = U.shape[0]
    S = len(g.stages)
    col = {s: k for k, s in enumerate(g.stages)}
    ucols = _columns(sc)
    z = np.exp(sc.tau * special.ndtri(U[:, 0])) if sc.tau > 0 else np.ones(n)
    entry = np.full((n, S), np.nan)
    exit_ = np.full((n, S), np.nan)
    exited = np.zeros((n, S), dtype=bool)
    dest = np.full((n, S), -1, dtype=np.int64)
    last = np.full(n, g.root, dtype=np.int64)
    raw_cal = np.zeros(n)  # unscaled calendar time (Markov chaining)
    entry[:, col[g.root]] = 0.0
    here = {g.root: np.arange(n)}
    order = [g.root]
    while order:
        s = order.pop(0)
        idx = here.pop(s, np.zeros(0, dtype=np.int64))
        kids = g.successors(s)
        if not kids or not idx.size:
            order.extend(kids)
            continue
        cw, cb, _ = ucols[s]
        D = sc.waits[s]
        if sc.model == "markov":
            nxt_raw = D.isf(D.sf(raw_cal[idx]) * (1.0 - U[idx, cw]))
            nxt_raw = np.maximum(nxt_raw, np.nextafter(raw_cal[idx], np.inf))
            raw_wait = nxt_raw - raw_cal[idx]
            raw_cal[idx] = nxt_raw
        else:
            raw_wait = D.isf(U[idx, cw])
        w = z[idx] * raw_wait
        T = entry[idx, col[s]]
        if sc.model == "markov":
            U_exit = z[idx] * raw_cal[idx]
        else:
            U_exit = T + w
        exit_[idx, col[s]] = U_exit
        exited[idx, col[s]] = True
        if len(kids) == 1:
            moves = [(kids[0], np.ones(idx.size, dtype=bool))]
        else:
            first = U[idx, cb] < special.expit(sc.alpha + sc.beta * w)
            moves = [(kids[0], first), (kids[1], ~first)]
        for child, m in moves:
            sub = idx[m]
            dest[sub, col[s]] = child
            entry[sub, col[child]] = U_exit[m]
            last[sub] = child
            here[child] = sub
        order.extend(kids)
    # terminal visits: zero-length rows
    for s in g.terminal_stages:
        c = col[s]
        v = ~np.isnan(entry[:, c])
        exit_[v, c] = entry[v, c]
    return z, entry, exit_, exited, dest, last


def draw_censoring_times(sc: SimScenario, U: np.ndarray) -> np.ndarray:
    """Per-stage censoring times ``(n, S)``; ``inf`` when censoring is off.

    Independent censoring repeats one draw across stages. Stage-dependent
    censoring draws the root time from its distribution and each deeper
    stage's time from its own distribution conditioned to exceed the
    parent's censoring time.
    """
    g = sc.graph
    n = U.shape[0]
    S = len(g.stages)
    col = {s: k for k, s in enumerate(g.stages)}
    C = np.full((n, S), np.inf)
    if sc.censoring == "none":
        return C
    ucols = _columns(sc)
    root_u = U[:, ucols[g.root][2]]
    if sc.censoring == "independent":
        C[:] = sc.censor_dists[g.root].isf(root_u)[:, None]
        return C
    C[:, col[g.root]] = sc.censor_dists[g.root].isf(root_u)
    for s in _bfs(g):
        if s == g.root:
            continue
        p = g.predecessor(s)
        if g.is_terminal(s):
            C[:, col[s]] = C[:, col[p]]
            continue
        D = sc.censor_dists[s]
        prev = C[:, col[p]]
        nxt = D.isf(D.sf(prev) * (1.0 - U[:, ucols[s][2]]))
        C[:, col[s]] = np.maximum(nxt, prev)
    return C


def _bfs(g: StageGraph):
    out, q = [], [g.root]
    while q:
        s = q.pop(0)
        out.append(s)
        q.extend(g.successors(s))
    return out


def censor(truth: Dataset, C: np.ndarray) -> Dataset:
    """Apply per-stage censoring times `C` to complete data.

    A subject is censored in the first stage ``l`` of its path with
    ``C[i, l] < U_il``; an exit exactly at the censoring time counts as
    observed. Terminal stages are never censored.
    """
    g = truth.graph
    n = truth.n
    entry = truth.entry.copy()
    exit_ = truth.exit.copy()
    exited = truth.exited.copy()
    dest = truth.dest.copy()
    last = truth.last_stage.copy()
    censored = np.zeros(n, dtype=bool)
    for s in _bfs(g):
        c = truth.col[s]
        if g.is_terminal(s):
            continue
        live = ~censored & ~np.isnan(entry[:, c])
        hit = live & (C[:, c] < exit_[:, c])
        if not hit.any():
            continue
        # entry into s was observed: C >= U_parent = entry (tie counts as observed)
        exit_[hit, c] = np.maximum(C[hit, c], entry[hit, c])
        exited[hit, c] = False
        dest[hit, c] = -1
        last[hit] = s
        censored |= hit
        for d in g.stages:
            if d != s and g.is_ancestor(s, d):
                dc = truth.col[d]
                entry[hit, dc] = np.nan
                exit_[hit, dc] = np.nan
                exited[hit, dc] = False
                dest[hit, dc] = -1
    return Dataset(g, truth.subject_ids, entry, exit_, exited, dest, censored, last)


def apply_censoring(truth: TruthDataset | Dataset, sc: SimScenario, U: np.ndarray) -> Dataset:
    """Censor complete data using the censoring columns of the uniform block `U`."""
    ds = truth.truth if isinstance(truth, TruthDataset) else truth
    return censor(ds, draw_censoring_times(sc, U))


def simulate(sc: SimScenario, seed: int | None = None, n: int | None = None, rep: int = 0) -> TruthDataset:
    """Simulate one replicate of `sc`.

    Parameters
    ----------
    seed : int, optional
        Master seed (falls back to ``sc.seed``; one of the two is required).
    n : int, optional
        Sample size (defaults to ``sc.n``).
    rep : int
        Replicate index; each ``(seed, n, rep)`` has its own stream.
    """
    seed = sc.seed if seed is None else seed
    if seed is None:
        raise InvalidScenario("a seed is required")
    if int(seed) < 0:
        raise InvalidScenario("seed must be nonnegative")
    n = int(sc.n if n is None else n)
    if n < 1:
        raise InvalidScenario("n must be at least 1")
    U = subject_uniforms(seed, n, rep, sc.block)
    z, entry, exit_, exited, dest, last = _generate_truth(sc, U)
    ids = [str(i + 1) for i in range(n)]
    truth = Dataset(sc.graph, ids, entry, exit_, exited, dest, np.zeros(n, dtype=bool), last)
    C = draw_censoring_times(sc, U)
    observed = censor(truth, C)
    return TruthDataset(sc, truth, observed, C, z)


def write_truth(td: TruthDataset, path) -> None:
    """Complete-data view in the subject CSV layout."""
    write_dataset(td.truth, path)


def empirical_truth(sc: SimScenario, targets, n_large: int = 10_000, seed: int = 0, rep: int = 0) -> dict:
    """Empirical-regime curves of `targets` on an uncensored simulation of size `n_large`."""
    from .estimators import StageFit, Target

    td = simulate(sc.uncensored(), seed=seed, n=n_large, rep=rep)
    fit = StageFit(td.truth, "empirical")
    out = {}
    for t in targets:
        t = Target.parse(t) if isinstance(t, str) else t
        out[t] = t.evaluate(fit)
    return out
