import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import dataset, histories, subject, tiny_censor_heavy
from oracle import km_censoring_weight, stratified_censoring_weights
from mswait.censor_weights import (
    KnownCensoringWeights,
    aalen_censor_weights,
    censor_weights,
    stage_at_left,
    km_censor_weights,
    weight_at,
    weight_at_left,
)
from mswait.errors import ValidationError
from mswait.graph import build_graph
from mswait.simulator import preset, simulate

TWO = build_graph([0, 1], [(0, 1)])


def test_no_censoring_gives_unit_weights(fig1_graph):
    ds = dataset(fig1_graph, [subject(1, [(0, 1.0), 2]), subject(2, [(0, 2.0), (1, 1.0), 4])])
    for ws in (km_censor_weights(ds), aalen_censor_weights(ds)[1]):
        assert np.all(ws.weight_at([0, 1], [0.5, 10.0]) == 1.0)
        assert np.all(ws.weight_at_left([0, 1], [0.0, 3.0]) == 1.0)
    fit, _ = aalen_censor_weights(ds)
    assert fit.times.size == 0
    assert fit.coefficient(0).eval(5.0) == 0.0


def test_km_reversed_roles_example():
    ds = dataset(TWO, [
        subject(1, [(0, 1.0)], censored=True),
        subject(2, [(0, 2.0), 1]),
        subject(3, [(0, 3.0)], censored=True),
    ])
    ws = km_censor_weights(ds, eps=0.01)
    assert ws.shared
    assert weight_at(ws, 0, 0.5) == 1.0
    assert weight_at(ws, 0, 1.0) == pytest.approx(2 / 3, abs=1e-15)
    assert weight_at(ws, 1, 2.5) == pytest.approx(2 / 3, abs=1e-15)
    assert weight_at(ws, 2, 3.0) == 0.01
    assert weight_at_left(ws, 2, 3.0) == pytest.approx(2 / 3, abs=1e-15)


def test_single_censored_subject():
    ds = dataset(TWO, [subject(1, [(0, 5.0)], censored=True)])
    ws = km_censor_weights(ds, eps=0.05)
    assert ws.weight_at(0, 4.999) == 1.0
    assert ws.weight_at(0, 5.0) == 0.05
    assert ws.weight_at(0, 50.0) == 0.05


def test_left_and_right_limits_at_a_jump():
    ds = dataset(TWO, [subject(1, [(0, 3.0)], censored=True)]
                 + [subject(k, [(0, 4.0 + k), 1]) for k in range(2, 6)])
    ws = km_censor_weights(ds)
    assert weight_at_left(ws, 0, 3.0) == 1.0
    assert weight_at(ws, 0, 3.0) == pytest.approx(0.8, abs=1e-15)
    assert weight_at(ws, 4, 1e6) == pytest.approx(0.8, abs=1e-15)


def test_intercept_only_aalen_equals_km():
    rng = np.random.default_rng(5)
    subs = []
    for k in range(40):
        w = float(np.round(rng.exponential(2.0), 1)) + 0.1
        subs.append(subject(k, [(0, w)], censored=True) if rng.random() < 0.4 else subject(k, [(0, w), 1]))
    ds = dataset(TWO, subs)
    km = km_censor_weights(ds)
    fit, aa = aalen_censor_weights(ds)
    c = fit.times
    idx = np.arange(ds.n)
    for t in c:
        live = ds.final_time >= t
        np.testing.assert_allclose(aa.weight_at(idx[live], t), km.weight_at(idx[live], t), rtol=0, atol=1e-10)
    # intercept increments are the Nelson-Aalen increments d/Y of the censoring times
    np.testing.assert_allclose(fit.increments[:, 0], 1 - km.factors[:, 0], rtol=0, atol=1e-10)


def test_aalen_curves_differ_by_stage_under_dependent_censoring():
    td = simulate(preset("markov-wb-dep-high"), seed=3, n=300)
    ds = td.observed
    _, ws = aalen_censor_weights(ds)
    t = 3.0
    live = np.flatnonzero(ds.final_time >= t)
    assert len(set(stage_at_left(ds, live, t))) >= 2
    distinct = set(np.round(ws.weight_at(live, t), 12))
    assert len(distinct) >= 2


def test_aalen_coefficients_start_at_zero_and_jump_at_censoring_times():
    ds = tiny_censor_heavy()
    fit, _ = aalen_censor_weights(ds)
    assert np.array_equal(fit.times, np.unique(ds.final_time[ds.censored]))
    for m in range(len(fit.labels)):
        B = fit.coefficient(m)
        assert B.eval(0.0) == 0.0
        assert set(B.times) <= set(fit.times)


def test_aalen_csv(tmp_path):
    fit, _ = aalen_censor_weights(tiny_censor_heavy())
    p = tmp_path / "b.csv"
    fit.write_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0].split(",")[:2] == ["t", "intercept"]
    assert len(lines) == 2 + fit.times.size


def test_known_weights_are_continuous():
    kw = KnownCensoringWeights(lambda t: np.exp(-np.asarray(t) / 4))
    assert kw.weight_at(0, 4.0) == pytest.approx(np.exp(-1))
    assert kw.weight_at_left(0, 4.0) == kw.weight_at(0, 4.0)


def test_bad_inputs():
    ds = tiny_censor_heavy()
    with pytest.raises(ValidationError):
        km_censor_weights(ds, eps=0.0)
    with pytest.raises(ValidationError):
        censor_weights(ds, "sometimes")


def _probe(ds):
    pts = np.unique(np.concatenate([[0.0], ds.final_time, ds.final_time + 0.25, ds.final_time - 0.25]))
    return pts[pts >= 0]


@given(histories(max_subjects=6))
def test_km_matches_oracle(ds):
    ws = km_censor_weights(ds)
    K = km_censoring_weight(list(ds.records))
    for i in range(ds.n):
        for t in _probe(ds):
            assert ws.weight_at(i, t) == pytest.approx(K(i, t), abs=1e-12)
            assert ws.weight_at_left(i, t) == pytest.approx(K(i, t, left=True), abs=1e-12)


@given(histories(max_subjects=6))
def test_aalen_matches_stratified_oracle(ds):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, ws = aalen_censor_weights(ds)
    K = stratified_censoring_weights(list(ds.records))
    for i in range(ds.n):
        for t in _probe(ds):
            if t > ds.final_time[i]:
                continue  # weights are only used up to the end of follow-up
            assert ws.weight_at(i, t) == pytest.approx(K(i, t), abs=1e-12)
            assert ws.weight_at_left(i, t) == pytest.approx(K(i, t, left=True), abs=1e-12)


@given(histories(max_subjects=6), st.sampled_from(["independent", "stage-dependent"]),
       st.floats(0.001, 0.5), st.floats(0.001, 0.5))
def test_weights_bounded_monotone_and_floor_monotone(ds, censoring, e1, e2):
    lo, hi = sorted((e1, e2))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = censor_weights(ds, censoring, lo)
        b = censor_weights(ds, censoring, hi)
    t = _probe(ds)
    for i in range(ds.n):
        wa, wb = a.weight_at(i, t), b.weight_at(i, t)
        assert np.all((wa >= lo) & (wa <= 1.0))
        assert np.all(np.diff(wa) <= 0)
        assert np.all(1.0 / wb <= 1.0 / wa)
        assert np.all(np.isfinite(1.0 / wa ** 2))
