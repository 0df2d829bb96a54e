import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mswait.errors import RiskSetExhausted, ValidationError
from mswait.stepfun import (
    StepCurve,
    merge_ties,
    product_limit,
    read_curve_csv,
    stieltjes_integrate,
    write_curve_csv,
)


def km(waits, events):
    """Unweighted product limit with at-risk counts #{w >= s}."""
    waits = np.asarray(waits, float)
    events = np.asarray(events, bool)
    risk = lambda s: float(np.sum(waits >= s))  # noqa: E731
    t = waits[events]
    y = StepCurve(np.unique(t), [risk(s) for s in np.unique(t)], initial=waits.size)
    return product_limit(t, 1.0, y)


def test_eval_and_left_limit():
    c = StepCurve([2.0], [0.5], initial=1.0)
    assert c.eval(2.0) == 0.5
    assert c.eval_left(2.0) == 1.0
    assert c.eval(1.999) == 1.0
    assert c.eval_left(0.0) == 1.0
    assert StepCurve.constant(0.7).eval(0.0) == 0.7
    assert StepCurve.constant(0.7).eval_left(0.0) == 0.7
    np.testing.assert_array_equal(c.eval([0, 2, 3]), [1.0, 0.5, 0.5])


def test_point_values_differ_from_right_limit():
    c = StepCurve([1.0, 2.0], [3.0, 1.0], initial=4.0, at_jump=[4.0, 3.0])
    assert c.eval(1.0) == 4.0
    assert c.eval_right(1.0) == 3.0
    assert c.eval_left(2.0) == 3.0
    assert not c.is_right_continuous


def test_invalid_knots():
    with pytest.raises(ValidationError):
        StepCurve([1.0, 1.0], [0, 0])
    with pytest.raises(ValidationError):
        StepCurve([-1.0], [0])
    with pytest.raises(ValidationError):
        StepCurve([np.inf], [0])


def test_product_limit_three_events():
    S = km([1, 2, 3], [1, 1, 1])
    np.testing.assert_allclose(S.eval([1, 2, 3]), [2 / 3, 1 / 3, 0.0], rtol=0, atol=1e-15)
    assert S.eval(0.5) == 1.0


def test_product_limit_with_censored_middle():
    # at risk 3 at s=1, 1 at s=3: S(1) = 2/3 and S(3) = 2/3 * (1 - 1/1) = 0
    S = km([1, 2, 3], [1, 0, 1])
    assert S.eval(1) == pytest.approx(2 / 3, abs=1e-15)
    assert S.eval(2.5) == pytest.approx(2 / 3, abs=1e-15)
    assert S.eval(3) == 0.0


def test_product_limit_censored_last():
    S = km([1, 2, 3], [1, 1, 0])
    assert S.eval(2) == pytest.approx(1 / 3, abs=1e-15)
    assert S.eval(10) == pytest.approx(1 / 3, abs=1e-15)


def test_product_limit_no_events_is_one():
    S = product_limit([], [], StepCurve.constant(5.0))
    assert S.eval(100.0) == 1.0


def test_product_limit_zero_weight_with_empty_risk_set_is_ignored():
    S = product_limit([1.0, 2.0], [1.0, 0.0], StepCurve([1.5], [0.0], initial=2.0))
    assert S.final == 0.5


def test_product_limit_exhausted_risk_set():
    with pytest.raises(RiskSetExhausted):
        product_limit([1.0], [1.0], StepCurve.constant(0.0))


def test_stieltjes_constant_integrand():
    c = stieltjes_integrate(StepCurve.constant(1.0), [1.0, 2.0], [0.2, 0.3])
    np.testing.assert_allclose(c.eval([0.5, 1.0, 2.0]), [0.0, 0.2, 0.5], atol=1e-15)
    assert stieltjes_integrate(StepCurve.constant(1.0), [], []).eval(3.0) == 0.0


def test_stieltjes_uses_left_limit():
    S = StepCurve([1.0], [0.5], initial=1.0)
    c = stieltjes_integrate(S, [1.0, 2.0], [1.0, 1.0])
    assert c.eval(1.0) == 1.0  # S(1-) = 1
    assert c.eval(2.0) == 1.5


def test_km_identity_on_example():
    S = km([1, 2, 3], [1, 1, 1])
    h = np.array([1 / 3, 1 / 2, 1.0])
    F = stieltjes_integrate(S, [1, 2, 3], h)
    np.testing.assert_allclose(F.eval([1, 2, 3]), 1 - S.eval([1, 2, 3]), atol=1e-15)


def test_merge_ties_sums_in_order():
    t, w = merge_ties([2.0, 1.0, 2.0], [1.0, 3.0, 0.5])
    np.testing.assert_array_equal(t, [1.0, 2.0])
    np.testing.assert_array_equal(w, [3.0, 1.5])


def test_arithmetic_keeps_point_values():
    a = StepCurve([1.0], [2.0], initial=1.0, at_jump=[1.0])
    b = StepCurve([2.0], [1.0], initial=0.0)
    c = a + b
    assert c.eval(1.0) == 1.0 and c.eval_right(1.0) == 2.0 and c.eval(2.0) == 3.0
    assert (a * 2.0).eval(1.0) == 2.0
    assert (1.0 - b).eval(2.0) == 0.0


def test_csv_round_trip(tmp_path):
    c = StepCurve([0.5, 1.25, 3.0], [0.1, 0.7, 1.0 / 3.0])
    p = tmp_path / "c.csv"
    write_curve_csv(c, p)
    assert p.read_text().splitlines()[0] == "t,value"
    assert read_curve_csv(p).equals(c)


increments = st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=0, max_size=30)
times = st.lists(st.floats(0.0, 100.0, allow_nan=False), min_size=0, max_size=30, unique=True)


@given(st.data())
def test_duhamel_identity(data):
    t = sorted(data.draw(times))
    h = data.draw(st.lists(st.floats(0.0, 1.0), min_size=len(t), max_size=len(t)))
    S = product_limit(t, h, StepCurve.constant(1.0))
    F = stieltjes_integrate(S, t, h)
    probe = np.concatenate([t, np.asarray(t) + 1e-3, [0.0, 1e6]])
    np.testing.assert_allclose(np.asarray(F.eval(probe)), 1.0 - np.asarray(S.eval(probe)), rtol=0, atol=1e-12)


@given(st.data())
def test_product_limit_is_survival_curve(data):
    t = data.draw(times)
    h = data.draw(st.lists(st.floats(0.0, 1.0), min_size=len(t), max_size=len(t)))
    S = product_limit(t, h, StepCurve.constant(1.0))
    v = np.concatenate([[S.initial], S.values])
    assert S.initial == 1.0
    assert np.all((v >= 0) & (v <= 1))
    assert np.all(np.diff(v) <= 0)


@given(times, st.floats(0.0, 100.0, allow_nan=False))
def test_eval_and_left_agree_off_knots(t, x):
    t = sorted(t)
    c = StepCurve(t, np.arange(1, len(t) + 1, dtype=float), initial=0.0)
    if x in t:
        assert c.eval(x) - c.eval_left(x) == 1.0
    else:
        assert c.eval(x) == c.eval_left(x)
