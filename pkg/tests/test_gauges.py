import json
import math

import numpy as np
import pytest

from gaugeproj import (EvaluationUnderflow, GaugeError, GaugeFitError,
                       codoubling_exponent, doubling_constant,
                       doubling_exponent, doubling_roundtrip_violations,
                       evaluate, evaluate_log, log_power, log_radius_grid,
                       log_ratio, parse_gauge, power, power_log, tabulated)

GRID = log_radius_grid()


def test_evaluate_power():
    assert evaluate(power(0.5), 0.25) == pytest.approx(0.5, abs=1e-15)


def test_evaluate_logpower():
    assert evaluate(log_power(1.0), math.exp(-2)) == pytest.approx(0.5, abs=1e-15)


def test_evaluate_powerlog():
    # r**0.5 * (-log r)**2 at r = e**-4
    expected = math.exp(-2) * 16
    assert evaluate(power_log(0.5, 2, 1.0), math.exp(-4)) == pytest.approx(expected)


def test_evaluate_domain_error():
    with pytest.raises(GaugeError):
        evaluate(power(0.5), 0.0)
    with pytest.raises(GaugeError):
        evaluate(power(0.5), -1.0)


def test_evaluate_underflow_recommends_log():
    assert evaluate(power(0.5), 1e-300) == pytest.approx(1e-150, rel=1e-12)
    with pytest.raises(EvaluationUnderflow, match="evaluate_log"):
        evaluate(power(2.5), 1e-300)


def test_evaluate_log_examples():
    assert evaluate_log(power(0.5), -1000.0) == -500.0
    assert evaluate_log(log_power(2.0), -math.e) == pytest.approx(-2.0, abs=1e-14)
    expected = -50 + 2 * math.log(100)
    assert evaluate_log(power_log(0.5, 2, 1.0), -100.0) == pytest.approx(expected)


def test_evaluate_log_consistency():
    gs = [power(0.7), log_power(1.5), power_log(0.4, 1.2, 0.5),
          tabulated([(-30.0, -12.0), (-10.0, -5.0), (-1.0, -0.5)])]
    rs = np.exp(np.linspace(-20, -0.05, 61))
    for g in gs:
        for r in rs:
            lhs = evaluate_log(g, math.log(r))
            rhs = math.log(evaluate(g, r))
            assert lhs == pytest.approx(rhs, rel=1e-12)


@pytest.mark.parametrize("g", [power(0.3), power(1.0), log_power(0.8),
                               log_power(3.0), power_log(0.5, 0.5, 1.0),
                               power_log(0.5, 2.0, 1.0),
                               power_log(0.3, 1.0, 1.0 / 6.0),
                               tabulated([(-40.0, -20.0), (-5.0, -3.0), (-0.5, -0.4)])])
def test_monotone_and_vanishing(g):
    v = np.linspace(-200.0, 0.0, 4001)
    vals = np.asarray(g.log_value(v))
    assert np.all(np.diff(vals) >= -1e-12)
    # f(10**-m) sinks below any epsilon
    deep = np.asarray(g.log_value(np.array([-10.0, -100.0, -1000.0, -10000.0])))
    assert np.all(np.diff(deep) < 0)


def test_logstar_cutoff_flat_above_half():
    g = log_power(2.0)
    assert evaluate(g, 0.5) == evaluate(g, 0.9) == evaluate(g, 2.0)


def test_powerlog_clamp_keeps_max():
    g = power_log(0.5, 2.0, 1.0)  # unclamped peak at r = e**-4
    peak = evaluate(g, math.exp(-4))
    assert evaluate(g, math.exp(-3)) == pytest.approx(peak)
    assert evaluate(g, 0.4) == pytest.approx(peak)


def test_gauge_validation():
    with pytest.raises(GaugeError):
        power(0.0)
    with pytest.raises(GaugeError):
        power_log(0.0, 1.0, 1.0)  # decreasing near zero
    with pytest.raises(GaugeError):
        power_log(0.5, 1.0, 0.0)
    with pytest.raises(GaugeError):
        tabulated([(-1.0, -1.0)])
    with pytest.raises(GaugeError):
        tabulated([(-2.0, -1.0), (-1.0, -2.0)])  # decreasing log f
    with pytest.raises(GaugeError):
        tabulated([(-1.0, -1.0), (-1.0, -0.5)])  # non-increasing log r


def test_table_interpolation_log_linear():
    g = tabulated([(-10.0, -5.0), (-2.0, -1.0)])
    assert evaluate_log(g, -6.0) == pytest.approx(-3.0)
    # constant above the largest sample
    assert evaluate_log(g, -0.5) == pytest.approx(-1.0)
    # first-segment slope below the smallest
    assert evaluate_log(g, -12.0) == pytest.approx(-6.0)


def test_parse_gauge_round_trip():
    specs = [
        {"family": "power", "s": 0.5},
        {"family": "logpower", "s": 2.0},
        {"family": "powerlog", "delta": 0.5, "s": 1.5, "beta": 0.25},
        {"family": "table", "table": [[-10.0, -5.0], [-1.0, -0.6]]},
    ]
    for spec in specs:
        g = parse_gauge(spec)
        again = parse_gauge(json.loads(json.dumps(g.to_dict())))
        assert again == g
    with pytest.raises(GaugeError):
        parse_gauge({"family": "power", "s": 0.5, "bogus": 1})
    with pytest.raises(GaugeError):
        parse_gauge({"family": "unknown"})


def test_log_ratio_stable_at_extreme_depth():
    f = power(0.5)
    g = power_log(0.5, 0.5, 1.0)
    v = -2.0 ** 60
    expected = -0.5 * math.log(-v)
    assert log_ratio(f, g, v) == pytest.approx(expected, rel=1e-12)


# ---------------------------------------------------------------------------
# Scaling exponent fits
# ---------------------------------------------------------------------------

def test_doubling_power_exact():
    fit = doubling_exponent(power(0.7), log_grid=GRID)
    assert fit.s == pytest.approx(0.7, abs=1e-12)
    assert fit.kappa == 1.0
    assert fit.constant == pytest.approx(2 ** 0.7, rel=1e-12)


def test_codoubling_power_exact():
    fit = codoubling_exponent(power(0.7), log_grid=GRID)
    assert fit.s == pytest.approx(0.7, abs=1e-12)
    assert fit.kappa == 1.0


def test_doubling_logpower_sinks_with_grid():
    fits = [doubling_exponent(log_power(3.0), log_grid=log_radius_grid(decades=d)).s
            for d in (30, 60, 120)]
    assert fits[0] > fits[1] > fits[2]
    assert fits[2] < 0.05
    # doubling ratio f(2r)/f(r) approaches 1 at depth
    g = log_power(3.0)
    deep = math.exp(evaluate_log(g, -1e5 + math.log(2)) - evaluate_log(g, -1e5))
    assert deep == pytest.approx(1.0, abs=1e-3)


def test_codoubling_logpower_fails():
    with pytest.raises(GaugeFitError):
        codoubling_exponent(log_power(3.0), log_grid=GRID)


def test_powerlog_exponents_near_radial_power():
    fit = doubling_exponent(power_log(0.5, 1.0, 1.0), log_grid=GRID)
    assert fit.s == pytest.approx(0.5, abs=0.05)
    fit = codoubling_exponent(power_log(0.5, 2.0, 1.0), log_grid=GRID)
    assert fit.s == pytest.approx(0.5, abs=0.05)


def test_grid_preconditions():
    with pytest.raises(GaugeError):
        doubling_exponent(power(0.5), log_grid=np.linspace(-1, -2, 8))
    with pytest.raises(GaugeError):
        doubling_exponent(power(0.5), log_grid=np.linspace(-1, -2, 64))


def test_doubling_roundtrip_lemma():
    # from a doubling constant c found on the grid, the exponent form holds
    # with kappa = 1/c and s = log2(c) on random (lambda, r) pairs
    for g in (power(0.7), log_power(2.0), power_log(0.5, 0.5, 1.0)):
        c = doubling_constant(g, log_grid=GRID)
        assert doubling_roundtrip_violations(g, c, 10_000, seed=5,
                                             log_grid=GRID) == 0
