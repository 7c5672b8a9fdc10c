import math

import numpy as np
import pytest

from gaugeproj import (DIVERGENT, FINITE, INCONCLUSIVE, GaugeError,
                       check_divergence_of_df_over_g, check_integral_condition,
                       check_length_criterion, check_limit_condition,
                       check_rate_condition, classify_log_tail, log_power,
                       power, power_log)
from gaugeproj.conditions import df_over_g_integral, rate_condition_split

TAU = 6.0
GAP_WITNESS = (power(0.5), power_log(0.5, 0.5, 1.0))


def closed_form_power(s_f, s_g):
    # -int f d(1/g) for f = r**s_f, g = r**s_g with s_f > s_g
    return s_g / (s_f - s_g)


def closed_form_logpower(s_f, s_g):
    return s_g / (s_f - s_g) * math.log(2.0) ** (s_g - s_f)


# ---------------------------------------------------------------------------
# Integral condition
# ---------------------------------------------------------------------------

def test_integral_power_pair():
    v = check_integral_condition(power(0.5), power(0.25))
    assert v.status == FINITE
    assert v.value == pytest.approx(1.0, rel=1e-9)


def test_integral_equal_gauges_diverges():
    assert check_integral_condition(power(0.5), power(0.5)).status == DIVERGENT


def test_integral_logpower_pair():
    v = check_integral_condition(log_power(2.0), log_power(1.0))
    assert v.status == FINITE
    assert v.value == pytest.approx(1.0 / math.log(2.0), abs=1e-6)


def test_integral_gap_family_pair_diverges():
    f = power_log(0.5, 2.0, 1.0 / TAU)
    g = power_log(0.5, 2.5, 1.0 / TAU)
    assert check_integral_condition(f, g).status == DIVERGENT


@pytest.mark.parametrize("s_f,s_g", [(0.5, 0.25), (0.9, 0.3), (1.0, 0.2)])
def test_quadrature_vs_closed_form_power(s_f, s_g):
    v = check_integral_condition(power(s_f), power(s_g))
    assert v.status == FINITE
    assert v.value == pytest.approx(closed_form_power(s_f, s_g), rel=1e-6)


@pytest.mark.parametrize("s_f,s_g", [(2.0, 1.0), (3.0, 1.5), (2.5, 0.5)])
def test_quadrature_vs_closed_form_logpower(s_f, s_g):
    v = check_integral_condition(log_power(s_f), log_power(s_g))
    assert v.status == FINITE
    assert v.value == pytest.approx(closed_form_logpower(s_f, s_g), rel=1e-6)


def test_integral_rejects_decreasing_g():
    from gaugeproj import tabulated
    bad = tabulated([(-10.0, -5.0), (-1.0, -5.0)])  # flat everywhere on the grid
    with pytest.raises(GaugeError):
        check_integral_condition(power(0.5), bad)


# ---------------------------------------------------------------------------
# Limit condition and the gap witness
# ---------------------------------------------------------------------------

def test_limit_power_pair_zero():
    v = check_limit_condition(power(0.5), power(0.25))
    assert v.status == FINITE and v.value == 0.0


def test_limit_identity_not_zero():
    assert check_limit_condition(power(1.0), power(1.0)).status == DIVERGENT


def test_gap_witness_limit_zero_integral_divergent():
    f, g = GAP_WITNESS
    assert check_limit_condition(f, g).status == FINITE
    assert check_integral_condition(f, g).status == DIVERGENT


@pytest.mark.parametrize("f,g", [
    (power(0.5), power(0.25)),
    (log_power(2.0), log_power(1.0)),
    (power_log(0.5, 2.0, 1.0 / TAU), power_log(0.5, 3.5, 1.0 / TAU)),
])
def test_integral_finite_implies_limit_zero(f, g):
    assert check_integral_condition(f, g).status == FINITE
    assert check_limit_condition(f, g).status == FINITE


# ---------------------------------------------------------------------------
# Rate condition
# ---------------------------------------------------------------------------

def test_rate_power_pair_bounded():
    v = check_rate_condition(power(0.5), power(0.25))
    assert v.status == FINITE
    assert v.value == pytest.approx(1.0, rel=1e-9)


def test_rate_logpower_pair_bounded_and_inner_constant():
    v = check_rate_condition(log_power(2.0), log_power(1.0))
    assert v.status == FINITE
    # the inner-piece budget 2**s_g * int df/g matches its closed form
    bound = 2.0 ** 1.0 * df_over_g_integral(log_power(2.0), log_power(1.0))
    assert bound == pytest.approx(4.0 / math.log(2.0), rel=0.05)
    for t in (2.0 ** -12, 2.0 ** -24, 2.0 ** -48):
        row = rate_condition_split(log_power(2.0), log_power(1.0), t)
        assert row["inner"] <= bound
        # exact inner piece for this pair is 3/(-log t)
        assert row["inner"] == pytest.approx(3.0 / -math.log(t), rel=1e-6)


def test_rate_equal_gauges_diverges():
    assert check_rate_condition(power(0.5), power(0.5)).status == DIVERGENT


@pytest.mark.parametrize("f,g", [
    (power(0.5), power(0.25)),
    (log_power(2.0), log_power(1.0)),
])
def test_rate_finite_implies_integral_finite(f, g):
    assert check_rate_condition(f, g).status == FINITE
    assert check_integral_condition(f, g).status == FINITE


# ---------------------------------------------------------------------------
# Length criterion
# ---------------------------------------------------------------------------

def test_length_criterion_values():
    v = check_length_criterion(power(1.5))
    assert v.status == FINITE
    assert v.value == pytest.approx(2.0, rel=1e-9)
    assert "positive length" in v.diagnostics
    assert check_length_criterion(power(1.0)).status == DIVERGENT
    assert check_length_criterion(power(0.5)).status == DIVERGENT


def test_length_criterion_precondition():
    with pytest.raises(GaugeError, match="decreasing"):
        check_length_criterion(power(2.5))


# ---------------------------------------------------------------------------
# Stieltjes df/g
# ---------------------------------------------------------------------------

def test_df_over_g_growth_pair_diverges():
    f, g = GAP_WITNESS  # g(r) = f(r log(1/r))
    assert check_divergence_of_df_over_g(f, g).status == DIVERGENT


def test_df_over_g_identity_diverges():
    assert check_divergence_of_df_over_g(power(1.0), power(1.0)).status == DIVERGENT


def test_df_over_g_power_pair_finite_with_boundary_shift():
    v = check_divergence_of_df_over_g(power(0.5), power(0.25))
    assert v.status == FINITE
    # equals the integral condition plus the boundary term f(1)/g(1) = 1,
    # up to the midpoint-rule offset of the dyadic Stieltjes sums
    integral = check_integral_condition(power(0.5), power(0.25)).value
    assert v.value == pytest.approx(integral + 1.0, rel=0.02)


# ---------------------------------------------------------------------------
# Tail classifier
# ---------------------------------------------------------------------------

def test_classifier_geometric_tail_finite():
    n = np.arange(1, 513, dtype=float)
    status, lam, _ = classify_log_tail(np.log(0.5 ** n))
    assert status == FINITE and lam < -1


def test_classifier_critical_harmonic_divergent():
    n = np.arange(1, 4097, dtype=float)
    status, lam, _ = classify_log_tail(np.log(1.0 / n))
    assert status == DIVERGENT
    assert lam == pytest.approx(0.0, abs=0.02)


def test_classifier_slow_polynomial_divergent():
    n = np.arange(1, 4097, dtype=float)
    status, lam, _ = classify_log_tail(np.log(n ** -0.5))
    assert status == DIVERGENT and lam == pytest.approx(0.5, abs=0.02)


def test_classifier_summable_polynomial_finite():
    n = np.arange(1, 4097, dtype=float)
    status, lam, _ = classify_log_tail(np.log(n ** -2.0))
    assert status == FINITE and lam == pytest.approx(-1.0, abs=0.02)


def test_classifier_inconclusive_band():
    n = np.arange(1, 4097, dtype=float)
    status, lam, _ = classify_log_tail(np.log(n ** -1.05))
    assert status == INCONCLUSIVE


def test_classifier_vanished_tail_is_finite():
    terms = np.full(256, -math.inf)
    terms[:8] = 0.0
    status, _, detail = classify_log_tail(terms)
    assert status == FINITE and "vanished" in detail
