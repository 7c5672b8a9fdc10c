import math

import numpy as np
import pytest

from gaugeproj import (BranchingError, BranchingPlan, DiscCapExceeded,
                       ScheduleError, build_from_gauge, build_hierarchy,
                       choose_branching, derive_radius_schedule, power,
                       raw_log_radii, schedule_from_radii, validate_hierarchy)
from gaugeproj.hierarchy import branching_interval


def test_schedule_scan_power_half():
    s = derive_radius_schedule(power(0.5), 4)
    assert s.k1 == 4
    assert s.radius(0) == pytest.approx(0.0930, abs=5e-4)


def test_raw_radius_identity():
    r10 = math.exp(raw_log_radii([10.0])[0])
    expected = (10 * math.log(10) * math.log(math.log(10))) ** -10
    assert r10 == pytest.approx(expected, rel=1e-12)
    assert r10 == pytest.approx(1.46e-13, rel=5e-3)


def test_schedule_rejects_steep_gauge():
    with pytest.raises(ScheduleError, match="exceeds 1"):
        derive_radius_schedule(power(1.5), 4)


def test_schedule_inequalities_hold_on_window():
    f = power(0.5)
    s = derive_radius_schedule(f, 4)
    for k in range(s.depth):
        f_hi = f.value(s.radius(k))
        f_lo = f.value(s.radius(k + 1))
        assert f_lo < 0.25 * f_hi
        assert f_lo / s.radius(k + 1) > 3 * f_hi / s.radius(k)


def test_choose_branching_example():
    f = power(0.5)
    s = derive_radius_schedule(f, 4)
    plan = choose_branching(f, s)
    assert plan.a == pytest.approx(0.3050, abs=5e-4)
    assert plan.counts[0] == 9
    lo, hi = branching_interval(f, s, [])
    assert lo == pytest.approx(8.75, abs=0.01)
    assert hi == pytest.approx(17.51, abs=0.02)
    assert hi - lo > 2  # the proof's width guarantee


def test_choose_branching_width_guarantee_every_level():
    f = power(0.3)
    s = derive_radius_schedule(f, 5)
    plan = choose_branching(f, s)
    for k in range(s.depth):
        lo, hi = branching_interval(f, s, plan.counts[:k])
        assert hi - lo > 2
        assert lo <= plan.counts[k] <= hi
        assert plan.counts[k] == math.ceil(lo) or plan.counts[k] == 2


def test_degenerate_schedule_has_no_branching():
    f = power(0.5)
    s = schedule_from_radii([0.25])
    plan = choose_branching(f, s)
    assert plan.counts == ()
    assert plan.a == pytest.approx(0.5)


def test_build_two_children_tangent():
    sched = schedule_from_radii([1.0, 0.25])
    h = build_hierarchy(power(0.5), sched, BranchingPlan(1.0, (2,)), theta=[0.0])
    np.testing.assert_allclose(h.level_centers(1),
                               [[-0.75, 0.0], [0.75, 0.0]], atol=1e-15)


def test_build_three_children_vertical():
    sched = schedule_from_radii([1.0, 0.2])
    h = build_hierarchy(power(0.5), sched, BranchingPlan(1.0, (3,)),
                        theta=[math.pi / 2])
    np.testing.assert_allclose(h.level_centers(1),
                               [[0.0, -0.8], [0.0, 0.0], [0.0, 0.8]], atol=1e-15)
    # gap width from the spacing identity: 2*3*0.2 + 2*s = 2  =>  s = 0.4
    assert h.gap(1) == pytest.approx(0.4)


def test_validate_constructive_hierarchies_pass(h05_depth5, h03_depth5, h08_depth5):
    for h in (h05_depth5, h03_depth5, h08_depth5):
        report = validate_hierarchy(h)
        assert report.passed, report.failures()
        assert report.assumptions


def test_validate_negative_control_reports_eq23():
    sched = schedule_from_radii([1.0, 0.3])
    h = build_hierarchy(power(0.5), sched, BranchingPlan(1.0, (4,)), theta=[0.0])
    report = validate_hierarchy(h)
    rows = report.by_check("Eq23")
    assert len(rows) == 1 and not rows[0].passed
    assert not report.passed
    assert {r.check for r in report.failures()} >= {"Eq23", "sibling-disjoint",
                                                    "Eq33"}


def test_margin_table_depth4(h05_depth5):
    report = validate_hierarchy(h05_depth5)
    for row in report.by_check("Eq33"):
        assert row.passed and row.margin > 0  # gap exceeds child radius


def test_eq25_chain(h05_depth5, h03_depth5, h08_depth5):
    for h in (h05_depth5, h03_depth5, h08_depth5):
        f = h.gauge
        for k in range(1, h.depth + 1):
            n = h.counts[k - 1]
            f_ratio = math.exp(f.log_value(h.log_radius(k - 1))
                               - f.log_value(h.log_radius(k)))
            r_ratio = math.exp(h.log_radius(k - 1) - h.log_radius(k))
            assert n <= 2 * f_ratio * (1 + 1e-12)
            assert n < (2.0 / 3.0) * r_ratio


def test_rebuild_bit_identical():
    a = build_from_gauge(power(0.5), 4)
    b = build_from_gauge(power(0.5), 4)
    assert a.schedule.log_r == b.schedule.log_r
    assert a.counts == b.counts and a.theta == b.theta and a.d == b.d
    np.testing.assert_array_equal(a.level_centers(3), b.level_centers(3))


def test_default_theta_matches_radius_ratios(h05_depth5):
    h = h05_depth5
    for k in range(h.depth):
        expected = math.exp(h.log_radius(k + 1) - h.log_radius(k))
        assert h.theta[k] == pytest.approx(expected, rel=1e-15)
    partial = np.cumsum(h.theta)
    assert np.all(np.diff(partial) > 0)


def test_disc_cap_guards_materialisation(h08_depth5):
    # the structural object exists and validates, but the full level is
    # far over the cap and must refuse to materialise
    assert h08_depth5.disc_count(5) > h08_depth5.disc_cap
    with pytest.raises(DiscCapExceeded):
        h08_depth5.level_centers(5)


def test_branching_rejects_broken_schedule():
    # radii that violate the mass-drop inequality leave no admissible integer
    f = power(0.5)
    s = schedule_from_radii([0.25, 0.2])
    with pytest.raises(BranchingError):
        choose_branching(f, s)


def test_hierarchy_serialisation_shape(h05_depth5):
    doc = h05_depth5.to_dict(include_centers=False)
    assert set(doc) == {"schedule", "a", "N", "theta", "d", "levels"}
    assert len(doc["levels"]) == h05_depth5.depth + 1
    assert doc["levels"][2]["centers"] is None
    doc = h05_depth5.to_dict()
    assert len(doc["levels"][1]["centers"]) == h05_depth5.counts[0]
