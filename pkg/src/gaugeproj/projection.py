"""Orthogonal projections, interval covers, gauge cover costs and sweeps.

A disc projects onto the line at angle theta as an interval of the same
diameter, so projecting a disc cover and merging overlaps yields an
interval cover whose gauge cost upper-bounds the projected set's cover
cost at that mesh.  The direction sweep walks an angle grid, finds the
construction levels whose placement arc contains the projection
direction and compares the measured cover cost against the per-level
budget 8a g(r_{k+1}) / f(r_k).

Costs reported here are upper bounds for one admissible cover; no
infimum claim is made.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .gauges import GaugeFunction, GaugeError, doubling_exponent, log_radius_grid
from .hierarchy import DiscHierarchy
from .measure import NaturalMeasure, EnergyEstimateError

COALESCE_GRID = 1e-14


@dataclass(frozen=True)
class IntervalCover:
    """Sorted, pairwise-disjoint closed intervals on the line at angle theta."""

    theta: float
    intervals: tuple[tuple[float, float], ...]
    rho: float

    def __post_init__(self):
        iv = self.intervals
        if any(b < a for a, b in iv):
            raise GaugeError("intervals must have lo <= hi")
        if any(iv[i + 1][0] <= iv[i][1] for i in range(len(iv) - 1)):
            raise GaugeError("intervals must be sorted with positive gaps")

    @property
    def total_length(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    def to_dict(self) -> dict:
        return {"theta": self.theta, "rho": self.rho,
                "intervals": [list(iv) for iv in self.intervals]}


def merge_intervals(raw, theta: float = 0.0) -> IntervalCover:
    """Union of closed intervals as a sorted disjoint cover (sweep merge)."""
    arr = np.asarray(list(raw), dtype=float).reshape(-1, 2)
    if len(arr) == 0:
        return IntervalCover(theta, (), 0.0)
    return _merge_array(arr[:, 0], arr[:, 1], theta)


def _merge_array(lo: np.ndarray, hi: np.ndarray, theta: float) -> IntervalCover:
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    running = np.maximum.accumulate(hi)
    new_run = np.ones(len(lo), dtype=bool)
    new_run[1:] = lo[1:] > running[:-1]  # touching endpoints merge
    starts = np.nonzero(new_run)[0]
    ends = np.append(starts[1:], len(lo)) - 1
    merged_lo = lo[starts]
    merged_hi = running[ends]
    lengths = merged_hi - merged_lo
    rho = float(lengths.max()) if len(lengths) else 0.0
    return IntervalCover(theta, tuple(zip(merged_lo.tolist(), merged_hi.tolist())), rho)


def project_disc(center, log_r: float, theta: float) -> tuple[float, float]:
    """Projection of a disc onto the line at angle theta: an interval of the
    same diameter around the projected center."""
    c = float(center[0]) * math.cos(theta) + float(center[1]) * math.sin(theta)
    r = math.exp(log_r)
    return c - r, c + r


def project_disc_cover(centers, radii, theta: float) -> IntervalCover:
    """Project a whole disc cover and merge the resulting intervals."""
    centers = np.asarray(centers, dtype=float)
    radii = np.asarray(radii, dtype=float)
    coord = centers[:, 0] * math.cos(theta) + centers[:, 1] * math.sin(theta)
    return _merge_array(coord - radii, coord + radii, theta)


def cover_cost(g: GaugeFunction, cover: IntervalCover) -> tuple[float, float]:
    """(sum of g(interval length), max length): the cost of this one cover,
    an upper bound for the gauge cover cost at mesh rho."""
    if not cover.intervals:
        return 0.0, 0.0
    lengths = np.array([b - a for a, b in cover.intervals])
    costs = np.exp(np.asarray(g.log_value(np.log(lengths)), dtype=float))
    return float(np.sum(np.sort(costs))), float(lengths.max())


@dataclass(frozen=True)
class LevelProjection:
    """Merged projection of one hierarchy level plus the per-parent span
    of its child intervals (identical for every parent by construction)."""

    cover: IntervalCover
    level: int
    per_parent_span: float


def _projected_level_coords(h: DiscHierarchy, theta: float, level: int) -> np.ndarray:
    coords = np.zeros(1)
    for j in range(1, level + 1):
        step = h.offsets(j) * math.cos(h.d[j - 1] - theta)
        coords = (coords[:, None] + step[None, :]).reshape(-1)
    return coords


def project_hierarchy(h: DiscHierarchy, theta: float, level: int) -> LevelProjection:
    """Project every level-`level` disc onto the line at angle theta.

    The children of every parent share the same projected offset pattern,
    so the pattern is merged once and translated to each projected parent
    center before the global merge.
    """
    if not 1 <= level <= h.depth:
        raise GaugeError("level must lie within the built hierarchy")
    r = h.radius(level)
    span_centers = 2.0 * (h.radius(level - 1) - r) * abs(math.cos(h.d[level - 1] - theta))
    per_parent_span = span_centers + 2.0 * r

    pattern_coord = h.offsets(level) * math.cos(h.d[level - 1] - theta)
    pattern = _merge_array(pattern_coord - r, pattern_coord + r, theta)
    parents = _projected_level_coords(h, theta, level - 1)
    piece = np.asarray(pattern.intervals, dtype=float)
    lo = (parents[:, None] + piece[None, :, 0]).reshape(-1)
    hi = (parents[:, None] + piece[None, :, 1]).reshape(-1)
    return LevelProjection(_merge_array(lo, hi, theta), level, per_parent_span)


def eq35_bound(h: DiscHierarchy, g: GaugeFunction, k: int) -> float:
    """Projected cover-cost budget 8a g(r_{k+1}) / f(r_k) at level k."""
    if not 0 <= k < h.depth:
        raise GaugeError("k must satisfy 0 <= k < depth")
    log_val = (math.log(8.0 * h.a)
               + float(g.log_value(h.log_radius(k + 1)))
               - float(h.gauge.log_value(h.log_radius(k))))
    return math.exp(log_val)


def qualifying_levels(h: DiscHierarchy, theta: float, max_k: int | None = None) -> list[int]:
    """Levels k whose placement arc [d_k, d_k + theta_{k+1}) contains the
    projection direction d_theta = theta + pi/2 (mod pi)."""
    d_theta = math.fmod(theta + math.pi / 2.0, math.pi)
    top = h.depth - 1 if max_k is None else min(max_k, h.depth - 1)
    out = []
    for k in range(1, top + 1):
        arc = math.fmod(d_theta - h.d[k - 1] + math.pi, math.pi)
        if arc <= h.theta[k]:
            out.append(k)
    return out


@dataclass(frozen=True)
class SweepRow:
    theta: float
    k: int
    cost: float | None
    bound: float
    margin: float | None
    note: str = ""


@dataclass(frozen=True)
class SweepTable:
    rows: tuple[SweepRow, ...]

    def violations(self, rtol: float = 1e-9) -> list[SweepRow]:
        return [r for r in self.rows
                if r.cost is not None and r.cost > r.bound * (1.0 + rtol)]

    def to_dicts(self) -> list[dict]:
        return [{"theta": r.theta, "k": r.k, "cost": r.cost, "bound": r.bound,
                 "margin": r.margin, "note": r.note} for r in self.rows]


def sweep_directions(h: DiscHierarchy, g: GaugeFunction, theta_grid,
                     level: int | None = None) -> SweepTable:
    """Angle sweep: for each direction, the levels whose placement arc
    captures it, the measured cover cost of projecting level k+1 and the
    budget it must respect.

    ``theta_grid`` is either an int (uniform grid on [0, pi)) or explicit
    angles.  Levels whose disc count exceeds the hierarchy cap report the
    bound without a measured cost.
    """
    if isinstance(theta_grid, int):
        if theta_grid < 32:
            raise GaugeError("angle grid needs at least 32 points")
        thetas = [i * math.pi / theta_grid for i in range(theta_grid)]
    else:
        thetas = [float(t) for t in theta_grid]
        if len(thetas) < 32:
            raise GaugeError("angle grid needs at least 32 points")
    rows: list[SweepRow] = []
    for theta in thetas:
        for k in qualifying_levels(h, theta, None if level is None else level - 1):
            bound = eq35_bound(h, g, k)
            if h.disc_count(k) <= h.disc_cap:
                cover = project_hierarchy(h, theta, k + 1).cover
                cost, _ = cover_cost(g, cover)
                rows.append(SweepRow(theta, k, cost, bound, bound - cost))
            else:
                rows.append(SweepRow(theta, k, None, bound, None,
                                     note="disc count over cap; bound only"))
    return SweepTable(tuple(rows))


# ---------------------------------------------------------------------------
# Projected measures and energies
# ---------------------------------------------------------------------------

def project_measure(m: NaturalMeasure, theta: float):
    """Pushforward of the atoms onto the line at angle theta.

    Returns (coords, masses) with atoms coalesced by coordinate equality
    after rounding at the 1e-14 grid; total mass is preserved exactly.
    """
    coords = m.atom_coords() @ np.array([math.cos(theta), math.sin(theta)])
    keys = np.round(coords / COALESCE_GRID).astype(np.int64)
    uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    masses = np.bincount(inverse, weights=m.atom_masses())
    return coords[first], masses


def angle_kernel_integral(s: float) -> float:
    """B(s) = integral over [0, pi] of |cos u|**(-s) du, by adaptive
    quadrature around the integrable singularity at pi/2 (requires s < 1)."""
    if s >= 1.0:
        raise GaugeError("the angle kernel integral requires exponent s < 1")
    if s <= 0.0:
        return math.pi
    val, _ = quad(lambda u: abs(math.cos(u)) ** (-s), 0.0, math.pi,
                  points=[math.pi / 2.0], limit=200)
    return float(val)


@dataclass(frozen=True)
class AveragedProjection:
    """Grid average of projected energies against its theoretical budget."""

    average: float
    bound: float
    planar_energy: float
    kernel: float
    kappa: float
    s: float
    pairs_used: int

    @property
    def ratio(self) -> float:
        return self.average / self.bound


def averaged_projected_energy(m: NaturalMeasure, g: GaugeFunction,
                              theta_grid: int = 64, pairs: int = 100_000,
                              seed: int = 0) -> AveragedProjection:
    """Angle average of the projected energies against kappa**-1 B(s) I_g.

    One batch of mass-proportional atom pairs is shared across the whole
    midpoint angle grid, so the per-pair inequality (the projected distance
    shrinks by |cos| of the angle to the pair direction) transfers directly
    to the averages.  Requires g doubling with fitted exponent below 1.
    """
    fit = doubling_exponent(g, log_grid=log_radius_grid())
    if fit.s >= 1.0:
        raise GaugeError(f"fitted doubling exponent {fit.s:.3f} >= 1")
    kernel = angle_kernel_integral(fit.s)
    rng = np.random.default_rng(seed)
    a = m.sample_atoms(pairs, rng)
    b = m.sample_atoms(pairs, rng)
    diff = a - b
    d = np.linalg.norm(diff, axis=-1)
    for _ in range(128):
        bad = d == 0.0
        n_bad = int(bad.sum())
        if n_bad == 0:
            break
        diff[bad] = m.sample_atoms(n_bad, rng) - m.sample_atoms(n_bad, rng)
        d[bad] = np.linalg.norm(diff[bad], axis=-1)
    else:
        raise EnergyEstimateError("could not draw distinct atom pairs")
    planar = float(np.mean(g.reciprocal(d)))

    thetas = (np.arange(theta_grid) + 0.5) * math.pi / theta_grid
    acc = 0.0
    for theta in thetas:
        pd = np.abs(diff[:, 0] * math.cos(theta) + diff[:, 1] * math.sin(theta))
        acc += float(np.mean(g.reciprocal(np.maximum(pd, 1e-300))))
    average = math.pi * acc / theta_grid
    bound = kernel / fit.kappa * planar
    return AveragedProjection(average, bound, planar, kernel, fit.kappa,
                              fit.s, pairs)


# ---------------------------------------------------------------------------
# Logarithmic dimension from cover-cost schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogDimensionEstimate:
    value: float | None
    status: str  # "ok" | "inconclusive"
    trends: tuple[tuple[float, str], ...]


def _cost_trend(costs, tol: float = 0.05) -> str:
    c = np.asarray(costs, dtype=float)
    if np.any(c <= 0):
        return "shrinks"  # hit exact zero: certainly vanishing
    x = np.log(np.arange(1, len(c) + 1, dtype=float))
    y = np.log(c)
    x0 = x - x.mean()
    slope = float(np.dot(x0, y) / np.dot(x0, x0))
    if slope <= -tol:
        return "shrinks"
    if slope >= tol:
        return "grows"
    return "flat"


def estimate_log_dimension(cost_schedule) -> LogDimensionEstimate:
    """Boundary exponent of a family of cover-cost schedules.

    ``cost_schedule`` is a sequence of (s, costs-at-shrinking-mesh) pairs
    for the log-scale gauge family.  The estimate is the midpoint between
    the largest s whose costs grow and the smallest whose costs shrink;
    0 when every schedule shrinks, inf when every schedule grows, and
    inconclusive when the trends do not separate cleanly.
    """
    entries = sorted(((float(s), list(costs)) for s, costs in cost_schedule),
                     key=lambda e: e[0])
    if not entries:
        raise GaugeError("cost schedule is empty")
    trends = tuple((s, _cost_trend(c)) for s, c in entries)
    labels = [t for _, t in trends]
    if all(t == "shrinks" for t in labels):
        return LogDimensionEstimate(0.0, "ok", trends)
    if all(t == "grows" for t in labels):
        return LogDimensionEstimate(math.inf, "ok", trends)
    first_shrink = next((i for i, t in enumerate(labels) if t == "shrinks"), None)
    if (first_shrink is not None
            and all(t == "grows" for t in labels[:first_shrink])
            and all(t == "shrinks" for t in labels[first_shrink:])):
        lo = trends[first_shrink - 1][0]
        hi = trends[first_shrink][0]
        return LogDimensionEstimate(0.5 * (lo + hi), "ok", trends)
    return LogDimensionEstimate(None, "inconclusive", trends)
