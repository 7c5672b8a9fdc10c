"""The nested-disc construction and its inequality checks.

A hierarchy starts from a closed disc of radius r_0 at the origin.  Each
level-k disc receives N_{k+1} equally spaced subdiscs of radius r_{k+1}
along the diameter at cumulative direction d_{k+1}, first and last child
internally tangent to the parent.  The radii follow the super-fast
schedule r'_k = (k log k log log k)**-k, shifted to the first index k1
where

    f(r_{k+1}) < (1/4) f(r_k)          and
    f(r_{k+1})/r_{k+1} > 3 f(r_k)/r_k

both hold, and the branching counts N_k keep the mass products pinched:

    a <= N_1 ... N_k f(r_k) <= 2a,     a = f(r_0).

Only the per-level local geometry (offsets, direction, log radius) is
stored; absolute centers are materialised lazily and are guarded by a
disc-count cap so that validation works even when the full product of
branching counts is astronomically large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gauges import GaugeFunction, GaugeError, doubling_exponent, log_radius_grid

LOG2 = math.log(2.0)
LOG_QUARTER = math.log(0.25)
LOG3 = math.log(3.0)

DEFAULT_DISC_CAP = 10 ** 7


class ScheduleError(GaugeError):
    """No admissible radius schedule exists for this gauge."""


class BranchingError(GaugeError):
    """The branching interval contains no admissible integer."""


class DiscCapExceeded(RuntimeError):
    """A materialisation would exceed the configured disc-count cap."""


# ---------------------------------------------------------------------------
# Radius schedule
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadiusSchedule:
    """Strictly decreasing log radii log r_0 .. log r_K.

    ``k1`` is the shift into the raw sequence when the schedule was derived;
    hand-built schedules carry ``k1 = None`` and are validated only by the
    hierarchy report.
    """

    log_r: tuple[float, ...]
    k1: int | None = None

    def __post_init__(self):
        lr = self.log_r
        if len(lr) < 1:
            raise ScheduleError("schedule needs at least one radius")
        if any(b >= a for a, b in zip(lr, lr[1:])):
            raise ScheduleError("log radii must be strictly decreasing")
        if lr[0] > 0.0:
            raise ScheduleError("radii must not exceed 1")

    @property
    def depth(self) -> int:
        return len(self.log_r) - 1

    def radius(self, k: int) -> float:
        return math.exp(self.log_r[k])


def schedule_from_radii(radii) -> RadiusSchedule:
    r = [float(x) for x in radii]
    if any(x <= 0 for x in r):
        raise ScheduleError("radii must be positive")
    return RadiusSchedule(tuple(math.log(x) for x in r))


def raw_log_radii(ks) -> np.ndarray:
    """log r'_k for the schedule r'_k = (k log k log log k)**-k, k >= 3."""
    k = np.asarray(ks, dtype=float)
    if np.any(k < 3):
        raise ScheduleError("raw radii need k >= 3")
    product = k * np.log(k) * np.log(np.log(k))
    return -k * np.log(product)


def derive_radius_schedule(f: GaugeFunction, K: int,
                           k_max: int = 10 ** 6) -> RadiusSchedule:
    """Least shift k1 making the raw radius sequence admissible for f over
    K consecutive levels, returned as the shifted schedule r_k = r'_{k+k1}.

    Requires f doubling with fitted exponent <= 1; fails with a diagnostic
    when no shift up to k_max works.
    """
    if K < 2:
        raise ScheduleError("need depth K >= 2")
    fit = doubling_exponent(f, log_grid=log_radius_grid())
    if fit.s > 1.0 + 1e-9:
        raise ScheduleError(
            f"doubling exponent {fit.s:.4f} exceeds 1; construction needs <= 1")

    ks = np.arange(3, 64, dtype=float)
    start = 3
    while float(ks[0] * math.log(ks[0]) * math.log(math.log(ks[0]))) <= 1.0:
        start += 1
        ks = ks + 1.0

    chunk = 1 << 16
    k_lo = start
    while k_lo <= k_max:
        k_hi = min(k_lo + chunk, k_max + K + 1)
        ks = np.arange(k_lo, k_hi + K + 1, dtype=float)
        lv = raw_log_radii(ks)
        lf = np.asarray(f.log_value(lv), dtype=float)
        ok_mass = lf[1:] < lf[:-1] + LOG_QUARTER
        ok_rate = (lf[1:] - lv[1:]) > LOG3 + (lf[:-1] - lv[:-1])
        ok = ok_mass & ok_rate
        window = np.convolve(ok.astype(int), np.ones(K, dtype=int), "valid") == K
        hits = np.nonzero(window)[0]
        hits = hits[hits + k_lo <= k_max]
        if len(hits):
            i = int(hits[0])
            return RadiusSchedule(tuple(lv[i:i + K + 1].tolist()), k1=k_lo + i)
        k_lo = k_hi
    raise ScheduleError(
        f"no admissible start k1 <= {k_max}: the gauge does not satisfy the "
        "mass-drop and rate inequalities on the raw radius sequence")


# ---------------------------------------------------------------------------
# Branching counts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BranchingPlan:
    """Normalisation a = f(r_0) and the branching counts N_1 .. N_K."""

    a: float
    counts: tuple[int, ...]

    def __post_init__(self):
        if not self.a > 0:
            raise BranchingError("normalisation a must be positive")
        if any(n < 2 for n in self.counts):
            raise BranchingError("branching counts must be >= 2")


def choose_branching(f: GaugeFunction, schedule: RadiusSchedule) -> BranchingPlan:
    """Smallest admissible branching counts for the pinched mass products.

    N_{k+1} is the least integer in [a / (prod * f(r_{k+1})),
    2a / (prod * f(r_{k+1}))]; the interval has width > 2 whenever the
    schedule inequalities hold, so an integer >= 2 always exists.
    """
    log_a = float(f.log_value(schedule.log_r[0]))
    a = math.exp(log_a)
    counts: list[int] = []
    log_prod = 0.0
    for k in range(schedule.depth):
        lf_next = float(f.log_value(schedule.log_r[k + 1]))
        lower = math.exp(log_a - log_prod - lf_next)
        upper = 2.0 * lower
        if upper - lower <= 2.0 * (1.0 - 1e-9):
            raise BranchingError(
                f"branching interval [{lower:.3f}, {upper:.3f}] at level {k + 1} "
                "is too narrow; schedule inequalities are violated upstream")
        n = max(int(math.ceil(lower)), 2)
        if n > upper * (1.0 + 1e-12):
            raise BranchingError(
                f"no integer >= 2 in branching interval at level {k + 1}")
        counts.append(n)
        log_prod += math.log(n)
    return BranchingPlan(a, tuple(counts))


def branching_interval(f: GaugeFunction, schedule: RadiusSchedule,
                       counts_so_far) -> tuple[float, float]:
    """The admissible interval for the next branching count."""
    log_a = float(f.log_value(schedule.log_r[0]))
    log_prod = float(sum(math.log(n) for n in counts_so_far))
    lf_next = float(f.log_value(schedule.log_r[len(counts_so_far) + 1]))
    lower = math.exp(log_a - log_prod - lf_next)
    return lower, 2.0 * lower


# ---------------------------------------------------------------------------
# Hierarchy
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiscHierarchy:
    """Per-level geometry of the construction; immutable once built.

    ``offsets[k]`` holds the signed center offsets of the level-(k+1)
    children along their parent's placement diameter (physical units),
    ``d[k]`` the cumulative placement direction d_{k+1}.  Absolute centers
    materialise lazily through :meth:`level_centers`, capped at
    ``disc_cap`` discs.
    """

    gauge: GaugeFunction
    schedule: RadiusSchedule
    a: float
    counts: tuple[int, ...]
    theta: tuple[float, ...]
    d: tuple[float, ...]
    disc_cap: int = DEFAULT_DISC_CAP
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def depth(self) -> int:
        return len(self.counts)

    def radius(self, k: int) -> float:
        return self.schedule.radius(k)

    def log_radius(self, k: int) -> float:
        return self.schedule.log_r[k]

    def disc_count(self, level: int) -> int:
        out = 1
        for n in self.counts[:level]:
            out *= n
        return out

    def offsets(self, level: int) -> np.ndarray:
        """Signed center offsets of level-`level` children within a parent."""
        key = ("off", level)
        if key not in self._cache:
            n = self.counts[level - 1]
            span = self.radius(level - 1) - self.radius(level)
            self._cache[key] = np.linspace(-span, span, n)
        return self._cache[key]

    def gap(self, level: int) -> float:
        """Boundary gap between consecutive level-`level` siblings."""
        off = self.offsets(level)
        return float(off[1] - off[0]) - 2.0 * self.radius(level)

    def direction(self, level: int) -> np.ndarray:
        ang = self.d[level - 1]
        return np.array([math.cos(ang), math.sin(ang)])

    def level_centers(self, level: int) -> np.ndarray:
        """Absolute centers of all level-`level` discs, lexicographic in path."""
        if level == 0:
            return np.zeros((1, 2))
        if self.disc_count(level) > self.disc_cap:
            raise DiscCapExceeded(
                f"level {level} holds {self.disc_count(level)} discs, "
                f"over the cap of {self.disc_cap}")
        key = ("centers", level)
        if key not in self._cache:
            parents = self.level_centers(level - 1)
            step = self.offsets(level)[:, None] * self.direction(level)[None, :]
            centers = np.repeat(parents, len(step), axis=0) + np.tile(step, (len(parents), 1))
            self._cache[key] = centers
        return self._cache[key]

    def first_path_center(self, level: int) -> np.ndarray:
        """Center of the lexicographically first level-`level` disc."""
        c = np.zeros(2)
        for j in range(1, level + 1):
            c = c + self.offsets(j)[0] * self.direction(j)
        return c

    def to_dict(self, include_centers: bool = True) -> dict:
        levels = []
        for k in range(self.depth + 1):
            entry: dict = {"level": k, "log_radius": self.log_radius(k)}
            if include_centers and self.disc_count(k) <= self.disc_cap:
                entry["centers"] = self.level_centers(k).tolist()
            else:
                entry["centers"] = None
            levels.append(entry)
        return {
            "schedule": {"log_r": list(self.schedule.log_r), "k1": self.schedule.k1},
            "a": self.a,
            "N": list(self.counts),
            "theta": list(self.theta),
            "d": list(self.d),
            "levels": levels,
        }


def build_hierarchy(f: GaugeFunction, schedule: RadiusSchedule,
                    branching: BranchingPlan, theta="default",
                    disc_cap: int = DEFAULT_DISC_CAP) -> DiscHierarchy:
    """Assemble the hierarchy from a schedule and branching plan.

    ``theta`` is either "default" (increments r_{k+1}/r_k) or a sequence
    of K placement-angle increments.  Construction itself is O(sum N_k);
    the cap only limits later center materialisation.
    """
    K = schedule.depth
    if len(branching.counts) != K:
        raise BranchingError("branching counts must match the schedule depth")
    if theta == "default":
        lr = schedule.log_r
        th = tuple(math.exp(lr[k + 1] - lr[k]) for k in range(K))
    else:
        th = tuple(float(t) for t in theta)
        if len(th) != K:
            raise GaugeError("theta sequence must have one increment per level")
    d = []
    acc = 0.0
    for t in th:
        acc = math.fmod(acc + t, math.pi)
        d.append(acc)
    return DiscHierarchy(f, schedule, branching.a, branching.counts, th,
                         tuple(d), disc_cap)


def build_from_gauge(f: GaugeFunction, depth: int, theta="default",
                     disc_cap: int = DEFAULT_DISC_CAP) -> DiscHierarchy:
    """Schedule, branching and hierarchy in one step."""
    schedule = derive_radius_schedule(f, depth)
    plan = choose_branching(f, schedule)
    return build_hierarchy(f, schedule, plan, theta, disc_cap)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckRow:
    check: str
    level: int
    passed: bool
    margin: float
    note: str = ""


@dataclass(frozen=True)
class HierarchyReport:
    rows: tuple[CheckRow, ...]
    assumptions: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list[CheckRow]:
        return [r for r in self.rows if not r.passed]

    def by_check(self, check: str) -> list[CheckRow]:
        return [r for r in self.rows if r.check == check]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "rows": [{"check": r.check, "level": r.level, "passed": r.passed,
                      "margin": r.margin, "note": r.note} for r in self.rows],
            "assumptions": list(self.assumptions),
        }


def validate_hierarchy(h: DiscHierarchy, pairwise_cap: int = 200_000) -> HierarchyReport:
    """Exact per-level verification of every construction inequality.

    Margins are log-space slacks where the inequality is multiplicative
    and relative residuals for the spacing identity.  Levels whose disc
    count fits under ``pairwise_cap`` additionally get an independent
    all-pairs disjointness check on materialised centers.
    """
    f = h.gauge
    lr = h.schedule.log_r
    lf = [float(f.log_value(v)) for v in lr]
    log_a = math.log(h.a)
    rows: list[CheckRow] = []
    slack = 1e-9
    log_prod = 0.0
    for k in range(1, h.depth + 1):
        log_prod += math.log(h.counts[k - 1])
        r_k, r_prev = h.radius(k), h.radius(k - 1)
        n_k = h.counts[k - 1]

        lo = log_prod + lf[k] - log_a
        hi = math.log(2.0) + log_a - (log_prod + lf[k])
        rows.append(CheckRow("Eq20", k, min(lo, hi) >= -slack, min(lo, hi)))

        m21 = (lf[k - 1] + LOG_QUARTER) - lf[k]
        rows.append(CheckRow("Eq21", k, m21 > 0.0, m21))

        m22 = (lf[k] - lr[k]) - (LOG3 + lf[k - 1] - lr[k - 1])
        rows.append(CheckRow("Eq22", k, m22 > 0.0, m22))

        m23 = lr[k - 1] - (math.log(n_k) + lr[k])
        rows.append(CheckRow("Eq23", k, m23 > 0.0, m23))

        m25a = (math.log(2.0) + lf[k - 1] - lf[k]) - math.log(n_k)
        m25b = (math.log(2.0 / 3.0) + lr[k - 1] - lr[k]) - math.log(n_k)
        rows.append(CheckRow("Eq25", k, m25a >= -slack and m25b > 0.0,
                             min(m25a, m25b)))

        gap = h.gap(k)
        resid = abs(2 * n_k * r_k + (n_k - 1) * gap - 2 * r_prev) / r_prev
        rows.append(CheckRow("Eq32", k, resid <= 1e-9, resid,
                             note="spacing identity residual"))

        m33 = (gap - r_k) / r_k
        rows.append(CheckRow("Eq33", k, gap > r_k, m33))

        m_dis = (float(h.offsets(k)[1] - h.offsets(k)[0]) - 2 * r_k) / r_k
        rows.append(CheckRow("sibling-disjoint", k, m_dis > 0.0, m_dis))

        reach = float(np.abs(h.offsets(k)).max()) + r_k
        m_in = (r_prev * (1.0 + 1e-12) - reach) / r_prev
        rows.append(CheckRow("child-containment", k, m_in >= 0.0, m_in))

        if h.disc_count(k) <= pairwise_cap:
            centers = h.level_centers(k)
            if len(centers) > 1:
                from scipy.spatial import cKDTree
                tree = cKDTree(centers)
                pairs = tree.query_pairs(2.0 * r_k * (1.0 - 1e-12))
                rows.append(CheckRow("level-disjoint", k, len(pairs) == 0,
                                     float(len(pairs)),
                                     note="all-pairs center distances"))

    if h.theta:
        partial = np.cumsum(h.theta)
        monotone = bool(np.all(np.diff(partial) > 0))
        rows.append(CheckRow("angle-partial-sums", h.depth, monotone,
                             float(partial[-1]),
                             note="partial sums of placement increments"))
        ratios = [math.exp(lr[k + 1] - lr[k]) for k in range(h.depth)]
        resid = abs(sum(ratios) - float(partial[-1]))
        default_theta = resid <= 1e-12 * max(float(partial[-1]), 1.0)
        rows.append(CheckRow("angle-sum", h.depth, True, resid,
                             note="matches radius ratios" if default_theta
                             else "custom increments"))

    assumptions = (
        f"schedule inequalities verified to depth {h.depth} only; the "
        "construction assumes they continue for all deeper levels",
    )
    return HierarchyReport(tuple(rows), assumptions)
