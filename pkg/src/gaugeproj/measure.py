"""The natural measure on a hierarchy, mass-bound scans and energies.

The natural measure splits mass equally among children, so every level-k
disc carries exactly 1/(N_1 ... N_k).  Atoms sit at the centers of the
deepest built level.  Ball masses are computed by descending the implicit
tree (prune discs the ball misses, absorb discs it swallows whole), which
stays exact even when the full atom set is too large to materialise.

Energies are the discrete analogue of the double integral of
1/f(|x - y|): exact chunked double sums for small atom sets, seeded
mass-proportional pair sampling for large ones.  Coincident pairs are
resampled, never divided by f(0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gauges import GaugeFunction, GaugeError
from .hierarchy import DiscHierarchy, DiscCapExceeded


class EnergyEstimateError(RuntimeError):
    """The pair sampler could not produce enough distinct pairs."""


@dataclass(frozen=True, eq=False)
class NaturalMeasure:
    """Equal-split probability measure with atoms at depth-level centers."""

    hierarchy: DiscHierarchy
    depth: int

    def __post_init__(self):
        if not 1 <= self.depth <= self.hierarchy.depth:
            raise GaugeError("measure depth must lie within the built hierarchy")

    @property
    def log_atom_mass(self) -> float:
        return -sum(math.log(n) for n in self.hierarchy.counts[:self.depth])

    @property
    def atom_count(self) -> int:
        return self.hierarchy.disc_count(self.depth)

    def atom_coords(self) -> np.ndarray:
        """Materialised atom locations; raises DiscCapExceeded when too many."""
        return self.hierarchy.level_centers(self.depth)

    def atom_masses(self) -> np.ndarray:
        return np.full(self.atom_count, math.exp(self.log_atom_mass))

    def total_log_mass(self) -> float:
        """log of the summed atom masses; zero up to rounding."""
        return math.log(self.atom_count) + self.log_atom_mass

    def sample_atoms(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Centers of n uniformly sampled atoms (equal masses make uniform
        path sampling mass-proportional), without materialising the level."""
        h = self.hierarchy
        pts = np.zeros((n, 2))
        for level in range(1, self.depth + 1):
            idx = rng.integers(0, h.counts[level - 1], size=n)
            pts += h.offsets(level)[idx, None] * h.direction(level)[None, :]
        return pts


def ball_mass(m: NaturalMeasure, x, r: float) -> float:
    """Exact mass of the closed ball B(x, r) under the natural measure.

    Descends the disc tree: subtrees entirely inside the ball contribute
    their full mass, subtrees the ball cannot reach are pruned, and only
    boundary discs are expanded.
    """
    h = m.hierarchy
    x = np.asarray(x, dtype=float)
    active = np.zeros((1, 2))
    mass = 0.0
    level_mass = 1.0
    for level in range(1, m.depth + 1):
        r_lvl = h.radius(level)
        level_mass /= h.counts[level - 1]
        step = h.offsets(level)[:, None] * h.direction(level)[None, :]
        children = (active[:, None, :] + step[None, :, :]).reshape(-1, 2)
        dist = np.hypot(children[:, 0] - x[0], children[:, 1] - x[1])
        if level == m.depth:
            mass += level_mass * int(np.count_nonzero(dist <= r))
            break
        inside = dist + r_lvl <= r
        mass += level_mass * int(np.count_nonzero(inside))
        keep = (dist <= r + r_lvl) & ~inside
        active = children[keep]
        if len(active) == 0:
            break
        if len(active) > 2_000_000:
            raise DiscCapExceeded("ball descent touched too many discs")
    return mass


@dataclass(frozen=True)
class FrostmanScan:
    """Outcome of a mass-bound scan against C*f(r)."""

    c_emp: float
    c_bound: float
    violations: int
    samples: int
    worst: tuple[float, float, float]  # (x0, x1, r) achieving c_emp

    def to_dict(self) -> dict:
        return {"c_emp": self.c_emp, "c_bound": self.c_bound,
                "violations": self.violations, "samples": self.samples,
                "worst": list(self.worst)}


def frostman_scan(m: NaturalMeasure, f: GaugeFunction, samples: int, seed: int,
                  kappa: float = 1.0, mass_scale: float = 1.0) -> FrostmanScan:
    """Sample ratios mass(B(x, r)) / f(r) against the construction bound
    C = max(8/(a*kappa), 1/a).

    x ranges over atoms, log r uniformly over [log r_depth, log r_0]; a
    deterministic probe at each level's first disc center with r = r_k is
    always included, which pins the scan's sensitivity near 1/a.
    ``mass_scale`` rescales the measured masses and exists as a negative
    control (scaled masses must violate the bound).
    """
    h = m.hierarchy
    c_bound = max(8.0 / (h.a * kappa), 1.0 / h.a)
    rng = np.random.default_rng(seed)
    probes = [(h.first_path_center(k), h.radius(k)) for k in range(1, m.depth + 1)]
    n_random = max(samples - len(probes), 0)
    xs = m.sample_atoms(n_random, rng)
    log_r = rng.uniform(h.log_radius(m.depth), h.log_radius(0), size=n_random)
    probes.extend((xs[i], math.exp(log_r[i])) for i in range(n_random))

    c_emp = 0.0
    worst = (0.0, 0.0, 0.0)
    violations = 0
    for x, r in probes:
        ratio = mass_scale * ball_mass(m, x, r) / float(f.value(r))
        if ratio > c_emp:
            c_emp = ratio
            worst = (float(x[0]), float(x[1]), float(r))
        if ratio > c_bound * (1.0 + 1e-9):
            violations += 1
    return FrostmanScan(c_emp, c_bound, violations, len(probes), worst)


# ---------------------------------------------------------------------------
# Energies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyEstimate:
    mean: float
    stderr: float
    pairs_used: int
    collisions_rejected: int

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr,
                "pairs_used": self.pairs_used,
                "collisions_rejected": self.collisions_rejected}


def _as_coords(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    return pts


def discrete_energy(f: GaugeFunction, points, masses=None,
                    chunk: int = 1024) -> float:
    """Exact off-diagonal double sum of m_i m_j / f(|x_i - x_j|).

    Returns inf if distinct atoms coincide; raises when all atoms do.
    Points may be 1-d (line coordinates) or (n, 2) arrays.
    """
    pts = _as_coords(points)
    n = len(pts)
    if n < 2:
        raise GaugeError("discrete energy needs at least two atoms")
    w = (np.full(n, 1.0 / n) if masses is None
         else np.asarray(masses, dtype=float))
    total = 0.0
    seen_distinct = False
    coincident = False
    # reused buffers keep the block loop at memory bandwidth
    dist = np.empty((min(chunk, n), n))
    aux = np.empty_like(dist) if pts.shape[1] == 2 else None
    for i0 in range(0, n, chunk):
        i1 = min(i0 + chunk, n)
        d = dist[:i1 - i0]
        if pts.shape[1] == 1:
            np.subtract(pts[i0:i1, 0][:, None], pts[None, :, 0], out=d)
            np.abs(d, out=d)
        else:
            a = aux[:i1 - i0]
            np.subtract(pts[i0:i1, 0][:, None], pts[None, :, 0], out=d)
            np.multiply(d, d, out=d)
            np.subtract(pts[i0:i1, 1][:, None], pts[None, :, 1], out=a)
            np.multiply(a, a, out=a)
            np.add(d, a, out=d)
            np.sqrt(d, out=d)
        zero = d == 0.0
        np.fill_diagonal(zero[:, i0:i1], False)
        coincident = coincident or bool(zero.any())
        np.fill_diagonal(zero[:, i0:i1], True)  # back to all zero-distance cells
        d[zero] = 1.0  # dummy; these entries are zeroed below
        if f.family == "power":
            np.power(d, -f.s, out=d)
            vals = d
        else:
            vals = np.asarray(f.reciprocal(d))
        vals[zero] = 0.0
        seen_distinct = seen_distinct or bool((vals > 0).any())
        total += float(w[i0:i1] @ (vals @ w))
    if not seen_distinct:
        raise GaugeError("all atoms coincide; discrete energy undefined")
    return math.inf if coincident else total


def _pair_values(f: GaugeFunction, coords: np.ndarray, weights,
                 pairs: int, rng: np.random.Generator):
    n = len(coords)
    if weights is None:
        draw = lambda k: rng.integers(0, n, size=(2, k))
    else:
        p = np.asarray(weights, dtype=float)
        p = p / p.sum()
        draw = lambda k: rng.choice(n, size=(2, k), p=p)
    i, j = draw(pairs)
    d = np.linalg.norm(coords[i] - coords[j], axis=-1)
    rejected = 0
    for _ in range(128):
        bad = d == 0.0
        n_bad = int(bad.sum())
        if n_bad == 0:
            break
        rejected += n_bad
        if rejected > 4 * pairs:
            raise EnergyEstimateError(
                "runaway pair rejection: atoms coincide almost surely")
        i2, j2 = draw(n_bad)
        d[bad] = np.linalg.norm(coords[i2] - coords[j2], axis=-1)
    vals = np.asarray(f.reciprocal(d), dtype=float)
    return vals, rejected


def _check_self_mass(self_mass: float) -> None:
    if self_mass > 0.5:
        raise EnergyEstimateError(
            "pair rejection rate above 50%: measure too atomic at this depth")


def _estimate(vals: np.ndarray, pairs: int, rejected: int,
              self_mass: float) -> EnergyEstimate:
    # resampling estimates the mean conditional on distinct locations;
    # rescaling by the exact self-pair probability sum(m_i^2) recovers the
    # off-diagonal double sum that discrete_energy computes
    scale = 1.0 - self_mass
    mean = float(vals.mean()) * scale
    stderr = float(vals.std(ddof=1) / math.sqrt(len(vals))) * scale
    return EnergyEstimate(mean, stderr, pairs, rejected)


def mc_energy_atoms(f: GaugeFunction, points, masses, pairs: int,
                    seed: int) -> EnergyEstimate:
    """Monte Carlo energy of an explicit weighted atom list."""
    if pairs < 10 ** 3:
        raise GaugeError("use at least 1000 pairs")
    coords = _as_coords(points)
    n = len(coords)
    if masses is None:
        self_mass = 1.0 / n
    else:
        p = np.asarray(masses, dtype=float)
        p = p / p.sum()
        self_mass = float(np.sum(p * p))
    _check_self_mass(self_mass)
    rng = np.random.default_rng(seed)
    vals, rejected = _pair_values(f, coords, masses, pairs, rng)
    return _estimate(vals, pairs, rejected, self_mass)


def mc_energy(f: GaugeFunction, m: NaturalMeasure, pairs: int,
              seed: int) -> EnergyEstimate:
    """Monte Carlo estimate of the natural measure's energy for gauge f.

    Atom pairs are sampled mass-proportionally (uniform paths, since the
    split is equal) without materialising the atom set.
    """
    if pairs < 10 ** 3:
        raise GaugeError("use at least 1000 pairs")
    _check_self_mass(math.exp(m.log_atom_mass))
    rng = np.random.default_rng(seed)
    a = m.sample_atoms(pairs, rng)
    b = m.sample_atoms(pairs, rng)
    d = np.linalg.norm(a - b, axis=-1)
    rejected = 0
    for _ in range(128):
        bad = d == 0.0
        n_bad = int(bad.sum())
        if n_bad == 0:
            break
        rejected += n_bad
        if rejected > 4 * pairs:
            raise EnergyEstimateError(
                "runaway pair rejection: atoms coincide almost surely")
        d[bad] = np.linalg.norm(m.sample_atoms(n_bad, rng) - m.sample_atoms(n_bad, rng),
                                axis=-1)
    vals = np.asarray(f.reciprocal(d), dtype=float)
    return _estimate(vals, pairs, rejected, math.exp(m.log_atom_mass))


def potential(f: GaugeFunction, m: NaturalMeasure, x, pairs: int,
              seed: int) -> float:
    """Monte Carlo estimate of the potential integral of 1/f(|x - y|) d mu(y)."""
    if pairs < 10 ** 3:
        raise GaugeError("use at least 1000 pairs")
    rng = np.random.default_rng(seed)
    x = np.asarray(x, dtype=float)
    y = m.sample_atoms(pairs, rng)
    d = np.linalg.norm(y - x, axis=-1)
    rejected = 0
    for _ in range(64):
        bad = d == 0.0
        n_bad = int(bad.sum())
        if n_bad == 0:
            break
        rejected += n_bad
        if rejected > pairs:
            raise EnergyEstimateError("x coincides with too much of the measure")
        d[bad] = np.linalg.norm(m.sample_atoms(n_bad, rng) - x, axis=-1)
    return float(np.mean(1.0 / np.asarray(f.value(d), dtype=float)))


def capacity_lower_bound(f: GaugeFunction, m: NaturalMeasure, pairs: int,
                         seed: int) -> float:
    """1 / (estimated energy): one admissible measure's witness that the
    capacity is at least this large."""
    return 1.0 / mc_energy(f, m, pairs, seed).mean
