"""Numeric verdicts for the analytic conditions separating projection regimes.

Every check reduces to the behaviour of an integral or series near zero.
The machinery is shared:

1. split (0, 1] into dyadic shells [2**-(n+1), 2**-n] and compute each
   shell's contribution by Gauss-Legendre quadrature in log coordinates;
2. condense the shell contributions into base-2 blocks (Cauchy
   condensation) and fit the block decay exponent;
3. map the fitted exponent to finite / divergent / inconclusive.

Condensation makes the classification scale-free: shell tails n**p turn
into blocks with exponent p + 1, so summability (p < -1) maps to negative
block exponents, geometric decay maps far below, and the critical 1/n
family lands exactly at zero.  The thresholds (finite at or below -0.1,
divergent at or above -0.02) are artifact decisions and are carried in
every verdict's diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import logsumexp

from .gauges import GaugeFunction, GaugeError, log_ratio

LOG2 = math.log(2.0)

FINITE = "finite"
DIVERGENT = "divergent"
INCONCLUSIVE = "inconclusive"

FINITE_BELOW = -0.1    # block decay exponent at or under this: summable
DIVERGENT_ABOVE = -0.02  # at or over this: bounded-below or growing blocks


@dataclass(frozen=True)
class ConditionVerdict:
    """Outcome of one analytic check.

    ``value`` is populated only when the status is finite; ``shell_sums``
    are the per-shell (or per-probe) contributions the verdict was read
    from, and ``diagnostics`` records grid, fitted exponent and thresholds.
    """

    status: str
    value: float | None
    shell_sums: tuple[float, ...]
    diagnostics: str

    @property
    def is_finite(self) -> bool:
        return self.status == FINITE

    @property
    def is_divergent(self) -> bool:
        return self.status == DIVERGENT


# ---------------------------------------------------------------------------
# Tail classification
# ---------------------------------------------------------------------------

def classify_log_tail(log_terms, finite_below: float = FINITE_BELOW,
                      divergent_above: float = DIVERGENT_ABOVE):
    """Classify a positive-term tail given the logs of its terms.

    Returns (status, fitted_block_exponent, detail).  Terms may be -inf
    (exact zeros).  A window of trailing base-2 blocks is fitted with
    least squares on log2(block sum) against block index.
    """
    lt = np.asarray(log_terms, dtype=float)
    n = len(lt)
    blocks = []
    j = 0
    while 2 ** (j + 1) <= n:
        blocks.append(logsumexp(lt[2 ** j:2 ** (j + 1)]))
        j += 1
    blocks = np.asarray(blocks)
    if len(blocks) < 3:
        return INCONCLUSIVE, math.nan, "too few blocks to classify"
    # only the trailing blocks carry the asymptotics; early ones still feel
    # slowly varying prefactors
    skip = max(len(blocks) - 5, min(2, len(blocks) - 3))
    window = blocks[skip:]
    peak = blocks.max()
    if peak == -math.inf or window.max() < peak - 600.0:
        return FINITE, -math.inf, "tail vanished below working precision"
    finite_mask = np.isfinite(window)
    if finite_mask.sum() < 3:
        return FINITE, -math.inf, "tail vanished below working precision"
    idx = np.arange(skip, len(blocks), dtype=float)[finite_mask]
    y = window[finite_mask] / LOG2
    x0 = idx - idx.mean()
    lam = float(np.dot(x0, y) / np.dot(x0, x0))
    detail = (f"block decay exponent {lam:.4f} over trailing {finite_mask.sum()} "
              f"blocks (finite <= {finite_below}, divergent >= {divergent_above})")
    if lam <= finite_below:
        return FINITE, lam, detail
    if lam >= divergent_above:
        return DIVERGENT, lam, detail
    return INCONCLUSIVE, lam, detail


# ---------------------------------------------------------------------------
# Shell quadrature
# ---------------------------------------------------------------------------

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl(order: int):
    if order not in _GL_CACHE:
        x, w = leggauss(order)
        _GL_CACHE[order] = ((x + 1.0) / 2.0, w / 2.0)  # on [0, 1]
    return _GL_CACHE[order]


def _panel_values(fn, lo: np.ndarray, hi: np.ndarray, order: int) -> np.ndarray:
    """Integral of fn over each [lo_i, hi_i] panel by fixed-order GL."""
    x, w = _gl(order)
    width = hi - lo
    v = lo[:, None] + width[:, None] * x[None, :]
    vals = fn(v.ravel()).reshape(v.shape)
    return width * (vals @ w)


def dyadic_shell_sums(fn, n_shells: int = 4096, order: int = 24,
                      refine_tol: float = 1e-11) -> np.ndarray:
    """Per-shell integrals of fn(log r) d(log r) over [2**-(n+1), 2**-n].

    fn must be vectorised over log radii.  Shells where a low/high order
    comparison disagrees beyond refine_tol (relative to the shell) are
    re-integrated on four subpanels; one round suffices for the piecewise
    smooth integrands used here, but up to three are attempted.
    """
    edges_hi = -LOG2 * np.arange(n_shells, dtype=float)
    edges_lo = edges_hi - LOG2
    coarse = _panel_values(fn, edges_lo, edges_hi, max(order // 2, 8))
    fine = _panel_values(fn, edges_lo, edges_hi, order)
    sums = fine.copy()
    scale = np.maximum(np.abs(fine), 1e-300)
    bad = np.abs(fine - coarse) > refine_tol * scale
    splits = 4
    for _ in range(3):
        if not bad.any():
            break
        idx = np.nonzero(bad)[0]
        for i in idx:
            sub = np.linspace(edges_lo[i], edges_hi[i], splits + 1)
            pieces = _panel_values(fn, sub[:-1], sub[1:], order)
            sums[i] = pieces.sum()
        bad = np.zeros_like(bad)
        splits *= 4
    return sums


def _tail_integral(fn, u0: float, order: int = 16, max_panels: int = 200) -> float:
    """Integral of fn(-u) du over [u0, inf), via u = e**w unit panels.

    fn is the same log-radius integrand; u = -log r.  Converges whenever
    the integrand decays at least like a power of u.
    """
    w0 = math.log(u0)
    total = 0.0
    for m in range(max_panels):
        lo, hi = w0 + m, w0 + m + 1.0
        x, w = _gl(order)
        ws = lo + (hi - lo) * x
        us = np.exp(ws)
        vals = fn(-us) * us
        piece = float((hi - lo) * np.dot(vals, w))
        total += piece
        if m > 2 and abs(piece) <= 1e-15 * max(abs(total), 1e-300):
            break
    return total


def _log_of(sums: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(sums > 0, np.log(np.maximum(sums, 1e-320)), -math.inf)


def _check_g_increasing(g: GaugeFunction, probe: np.ndarray) -> None:
    d = np.asarray(g.dlog(probe))
    if np.any(d < -1e-12):
        raise GaugeError("g must be increasing: negative slope on the grid")
    if not np.any(d > 0):
        raise GaugeError("g is flat on the entire grid")


def _ratio_integrand(f: GaugeFunction, g: GaugeFunction, shift: float = 0.0):
    """(f(r)/g(t*r)) * dlog g(t*r), the density of -f d(1/g(t.)) in log r.

    The ratio is assembled from the power/slow decomposition of each gauge
    so that shared power factors cancel exactly.
    """
    d_alpha = f.power_part - g.power_part
    g_alpha_shift = g.power_part * shift

    def fn(v):
        v = np.asarray(v, dtype=float)
        lr = (d_alpha * v - g_alpha_shift
              + np.asarray(f.log_value_slow(v))
              - np.asarray(g.log_value_slow(v + shift)))
        dl = np.asarray(g.dlog(v + shift), dtype=float)
        return np.exp(np.clip(lr, -745.0, 700.0)) * dl
    return fn


# ---------------------------------------------------------------------------
# Condition checks
# ---------------------------------------------------------------------------

def check_integral_condition(f: GaugeFunction, g: GaugeFunction,
                             n_shells: int = 4096) -> ConditionVerdict:
    """Verdict on -integral_0^1 f(r) d(1/g(r)) < infinity.

    The integrand f * g'/g**2 is integrated shell by shell in log-r
    coordinates; when finite, the value includes a continuation integral
    for the truncated tail below 2**-n_shells.
    """
    probe = -LOG2 * np.arange(1, 64, dtype=float)
    _check_g_increasing(g, probe)
    fn = _ratio_integrand(f, g)
    sums = dyadic_shell_sums(fn, n_shells)
    status, lam, detail = classify_log_tail(_log_of(sums))
    value = None
    tail_note = ""
    if status == FINITE:
        tail = _tail_integral(fn, n_shells * LOG2)
        value = float(sums.sum() + tail)
        tail_note = f"; tail continuation {tail:.3e}"
    diag = (f"{n_shells} dyadic shells, quadrature in log r; {detail}{tail_note}")
    return ConditionVerdict(status, value, tuple(sums.tolist()), diag)


def check_limit_condition(f: GaugeFunction, g: GaugeFunction,
                          max_log2_n: int = 60) -> ConditionVerdict:
    """Verdict on lim_{r->0} f(r)/g(r) = 0.

    The ratio is sampled at r = 2**-n with n log-spaced up to 2**max_log2_n
    (log-space evaluation makes arbitrarily deep radii free), so slowly
    vanishing ratios still certify below the 1e-6 tolerance.
    """
    ns = 2.0 ** np.arange(0, max_log2_n + 1)
    v = -ns * LOG2
    lr = np.asarray(log_ratio(f, g, v), dtype=float)
    ratios = np.exp(np.clip(lr, -745.0, 700.0))
    tail = ratios[-12:]
    decreasing = bool(np.all(np.diff(tail) <= 1e-12 * np.maximum(tail[:-1], 1e-300)))
    if decreasing and tail[-1] < 1e-6:
        diag = f"ratio at r = 2^-2^{max_log2_n}: {tail[-1]:.3e}; decreasing tail"
        return ConditionVerdict(FINITE, 0.0, tuple(ratios.tolist()), diag)
    lt = np.log(np.maximum(tail, 1e-320))
    slope = float(np.polyfit(np.arange(len(tail)), lt, 1)[0])
    if tail.min() >= 1e-6 and slope >= -0.01:
        diag = f"ratio bounded away from 0 (tail min {tail.min():.3e}, slope {slope:.3f})"
        return ConditionVerdict(DIVERGENT, None, tuple(ratios.tolist()), diag)
    diag = f"tail neither certified zero nor bounded away (last {tail[-1]:.3e})"
    return ConditionVerdict(INCONCLUSIVE, None, tuple(ratios.tolist()), diag)


def _shifted_total(f: GaugeFunction, g: GaugeFunction, log_t: float,
                   n_shells: int):
    fn = _ratio_integrand(f, g, shift=log_t)
    sums = dyadic_shell_sums(fn, n_shells)
    status, lam, detail = classify_log_tail(_log_of(sums))
    total = None
    if status == FINITE:
        total = float(sums.sum() + _tail_integral(fn, n_shells * LOG2))
    return status, total, detail


def check_rate_condition(f: GaugeFunction, g: GaugeFunction, t_grid=None,
                         n_shells: int = 2048) -> ConditionVerdict:
    """Verdict on sup_t g(t) * (-integral_0^1 f(r) d(1/g(t r))) < infinity.

    Each scaled integral is evaluated like the plain integral condition;
    the rescaled values R(t) are then examined for boundedness along a
    t grid decreasing toward the floating-point range.
    """
    if t_grid is None:
        log_t = [-(8.0 * 2 ** j) * LOG2 for j in range(7)]
    else:
        t = np.asarray(t_grid, dtype=float)
        if np.any(t <= 0) or np.any(t >= 1):
            raise GaugeError("t grid must lie in (0, 1)")
        log_t = list(np.log(np.sort(t)[::-1]))
    rates = []
    for lt in log_t:
        status, total, detail = _shifted_total(f, g, lt, n_shells)
        if status != FINITE:
            diag = f"scaled integral at log t = {lt:.1f} is {status}: {detail}"
            return ConditionVerdict(DIVERGENT, None, tuple(rates), diag)
        rates.append(math.exp(g.log_value(lt)) * total)
    w = np.log(-np.asarray(log_t))
    slope = float(np.polyfit(w, np.log(np.maximum(rates, 1e-320)), 1)[0])
    diag = (f"R(t) over {len(rates)} scales, trend slope {slope:.3f} "
            f"in log(-log t) (finite <= 0.05, divergent >= 0.15)")
    if slope <= 0.05:
        return ConditionVerdict(FINITE, float(max(rates)), tuple(rates), diag)
    if slope >= 0.15:
        return ConditionVerdict(DIVERGENT, None, tuple(rates), diag)
    return ConditionVerdict(INCONCLUSIVE, None, tuple(rates), diag)


def check_length_criterion(f: GaugeFunction, n_shells: int = 4096) -> ConditionVerdict:
    """Verdict on integral_0^1 f(r)/r**2 dr < infinity.

    Precondition (checked): f(r)/r**2 decreasing, i.e. dlog f <= 2.  A
    finite verdict predicts positive-length projections almost everywhere.
    """
    probe = -LOG2 * np.arange(0, 256, dtype=float) - 0.3
    if np.any(np.asarray(f.dlog(probe)) > 2.0 + 1e-12):
        raise GaugeError("precondition violated: f(r)/r^2 must be decreasing")

    def fn(v):
        lf = np.asarray(f.log_value(v), dtype=float)
        return np.exp(np.clip(lf - v, -745.0, 700.0))

    sums = dyadic_shell_sums(fn, n_shells)
    status, lam, detail = classify_log_tail(_log_of(sums))
    value = None
    note = ""
    if status == FINITE:
        value = float(sums.sum() + _tail_integral(fn, n_shells * LOG2))
        note = "; a.e. projection has positive length predicted"
    diag = f"shell quadrature of f(r)/r^2; {detail}{note}"
    return ConditionVerdict(status, value, tuple(sums.tolist()), diag)


def check_divergence_of_df_over_g(f: GaugeFunction, g: GaugeFunction,
                                  n_shells: int = 4096) -> ConditionVerdict:
    """Verdict on integral_0^1 df(r)/g(r) via midpoint Stieltjes shell sums.

    Shell n contributes (f(2**-n) - f(2**-(n+1))) / g(xi_n) with xi_n the
    log-scale shell midpoint; everything is assembled in log space so deep
    shells where f itself underflows still participate.
    """
    n = np.arange(n_shells, dtype=float)
    v_hi = -n * LOG2
    v_lo = v_hi - LOG2
    lf_hi = np.asarray(f.log_value(v_hi), dtype=float)
    lf_lo = np.asarray(f.log_value(v_lo), dtype=float)
    d = lf_lo - lf_hi
    with np.errstate(divide="ignore", invalid="ignore"):
        log_df = np.where(d < 0, lf_hi + np.log(-np.expm1(np.minimum(d, -1e-320))),
                          -math.inf)
    log_g_mid = np.asarray(g.log_value(v_hi - 0.5 * LOG2), dtype=float)
    log_terms = log_df - log_g_mid
    status, lam, detail = classify_log_tail(log_terms)
    value = float(np.exp(logsumexp(log_terms))) if status == FINITE else None
    diag = f"{n_shells} Stieltjes shells with log-midpoint evaluation; {detail}"
    return ConditionVerdict(status, value, tuple(np.exp(log_terms).tolist()), diag)


# ---------------------------------------------------------------------------
# Quadrature helpers used by tests and the rate diagnostics
# ---------------------------------------------------------------------------

def df_over_g_integral(f: GaugeFunction, g: GaugeFunction, log_t: float = 0.0,
                       v_hi: float = 0.0, n_shells: int = 4096) -> float:
    """Quadrature value of integral over r in (0, e**v_hi] of df(r)/g(t r)."""
    def fn(v):
        lf = np.asarray(f.log_value(v), dtype=float)
        lg = np.asarray(g.log_value(v + log_t), dtype=float)
        dl = np.asarray(f.dlog(v), dtype=float)
        return np.exp(np.clip(lf - lg, -745.0, 700.0)) * dl

    edges_hi = v_hi - LOG2 * np.arange(n_shells, dtype=float)
    edges_lo = edges_hi - LOG2
    sums = _panel_values(fn, edges_lo, edges_hi, 24)
    return float(sums.sum() + _tail_integral(fn, -(v_hi - n_shells * LOG2)))


def rate_condition_split(f: GaugeFunction, g: GaugeFunction, t: float,
                         n_shells: int = 2048) -> dict:
    """Decomposition of the scaled integral at one t.

    Returns the inner piece (r <= t), the outer piece (t < r <= 1) of
    integral df(r)/g(t r), the boundary term f(1)/g(t) and the rescaled
    total R(t).  Useful for checking explicit proof constants.
    """
    if not 0 < t < 1:
        raise GaugeError("t must lie in (0, 1)")
    log_t = math.log(t)
    inner = df_over_g_integral(f, g, log_t=log_t, v_hi=log_t, n_shells=n_shells)
    n_outer = max(int(math.ceil(-log_t / LOG2)), 1)
    edges = np.linspace(log_t, 0.0, n_outer + 1)

    def fn(v):
        lf = np.asarray(f.log_value(v), dtype=float)
        lg = np.asarray(g.log_value(v + log_t), dtype=float)
        dl = np.asarray(f.dlog(v), dtype=float)
        return np.exp(np.clip(lf - lg, -745.0, 700.0)) * dl

    outer = float(_panel_values(fn, edges[:-1], edges[1:], 24).sum())
    boundary = math.exp(f.log_value(0.0) - g.log_value(log_t))
    total = inner + outer - boundary
    rate = math.exp(g.log_value(log_t)) * total
    return {"t": t, "inner": inner, "outer": outer, "boundary": boundary,
            "total": total, "rate": rate}
