# metric.py - The Frechet metric on Hol(D) with certified two-sided evaluation
"""
d(f, g) = sum_{j>=1} lambda_j min{1, max_{|z|<=r_j} |f(z) - g(z)|}

with lambda_j = lam**j and r_j = 1 - (j + 1)**(-alpha). Only the first J terms
are evaluated; the discarded terms are at most sum_{j>J} lambda_j, which is
added to the upper endpoint.

Also: the coefficient lower bound for class-A pairs and the truncation tail
bounds for class B.
"""

from __future__ import annotations

import logging
import math
from typing import Literal

import numpy as np

from domain.models import BoundInterval, MetricConfig, TaylorPoly
from series_core import DEFAULT_SLACK, circle_points, horner

logger = logging.getLogger(__name__)

TailMode = Literal["simple", "exact", "paper"]
TAIL_MODES = ("simple", "exact")
# accepted spellings of a mode -> canonical name
TAIL_MODE_ALIASES = {"paper": "simple"}


def lambdas(cfg: MetricConfig, terms: int | None = None) -> np.ndarray:
    """lambda_j = lam**j for j = 1..terms (default J)."""
    J = cfg.metric_terms if terms is None else terms
    return cfg.lam ** np.arange(1, J + 1, dtype=np.float64)


def radii(cfg: MetricConfig, terms: int | None = None) -> np.ndarray:
    """r_j = 1 - (j + 1)**(-alpha), j = 1..terms (default J); increasing in (0, 1)."""
    J = cfg.metric_terms if terms is None else terms
    j = np.arange(1, J + 1, dtype=np.float64)
    return -np.expm1(-cfg.alpha * np.log1p(j))


def radius_at(cfg: MetricConfig, j: int) -> float:
    """r_j for a single index j >= 1."""
    return -math.expm1(-cfg.alpha * math.log1p(j))


def lambda_r_power(cfg: MetricConfig, k: int) -> float:
    """lambda_k * r_k**k (underflows to 0 for very large k; see log_lambda_r_power)."""
    return cfg.lam**k * radius_at(cfg, k) ** k


def log_lambda_r_power(cfg: MetricConfig, k: int) -> float:
    """log(lambda_k * r_k**k) = k log lam + k log(1 - (k + 1)**(-alpha))."""
    return k * math.log(cfg.lam) + k * math.log1p(-((k + 1.0) ** (-cfg.alpha)))


def metric_tail_bound(cfg: MetricConfig) -> float:
    """sum_{j>J} lambda_j = lam**(J+1) / (1 - lam)."""
    return cfg.lam ** (cfg.metric_terms + 1) / (1.0 - cfg.lam)


def term_bounds(coeffs: np.ndarray, cfg: MetricConfig) -> tuple[np.ndarray, np.ndarray]:
    """
    Per-term enclosures [lo_j, hi_j] of max_{|z|=r_j} |p| for j = 1..J, where p
    has coefficients `coeffs` (a_1 first). Same rule as
    series_core.max_modulus_interval, vectorized over the J circles.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    r = radii(cfg)
    M = cfg.circle_samples
    unit = circle_points(1.0, M)
    grid = r[:, None] * unit[None, :]
    lo = np.max(np.abs(horner(coeffs, grid)), axis=1)

    k = np.arange(1, coeffs.shape[0] + 1, dtype=np.float64)
    mags = np.abs(coeffs)
    powers = r[:, None] ** k[None, :]
    l1 = np.sum(mags[None, :] * powers, axis=1)
    deriv = np.sum((k * mags)[None, :] * powers / r[:, None], axis=1)
    lipschitz = lo + (np.pi * r / M) * deriv
    hi = np.maximum(lo, np.minimum(lipschitz, l1))
    return lo, hi


def interval_from_terms(
    lo_terms: np.ndarray, hi_terms: np.ndarray, cfg: MetricConfig
) -> BoundInterval:
    weights = lambdas(cfg)
    lo = math.fsum(weights * np.minimum(1.0, lo_terms))
    hi = math.fsum(weights * np.minimum(1.0, hi_terms)) + metric_tail_bound(cfg)
    return BoundInterval(lo, hi)


def metric_d(f: TaylorPoly, g: TaylorPoly, cfg: MetricConfig) -> BoundInterval:
    """
    Certified enclosure of d(f, g). Symmetric: f - g and g - f differ by an
    exact sign flip, so both orders give identical intervals.
    """
    size = max(f.degree, g.degree)
    diff = f.as_array(size) - g.as_array(size)
    if not np.any(diff):
        return BoundInterval(0.0, metric_tail_bound(cfg))
    lo_terms, hi_terms = term_bounds(diff, cfg)
    return interval_from_terms(lo_terms, hi_terms, cfg)


def coeff_distance_lower(
    f: TaylorPoly, g: TaylorPoly, cfg: MetricConfig, tol: float = DEFAULT_SLACK
) -> float:
    """
    sum_{k>=2} (lambda_k r_k^k / 2) |a_k - b_k| over the stored coefficients.
    A lower bound for d(f, g) whenever f and g are in class A.
    """
    for name, p in (("f", f), ("g", g)):
        if abs(p.coeffs[0] - 1.0) > tol:
            raise ValueError(
                f"{name} must have first coefficient 1, got {p.coeffs[0]!r}"
            )
    size = max(f.degree, g.degree)
    diff = np.abs(f.as_array(size) - g.as_array(size))
    terms = [lambda_r_power(cfg, k) / 2.0 * diff[k - 1] for k in range(2, size + 1)]
    return math.fsum(terms)


def tail_terms(n: int, cfg: MetricConfig, mode: TailMode = "exact") -> np.ndarray:
    """
    Uncapped per-circle bounds T_j on sum_{k>=n+1} k r_j^k, j = 1..J:
      simple: (n + 2) r^(n+1) / (1 - r)^2
      exact: r^(n+1) (n + 1 - n r) / (1 - r)^2   (closed form of the sum)
    "paper" is accepted as another name for simple.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"Truncation degree must be an integer >= 1, got {n!r}")
    mode = TAIL_MODE_ALIASES.get(mode, mode)
    if mode not in TAIL_MODES:
        raise ValueError(f"Unknown tail mode {mode!r}; expected one of {TAIL_MODES}")
    j = np.arange(1, cfg.metric_terms + 1, dtype=np.float64)
    one_minus_r = np.exp(-cfg.alpha * np.log1p(j))
    # extreme alpha underflows (1 - r)^2 to zero; the term is then capped at 1
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        head = np.exp((n + 1) * np.log1p(-one_minus_r)) / one_minus_r**2
        if mode == "simple":
            terms = (n + 2) * head
        else:
            terms = head * (1.0 + n * one_minus_r)
    return np.where(np.isnan(terms), np.inf, terms)


def truncation_tail_bound(n: int, cfg: MetricConfig, mode: TailMode = "exact") -> float:
    """
    sum_{j<=J} lambda_j min{1, T_j} + metric_tail_bound(cfg): an upper bound on
    d(f, trunc_n(f)) for every f in class B. The exact mode never exceeds the
    simple mode.
    """
    capped = np.minimum(1.0, tail_terms(n, cfg, mode))
    return math.fsum(lambdas(cfg) * capped) + metric_tail_bound(cfg)
