# constructions.py - Explicit packings, nets and the covering-number bound curves
"""
Lower side (class A): the K^(n-1) polynomials

    f_t(z) = z + sum_{k=2..n} t_k / (k n K) z^k,   t_k in {1..K},

are pairwise separated by min_k(lambda_k r_k^k / 2) / (n^2 K) through the
coefficient lower bound, so N_A(separation/3) >= K^(n-1). With rho = 1/m
chosen so that min_k(lambda_k r_k^k / 6) / n^2 >= rho^n for all n, taking
K = rho^-n gives N_A(rho^(2n)) >= rho^(-n(n-1)).

Upper side (class B): truncate to degree n, then round every coefficient to
the grid k*(s + i t)/K, s, t in -K..K. Each coefficient moves by at most
k/(sqrt(2) K) <= n/K, so the centers are within C n^2/K + tau of every
member, tau being the truncation tail bound and C = lam/(1 - lam).

The grid spacing is k/K per axis, which covers the whole square [-k, k]^2
around each coefficient disk; the centers satisfy only |q_k| <= sqrt(2) k,
so the net is external (NetCertificate.internal is False).
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import replace
from typing import Iterator, Sequence

import numpy as np

from domain.models import (
    ClassId,
    CurvePoint,
    MetricConfig,
    NetCertificate,
    PackingCertificate,
    Rho,
    SandwichRow,
    TaylorPoly,
)
from function_classes import is_member, koebe
from metric import (
    lambda_r_power,
    lambdas,
    log_lambda_r_power,
    metric_d,
    radii,
    truncation_tail_bound,
)
from series_core import DEFAULT_SLACK

logger = logging.getLogger(__name__)

PACKING_FAMILIES = ("A", "convex")
MAX_RHO_DENOMINATOR = 10**6
RHO_HORIZON = 200
MAX_ENUMERATED_MEMBERS = 10**4

# Bands below are the reference run (lam = 1/2, alpha = 1, J = 60, M = 4096)
# widened by at least 13% on each side.
# -log(tau_n)/sqrt(n) for the exact truncation tail bound, n in 25..400;
# reference run 0.461 .. 1.067
TAIL_RATE_BAND = (0.40, 1.25)
# -log(koebe_sharpness_lower(n))/sqrt(n), n in 25..400; reference run 1.290 .. 1.532
SHARPNESS_RATE_BAND = (1.10, 1.75)
# log_count / n^1.5 of the upper curve, n in 20..200, default configuration
NET_COUNT_BAND = (1.0, 10.0)
# log_count / log^3(1/delta) of the upper curve, n in 20..200; reference max 219.7
UPPER_CUBIC_RATIO_BOUND = 250.0


# -----------------------------------------------------------------------------
# Exceptions
# -----------------------------------------------------------------------------


class RhoSearchError(RuntimeError):
    """No rho = 1/m < lambda with m <= MAX_RHO_DENOMINATOR meets the constraint."""


class NetUnderflowError(RuntimeError):
    """Raised when the truncation tail bound underflows so that K cannot be chosen."""

    def __init__(self, n: int, message: str):
        super().__init__(message)
        self.n = n


# -----------------------------------------------------------------------------
# Packing (lower side)
# -----------------------------------------------------------------------------


def _check_family(family: str) -> None:
    if family not in PACKING_FAMILIES:
        raise ValueError(
            f"Unknown packing family {family!r}; expected one of {PACKING_FAMILIES}"
        )


def _check_n_k(n: int, K: int, n_min: int = 2) -> None:
    if not isinstance(n, int) or isinstance(n, bool) or n < n_min:
        raise ValueError(f"n must be an integer >= {n_min}, got {n!r}")
    if not isinstance(K, int) or isinstance(K, bool) or K < 1:
        raise ValueError(f"K must be an integer >= 1, got {K!r}")


def packing_member(n: int, K: int, t: Sequence[int], family: str = "A") -> TaylorPoly:
    """
    z + sum_{k=2..n} t_k / (k n K) z^k ("A"), or with weight 1/(k^2 n K)
    ("convex", whose members satisfy the sum k^2|a_k| <= 1 condition).
    """
    _check_n_k(n, K)
    _check_family(family)
    t = list(t)
    if len(t) != n - 1:
        raise ValueError(f"Index vector must have length n - 1 = {n - 1}, got {len(t)}")
    for k, t_k in enumerate(t, start=2):
        if not isinstance(t_k, (int, np.integer)) or not (1 <= t_k <= K):
            raise ValueError(f"t_{k} must be an integer in 1..{K}, got {t_k!r}")
    coeffs = [1.0 + 0j]
    for k, t_k in enumerate(t, start=2):
        scale = k * n * K if family == "A" else k * k * n * K
        coeffs.append(complex(int(t_k) / scale))
    return TaylorPoly(tuple(coeffs))


def packing_index_vector(n: int, K: int, index: int) -> list[int]:
    """Base-K digits of index as (t_2, ..., t_n), t_2 most significant, each in 1..K."""
    _check_n_k(n, K)
    count = K ** (n - 1)
    if not (0 <= index < count):
        raise ValueError(f"Member index must lie in 0..{count - 1}, got {index}")
    digits = []
    for _ in range(n - 1):
        index, d = divmod(index, K)
        digits.append(d + 1)
    return digits[::-1]


def iter_packing_members(n: int, K: int, family: str = "A") -> Iterator[TaylorPoly]:
    """All K^(n-1) members in index order, generated lazily."""
    for t in itertools.product(range(1, K + 1), repeat=n - 1):
        yield packing_member(n, K, t, family)


def packing_certificate(
    n: int, K: int, cfg: MetricConfig, family: str = "A"
) -> PackingCertificate:
    """
    Certified pairwise separation of the packing family:
      A:      min_{2<=k<=n}(lambda_k r_k^k / 2) / (n^2 K)
      convex: min_{2<=k<=n} lambda_k r_k^k / (2 k^2 n K)
    """
    _check_n_k(n, K)
    _check_family(family)
    if family == "A":
        smallest = min(lambda_r_power(cfg, k) / 2.0 for k in range(2, n + 1))
        separation = smallest / (n * n * K)
    else:
        separation = min(
            lambda_r_power(cfg, k) / (2.0 * k * k * n * K) for k in range(2, n + 1)
        )
    if not separation > 0.0:
        raise ValueError(f"Packing separation underflows for n={n}, K={K}")
    cert = PackingCertificate(
        n=n,
        K=K,
        count=K ** (n - 1),
        separation_lo=separation,
        delta=separation / 3.0,
        family=family,
    )
    logger.info(
        "Packing certificate n=%d K=%d family=%s separation=%r",
        n, K, family, separation,
    )
    return cert


# -----------------------------------------------------------------------------
# rho
# -----------------------------------------------------------------------------


def _log_constraint(cfg: MetricConfig, n_max: int) -> np.ndarray:
    """log g(n) for n = 2..n_max, g(n) = min_{2<=k<=n}(lambda_k r_k^k / 6) / n^2."""
    log_terms = np.array([log_lambda_r_power(cfg, k) for k in range(2, n_max + 1)])
    n = np.arange(2, n_max + 1, dtype=np.float64)
    return np.minimum.accumulate(log_terms) - math.log(6.0) - 2.0 * np.log(n)


def compute_rho(cfg: MetricConfig, n_max: int = RHO_HORIZON) -> Rho:
    """
    Largest rho = 1/m (m integer, rho < lambda) with g(n) >= rho^n for 2 <= n <= n_max.

    tail_certified: the slack s(n) = log g(n) + n log m has increments bounded
    below by D(n) = log m + log lambda - 2 (n+1)^-alpha - 2/n once
    (n+1)^-alpha <= 1/2; D increases with n, so D(n_max) > 0 keeps s positive
    for every n > n_max.
    """
    if not isinstance(n_max, int) or n_max < 2:
        raise ValueError(f"n_max must be an integer >= 2, got {n_max!r}")
    log_g = _log_constraint(cfg, n_max)
    n = np.arange(2, n_max + 1, dtype=np.float64)
    m_min = math.floor(1.0 / cfg.lam) + 1
    if m_min > MAX_RHO_DENOMINATOR:
        raise RhoSearchError(
            f"lambda = {cfg.lam!r} forces 1/rho above {MAX_RHO_DENOMINATOR}"
        )
    needed = float(np.max(-log_g / n))
    if needed > math.log(MAX_RHO_DENOMINATOR):
        raise RhoSearchError(
            f"No admissible rho with denominator <= {MAX_RHO_DENOMINATOR} "
            f"(needs log(1/rho) >= {needed:.4f})"
        )
    m = max(m_min, math.ceil(math.exp(needed)) - 1)
    while np.any(log_g + n * math.log(m) < 0.0):
        m += 1
        if m > MAX_RHO_DENOMINATOR:
            raise RhoSearchError(
                f"No admissible rho with denominator <= {MAX_RHO_DENOMINATOR}"
            )
    slack = log_g + n * math.log(m)
    binding_n = int(np.argmin(slack)) + 2
    u = (n_max + 1.0) ** (-cfg.alpha)
    increment = math.log(m) + math.log(cfg.lam) - 2.0 * u - 2.0 / n_max
    tail_certified = u <= 0.5 and increment > 0.0
    result = Rho(
        rho=1.0 / m,
        denominator=m,
        n_verified=n_max,
        tail_certified=tail_certified,
        binding_n=binding_n,
    )
    logger.info(
        "rho = 1/%d (binding n=%d, verified to n=%d, tail certified=%s)",
        m, binding_n, n_max, tail_certified,
    )
    return result


def lower_bound_curve(
    cfg: MetricConfig, n_min: int, n_max: int, rho: Rho | None = None
) -> list[CurvePoint]:
    """
    Points (rho^(2n), n(n-1) log(1/rho)) for n_min <= n <= n_max:
    N_A(delta) >= exp(log_count).
    """
    if not (2 <= n_min <= n_max):
        raise ValueError(f"Need 2 <= n_min <= n_max, got n_min={n_min}, n_max={n_max}")
    if rho is None:
        rho = compute_rho(cfg, max(n_max, RHO_HORIZON))
    log_m = math.log(rho.denominator)
    points = []
    for n in range(n_min, n_max + 1):
        point = CurvePoint(
            n=n,
            delta=float(rho.denominator) ** (-2 * n),
            log_count=n * (n - 1) * log_m,
            log_inv_delta=2 * n * log_m,
        )
        logger.debug(
            "lower curve n=%d delta=%r log_count=%r", n, point.delta, point.log_count
        )
        points.append(point)
    return points


# -----------------------------------------------------------------------------
# Truncation and the coefficient net (upper side)
# -----------------------------------------------------------------------------


def truncate(f: TaylorPoly, n: int) -> TaylorPoly:
    """Partial sum through degree min(n, deg f)."""
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"Truncation degree must be an integer >= 1, got {n!r}")
    return TaylorPoly(f.coeffs[:n])


def quantize_to_net(
    p: TaylorPoly, n: int, K: int, tol: float = DEFAULT_SLACK
) -> tuple[TaylorPoly, np.ndarray]:
    """
    Nearest grid polynomial q_k = k (s_k + i t_k) / K, s_k, t_k in -K..K.
    Returns (q, |p_k - q_k|); each error is at most k / (sqrt(2) K).
    """
    _check_n_k(n, K, n_min=1)
    if p.degree > n:
        raise ValueError(f"Polynomial degree {p.degree} exceeds n = {n}")
    if not is_member(p, ClassId.CLASS_B_DEBRANGES, tol):
        raise ValueError("Polynomial is not in class B (|a_k| <= k)")
    a = p.as_array()
    k = np.arange(1, p.degree + 1, dtype=np.float64)
    s = np.clip(np.rint(K * a.real / k), -K, K)
    t = np.clip(np.rint(K * a.imag / k), -K, K)
    q = k * (s + 1j * t) / K
    return TaylorPoly.from_values(q), np.abs(a - q)


def net_center(f: TaylorPoly, n: int, K: int) -> TaylorPoly:
    """Grid center assigned to f in class B: truncate to degree n, then quantize."""
    return quantize_to_net(truncate(f, n), n, K)[0]


def net_upper_point(n: int, cfg: MetricConfig) -> NetCertificate:
    """
    tau = exact truncation tail bound, C = lam/(1 - lam), K = ceil(C n^2 / tau).
    Every f in B lies within radius_hi = C n^2/K + tau <= 2 tau of its net center.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n!r}")
    tau = truncation_tail_bound(n, cfg, "exact")
    C = cfg.lam / (1.0 - cfg.lam)
    if not tau > 0.0:
        raise NetUnderflowError(n, f"Truncation tail bound underflows to 0 at n = {n}")
    ratio = C * n * n / tau
    if not math.isfinite(ratio):
        raise NetUnderflowError(n, f"Grid size C*n^2/tau overflows at n = {n}")
    K = math.ceil(ratio)
    cert = NetCertificate(
        n=n,
        K=K,
        log_count=2 * n * math.log(2 * K + 1),
        radius_hi=C * n * n / K + tau,
        tail_bound=tau,
        grid_constant=C,
        internal=False,
    )
    logger.debug(
        "net n=%d K=%d radius=%r log_count=%r", n, K, cert.radius_hi, cert.log_count
    )
    return cert


def upper_bound_curve(cfg: MetricConfig, n_min: int, n_max: int) -> list[CurvePoint]:
    """Points (radius_hi, log_count) of net_upper_point; N_B(delta) <= e^log_count."""
    if not (1 <= n_min <= n_max):
        raise ValueError(f"Need 1 <= n_min <= n_max, got n_min={n_min}, n_max={n_max}")
    points = []
    for n in range(n_min, n_max + 1):
        cert = net_upper_point(n, cfg)
        points.append(
            CurvePoint(
                n=n,
                delta=cert.radius_hi,
                log_count=cert.log_count,
                log_inv_delta=-math.log(cert.radius_hi),
            )
        )
    return points


def curve_power_ratio(point: CurvePoint, power: float) -> float:
    """log_count / log^power(1/delta)."""
    return point.log_count / point.log_inv_delta**power


def curves_consistent(
    lower: Sequence[CurvePoint], upper: Sequence[CurvePoint]
) -> list[tuple[int, int]]:
    """
    Pairs (n_lower, n_upper) contradicting N_S(delta) >= N_A(2 delta) and
    N_S(delta) <= N_B(delta/2): whenever 2 * delta_upper <= delta_lower / 2,
    the lower count may not exceed the upper count. Empty list means consistent.
    """
    violations = []
    for lo_pt in lower:
        log_inv_schlicht = lo_pt.log_inv_delta + math.log(2.0)
        for up_pt in upper:
            nested = up_pt.log_inv_delta - math.log(2.0) >= log_inv_schlicht
            if nested and lo_pt.log_count > up_pt.log_count:
                violations.append((lo_pt.n, up_pt.n))
    return violations


def schlicht_bounds(
    lower_point: CurvePoint, upper_point: CurvePoint
) -> dict[str, float]:
    """
    Translate class-A and class-B curve points into statements about the
    schlicht class, using A <= S <= B and N_S(delta) >= N_A(2 delta),
    N_S(delta) <= N_B(delta / 2):

      log N_S(lower_delta) >= lower_log_count   at lower_delta = delta_A / 2
      log N_S(upper_delta) <= upper_log_count   at upper_delta = 2 delta_B
    """
    return {
        "lower_n": lower_point.n,
        "lower_delta": lower_point.delta / 2.0,
        "lower_log_inv_delta": lower_point.log_inv_delta + math.log(2.0),
        "lower_log_count": lower_point.log_count,
        "upper_n": upper_point.n,
        "upper_delta": 2.0 * upper_point.delta,
        "upper_log_inv_delta": upper_point.log_inv_delta - math.log(2.0),
        "upper_log_count": upper_point.log_count,
    }


# -----------------------------------------------------------------------------
# Koebe sharpness
# -----------------------------------------------------------------------------


def koebe_sharpness_lower(n: int, cfg: MetricConfig) -> float:
    """
    sum_{j<=J} lambda_j r_j^(n+1): every polynomial p of degree <= n has
    d(koebe, p) >= this value, since the mean square of the Koebe tail on
    |z| = r is at least r^(2n+2).
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n!r}")
    return math.fsum(lambdas(cfg) * radii(cfg) ** (n + 1))


def koebe_sandwich(n: int, cfg: MetricConfig) -> SandwichRow:
    """
    sharp_lower <= d(koebe, truncate(koebe, n)) <= tail_exact, witnessed on the
    proxy koebe(4n). The proxy misses the coefficients beyond 4n, which move the
    distance by at most proxy_error = truncation_tail_bound(4n).
    """
    proxy = koebe(4 * n)
    # positive coefficients: the circle maximum sits at z = r_j, sample 0 for every M
    interval = metric_d(proxy, truncate(proxy, n), replace(cfg, circle_samples=8))
    return SandwichRow(
        n=n,
        sharp_lower=koebe_sharpness_lower(n, cfg),
        proxy_lo=interval.lo,
        proxy_hi=interval.hi,
        proxy_error=truncation_tail_bound(4 * n, cfg, "exact"),
        tail_exact=truncation_tail_bound(n, cfg, "exact"),
        tail_simple=truncation_tail_bound(n, cfg, "simple"),
    )
