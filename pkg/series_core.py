# series_core.py - Taylor polynomials: evaluation and certified circle maxima
"""
Finite Taylor polynomials p(z) = a_1 z + ... + a_n z^n over the complex field.

Circle maxima are certified by sampling M equally spaced points on |z| = r and
adding a Lipschitz correction: between two neighbouring samples the arc gap is
at most pi*r/M and |p'| <= L = sum k|a_k| r^(k-1) on the circle. The cheap
bound sum |a_k| r^k is also a valid upper bound; the reported hi is the
smaller of the two (never below lo).

All values are binary64; certified comparisons elsewhere carry an explicit
slack (DEFAULT_SLACK).
"""

from __future__ import annotations

import cmath
import json
import math
from typing import Any

import numpy as np

from domain.models import BoundInterval, TaylorPoly

DEFAULT_SLACK = 1e-12
MIN_CIRCLE_SAMPLES = 8


def _check_radius(r: float) -> float:
    r = float(r)
    if not (0.0 < r < 1.0):
        raise ValueError(f"Radius must lie in (0, 1), got {r}")
    return r


def horner(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """
    Evaluate sum_{k>=1} coeffs[k-1] z^k at every entry of z by nested multiplication.
    coeffs may be 1-D (one polynomial) or 2-D (one polynomial per row, broadcast
    against a leading axis of z).
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    if coeffs.ndim == 1:
        y = np.zeros_like(z)
        for a in coeffs[::-1]:
            y = y * z + a
        return y * z
    # rows of coeffs against z broadcast as (rows, *z.shape)
    shape = (coeffs.shape[0],) + (1,) * z.ndim
    y = np.zeros((coeffs.shape[0],) + z.shape, dtype=np.complex128)
    for k in range(coeffs.shape[1] - 1, -1, -1):
        y = y * z + coeffs[:, k].reshape(shape)
    return y * z


def eval_poly(p: TaylorPoly, z: complex) -> complex:
    """p(z) by nested multiplication, in working precision."""
    z = complex(z)
    if not cmath.isfinite(z):
        raise ValueError(f"Evaluation point must be finite, got {z!r}")
    if abs(z) > 1.0 + DEFAULT_SLACK:
        raise ValueError(f"Evaluation point must satisfy |z| <= 1, got |z| = {abs(z)}")
    y = 0j
    for a in reversed(p.coeffs):
        y = y * z + a
    return y * z


def subtract(p: TaylorPoly, q: TaylorPoly) -> TaylorPoly:
    """p - q; the shorter polynomial is zero-padded."""
    size = max(p.degree, q.degree)
    return TaylorPoly.from_values(p.as_array(size) - q.as_array(size))


def circle_points(r: float, M: int) -> np.ndarray:
    """z_m = r * exp(2*pi*i*m/M), m = 0..M-1."""
    return r * np.exp(2j * np.pi * np.arange(M) / M)


def coeff_sum_upper(p: TaylorPoly, r: float) -> float:
    """sum |a_k| r^k, an upper bound for max_{|z|=r} |p(z)|."""
    r = _check_radius(r)
    powers = r ** np.arange(1, p.degree + 1)
    return math.fsum(np.abs(p.as_array()) * powers)


def derivative_bound(p: TaylorPoly, r: float) -> float:
    """L = sum k |a_k| r^(k-1) >= max_{|z|=r} |p'(z)|."""
    r = _check_radius(r)
    k = np.arange(1, p.degree + 1)
    return math.fsum(k * np.abs(p.as_array()) * r ** (k - 1))


def lipschitz_upper(p: TaylorPoly, r: float, M: int, sampled_max: float) -> float:
    """Sampled maximum plus the arc-gap correction (pi*r/M) * L."""
    return sampled_max + (math.pi * r / M) * derivative_bound(p, r)


def max_modulus_interval(p: TaylorPoly, r: float, M: int) -> BoundInterval:
    """
    Certified enclosure of max_{|z|<=r} |p(z)| (attained on |z| = r).

    lo is the largest |p| over the M circle samples; hi is
    max(lo, min(lo + (pi*r/M)*L, coeff_sum_upper(p, r))).
    """
    r = _check_radius(r)
    if not isinstance(M, int) or M < MIN_CIRCLE_SAMPLES:
        raise ValueError(
            f"Need at least {MIN_CIRCLE_SAMPLES} circle samples, got {M!r}"
        )
    values = horner(p.as_array(), circle_points(r, M))
    lo = float(np.max(np.abs(values)))
    hi = min(lipschitz_upper(p, r, M, lo), coeff_sum_upper(p, r))
    return BoundInterval(lo, max(lo, hi))


def l2_circle_lower(p: TaylorPoly, q: TaylorPoly, r: float) -> float:
    """
    (sum |p_k - q_k|^2 r^(2k))^(1/2): the root mean square of |p - q| on |z| = r,
    hence a lower bound for its maximum there.
    """
    r = _check_radius(r)
    size = max(p.degree, q.degree)
    diff = p.as_array(size) - q.as_array(size)
    powers = r ** (2 * np.arange(1, size + 1))
    return math.sqrt(math.fsum((np.abs(diff) ** 2) * powers))


# -----------------------------------------------------------------------------
# Coefficient file codec: {"coeffs": [[re, im], ...]}, a_1 first
# -----------------------------------------------------------------------------


def poly_from_json(text: str) -> TaylorPoly:
    """Parse coefficient-file text. ValueError on malformed or non-numeric input."""
    try:
        data: Any = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"Coefficient file is not valid JSON: {e}") from e
    return TaylorPoly.from_dict(data)


def poly_to_json(p: TaylorPoly) -> str:
    return json.dumps(p.to_dict(), indent=2) + "\n"
