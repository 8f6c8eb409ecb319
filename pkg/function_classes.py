# function_classes.py - Coefficient-body membership tests and the Koebe function
"""
Membership predicates for the coefficient classes used by the bounds:

  A       a_1 = 1, sum_{k>=2} k|a_k| <= 1       (sufficient for schlicht)
  B       |a_k| <= k for all k                  (contains every schlicht function)
  B-littlewood  |a_k| <= e*k                    (the weaker, elementary bound)
  convex  a_1 = 1, sum_{k>=2} k^2|a_k| <= 1     (sufficient for convex schlicht)

The schlicht class itself has no predicate: finitely many coefficients do not
decide injectivity. injectivity_falsifier searches a polar grid for a pair of
points with (nearly) equal values; finding none proves nothing.
"""

from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np

from domain.models import ClassId, TaylorPoly
from series_core import horner

logger = logging.getLogger(__name__)

FALSIFIER_MAX_RADIUS = 0.995
MIN_FALSIFIER_GRID = 4


def _first_coeff_is_one(p: TaylorPoly, tol: float) -> bool:
    return abs(p.coeffs[0] - 1.0) <= tol


def _weighted_tail_sum(p: TaylorPoly, power: int) -> float:
    """sum_{k>=2} k^power |a_k|."""
    return math.fsum(k**power * abs(p.coeff(k)) for k in range(2, p.degree + 1))


def is_member(p: TaylorPoly, c: ClassId, tol: float = 0.0) -> bool:
    """Whether p satisfies the defining inequalities of class c within additive tol."""
    if tol < 0:
        raise ValueError(f"Tolerance must be >= 0, got {tol}")
    if c is ClassId.CLASS_A:
        return _first_coeff_is_one(p, tol) and _weighted_tail_sum(p, 1) <= 1.0 + tol
    if c is ClassId.CONVEX_SUFFICIENT:
        return _first_coeff_is_one(p, tol) and _weighted_tail_sum(p, 2) <= 1.0 + tol
    if c is ClassId.CLASS_B_DEBRANGES:
        bound = 1.0
    elif c is ClassId.CLASS_B_LITTLEWOOD:
        bound = math.e
    else:
        raise ValueError(f"Unsupported class {c!r}")
    return all(abs(a) <= bound * k + tol for k, a in enumerate(p.coeffs, start=1))


def schlicht_sufficient(p: TaylorPoly, tol: float = 0.0) -> bool:
    """a_1 = 1 and sum_{k>=2} k|a_k| <= 1 imply p is schlicht (not conversely)."""
    return is_member(p, ClassId.CLASS_A, tol)


def koebe(n: int) -> TaylorPoly:
    """Partial sum of z/(1-z)^2 = sum k z^k through degree n."""
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"Koebe degree must be an integer >= 1, got {n!r}")
    return TaylorPoly.from_values(complex(k) for k in range(1, n + 1))


def falsifier_grid(G: int) -> np.ndarray:
    """
    G*G distinct points of {|z| <= 0.995}, row-major in (radius index, angle index).
    Radii 0.995*(a+1)/G; angles 2*pi*b/G. For even G the second half of the
    angles is the exact negation of the first half.
    """
    if not isinstance(G, int) or G < MIN_FALSIFIER_GRID:
        raise ValueError(
            f"Falsifier grid size must be an integer >= {MIN_FALSIFIER_GRID}, "
            f"got {G!r}"
        )
    radii = FALSIFIER_MAX_RADIUS * np.arange(1, G + 1, dtype=np.float64) / G
    if G % 2 == 0:
        half = np.exp(2j * np.pi * np.arange(G // 2) / G)
        unit = np.concatenate([half, -half])
    else:
        unit = np.exp(2j * np.pi * np.arange(G) / G)
    return (radii[:, None] * unit[None, :]).ravel()


def _first_close_pair(values: np.ndarray, tol: float) -> Optional[tuple[int, int]]:
    """Lexicographically smallest (i, j), i < j, with |values[i] - values[j]| <= tol."""
    order = np.argsort(values.real, kind="stable")
    sorted_re = values.real[order]
    best: Optional[tuple[int, int]] = None
    offset = 1
    while offset < len(values):
        near = np.nonzero(sorted_re[offset:] - sorted_re[:-offset] <= tol)[0]
        if near.size == 0:
            # real parts are sorted, so larger offsets are farther apart still
            break
        left = order[near]
        right = order[near + offset]
        close = np.abs(values[left] - values[right]) <= tol
        if np.any(close):
            lo = np.minimum(left[close], right[close])
            hi = np.maximum(left[close], right[close])
            pick = np.lexsort((hi, lo))[0]
            candidate = (int(lo[pick]), int(hi[pick]))
            if best is None or candidate < best:
                best = candidate
        offset += 1
    return best


def injectivity_falsifier(
    p: TaylorPoly, G: int = 64, tol: float = 1e-12
) -> Optional[tuple[complex, complex]]:
    """
    Search the G*G polar grid for distinct z, w with |p(z) - p(w)| <= tol.
    Returns the witness with the smallest grid indices, or None.
    """
    if tol < 0:
        raise ValueError(f"Tolerance must be >= 0, got {tol}")
    points = falsifier_grid(G)
    values = horner(p.as_array(), points)
    pair = _first_close_pair(values, tol)
    if pair is None:
        return None
    i, j = pair
    logger.debug("Injectivity witness at grid indices %d, %d (G=%d)", i, j, G)
    return complex(points[i]), complex(points[j])
