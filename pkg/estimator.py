# estimator.py - Empirical packing/covering counts on sampled slices of the classes
"""
Greedy estimates over a finite sample:

  greedy_pack   scan the sample in input order, keep a point iff its lower
                distance bound to every kept point is >= delta
  greedy_cover  repeatedly pick the sample point whose upper-bound ball of
                radius delta covers the most uncovered points (lowest index
                on ties) until everything is covered

Separation decisions use the lower endpoints, coverage decisions the upper
endpoints. The counts describe the sample only and are labelled empirical.

All distances come from one pairwise pass (pairwise_metric_bounds): tiles of
polynomials are evaluated on the J x M circle grid and differences of values
stand in for values of differences.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Optional, Sequence, Union

import numpy as np

from domain.models import (
    ClassId,
    EstimateReport,
    ExponentFit,
    MetricConfig,
    SampleSpec,
    TaylorPoly,
)
from metric import lambdas, metric_tail_bound, radii
from series_core import circle_points, horner

logger = logging.getLogger(__name__)

DEFAULT_LADDER = (0.05, 0.02, 0.01)
SLICE_RADIUS = 0.5
# complex entries of one tile's difference tensor
BLOCK_BUDGET = 1 << 22
# circle samples J x M evaluated for a single pair
GRID_BUDGET = 1 << 26
MIN_FIT_POINTS = 3
# below this many samples per cover ball a rung only counts sample points
MIN_SAMPLES_PER_BALL = 12


@dataclass(frozen=True)
class PairwiseBounds:
    """Symmetric N x N matrices of lower/upper metric bounds; diagonal lo = 0."""

    lo: np.ndarray
    hi: np.ndarray

    @property
    def size(self) -> int:
        return self.lo.shape[0]


PointsOrBounds = Union[Sequence[TaylorPoly], PairwiseBounds]


# -----------------------------------------------------------------------------
# Sampling
# -----------------------------------------------------------------------------


def _phases(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=shape))


def sample_class(spec: SampleSpec) -> list[TaylorPoly]:
    """
    Seeded random members of the class:
      A / convex: (w_2..w_d) uniform on the simplex sum w <= 1 (Dirichlet with a
                  slack coordinate), |a_k| = w_k/k (A) or w_k/k^2 (convex), a_1 = 1
      B / B-littlewood: a_k uniform on the disk of radius k (e*k), k = 1..d
    """
    rng = np.random.default_rng(spec.seed)
    d, count = spec.degree, spec.count
    if spec.class_id in (ClassId.CLASS_A, ClassId.CONVEX_SUFFICIENT):
        weights = rng.dirichlet(np.ones(d), size=count)[:, : d - 1]
        k = np.arange(2, d + 1, dtype=np.float64)
        power = 1 if spec.class_id is ClassId.CLASS_A else 2
        tail = weights / k**power * _phases(rng, (count, d - 1))
        lead = np.ones((count, 1), dtype=np.complex128)
        coeffs = np.concatenate([lead, tail], axis=1)
    elif spec.class_id in (ClassId.CLASS_B_DEBRANGES, ClassId.CLASS_B_LITTLEWOOD):
        scale = np.arange(1, d + 1, dtype=np.float64)
        if spec.class_id is ClassId.CLASS_B_LITTLEWOOD:
            scale = math.e * scale
        radius = scale * np.sqrt(rng.uniform(0.0, 1.0, size=(count, d)))
        coeffs = radius * _phases(rng, (count, d))
    else:
        raise ValueError(f"Unsupported class {spec.class_id!r}")
    logger.debug(
        "Sampled %d members of class %s, degree %d", count, spec.class_id.value, d
    )
    return [TaylorPoly.from_values(row) for row in coeffs]


def sample_a2_slice(
    count: int, seed: int, radius: float = SLICE_RADIUS
) -> list[TaylorPoly]:
    """z + a_2 z^2, a_2 uniform on |a_2| <= radius (class A for radius <= 1/2)."""
    if count < 1:
        raise ValueError(f"Sample count must be >= 1, got {count}")
    if not (0.0 < radius):
        raise ValueError(f"Slice radius must be > 0, got {radius}")
    rng = np.random.default_rng(seed)
    a2 = radius * np.sqrt(rng.uniform(0.0, 1.0, size=count)) * _phases(rng, (count,))
    return [TaylorPoly((1.0 + 0j, complex(a))) for a in a2]


# -----------------------------------------------------------------------------
# Pairwise bounds
# -----------------------------------------------------------------------------


def _coefficient_matrix(points: Sequence[TaylorPoly]) -> np.ndarray:
    size = max(p.degree for p in points)
    return np.stack([p.as_array(size) for p in points])


def _tile_sizes(count: int, grid: int) -> tuple[int, int]:
    """Row and column block sizes whose difference tensor fits BLOCK_BUDGET."""
    rows = max(1, min(count, math.isqrt(max(1, BLOCK_BUDGET // grid))))
    cols = max(1, min(count, BLOCK_BUDGET // (rows * grid)))
    return rows, cols


def _mirror_upper(tile: np.ndarray, size: int) -> None:
    """Copy the strict upper triangle of the leading size x size square below it."""
    square = tile[:, :size]
    lower = np.tril_indices(size, -1)
    square[lower] = square.T[lower]


def pairwise_metric_bounds(
    points: Sequence[TaylorPoly], cfg: MetricConfig, workers: int = 1
) -> PairwiseBounds:
    """
    lo/hi matrices of d(p_i, p_k). Per circle j, lo_j is the largest sampled
    |p_i - p_k| and hi_j = max(lo_j, min(lo_j + (pi r_j/M) L_j, l1_j)) as in
    metric_d.

    Work is split into tiles (row block x column block, upper triangle only)
    whose difference tensor holds at most BLOCK_BUDGET complex entries. Circle
    values are evaluated per tile, so memory per tile does not grow with the
    sample size. Each row block is one thread-pool task writing its tiles and
    their transposes into fixed positions: the result is exactly symmetric
    and does not depend on `workers`.
    """
    if not points:
        raise ValueError("Need at least one point")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    coeffs = _coefficient_matrix(points)
    N, degree = coeffs.shape
    r = radii(cfg)
    J, M = r.shape[0], cfg.circle_samples
    if J * M > GRID_BUDGET:
        raise ValueError(
            f"A {J} x {M} circle grid exceeds the per-pair budget of {GRID_BUDGET} "
            "samples; lower --metric-terms or --circle-samples"
        )
    grid = r[:, None] * circle_points(1.0, M)[None, :]

    k = np.arange(1, degree + 1, dtype=np.float64)
    powers = r[:, None] ** k[None, :]  # (J, degree)
    deriv_weights = k[None, :] * powers / r[:, None]
    weights = lambdas(cfg)
    gap = np.pi * r / M
    tail = metric_tail_bound(cfg)

    lo = np.zeros((N, N))
    hi = np.zeros((N, N))
    rows, cols = _tile_sizes(N, J * M)

    def run_rows(start: int) -> None:
        stop = min(N, start + rows)
        row_values = horner(coeffs[start:stop], grid)  # (b, J, M)
        for col in range(start, N, cols):
            col_stop = min(N, col + cols)
            col_values = horner(coeffs[col:col_stop], grid)
            diff = row_values[:, None, :, :] - col_values[None, :, :, :]
            lo_terms = np.max(np.abs(diff), axis=-1)  # (b, c, J)
            mags = np.abs(coeffs[start:stop, None, :] - coeffs[None, col:col_stop, :])
            l1 = mags @ powers.T
            lipschitz = lo_terms + gap * (mags @ deriv_weights.T)
            hi_terms = np.maximum(lo_terms, np.minimum(lipschitz, l1))
            lo_tile = np.minimum(1.0, lo_terms) @ weights
            hi_tile = np.minimum(1.0, hi_terms) @ weights + tail
            if col == start:
                _mirror_upper(lo_tile, stop - start)
                _mirror_upper(hi_tile, stop - start)
            lo[start:stop, col:col_stop] = lo_tile
            hi[start:stop, col:col_stop] = hi_tile
            lo[col:col_stop, start:stop] = lo_tile.T
            hi[col:col_stop, start:stop] = hi_tile.T

    starts = range(0, N, rows)
    if workers == 1:
        for start in starts:
            run_rows(start)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_rows, starts))
    np.fill_diagonal(lo, 0.0)
    logger.info(
        "Pairwise bounds for %d points (J=%d, M=%d, tile %dx%d, workers=%d)",
        N, J, M, rows, cols, workers,
    )
    return PairwiseBounds(lo=lo, hi=hi)


def _as_bounds(
    points: PointsOrBounds, cfg: Optional[MetricConfig], workers: int
) -> PairwiseBounds:
    if isinstance(points, PairwiseBounds):
        return points
    if cfg is None:
        raise ValueError("A MetricConfig is required when passing polynomials")
    return pairwise_metric_bounds(points, cfg, workers)


# -----------------------------------------------------------------------------
# Greedy counts
# -----------------------------------------------------------------------------


def greedy_pack(
    points: PointsOrBounds,
    delta: float,
    cfg: Optional[MetricConfig] = None,
    workers: int = 1,
) -> int:
    """Size of the scan-order maximal subset with pairwise lower bound >= delta."""
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    bounds = _as_bounds(points, cfg, workers)
    blocked = np.zeros(bounds.size, dtype=bool)
    count = 0
    for i in range(bounds.size):
        if blocked[i]:
            continue
        count += 1
        blocked |= bounds.lo[i] < delta
    return count


def greedy_cover(
    points: PointsOrBounds,
    delta: float,
    cfg: Optional[MetricConfig] = None,
    workers: int = 1,
) -> int:
    """Greedily chosen center count (most uncovered first, lowest index on ties)."""
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    bounds = _as_bounds(points, cfg, workers)
    covers = bounds.hi <= delta
    if not np.all(np.diagonal(covers)):
        raise ValueError(
            f"delta = {delta} is below the certified self-distance (metric tail bound)"
        )
    covered = np.zeros(bounds.size, dtype=bool)
    gain = covers.sum(axis=1)
    centers = 0
    while not covered.all():
        center = int(np.argmax(gain))
        fresh = covers[center] & ~covered
        covered |= fresh
        gain -= covers[:, fresh].sum(axis=1)
        centers += 1
    return centers


def estimate(
    points: Sequence[TaylorPoly],
    ladder: Sequence[float],
    cfg: MetricConfig,
    workers: int = 1,
    provenance: Optional[dict[str, Any]] = None,
) -> EstimateReport:
    """
    pack(delta), pack(2 delta) and cover(delta) over the ladder, with the
    bracket pack(2 delta) <= cover(delta) <= pack(delta) checked per point.
    """
    if not ladder:
        raise ValueError("Delta ladder must not be empty")
    bounds = pairwise_metric_bounds(points, cfg, workers)
    pack, pack_double, cover = [], [], []
    bracket_ok = True
    for delta in ladder:
        p1 = greedy_pack(bounds, delta)
        p2 = greedy_pack(bounds, 2.0 * delta)
        c1 = greedy_cover(bounds, delta)
        if not (p2 <= c1 <= p1):
            bracket_ok = False
            logger.warning(
                "Duality bracket fails at delta=%r: pack(2d)=%d cover=%d pack=%d",
                delta, p2, c1, p1,
            )
        logger.info("delta=%r pack=%d pack(2d)=%d cover=%d", delta, p1, p2, c1)
        pack.append(p1)
        pack_double.append(p2)
        cover.append(c1)

    report = EstimateReport(
        deltas=[float(d) for d in ladder],
        pack_counts=pack,
        pack_counts_double=pack_double,
        cover_counts=cover,
        bracket_ok=bracket_ok,
        sample_size=len(points),
        provenance=dict(provenance or {}),
    )
    try:
        report.exponent_fit = exponent_fit(report, cfg.alpha)
    except ValueError as e:
        logger.warning("Exponent fit skipped: %s", e)
    try:
        report.dimension = dimension_fit(report)
        report.dimension_deltas = [d for d, _ in dimension_rungs(report)]
    except ValueError as e:
        logger.warning("Dimension fit skipped: %s", e)
    return report


# -----------------------------------------------------------------------------
# Fits
# -----------------------------------------------------------------------------


def _slope(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.polyfit(x, y, 1)[0])


def exponent_fit(report: EstimateReport, alpha: float) -> ExponentFit:
    """
    Least-squares slope of log log N against log log(1/delta), for cover
    (power) and pack (power_pack) counts. Uses ladder points with delta < 1
    and both counts >= 2. Descriptive only; the window [2, 2 + alpha] is
    reported for context.
    """
    rows = [
        (d, c, p)
        for d, c, p in zip(report.deltas, report.cover_counts, report.pack_counts)
        if d < 1.0 and c >= 2 and p >= 2
    ]
    if len({d for d, _, _ in rows}) < MIN_FIT_POINTS:
        raise ValueError(
            f"Exponent fit needs at least {MIN_FIT_POINTS} usable ladder points, "
            f"got {len(rows)}"
        )
    x = np.log(np.log([1.0 / d for d, _, _ in rows]))
    cover = np.log(np.log([float(c) for _, c, _ in rows]))
    pack = np.log(np.log([float(p) for _, _, p in rows]))
    return ExponentFit(
        power=_slope(x, cover),
        power_pack=_slope(x, pack),
        window_lower=2.0,
        window_upper=2.0 + alpha,
        points_used=len(rows),
    )


def dimension_rungs(report: EstimateReport) -> list[tuple[float, int]]:
    """
    Ladder points (delta, cover_count) usable for the box-counting slope:
    0 < delta < 1, a nonzero count and, when the sample size is known, at
    least MIN_SAMPLES_PER_BALL sample points per cover ball. Past that the
    cover counts grow with the sample, not with 1/delta.
    """
    rows = []
    for d, c in zip(report.deltas, report.cover_counts):
        if not (0.0 < d < 1.0 and c >= 1):
            continue
        if 0 < report.sample_size < MIN_SAMPLES_PER_BALL * c:
            logger.info(
                "Dimension fit drops saturated rung delta=%r (%d covers, %d samples)",
                d, c, report.sample_size,
            )
            continue
        rows.append((d, c))
    return rows


def dimension_fit(report: EstimateReport) -> float:
    """Box-counting slope of log cover_count against log(1/delta) on dimension_rungs."""
    rows = dimension_rungs(report)
    if len({d for d, _ in rows}) < 2:
        raise ValueError(
            "Dimension fit needs at least 2 distinct unsaturated ladder points, "
            f"got {len(rows)}"
        )
    x = np.log([1.0 / d for d, _ in rows])
    y = np.log([float(c) for _, c in rows])
    return _slope(x, y)
