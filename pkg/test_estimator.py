# test_estimator.py
"""
Unit tests for estimator: sampling, pairwise bounds, greedy pack/cover, fits.
Run with: python -m pytest test_estimator.py -v
Or: python test_estimator.py
"""

import math
import sys
import unittest
from unittest import mock

import numpy as np

# Allow running without pytest
try:
    import pytest
    HAS_PYTEST = True
except ImportError:
    HAS_PYTEST = False

from domain.models import ClassId, EstimateReport, MetricConfig, SampleSpec, TaylorPoly
from estimator import (
    BLOCK_BUDGET,
    DEFAULT_LADDER,
    MIN_SAMPLES_PER_BALL,
    PairwiseBounds,
    _tile_sizes,
    dimension_fit,
    dimension_rungs,
    estimate,
    exponent_fit,
    greedy_cover,
    greedy_pack,
    pairwise_metric_bounds,
    sample_a2_slice,
    sample_class,
)
from function_classes import is_member
from metric import metric_d, metric_tail_bound

SMALL = MetricConfig(metric_terms=14, circle_samples=8)
SLICE_DIMENSION_BAND = (1.7, 2.3)
SLICE_SAMPLES = 4000


def _reverse_scan_pack(bounds, delta):
    """Independent greedy packing oracle scanning the sample back to front."""
    kept = []
    for i in reversed(range(bounds.size)):
        if all(bounds.lo[i, j] >= delta for j in kept):
            kept.append(i)
    return len(kept)


def _synthetic_report(deltas, counts, sample_size=0):
    return EstimateReport(
        deltas=list(deltas),
        pack_counts=list(counts),
        pack_counts_double=list(counts),
        cover_counts=list(counts),
        sample_size=sample_size,
    )


class TestSampling(unittest.TestCase):
    def test_class_members(self):
        for class_id in ClassId:
            with self.subTest(class_id=class_id):
                for p in sample_class(SampleSpec(class_id, 6, 200, 12)):
                    self.assertTrue(is_member(p, class_id, 1e-12))

    def test_deterministic(self):
        spec = SampleSpec(ClassId.CLASS_A, 5, 20, 99)
        self.assertEqual(sample_class(spec), sample_class(spec))
        other = sample_class(SampleSpec(ClassId.CLASS_A, 5, 20, 100))
        self.assertNotEqual(sample_class(spec), other)

    def test_class_a_normalized(self):
        for p in sample_class(SampleSpec(ClassId.CLASS_A, 4, 50, 1)):
            self.assertEqual(p.coeffs[0], 1 + 0j)
            self.assertEqual(p.degree, 4)

    def test_slice(self):
        points = sample_a2_slice(500, 3)
        self.assertEqual(len(points), 500)
        for p in points:
            self.assertEqual(p.degree, 2)
            self.assertLessEqual(abs(p.coeffs[1]), 0.5 + 1e-15)
            self.assertTrue(is_member(p, ClassId.CLASS_A, 1e-12))

    def test_spec_validation(self):
        with self.assertRaises(ValueError):
            SampleSpec(ClassId.CLASS_A, 1, 10, 0)
        with self.assertRaises(ValueError):
            SampleSpec(ClassId.CLASS_A, 3, 0, 0)
        with self.assertRaises(ValueError):
            SampleSpec(ClassId.CLASS_A, 3, 10, -1)


class TestPairwiseBounds(unittest.TestCase):
    def test_matches_metric_d(self):
        points = sample_class(SampleSpec(ClassId.CLASS_B_DEBRANGES, 3, 12, 4))
        bounds = pairwise_metric_bounds(points, SMALL)
        for i, j in ((0, 1), (3, 7), (11, 2)):
            interval = metric_d(points[i], points[j], SMALL)
            self.assertAlmostEqual(bounds.lo[i, j], interval.lo, delta=1e-12)
            self.assertAlmostEqual(bounds.hi[i, j], interval.hi, delta=1e-12)

    def test_symmetric_with_zero_diagonal(self):
        points = sample_class(SampleSpec(ClassId.CLASS_A, 4, 30, 8))
        bounds = pairwise_metric_bounds(points, SMALL)
        np.testing.assert_array_equal(bounds.lo, bounds.lo.T)
        np.testing.assert_array_equal(bounds.hi, bounds.hi.T)
        np.testing.assert_array_equal(np.diagonal(bounds.lo), 0.0)
        np.testing.assert_allclose(np.diagonal(bounds.hi), metric_tail_bound(SMALL))
        self.assertTrue(np.all(bounds.lo <= bounds.hi))

    def test_independent_of_workers(self):
        points = sample_class(SampleSpec(ClassId.CLASS_A, 4, 300, 31))
        one = pairwise_metric_bounds(points, SMALL, workers=1)
        eight = pairwise_metric_bounds(points, SMALL, workers=8)
        np.testing.assert_array_equal(one.lo, eight.lo)
        np.testing.assert_array_equal(one.hi, eight.hi)

    def test_budget(self):
        points = sample_a2_slice(10, 0)
        with self.assertRaises(ValueError):
            cfg = MetricConfig(metric_terms=60, circle_samples=2**21)
            pairwise_metric_bounds(points, cfg)

    def test_tile_sizes_fit_budget(self):
        cases = ((4000, 14 * 8), (300, 60 * 4096), (5, 20 * 16), (7, BLOCK_BUDGET * 2))
        for count, grid in cases:
            with self.subTest(count=count, grid=grid):
                rows, cols = _tile_sizes(count, grid)
                self.assertTrue(1 <= rows <= cols <= count or rows == cols == 1)
                if grid <= BLOCK_BUDGET:
                    self.assertLessEqual(rows * cols * grid, BLOCK_BUDGET)

    def test_small_tiles_match_single_tile(self):
        points = sample_class(SampleSpec(ClassId.CLASS_A, 5, 41, 17))
        whole = pairwise_metric_bounds(points, SMALL)
        # 3 x 3 tiles over 41 points: ragged edges and many off-diagonal tiles
        with mock.patch("estimator.BLOCK_BUDGET", 9 * 14 * 8):
            tiled = pairwise_metric_bounds(points, SMALL, workers=3)
        np.testing.assert_allclose(tiled.lo, whole.lo, rtol=1e-13, atol=1e-15)
        np.testing.assert_allclose(tiled.hi, whole.hi, rtol=1e-13, atol=1e-15)
        np.testing.assert_array_equal(tiled.lo, tiled.lo.T)

    def test_default_grid_beyond_old_whole_grid_limit(self):
        # 20 points x 60 x 4096 values no longer need to be held at once
        points = sample_a2_slice(20, 9)
        cfg = MetricConfig()
        bounds = pairwise_metric_bounds(points, cfg, workers=2)
        interval = metric_d(points[3], points[17], cfg)
        self.assertAlmostEqual(bounds.lo[3, 17], interval.lo, delta=1e-12)
        self.assertAlmostEqual(bounds.hi[17, 3], interval.hi, delta=1e-12)


class TestGreedy(unittest.TestCase):
    def test_single_point(self):
        points = [TaylorPoly((1.0, 0.1))]
        self.assertEqual(greedy_pack(points, 0.3, SMALL), 1)
        self.assertEqual(greedy_cover(points, 0.3, SMALL), 1)

    def test_duplicates(self):
        points = [TaylorPoly((1.0, 0.2))] * 2
        self.assertEqual(greedy_pack(points, 0.1, SMALL), 1)
        self.assertEqual(greedy_cover(points, 0.1, SMALL), 1)

    def test_scan_order_and_ties(self):
        lo = np.array([[0.0, 0.5, 1.0], [0.5, 0.0, 0.5], [1.0, 0.5, 0.0]])
        bounds = PairwiseBounds(lo=lo, hi=lo + 0.01)
        # 0 blocks 1; 2 is far enough from 0
        self.assertEqual(greedy_pack(bounds, 0.6), 2)
        # the middle point covers everything at radius 0.52
        self.assertEqual(greedy_cover(bounds, 0.52), 1)
        # no point covers two others at radius 0.4
        self.assertEqual(greedy_cover(bounds, 0.4), 3)

    def test_cover_below_tail_rejected(self):
        points = sample_a2_slice(5, 1)
        with self.assertRaises(ValueError):
            greedy_cover(points, 0.1, MetricConfig(metric_terms=1, circle_samples=8))

    def test_delta_must_be_positive(self):
        with self.assertRaises(ValueError):
            greedy_pack([TaylorPoly((1.0,))], 0.0, SMALL)

    def test_lower_bracket_on_class_a(self):
        points = sample_class(SampleSpec(ClassId.CLASS_A, 4, 400, 6))
        bounds = pairwise_metric_bounds(points, SMALL)
        for delta in (0.02, 0.01, 0.005):
            pack = greedy_pack(bounds, 2 * delta)
            self.assertLessEqual(pack, greedy_cover(bounds, delta))


class TestSliceEstimate(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.points = sample_a2_slice(SLICE_SAMPLES, 2024)
        cls.bounds = pairwise_metric_bounds(cls.points, SMALL, workers=4)

    def test_duality_bracket(self):
        for delta in DEFAULT_LADDER:
            pack = greedy_pack(self.bounds, delta)
            cover = greedy_cover(self.bounds, delta)
            self.assertLessEqual(greedy_pack(self.bounds, 2 * delta), cover)
            self.assertLessEqual(cover, pack)

    def test_pack_close_to_reverse_scan(self):
        count = greedy_pack(self.bounds, 0.02)
        oracle = _reverse_scan_pack(self.bounds, 0.02)
        self.assertAlmostEqual(count / oracle, 1.0, delta=0.15)

    def test_cover_monotone(self):
        covers = [greedy_cover(self.bounds, d) for d in sorted(DEFAULT_LADDER)]
        self.assertTrue(all(a >= b for a, b in zip(covers, covers[1:])))

    def test_dimension(self):
        report = estimate(self.points, DEFAULT_LADDER, SMALL, workers=4)
        self.assertTrue(report.bracket_ok)
        self.assertIsNotNone(report.dimension)
        lo, hi = SLICE_DIMENSION_BAND
        self.assertTrue(lo <= report.dimension <= hi, report.dimension)
        # the finest rung has under MIN_SAMPLES_PER_BALL samples per ball
        self.assertEqual(report.dimension_deltas, [0.05, 0.02])
        self.assertEqual(report.sample_size, SLICE_SAMPLES)
        payload = report.to_dict()
        self.assertEqual(payload["label"], "empirical")
        self.assertEqual(payload["dimension_deltas"], [0.05, 0.02])


class TestEstimateReport(unittest.TestCase):
    def test_deterministic_across_threads(self):
        points = sample_class(SampleSpec(ClassId.CLASS_A, 4, 300, 42))
        meta = {"seed": 42}
        one = estimate(points, DEFAULT_LADDER, SMALL, workers=1, provenance=meta)
        eight = estimate(points, DEFAULT_LADDER, SMALL, workers=8, provenance=meta)
        self.assertEqual(one.to_dict(), eight.to_dict())
        self.assertEqual(one.provenance, {"seed": 42})

    def test_rows(self):
        points = sample_a2_slice(100, 5)
        report = estimate(points, (0.05, 0.02), SMALL)
        self.assertEqual([row[0] for row in report.rows()], [0.05, 0.02])
        self.assertIsNone(report.exponent_fit)

    def test_empty_ladder(self):
        with self.assertRaises(ValueError):
            estimate(sample_a2_slice(5, 0), [], SMALL)


class TestFits(unittest.TestCase):
    def test_quadratic_synthetic(self):
        levels = (3.0, 4.0, 5.0, 6.0)
        deltas = [math.exp(-L) for L in levels]
        report = _synthetic_report(deltas, [round(math.exp(L**2)) for L in levels])
        fit = exponent_fit(report, alpha=1.0)
        self.assertAlmostEqual(fit.power, 2.0, delta=0.01)
        self.assertAlmostEqual(fit.power_pack, 2.0, delta=0.01)
        self.assertEqual((fit.window_lower, fit.window_upper), (2.0, 3.0))
        self.assertEqual(fit.points_used, 4)

    def test_cubic_synthetic(self):
        levels = (2.0, 3.0, 4.0)
        deltas = [math.exp(-L) for L in levels]
        report = _synthetic_report(deltas, [round(math.exp(L**3)) for L in levels])
        self.assertAlmostEqual(exponent_fit(report, alpha=1.0).power, 3.0, delta=0.01)

    def test_degenerate_ladder(self):
        report = _synthetic_report([0.1, 0.01], [10, 100])
        with self.assertRaises(ValueError):
            exponent_fit(report, 1.0)
        report = _synthetic_report([0.1, 0.05, 0.01], [1, 1, 50])
        with self.assertRaises(ValueError):
            exponent_fit(report, 1.0)

    def test_dimension_synthetic(self):
        deltas = [0.1, 0.05, 0.01]
        report = _synthetic_report(deltas, [round(d**-2) for d in deltas])
        self.assertAlmostEqual(dimension_fit(report), 2.0, delta=1e-3)

    def test_dimension_drops_saturated_rungs(self):
        deltas = [0.1, 0.05, 0.02, 0.01]
        counts = [10, 40, 250, 600]
        size = MIN_SAMPLES_PER_BALL * 250
        report = _synthetic_report(deltas, counts, sample_size=size)
        self.assertEqual([d for d, _ in dimension_rungs(report)], [0.1, 0.05, 0.02])
        self.assertAlmostEqual(dimension_fit(report), 2.0, delta=1e-9)
        # unknown sample size: every rung is used
        self.assertEqual(len(dimension_rungs(_synthetic_report(deltas, counts))), 4)

    def test_dimension_needs_two_unsaturated_rungs(self):
        report = _synthetic_report([0.1, 0.05, 0.02], [10, 400, 900], sample_size=1000)
        with self.assertRaises(ValueError):
            dimension_fit(report)


def run_unittest():
    loader = unittest.TestLoader()
    suite = loader.loadTestsFromModule(sys.modules[__name__])
    runner = unittest.TextTestRunner(verbosity=2)
    return runner.run(suite)


if __name__ == "__main__":
    success = run_unittest().wasSuccessful()
    sys.exit(0 if success else 1)
