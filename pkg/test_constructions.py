# test_constructions.py
"""
Unit tests for constructions: packing family and certificate, rho, bound curves,
truncation and the coefficient net, Koebe sharpness.
Run with: python -m pytest test_constructions.py -v
Or: python test_constructions.py
"""

import itertools
import math
import sys
import unittest

import numpy as np

# Allow running without pytest
try:
    import pytest
    HAS_PYTEST = True
except ImportError:
    HAS_PYTEST = False

from constructions import (
    NET_COUNT_BAND,
    SHARPNESS_RATE_BAND,
    TAIL_RATE_BAND,
    UPPER_CUBIC_RATIO_BOUND,
    NetUnderflowError,
    RhoSearchError,
    compute_rho,
    curve_power_ratio,
    curves_consistent,
    iter_packing_members,
    koebe_sandwich,
    koebe_sharpness_lower,
    lower_bound_curve,
    net_center,
    net_upper_point,
    packing_certificate,
    packing_index_vector,
    packing_member,
    quantize_to_net,
    schlicht_bounds,
    truncate,
    upper_bound_curve,
)
from domain.models import ClassId, CurvePoint, MetricConfig, SampleSpec, TaylorPoly
from estimator import sample_class
from function_classes import is_member, koebe
from metric import (
    coeff_distance_lower,
    lambda_r_power,
    metric_d,
    metric_tail_bound,
    truncation_tail_bound,
)

DEFAULT = MetricConfig()
FAST = MetricConfig(circle_samples=1024)


def _rho_oracle(cfg, n_max):
    """
    Smallest integer m > 1/lambda with min_k(lambda_k r_k^k / 6)/n^2 >= m^-n
    for all n <= n_max.
    """
    m = math.floor(1 / cfg.lam) + 1
    while True:
        ok = True
        for n in range(2, n_max + 1):
            g = min(lambda_r_power(cfg, k) for k in range(2, n + 1)) / 6 / n**2
            if g < float(m) ** -n:
                ok = False
                break
        if ok:
            return m
        m += 1


def _rate(bound, n):
    return -math.log(bound) / math.sqrt(n)


class TestPackingFamily(unittest.TestCase):
    def test_smallest_member(self):
        self.assertEqual(packing_member(2, 1, (1,)).coeffs, (1 + 0j, 0.25 + 0j))

    def test_member_coefficients(self):
        p = packing_member(3, 4, (4, 4))
        self.assertAlmostEqual(p.coeffs[1].real, 1 / 6, places=15)
        self.assertAlmostEqual(p.coeffs[2].real, 1 / 9, places=15)

    def test_members_in_class_a(self):
        for p in iter_packing_members(4, 3):
            self.assertTrue(is_member(p, ClassId.CLASS_A, 0.0))

    def test_convex_members_satisfy_convex_condition(self):
        for p in iter_packing_members(4, 3, "convex"):
            self.assertTrue(is_member(p, ClassId.CONVEX_SUFFICIENT, 1e-15))

    def test_index_vector_matches_enumeration(self):
        members = list(iter_packing_members(3, 4))
        self.assertEqual(len(members), 16)
        for index in (0, 5, 15):
            vector = packing_index_vector(3, 4, index)
            self.assertEqual(packing_member(3, 4, vector), members[index])

    def test_validation(self):
        with self.assertRaises(ValueError):
            packing_member(3, 4, (5, 1))
        with self.assertRaises(ValueError):
            packing_member(3, 4, (1,))
        with self.assertRaises(ValueError):
            packing_member(1, 4, ())
        with self.assertRaises(ValueError):
            packing_member(3, 4, (1, 1), "round")


class TestPackingCertificate(unittest.TestCase):
    def test_reference_separation(self):
        cert = packing_certificate(3, 4, DEFAULT)
        self.assertEqual(cert.count, 16)
        expected = min(1 / 18, 27 / 1024) / 36
        self.assertAlmostEqual(cert.separation_lo / expected, 1.0, delta=1e-13)
        self.assertAlmostEqual(cert.delta * 3, cert.separation_lo, places=18)

    def test_brute_force_pairs(self):
        for n, K in ((2, 4), (3, 3), (3, 4)):
            cert = packing_certificate(n, K, DEFAULT)
            members = list(iter_packing_members(n, K))
            self.assertEqual(len(members), K ** (n - 1))
            for f, g in itertools.combinations(members, 2):
                lower = coeff_distance_lower(f, g, DEFAULT)
                self.assertGreaterEqual(lower, cert.separation_lo - 1e-12)

    def test_metric_separation_n3_k3(self):
        cert = packing_certificate(3, 3, DEFAULT)
        for f, g in itertools.combinations(iter_packing_members(3, 3), 2):
            interval = metric_d(f, g, DEFAULT)
            self.assertGreaterEqual(interval.hi, cert.separation_lo)
            self.assertGreaterEqual(interval.lo, cert.separation_lo - 1e-9)

    def test_convex_separation(self):
        cert = packing_certificate(3, 3, DEFAULT, "convex")
        for f, g in itertools.combinations(iter_packing_members(3, 3, "convex"), 2):
            lower = coeff_distance_lower(f, g, DEFAULT)
            self.assertGreaterEqual(lower, cert.separation_lo - 1e-12)


class TestRho(unittest.TestCase):
    def test_default_rho(self):
        rho = compute_rho(DEFAULT, 200)
        self.assertEqual(rho.denominator, 15)
        self.assertEqual(rho.rho, 1 / 15)
        self.assertEqual(rho.binding_n, 2)
        self.assertTrue(rho.tail_certified)
        self.assertLess(rho.rho, DEFAULT.lam)

    def test_independent_of_horizon(self):
        for n_max in (10, 50, 200):
            self.assertEqual(compute_rho(DEFAULT, n_max).denominator, 15)

    def test_binding_constraint_arithmetic(self):
        g2 = 0.25 * (2 / 3) ** 2 / 6 / 4
        self.assertAlmostEqual(g2, 1 / 216, places=15)
        self.assertGreaterEqual(g2, (1 / 15) ** 2)
        self.assertLess(g2, (1 / 14) ** 2)

    def test_matches_grid_search_oracle(self):
        configs = (
            MetricConfig(lam=0.3),
            MetricConfig(lam=0.6, alpha=2.0),
            MetricConfig(lam=0.8, alpha=0.7),
        )
        for cfg in configs:
            with self.subTest(cfg=cfg):
                self.assertEqual(compute_rho(cfg, 40).denominator, _rho_oracle(cfg, 40))

    def test_search_limit(self):
        with self.assertRaises(RhoSearchError):
            compute_rho(MetricConfig(lam=1e-7), 50)


class TestLowerCurve(unittest.TestCase):
    def test_first_point(self):
        (point,) = lower_bound_curve(DEFAULT, 2, 2)
        self.assertEqual(point.delta, 15.0**-4)
        self.assertAlmostEqual(point.log_count, 2 * math.log(15), places=13)

    def test_n3(self):
        point = lower_bound_curve(DEFAULT, 3, 3)[0]
        self.assertAlmostEqual(point.delta / 8.78e-8, 1.0, delta=1e-3)
        self.assertAlmostEqual(point.log_count, 6 * math.log(15), places=12)
        self.assertAlmostEqual(point.log_count, 16.25, delta=0.01)

    def test_quadratic_ratio(self):
        limit = 1 / (4 * math.log(15))
        for point in lower_bound_curve(DEFAULT, 10, 40):
            self.assertAlmostEqual(curve_power_ratio(point, 2) / limit, 1.0, delta=0.2)

    def test_monotone(self):
        points = lower_bound_curve(DEFAULT, 2, 30)
        for a, b in zip(points, points[1:]):
            self.assertLess(b.log_count, float("inf"))
            self.assertGreater(b.log_count, a.log_count)
            self.assertGreater(b.log_inv_delta, a.log_inv_delta)

    def test_underflowing_delta_keeps_log(self):
        point = lower_bound_curve(DEFAULT, 200, 200)[0]
        self.assertEqual(point.delta, 0.0)
        self.assertAlmostEqual(point.log_inv_delta, 400 * math.log(15), places=9)


class TestTruncateAndQuantize(unittest.TestCase):
    def test_truncate(self):
        self.assertEqual(truncate(koebe(10), 10), koebe(10))
        self.assertEqual(truncate(koebe(10), 3).coeffs, (1 + 0j, 2 + 0j, 3 + 0j))
        self.assertEqual(truncate(koebe(3), 10), koebe(3))

    def test_grid_point_is_fixed(self):
        q, errors = quantize_to_net(TaylorPoly((1.0,)), 1, 4)
        self.assertEqual(q, TaylorPoly((1.0,)))
        self.assertEqual(errors.tolist(), [0.0])

    def test_reference_quantization(self):
        p = TaylorPoly((0.9, -1.3 + 0.6j))
        q, errors = quantize_to_net(p, 2, 4)
        self.assertEqual(q.coeffs, (1 + 0j, -1.5 + 0.5j))
        np.testing.assert_allclose(errors, [0.1, math.hypot(0.2, 0.1)], atol=1e-12)
        for k, e in enumerate(errors, start=1):
            self.assertLessEqual(e, k / (math.sqrt(2) * 4))

    def test_rejects_outside_class_b(self):
        with self.assertRaises(ValueError):
            quantize_to_net(TaylorPoly((1.5,)), 1, 4)
        with self.assertRaises(ValueError):
            quantize_to_net(koebe(3), 2, 4)

    def test_quantization_radius(self):
        C = DEFAULT.lam / (1 - DEFAULT.lam)
        bound = C * 4 / 8 + metric_tail_bound(FAST)
        for p in sample_class(SampleSpec(ClassId.CLASS_B_DEBRANGES, 2, 60, 77)):
            q, _ = quantize_to_net(p, 2, 8)
            self.assertLessEqual(metric_d(p, q, FAST).hi, bound + 1e-9)


class TestNet(unittest.TestCase):
    def test_radius_within_twice_tail(self):
        for n in (1, 5, 10, 40):
            cert = net_upper_point(n, DEFAULT)
            self.assertLessEqual(cert.radius_hi, 2 * cert.tail_bound)
            self.assertGreaterEqual(cert.radius_hi, cert.tail_bound)
            self.assertFalse(cert.internal)

    def test_reference_point(self):
        cert = net_upper_point(10, DEFAULT)
        tau = truncation_tail_bound(10, DEFAULT, "exact")
        K = math.ceil(100 / tau)
        self.assertEqual(cert.K, K)
        self.assertEqual(cert.radius_hi, 100 / K + tau)
        self.assertEqual(cert.log_count, 20 * math.log(2 * K + 1))

    def test_count_growth_band(self):
        lo, hi = NET_COUNT_BAND
        for n in (20, 50, 100, 200):
            cert = net_upper_point(n, DEFAULT)
            self.assertTrue(lo <= cert.log_count / n**1.5 <= hi, n)

    def test_net_center_covers_class_b(self):
        cert = net_upper_point(2, FAST)
        for f in sample_class(SampleSpec(ClassId.CLASS_B_DEBRANGES, 4, 40, 5)):
            center = net_center(f, 2, cert.K)
            self.assertLessEqual(metric_d(f, center, FAST).hi, cert.radius_hi + 1e-9)

    def test_underflow(self):
        with self.assertRaises(NetUnderflowError) as ctx:
            net_upper_point(10**6, MetricConfig(lam=1e-10, metric_terms=40))
        self.assertEqual(ctx.exception.n, 10**6)


class TestUpperCurve(unittest.TestCase):
    def test_strictly_decreasing(self):
        points = upper_bound_curve(DEFAULT, 5, 100)
        self.assertTrue(all(b.delta < a.delta for a, b in zip(points, points[1:])))

    def test_cubic_ratio_bounded(self):
        for point in upper_bound_curve(DEFAULT, 20, 200):
            self.assertLessEqual(curve_power_ratio(point, 3), UPPER_CUBIC_RATIO_BOUND)

    def test_alpha_two_uses_fourth_power(self):
        cfg = MetricConfig(alpha=2.0)
        points = upper_bound_curve(cfg, 60, 100)
        ratios = [curve_power_ratio(p, 2 + cfg.alpha) for p in points]
        self.assertTrue(all(math.isfinite(r) and r > 0 for r in ratios))

    def test_consistent_with_lower_curve(self):
        lower = lower_bound_curve(DEFAULT, 2, 20)
        upper = upper_bound_curve(DEFAULT, 2, 20)
        self.assertEqual(curves_consistent(lower, upper), [])

    def test_inconsistency_detected(self):
        lower = [CurvePoint(2, 0.1, 50.0, -math.log(0.1))]
        upper = [CurvePoint(3, 0.01, 10.0, -math.log(0.01))]
        self.assertEqual(curves_consistent(lower, upper), [(2, 3)])

    def test_schlicht_bounds(self):
        lower = lower_bound_curve(DEFAULT, 4, 4)[0]
        upper = upper_bound_curve(DEFAULT, 4, 4)[0]
        bounds = schlicht_bounds(lower, upper)
        self.assertEqual(bounds["lower_delta"], lower.delta / 2)
        self.assertEqual(bounds["upper_delta"], 2 * upper.delta)
        self.assertEqual(bounds["lower_log_count"], lower.log_count)


class TestKoebeSharpness(unittest.TestCase):
    def test_single_term(self):
        self.assertGreaterEqual(koebe_sharpness_lower(9, DEFAULT), 0.125 * 0.75**10)

    def test_below_tail_bound(self):
        for n in (1, 3, 10, 25, 100, 400):
            tail = truncation_tail_bound(n, DEFAULT)
            self.assertLessEqual(koebe_sharpness_lower(n, DEFAULT), tail + 1e-9)

    def test_rate_bands(self):
        for n in (25, 50, 100, 200, 400):
            sharp = _rate(koebe_sharpness_lower(n, DEFAULT), n)
            tail = _rate(truncation_tail_bound(n, DEFAULT), n)
            lo, hi = SHARPNESS_RATE_BAND
            self.assertTrue(lo <= sharp <= hi, (n, sharp))
            self.assertTrue(TAIL_RATE_BAND[0] <= tail <= TAIL_RATE_BAND[1], (n, tail))

    def test_bands_stay_close_to_observed_rates(self):
        degrees = (25, 50, 100, 200, 400)
        observed = {
            "tail": [_rate(truncation_tail_bound(n, DEFAULT), n) for n in degrees],
            "sharpness": [_rate(koebe_sharpness_lower(n, DEFAULT), n) for n in degrees],
        }
        bands = {"tail": TAIL_RATE_BAND, "sharpness": SHARPNESS_RATE_BAND}
        for name, rates in observed.items():
            with self.subTest(band=name):
                lo, hi = bands[name]
                # a few tens of percent of headroom, not an order of magnitude
                low, high = min(rates), max(rates)
                self.assertTrue(0.7 * low <= lo <= 0.92 * low, (lo, rates))
                self.assertTrue(1.08 * high <= hi <= 1.35 * high, (hi, rates))
        cubic = [curve_power_ratio(p, 3) for p in upper_bound_curve(DEFAULT, 20, 200)]
        ratio = UPPER_CUBIC_RATIO_BOUND / max(cubic)
        self.assertTrue(1.05 <= ratio <= 1.35, max(cubic))

    def test_sandwich(self):
        for n in (25, 50, 100):
            row = koebe_sandwich(n, DEFAULT)
            self.assertTrue(row.holds())
            self.assertLessEqual(row.tail_exact, row.tail_simple)
            self.assertLessEqual(row.proxy_lo, row.proxy_hi)


def run_unittest():
    loader = unittest.TestLoader()
    suite = loader.loadTestsFromModule(sys.modules[__name__])
    runner = unittest.TextTestRunner(verbosity=2)
    return runner.run(suite)


if __name__ == "__main__":
    success = run_unittest().wasSuccessful()
    sys.exit(0 if success else 1)
