import math
import sys
import unittest
from fractions import Fraction

import numpy as np

from ribbon_screen.exceptions import BoundParameterError
from ribbon_screen.utils.bounds import (
    BOUNDS,
    CertifiedReal,
    compare_measured,
    cornish_growth_bound,
    dilatation_arc_bound,
    entropy_relation_bound,
    eq1_check,
    eq1_rhs,
    evaluate_bound,
    kojima_entropy_bound_check,
    kojima_mcshane_bound,
    volume_arc_bound,
    volume_arc_chain_audit,
    volume_ratio_chain_audit,
    volume_ratio_constant,
)

FIGURE_EIGHT_DILATATION = 2.618034
FIGURE_EIGHT_VOLUME = 2.0298832


class TestCertifiedReal(unittest.TestCase):
    def test_exact_values(self):
        third = CertifiedReal.from_exact(Fraction(1, 3))
        self.assertEqual(third.exact, Fraction(1, 3))
        self.assertLessEqual(Fraction(third.lower), Fraction(1, 3))
        self.assertGreaterEqual(Fraction(third.upper), Fraction(1, 3))
        self.assertEqual(CertifiedReal.from_exact(120).value, 120)

    def test_compare_measured(self):
        bound = CertifiedReal.from_exact(10)
        self.assertEqual(compare_measured(9.0, bound), (True, False))
        self.assertEqual(compare_measured(10.0, bound), (True, True))
        self.assertEqual(compare_measured(10.5, bound), (False, False))


class TestBounds(unittest.TestCase):
    def test_dilatation_arc(self):
        report = dilatation_arc_bound(5, measured=FIGURE_EIGHT_DILATATION)
        self.assertEqual(report.bound_value.exact, 120)
        self.assertTrue(report.satisfied)
        self.assertFalse(report.near_boundary)

    def test_volume_arc(self):
        bound = volume_arc_bound(1, 6).bound_value
        self.assertTrue(bound.contains(3 * math.pi * math.log(720)))
        self.assertAlmostEqual(bound.upper, 62.01, places=2)
        self.assertLess(bound.width, 1e-12)

    def test_factorial_beyond_float_range(self):
        for delta in (171, 200):
            with self.subTest(delta=delta):
                report = dilatation_arc_bound(delta, measured=2.6)
                bound = report.bound_value
                self.assertEqual(bound.exact, math.factorial(delta))
                self.assertEqual(bound.lower, sys.float_info.max)
                self.assertEqual(bound.upper, math.inf)
                self.assertTrue(report.satisfied)
                self.assertFalse(report.near_boundary)
        report = evaluate_bound("dilatation-arc", {"delta": "200"})
        self.assertEqual(report.bound_value.exact, math.factorial(200))

    def test_volume_arc_for_large_arc_index(self):
        bound = volume_arc_bound(1, 171, measured=2.03).bound_value
        self.assertTrue(math.isfinite(bound.upper))
        self.assertAlmostEqual(bound.upper, 3 * math.pi * math.lgamma(172), delta=1e-9)
        self.assertLess(bound.width, 1e-9)

    def test_volume_arc_is_kojima_mcshane_at_factorial(self):
        self.assertEqual(
            volume_arc_bound(2, 5).bound_value, kojima_mcshane_bound(2, 120).bound_value
        )

    def test_kojima_mcshane(self):
        report = kojima_mcshane_bound(1, FIGURE_EIGHT_DILATATION, measured=FIGURE_EIGHT_VOLUME)
        self.assertTrue(report.satisfied)
        self.assertTrue(report.bound_value.contains(3 * math.pi * math.log(FIGURE_EIGHT_DILATATION)))

    def test_entropy_relation(self):
        report = entropy_relation_bound(FIGURE_EIGHT_DILATATION, 2, measured=FIGURE_EIGHT_DILATATION)
        self.assertTrue(report.satisfied)
        equal = entropy_relation_bound(FIGURE_EIGHT_DILATATION, 1, measured=FIGURE_EIGHT_DILATATION)
        self.assertTrue(equal.satisfied)
        self.assertTrue(equal.near_boundary)

    def test_eq1_increases_toward_factorial(self):
        for delta in (3, 5, 8):
            values = [eq1_rhs(delta, 2 ** e).upper for e in range(8)]
            self.assertEqual(values, sorted(values))
            self.assertLess(values[-1], math.factorial(delta))
        self.assertTrue(eq1_rhs(5, 1).contains(120 / 16))

    def test_eq1_check(self):
        self.assertTrue(eq1_check(7, 5, 1).satisfied)
        self.assertFalse(eq1_check(8, 5, 1).satisfied)
        self.assertTrue(eq1_check(0, 5, 2).satisfied)

    def test_cornish_growth(self):
        self.assertTrue(cornish_growth_bound(1, 2, 1, 3).contains(8))

    def test_volume_ratio_constant(self):
        self.assertTrue(volume_ratio_constant(2, 1).contains(18 * math.pi))
        self.assertTrue(volume_ratio_constant(1, 0.5).contains(1.5 * math.pi))

    def test_volume_ratio_constant_on_random_inputs(self):
        rng = np.random.default_rng(20240105)
        for _ in range(100):
            g, b = int(rng.integers(1, 21)), float(rng.uniform(1e-3, 100))
            expected = 3 * math.pi * g * (2 * g - 1) * b
            with self.subTest(g=g, b=b):
                constant = volume_ratio_constant(g, b)
                self.assertLessEqual(abs(constant.lower - expected), 1e-12 * expected)
                self.assertLessEqual(abs(constant.upper - expected), 1e-12 * expected)

    def test_kojima_entropy(self):
        self.assertTrue(kojima_entropy_bound_check(FIGURE_EIGHT_DILATATION, 1.0, FIGURE_EIGHT_VOLUME))
        self.assertFalse(kojima_entropy_bound_check(FIGURE_EIGHT_DILATATION, 0.1, FIGURE_EIGHT_VOLUME))

    def test_preconditions(self):
        cases = (
            lambda: dilatation_arc_bound(1),
            lambda: dilatation_arc_bound(5.5),
            lambda: kojima_mcshane_bound(0, 2.0),
            lambda: kojima_mcshane_bound(1, 1.0),
            lambda: entropy_relation_bound(0.5, 1),
            lambda: volume_ratio_constant(1, 0),
            lambda: cornish_growth_bound(-1, 2.0, 1, 1),
            lambda: eq1_rhs(5, 0),
        )
        for case in cases:
            with self.assertRaises(BoundParameterError):
                case()


class TestChainAudits(unittest.TestCase):
    def test_volume_arc_chain(self):
        steps = volume_arc_chain_audit(6, FIGURE_EIGHT_DILATATION, 1, 1, FIGURE_EIGHT_VOLUME)
        self.assertEqual(len(steps), 3)
        self.assertTrue(all(step.holds for step in steps))
        self.assertEqual(len(volume_arc_chain_audit(6, FIGURE_EIGHT_DILATATION, 1, 2)), 2)

    def test_volume_arc_chain_flags_a_larger_genus(self):
        steps = volume_arc_chain_audit(6, FIGURE_EIGHT_DILATATION, 2, 1)
        self.assertFalse(steps[0].holds)

    def test_volume_ratio_chain(self):
        steps = volume_ratio_chain_audit(
            1, 1, FIGURE_EIGHT_DILATATION, FIGURE_EIGHT_DILATATION, 1.0, FIGURE_EIGHT_VOLUME,
            FIGURE_EIGHT_VOLUME,
        )
        self.assertEqual(len(steps), 6)
        self.assertEqual([step.relation for step in steps].count("="), 2)
        self.assertTrue(all(step.holds for step in steps), [s.label for s in steps if not s.holds])

    def test_volume_ratio_chain_on_random_consistent_inputs(self):
        rng = np.random.default_rng(20240106)
        for _ in range(100):
            g_k = int(rng.integers(1, 6))
            g_j = int(rng.integers(1, g_k + 1))
            lam_k = float(rng.uniform(1.2, 5.0))
            lam_j = float(rng.uniform(1.01, 0.999 * lam_k ** g_j))
            b = float(rng.uniform(0.05, 2.0))
            vol_k = math.log(lam_k) / b * float(rng.uniform(1.01, 3.0))
            vol_j = 3 * math.pi * (2 * g_j - 1) * math.log(lam_j) * float(rng.uniform(0.1, 0.99))
            with self.subTest(g_j=g_j, g_k=g_k, lam_j=lam_j, lam_k=lam_k, b=b, vol_k=vol_k):
                steps = volume_ratio_chain_audit(g_j, g_k, lam_j, lam_k, b, vol_k, vol_j)
                self.assertEqual(len(steps), 6)
                self.assertTrue(all(step.holds for step in steps), [s.label for s in steps if not s.holds])


class TestEvaluateBound(unittest.TestCase):
    def test_named_bounds(self):
        self.assertEqual(evaluate_bound("dilatation-arc", {"delta": "5"}).bound_value.exact, 120)
        report = evaluate_bound("volume-arc", {"g": "1", "delta": "6", "measured": "2.03"})
        self.assertTrue(report.satisfied)
        report = evaluate_bound("entropy-relation", {"lambda": "2.618034", "g": "1"})
        self.assertEqual(report.inputs, {"lambda_K": 2.618034, "g_K": 1})
        self.assertTrue(evaluate_bound("volume-ratio", {"g": "2", "b": "1"}).bound_value.contains(18 * math.pi))
        self.assertTrue(evaluate_bound("kojima-entropy", {"lambda": "2.618034", "b": "1", "vol": "2.03"}).satisfied)
        self.assertTrue(evaluate_bound("eq1-check", {"dim": "7", "delta": "5", "n": "1"}).satisfied)

    def test_every_bound_is_reachable(self):
        self.assertEqual(
            set(BOUNDS),
            {
                "dilatation-arc", "eq1", "eq1-check", "volume-arc", "entropy-relation",
                "cornish-growth", "kojima-mcshane", "volume-ratio", "kojima-entropy",
            },
        )

    def test_integer_parameters_accept_integral_floats(self):
        self.assertEqual(evaluate_bound("dilatation-arc", {"delta": "5.0"}).bound_value.exact, 120)

    def test_parameter_errors(self):
        cases = (
            ("no-such-bound", {}),
            ("volume-arc", {"g": "1"}),
            ("volume-arc", {"g": "1", "delta": "6", "n": "2"}),
            ("volume-arc", {"g": "one", "delta": "6"}),
            ("dilatation-arc", {"delta": "5.5"}),
            ("eq1", {"delta": "5", "n": "1", "measured": "3"}),
            ("volume-ratio", {"g": "1", "b": "-1"}),
        )
        for name, params in cases:
            with self.assertRaises(BoundParameterError, msg=f"{name} {params}"):
                evaluate_bound(name, params)
