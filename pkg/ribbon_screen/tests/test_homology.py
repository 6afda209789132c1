import unittest
from unittest import mock

import numpy as np

from ribbon_screen.exceptions import CeilingExceededError, ConsistencyError, NotAKnotError
from ribbon_screen.tests import oracle
from ribbon_screen.utils.config import DEFAULT_CONFIG
from ribbon_screen.utils.grid import GridDiagram
from ribbon_screen.utils.homology import (
    AlexanderPolynomial,
    BigradedDims,
    GridComplex,
    _GradingTables,
    alexander_polynomial,
    compute_homology,
    deconvolve,
    differential,
    enumerate_states,
    genus_and_fiberedness,
    gf2_rank,
    grid_alexander_polynomial,
    grid_complex,
    hfk_hat,
    homology_tilde,
    state_gradings,
    verify_d_squared,
)
from ribbon_screen.utils.selftest import load_grid, random_grid

TREFOIL_DELTA = AlexanderPolynomial.from_mapping({-1: 1, 0: -1, 1: 1})
FIGURE_EIGHT_DELTA = AlexanderPolynomial.from_mapping({-1: -1, 0: 3, 1: -1})


class TestAlexanderPolynomial(unittest.TestCase):
    def test_str(self):
        self.assertEqual(str(TREFOIL_DELTA), "t - 1 + t^-1")
        self.assertEqual(str(FIGURE_EIGHT_DELTA), "-t + 3 - t^-1")
        self.assertEqual(str(AlexanderPolynomial.from_mapping({0: 1})), "1")

    def test_shape(self):
        self.assertEqual(TREFOIL_DELTA.degree, 1)
        self.assertEqual(TREFOIL_DELTA.span, 2)
        self.assertEqual(FIGURE_EIGHT_DELTA.coefficient_list(), [-1, 3, -1])
        self.assertEqual(AlexanderPolynomial.from_list([-1, 3, -1], -1), FIGURE_EIGHT_DELTA)
        self.assertTrue(FIGURE_EIGHT_DELTA.is_symmetric())
        self.assertFalse(AlexanderPolynomial.from_mapping({0: 1, 1: 1}).is_symmetric())

    def test_evaluate(self):
        self.assertEqual(TREFOIL_DELTA.evaluate(1), 1)
        self.assertEqual(TREFOIL_DELTA.evaluate(-1), -3)
        self.assertEqual(FIGURE_EIGHT_DELTA.evaluate(-1), 5)

    def test_divides(self):
        square = AlexanderPolynomial.from_mapping({-2: 1, -1: -2, 0: 3, 1: -2, 2: 1})
        self.assertTrue(TREFOIL_DELTA.divides(square))
        self.assertFalse(TREFOIL_DELTA.divides(FIGURE_EIGHT_DELTA))
        self.assertTrue(AlexanderPolynomial.from_mapping({0: 1}).divides(FIGURE_EIGHT_DELTA))


class TestBigradedDims(unittest.TestCase):
    def test_zero_entries_are_dropped(self):
        table = BigradedDims({(0, 0): 1, (1, 1): 0})
        self.assertEqual(len(table), 1)
        self.assertEqual(table.total, 1)

    def test_negative_dimension(self):
        with self.assertRaises(ConsistencyError):
            BigradedDims({(0, 0): -1})

    def test_from_rows_accumulates(self):
        table = BigradedDims.from_rows([(0, 0, 1), (0, 0, 2), (-1, -1, 1)])
        self.assertEqual(table.get(0, 0), 3)
        self.assertEqual(table.alexander_totals(), {-1: 1, 0: 3})
        self.assertEqual(table.top_alexander(), 0)
        self.assertEqual(table.shifted(maslov=1).get(1, 0), 3)


class TestGf2Rank(unittest.TestCase):
    def test_rank(self):
        self.assertEqual(gf2_rank([]), 0)
        self.assertEqual(gf2_rank([0b11, 0b01, 0b10]), 2)
        self.assertEqual(gf2_rank([0b100, 0b010, 0b001, 0]), 3)

    def test_agrees_with_dense_elimination(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            dense = rng.integers(0, 2, size=(7, 9))
            packed = [int("".join(str(v) for v in row), 2) for row in dense]
            self.assertEqual(gf2_rank(packed), oracle.gf2_rank(dense))


class TestDeconvolve(unittest.TestCase):
    def test_one_factor(self):
        tilde = BigradedDims({(0, 0): 1, (-1, -1): 1})
        self.assertEqual(deconvolve(tilde, 1), BigradedDims({(0, 0): 1}))

    def test_inexact_division(self):
        with self.assertRaises(ConsistencyError):
            deconvolve(BigradedDims({(0, 0): 1}), 1)


class TestGridComplex(unittest.TestCase):
    def test_state_count(self):
        g = load_grid("trefoil")
        self.assertEqual(len(list(enumerate_states(g))), 120)
        self.assertEqual(len(grid_complex(g)), 120)

    def test_differential_drops_maslov_by_one(self):
        g = load_grid("figure_eight")
        for state in list(enumerate_states(g))[:40]:
            for target in differential(g, state):
                self.assertEqual(target.maslov, state.maslov - 1)
                self.assertEqual(target.alexander, state.alexander)

    def test_d_squared_vanishes(self):
        rng = np.random.default_rng(20240101)
        grids = [load_grid(name) for name in ("unknot", "trefoil", "figure_eight")]
        for size in range(2, 6):
            grids.extend(random_grid(size, rng) for _ in range(4))
        for g in grids:
            verify_d_squared(grid_complex(g))

    def test_d_squared_vanishes_on_fifty_random_grids_per_size(self):
        rng = np.random.default_rng(20240104)
        for size in range(2, 7):
            for index in range(50):
                g = random_grid(size, rng)
                with self.subTest(size=size, index=index, xs=g.xs, os=g.os):
                    verify_d_squared(grid_complex(g))

    def test_verify_d_squared_catches_an_odd_path(self):
        broken = GridComplex(None, ["a", "b", "c"], [(0, 0), (-1, 0), (-2, 0)], [(1,), (2,), ()])
        with self.assertRaisesRegex(ConsistencyError, "d\\^2"):
            verify_d_squared(broken)

    def test_ceiling(self):
        config = DEFAULT_CONFIG.replace(grid_ceiling=4)
        with self.assertRaises(CeilingExceededError):
            grid_complex(load_grid("trefoil"), config)

    def test_skewed_grading_is_rejected(self):
        original = _GradingTables.gradings

        def skewed(self, match):
            maslov, alexander = original(self, match)
            return maslov, alexander + match[0]

        with mock.patch.object(_GradingTables, "gradings", skewed):
            with self.assertRaises(ConsistencyError):
                homology_tilde(load_grid("trefoil"))

    def test_workers_give_the_same_complex(self):
        g = load_grid("trefoil")
        serial = grid_complex(g)
        parallel = grid_complex(g, DEFAULT_CONFIG.replace(workers=2))
        self.assertEqual(serial.matches, parallel.matches)
        self.assertEqual(serial.boundary, parallel.boundary)


class TestOracleEquivalence(unittest.TestCase):
    def grids(self):
        rng = np.random.default_rng(11)
        yield load_grid("unknot")
        yield load_grid("trefoil")
        for size in (3, 4):
            yield from (random_grid(size, rng) for _ in range(3))

    def test_gradings(self):
        for g in self.grids():
            for state in enumerate_states(g):
                self.assertEqual(
                    (state.maslov, state.alexander), oracle.gradings(g, state.match), state.match
                )

    def test_state_gradings_matches_enumeration(self):
        g = load_grid("figure_eight")
        for state in list(enumerate_states(g))[::37]:
            self.assertEqual(state_gradings(g, state.match), (state.maslov, state.alexander))

    def test_boundary(self):
        for g in self.grids():
            complex_ = grid_complex(g)
            states, _, matrix = oracle.boundary_matrix(g)
            self.assertTrue(oracle.squares_to_zero(matrix))
            index = {state: position for position, state in enumerate(states)}
            for position, match in enumerate(complex_.matches):
                expected = sorted(states[j] for j in np.nonzero(matrix[index[match]])[0])
                actual = sorted(complex_.matches[j] for j in complex_.boundary[position])
                self.assertEqual(actual, expected, match)

    def test_homology(self):
        for g in self.grids():
            self.assertEqual(homology_tilde(g).entries, oracle.homology(g))


class TestKnotInvariants(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.reports = {
            name: compute_homology(load_grid(name))
            for name in ("unknot", "trefoil", "figure_eight", "five_two")
        }

    def test_unknot(self):
        report = self.reports["unknot"]
        self.assertEqual(report.hat, BigradedDims({(0, 0): 1}))
        self.assertEqual(report.tilde.total, 2)
        self.assertEqual((report.genus, report.fibered), (0, True))
        self.assertEqual(report.alexander, AlexanderPolynomial.from_mapping({0: 1}))

    def test_trefoil(self):
        report = self.reports["trefoil"]
        self.assertEqual(report.hat.alexander_totals(), {-1: 1, 0: 1, 1: 1})
        self.assertEqual(report.tilde.total, 48)
        self.assertEqual((report.genus, report.fibered, report.nearly_fibered), (1, True, False))
        self.assertEqual(report.alexander, TREFOIL_DELTA)
        self.assertEqual(report.determinant, 3)

    def test_figure_eight(self):
        report = self.reports["figure_eight"]
        self.assertEqual(report.hat, BigradedDims({(1, 1): 1, (0, 0): 3, (-1, -1): 1}))
        self.assertEqual(report.alexander, FIGURE_EIGHT_DELTA)
        self.assertTrue(report.fibered)

    def test_five_two_is_nearly_fibered(self):
        report = self.reports["five_two"]
        self.assertEqual(report.hat.alexander_totals(), {-1: 2, 0: 3, 1: 2})
        self.assertEqual(report.hat.total, 7)
        self.assertEqual(report.genus, 1)
        self.assertFalse(report.fibered)
        self.assertTrue(report.nearly_fibered)
        self.assertEqual(report.top_dimension, 2)

    def test_hat_tables_are_symmetric(self):
        for name, report in self.reports.items():
            for (maslov, alexander), dim in report.hat.items():
                self.assertEqual(report.hat.get(maslov - 2 * alexander, -alexander), dim, name)

    def test_euler_characteristic_matches_winding_determinant(self):
        for name, report in self.reports.items():
            self.assertEqual(grid_alexander_polynomial(report.grid), report.alexander, name)
            self.assertEqual(alexander_polynomial(report.hat), report.alexander, name)
            self.assertEqual(report.alexander.evaluate(1), 1, name)

    def test_genus_and_fiberedness(self):
        self.assertEqual(genus_and_fiberedness(BigradedDims({(0, 0): 3, (1, 1): 2, (-1, -1): 2})), (1, False, True))
        with self.assertRaises(ConsistencyError):
            genus_and_fiberedness(BigradedDims())

    def test_links_are_rejected(self):
        link = GridDiagram(4, (1, 0, 3, 2), (0, 1, 2, 3))
        with self.assertRaises(NotAKnotError):
            hfk_hat(link)
        with self.assertRaises(NotAKnotError):
            compute_homology(link)
