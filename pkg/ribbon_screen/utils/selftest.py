"""Desk-scale invariant suite behind ``ribbon-screen selftest``."""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from ribbon_screen.exceptions import RibbonScreenError
from ribbon_screen.utils import get_logger
from ribbon_screen.utils.bounds import eq1_rhs, kojima_mcshane_bound, volume_arc_bound
from ribbon_screen.utils.config import DEFAULT_CONFIG, RunConfig
from ribbon_screen.utils.cover import build_cover, count_generators, naive_permanent, permanent
from ribbon_screen.utils.dynamics import characteristic_radius, parse_matrix, trace_limit_check
from ribbon_screen.utils.grid import GridDiagram, parse_grid
from ribbon_screen.utils.homology import compute_homology, grid_complex, verify_d_squared
from ribbon_screen.utils.screen import (
    EXCLUDED,
    MUST_EQUAL,
    POSSIBLE,
    find_record,
    load_database,
    prepare_database,
    screen_database,
)

logger = get_logger(__name__)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

CORPUS = {
    "unknot": {"total": 1, "genus": 0, "fibered": True},
    "trefoil": {"total": 3, "genus": 1, "fibered": True},
    "figure_eight": {"total": 5, "genus": 1, "fibered": True},
    "five_two": {"total": 7, "genus": 1, "fibered": False, "top": 2},
}


def load_grid(name) -> GridDiagram:
    return parse_grid((DATA_DIR / f"{name}.grid").read_text())


def random_grid(size, rng) -> GridDiagram:
    xs = rng.permutation(size)
    while True:
        os = rng.permutation(size)
        if all(x != o for x, o in zip(xs, os)):
            return GridDiagram(size, tuple(int(v) for v in xs), tuple(int(v) for v in os))


def _corpus(config):
    grids = {name: load_grid(name) for name in CORPUS}
    return {name: g for name, g in grids.items() if g.size <= config.grid_ceiling}


def check_d_squared(config):
    rng = np.random.default_rng(20240101)
    grids = [g for g in _corpus(config).values() if g.size <= 6]
    for size in range(2, min(5, config.grid_ceiling) + 1):
        grids.extend(random_grid(size, rng) for _ in range(5))
    for g in grids:
        verify_d_squared(grid_complex(g, config))
    return True, f"d^2 = 0 on {len(grids)} grids"


def check_corpus_homology(config):
    seen = []
    for name, g in _corpus(config).items():
        expected = CORPUS[name]
        report = compute_homology(g, config)
        if report.hat.total != expected["total"] or report.genus != expected["genus"]:
            return False, f"{name}: total {report.hat.total}, genus {report.genus}"
        if report.fibered != expected["fibered"]:
            return False, f"{name}: fibered {report.fibered}"
        if "top" in expected and report.top_dimension != expected["top"]:
            return False, f"{name}: top dimension {report.top_dimension}"
        if report.fibered and report.alexander.degree != report.genus:
            return False, f"{name}: deg Δ {report.alexander.degree} != genus {report.genus}"
        seen.append(name)
    return True, f"hfk and Δ agree for {', '.join(seen) or 'no grids within the ceiling'}"


def check_cover_counts(config):
    checked = 0
    for name, g in _corpus(config).items():
        if g.size > 5:
            continue
        for n in range(1, 4):
            d = build_cover(g, n, config)
            count = count_generators(d, config)
            if count.bound_only:
                continue
            if count.exact > math.factorial(g.size) ** n:
                return False, f"{name} n={n}: {count.exact} > (δ!)^n"
            if n == 1 and count.exact != math.factorial(g.size):
                return False, f"{name} n=1: {count.exact} != δ!"
            checked += 1
    return True, f"matching counts within (δ!)^n on {checked} covers"


def check_permanent(config):
    rng = np.random.default_rng(7)
    for size in range(1, 8):
        matrix = rng.integers(0, 2, size=(size, size)).tolist()
        if permanent(matrix) != naive_permanent(matrix):
            return False, f"permanent disagrees with enumeration on {matrix}"
    return True, "Ryser agrees with enumeration up to 7x7"


def check_dilatation(config):
    details = []
    for name in ("figure_eight", "golden_ratio"):
        m = parse_matrix((DATA_DIR / f"{name}.matrix").read_text())
        estimate = trace_limit_check(m, 40, config)
        lower, upper = estimate.certified_interval
        oracle = characteristic_radius(m)
        if abs(estimate.trace_sequence[-1][1] - estimate.spectral_radius) >= 1e-6:
            return False, f"{name}: trace limit has not converged"
        if abs(oracle - estimate.spectral_radius) > 1e-9 or not lower - 1e-12 <= oracle <= upper + 1e-12:
            return False, f"{name}: {estimate.spectral_radius} vs characteristic root {oracle}"
        details.append(f"{name} {estimate.spectral_radius:.9f}")
    return True, ", ".join(details)


def check_bound_identities(config):
    for g, delta in ((1, 5), (1, 6), (2, 7)):
        if volume_arc_bound(g, delta).bound_value != kojima_mcshane_bound(g, math.factorial(delta)).bound_value:
            return False, f"volume-arc and kojima-mcshane differ at g={g}, delta={delta}"
    for delta in (3, 5, 8):
        values = [eq1_rhs(delta, 2 ** e).upper for e in range(11)]
        if any(b <= a for a, b in zip(values, values[1:])) or values[-1] >= math.factorial(delta):
            return False, f"eq1 is not increasing below δ! for delta={delta}"
    return True, "volume-arc composition and eq1 monotonicity"


def check_screening(config):
    records = prepare_database(load_database((DATA_DIR / "knots.json").read_text()), config)
    target = find_record(records, "trefoil")
    verdicts = {v.candidate: v for v in screen_database(target, records, config)}
    expected = {"unknot": POSSIBLE, "figure_eight": EXCLUDED, "trefoil": MUST_EQUAL}
    for name, overall in expected.items():
        if verdicts[name].overall != overall:
            return False, f"{name}: {verdicts[name].overall}, expected {overall}"
    if "R2" not in verdicts["figure_eight"].failed_rules:
        return False, "figure_eight is not excluded by R2"
    return True, "demo database against trefoil"


CHECKS = (
    ("d-squared", check_d_squared),
    ("corpus-homology", check_corpus_homology),
    ("cover-counts", check_cover_counts),
    ("permanent", check_permanent),
    ("dilatation", check_dilatation),
    ("bound-identities", check_bound_identities),
    ("screening", check_screening),
)


def run_selftest(config: RunConfig = DEFAULT_CONFIG) -> list[tuple[str, bool, str]]:
    results = []
    for name, check in CHECKS:
        if name == "screening" and config.grid_ceiling < 7:
            results.append((name, True, "skipped below grid ceiling 7"))
            continue
        try:
            passed, detail = check(config)
        except RibbonScreenError as exc:
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        logger.info("selftest %s: %s", name, "ok" if passed else "FAIL")
        results.append((name, passed, detail))
    return results
