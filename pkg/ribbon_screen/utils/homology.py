"""Tilde grid homology over Z/2 and the knot invariants read off it.

The tilde complex is generated by the δ! grid states. Its differential counts
empty rectangles: rectangles on the torus with two state points at the
lower-left and upper-right corners and no marking and no other state point
inside. Homology is computed block by block in the (maslov, alexander)
bigrading with bit-packed Gaussian elimination over GF(2).
"""
from __future__ import annotations

import itertools
import math
import multiprocessing as mp
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction

import sympy

from ribbon_screen.exceptions import CeilingExceededError, ConsistencyError, NotAKnotError
from ribbon_screen.utils import get_logger
from ribbon_screen.utils.config import DEFAULT_CONFIG, RunConfig
from ribbon_screen.utils.grid import GridDiagram, component_count, determinant, winding_numbers

logger = get_logger(__name__)


def _normalize(value):
    value = Fraction(value)
    return value.numerator if value.denominator == 1 else value


@dataclass(frozen=True)
class GridState:
    match: tuple[int, ...]
    maslov: int
    alexander: int | Fraction


class BigradedDims:
    """Dimension table keyed by (maslov, alexander); zero entries are dropped."""

    __slots__ = ("_entries",)

    def __init__(self, entries=None):
        cleaned = {}
        for (maslov, alexander), dim in dict(entries or {}).items():
            if dim < 0:
                raise ConsistencyError(f"negative dimension {dim} at ({maslov}, {alexander})")
            if dim:
                cleaned[(int(maslov), _normalize(alexander))] = int(dim)
        self._entries = dict(sorted(cleaned.items()))

    @classmethod
    def from_rows(cls, rows):
        entries = {}
        for maslov, alexander, dim in rows:
            key = (int(maslov), _normalize(alexander))
            entries[key] = entries.get(key, 0) + int(dim)
        return cls(entries)

    @property
    def entries(self):
        return dict(self._entries)

    def items(self):
        return self._entries.items()

    def get(self, maslov, alexander):
        return self._entries.get((maslov, _normalize(alexander)), 0)

    def rows(self):
        return [(maslov, alexander, dim) for (maslov, alexander), dim in self._entries.items()]

    @property
    def total(self):
        return sum(self._entries.values())

    def alexander_totals(self):
        totals = defaultdict(int)
        for (_, alexander), dim in self._entries.items():
            totals[alexander] += dim
        return dict(sorted(totals.items()))

    def top_alexander(self):
        if not self._entries:
            return None
        return max(alexander for _, alexander in self._entries)

    def shifted(self, maslov=0, alexander=0):
        return BigradedDims({(m + maslov, a + alexander): d for (m, a), d in self._entries.items()})

    def __len__(self):
        return len(self._entries)

    def __bool__(self):
        return bool(self._entries)

    def __eq__(self, other):
        if not isinstance(other, BigradedDims):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self):
        return hash(tuple(self._entries.items()))

    def __repr__(self):
        body = ", ".join(f"({m}, {a}): {d}" for (m, a), d in self._entries.items())
        return f"BigradedDims({{{body}}})"


@dataclass(frozen=True)
class AlexanderPolynomial:
    """Laurent polynomial stored as increasing (exponent, coefficient) pairs."""

    coeffs: tuple[tuple[int, int], ...]

    @classmethod
    def from_mapping(cls, mapping):
        pairs = sorted((int(exp), int(coeff)) for exp, coeff in dict(mapping).items() if coeff)
        return cls(tuple(pairs))

    @classmethod
    def from_list(cls, coefficients, lowest_exponent):
        return cls.from_mapping(
            {lowest_exponent + offset: coeff for offset, coeff in enumerate(coefficients)}
        )

    def as_dict(self):
        return dict(self.coeffs)

    def coefficient(self, exponent):
        return self.as_dict().get(exponent, 0)

    @property
    def degree(self):
        """Highest exponent of the symmetric representative (0 for a constant)."""
        if not self.coeffs:
            return 0
        return max(self.coeffs[-1][0], 0)

    @property
    def span(self):
        if not self.coeffs:
            return 0
        return self.coeffs[-1][0] - self.coeffs[0][0]

    def coefficient_list(self):
        """Coefficients from the lowest to the highest exponent."""
        if not self.coeffs:
            return []
        low, high = self.coeffs[0][0], self.coeffs[-1][0]
        lookup = self.as_dict()
        return [lookup.get(exp, 0) for exp in range(low, high + 1)]

    def evaluate(self, t):
        t = Fraction(t)
        return sum(coeff * t ** exp for exp, coeff in self.coeffs)

    def is_symmetric(self):
        lookup = self.as_dict()
        return all(lookup.get(-exp, 0) == coeff for exp, coeff in lookup.items())

    def divides(self, other):
        """Whether this polynomial divides ``other`` in Z[t, t^-1]."""
        if not self.coeffs:
            return False
        if not other.coeffs:
            return True
        t = sympy.Symbol("t")
        divisor = sympy.Poly(self.coefficient_list()[::-1], t, domain="QQ")
        dividend = sympy.Poly(other.coefficient_list()[::-1], t, domain="QQ")
        _, remainder = sympy.div(dividend, divisor)
        return remainder.is_zero

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for exp, coeff in reversed(self.coeffs):
            magnitude = abs(coeff)
            if exp == 0:
                term = str(magnitude)
            else:
                power = "t" if exp == 1 else f"t^{exp}"
                term = power if magnitude == 1 else f"{magnitude}{power}"
            if not parts:
                parts.append(term if coeff > 0 else f"-{term}")
            else:
                parts.append(f"+ {term}" if coeff > 0 else f"- {term}")
        return " ".join(parts)


def gf2_rank(rows):
    """Rank over GF(2) of rows packed into Python ints."""
    pivots = {}
    rank = 0
    for row in rows:
        while row:
            top = row.bit_length() - 1
            pivot = pivots.get(top)
            if pivot is None:
                pivots[top] = row
                rank += 1
                break
            row ^= pivot
    return rank


def _marking_counts(rows, size):
    after = [[0] * size for _ in range(size)]
    before = [[0] * size for _ in range(size)]
    for column in range(size):
        for row in range(size):
            after[column][row] = sum(1 for c in range(column, size) if rows[c] >= row)
            before[column][row] = sum(1 for c in range(column) if rows[c] < row)
    pairs = sum(
        1 for c1 in range(size) for c2 in range(c1 + 1, size) if rows[c1] < rows[c2]
    )
    return after, before, pairs


class _GradingTables:
    """Southwest-pair counts against the markings, precomputed per lattice point."""

    def __init__(self, g: GridDiagram):
        self.size = g.size
        self.o_after, self.o_before, self.o_pairs = _marking_counts(g.os, g.size)
        self.x_after, self.x_before, self.x_pairs = _marking_counts(g.xs, g.size)

    def gradings(self, match):
        size = self.size
        self_pairs = sum(
            1 for c1 in range(size) for c2 in range(c1 + 1, size) if match[c1] < match[c2]
        )
        against_o = sum(self.o_after[c][match[c]] + self.o_before[c][match[c]] for c in range(size))
        against_x = sum(self.x_after[c][match[c]] + self.x_before[c][match[c]] for c in range(size))
        maslov_o = self_pairs - against_o + self.o_pairs + 1
        maslov_x = self_pairs - against_x + self.x_pairs + 1
        return maslov_o, _normalize(Fraction(maslov_o - maslov_x - (size - 1), 2))


def state_gradings(g: GridDiagram, match) -> tuple[int, int | Fraction]:
    """(maslov, alexander) of the state ``match`` by the counting formulas."""
    return _GradingTables(g).gradings(tuple(match))


class _RectangleIndex:
    """Marking masks of every column interval and row interval of the torus."""

    def __init__(self, g: GridDiagram):
        size = g.size
        self.size = size
        marks = [(1 << g.xs[c]) | (1 << g.os[c]) for c in range(size)]
        self.columns = [[0] * size for _ in range(size)]
        self.rows = [[0] * size for _ in range(size)]
        for start in range(size):
            column_mask = 0
            row_mask = 0
            for width in range(1, size):
                column_mask |= marks[(start + width - 1) % size]
                row_mask |= 1 << ((start + width - 1) % size)
                self.columns[start][width] = column_mask
                self.rows[start][width] = row_mask

    def targets(self, match):
        size = self.size
        found = set()
        for left in range(size):
            bottom = match[left]
            for width in range(1, size):
                right = (left + width) % size
                top = match[right]
                height = (top - bottom) % size
                if self.columns[left][width] & self.rows[bottom][height]:
                    continue
                if any(
                    0 < (match[(left + k) % size] - bottom) % size < height
                    for k in range(1, width)
                ):
                    continue
                target = list(match)
                target[left], target[right] = top, bottom
                found ^= {tuple(target)}
        return sorted(found)


def _check_ceiling(g: GridDiagram, config: RunConfig):
    if g.size > config.grid_ceiling:
        raise CeilingExceededError(
            f"grid of size {g.size} exceeds the ceiling {config.grid_ceiling}"
            f" ({math.factorial(g.size)} states); raise --ceiling to proceed"
        )


def enumerate_states(g: GridDiagram, config: RunConfig = DEFAULT_CONFIG):
    """All δ! states with gradings, lexicographic in ``match``."""
    _check_ceiling(g, config)
    return _iter_states(g)


def _iter_states(g):
    tables = _GradingTables(g)
    for match in itertools.permutations(range(g.size)):
        maslov, alexander = tables.gradings(match)
        yield GridState(match, maslov, alexander)


def differential(g: GridDiagram, x: GridState) -> set[GridState]:
    """Z/2 boundary of ``x``: states reached through an empty rectangle."""
    tables = _GradingTables(g)
    boundary = set()
    for match in _RectangleIndex(g).targets(x.match):
        maslov, alexander = tables.gradings(match)
        boundary.add(GridState(match, maslov, alexander))
    return boundary


@dataclass
class GridComplex:
    grid: GridDiagram
    matches: list
    gradings: list
    boundary: list

    def __len__(self):
        return len(self.matches)


def _complex_chunk(payload):
    g, first_row = payload
    tables = _GradingTables(g)
    rectangles = _RectangleIndex(g)
    rest = [row for row in range(g.size) if row != first_row]
    chunk = []
    for tail in itertools.permutations(rest):
        match = (first_row,) + tail
        maslov, alexander = tables.gradings(match)
        chunk.append((match, maslov, alexander, rectangles.targets(match)))
    return chunk


def grid_complex(g: GridDiagram, config: RunConfig = DEFAULT_CONFIG) -> GridComplex:
    """Build the tilde complex, partitioned by the row of column 0 across workers."""
    _check_ceiling(g, config)
    payloads = [(g, row) for row in range(g.size)]
    if config.workers > 1:
        with mp.Pool(min(config.workers, g.size)) as pool:
            chunks = pool.map(_complex_chunk, payloads)
    else:
        chunks = [_complex_chunk(payload) for payload in payloads]

    matches, gradings, raw_targets = [], [], []
    for chunk in chunks:
        for match, maslov, alexander, targets in chunk:
            matches.append(match)
            gradings.append((maslov, alexander))
            raw_targets.append(targets)

    index = {match: position for position, match in enumerate(matches)}
    boundary = []
    for position, targets in enumerate(raw_targets):
        maslov, alexander = gradings[position]
        resolved = tuple(sorted(index[target] for target in targets))
        for target in resolved:
            if gradings[target] != (maslov - 1, alexander):
                raise ConsistencyError(
                    f"rectangle from {matches[position]} {gradings[position]} to"
                    f" {matches[target]} {gradings[target]} does not drop maslov by one"
                    " and preserve alexander"
                )
        boundary.append(resolved)

    logger.debug(
        "grid complex of size %s: %s states, %s rectangles",
        g.size, len(matches), sum(len(targets) for targets in boundary),
    )
    return GridComplex(g, matches, gradings, boundary)


def verify_d_squared(complex_, labels=None):
    """Raise ConsistencyError unless the boundary squares to zero mod 2."""
    labels = labels or getattr(complex_, "matches", None)
    boundary = complex_.boundary
    for source, targets in enumerate(boundary):
        counts = Counter()
        for target in targets:
            counts.update(boundary[target])
        odd = sorted(state for state, count in counts.items() if count % 2)
        if odd:
            raise ConsistencyError(
                f"d^2 != 0: generator {labels[source]} reaches {labels[odd[0]]}"
                " an odd number of times"
            )


def block_homology(gradings, boundary, target_key) -> BigradedDims:
    """Homology dimensions of a graded complex whose differential maps block k to target_key(k)."""
    blocks = defaultdict(list)
    for position, key in enumerate(gradings):
        blocks[key].append(position)

    ranks = {}
    for key, members in blocks.items():
        target_members = blocks.get(target_key(key), [])
        local = {position: offset for offset, position in enumerate(target_members)}
        rows = []
        for position in members:
            row = 0
            for target in boundary[position]:
                if target not in local:
                    raise ConsistencyError(
                        f"differential leaves grading {key}: target outside {target_key(key)}"
                    )
                row ^= 1 << local[target]
            rows.append(row)
        ranks[key] = gf2_rank(rows)

    incoming = defaultdict(int)
    for key, rank in ranks.items():
        incoming[target_key(key)] += rank

    dims = {}
    for key, members in blocks.items():
        dims[key] = len(members) - ranks[key] - incoming.get(key, 0)
        if dims[key] < 0:
            raise ConsistencyError(f"negative homology dimension at {key}")
    return BigradedDims(dims)


def _lower_maslov(key):
    return key[0] - 1, key[1]


def homology_tilde(g: GridDiagram, config: RunConfig = DEFAULT_CONFIG) -> BigradedDims:
    complex_ = grid_complex(g, config)
    verify_d_squared(complex_)
    return block_homology(complex_.gradings, complex_.boundary, _lower_maslov)


def deconvolve(table: BigradedDims, factors: int) -> BigradedDims:
    """Divide a Poincaré polynomial by (1 + u)^factors, u lowering both gradings by one."""
    entries = table.entries
    for step in range(factors):
        entries = _divide_once(entries, step)
    return BigradedDims(entries)


def _divide_once(entries, step):
    diagonals = defaultdict(dict)
    for (maslov, alexander), dim in entries.items():
        diagonals[maslov - alexander][alexander] = dim

    quotient = {}
    for diagonal, column in sorted(diagonals.items()):
        low, high = min(column), max(column)
        carry = 0
        alexander = high
        while alexander >= low:
            value = column.get(alexander, 0) - carry
            if value < 0:
                raise ConsistencyError(
                    f"inexact deconvolution (factor {step + 1}): negative coefficient"
                    f" at ({diagonal + alexander}, {alexander})"
                )
            if value and alexander > low:
                quotient[(diagonal + alexander, alexander)] = value
            carry = value
            alexander -= 1
        if carry:
            raise ConsistencyError(
                f"inexact deconvolution (factor {step + 1}): remainder {carry}"
                f" at ({diagonal + low}, {low})"
            )
    return quotient


def _require_knot(g: GridDiagram):
    components = component_count(g)
    if components != 1:
        raise NotAKnotError(f"grid presents a link with {components} components")


def hfk_from_tilde(tilde: BigradedDims, size: int) -> BigradedDims:
    scale = 2 ** (size - 1)
    if tilde.total % scale:
        raise ConsistencyError(
            f"tilde dimension {tilde.total} is not divisible by 2^{size - 1}"
        )
    hat = deconvolve(tilde, size - 1)
    if hat.total * scale != tilde.total:
        raise ConsistencyError("hat and tilde totals disagree")
    for (maslov, alexander), dim in hat.items():
        if hat.get(maslov - 2 * alexander, -alexander) != dim:
            raise ConsistencyError(
                f"hat table is not symmetric: ({maslov}, {alexander}) has {dim},"
                f" ({maslov - 2 * alexander}, {-alexander}) has"
                f" {hat.get(maslov - 2 * alexander, -alexander)}"
            )
    return hat


def hfk_hat(g: GridDiagram, config: RunConfig = DEFAULT_CONFIG) -> BigradedDims:
    _require_knot(g)
    return hfk_from_tilde(homology_tilde(g, config), g.size)


def alexander_polynomial(h: BigradedDims) -> AlexanderPolynomial:
    """Graded Euler characteristic, normalized so that Δ(1) = 1."""
    coefficients = defaultdict(int)
    for (maslov, alexander), dim in h.items():
        if isinstance(alexander, Fraction):
            raise ConsistencyError("half-integral alexander grading in a knot table")
        coefficients[alexander] += (-1) ** (maslov % 2) * dim

    poly = AlexanderPolynomial.from_mapping(coefficients)
    value = poly.evaluate(1)
    if value not in (1, -1):
        raise ConsistencyError(f"Euler characteristic evaluates to {value} at t = 1")
    if value == -1:
        poly = AlexanderPolynomial(tuple((exp, -coeff) for exp, coeff in poly.coeffs))
    if not poly.is_symmetric():
        raise ConsistencyError(f"Euler characteristic {poly} is not symmetric")
    return poly


def genus_and_fiberedness(h: BigradedDims) -> tuple[int, bool, bool]:
    if not h:
        raise ConsistencyError("empty homology table")
    genus = h.top_alexander()
    if genus < 0 or isinstance(genus, Fraction):
        raise ConsistencyError(f"top alexander grading {genus} is not a genus")
    top = h.alexander_totals()[genus]
    return genus, top == 1, top == 2


def grid_alexander_polynomial(g: GridDiagram) -> AlexanderPolynomial:
    """Δ from det(t^-a(c, r)) / (1 - t)^(δ-1), independent of the chain complex."""
    _require_knot(g)
    t = sympy.Symbol("t")
    winding = winding_numbers(g)
    top = max(max(column) for column in winding)
    matrix = sympy.Matrix(g.size, g.size, lambda r, c: t ** (top - winding[c][r]))
    numerator = sympy.Poly(sympy.expand(matrix.det(method="berkowitz")), t)
    quotient, remainder = sympy.div(numerator, sympy.Poly((1 - t) ** (g.size - 1), t))
    if not remainder.is_zero or quotient.is_zero:
        raise ConsistencyError("winding determinant is not divisible by (1 - t)^(δ-1)")

    coefficients = [int(c) for c in reversed(quotient.all_coeffs())]
    while coefficients and coefficients[0] == 0:
        coefficients.pop(0)
    if len(coefficients) % 2 == 0:
        raise ConsistencyError("winding determinant has an even number of terms")
    poly = AlexanderPolynomial.from_list(coefficients, -(len(coefficients) // 2))
    if poly.evaluate(1) == -1:
        poly = AlexanderPolynomial(tuple((exp, -coeff) for exp, coeff in poly.coeffs))
    if poly.evaluate(1) != 1 or not poly.is_symmetric():
        raise ConsistencyError(f"winding determinant gives a non-Alexander polynomial {poly}")
    return poly


@dataclass(frozen=True)
class HomologyReport:
    grid: GridDiagram
    tilde: BigradedDims
    hat: BigradedDims
    genus: int
    fibered: bool
    nearly_fibered: bool
    top_dimension: int
    alexander: AlexanderPolynomial
    determinant: int


def compute_homology(g: GridDiagram, config: RunConfig = DEFAULT_CONFIG, cross_check=True) -> HomologyReport:
    """Run the full pipeline on a knot grid and cross-check it against the winding determinant."""
    _require_knot(g)
    tilde = homology_tilde(g, config)
    hat = hfk_from_tilde(tilde, g.size)
    genus, fibered, nearly_fibered = genus_and_fiberedness(hat)
    poly = alexander_polynomial(hat)
    det = determinant(g)
    if abs(poly.evaluate(-1)) != det:
        raise ConsistencyError(f"|Δ(-1)| = {abs(poly.evaluate(-1))} but the grid determinant is {det}")
    if cross_check:
        expected = grid_alexander_polynomial(g)
        if expected != poly:
            raise ConsistencyError(
                f"Euler characteristic {poly} disagrees with the winding determinant {expected}"
            )
    logger.info(
        "grid of size %s: hat total %s, genus %s, fibered %s", g.size, hat.total, genus, fibered
    )
    return HomologyReport(
        grid=g,
        tilde=tilde,
        hat=hat,
        genus=genus,
        fibered=fibered,
        nearly_fibered=nearly_fibered,
        top_dimension=hat.alexander_totals()[genus],
        alexander=poly,
        determinant=det,
    )
