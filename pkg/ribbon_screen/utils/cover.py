"""Cyclic branched covers of grid diagrams: incidence, matching counts and the cover complex.

The n-fold cover keeps the grid's torus cut into n sheets. Every horizontal
circle of row r lifts to n α-circles and every vertical circle of column c to
n β-circles. Walking right along row r the sheet index changes by
``sheet_shift * sign`` whenever the path crosses the vertical knot segment of a
column, so the β-lift (c, σ) meets the α-lift (r, τ) with
σ = τ + shift(r, c) mod n, where shift(r, c) is the signed count of segments
left of c spanning row r. The markings are the branch points and lift once.
"""
from __future__ import annotations

import itertools
import math
import multiprocessing as mp
from dataclasses import dataclass
from fractions import Fraction

from mpmath import iv

from ribbon_screen.exceptions import CeilingExceededError, ConfigurationError, ConsistencyError
from ribbon_screen.utils import get_logger
from ribbon_screen.utils.bounds import CertifiedReal
from ribbon_screen.utils.config import DEFAULT_CONFIG, RunConfig
from ribbon_screen.utils.grid import GridDiagram
from ribbon_screen.utils.homology import (
    BigradedDims,
    _GradingTables,
    _RectangleIndex,
    _normalize,
    block_homology,
    verify_d_squared,
)

logger = get_logger(__name__)

Z = "z"
W = "w"


@dataclass(frozen=True)
class Basepoint:
    kind: str
    column: int
    row: int
    sheet: int | None = None  # None for a branch point shared by every sheet


@dataclass(frozen=True)
class CoverDiagram:
    base: GridDiagram
    sheets: int
    alpha_count: int
    beta_count: int
    incidence: tuple[tuple[int, ...], ...]
    basepoints: tuple[Basepoint, ...]
    sheet_shift: int
    row_shifts: tuple[tuple[int, ...], ...]

    def alpha_index(self, row, sheet):
        return row * self.sheets + sheet

    def beta_index(self, column, sheet):
        return column * self.sheets + sheet

    def shift(self, row, start, stop):
        """Sheet change along row ``row`` from column ``start`` to column ``stop`` (stop < start + 2δ)."""
        return self.row_shifts[row][stop] - self.row_shifts[row][start]

    def alpha_of(self, beta, row):
        """α-circle met by β-circle ``beta`` on row ``row``."""
        column, sheet = divmod(beta, self.sheets)
        return self.alpha_index(row, (sheet - self.row_shifts[row][column]) % self.sheets)


def _row_shifts(g: GridDiagram, sheet_shift):
    size = g.size
    cuts = [[0] * size for _ in range(size)]
    for column in range(size):
        low, high = g.column_span(column)
        sign = sheet_shift * g.column_sign(column)
        for row in range(low + 1, high + 1):
            cuts[column][row] = sign

    shifts = []
    for row in range(size):
        prefix = [0]
        for k in range(2 * size):
            prefix.append(prefix[-1] + cuts[k % size][row])
        if prefix[size] != 0:
            raise ConsistencyError(f"row {row} does not close up: net sheet change {prefix[size]}")
        shifts.append(tuple(prefix))
    return tuple(shifts)


def validate_cover(d: CoverDiagram):
    """Raise ConsistencyError unless every structural invariant of the cover holds."""
    size, sheets = d.base.size, d.sheets
    expected = size * sheets
    if d.alpha_count != expected or d.beta_count != expected:
        raise ConsistencyError(f"cover has {d.alpha_count} α and {d.beta_count} β circles, expected {expected}")
    for index, row in enumerate(d.incidence):
        if sum(row) != size:
            raise ConsistencyError(f"α-circle {index} meets {sum(row)} β-points, expected {size}")
    for index in range(expected):
        column_sum = sum(row[index] for row in d.incidence)
        if column_sum != size:
            raise ConsistencyError(f"β-circle {index} meets {column_sum} α-points, expected {size}")
    kinds = [point.kind for point in d.basepoints]
    if kinds.count(Z) != size or kinds.count(W) != size:
        raise ConsistencyError("cover must carry exactly δ z and δ w basepoints")
    if sheets == 1 and any(value != 1 for row in d.incidence for value in row):
        raise ConsistencyError("one-sheeted cover must reproduce the all-ones grid incidence")


def build_cover(g: GridDiagram, n: int, config: RunConfig = DEFAULT_CONFIG) -> CoverDiagram:
    if not isinstance(n, int) or n < 1:
        raise ConfigurationError(f"number of sheets must be a positive integer, got {n!r}")
    size = g.size
    shifts = _row_shifts(g, config.sheet_shift)
    incidence = [[0] * (size * n) for _ in range(size * n)]
    for row in range(size):
        for tau in range(n):
            for column in range(size):
                sigma = (tau + shifts[row][column]) % n
                incidence[row * n + tau][column * n + sigma] += 1

    basepoints = tuple(
        Basepoint(kind, column, row)
        for column in range(size)
        for kind, row in ((Z, g.xs[column]), (W, g.os[column]))
    )
    d = CoverDiagram(
        base=g,
        sheets=n,
        alpha_count=size * n,
        beta_count=size * n,
        incidence=tuple(tuple(row) for row in incidence),
        basepoints=basepoints,
        sheet_shift=config.sheet_shift,
        row_shifts=shifts,
    )
    validate_cover(d)
    return d


@dataclass(frozen=True)
class MatchingCount:
    exact: int | None
    bregman_bound: int | float
    bound_is_estimate: bool = False

    @property
    def bound_only(self):
        return self.exact is None


def naive_permanent(matrix) -> int:
    size = len(matrix)
    return sum(
        math.prod(matrix[i][p[i]] for i in range(size))
        for p in itertools.permutations(range(size))
    )


def _ryser_range(payload):
    """Signed Ryser sum over the Gray-code subsets numbered lo..hi-1."""
    matrix, lo, hi = payload
    size = len(matrix)
    columns = [[int(row[j]) for row in matrix] for j in range(size)]
    subset = lo ^ (lo >> 1)
    sums = [sum(int(row[j]) for j in range(size) if subset >> j & 1) for row in matrix]
    total = 0
    for index in range(lo, hi):
        if index != lo:
            bit = (index & -index).bit_length() - 1
            subset ^= 1 << bit
            if subset >> bit & 1:
                sums = [s + v for s, v in zip(sums, columns[bit])]
            else:
                sums = [s - v for s, v in zip(sums, columns[bit])]
        product = math.prod(sums)
        if product:
            total += -product if subset.bit_count() & 1 else product
    return total


def permanent(matrix, workers=1) -> int:
    """Exact permanent by Ryser inclusion-exclusion in Gray-code order."""
    size = len(matrix)
    if size == 0:
        return 1
    subsets = 1 << size
    if workers > 1 and size >= 12:
        chunks = workers * 4
        edges = [subsets * i // chunks for i in range(chunks + 1)]
        payloads = [(matrix, lo, hi) for lo, hi in zip(edges, edges[1:]) if lo < hi]
        with mp.Pool(workers) as pool:
            total = sum(pool.map(_ryser_range, payloads))
    else:
        total = _ryser_range((matrix, 0, subsets))
    return -total if size % 2 else total


def bregman_bound(matrix) -> tuple[int | float, bool]:
    """∏ (r_i!)^(1/r_i) over the row sums; exact when all rows share a sum dividing the size."""
    sums = [sum(row) for row in matrix]
    if not sums:
        return 1, False
    if 0 in sums:
        return 0, False
    degree = sums[0]
    if all(s == degree for s in sums) and len(sums) % degree == 0:
        return math.factorial(degree) ** (len(sums) // degree), False
    value = iv.exp(sum(iv.log(iv.mpf(math.factorial(s))) / s for s in sums))
    return CertifiedReal.from_interval(value).upper, True


def count_generators(d: CoverDiagram, config: RunConfig = DEFAULT_CONFIG) -> MatchingCount:
    """Number of perfect matchings of the α/β incidence graph, with the Brégman bound."""
    bound, estimate = bregman_bound(d.incidence)
    size = len(d.incidence)
    if size > config.cover_ceiling:
        logger.warning(
            "cover of size %s exceeds the permanent ceiling %s; reporting the bound only",
            size, config.cover_ceiling,
        )
        return MatchingCount(None, bound, estimate)
    exact = permanent(d.incidence, config.workers)
    if exact > bound:
        raise ConsistencyError(f"permanent {exact} exceeds the matching bound {bound}")
    return MatchingCount(exact, bound, estimate)


def dimension_bound(delta, n) -> Fraction:
    """(δ!)^n / 2^(δ-1)."""
    return Fraction(math.factorial(delta) ** n, 2 ** (delta - 1))


def enumerate_cover_generators(d: CoverDiagram):
    """Generators as tuples ``rows[j]`` over the β-circles, in lexicographic order.

    ``rows[j]`` is the base row where β-circle j meets its α-circle; the
    α-circles used must be pairwise distinct.
    """
    size = d.base.size
    total = d.beta_count
    alpha = [[d.alpha_of(beta, row) for row in range(size)] for beta in range(total)]
    used = [False] * d.alpha_count
    rows = [0] * total

    def extend(beta):
        if beta == total:
            yield tuple(rows)
            return
        for row in range(size):
            target = alpha[beta][row]
            if used[target]:
                continue
            used[target] = True
            rows[beta] = row
            yield from extend(beta + 1)
            used[target] = False

    return extend(0)


class _CoverRectangles:
    """Empty rectangles of the cover, read through the base masks plus sheet bookkeeping."""

    def __init__(self, d: CoverDiagram):
        self.d = d
        self.index = _RectangleIndex(d.base)

    def targets(self, rows):
        d = self.d
        size, sheets = d.base.size, d.sheets
        columns, row_masks = self.index.columns, self.index.rows
        found = set()
        for left in range(size):
            for sheet in range(sheets):
                start = left * sheets + sheet
                bottom = rows[start]
                for width in range(1, size):
                    right = (left + width) % size
                    climb = d.shift(bottom, left, left + width)
                    stop = right * sheets + (sheet + climb) % sheets
                    top = rows[stop]
                    height = (top - bottom) % size
                    if height == 0 or columns[left][width] & row_masks[bottom][height]:
                        continue
                    if self._blocked(rows, left, width, sheet, bottom, height):
                        continue
                    target = list(rows)
                    target[start], target[stop] = top, bottom
                    found ^= {tuple(target)}
        return sorted(found)

    def _blocked(self, rows, left, width, sheet, bottom, height):
        d = self.d
        size, sheets = d.base.size, d.sheets
        for k in range(1, width):
            column = (left + k) % size
            for other in range(sheets):
                row = rows[column * sheets + other]
                if not 0 < (row - bottom) % size < height:
                    continue
                if other == (sheet + d.shift(row, left, left + k)) % sheets:
                    return True
        return False


class _CoverGradings:
    def __init__(self, d: CoverDiagram):
        self.d = d
        self.tables = _GradingTables(d.base)

    def key(self, rows):
        d = self.d
        if d.sheets == 1:
            return self.tables.gradings(rows)
        return self._parity(rows), self._relative_alexander(rows)

    def _parity(self, rows):
        assignment = [self.d.alpha_of(beta, row) for beta, row in enumerate(rows)]
        seen = [False] * len(assignment)
        transpositions = 0
        for start in range(len(assignment)):
            length = 0
            position = start
            while not seen[position]:
                seen[position] = True
                position = assignment[position]
                length += 1
            if length:
                transpositions += length - 1
        return transpositions % 2

    def _relative_alexander(self, rows):
        t = self.tables
        sheets = self.d.sheets
        value = t.o_pairs - t.x_pairs
        for beta, row in enumerate(rows):
            column = beta // sheets
            value += t.x_after[column][row] + t.x_before[column][row]
            value -= t.o_after[column][row] + t.o_before[column][row]
        return value


def _opposite_parity(key):
    return 1 - key[0], key[1]


def _lower_maslov(key):
    return key[0] - 1, key[1]


@dataclass
class CoverComplex:
    cover: CoverDiagram
    generators: list
    gradings: list
    boundary: list

    def __len__(self):
        return len(self.generators)


def _cover_chunk(payload):
    d, first_row = payload
    rectangles = _CoverRectangles(d)
    gradings = _CoverGradings(d)
    chunk = []
    for rows in enumerate_cover_generators(d):
        if first_row is not None and rows[0] != first_row:
            continue
        chunk.append((rows, gradings.key(rows), rectangles.targets(rows)))
    return chunk


def cover_complex(d: CoverDiagram, config: RunConfig = DEFAULT_CONFIG) -> CoverComplex:
    """Enumerate the cover complex, refusing anything beyond the configured ceilings."""
    count = count_generators(d, config)
    if count.bound_only:
        raise CeilingExceededError(
            f"cover matrix of size {d.alpha_count} exceeds the permanent ceiling"
            f" {config.cover_ceiling}; raise --cover-ceiling to proceed"
        )
    if count.exact > config.complex_ceiling:
        raise CeilingExceededError(
            f"cover complex has {count.exact} generators, above the ceiling {config.complex_ceiling}"
        )

    if config.workers > 1:
        payloads = [(d, row) for row in range(d.base.size)]
        with mp.Pool(min(config.workers, d.base.size)) as pool:
            chunks = pool.map(_cover_chunk, payloads)
    else:
        chunks = [_cover_chunk((d, None))]

    generators, gradings, raw = [], [], []
    for chunk in chunks:
        for rows, key, targets in chunk:
            generators.append(rows)
            gradings.append(key)
            raw.append(targets)
    if len(generators) != count.exact:
        raise ConsistencyError(
            f"enumerated {len(generators)} cover generators but the permanent is {count.exact}"
        )

    target_key = _lower_maslov if d.sheets == 1 else _opposite_parity
    index = {rows: position for position, rows in enumerate(generators)}
    boundary = []
    for position, targets in enumerate(raw):
        resolved = tuple(sorted(index[target] for target in targets))
        for target in resolved:
            if gradings[target] != target_key(gradings[position]):
                raise ConsistencyError(
                    f"cover rectangle from {generators[position]} {gradings[position]} to"
                    f" {generators[target]} {gradings[target]} breaks the grading"
                )
        boundary.append(resolved)

    logger.debug(
        "cover complex δ=%s n=%s: %s generators, %s rectangles",
        d.base.size, d.sheets, len(generators), sum(len(t) for t in boundary),
    )
    return CoverComplex(d, generators, gradings, boundary)


def _recentre(table: BigradedDims, size) -> BigradedDims:
    if not table:
        return table
    values = [value for _, value in table.entries]
    middle = Fraction(max(values) + min(values), 2) + (size - 1)
    return BigradedDims({
        (parity, _normalize((value - middle) / 2)): dim for (parity, value), dim in table.items()
    })


def cover_homology_experimental(d: CoverDiagram, config: RunConfig = DEFAULT_CONFIG) -> BigradedDims:
    """Homology of the cover complex; gradings are relative for n >= 2."""
    complex_ = cover_complex(d, config)
    verify_d_squared(complex_, complex_.generators)
    if d.sheets == 1:
        return block_homology(complex_.gradings, complex_.boundary, _lower_maslov)
    table = block_homology(complex_.gradings, complex_.boundary, _opposite_parity)
    return _recentre(table, d.base.size)


def cover_hat_total(d: CoverDiagram, config: RunConfig = DEFAULT_CONFIG, homology=None) -> int:
    homology = homology if homology is not None else cover_homology_experimental(d, config)
    scale = 2 ** (d.base.size - 1)
    if homology.total % scale:
        raise ConsistencyError(
            f"cover homology total {homology.total} is not divisible by 2^{d.base.size - 1}"
        )
    return homology.total // scale


@dataclass(frozen=True)
class CoverReport:
    size: int
    sheets: int
    count: MatchingCount
    matching_bound: int
    dimension_bound: Fraction
    bound_satisfied: bool | None
    homology: BigradedDims | None = None
    hat_total: int | None = None
    hat_bound_satisfied: bool | None = None


def cover_report(g: GridDiagram, n, config: RunConfig = DEFAULT_CONFIG, with_homology=False) -> CoverReport:
    d = build_cover(g, n, config)
    count = count_generators(d, config)
    matching_bound = math.factorial(g.size) ** n
    satisfied = None if count.bound_only else count.exact <= matching_bound
    homology = hat_total = hat_satisfied = None
    if with_homology:
        homology = cover_homology_experimental(d, config)
        hat_total = cover_hat_total(d, config, homology)
        hat_satisfied = hat_total <= dimension_bound(g.size, n)
    logger.info("cover δ=%s n=%s: %s generators", g.size, n, count.exact)
    return CoverReport(
        size=g.size,
        sheets=n,
        count=count,
        matching_bound=matching_bound,
        dimension_bound=dimension_bound(g.size, n),
        bound_satisfied=satisfied,
        homology=homology,
        hat_total=hat_total,
        hat_bound_satisfied=hat_satisfied,
    )

