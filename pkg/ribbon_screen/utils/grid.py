"""Grid diagrams: parsing, validation and the combinatorial data read off a grid.

A grid of size δ is stored by columns: ``xs[c]`` and ``os[c]`` are the rows of
the X and O markings in column ``c``. Row 0 is at the bottom. Lattice points
sit at integer coordinates and markings at the centres of cells, so a marking
in column ``c`` and row ``r`` lies at ``(c + 1/2, r + 1/2)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import sympy

from ribbon_screen.exceptions import GridParseError

X = "X"
O = "O"


@dataclass(frozen=True)
class Marking:
    column: int
    row: int
    kind: str


@dataclass(frozen=True)
class GridDiagram:
    size: int
    xs: tuple[int, ...]
    os: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "xs", tuple(int(v) for v in self.xs))
        object.__setattr__(self, "os", tuple(int(v) for v in self.os))
        validate_grid(self.size, self.xs, self.os)

    def column_span(self, column):
        """Rows ``(low, high)`` of the vertical knot segment in ``column``."""
        return min(self.xs[column], self.os[column]), max(self.xs[column], self.os[column])

    def column_sign(self, column):
        """+1 when the segment runs downwards from X to O, -1 otherwise."""
        return 1 if self.xs[column] > self.os[column] else -1


def validate_grid(size, xs, os, lines=None):
    """Check every GridDiagram invariant; ``lines`` maps "size"/"X"/"O" to file line numbers."""
    lines = lines or {}

    def where(key):
        return f"line {lines[key]}: " if key in lines else ""

    if size < 2:
        raise GridParseError(f"{where('size')}grid size must be at least 2, got {size}")
    for kind, values in ((X, xs), (O, os)):
        if len(values) != size:
            raise GridParseError(
                f"{where(kind)}{kind} row lists {len(values)} entries, expected {size}"
            )
        seen = {}
        for column, row in enumerate(values):
            if not 0 <= row < size:
                raise GridParseError(
                    f"{where(kind)}column {column}: {kind} row {row} outside 0..{size - 1}"
                )
            if row in seen:
                raise GridParseError(
                    f"{where(kind)}column {column}: {kind} row {row} already used by column {seen[row]}"
                    " (not a permutation)"
                )
            seen[row] = column
    for column in range(size):
        if xs[column] == os[column]:
            raise GridParseError(
                f"{where(O)}column {column}: X and O collide in row {xs[column]}"
            )


def parse_grid(text) -> GridDiagram:
    """Parse the grid file format: size, then an ``X:`` line and an ``O:`` line."""
    content = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        content.append((number, line))

    if len(content) != 3:
        raise GridParseError(
            f"expected 3 non-comment lines (size, X:, O:), found {len(content)}"
        )

    (size_line, size_text), (x_line, x_text), (o_line, o_text) = content
    try:
        size = int(size_text)
    except ValueError:
        raise GridParseError(f"line {size_line}: grid size {size_text!r} is not an integer")

    xs = _parse_row(x_text, X, x_line)
    os = _parse_row(o_text, O, o_line)
    validate_grid(size, xs, os, lines={"size": size_line, X: x_line, O: o_line})
    return GridDiagram(size=size, xs=tuple(xs), os=tuple(os))


def _parse_row(text, kind, line):
    prefix = f"{kind}:"
    if not text.startswith(prefix):
        raise GridParseError(f"line {line}: expected a line starting with {prefix!r}")
    values = []
    for column, token in enumerate(text[len(prefix):].split()):
        try:
            values.append(int(token))
        except ValueError:
            raise GridParseError(f"line {line}, column {column}: {token!r} is not an integer")
    return values


def serialize_grid(g: GridDiagram) -> str:
    return (
        f"{g.size}\n"
        f"X: {' '.join(str(row) for row in g.xs)}\n"
        f"O: {' '.join(str(row) for row in g.os)}\n"
    )


def arc_index(g: GridDiagram) -> int:
    """Size of the given grid; equals the arc index only for a minimal grid."""
    return g.size


def knot_shadow(g: GridDiagram) -> list[Marking]:
    markings = []
    for column in range(g.size):
        markings.append(Marking(column, g.xs[column], X))
        markings.append(Marking(column, g.os[column], O))
    return markings


def component_count(g: GridDiagram) -> int:
    """Number of link components: cycles of column c -> column of the X in row os[c]."""
    x_column = {row: column for column, row in enumerate(g.xs)}
    seen = [False] * g.size
    cycles = 0
    for start in range(g.size):
        if seen[start]:
            continue
        cycles += 1
        column = start
        while not seen[column]:
            seen[column] = True
            column = x_column[g.os[column]]
    return cycles


def winding_numbers(g: GridDiagram) -> list[list[int]]:
    """Winding number ``a[c][r]`` of the grid projection around lattice point (c, r)."""
    size = g.size
    table = [[0] * size for _ in range(size)]
    for column in range(1, size):
        low, high = g.column_span(column - 1)
        sign = g.column_sign(column - 1)
        for row in range(size):
            crossing = sign if low < row <= high else 0
            table[column][row] = table[column - 1][row] + crossing
    return table


def determinant(g: GridDiagram) -> int:
    """|Δ(-1)| from the winding numbers mod 2 of the interior lattice points."""
    winding = winding_numbers(g)
    minor = sympy.Matrix(
        g.size - 1,
        g.size - 1,
        lambda r, c: winding[c + 1][r + 1] % 2,
    )
    return abs(int(minor.det()))
