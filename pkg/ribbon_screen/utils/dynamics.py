"""Perron-Frobenius matrices of train-track maps and the dilatation they carry."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import sympy
from mpmath import iv, mp

from ribbon_screen.exceptions import (
    BoundParameterError,
    ConfigurationError,
    ConsistencyError,
    DilatationError,
    MatrixParseError,
    NonPrimitiveMatrixError,
)
from ribbon_screen.utils import get_logger
from ribbon_screen.utils.bounds import CertifiedReal
from ribbon_screen.utils.config import DEFAULT_CONFIG, RunConfig

logger = get_logger(__name__)


@dataclass(frozen=True)
class PFMatrix:
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.entries)
        if not rows:
            raise MatrixParseError("matrix is empty")
        for index, row in enumerate(rows):
            if len(row) != len(rows):
                raise MatrixParseError(f"row {index} has {len(row)} entries, expected {len(rows)}")
            if any(v < 0 for v in row):
                raise MatrixParseError(f"row {index} has a negative entry")
        object.__setattr__(self, "entries", rows)

    @property
    def size(self):
        return len(self.entries)

    def as_array(self, dtype=float):
        return np.array(self.entries, dtype=dtype)


@dataclass(frozen=True)
class DilatationEstimate:
    spectral_radius: float
    certified_interval: tuple[float, float]
    trace_sequence: list = field(default_factory=list)
    power_of_two: list = field(default_factory=list)
    monotone_tail: tuple[bool, bool] = (False, False)
    iterations: int = 0


def parse_matrix(text) -> PFMatrix:
    """First line k, then k lines of k nonnegative integers; '#' starts a comment line."""
    content = [
        (number, line.strip())
        for number, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.strip().startswith("#")
    ]
    if not content:
        raise MatrixParseError("matrix file is empty")
    size_line, size_text = content[0]
    try:
        size = int(size_text)
    except ValueError:
        raise MatrixParseError(f"line {size_line}: matrix size {size_text!r} is not an integer")
    if size < 1:
        raise MatrixParseError(f"line {size_line}: matrix size must be positive, got {size}")
    if len(content) - 1 != size:
        raise MatrixParseError(f"expected {size} matrix rows, found {len(content) - 1}")

    rows = []
    for number, line in content[1:]:
        tokens = line.split()
        if len(tokens) != size:
            raise MatrixParseError(f"line {number}: expected {size} entries, found {len(tokens)}")
        row = []
        for column, token in enumerate(tokens):
            try:
                value = int(token)
            except ValueError:
                raise MatrixParseError(f"line {number}, column {column}: {token!r} is not an integer")
            if value < 0:
                raise MatrixParseError(f"line {number}, column {column}: negative entry {value}")
            row.append(value)
        rows.append(tuple(row))
    return PFMatrix(tuple(rows))


def serialize_matrix(m: PFMatrix) -> str:
    lines = [str(m.size)] + [" ".join(str(v) for v in row) for row in m.entries]
    return "\n".join(lines) + "\n"


def is_primitive(m: PFMatrix) -> bool:
    """True iff some power M^p with p <= (k-1)^2 + 1 is strictly positive."""
    pattern = (m.as_array(dtype=np.int64) > 0).astype(np.int64)
    power = pattern.copy()
    for _ in range((m.size - 1) ** 2 + 1):
        if power.all():
            return True
        power = ((power @ pattern) > 0).astype(np.int64)
    return False


def _require_primitive(m: PFMatrix):
    if not is_primitive(m):
        raise NonPrimitiveMatrixError(
            f"{m.size}x{m.size} matrix is not primitive (reducible or periodic)"
        )


def _collatz_wielandt(m: PFMatrix, v):
    """Certified [min, max] of (Mv)_i / v_i for a positive float vector v."""
    lower, upper = None, None
    for row, value in zip(m.entries, v):
        image = sum(iv.mpf(entry) * iv.mpf(float(x)) for entry, x in zip(row, v) if entry)
        ratio = CertifiedReal.from_interval(image / iv.mpf(float(value)))
        lower = ratio.lower if lower is None else min(lower, ratio.lower)
        upper = ratio.upper if upper is None else max(upper, ratio.upper)
    return lower, upper


def spectral_radius(m: PFMatrix, tol=None, config: RunConfig = DEFAULT_CONFIG) -> DilatationEstimate:
    """Power iteration with Collatz-Wielandt bounds until the bracket is narrower than ``tol``."""
    tol = config.tol if tol is None else tol
    if not tol > 0:
        raise ConfigurationError(f"tol must be positive, got {tol}")
    _require_primitive(m)

    matrix = m.as_array()
    v = np.ones(m.size)
    for iteration in range(1, config.max_iterations + 1):
        w = matrix @ v
        ratios = w / v
        if ratios.max() - ratios.min() < tol:
            break
        v = w / w.max()
    else:
        raise DilatationError(
            f"power iteration did not reach width {tol} within {config.max_iterations} steps"
        )

    lower, upper = _collatz_wielandt(m, v)
    if lower > upper:
        raise ConsistencyError(f"Collatz-Wielandt bracket is inverted: [{lower}, {upper}]")
    logger.debug("spectral radius in [%s, %s] after %s iterations", lower, upper, iteration)
    return DilatationEstimate(
        spectral_radius=(lower + upper) / 2,
        certified_interval=(lower, upper),
        iterations=iteration,
    )


def exact_traces(m: PFMatrix, n_max, method="sequential") -> list[int]:
    """tr(M^n) for n = 1..n_max as exact integers."""
    base = m.as_array(dtype=object)
    if method == "sequential":
        traces = []
        power = base.copy()
        for _ in range(n_max):
            traces.append(int(np.trace(power)))
            power = power.dot(base)
        return traces
    if method == "squaring":
        return [int(np.trace(_matrix_power(base, n))) for n in range(1, n_max + 1)]
    raise ConfigurationError(f"unknown trace method {method!r}")


def _matrix_power(base, exponent):
    result = np.identity(base.shape[0], dtype=object)
    square = base
    while exponent:
        if exponent & 1:
            result = result.dot(square)
        square = square.dot(square)
        exponent >>= 1
    return result


def _subdominant_ratio(m: PFMatrix):
    moduli = sorted(np.abs(np.linalg.eigvals(m.as_array())), reverse=True)
    if len(moduli) < 2 or moduli[0] == 0:
        return 0.0
    return float(moduli[1] / moduli[0])


def _envelope(radius, size, ratio, n):
    spread = (size - 1) * ratio ** n
    upper = (1 + spread) ** (1 / n) - 1
    lower = 1 - (1 - spread) ** (1 / n) if spread < 1 else 1.0
    return radius * max(upper, lower)


def _monotone_tail(gaps, slack):
    """Non-increasing tail, ignoring rises no larger than ``slack``."""
    tail = gaps[len(gaps) // 2:]
    return all(later <= earlier + slack for earlier, later in zip(tail, tail[1:]))


def trace_limit_check(m: PFMatrix, n_max=None, config: RunConfig = DEFAULT_CONFIG) -> DilatationEstimate:
    """tr(M^n)^(1/n) for n = 1..n_max, checked against the certified spectral radius."""
    n_max = config.n_max if n_max is None else n_max
    if n_max < 2:
        raise ConfigurationError(f"n_max must be at least 2, got {n_max}")
    estimate = spectral_radius(m, config=config)

    traces = exact_traces(m, n_max, "sequential")
    squared = exact_traces(m, n_max, "squaring")
    if traces != squared:
        first = next(n for n, (a, b) in enumerate(zip(traces, squared), start=1) if a != b)
        raise ConsistencyError(f"tr(M^{first}) differs between sequential and squaring products")

    sequence = []
    for n, trace in enumerate(traces, start=1):
        sequence.append((n, float(mp.root(mp.mpf(trace), n))))
    power_of_two = [(n, value) for n, value in sequence if n & (n - 1) == 0]

    radius = estimate.spectral_radius
    ratio = _subdominant_ratio(m)
    final_n, final_value = sequence[-1]
    gap = abs(final_value - radius)
    allowed = _envelope(radius, m.size, ratio, final_n) + config.tol + 1e-12 * radius
    if gap > allowed:
        raise DilatationError(
            f"tr(M^{final_n})^(1/{final_n}) = {final_value} is {gap} away from {radius},"
            f" outside the allowed {allowed}"
        )

    gaps = [abs(value - radius) for _, value in sequence]
    two_gaps = [abs(value - radius) for _, value in power_of_two]
    monotone = (_monotone_tail(gaps, config.tol), _monotone_tail(two_gaps, config.tol))
    if not all(monotone):
        logger.warning("trace sequence tail is not monotone: %s", monotone)
    logger.info("dilatation %s from %s traces", radius, n_max)
    return DilatationEstimate(
        spectral_radius=radius,
        certified_interval=estimate.certified_interval,
        trace_sequence=sequence,
        power_of_two=power_of_two,
        monotone_tail=monotone,
        iterations=estimate.iterations,
    )


def fixed_point_bound_check(fix_counts, hfk_top_dims) -> bool:
    """count(n) <= dim(n) - 1 for every n supplied on both sides."""
    counts = dict(fix_counts)
    dims = dict(hfk_top_dims)
    if len(counts) != len(fix_counts) or len(dims) != len(hfk_top_dims):
        raise BoundParameterError("repeated n in fixed-point or homology data")
    if set(counts) != set(dims):
        raise BoundParameterError(
            f"fixed-point counts cover n = {sorted(counts)} but homology covers n = {sorted(dims)}"
        )
    return all(counts[n] <= dims[n] - 1 for n in counts)


def characteristic_radius(m: PFMatrix) -> float:
    """Largest root modulus of the square-free part of the characteristic polynomial."""
    x = sympy.Symbol("x")
    poly = sympy.Matrix(m.entries).charpoly(x).sqf_part()
    return max(abs(complex(root)) for root in poly.nroots(n=30, maxsteps=200))
