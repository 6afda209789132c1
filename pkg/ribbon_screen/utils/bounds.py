"""Calculators for the explicit inequalities: dilatation, cover rank, entropy and volume bounds.

Every transcendental step is evaluated in mpmath interval arithmetic and
converted to floats with outward rounding, so a reported upper bound is never
below the true value and a reported lower bound never above it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from mpmath import iv
from mpmath.libmp import from_float, mpf_gt, mpf_lt, to_float

from ribbon_screen.exceptions import BoundParameterError


def _float_down(raw):
    value = to_float(raw)
    if mpf_gt(from_float(value), raw):
        value = math.nextafter(value, -math.inf)
    return value


def _float_up(raw):
    value = to_float(raw)
    if mpf_lt(from_float(value), raw):
        value = math.nextafter(value, math.inf)
    return value


def interval(value):
    """Enclosing interval of an int, float, Fraction or CertifiedReal."""
    if isinstance(value, CertifiedReal):
        if value.exact is not None:
            return interval(value.exact)
        return iv.mpf([value.lower, value.upper])
    if isinstance(value, Fraction):
        return iv.mpf(value.numerator) / iv.mpf(value.denominator)
    return iv.mpf(value)


@dataclass(frozen=True)
class CertifiedReal:
    """Real number known to lie in [lower, upper]; ``exact`` is set for rational values."""

    lower: float
    upper: float
    exact: int | Fraction | None = None

    @classmethod
    def from_interval(cls, value):
        low, high = value._mpi_
        return cls(_float_down(low), _float_up(high))

    @classmethod
    def from_exact(cls, value):
        value = Fraction(value)
        exact = value.numerator if value.denominator == 1 else value
        low, high = interval(value)._mpi_
        return cls(_float_down(low), _float_up(high), exact)

    @property
    def value(self):
        """The safe value for upper-bound claims."""
        return self.exact if self.exact is not None else self.upper

    @property
    def width(self):
        return self.upper - self.lower

    def contains(self, x):
        return self.lower <= x <= self.upper


@dataclass(frozen=True)
class BoundReport:
    name: str
    inputs: dict = field(default_factory=dict)
    bound_value: CertifiedReal | None = None
    measured: float | None = None
    satisfied: bool | None = None
    near_boundary: bool = False


def _near(value, upper, closeness):
    """Whether value sits within relative slack of a finite upper endpoint."""
    if not math.isfinite(upper):
        return False
    return upper - value <= closeness * max(abs(upper), 1e-300)


def compare_measured(measured, bound: CertifiedReal, closeness=1e-9):
    """(satisfied, near_boundary) for the claim measured <= bound.

    The claim fails only when the measured value exceeds the outward-rounded
    upper endpoint; a pass within relative slack ``closeness`` is flagged.
    """
    measured_interval = interval(measured)
    low, high = measured_interval._mpi_
    satisfied = not _float_down(low) > bound.upper
    return satisfied, satisfied and _near(_float_up(high), bound.upper, closeness)


def _report(name, inputs, bound, measured=None, closeness=1e-9):
    if measured is None:
        return BoundReport(name, inputs, bound)
    satisfied, near = compare_measured(measured, bound, closeness)
    return BoundReport(name, inputs, bound, measured, satisfied, near)


def _require(condition, message):
    if not condition:
        raise BoundParameterError(message)


def _require_integer(value, name, minimum):
    _require(
        isinstance(value, int) and not isinstance(value, bool) and value >= minimum,
        f"{name} must be an integer >= {minimum}, got {value!r}",
    )


def _require_dilatation(value, name="lambda"):
    _require(value > 1, f"{name} must exceed 1 (pseudo-Anosov), got {value}")


def dilatation_arc_bound(delta, measured=None, closeness=1e-9) -> BoundReport:
    """λ(J) <= δ! for a hyperbolic fibered J <= K, K of arc index δ."""
    _require_integer(delta, "delta", 2)
    bound = CertifiedReal.from_exact(math.factorial(delta))
    return _report("dilatation-arc", {"delta": delta}, bound, measured, closeness)


def eq1_rhs(delta, n) -> CertifiedReal:
    """δ! / 2^((δ-1)/n), the growth bound on the cover rank in the top-minus-one grading."""
    _require_integer(delta, "delta", 2)
    _require_integer(n, "n", 1)
    value = iv.mpf(math.factorial(delta)) / iv.exp(iv.log(2) * (delta - 1) / n)
    return CertifiedReal.from_interval(value)


def eq1_check(top_dim, delta, n, closeness=1e-9) -> BoundReport:
    """Compare dim^(1/n) of the top-minus-one cover grading against eq1_rhs."""
    _require_integer(top_dim, "dim", 0)
    rhs = eq1_rhs(delta, n)
    lhs = CertifiedReal.from_exact(0) if top_dim == 0 else CertifiedReal.from_interval(
        iv.exp(iv.log(iv.mpf(top_dim)) / n)
    )
    satisfied = not lhs.lower > rhs.upper
    near = satisfied and _near(lhs.upper, rhs.upper, closeness)
    return BoundReport(
        "eq1", {"dim": top_dim, "delta": delta, "n": n}, rhs, lhs.upper, satisfied, near
    )


def _kojima_mcshane_interval(genus, dilatation):
    return 3 * iv.pi * (2 * genus - 1) * iv.log(dilatation)


def kojima_mcshane_bound(g, dilatation, measured=None, closeness=1e-9) -> BoundReport:
    """vol(S^3 - J) <= 3π(2g - 1) log λ(J)."""
    _require_integer(g, "g", 1)
    _require_dilatation(dilatation)
    bound = CertifiedReal.from_interval(_kojima_mcshane_interval(g, interval(dilatation)))
    return _report("kojima-mcshane", {"g": g, "lambda": dilatation}, bound, measured, closeness)


def volume_arc_bound(g, delta, measured=None, closeness=1e-9) -> BoundReport:
    """vol(S^3 - J) <= 3π(2g - 1) log δ!, composed from the two bounds above."""
    _require_integer(g, "g", 1)
    factorial = dilatation_arc_bound(delta).bound_value
    bound = CertifiedReal.from_interval(_kojima_mcshane_interval(g, interval(factorial)))
    return _report("volume-arc", {"g": g, "delta": delta}, bound, measured, closeness)


def entropy_relation_bound(dilatation_k, g_k, measured=None, closeness=1e-9) -> BoundReport:
    """λ(J) <= λ(K)^g(K)."""
    _require_dilatation(dilatation_k, "lambda_K")
    _require_integer(g_k, "g_K", 1)
    bound = CertifiedReal.from_interval(interval(dilatation_k) ** g_k)
    return _report("entropy-relation", {"lambda_K": dilatation_k, "g_K": g_k}, bound, measured, closeness)


def cornish_growth_bound(c, dilatation, g, n) -> CertifiedReal:
    """c · λ^(g n), the growth of the cover rank of a hyperbolic fibered knot."""
    _require(c > 0, f"c must be positive, got {c}")
    _require_dilatation(dilatation)
    _require_integer(g, "g", 1)
    _require_integer(n, "n", 1)
    return CertifiedReal.from_interval(interval(c) * interval(dilatation) ** (g * n))


def volume_ratio_constant(g, b) -> CertifiedReal:
    """c_(g, ε) = 3π g (2g - 1) b_(g, ε)."""
    _require_integer(g, "g", 1)
    _require(b > 0, f"b must be positive, got {b}")
    return CertifiedReal.from_interval(3 * iv.pi * g * (2 * g - 1) * interval(b))


def kojima_entropy_bound_check(dilatation_k, b, volume_k) -> bool:
    """log λ(K) <= b · vol(S^3 - K), the left side rounded up."""
    _require_dilatation(dilatation_k, "lambda_K")
    _require(b > 0, f"b must be positive, got {b}")
    _require(volume_k > 0, f"vol_K must be positive, got {volume_k}")
    entropy = CertifiedReal.from_interval(iv.log(interval(dilatation_k)))
    capacity = CertifiedReal.from_interval(interval(b) * interval(volume_k))
    return entropy.upper <= capacity.lower


@dataclass(frozen=True)
class ChainStep:
    label: str
    lhs: CertifiedReal
    rhs: CertifiedReal
    relation: str
    holds: bool


def _step(label, lhs, rhs, relation="<="):
    lhs = lhs if isinstance(lhs, CertifiedReal) else CertifiedReal.from_interval(lhs)
    rhs = rhs if isinstance(rhs, CertifiedReal) else CertifiedReal.from_interval(rhs)
    if relation == "=":
        holds = lhs.lower <= rhs.upper and rhs.lower <= lhs.upper
    else:
        holds = not lhs.lower > rhs.upper
    return ChainStep(label, lhs, rhs, relation, holds)


def volume_arc_chain_audit(delta, dilatation_j, g_j, g_k, volume_j=None) -> list[ChainStep]:
    """vol(J) <= 3π(2g(J)-1) log λ(J) <= 3π(2g-1) log λ(J) <= 3π(2g-1) log δ!."""
    _require_integer(delta, "delta", 2)
    _require_integer(g_j, "g_J", 1)
    _require_integer(g_k, "g_K", 1)
    _require_dilatation(dilatation_j, "lambda_J")
    lam = interval(dilatation_j)
    own = _kojima_mcshane_interval(g_j, lam)
    target = _kojima_mcshane_interval(g_k, lam)
    arc = _kojima_mcshane_interval(g_k, iv.mpf(math.factorial(delta)))
    steps = []
    if volume_j is not None:
        steps.append(_step("volume of J against its own entropy", interval(volume_j), own))
    steps.append(_step("genus monotonicity g(J) <= g(K)", own, target))
    steps.append(_step("dilatation against the arc index", target, arc))
    return steps


def volume_ratio_chain_audit(g_j, g_k, dilatation_j, dilatation_k, b, volume_k, volume_j=None) -> list[ChainStep]:
    """The inequality chain bounding vol(J) by c_(g, ε) vol(K), checked step by step."""
    _require_integer(g_j, "g_J", 1)
    _require_integer(g_k, "g_K", 1)
    _require_dilatation(dilatation_j, "lambda_J")
    _require_dilatation(dilatation_k, "lambda_K")
    _require(b > 0, f"b must be positive, got {b}")
    _require(volume_k > 0, f"vol_K must be positive, got {volume_k}")

    lam_j, lam_k = interval(dilatation_j), interval(dilatation_k)
    scale = 3 * iv.pi * g_k * (2 * g_k - 1)
    own = _kojima_mcshane_interval(g_j, lam_j)
    target = _kojima_mcshane_interval(g_k, lam_j)
    entropy = scale * iv.log(lam_k)
    capacity = scale * interval(b) * interval(volume_k)
    constant = interval(volume_ratio_constant(g_k, b)) * interval(volume_k)

    steps = []
    if volume_j is not None:
        steps.append(_step("volume of J against its own entropy", interval(volume_j), own))
    steps.extend([
        _step("genus monotonicity g(J) <= g(K)", own, target),
        _step("entropy relation λ(J) <= λ(K)^g(K)", target, entropy),
        _step("g = g(K)", entropy, 3 * iv.pi * g_k * (2 * g_k - 1) * iv.log(lam_k), "="),
        _step("entropy against volume for K", entropy, capacity),
        _step("definition of c_(g, ε)", capacity, constant, "="),
    ])
    return steps


def _float_param(text):
    return float(text)


def _int_param(text):
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


def _certified_report(name, function, **kwargs):
    return BoundReport(name, kwargs, function(**kwargs))


BOUNDS = {
    "dilatation-arc": (
        lambda delta, measured=None: dilatation_arc_bound(delta, measured),
        {"delta": _int_param},
    ),
    "eq1": (
        lambda delta, n: _certified_report("eq1", eq1_rhs, delta=delta, n=n),
        {"delta": _int_param, "n": _int_param},
    ),
    "eq1-check": (
        lambda dim, delta, n: eq1_check(dim, delta, n),
        {"dim": _int_param, "delta": _int_param, "n": _int_param},
    ),
    "volume-arc": (
        lambda g, delta, measured=None: volume_arc_bound(g, delta, measured),
        {"g": _int_param, "delta": _int_param},
    ),
    "entropy-relation": (
        lambda lam, g, measured=None: entropy_relation_bound(lam, g, measured),
        {"lambda": _float_param, "g": _int_param},
    ),
    "cornish-growth": (
        lambda c, lam, g, n: BoundReport(
            "cornish-growth", {"c": c, "lambda": lam, "g": g, "n": n},
            cornish_growth_bound(c, lam, g, n),
        ),
        {"c": _float_param, "lambda": _float_param, "g": _int_param, "n": _int_param},
    ),
    "kojima-mcshane": (
        lambda g, lam, measured=None: kojima_mcshane_bound(g, lam, measured),
        {"g": _int_param, "lambda": _float_param},
    ),
    "volume-ratio": (
        lambda g, b: _certified_report("volume-ratio", volume_ratio_constant, g=g, b=b),
        {"g": _int_param, "b": _float_param},
    ),
    "kojima-entropy": (
        lambda lam, b, vol: BoundReport(
            "kojima-entropy", {"lambda_K": lam, "b": b, "vol_K": vol},
            CertifiedReal.from_interval(interval(b) * interval(vol)),
            CertifiedReal.from_interval(iv.log(interval(lam))).upper,
            kojima_entropy_bound_check(lam, b, vol),
        ),
        {"lambda": _float_param, "b": _float_param, "vol": _float_param},
    ),
}

OPTIONAL_PARAMS = {"measured": _float_param}
_KEYWORDS = {"lambda": "lam"}


def evaluate_bound(name, params: dict) -> BoundReport:
    """Evaluate a named bound from string parameters, e.g. ``volume-arc g=1 delta=6``."""
    if name not in BOUNDS:
        raise BoundParameterError(
            f"unknown bound {name!r}; choose one of {', '.join(sorted(BOUNDS))}"
        )
    function, signature = BOUNDS[name]
    accepted = dict(signature)
    if "measured" in function.__code__.co_varnames:
        accepted.update(OPTIONAL_PARAMS)

    unknown = sorted(set(params) - set(accepted))
    if unknown:
        raise BoundParameterError(f"{name} does not take {', '.join(unknown)}")
    missing = [key for key in signature if key not in params]
    if missing:
        raise BoundParameterError(f"{name} needs {', '.join(missing)}")

    kwargs = {}
    for key, text in params.items():
        try:
            kwargs[_KEYWORDS.get(key, key)] = accepted[key](text)
        except (TypeError, ValueError) as exc:
            raise BoundParameterError(f"{name}: bad value for {key}: {exc}")
    return function(**kwargs)
