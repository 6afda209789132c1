"""Screening candidate predecessors J <= K against a knot database.

Every rule is a necessary condition for a ribbon concordance from J to K.
A rule reports FAIL only on certified evidence, PASS when its comparison
holds, and INAPPLICABLE when an input is missing. R7 never fails: PASS
means the rule fires and J <= K would force J = K.
"""
from __future__ import annotations

import dataclasses
import json
import multiprocessing as mp
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from ribbon_screen.exceptions import (
    DatabaseError,
    InconsistentRecordError,
    MissingTargetError,
    RibbonScreenError,
)
from ribbon_screen.utils import get_logger
from ribbon_screen.utils.bounds import (
    CertifiedReal,
    compare_measured,
    dilatation_arc_bound,
    entropy_relation_bound,
    interval,
    volume_arc_bound,
    volume_ratio_constant,
)
from ribbon_screen.utils.config import DEFAULT_CONFIG, RunConfig
from ribbon_screen.utils.grid import parse_grid, serialize_grid
from ribbon_screen.utils.homology import (
    AlexanderPolynomial,
    BigradedDims,
    alexander_polynomial,
    compute_homology,
)

logger = get_logger(__name__)

PASS = "PASS"
FAIL = "FAIL"
INAPPLICABLE = "INAPPLICABLE"

EXCLUDED = "EXCLUDED"
POSSIBLE = "POSSIBLE"
MUST_EQUAL = "MUST_EQUAL"
VERDICTS = (EXCLUDED, POSSIBLE, MUST_EQUAL)


@dataclass(frozen=True)
class KnotRecord:
    name: str
    genus: int | None = None
    arc_index: int | None = None
    fibered: bool | None = None
    nearly_fibered: bool | None = None
    hyperbolic: bool | None = None
    periodic_monodromy: bool | None = None
    dilatation: float | None = None
    volume: float | None = None
    hfk_dims: BigradedDims | None = None
    alexander: AlexanderPolynomial | None = None
    grid: object = None
    cover_dims: dict = field(default_factory=dict, hash=False, compare=False)
    systole: str | None = None
    derived: frozenset = frozenset()
    engine_graded: bool = False

    @property
    def arc_bound(self):
        """Declared arc index, else the size of the stored grid (an upper bound)."""
        if self.arc_index is not None:
            return self.arc_index
        if self.grid is not None:
            return self.grid.size
        return None

    @property
    def growth(self):
        """Dilatation of the monodromy, 1 for periodic monodromy, None when unknown."""
        if self.hyperbolic is True and self.fibered is True and self.dilatation is not None:
            return self.dilatation
        if self.fibered is True and self.periodic_monodromy is True:
            return 1.0
        return None


def _hyperbolic_fibered(record):
    return record.hyperbolic is True and record.fibered is True


def validate_record(r: KnotRecord) -> KnotRecord:
    def fail(message):
        raise InconsistentRecordError(f"{r.name or '<unnamed>'}: {message}")

    if not r.name:
        fail("record has no name")
    if r.genus is not None and r.genus < 0:
        fail(f"genus {r.genus} is negative")
    if r.arc_index is not None and r.arc_index < 2:
        fail(f"arc index {r.arc_index} is below 2")
    if r.volume is not None and not r.volume > 0:
        fail(f"volume {r.volume} is not positive")
    if r.dilatation is not None:
        if not r.dilatation > 1:
            fail(f"dilatation {r.dilatation} does not exceed 1")
        if r.hyperbolic is not True or r.fibered is not True:
            fail("a dilatation needs hyperbolic and fibered set to true")
    if r.periodic_monodromy:
        if r.fibered is False or r.hyperbolic is True or r.dilatation is not None:
            fail("periodic monodromy needs a fibered, non-hyperbolic knot without dilatation")
    if r.fibered and r.nearly_fibered:
        fail("a knot cannot be both fibered and nearly fibered")
    if r.genus == 0:
        if r.hyperbolic:
            fail("genus 0 is the unknot, which is not hyperbolic")
        if r.fibered is False or r.nearly_fibered:
            fail("genus 0 is the unknot, which is fibered")
    if r.grid is not None and r.arc_index is not None and r.arc_index > r.grid.size:
        fail(f"arc index {r.arc_index} exceeds the size {r.grid.size} of the stored grid")

    if r.hfk_dims is not None:
        if not r.hfk_dims:
            fail("hfk table is empty")
        top = r.hfk_dims.top_alexander()
        top_dim = r.hfk_dims.alexander_totals()[top]
        if r.genus is not None and top != r.genus:
            fail(f"genus {r.genus} disagrees with the top hfk grading {top}")
        if r.fibered is not None and r.fibered != (top_dim == 1):
            fail(f"fibered={r.fibered} disagrees with top hfk rank {top_dim}")
        if r.nearly_fibered is not None and r.nearly_fibered != (top_dim == 2):
            fail(f"nearly_fibered={r.nearly_fibered} disagrees with top hfk rank {top_dim}")
        if r.alexander is not None:
            try:
                euler = alexander_polynomial(r.hfk_dims)
            except RibbonScreenError as exc:
                fail(f"hfk table has no valid Euler characteristic: {exc}")
            if euler != r.alexander:
                fail(f"Alexander polynomial {r.alexander} disagrees with the hfk table ({euler})")
    if r.alexander is not None:
        if not r.alexander.is_symmetric() or r.alexander.evaluate(1) != 1:
            fail(f"{r.alexander} is not a normalized Alexander polynomial")
        if r.genus is not None and r.alexander.degree > r.genus:
            fail(f"deg Δ = {r.alexander.degree} exceeds genus {r.genus}")
        if r.fibered and r.genus is not None and r.alexander.degree != r.genus:
            fail(f"fibered knot with deg Δ = {r.alexander.degree} != genus {r.genus}")
    return r


def enrich_record(r: KnotRecord, config: RunConfig = DEFAULT_CONFIG) -> KnotRecord:
    """Fill genus, fiberedness, hfk and Δ from the grid, rejecting contradictions."""
    if r.grid is None:
        return validate_record(r)

    report = compute_homology(r.grid, config)
    computed = {
        "genus": report.genus,
        "fibered": report.fibered,
        "nearly_fibered": report.nearly_fibered,
        "alexander": report.alexander,
    }
    changes, derived = {}, set(r.derived)
    for name, value in computed.items():
        declared = getattr(r, name)
        if declared is None:
            changes[name] = value
            derived.add(name)
        elif declared != value:
            raise InconsistentRecordError(
                f"{r.name}: declared {name} {declared} but the grid gives {value}"
            )

    if r.hfk_dims is None:
        changes["hfk_dims"] = report.hat
        changes["engine_graded"] = True
        derived.add("hfk_dims")
    elif r.hfk_dims.alexander_totals() != report.hat.alexander_totals():
        raise InconsistentRecordError(
            f"{r.name}: declared hfk ranks {r.hfk_dims.alexander_totals()} but the grid gives"
            f" {report.hat.alexander_totals()}"
        )

    enriched = dataclasses.replace(r, derived=frozenset(derived), **changes)
    logger.debug("enriched %s with %s", r.name, sorted(derived))
    return validate_record(enriched)


@dataclass(frozen=True)
class RuleResult:
    rule: str
    status: str
    detail: str
    warning: str | None = None


@dataclass(frozen=True)
class ScreenVerdict:
    candidate: str
    target: str
    rule_results: tuple[RuleResult, ...]
    overall: str

    def result(self, rule):
        return next((r for r in self.rule_results if r.rule == rule), None)

    @property
    def failed_rules(self):
        return [r.rule for r in self.rule_results if r.status == FAIL]

    @property
    def fired(self):
        result = self.result("R7")
        return result is not None and result.status == PASS


def _inapplicable(rule, detail):
    return RuleResult(rule, INAPPLICABLE, detail)


def _from_bound(rule, report, label):
    status = PASS if report.satisfied else FAIL
    bound = report.bound_value.value
    detail = f"{label}: {report.measured} <= {bound}"
    warning = None
    if report.near_boundary:
        warning = f"{label} holds within relative slack of the bound {bound}"
    elif not report.satisfied:
        detail = f"{label}: {report.measured} > {bound}"
    return RuleResult(rule, status, detail, warning)


def _rule_genus(j, k, config):
    if j.genus is None or k.genus is None:
        return _inapplicable("R1", "genus unknown")
    status = PASS if j.genus <= k.genus else FAIL
    return RuleResult("R1", status, f"g(J) = {j.genus}, g(K) = {k.genus}")


def _embeds_up_to_shift(small: BigradedDims, large: BigradedDims):
    shifts = {mk - mj for mj, _ in small.entries for mk, _ in large.entries}
    return any(
        all(dim <= large.get(m + s, a) for (m, a), dim in small.items()) for s in sorted(shifts)
    )


def _rule_rank(j, k, config):
    if j.hfk_dims is None or k.hfk_dims is None:
        return _inapplicable("R2", "hfk unknown")
    j_totals, k_totals = j.hfk_dims.alexander_totals(), k.hfk_dims.alexander_totals()
    for a, dim in j_totals.items():
        if dim > k_totals.get(a, 0):
            return RuleResult(
                "R2", FAIL, f"rank {dim} of J at alexander {a} exceeds rank {k_totals.get(a, 0)} of K"
            )
    if j.hfk_dims.total > k.hfk_dims.total:
        return RuleResult("R2", FAIL, f"total rank {j.hfk_dims.total} > {k.hfk_dims.total}")
    if j.engine_graded and k.engine_graded and not _embeds_up_to_shift(j.hfk_dims, k.hfk_dims):
        return RuleResult("R2", FAIL, "no maslov shift embeds the bigraded table of J into that of K")
    return RuleResult("R2", PASS, f"total rank {j.hfk_dims.total} <= {k.hfk_dims.total}")


def _rule_dilatation_arc(j, k, config):
    growth = j.growth
    if growth is None:
        return _inapplicable("R3", "J is not known to be fibered with known growth")
    delta = k.arc_bound
    if delta is None:
        return _inapplicable("R3", "arc index of K unknown")
    report = dilatation_arc_bound(delta, measured=growth, closeness=config.closeness)
    return _from_bound("R3", report, f"λ(J) against δ(K)! with δ = {delta}")


def _rule_entropy(j, k, config):
    growth = j.growth
    if growth is None:
        return _inapplicable("R4", "J is not known to be fibered with known growth")
    if not _hyperbolic_fibered(k) or k.dilatation is None or not k.genus:
        return _inapplicable("R4", "K needs hyperbolic fibered with dilatation and genus")
    report = entropy_relation_bound(k.dilatation, k.genus, measured=growth, closeness=config.closeness)
    return _from_bound("R4", report, f"λ(J) against λ(K)^{k.genus}")


def _rule_volume_arc(j, k, config):
    if not _hyperbolic_fibered(j) or j.volume is None:
        return _inapplicable("R5", "J needs hyperbolic fibered with volume")
    delta = k.arc_bound
    if k.genus is None or delta is None:
        return _inapplicable("R5", "genus or arc index of K unknown")
    if k.genus == 0:
        return RuleResult("R5", FAIL, "g(K) = 0 leaves no room for a hyperbolic fibered J")
    report = volume_arc_bound(k.genus, delta, measured=j.volume, closeness=config.closeness)
    return _from_bound("R5", report, f"vol(J) against 3π(2g-1)log(δ!) with g = {k.genus}, δ = {delta}")


def _rule_fibered(j, k, config):
    if k.fibered is not True or j.fibered is None:
        return _inapplicable("R6", "needs K fibered and the fiberedness of J")
    if j.fibered:
        return RuleResult("R6", PASS, "J is fibered")
    return RuleResult("R6", FAIL, "K is fibered but J is not")


def _fibered_degree(record):
    if record.alexander is not None:
        return record.alexander.degree
    return record.genus


def _rule_fibered_equality(j, k, config):
    if k.fibered is not True or j.fibered is not True:
        return _inapplicable("R7", "needs J and K fibered")
    deg_j, deg_k = _fibered_degree(j), _fibered_degree(k)
    if deg_j is None or deg_k is None:
        return _inapplicable("R7", "Alexander degree unknown")
    if deg_j != deg_k:
        return _inapplicable("R7", f"degrees differ ({deg_j} vs {deg_k})")
    return RuleResult("R7", PASS, f"fibered with equal Alexander degree {deg_k}: J <= K forces J = K")


def _rule_volume_ratio(j, k, config):
    b = config.volume_ratio_b
    if b is None:
        return _inapplicable("R8", "no volume-ratio constant b supplied")
    if not (_hyperbolic_fibered(j) and _hyperbolic_fibered(k)):
        return _inapplicable("R8", "needs J and K hyperbolic fibered")
    if j.volume is None or k.volume is None or not k.genus:
        return _inapplicable("R8", "volumes or genus of K unknown")
    if config.systole is not None and k.systole != config.systole:
        return _inapplicable("R8", f"b was supplied for systole {config.systole}, K has {k.systole}")
    constant = volume_ratio_constant(k.genus, b)
    bound = CertifiedReal.from_interval(interval(constant) * interval(k.volume))
    satisfied, near = compare_measured(j.volume, bound, config.closeness)
    detail = f"vol(J) {j.volume} {'<=' if satisfied else '>'} c·vol(K) {bound.upper}"
    warning = "vol(J) lies within relative slack of c·vol(K)" if near else None
    return RuleResult("R8", PASS if satisfied else FAIL, detail, warning)


def _rule_cover_rank(j, k, config):
    common = sorted(
        n for n in set(j.cover_dims) & set(k.cover_dims) if n >= 2 and n & (n - 1) == 0
    )
    if not common:
        return _inapplicable("R9", "no common power-of-two cover data")
    for n in common:
        if j.cover_dims[n] > k.cover_dims[n]:
            return RuleResult("R9", FAIL, f"n = {n}: cover rank {j.cover_dims[n]} > {k.cover_dims[n]}")
    return RuleResult("R9", PASS, f"cover ranks dominated at n = {', '.join(map(str, common))}")


def _rule_nearly_fibered(j, k, config):
    if k.nearly_fibered is not True or k.genus != 1:
        return _inapplicable("R10", "needs K nearly fibered of genus one")
    if j.genus != 1:
        return _inapplicable("R10", "needs g(J) = 1")
    if j.fibered or j.nearly_fibered:
        return RuleResult("R10", PASS, "J is fibered or nearly fibered")
    if j.hfk_dims is not None:
        top = j.hfk_dims.alexander_totals().get(1, 0)
        status = PASS if 1 <= top <= 2 else FAIL
        return RuleResult("R10", status, f"top rank of J is {top}, K allows 1 or 2")
    if j.fibered is False and j.nearly_fibered is False:
        return RuleResult("R10", FAIL, "J is neither fibered nor nearly fibered")
    return _inapplicable("R10", "fiberedness of J unknown")


def _rule_alexander(j, k, config):
    if j.alexander is None or k.alexander is None:
        return _inapplicable("R11", "Alexander polynomial unknown")
    if j.alexander.degree > k.alexander.degree:
        return RuleResult("R11", FAIL, f"deg Δ_J = {j.alexander.degree} > deg Δ_K = {k.alexander.degree}")
    if not j.alexander.divides(k.alexander):
        return RuleResult("R11", FAIL, f"{j.alexander} does not divide {k.alexander}")
    return RuleResult("R11", PASS, f"{j.alexander} divides {k.alexander}")


def _close(a, b, closeness):
    return abs(a - b) <= max(closeness * max(abs(a), abs(b)), 1e-12)


def _rule_equality(j, k, config, fired):
    if not fired:
        return _inapplicable("R12", "R7 did not fire")
    mismatches = []
    for name in ("genus", "fibered", "nearly_fibered", "hyperbolic", "alexander"):
        a, b = getattr(j, name), getattr(k, name)
        if a is not None and b is not None and a != b:
            mismatches.append(f"{name} {a} vs {b}")
    if j.hfk_dims is not None and k.hfk_dims is not None:
        if j.hfk_dims.alexander_totals() != k.hfk_dims.alexander_totals():
            mismatches.append("hfk ranks differ")
    for name in ("dilatation", "volume"):
        a, b = getattr(j, name), getattr(k, name)
        if a is not None and b is not None and not _close(a, b, config.closeness):
            mismatches.append(f"{name} {a} vs {b}")
    if mismatches:
        return RuleResult("R12", FAIL, "equality is forced but " + "; ".join(mismatches))
    return RuleResult("R12", PASS, "shared invariants agree")


RULES = (
    ("R1", _rule_genus),
    ("R2", _rule_rank),
    ("R3", _rule_dilatation_arc),
    ("R4", _rule_entropy),
    ("R5", _rule_volume_arc),
    ("R6", _rule_fibered),
    ("R7", _rule_fibered_equality),
    ("R8", _rule_volume_ratio),
    ("R9", _rule_cover_rank),
    ("R10", _rule_nearly_fibered),
    ("R11", _rule_alexander),
)


def screen_pair(j: KnotRecord, k: KnotRecord, config: RunConfig = DEFAULT_CONFIG) -> ScreenVerdict:
    validate_record(j)
    validate_record(k)
    results = []
    for rule, check in RULES:
        if rule == "R9" and not config.experimental_cover_rule:
            continue
        result = check(j, k, config)
        if result.warning:
            logger.warning("%s <= %s, %s: %s", j.name, k.name, rule, result.warning)
        results.append(result)
    fired = any(r.rule == "R7" and r.status == PASS for r in results)
    results.append(_rule_equality(j, k, config, fired))

    if any(r.status == FAIL for r in results):
        overall = EXCLUDED
    elif fired:
        overall = MUST_EQUAL
    else:
        overall = POSSIBLE
    return ScreenVerdict(j.name, k.name, tuple(results), overall)


def _screen_one(payload):
    j, k, config = payload
    return screen_pair(j, k, config)


def check_unique(db):
    seen = set()
    for record in db:
        if record.name in seen:
            raise DatabaseError(f"duplicate knot name {record.name!r}")
        seen.add(record.name)


def find_record(db, name) -> KnotRecord:
    for record in db:
        if record.name == name:
            return record
    raise MissingTargetError(f"no knot named {name!r} in the database")


def screen_database(k: KnotRecord, db, config: RunConfig = DEFAULT_CONFIG) -> list[ScreenVerdict]:
    """One verdict per candidate, in database order."""
    check_unique(db)
    payloads = [(j, k, config) for j in db]
    if config.workers > 1 and len(payloads) > 1:
        with mp.Pool(min(config.workers, len(payloads))) as pool:
            verdicts = pool.map(_screen_one, payloads)
    else:
        verdicts = [_screen_one(payload) for payload in payloads]
    logger.info("screened %s candidates against %s: %s", len(verdicts), k.name, summarize(verdicts))
    return verdicts


def summarize(verdicts) -> dict:
    counts = Counter(v.overall for v in verdicts)
    return {verdict: counts.get(verdict, 0) for verdict in VERDICTS}


@dataclass(frozen=True)
class ChainReport:
    names: tuple[str, ...]
    links: tuple[ScreenVerdict, ...]
    first_excluded: int | None
    stable_from: int | None
    stabilization_guaranteed: bool


def screen_chain(records, config: RunConfig = DEFAULT_CONFIG) -> ChainReport:
    """Screen K_(i+1) <= K_i along a proposed chain K_1 >= K_2 >= ...

    ``first_excluded`` and ``stable_from`` are indices into ``links``;
    ``stable_from`` is where every remaining link is MUST_EQUAL.
    """
    records = list(records)
    if len(records) < 2:
        raise DatabaseError("a chain needs at least two knots")
    links = tuple(
        screen_pair(smaller, larger, config) for larger, smaller in zip(records, records[1:])
    )
    first_excluded = next((i for i, v in enumerate(links) if v.overall == EXCLUDED), None)

    stable_from = None
    for index in range(len(links) - 1, -1, -1):
        if links[index].overall != MUST_EQUAL:
            break
        stable_from = index

    head = records[0]
    guaranteed = head.fibered is True or (head.nearly_fibered is True and head.genus == 1)
    return ChainReport(
        names=tuple(r.name for r in records),
        links=links,
        first_excluded=first_excluded,
        stable_from=stable_from,
        stabilization_guaranteed=guaranteed,
    )


_BOOL_FIELDS = ("fibered", "nearly_fibered", "hyperbolic", "periodic_monodromy")
_INT_FIELDS = ("genus", "arc_index")
_FLOAT_FIELDS = ("dilatation", "volume")
_KNOWN_FIELDS = {
    "name", "grid", "hfk_dims", "alexander", "cover_dims", "systole",
    *_BOOL_FIELDS, *_INT_FIELDS, *_FLOAT_FIELDS,
}


def record_from_json(entry, index=0) -> KnotRecord:
    if not isinstance(entry, dict):
        raise DatabaseError(f"record {index} is not an object")
    label = entry.get("name", f"#{index}")
    unknown = sorted(set(entry) - _KNOWN_FIELDS)
    if unknown:
        raise DatabaseError(f"record {label}: unknown fields {', '.join(unknown)}")
    if not isinstance(entry.get("name"), str) or not entry["name"]:
        raise DatabaseError(f"record {index} needs a non-empty string name")

    values = {"name": entry["name"]}
    try:
        for key in _BOOL_FIELDS:
            if entry.get(key) is not None:
                if not isinstance(entry[key], bool):
                    raise ValueError(f"{key} must be true, false or null")
                values[key] = entry[key]
        for key in _INT_FIELDS:
            if entry.get(key) is not None:
                if isinstance(entry[key], bool) or not isinstance(entry[key], int):
                    raise ValueError(f"{key} must be an integer")
                values[key] = entry[key]
        for key in _FLOAT_FIELDS:
            if entry.get(key) is not None:
                values[key] = float(entry[key])
        if entry.get("hfk_dims") is not None:
            values["hfk_dims"] = BigradedDims.from_rows(
                (m, Fraction(str(a)), d) for m, a, d in entry["hfk_dims"]
            )
        if entry.get("alexander") is not None:
            values["alexander"] = AlexanderPolynomial.from_mapping(
                {int(exp): int(coeff) for exp, coeff in entry["alexander"]}
            )
        if entry.get("cover_dims") is not None:
            values["cover_dims"] = {int(n): int(dim) for n, dim in entry["cover_dims"].items()}
        if entry.get("systole") is not None:
            values["systole"] = str(entry["systole"])
        if entry.get("grid") is not None:
            values["grid"] = parse_grid(entry["grid"])
    except RibbonScreenError as exc:
        raise DatabaseError(f"record {label}: {exc}")
    except (TypeError, ValueError, AttributeError) as exc:
        raise DatabaseError(f"record {label}: {exc}")
    return KnotRecord(**values)


def load_database(text) -> list[KnotRecord]:
    """Records from a JSON array; grids are embedded in the grid file format."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatabaseError(f"database is not valid JSON: {exc}")
    if not isinstance(data, list):
        raise DatabaseError("database must be a JSON array of records")
    records = [record_from_json(entry, index) for index, entry in enumerate(data)]
    check_unique(records)
    return [validate_record(r) for r in records]


def prepare_database(records, config: RunConfig = DEFAULT_CONFIG) -> list[KnotRecord]:
    check_unique(records)
    return [enrich_record(r, config) for r in records]


def _json_number(value):
    value = Fraction(value)
    return value.numerator if value.denominator == 1 else str(value)


def record_to_json(r: KnotRecord) -> dict:
    entry = {"name": r.name}
    for key in (*_BOOL_FIELDS, *_INT_FIELDS, *_FLOAT_FIELDS, "systole"):
        if getattr(r, key) is not None:
            entry[key] = getattr(r, key)
    if r.grid is not None:
        entry["grid"] = serialize_grid(r.grid)
    if r.hfk_dims is not None:
        entry["hfk_dims"] = [[m, _json_number(a), d] for m, a, d in r.hfk_dims.rows()]
    if r.alexander is not None:
        entry["alexander"] = [[exp, coeff] for exp, coeff in r.alexander.coeffs]
    if r.cover_dims:
        entry["cover_dims"] = {str(n): dim for n, dim in sorted(r.cover_dims.items())}
    return entry


def dump_database(records) -> str:
    return json.dumps([record_to_json(r) for r in records], indent=2, sort_keys=True) + "\n"
