"""Human and structured renderings of every command result."""
from __future__ import annotations

import json
import math
from fractions import Fraction

SCHEMA = "ribbon-screen/1"


def plain(value):
    """JSON-safe form: Fractions become "p/q" strings, infinities "inf", tuples lists."""
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    return value


def structured(command, payload) -> str:
    document = {"schema": SCHEMA, "command": command, **plain(payload)}
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def render(command, payload, human, output_format) -> str:
    if output_format == "structured":
        return structured(command, payload)
    return human(payload)


def table_rows(table):
    return [[m, plain(a), d] for m, a, d in table.rows()]


def alexander_payload(poly):
    if not poly.coeffs:
        return {"lowest_exponent": 0, "coefficients": []}
    return {"lowest_exponent": poly.coeffs[0][0], "coefficients": poly.coefficient_list()}


def homology_payload(report):
    return {
        "grid_size": report.grid.size,
        "hat": table_rows(report.hat),
        "hat_total": report.hat.total,
        "tilde": table_rows(report.tilde),
        "tilde_total": report.tilde.total,
        "genus": report.genus,
        "fibered": report.fibered,
        "nearly_fibered": report.nearly_fibered,
        "top_dimension": report.top_dimension,
        "alexander": alexander_payload(report.alexander),
        "alexander_text": str(report.alexander),
        "determinant": report.determinant,
    }


def _table_lines(rows, header="maslov alexander dim"):
    lines = [header]
    for m, a, d in rows:
        lines.append(f"{m} {a} {d}")
    return lines


def homology_human(payload):
    lines = ["hat"]
    lines.extend(_table_lines(payload["hat"]))
    lines.append(f"total {payload['hat_total']} (tilde {payload['tilde_total']})")
    lines.append("tilde")
    lines.extend(_table_lines(payload["tilde"]))
    lines.append(
        f"genus {payload['genus']}  fibered {str(payload['fibered']).lower()}"
        f"  nearly_fibered {str(payload['nearly_fibered']).lower()}"
    )
    alex = payload["alexander"]
    coefficients = " ".join(str(c) for c in alex["coefficients"])
    lines.append(f"alexander {payload['alexander_text']}  [{coefficients}] from t^{alex['lowest_exponent']}")
    lines.append(f"determinant {payload['determinant']}")
    return "\n".join(lines) + "\n"


def cover_payload(report):
    payload = {
        "delta": report.size,
        "n": report.sheets,
        "generators": report.count.exact,
        "bound_only": report.count.bound_only,
        "bregman_bound": report.count.bregman_bound,
        "bregman_is_estimate": report.count.bound_is_estimate,
        "matching_bound": report.matching_bound,
        "dimension_bound": report.dimension_bound,
        "bound_satisfied": report.bound_satisfied,
    }
    if report.homology is not None:
        payload["homology"] = table_rows(report.homology)
        payload["homology_total"] = report.homology.total
        payload["hat_total"] = report.hat_total
        payload["hat_bound_satisfied"] = report.hat_bound_satisfied
    return payload


def cover_human(payload):
    generators = "bound only" if payload["bound_only"] else str(payload["generators"])
    lines = [
        f"delta {payload['delta']}  n {payload['n']}",
        f"generators {generators}",
        f"matching bound (delta!)^n {payload['matching_bound']}",
        f"dimension bound (delta!)^n/2^(delta-1) {plain(payload['dimension_bound'])}",
    ]
    if payload["bound_satisfied"] is not None:
        lines.append(f"bound satisfied {str(payload['bound_satisfied']).lower()}")
    if "homology" in payload:
        first = "maslov" if payload["n"] == 1 else "parity"
        lines.extend(_table_lines(payload["homology"], f"{first} alexander dim"))
        lines.append(f"cover total {payload['homology_total']}  hat total {payload['hat_total']}")
    return "\n".join(lines) + "\n"


def dilatation_payload(estimate):
    lower, upper = estimate.certified_interval
    return {
        "spectral_radius": estimate.spectral_radius,
        "certified_interval": [lower, upper],
        "trace_sequence": [list(pair) for pair in estimate.trace_sequence],
        "power_of_two": [list(pair) for pair in estimate.power_of_two],
        "monotone_tail": list(estimate.monotone_tail),
        "iterations": estimate.iterations,
    }


def dilatation_human(payload):
    lines = ["n tr(M^n)^(1/n)"]
    lines.extend(f"{n} {value!r}" for n, value in payload["trace_sequence"])
    lower, upper = payload["certified_interval"]
    lines.append(f"spectral radius {payload['spectral_radius']!r} in [{lower!r}, {upper!r}]")
    return "\n".join(lines) + "\n"


def bound_payload(report):
    bound = report.bound_value
    payload = {
        "name": report.name,
        "inputs": report.inputs,
        "bound": {"lower": bound.lower, "upper": bound.upper, "exact": bound.exact},
        "measured": report.measured,
        "satisfied": report.satisfied,
        "near_boundary": report.near_boundary,
    }
    return payload


def bound_human(payload):
    inputs = " ".join(f"{k}={plain(v)}" for k, v in sorted(payload["inputs"].items()))
    bound = payload["bound"]
    value = plain(bound["exact"]) if bound["exact"] is not None else f"[{bound['lower']!r}, {bound['upper']!r}]"
    lines = [f"{payload['name']} {inputs}", f"bound {value}"]
    if payload["satisfied"] is not None:
        lines.append(f"measured {payload['measured']!r} satisfied {str(payload['satisfied']).lower()}")
    if payload["near_boundary"]:
        lines.append("warning: within relative slack of the bound")
    return "\n".join(lines) + "\n"


def verdict_payload(verdict):
    return {
        "candidate": verdict.candidate,
        "target": verdict.target,
        "overall": verdict.overall,
        "rules": [
            {"rule": r.rule, "status": r.status, "detail": r.detail, "warning": r.warning}
            for r in verdict.rule_results
        ],
    }


def screen_payload(target, verdicts, summary):
    return {
        "target": target,
        "verdicts": [verdict_payload(v) for v in verdicts],
        "summary": summary,
    }


def _verdict_line(verdict):
    failed = ",".join(r["rule"] for r in verdict["rules"] if r["status"] == "FAIL") or "-"
    return f"{verdict['candidate']:<16} {verdict['overall']:<11} failed {failed}"


def screen_human(payload):
    lines = [f"target {payload['target']}"]
    for verdict in payload["verdicts"]:
        lines.append(_verdict_line(verdict))
        for rule in verdict["rules"]:
            lines.append(f"    {rule['rule']:<4} {rule['status']:<12} {rule['detail']}")
            if rule["warning"]:
                lines.append(f"         warning: {rule['warning']}")
    summary = payload["summary"]
    lines.append(" ".join(f"{key} {summary[key]}" for key in ("EXCLUDED", "POSSIBLE", "MUST_EQUAL")))
    return "\n".join(lines) + "\n"


def chain_payload(report):
    return {
        "names": list(report.names),
        "links": [verdict_payload(v) for v in report.links],
        "first_excluded": report.first_excluded,
        "stable_from": report.stable_from,
        "stabilization_guaranteed": report.stabilization_guaranteed,
    }


def chain_human(payload):
    lines = [" >= ".join(payload["names"])]
    lines.extend(_verdict_line(v) for v in payload["links"])
    if payload["first_excluded"] is not None:
        link = payload["links"][payload["first_excluded"]]
        lines.append(f"first excluded link: {link['candidate']} <= {link['target']}")
    if payload["stable_from"] is not None:
        lines.append(f"forced equal from link {payload['stable_from']}")
    lines.append(f"stabilization guaranteed {str(payload['stabilization_guaranteed']).lower()}")
    return "\n".join(lines) + "\n"


def selftest_payload(results):
    return {
        "checks": [{"name": name, "passed": passed, "detail": detail} for name, passed, detail in results],
        "passed": sum(1 for _, passed, _ in results if passed),
        "failed": sum(1 for _, passed, _ in results if not passed),
    }


def selftest_human(payload):
    lines = [
        f"{'ok  ' if check['passed'] else 'FAIL'} {check['name']}: {check['detail']}"
        for check in payload["checks"]
    ]
    lines.append(f"{payload['passed']} passed, {payload['failed']} failed")
    return "\n".join(lines) + "\n"
