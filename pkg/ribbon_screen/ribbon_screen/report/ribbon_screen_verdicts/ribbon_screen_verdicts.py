import frappe
from frappe import _

from ribbon_screen.exceptions import RibbonScreenError
from ribbon_screen.ribbon_screen.doctype.knot_record.knot_record import knot_record_to_core
from ribbon_screen.ribbon_screen.doctype.ribbon_screen_settings.ribbon_screen_settings import get_run_config
from ribbon_screen.utils.screen import find_record, screen_database


def execute(filters=None):
    if not filters:
        filters = {}

    columns = get_columns()
    data = get_data(filters)

    return columns, data

def get_columns():
    return [
        {
            "fieldname": "candidate",
            "label": _("Candidate"),
            "fieldtype": "Link",
            "options": "Knot Record",
            "width": 160
        },
        {
            "fieldname": "overall",
            "label": _("Verdict"),
            "fieldtype": "Data",
            "width": 120
        },
        {
            "fieldname": "failed_rules",
            "label": _("Failed Rules"),
            "fieldtype": "Data",
            "width": 140
        },
        {
            "fieldname": "forces_equality",
            "label": _("Forces Equality"),
            "fieldtype": "Check",
            "width": 120
        },
        {
            "fieldname": "rules",
            "label": _("Rule Results"),
            "fieldtype": "Small Text",
            "width": 420
        }
    ]

def verdict_row(verdict):
    return {
        "candidate": verdict.candidate,
        "overall": verdict.overall,
        "failed_rules": ", ".join(verdict.failed_rules),
        "forces_equality": 1 if verdict.fired else 0,
        "rules": "; ".join(f"{r.rule} {r.status}: {r.detail}" for r in verdict.rule_results),
    }

def get_data(filters):
    if not filters.get("target"):
        return []

    names = frappe.get_all("Knot Record", pluck="name", order_by="name asc")
    try:
        records = [knot_record_to_core(frappe.get_doc("Knot Record", name)) for name in names]
        target = find_record(records, filters.get("target"))
        verdicts = screen_database(target, records, get_run_config())
    except RibbonScreenError as e:
        frappe.throw(str(e), title=_("Screening failed"))

    return [verdict_row(v) for v in verdicts]
