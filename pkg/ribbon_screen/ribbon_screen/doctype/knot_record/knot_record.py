# Copyright (c) 2026, Ribbon Screen contributors
# For license information, please see license.txt

import dataclasses
import json

import frappe
from frappe import _
from frappe.model.document import Document

from ribbon_screen.exceptions import DatabaseError, RibbonScreenError
from ribbon_screen.ribbon_screen.doctype.ribbon_screen_settings.ribbon_screen_settings import get_run_config
from ribbon_screen.utils import screen

FLAG_FIELDS = ("fibered", "nearly_fibered", "hyperbolic", "periodic_monodromy")
JSON_FIELDS = ("hfk_dims", "alexander", "cover_dims")


class KnotRecord(Document):
	def validate(self):
		try:
			record = screen.enrich_record(knot_record_to_core(self, include_derived=False), get_run_config())
		except RibbonScreenError as e:
			frappe.throw(str(e), title=_("Inconsistent Knot Record"))
		except Exception:
			frappe.log_error(title=_("Knot Record {0} could not be enriched").format(self.knot_name))
			raise
		apply_core_record(self, record)


def _flag(value):
	if value == "Yes":
		return True
	if value == "No":
		return False
	return None


def _label(value):
	if value is None:
		return ""
	return "Yes" if value else "No"


def _json(value):
	if isinstance(value, str):
		return json.loads(value) if value.strip() else None
	return value


def _genus(value):
	text = str(value or "").strip()
	if not text:
		return None
	return int(text) if text.lstrip("-").isdigit() else text


def derived_field_names(doc):
	return {name.strip() for name in (doc.derived_fields or "").split(",") if name.strip()}


def knot_record_to_core(doc, include_derived=True) -> screen.KnotRecord:
	"""Core record of a Knot Record document or any mapping with its fields.

	With ``include_derived`` off, values an earlier save filled in from the grid
	are treated as undeclared so they are recomputed.
	"""
	skip = set() if include_derived else derived_field_names(doc)
	entry = {
		"name": doc.knot_name or doc.name,
		"grid": doc.grid or None,
		"genus": _genus(doc.genus),
		"arc_index": doc.arc_index or None,
		"dilatation": doc.dilatation or None,
		"volume": doc.volume or None,
		"systole": doc.systole or None,
	}
	for field in FLAG_FIELDS:
		entry[field] = _flag(doc.get(field))
	try:
		for field in JSON_FIELDS:
			entry[field] = _json(doc.get(field))
	except json.JSONDecodeError as e:
		raise DatabaseError(f"{entry['name']}: {field} is not valid JSON: {e}")
	for field in skip:
		entry[field] = None
	record = screen.record_from_json(entry)
	if include_derived:
		record = dataclasses.replace(
			record,
			derived=frozenset(derived_field_names(doc)),
			engine_graded=bool(doc.engine_graded),
		)
	return record


def apply_core_record(doc, record):
	entry = screen.record_to_json(record)
	doc.genus = "" if record.genus is None else str(record.genus)
	for field in ("fibered", "nearly_fibered"):
		setattr(doc, field, _label(getattr(record, field)))
	doc.hfk_dims = json.dumps(entry["hfk_dims"]) if "hfk_dims" in entry else None
	doc.alexander = json.dumps(entry["alexander"]) if "alexander" in entry else None
	doc.derived_fields = ", ".join(sorted(record.derived))
	doc.engine_graded = 1 if record.engine_graded else 0
