# Copyright (c) 2026, Ribbon Screen contributors
# For license information, please see license.txt

import frappe
from frappe import _
from frappe.model.document import Document

from ribbon_screen.exceptions import RibbonScreenError
from ribbon_screen.utils.config import DEFAULT_CONFIG, RunConfig

INT_FIELDS = ("grid_ceiling", "cover_ceiling", "complex_ceiling", "workers", "n_max", "max_iterations")
FLOAT_FIELDS = ("tol", "closeness", "volume_ratio_b")


class RibbonScreenSettings(Document):
	def validate(self):
		try:
			self.as_run_config()
		except RibbonScreenError as e:
			frappe.throw(str(e), title=_("Invalid Ribbon Screen Settings"))

	def as_run_config(self) -> RunConfig:
		return settings_to_config(self)


def settings_to_config(settings) -> RunConfig:
	"""Empty or zero fields keep the defaults."""
	values = {}
	for field in INT_FIELDS:
		values[field] = int(getattr(settings, field, None) or 0) or None
	for field in FLOAT_FIELDS:
		values[field] = float(getattr(settings, field, None) or 0) or None
	sheet_shift = getattr(settings, "sheet_shift", None)
	values["sheet_shift"] = int(sheet_shift) if sheet_shift else None
	values["systole"] = getattr(settings, "systole", None) or None
	values["output_format"] = getattr(settings, "output_format", None) or None
	values["experimental_cover_rule"] = True if getattr(settings, "experimental_cover_rule", 0) else None
	return DEFAULT_CONFIG.replace(**values)


def get_run_config() -> RunConfig:
	return frappe.get_cached_doc("Ribbon Screen Settings").as_run_config()
