"""Computational core: grids, knot Floer homology, covers, dynamics, bounds and screening.

Nothing under this package imports frappe at module level, so the console
script and the test-suite run without a bench.
"""
import logging


def get_logger(name="ribbon_screen"):
    """Get the site logger inside a Frappe site, a module logger otherwise."""
    try:
        import frappe
    except ImportError:
        return logging.getLogger(name)

    if getattr(frappe.local, "site", None):
        return frappe.logger(name)
    return logging.getLogger(name)
