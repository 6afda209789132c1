import click
from frappe.commands import get_site, pass_context

from ribbon_screen.utils.cli import main


@click.command(
	"ribbon-screen",
	context_settings={"ignore_unknown_options": True, "allow_interspersed_args": False},
)
@click.argument("args", nargs=-1, type=click.UNPROCESSED)
@pass_context
def ribbon_screen(context, args):
	"""Run the ribbon-screen toolkit with the site's Ribbon Screen Settings."""
	import frappe

	from ribbon_screen.ribbon_screen.doctype.ribbon_screen_settings.ribbon_screen_settings import (
		get_run_config,
	)

	site = get_site(context)
	frappe.init(site=site)
	frappe.connect()
	try:
		code = main(list(args), defaults=get_run_config())
	finally:
		frappe.destroy()
	if code:
		raise SystemExit(code)


commands = [ribbon_screen]
