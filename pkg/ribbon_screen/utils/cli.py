"""``ribbon-screen``: command line over grids, covers, matrices, bounds and knot databases."""
from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from ribbon_screen.exceptions import BoundParameterError, RibbonScreenError
from ribbon_screen.utils import report
from ribbon_screen.utils.bounds import evaluate_bound
from ribbon_screen.utils.config import DEFAULT_CONFIG, OUTPUT_FORMATS, RunConfig
from ribbon_screen.utils.cover import cover_report
from ribbon_screen.utils.dynamics import parse_matrix, trace_limit_check
from ribbon_screen.utils.grid import parse_grid
from ribbon_screen.utils.homology import compute_homology
from ribbon_screen.utils.screen import (
    find_record,
    load_database,
    prepare_database,
    screen_chain,
    screen_database,
    summarize,
)
from ribbon_screen.utils.selftest import run_selftest

USAGE_EXIT = 64

input_file = click.Path(exists=True, dir_okay=False, path_type=Path)


class ToolkitGroup(click.Group):
    """Maps toolkit errors to one ``error[<reason>]`` line on stderr and an exit code."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            result = super().main(
                args=args,
                prog_name=prog_name,
                complete_var=complete_var,
                standalone_mode=False,
                **extra,
            )
            code = result if isinstance(result, int) else 0
        except RibbonScreenError as exc:
            click.echo(f"error[{exc.reason}]: {exc}", err=True)
            code = exc.exit_code
        except click.UsageError as exc:
            click.echo(f"error[usage]: {exc.format_message()}", err=True)
            code = USAGE_EXIT
        except click.ClickException as exc:
            click.echo(f"error[io]: {exc.format_message()}", err=True)
            code = 1
        except click.Abort:
            code = 1
        if standalone_mode:
            sys.exit(code)
        return code


def _enable_debug_logging():
    logger = logging.getLogger("ribbon_screen")
    if not any(getattr(h, "_ribbon_screen", False) for h in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        handler._ribbon_screen = True
        logger.addHandler(handler)
    logger.setLevel(logging.DEBUG)


@click.group(cls=ToolkitGroup)
@click.option("--ceiling", "grid_ceiling", type=click.IntRange(min=2), help="Largest grid size for state enumeration.")
@click.option("--cover-ceiling", type=click.IntRange(min=1), help="Largest cover matrix for the exact permanent.")
@click.option("--tol", type=float, help="Width of the certified spectral-radius bracket.")
@click.option("--n-max", type=click.IntRange(min=1), help="Longest trace sequence.")
@click.option("--workers", type=click.IntRange(min=1), help="Worker processes.")
@click.option("--format", "output_format", type=click.Choice(OUTPUT_FORMATS), help="Output format.")
@click.option("--sheet-shift", type=click.Choice(["1", "-1"]), help="Sheet change when crossing a knot segment.")
@click.option("--b", "volume_ratio_b", type=float, help="Entropy-volume constant b for rule R8.")
@click.option("--systole", help="Systole tag the constant b was derived for.")
@click.option("--experimental-cover", is_flag=True, help="Enable the cover-rank rule R9.")
@click.option("--verbose", is_flag=True, help="Debug logging on stderr.")
@click.pass_context
def cli(ctx, sheet_shift, experimental_cover, verbose, **options):
    if verbose:
        _enable_debug_logging()
    base = ctx.obj if isinstance(ctx.obj, RunConfig) else DEFAULT_CONFIG
    ctx.obj = base.replace(
        sheet_shift=int(sheet_shift) if sheet_shift else None,
        experimental_cover_rule=True if experimental_cover else None,
        **options,
    )


def _emit(config, command, payload, human):
    click.echo(report.render(command, payload, human, config.output_format), nl=False)


@cli.command()
@click.argument("grid", type=input_file)
@click.pass_obj
def homology(config, grid):
    """Knot Floer homology, genus, fiberedness and Δ of a grid."""
    config = config.replace(subcommand="homology", inputs=(str(grid),))
    result = compute_homology(parse_grid(grid.read_text()), config)
    _emit(config, "homology", report.homology_payload(result), report.homology_human)


@cli.command()
@click.argument("grid", type=input_file)
@click.option("-n", "sheets", type=click.IntRange(min=1), required=True, help="Number of sheets.")
@click.option("--homology/--no-homology", "with_homology", default=False, help="Also compute the cover complex.")
@click.pass_obj
def cover(config, grid, sheets, with_homology):
    """Generator count of the n-fold cyclic branched cover of a grid."""
    config = config.replace(subcommand="cover", inputs=(str(grid),))
    result = cover_report(parse_grid(grid.read_text()), sheets, config, with_homology)
    _emit(config, "cover", report.cover_payload(result), report.cover_human)


@cli.command()
@click.argument("matrix", type=input_file)
@click.pass_obj
def dilatation(config, matrix):
    """Certified spectral radius and trace-limit sequence of a train-track matrix."""
    config = config.replace(subcommand="dilatation", inputs=(str(matrix),))
    estimate = trace_limit_check(parse_matrix(matrix.read_text()), config.n_max, config)
    _emit(config, "dilatation", report.dilatation_payload(estimate), report.dilatation_human)


def _parse_params(pairs):
    params = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise BoundParameterError(f"expected key=value, got {pair!r}")
        if key in params:
            raise BoundParameterError(f"{key} given twice")
        params[key] = value
    return params


@cli.command()
@click.argument("name")
@click.argument("params", nargs=-1)
@click.pass_obj
def bounds(config, name, params):
    """Evaluate a named bound, e.g. ``bounds volume-arc g=1 delta=6``."""
    config = config.replace(subcommand="bounds", inputs=(name, *params))
    result = evaluate_bound(name, _parse_params(params))
    _emit(config, "bounds", report.bound_payload(result), report.bound_human)


def _database(config, path):
    return prepare_database(load_database(path.read_text()), config)


@cli.command()
@click.argument("database", type=input_file)
@click.option("--target", required=True, help="Name of the knot K.")
@click.pass_obj
def screen(config, database, target):
    """Screen every knot of a database as a candidate J <= target."""
    config = config.replace(subcommand="screen", inputs=(str(database),))
    records = _database(config, database)
    verdicts = screen_database(find_record(records, target), records, config)
    payload = report.screen_payload(target, verdicts, summarize(verdicts))
    _emit(config, "screen", payload, report.screen_human)


@cli.command()
@click.argument("database", type=input_file)
@click.argument("names", nargs=-1, required=True)
@click.pass_obj
def chain(config, database, names):
    """Screen a proposed descending chain K_1 >= K_2 >= ... link by link."""
    config = config.replace(subcommand="chain", inputs=(str(database), *names))
    records = _database(config, database)
    result = screen_chain([find_record(records, name) for name in names], config)
    _emit(config, "chain", report.chain_payload(result), report.chain_human)


@cli.command()
@click.pass_context
def selftest(ctx):
    """Run the invariant suite on the bundled data."""
    config = ctx.obj.replace(subcommand="selftest")
    results = run_selftest(config)
    _emit(config, "selftest", report.selftest_payload(results), report.selftest_human)
    if not all(passed for _, passed, _ in results):
        ctx.exit(3)


def main(argv=None, defaults=None):
    """Console entry point; returns the process exit code."""
    return cli.main(args=argv, obj=defaults, standalone_mode=False, prog_name="ribbon-screen")
