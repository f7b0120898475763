"""
Main application entry point for the copula rank-correlation engine.
Provides CLI interface for evaluating, sweeping, inverting and estimating
Kendall's tau and Spearman's rho of skew-elliptical copulas.
"""

import click
from rich.console import Console
from rich.table import Table
from pathlib import Path
import functools
import json
import logging
import sys

from config.settings import LOG_LEVEL, LOG_FILE, REPORT_OUTPUT_DIR
from config.copula_constants import (
    DEFAULT_QMC_POINTS,
    DEFAULT_QMC_REPLICATES,
    DEFAULT_QMC_SEED,
    MIN_ESTIMATE_ROWS,
    FAMILY_SHORTCUTS,
    CANONICAL_FAMILIES,
    SWEEP_PRESETS,
    EXIT_INPUT_ERROR,
    EXIT_NUMERIC_ERROR,
    EXIT_SELFTEST_FAILED
)
from modules.errors import CopulaError, DomainError, OutOfAttainableRange, SpecValidationError
from modules.estimate.moment_estimator import MomentEstimator
from modules.mixing.mixing_distribution import MixingKind
from modules.qmc.qmc_integrator import QmcConfig
from modules.rankcorr.copula_spec import Measure, Method, copula_spec_from_document
from modules.rankcorr.rank_correlation import RankCorrelationCalculator
from modules.rankcorr.rank_curves import parse_rho_grid, rank_curve, preset_curves
from modules.reports.report_generator import ReportGenerator
from modules.sampler.empirical import read_csv_sample
from modules.selftest.self_test import SelfTestRunner, LEVELS, FAULTS

logger = logging.getLogger(__name__)
console = Console()
err_console = Console(stderr=True)

METHODS = {'thm': Method.THM_EXPECTATION, 'cor': Method.COR_BIVARIATE}
MEASURES = {'tau': [Measure.KENDALL_TAU], 'rhos': [Measure.SPEARMAN_RHO],
            'both': [Measure.KENDALL_TAU, Measure.SPEARMAN_RHO]}


def setup_logging():
    """Log to LOG_FILE (if set) and stderr; stdout is reserved for JSON and CSV output."""
    handlers = [logging.StreamHandler(sys.stderr)]
    if LOG_FILE:
        handlers.insert(0, logging.FileHandler(LOG_FILE))
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL, logging.WARNING),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True
    )


def handles_errors(command):
    """Map CopulaError subclasses to their exit codes with a message on stderr."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except OutOfAttainableRange as e:
            low, high = e.attainable
            err_console.print(f"[red]✗ {e}[/red]")
            err_console.print(f"  Attainable range: [{low:.6f}, {high:.6f}]")
            code = e.exit_code
        except CopulaError as e:
            err_console.print(f"[red]✗ {e}[/red]")
            code = e.exit_code
        except OSError as e:
            err_console.print(f"[red]✗ {e}[/red]")
            code = EXIT_INPUT_ERROR
        except ArithmeticError as e:
            logger.error(f"Numerical failure: {e}")
            err_console.print(f"[red]✗ Numerical failure: {e}[/red]")
            code = EXIT_NUMERIC_ERROR
        click.get_current_context().exit(code)
    return wrapper


def spec_options(with_rho=True):
    """Copula spec flags: a JSON file and/or inline overrides."""
    def decorate(command):
        options = [
            click.option('--spec', 'spec_file', type=click.Path(dir_okay=False),
                         help='JSON copula spec document'),
            click.option('--family', type=click.Choice(list(CANONICAL_FAMILIES) + list(FAMILY_SHORTCUTS)),
                         help='Copula family'),
            click.option('--skew', help='Skewness pair "s1,s2"'),
            click.option('--nu', type=float, help='Degrees of freedom (t-type shortcuts)'),
            click.option('--mixing-kind', type=click.Choice([k.value for k in MixingKind]),
                         help='Mixing distribution (raw mn/msn)'),
            click.option('--shape', type=float, help='Mixing shape'),
            click.option('--rate', type=float, help='Mixing rate'),
        ]
        if with_rho:
            options.append(click.option('--rho', type=float, help='Pseudo-correlation'))
        for option in reversed(options):
            command = option(command)
        return command
    return decorate


def qmc_options(command):
    """QMC accuracy flags shared by every numerical command."""
    options = [
        click.option('--points', type=int, default=DEFAULT_QMC_POINTS, show_default=True,
                     help='QMC points per replicate (power of two)'),
        click.option('--replicates', type=int, default=DEFAULT_QMC_REPLICATES, show_default=True,
                     help='Randomized QMC replicates'),
        click.option('--seed', type=int, default=DEFAULT_QMC_SEED, show_default=True, help='QMC seed'),
        click.option('--method', type=click.Choice(list(METHODS)), default='cor', show_default=True,
                     help='Skew-normal mixture evaluation path'),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def build_document(spec_file=None, family=None, rho=None, skew=None, nu=None,
                   mixing_kind=None, shape=None, rate=None):
    """
    Merge a JSON spec file with inline flags into one spec document.

    Returns:
        dict accepted by copula_spec_from_document
    """
    document = {}
    if spec_file:
        try:
            with open(spec_file) as f:
                document = json.load(f)
        except FileNotFoundError:
            raise SpecValidationError(f"Spec file not found: {spec_file}")
        except json.JSONDecodeError as e:
            raise SpecValidationError(f"Malformed JSON in {spec_file}: {e}")
        if not isinstance(document, dict):
            raise SpecValidationError("Spec document must be a JSON object")

    if family is not None:
        document['family'] = family
    if rho is not None:
        document['rho'] = rho
    if skew is not None:
        try:
            document['skew'] = [float(s) for s in skew.split(',')]
        except ValueError:
            raise SpecValidationError(f"--skew must look like s1,s2, got {skew!r}")
    if nu is not None:
        document['nu'] = nu
    if mixing_kind is not None:
        mixing = {'kind': mixing_kind}
        if shape is not None:
            mixing['shape'] = shape
        if rate is not None:
            mixing['rate'] = rate
        document['mixing'] = mixing

    if 'family' not in document:
        raise SpecValidationError("A copula family is required (--family or --spec)")
    return document


def make_cfg(points, replicates, seed):
    return QmcConfig(points=points, replicates=replicates, seed=seed)


def echo_json(payload):
    click.echo(json.dumps(payload, indent=2))


@click.group()
def cli():
    """Copula Rank Correlations - Kendall's tau and Spearman's rho of skew-elliptical copulas."""
    setup_logging()


@cli.command('eval')
@spec_options()
@qmc_options
@click.option('--measure', type=click.Choice(list(MEASURES)), default='both', show_default=True,
              help='Rank correlation measure')
@handles_errors
def eval_command(spec_file, family, skew, nu, mixing_kind, shape, rate, rho,
                 points, replicates, seed, method, measure):
    """Evaluate rank correlations of one copula."""
    spec = copula_spec_from_document(build_document(spec_file, family, rho, skew, nu, mixing_kind, shape, rate))
    calculator = RankCorrelationCalculator(make_cfg(points, replicates, seed), METHODS[method])
    results = [calculator.rank_correlation(spec, m) for m in MEASURES[measure]]
    echo_json(ReportGenerator().eval_payload(results, spec))


@cli.command('curve')
@spec_options(with_rho=False)
@qmc_options
@click.option('--rho-grid', default='-1:1:0.05', show_default=True, help='Grid lo:hi:step')
@click.option('--out', type=click.Path(dir_okay=False), help='CSV file (stdout if omitted)')
@handles_errors
def curve_command(spec_file, family, skew, nu, mixing_kind, shape, rate,
                  points, replicates, seed, method, rho_grid, out):
    """Tabulate tau and rho_S over a grid of pseudo-correlations."""
    document = build_document(spec_file, family, None, skew, nu, mixing_kind, shape, rate)
    spec = copula_spec_from_document(document, require_rho=False)
    grid = parse_rho_grid(rho_grid)
    calculator = RankCorrelationCalculator(make_cfg(points, replicates, seed), METHODS[method])
    frame = rank_curve(spec, grid, calculator)

    if out:
        path = Path(out)
        filepath = ReportGenerator(path.parent).save_curve(path.name, frame)
        err_console.print(f"[green]✓ Curve saved to: {filepath}[/green]")
    else:
        click.echo(ReportGenerator().curve_csv(frame), nl=False)


@cli.command('sweep')
@click.option('--preset', required=True, type=click.Choice(sorted(SWEEP_PRESETS)), help='Curve family preset')
@click.option('--out-dir', type=click.Path(file_okay=False), default=str(REPORT_OUTPUT_DIR),
              show_default=True, help='Output directory')
@click.option('--rho-grid', default='-1:1:0.05', show_default=True, help='Grid lo:hi:step')
@qmc_options
@handles_errors
def sweep_command(preset, out_dir, rho_grid, points, replicates, seed, method):
    """Write one curve CSV per member of a preset curve family."""
    grid = parse_rho_grid(rho_grid)
    calculator = RankCorrelationCalculator(make_cfg(points, replicates, seed), METHODS[method])
    rg = ReportGenerator(out_dir)

    table = Table(title=f"Sweep: {preset}")
    table.add_column("Curve", style="cyan")
    table.add_column("tau(-1)", style="yellow", justify="right")
    table.add_column("tau(1)", style="yellow", justify="right")
    table.add_column("File", style="green")

    for label, spec in preset_curves(preset):
        frame = rank_curve(spec, grid, calculator)
        filepath = rg.save_curve(f"{preset}_{label}.csv", frame)
        table.add_row(label, f"{frame['tau'].iloc[0]:.4f}", f"{frame['tau'].iloc[-1]:.4f}", str(filepath))

    console.print(table)
    console.print(f"[green]✓ Wrote {table.row_count} curves to {rg.output_dir}[/green]")


@cli.command('invert')
@spec_options(with_rho=False)
@qmc_options
@click.option('--target', required=True, type=float, help='Target rank correlation')
@click.option('--measure', type=click.Choice(['tau', 'rhos']), default='tau', show_default=True,
              help='Measure of the target')
@click.option('--equi-skew-rhos', type=float,
              help='Spearman target; with it --target is Kendall and (rho, s) with skew (s, s) is solved')
@click.option('--tol', type=float, help='Residual tolerance [default: 10 x integration error, at least 1e-6]')
@handles_errors
def invert_command(spec_file, family, skew, nu, mixing_kind, shape, rate,
                   points, replicates, seed, method, target, measure, equi_skew_rhos, tol):
    """Recover rho from a target rank correlation."""
    document = build_document(spec_file, family, None, skew, nu, mixing_kind, shape, rate)
    spec = copula_spec_from_document(document, require_rho=False)
    estimator = MomentEstimator(make_cfg(points, replicates, seed), METHODS[method])
    rg = ReportGenerator()

    if equi_skew_rhos is not None:
        outcome = estimator.invert_equi_skew(target, equi_skew_rhos, spec.family, spec.mixing, tol)
        echo_json(rg.equi_skew_payload(outcome, target, equi_skew_rhos, spec))
        return

    chosen = MEASURES[measure][0]
    result = estimator.invert_rho(target, spec.family, spec.skew, spec.mixing, chosen, tol)
    echo_json(rg.invert_payload(result, spec))


@cli.command('estimate')
@spec_options(with_rho=False)
@qmc_options
@click.option('--data', required=True, type=click.Path(dir_okay=False), help='Two-column CSV sample')
@click.option('--tol', type=float, help='Residual tolerance [default: 10 x integration error, at least 1e-6]')
@handles_errors
def estimate_command(spec_file, family, skew, nu, mixing_kind, shape, rate,
                     points, replicates, seed, method, data, tol):
    """Estimate rho from empirical tau and rho_S of a data file."""
    document = build_document(spec_file, family, None, skew, nu, mixing_kind, shape, rate)
    spec = copula_spec_from_document(document, require_rho=False)
    sample = read_csv_sample(data)
    if sample.n < MIN_ESTIMATE_ROWS:
        raise DomainError(f"Estimation needs at least {MIN_ESTIMATE_ROWS} rows, got {sample.n}")

    estimator = MomentEstimator(make_cfg(points, replicates, seed), METHODS[method])
    outcome = estimator.estimate_from_sample(sample, spec.family, spec.skew, spec.mixing, tol)
    echo_json(ReportGenerator().estimate_payload(outcome, spec, data))


@cli.command('selftest')
@click.option('--level', type=click.Choice(LEVELS), default='quick', show_default=True, help='Suite to run')
@click.option('--save', is_flag=True, help='Also save the report under REPORT_OUTPUT_DIR')
@click.option('--inject-fault', type=click.Choice(FAULTS), hidden=True)
@click.pass_context
def selftest_command(ctx, level, save, inject_fault):
    """Run the built-in identity and consistency checks."""
    runner = SelfTestRunner(level, fault=inject_fault)
    checks = runner.run()

    rg = ReportGenerator()
    report_text = rg.selftest_report(level, checks)
    click.echo(report_text)
    err_console.print(rg.selftest_table(checks))

    if save:
        filepath = rg.save_report(f"selftest_{level}.txt", report_text)
        err_console.print(f"[green]✓ Report saved to: {filepath}[/green]")

    if runner.passed:
        err_console.print("[green]✓ All checks passed[/green]")
    else:
        failed = [check.name for check in checks if not check.passed]
        err_console.print(f"[red]✗ {len(failed)} check(s) failed: {', '.join(failed)}[/red]")
        ctx.exit(EXIT_SELFTEST_FAILED)


if __name__ == '__main__':
    cli()
