"""
Command line for NAGI Lab.

Installed as `nagi-lab`; the same click commands are exported in `commands`
so bench can mount them (`bench nagi-lab ...`).

    nagi-lab evolve <task> [--profile paper|desk] [--seed N] [--config FILE] [--out DIR]
    nagi-lab evolve --resume RUN_DIR
    nagi-lab test <champion> [--sims N] [--seed N] [--out FILE]
    nagi-lab inspect <champion> [--out DIR]
    nagi-lab export-curves <run-dir> [--out DIR]
    nagi-lab acceptance <task> [--seeds N]
"""

import functools
import logging
import sys

import click

from nagi_lab import __version__
from nagi_lab.api import harness
from nagi_lab.config.profiles import PROFILE_NAMES, TASK_IDS
from nagi_lab.exceptions import NagiError
from nagi_lab.utils.logger import LOG_FORMAT


def handle_errors(fn):
    """Report NagiError as a one-line message and exit with its code."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except NagiError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(e.exit_code)

    return wrapper


@click.command("evolve")
@click.argument("task", required=False, type=click.Choice(TASK_IDS, case_sensitive=False))
@click.option("--profile", type=click.Choice(PROFILE_NAMES), default=None, help="Run profile (default: paper)")
@click.option("--seed", type=int, default=None, help="Master seed (default: 0)")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="JSON config overrides")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Run directory")
@click.option("--resume", type=click.Path(file_okay=False), default=None, help="Continue a run from its latest checkpoint")
@click.option("--workers", type=int, default=None, help="Evaluation processes")
@handle_errors
def evolve(task, profile, seed, config_path, out_dir, resume, workers):
    """Evolve agents for TASK and write a run directory."""
    if not task and not resume:
        raise click.UsageError("TASK is required unless --resume is given")
    run_dir = harness.cmd_evolve(task, config_path, seed, out_dir, profile, resume, workers)
    click.echo(str(run_dir))


@click.command("test")
@click.argument("champion", type=click.Path(dir_okay=False))
@click.option("--sims", "n_sims", type=int, default=harness.DEFAULT_TEST_SIMULATIONS, help="Number of test simulations")
@click.option("--seed", type=int, default=None, help="Simulation seed (default: 0)")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Report CSV path")
@handle_errors
def test(champion, n_sims, seed, out):
    """Run test simulations of a CHAMPION file and write the report CSV."""
    click.echo(str(harness.cmd_test(champion, n_sims, seed, out)))


@click.command("inspect")
@click.argument("champion", type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Output directory")
@handle_errors
def inspect(champion, out_dir):
    """Write the topology of a CHAMPION as JSON and Graphviz DOT."""
    for path in harness.cmd_inspect(champion, out_dir):
        click.echo(str(path))


@click.command("export-curves")
@click.argument("run_dir", type=click.Path(file_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Output directory")
@handle_errors
def export_curves(run_dir, out_dir):
    """Export min/mean/max learning curves of RUN_DIR."""
    for path in harness.cmd_export_curves(run_dir, out_dir):
        click.echo(str(path))


@click.command("acceptance")
@click.argument("task", type=click.Choice(TASK_IDS, case_sensitive=False))
@click.option("--seeds", type=int, default=5, help="Number of master seeds")
@click.option("--sims", "n_sims", type=int, default=harness.DEFAULT_TEST_SIMULATIONS, help="Test simulations per champion")
@click.option("--out", "out_root", type=click.Path(file_okay=False), default=None, help="Parent directory of the runs")
@handle_errors
def acceptance(task, seeds, n_sims, out_root):
    """Desk-profile acceptance runs of TASK over several seeds."""
    from nagi_lab.utils.acceptance import run_acceptance

    passed = run_acceptance(task, seeds=seeds, n_sims=n_sims, out_root=out_root)
    sys.exit(0 if passed else 1)


commands = [evolve, test, inspect, export_curves, acceptance]


@click.group()
@click.version_option(__version__, prog_name="nagi-lab")
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr")
def cli(verbose):
    if verbose:
        logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)


for command in commands:
    cli.add_command(command)
