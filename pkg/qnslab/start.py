#!python
"""
Entrypoint for running experiments from the command line.

Exit status: 0 on success, 2 for configuration (or usage) errors, 3 when a numerical guard
tripped (Picard divergence, inconsistent check), 4 for I/O and file format errors.
"""
import logging

import click

from qnslab.config import init_logging, load_experiment, parse_list, resolve_name
from qnslab.engine import ExperimentEngine, check_manifest
from qnslab.exception import ConfigError, FormatError, NumericalGuard

__authors__ = ['qnslab contributors']
__copyright__ = "Copyright 2026 qnslab contributors"
__license__ = """Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

  http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License."""

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

logger = logging.getLogger(__name__)


def exit_code(error):
    """
    Map an exception to the process exit status.

    >>> exit_code(ConfigError('x')), exit_code(FormatError('x')), exit_code(IOError('x'))
    (2, 4, 4)
    """
    if isinstance(error, ConfigError):
        return EXIT_CONFIG
    if isinstance(error, NumericalGuard):
        return EXIT_NUMERICAL
    if isinstance(error, (FormatError, IOError, OSError)):
        return EXIT_IO
    return None


def overrides_from_options(seed=None, resolution=None, alpha=None, threads=None):
    """
    CLI flags as config overrides (None entries are skipped by the loader).

    @raise ConfigError: If the alpha list does not parse as numbers.
    """
    try:
        alphas = None if alpha is None else ', '.join(repr(a) for a in parse_list(alpha))
    except ValueError as e:
        raise ConfigError('Invalid --alpha list %r: %s' % (alpha, e))
    return {
        ('corpus', 'seed'): None if seed is None else str(seed),
        ('grid', 'resolution'): None if resolution is None else str(resolution),
        ('corpus', 'alphas'): alphas,
        ('output', 'threads'): None if threads is None else str(threads),
    }


def engine_from_options(options):
    """
    Gets a configured L{ExperimentEngine} from the collected command-line options.

    The output root is C{--out}, else C{QNS_OUT}, else C{output.root} from the config.

    @raise ConfigError: For an invalid config or store factory.
    """
    cfg = load_experiment(options['config'], overrides_from_options(
        options['seed'], options['resolution'], options['alpha'], options['threads']))
    root = options['out'] or cfg.get('output', 'root')
    try:
        factory = resolve_name(cfg.get('output', 'store.factory'))
    except (ImportError, AttributeError, ValueError) as e:
        raise ConfigError('Invalid store.factory: %s' % e)
    store = factory(root)
    logger.info("Writing results below %s" % root)
    return ExperimentEngine(cfg, store)


def guarded(ctx, func, *args, **kwargs):
    """
    Run func, turning the known failure classes into exit codes.
    """
    try:
        return func(*args, **kwargs)
    except Exception as e:
        code = exit_code(e)
        if code is None:
            logger.exception(e)
            raise
        logger.error("Run stopped: %s" % e)
        click.echo('Error: %s' % e, err=True)
        ctx.exit(code)


def _run(ctx, subcommand, **options):
    def go():
        engine = engine_from_options(ctx.obj)
        run_id = engine.run(subcommand, **options)
        click.echo(run_id)
    guarded(ctx, go)


@click.group(invoke_without_command=True)
@click.option("-c", "--config", help="Read experiment configuration from FILE (flags override it).", metavar="FILE")
@click.option("-o", "--out", envvar='QNS_OUT', help="Output root directory (default: $QNS_OUT or output.root).",
              metavar="DIR")
@click.option("--seed", type=int, help="Run seed (overrides corpus.seed).", metavar="N")
@click.option("--resolution", type=int, help="Grid nodes per axis.", metavar="N")
@click.option("--alpha", help="Comma separated alpha list (overrides corpus.alphas).", metavar="LIST")
@click.option("--threads", type=int, help="Worker threads for independent cells.", metavar="N")
@click.option("--check", help="Recompute the run described by MANIFEST and compare its tables.", metavar="MANIFEST")
@click.option("-l", "--logfile", help="Log to specified file (unless logging configured in config file).", metavar="FILE")
@click.option("--debug", is_flag=True, default=False, help="Sets logging to debug (unless logging configured in config file).")
@click.pass_context
def main(ctx, config, out, seed, resolution, alpha, threads, check, logfile, debug):
    """
    Run a qnslab experiment.

    Options before the subcommand configure the run; the subcommand picks the study.
    """
    guarded(ctx, init_logging, logfile=logfile, loglevel=logging.DEBUG if debug else logging.INFO,
            configfile=config)
    ctx.obj = {'config': config, 'out': out, 'seed': seed, 'resolution': resolution, 'alpha': alpha,
               'threads': threads}
    if check:
        count = guarded(ctx, check_manifest, check)
        click.echo('%d tables match' % count)
    elif ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())


@main.command()
@click.option("--spec", help="Generate only this field spec (default: the corpus).", metavar="SPEC")
@click.pass_context
def gen(ctx, spec):
    """Write corpus fields as QNSF1 files."""
    _run(ctx, 'gen', spec=spec)


@main.command()
@click.pass_context
def norms(ctx):
    """All-space norm sweep over the alpha list and the corpus."""
    _run(ctx, 'norms')


@main.command()
@click.pass_context
def equiv(ctx):
    """Tent-characterisation ratio study."""
    _run(ctx, 'equiv')


@main.command()
@click.pass_context
def inclusions(ctx):
    """Morrey, Besov and alpha-ordering inclusion constants."""
    _run(ctx, 'inclusions')


@main.command()
@click.option("--schur", is_flag=True, default=False, help="Also tabulate the Schur kernel masses.")
@click.pass_context
def lemmas(ctx, schur):
    """Duhamel estimate and bilinear bound checks."""
    _run(ctx, 'lemmas', schur=schur or None)


@main.command()
@click.pass_context
def divrep(ctx):
    """Divergence representation of the corpus."""
    _run(ctx, 'divrep')


@main.command()
@click.pass_context
def solve(ctx):
    """Picard solve with diagnostics, residuals and the stepper cross-check."""
    _run(ctx, 'solve')


@main.command()
@click.pass_context
def vanish(ctx):
    """Truncated norm profiles as the horizon shrinks."""
    _run(ctx, 'vanish')


@main.command()
@click.pass_context
def calibrate(ctx):
    """Bisect for the smallness threshold of the configured initial data."""
    _run(ctx, 'calibrate')


if __name__ == '__main__':
    main()
