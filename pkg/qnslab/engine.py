"""
Core experiment logic, abstracted from the command-line front end.

The engine binds an L{qnslab.config.ExperimentConfig} to a L{qnslab.store.ResultStore}.  Each
subcommand is one handler method; a handler computes its tables (independent corpus cells may
run in a worker pool), writes them through the store from the calling thread, and the engine
closes the run with a JSON manifest holding the materialized config, the options, the seed and
the library versions.  Every output name carries the config hash.

Reruns with the same config write byte-identical documents; only the manifest C{timestamp}
field (and the run directory name) differ.
"""
import csv
import datetime
import io
import json
import logging
import math
import os.path
import platform

import numpy as np
import scipy

import qnslab
from qnslab import duhamel, fields, solver, spaces, spectral
from qnslab.config import load_experiment
from qnslab.duhamel import Trajectory
from qnslab.exception import ConfigError, InconsistencyError
from qnslab.spaces import BallFamily, TimeMesh
from qnslab.spectral import Grid, ScalarField, VectorField
from qnslab.store import ResultStore
from qnslab.store.memory import MemoryStore
from qnslab.util.concurrency import ordered_map

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

SUBCOMMANDS = ('gen', 'norms', 'equiv', 'inclusions', 'lemmas', 'divrep', 'solve', 'vanish', 'calibrate')

MORREY_LIMIT_LABEL = '1(limit)'
CHECK_TOLERANCE = 1e-12
SCHUR_ALPHAS = (0.0, 0.25, 0.5, 0.75, 0.95)
SCHUR_ZETAS = (1.0, 4.0, 16.0, 64.0)
# Seeded trajectories in the lemma corpus.
LEMMA_TRAJECTORIES = 10
BILINEAR_PAIRS = 3

logger = logging.getLogger(__name__)


def norm_columns(n_dims=2):
    """
    Columns of a norm report.

    >>> norm_columns(2)[:5]
    ('norm_kind', 'alpha', 'T', 'value', 'max_ball_cx')
    """
    centers = ('max_ball_cx', 'max_ball_cy', 'max_ball_cz')[:n_dims]
    return ('norm_kind', 'alpha', 'T', 'value') + centers + (
        'max_ball_r', 'n_balls', 'n_time_levels', 'resolution', 'seed')


NORM_COLUMNS = norm_columns(2)


def library_versions():
    return {'qnslab': qnslab.__version__, 'numpy': np.__version__, 'scipy': scipy.__version__,
            'python': platform.python_version()}


def utc_timestamp():
    return datetime.datetime.utcnow().strftime('%Y%m%dT%H%M%SZ')


class Run(object):
    """
    Output collector for one subcommand run.

    @ivar outputs: Names of the documents written so far.
    @type outputs: C{list}

    @ivar warnings: Warning records copied into the manifest.
    @type warnings: C{list}
    """

    def __init__(self, store, run_id, config_hash):
        self.store = store
        self.run_id = run_id
        self.config_hash = config_hash
        self.outputs = []
        self.warnings = []

    def name(self, stem, ext):
        return '%s-%s.%s' % (stem, self.config_hash, ext)

    def table(self, stem, columns, rows):
        name = self.name(stem, 'csv')
        self.store.write_table(self.run_id, name, columns, rows)
        self.outputs.append(name)

    def json(self, stem, obj):
        name = self.name(stem, 'json')
        self.store.write_json(self.run_id, name, obj)
        self.outputs.append(name)

    def field(self, stem, obj):
        name = self.name(stem, 'qnst' if isinstance(obj, Trajectory) else 'qnsf')
        self.store.write_field(self.run_id, name, obj)
        self.outputs.append(name)

    def text(self, stem, ext, text):
        name = self.name(stem, ext)
        self.store.put(self.run_id, name, text)
        self.outputs.append(name)

    def warn(self, message):
        logger.warning(message)
        self.warnings.append(message)


class ExperimentEngine(object):
    """
    Runs subcommands against an experiment config and a result store.

    @ivar cfg: The experiment configuration.
    @type cfg: L{qnslab.config.ExperimentConfig}

    @ivar store: Where run output goes.
    @type store: L{qnslab.store.ResultStore}
    """

    def __init__(self, cfg, store, timestamp=None):
        self.log = logging.getLogger('%s.%s' % (self.__class__.__module__, self.__class__.__name__))
        if not isinstance(store, ResultStore):
            raise TypeError("store must be a ResultStore, got %r" % (store,))
        self.cfg = cfg
        self.store = store
        self.timestamp = timestamp
        self.seed = cfg.seed
        self.threads = cfg.threads
        self.grid = Grid(cfg.n_dims, cfg.resolution, cfg.box_length)
        self.family = BallFamily.from_config(self.grid, cfg)
        self.rho = cfg.getfloat('time', 'rho')
        self.levels = cfg.getint('time', 'levels')
        self.mesh = TimeMesh.for_horizon(self.grid, np.inf, self.rho, self.levels)
        self.handlers = {
            'gen': self.gen,
            'norms': self.norms,
            'equiv': self.equiv,
            'inclusions': self.inclusions,
            'lemmas': self.lemmas,
            'divrep': self.divrep,
            'solve': self.solve,
            'vanish': self.vanish,
            'calibrate': self.calibrate,
        }

    def corpus(self):
        """
        (spec, field) pairs of the configured corpus.

        @raise ConfigError: If a corpus spec is malformed or invalid on the grid.
        """
        try:
            specs = fields.corpus_specs(self.cfg.get('corpus', 'fields'), self.seed)
            return [(spec, fields.generate(spec, self.grid)) for spec in specs]
        except (ValueError, KeyError) as e:
            raise ConfigError('Invalid corpus.fields: %s' % e)

    def _new_run_id(self, subcommand, timestamp):
        base = '%s-%s-%s' % (subcommand, timestamp, self.cfg.digest())
        existing = self.store.runs()
        run_id, k = base, 1
        while run_id in existing:
            k += 1
            run_id = '%s-%d' % (base, k)
        return run_id

    def run(self, subcommand, **options):
        """
        Execute one subcommand and write its manifest.

        @return: The run id.
        @raise ValueError: For an unknown subcommand.
        """
        if subcommand not in self.handlers:
            raise ValueError("Unknown subcommand: %r" % (subcommand,))
        options = dict((k, v) for k, v in options.items() if v is not None)
        timestamp = self.timestamp or utc_timestamp()
        run = Run(self.store, self._new_run_id(subcommand, timestamp), self.cfg.digest())
        self.log.info("Starting %s run %s" % (subcommand, run.run_id))
        self.handlers[subcommand](run, **options)
        manifest = {
            'subcommand': subcommand,
            'options': options,
            'config': self.cfg.as_dict(),
            'config_hash': self.cfg.digest(),
            'seed': self.seed,
            'versions': library_versions(),
            'timestamp': timestamp,
            'outputs': sorted(run.outputs),
            'warnings': run.warnings,
        }
        run.json('manifest', manifest)
        self.log.info("Finished %s run %s (%d outputs)" % (subcommand, run.run_id, len(run.outputs)))
        return run.run_id

    def _records(self, estimates):
        return [e.as_record(self.cfg.resolution, self.seed, self.grid.n_dims) for e in estimates]

    def gen(self, run, spec=None):
        """
        Write corpus fields (or the single C{spec}) as QNSF1 files with a summary table.
        """
        if spec is not None:
            try:
                parsed = fields.FieldSpec.parse(spec)
                items = [(parsed, fields.generate(parsed, self.grid))]
            except (ValueError, KeyError) as e:
                raise ConfigError('Invalid field spec %r: %s' % (spec, e))
        else:
            items = self.corpus()
        rows = []
        for i, (s, f) in enumerate(items):
            run.field('field-%d' % i, f)
            mean = 0.0 if isinstance(f, VectorField) else f.mean()
            rows.append((i, str(s), mean, f.max_abs(), spectral.l2_norm(f)))
        run.table('gen', ('field', 'spec', 'mean', 'max_abs', 'L2'), rows)

    def _field_norms(self, f):
        family, mesh, alphas = self.family, self.mesh, self.cfg.alphas
        estimates = []
        for alpha in alphas:
            estimates.append(spaces.q_alpha_seminorm(f, alpha, family))
            estimates.append(spaces.q_inverse_norm(f, alpha, np.inf, family, mesh))
            estimates.append(spaces.campanato_seminorm(f, alpha, family))
        limit = spaces.morrey_norm(f, 2, family)
        limit.kind, limit.alpha = 'Q_inverse', MORREY_LIMIT_LABEL
        estimates.append(limit)
        estimates.append(spaces.morrey_norm(f, 2, family))
        estimates.append(spaces.morrey_norm(f, 4, family))
        estimates.append(spaces.besov_norm(f, mesh))
        return estimates

    def norms(self, run):
        """
        All-space norm sweep: one CSV (and its JSON mirror) per corpus field.
        """
        corpus = self.corpus()
        columns = norm_columns(self.grid.n_dims)
        results = ordered_map(lambda item: self._field_norms(item[1]), corpus, self.threads)
        for i, estimates in enumerate(results):
            records = self._records(estimates)
            run.table('norms-f%d' % i, columns, records)
            run.json('norms-f%d' % i, [dict((c, r[c]) for c in columns) for r in records])

    def equiv(self, run):
        """
        The four tent characterisations per corpus field and their extreme pairwise ratios.
        """
        alpha = self.cfg.getfloat('corpus', 'tent_alpha')
        choices = spectral.TENT_CHOICES

        def cell(item):
            f = item[1]
            values = [spaces.tent_characterization(f, alpha, c, self.family, self.mesh).value
                      for c in choices]
            q = spaces.q_inverse_norm(f, alpha, np.inf, self.family, self.mesh).value
            return values, q

        rows = []
        for i, (values, q) in enumerate(ordered_map(cell, self.corpus(), self.threads)):
            ratios = [a / b for a in values for b in values if b > 0]
            rows.append([i, alpha] + values + [q, max(ratios) if ratios else 0.0,
                                               min(ratios) if ratios else 0.0])
        columns = ['field', 'alpha'] + ['Tent_%s' % c for c in choices] + ['Q_inverse', 'max_ratio', 'min_ratio']
        run.table('equiv', columns, rows)

    def _chain_alpha(self, p):
        n = self.grid.n_dims
        admissible = [a for a in self.cfg.alphas if a * p < n]
        return max(admissible) if admissible else 0.0

    def inclusions(self, run):
        """
        Morrey and Besov against Q_alpha^{-1}, the ordering in alpha, and the
        L^n, Besov_p, Q_alpha^{-1} chain.
        """
        alphas = sorted(self.cfg.alphas)
        n = self.grid.n_dims
        p = n + 2

        def cell(item):
            f = item[1]
            morrey = spaces.morrey_norm(f, 2, self.family).value
            besov = spaces.besov_norm(f, self.mesh).value
            qs = [spaces.q_inverse_norm(f, a, np.inf, self.family, self.mesh).value for a in alphas]
            ln = spaces.lebesgue_norm(f, n)
            bp = spaces.besov_p_norm(f, p, self.mesh).value
            qc = spaces.q_inverse_norm(f, self._chain_alpha(p), np.inf, self.family, self.mesh).value
            return morrey, besov, qs, ln, bp, qc

        def ratio(a, b):
            return a / b if b > 0 else 0.0

        rows, chain = [], []
        for i, (morrey, besov, qs, ln, bp, qc) in enumerate(ordered_map(cell, self.corpus(), self.threads)):
            for j, (alpha, q) in enumerate(zip(alphas, qs)):
                following = ratio(q, qs[j + 1]) if j + 1 < len(qs) else None
                rows.append((i, alpha, q, morrey, ratio(q, morrey), besov, ratio(besov, q), following))
            chain.append((i, p, self._chain_alpha(p), ln, bp, qc, ratio(bp, ln), ratio(qc, bp)))
        run.table('inclusions', ('field', 'alpha', 'Q_inverse', 'Morrey2', 'Q_over_Morrey', 'Besov',
                                 'Besov_over_Q', 'Q_over_next_alpha'), rows)
        run.table('chain', ('field', 'p', 'alpha', 'L_n', 'Besov_p', 'Q_inverse', 'Besov_p_over_L_n',
                            'Q_over_Besov_p'), chain)

    def _lemma_fields(self):
        return [fields.generate(fields.FieldSpec('random_smooth', seed=self.seed + k), self.grid)
                for k in range(LEMMA_TRAJECTORIES)]

    def lemmas(self, run, schur=False):
        """
        Measured constants of the Duhamel estimates on a seeded trajectory corpus, the bilinear
        bounds on heat-flow pairs and (with C{schur}) the Schur kernel masses.
        """
        alpha = self.cfg.getfloat('solver', 'alpha')
        mesh = self.mesh
        unit = TimeMesh(1.0, self.rho, self.levels)

        def cell(f):
            l23 = duhamel.lemma23_check(Trajectory.heat_flow(f, mesh), alpha)
            l23r = duhamel.lemma23_check(Trajectory.heat_flow(f, mesh.refined()), alpha)
            l24 = duhamel.lemma24_check(Trajectory.heat_flow(f, unit), alpha, self.family)
            l24r = duhamel.lemma24_check(Trajectory.heat_flow(f, unit.refined()), alpha, self.family)
            return l23, l23r, l24, l24r

        rows23, rows24 = [], []
        for k, (l23, l23r, l24, l24r) in enumerate(ordered_map(cell, self._lemma_fields(), self.threads)):
            rows23.append((self.seed + k, alpha, l23.lhs, l23.rhs, l23.ratio, l23r.ratio))
            rows24.append((self.seed + k, alpha, l24.lhs, l24.J, l24.L1part, l24.ratio, l24r.ratio))
        run.table('lemma23', ('seed', 'alpha', 'lhs', 'rhs', 'ratio', 'refined_ratio'), rows23)
        run.table('lemma24', ('seed', 'alpha', 'lhs', 'J', 'L1part', 'ratio', 'refined_ratio'), rows24)

        rows = []
        for k in range(BILINEAR_PAIRS):
            u, v = [Trajectory.heat_flow(fields.random_div_free(self.grid, seed=self.seed + 2 * k + j), mesh)
                    for j in (0, 1)]
            ratios = duhamel.bilinear_bounds_check(u, v, alpha, mesh.t_cap, self.family, self.threads)
            rows.append((k, alpha, ratios.Linf_ratio, ratios.Carleson_ratio))
        run.table('bilinear', ('pair', 'alpha', 'Linf_ratio', 'Carleson_ratio'), rows)

        if schur:
            table = []
            for a in SCHUR_ALPHAS:
                for row in duhamel.schur_kernel_integrals(a, SCHUR_ZETAS, unit.samples):
                    table.append(tuple(row))
            run.table('schur', ('alpha', 'zeta', 'sup_row', 'sup_column'), table)

    def divrep(self, run):
        """
        Divergence representation of each (mean-removed) scalar corpus field.
        """
        alpha = self.cfg.getfloat('solver', 'alpha')
        n = self.grid.n_dims

        def cell(item):
            f = item[1]
            f = f - f.mean()
            rep = solver.div_representation(f, alpha, self.family)
            q = spaces.q_inverse_norm(f, alpha, np.inf, self.family, self.mesh).value
            return rep, q

        scalars = [item for item in self.corpus() if isinstance(item[1], ScalarField)]
        rows = []
        for i, (rep, q) in enumerate(ordered_map(cell, scalars, self.threads)):
            comps = [e.value for e in rep.estimates]
            rows.append([i, alpha, rep.residual] + comps + [q, max(comps) / q if q > 0 else 0.0])
        columns = ['field', 'alpha', 'residual'] + ['Q_f%d' % (k + 1) for k in range(n)] + [
            'Q_inverse', 'max_ratio']
        run.table('divrep', columns, rows)

    def _solver_setup(self):
        try:
            config = solver.SolverConfig.from_experiment(self.cfg)
            return config, solver.initial_data(config, self.cfg.get('solver', 'initial'))
        except (ValueError, KeyError) as e:
            raise ConfigError('Invalid solver configuration: %s' % e)

    def solve(self, run):
        """
        Picard solve with diagnostics, mild residuals, the stepper cross-check and the pressure.
        """
        config, a = self._solver_setup()
        family = config.family(a.grid)
        u, diag = solver.picard_solve(a, config, family, self.threads)
        run.field('solution', u)
        run.table('diagnostics', solver.DIAGNOSTIC_COLUMNS, diag.as_rows())
        probes = solver.default_probes(u.mesh, config.probes)
        residual = solver.mild_residual(u, a, probes, config.residual_floor)
        u0 = solver.heat_flow_initial(a, u.mesh)
        residual0 = solver.mild_residual(u0, a, probes, config.residual_floor)
        discrepancy = solver.cross_check_timestepper(a, config, u, self.threads)
        run.field('pressure', duhamel.pressure_from_velocity(u[0]))
        if not diag.small:
            run.warn("Data Morrey norm %s exceeds smallness threshold %s; no convergence claim"
                     % (diag.gate_value, config.smallness_threshold))
        elif not diag.converged:
            run.warn("Small data did not contract as expected")
        run.table('solve', ('gate_value', 'small', 'converged', 'mild_residual', 'initial_residual',
                            'stepper_discrepancy', 'horizon', 'iterations'),
                  [(diag.gate_value, diag.small, diag.converged, residual, residual0, discrepancy,
                    config.horizon, config.picard_iterations)])

    def vanish(self, run):
        """
        Truncated norms as the horizon shrinks: Q_alpha^{-1} per alpha and the X_{4,2} profile.
        """
        top = (self.grid.box_length / 8.0) ** 2
        T_list = [top * 4.0 ** (-i) for i in range(self.cfg.getint('corpus', 'vanish_levels'))]

        def cell(item):
            f = item[1]
            rows = []
            for alpha in self.cfg.alphas:
                for T, value in spaces.vanishing_profile(f, alpha, T_list, self.family, self.mesh):
                    rows.append(('Q_inverse', alpha, T, value))
            for T, value in spaces.x42_vanishing_profile(f, T_list, self.family, self.mesh):
                rows.append(('X_42', None, T, value))
            return rows

        rows = []
        for i, cell_rows in enumerate(ordered_map(cell, self.corpus(), self.threads)):
            rows.extend((i,) + r for r in cell_rows)
        run.table('vanish', ('field', 'kind', 'alpha', 'T', 'value'), rows)

    def calibrate(self, run):
        """
        Bisect for the smallness threshold of the configured initial data and store it as a
        config snippet.
        """
        config, a = self._solver_setup()
        result = solver.calibrate_smallness(a, config, threads=self.threads)
        run.table('calibration', ('amplitude', 'threshold', 'resolution', 'initial'),
                  [(result.amplitude, result.threshold, config.resolution, self.cfg.get('solver', 'initial'))])
        run.text('calibration', 'cfg', '[solver]\nsmallness_threshold = %.17g\n' % result.threshold)


def _cells_match(old, new, tolerance):
    try:
        a, b = float(old), float(new)
    except ValueError:
        return old == new
    if math.isnan(a) or math.isnan(b):
        return math.isnan(a) and math.isnan(b)
    if a == b:
        return True
    return abs(a - b) <= tolerance * max(abs(a), abs(b))


def compare_tables(old_text, new_text, tolerance=CHECK_TOLERANCE):
    """
    Cell-by-cell comparison of two CSV documents, numbers at a relative tolerance.

    @return: List of mismatch descriptions (empty when the tables agree).
    """
    old = list(csv.reader(io.StringIO(old_text)))
    new = list(csv.reader(io.StringIO(new_text)))
    if len(old) != len(new):
        return ['row count %d != %d' % (len(old), len(new))]
    problems = []
    for r, (a, b) in enumerate(zip(old, new)):
        if len(a) != len(b):
            problems.append('row %d: %d cells != %d' % (r, len(a), len(b)))
            continue
        for c, (x, y) in enumerate(zip(a, b)):
            if not _cells_match(x, y, tolerance):
                problems.append('row %d col %d: %s != %s' % (r, c, x, y))
    return problems


def check_manifest(manifest_path, tolerance=CHECK_TOLERANCE):
    """
    Recompute a finished run from its manifest and compare every table with the stored one.

    @return: Number of tables compared.
    @raise InconsistencyError: If any table differs beyond the tolerance.
    @raise ConfigError: If the manifest config no longer loads.
    """
    with io.open(manifest_path, 'r', encoding='utf-8') as fp:
        manifest = json.load(fp)
    overrides = {}
    for section, items in manifest['config'].items():
        for key, value in items.items():
            overrides[(section, key)] = value
    cfg = load_experiment(None, overrides)
    if cfg.digest() != manifest['config_hash']:
        raise ConfigError("Manifest config hash %s does not match its config (%s)"
                          % (manifest['config_hash'], cfg.digest()))
    engine = ExperimentEngine(cfg, MemoryStore(), timestamp=manifest['timestamp'])
    run_id = engine.run(manifest['subcommand'], **manifest.get('options', {}))
    directory = os.path.dirname(os.path.abspath(manifest_path))
    compared = 0
    problems = []
    for name in manifest['outputs']:
        if not name.endswith('.csv'):
            continue
        with io.open(os.path.join(directory, name), 'r', encoding='utf-8') as fp:
            old = fp.read()
        for p in compare_tables(old, engine.store.get(run_id, name), tolerance):
            problems.append('%s: %s' % (name, p))
        compared += 1
    if problems:
        for p in problems:
            logger.error("Check mismatch %s" % p)
        raise InconsistencyError("%d mismatches against %s" % (len(problems), manifest_path))
    logger.info("Checked %d tables of %s" % (compared, manifest_path))
    return compared
