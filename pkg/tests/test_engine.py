"""
Tests for the experiment engine and the manifest re-check.
"""
import io
import os.path
import shutil
import tempfile
import unittest

from qnslab.config import load_experiment
from qnslab.engine import ExperimentEngine, MORREY_LIMIT_LABEL, check_manifest, compare_tables
from qnslab.exception import ConfigError, InconsistencyError
from qnslab.spectral import ScalarField
from qnslab.store.directory import make_directory_store
from qnslab.store.memory import MemoryStore

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

RESOURCES = os.path.join(os.path.dirname(__file__), 'resources')
TIMESTAMP = '20260101T000000Z'


def experiment(overrides=None):
    return load_experiment(os.path.join(RESOURCES, 'experiment.cfg'), overrides)


class ExperimentEngineTest(unittest.TestCase):

    def setUp(self):
        self.cfg = experiment()
        self.store = MemoryStore()
        self.engine = ExperimentEngine(self.cfg, self.store, timestamp=TIMESTAMP)
        self.digest = self.cfg.digest()

    def name(self, stem, ext):
        return '%s-%s.%s' % (stem, self.digest, ext)

    def test_requires_store(self):
        self.assertRaises(TypeError, ExperimentEngine, self.cfg, object())

    def test_unknown_subcommand(self):
        self.assertRaises(ValueError, self.engine.run, 'turbulence')

    def test_gen(self):
        """ Test the gen subcommand writes each corpus field and a summary table. """
        run_id = self.engine.run('gen')
        self.assertEqual(run_id, 'gen-%s-%s' % (TIMESTAMP, self.digest))
        names = self.store.names(run_id)
        self.assertIn(self.name('field-0', 'qnsf'), names)
        self.assertIn(self.name('field-1', 'qnsf'), names)
        f = self.store.read_field(run_id, self.name('field-0', 'qnsf'))
        self.assertIsInstance(f, ScalarField)
        self.assertEqual(f.grid.resolution, 16)
        rows = self.store.read_table(run_id, self.name('gen', 'csv'))
        self.assertEqual([r['field'] for r in rows], ['0', '1'])
        self.assertTrue(rows[0]['spec'].startswith('single_mode'))

    def test_gen_single_spec(self):
        run_id = self.engine.run('gen', spec='taylor_green:amplitude=0.5')
        rows = self.store.read_table(run_id, self.name('gen', 'csv'))
        self.assertEqual(len(rows), 1)
        self.assertAlmostEqual(float(rows[0]['max_abs']), 0.5, places=12)
        self.assertRaises(ConfigError, self.engine.run, 'gen', spec='no_such_field')

    def test_manifest(self):
        run_id = self.engine.run('gen')
        manifest = self.store.read_json(run_id, self.name('manifest', 'json'))
        self.assertEqual(manifest['subcommand'], 'gen')
        self.assertEqual(manifest['config_hash'], self.digest)
        self.assertEqual(manifest['seed'], 7)
        self.assertEqual(manifest['timestamp'], TIMESTAMP)
        self.assertIn('numpy', manifest['versions'])
        self.assertEqual(manifest['warnings'], [])
        self.assertEqual(manifest['outputs'], sorted(manifest['outputs']))
        self.assertNotIn(self.name('manifest', 'json'), manifest['outputs'])

    def test_run_id_collision(self):
        first = self.engine.run('gen')
        second = self.engine.run('gen')
        third = self.engine.run('gen')
        self.assertEqual(second, first + '-2')
        self.assertEqual(third, first + '-3')
        self.assertEqual(self.store.runs(), set([first, second, third]))

    def test_bad_corpus(self):
        cfg = experiment({('corpus', 'fields'): 'gaussian_bump:width=-1'})
        engine = ExperimentEngine(cfg, MemoryStore(), timestamp=TIMESTAMP)
        self.assertRaises(ConfigError, engine.run, 'gen')

    def test_norms(self):
        """ Test the norm sweep covers every alpha plus the Morrey limit row. """
        run_id = self.engine.run('norms')
        rows = self.store.read_table(run_id, self.name('norms-f0', 'csv'))
        kinds = [r['norm_kind'] for r in rows]
        self.assertEqual(kinds.count('Q_alpha'), 2)
        self.assertEqual(kinds.count('Q_inverse'), 3)
        self.assertIn(MORREY_LIMIT_LABEL, [r['alpha'] for r in rows])
        self.assertTrue(all(r['seed'] == '7' and r['resolution'] == '16' for r in rows))
        records = self.store.read_json(run_id, self.name('norms-f1', 'json'))
        self.assertEqual(len(records), len(rows))

    def test_solve(self):
        run_id = self.engine.run('solve')
        names = self.store.names(run_id)
        for stem, ext in (('solution', 'qnst'), ('pressure', 'qnsf'), ('diagnostics', 'csv'), ('solve', 'csv')):
            self.assertIn(self.name(stem, ext), names)
        diag = self.store.read_table(run_id, self.name('diagnostics', 'csv'))
        self.assertEqual(len(diag), 2)
        summary = self.store.read_table(run_id, self.name('solve', 'csv'))[0]
        self.assertLess(float(summary['mild_residual']), 1e-10)
        self.assertLess(float(summary['stepper_discrepancy']), 1e-10)
        u = self.store.read_field(run_id, self.name('solution', 'qnst'))
        self.assertEqual(len(u), 12)

    def test_equiv(self):
        run_id = self.engine.run('equiv')
        rows = self.store.read_table(run_id, self.name('equiv', 'csv'))
        self.assertEqual(len(rows), 2)
        for row in rows:
            self.assertLessEqual(float(row['min_ratio']), 1.0)
            self.assertGreaterEqual(float(row['max_ratio']), 1.0)

    def test_inclusions(self):
        run_id = self.engine.run('inclusions')
        rows = self.store.read_table(run_id, self.name('inclusions', 'csv'))
        self.assertEqual(len(rows), 4)
        self.assertEqual([r['Q_over_next_alpha'] for r in rows if r['alpha'] == '0.5'], ['', ''])
        chain = self.store.read_table(run_id, self.name('chain', 'csv'))
        self.assertEqual(len(chain), 2)

    def test_divrep(self):
        run_id = self.engine.run('divrep')
        rows = self.store.read_table(run_id, self.name('divrep', 'csv'))
        self.assertEqual(len(rows), 2)
        self.assertTrue(all(float(r['residual']) < 1e-12 for r in rows))

    def test_vanish(self):
        run_id = self.engine.run('vanish')
        rows = self.store.read_table(run_id, self.name('vanish', 'csv'))
        self.assertEqual(len(rows), 12)
        self.assertEqual(sum(1 for r in rows if r['kind'] == 'X_42'), 4)

    def test_lemmas(self):
        """ Test the lemma run writes every table and the Schur masses stay bounded. """
        run_id = self.engine.run('lemmas', schur=True)
        self.assertEqual(len(self.store.read_table(run_id, self.name('lemma23', 'csv'))), 10)
        self.assertEqual(len(self.store.read_table(run_id, self.name('lemma24', 'csv'))), 10)
        self.assertEqual(len(self.store.read_table(run_id, self.name('bilinear', 'csv'))), 3)
        schur = self.store.read_table(run_id, self.name('schur', 'csv'))
        self.assertEqual(len(schur), 20)
        for row in schur:
            self.assertLessEqual(float(row['sup_row']), 1 + 1e-6)
            self.assertLessEqual(float(row['sup_column']), 1 + 1e-6)

    def test_calibrate(self):
        run_id = self.engine.run('calibrate')
        rows = self.store.read_table(run_id, self.name('calibration', 'csv'))
        self.assertGreater(float(rows[0]['threshold']), 0.0)
        snippet = self.store.get(run_id, self.name('calibration', 'cfg'))
        self.assertTrue(snippet.startswith('[solver]\nsmallness_threshold = '))


class CompareTablesTest(unittest.TestCase):

    def test_equal(self):
        text = 'a,b\n1,x\n0.5,y\n'
        self.assertEqual(compare_tables(text, text), [])

    def test_tolerance(self):
        self.assertEqual(compare_tables('a\n1.0\n', 'a\n1.0000000000001\n'), [])
        self.assertEqual(len(compare_tables('a\n1.0\n', 'a\n1.001\n')), 1)

    def test_shape_and_text(self):
        self.assertEqual(len(compare_tables('a\n1\n', 'a\n1\n2\n')), 1)
        self.assertEqual(len(compare_tables('a,b\n1,2\n', 'a,b\n1\n')), 1)
        self.assertEqual(len(compare_tables('a\nx\n', 'a\ny\n')), 1)
        self.assertEqual(compare_tables('a\nnan\n', 'a\nnan\n'), [])


class CheckManifestTest(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()
        self.store = make_directory_store(self.tmpdir)
        self.cfg = experiment()
        self.engine = ExperimentEngine(self.cfg, self.store, timestamp=TIMESTAMP)
        self.run_id = self.engine.run('gen')
        digest = self.cfg.digest()
        self.manifest = os.path.join(self.tmpdir, self.run_id, 'manifest-%s.json' % digest)
        self.table = os.path.join(self.tmpdir, self.run_id, 'gen-%s.csv' % digest)

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def test_round_trip(self):
        self.assertEqual(check_manifest(self.manifest), 1)

    def test_tampered_table(self):
        with io.open(self.table, 'r', encoding='utf-8') as fp:
            lines = fp.read().splitlines()
        cells = lines[1].split(',')
        cells[-1] = '12345'
        lines[1] = ','.join(cells)
        with io.open(self.table, 'w', encoding='utf-8') as fp:
            fp.write(u'\n'.join(lines) + u'\n')
        self.assertRaises(InconsistencyError, check_manifest, self.manifest)


if __name__ == '__main__':
    unittest.main()
