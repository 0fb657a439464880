"""
Tests for the strict experiment configuration.
"""
import io
import os.path
import unittest

from qnslab import config
from qnslab.config import load_experiment, parse_list, resolve_name
from qnslab.exception import ConfigError
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
SEED = {('corpus', 'seed'): '1'}


def resource(name):
    return os.path.join(RESOURCES, name)


class LoadExperimentTest(unittest.TestCase):

    def test_defaults(self):
        cfg = load_experiment(None, SEED)
        self.assertEqual(cfg.seed, 1)
        self.assertEqual(cfg.n_dims, 2)
        self.assertEqual(cfg.resolution, 128)
        self.assertEqual(cfg.alphas, [0.0, 0.25, 0.5, 0.75])
        self.assertEqual(cfg.threads, 1)

    def test_missing_seed(self):
        self.assertRaises(ConfigError, load_experiment, None)

    def test_file(self):
        cfg = load_experiment(resource('experiment.cfg'))
        self.assertEqual(cfg.seed, 7)
        self.assertEqual(cfg.resolution, 16)
        self.assertEqual(cfg.getint('time', 'levels'), 12)
        self.assertEqual(cfg.get('output', 'store.factory'), 'qnslab.store.memory.MemoryStore')

    def test_overrides_win(self):
        cfg = load_experiment(resource('experiment.cfg'), {('corpus', 'seed'): '11', ('grid', 'resolution'): '32',
                                                           ('output', 'threads'): None})
        self.assertEqual(cfg.seed, 11)
        self.assertEqual(cfg.resolution, 32)

    def test_unknown_key(self):
        self.assertRaises(ConfigError, load_experiment, resource('bad.cfg'), SEED)
        self.assertRaises(ConfigError, load_experiment, None, {('grid', 'viscosity'): '1'})

    def test_unknown_section(self):
        fp = io.StringIO(u'[fluid]\nviscosity = 1\n')
        self.assertRaises(ConfigError, load_experiment, fp, SEED)

    def test_missing_file(self):
        self.assertRaises(IOError, load_experiment, resource('missing.cfg'), SEED)

    def test_invalid_values(self):
        for key, value in ((('grid', 'resolution'), '48'), (('grid', 'n_dims'), '4'), (('time', 'rho'), '1.5'),
                           (('solver', 'picard_iterations'), '40'), (('time', 'levels'), '6'),
                           (('corpus', 'alphas'), '0.5, 1.0'), (('grid', 'box_length'), 'wide')):
            overrides = dict(SEED)
            overrides[key] = value
            self.assertRaises(ConfigError, load_experiment, None, overrides)

    def test_logging_sections_allowed(self):
        cfg = load_experiment(resource('logging.cfg'))
        self.assertEqual(cfg.seed, 3)
        self.assertNotIn('loggers', cfg.as_dict())


class DigestTest(unittest.TestCase):

    def test_stable(self):
        a = load_experiment(None, SEED)
        b = load_experiment(None, SEED)
        self.assertEqual(a.digest(), b.digest())
        self.assertEqual(len(a.digest()), 12)

    def test_changes_with_values(self):
        a = load_experiment(None, SEED)
        b = load_experiment(None, {('corpus', 'seed'): '2'})
        self.assertNotEqual(a.digest(), b.digest())

    def test_resolution_materialized(self):
        cfg = load_experiment(None, SEED)
        self.assertEqual(cfg.as_dict()['grid']['resolution'], '128')
        explicit = load_experiment(None, {('corpus', 'seed'): '1', ('grid', 'resolution'): '128'})
        self.assertEqual(cfg.digest(), explicit.digest())


class HelpersTest(unittest.TestCase):

    def test_resolve_name(self):
        self.assertIs(resolve_name('qnslab.store.memory.MemoryStore'), MemoryStore)
        self.assertRaises((ImportError, AttributeError), resolve_name, 'qnslab.store.memory.Missing')

    def test_parse_list(self):
        self.assertEqual(parse_list('1, 2,,3', int), [1, 2, 3])
        self.assertEqual(parse_list([0.5, '0.25']), [0.5, 0.25])

    def test_default_parser_is_fresh(self):
        """ Test that each default parser is independent of the others. """
        a = config.default_parser()
        a.set('grid', 'n_dims', '3')
        self.assertEqual(config.default_parser().get('grid', 'n_dims'), '2')

    def test_check_strict(self):
        user = config.ConfigParser()
        user.read_string(u'[grid]\nviscosity = 1\n')
        self.assertRaises(ConfigError, config.check_strict, user, config.default_parser())


class ParseErrorTest(unittest.TestCase):

    def test_missing_section_header(self):
        """ Test that a file without a section header is a configuration error. """
        fp = io.StringIO(u'resolution = 16\n')
        self.assertRaises(ConfigError, load_experiment, fp, SEED)
        self.assertRaises(ConfigError, load_experiment, resource('headerless.cfg'), SEED)

    def test_duplicate_section(self):
        fp = io.StringIO(u'[grid]\nresolution = 16\n[grid]\nresolution = 32\n')
        self.assertRaises(ConfigError, load_experiment, fp, SEED)

    def test_logging_headerless(self):
        self.assertRaises(ConfigError, config.init_logging, configfile=resource('headerless.cfg'))

    def test_logging_broken_handler(self):
        self.assertRaises(ConfigError, config.init_logging, configfile=resource('badlogging.cfg'))


if __name__ == '__main__':
    unittest.main()
