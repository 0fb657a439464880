"""
Result storage tests.
"""
from qnslab.spectral import Grid, ScalarField

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


class CommonStoreTest(object):
    """
    An abstract set of base tests for result storage engines.

    This class must be mixed in with something that extends C{unittest.TestCase}.
    """

    def test_put_get(self):
        """ Test the put() and get() methods. """
        self.store.put('run-1', 'notes.txt', u'some data\n')
        self.assertEqual(self.store.get('run-1', 'notes.txt'), u'some data\n')
        self.store.put('run-1', 'notes.txt', u'replaced\n')
        self.assertEqual(self.store.get('run-1', 'notes.txt'), u'replaced\n')

    def test_get_missing(self):
        """ Test that get() raises KeyError for unknown runs and documents. """
        self.assertRaises(KeyError, self.store.get, 'run-1', 'notes.txt')
        self.store.put('run-1', 'a.txt', u'x')
        self.assertRaises(KeyError, self.store.get, 'run-1', 'notes.txt')

    def test_names_and_runs(self):
        self.assertEqual(self.store.names('run-1'), [])
        self.assertEqual(self.store.runs(), set())
        self.store.put('run-1', 'b.csv', u'x')
        self.store.put('run-1', 'a.csv', u'y')
        self.store.put('run-2', 'c.csv', u'z')
        self.assertEqual(self.store.names('run-1'), ['a.csv', 'b.csv'])
        self.assertEqual(self.store.runs(), set(['run-1', 'run-2']))
        self.assertTrue(self.store.has_document('run-2', 'c.csv'))
        self.assertFalse(self.store.has_document('run-2', 'a.csv'))

    def test_table(self):
        """ Test the write_table() and read_table() methods. """
        self.store.write_table('run-1', 't.csv', ('kind', 'value', 'small', 'ball'),
                               [('Q_alpha', 0.1, True, None), {'kind': 'BMO', 'value': 2}])
        rows = self.store.read_table('run-1', 't.csv')
        self.assertEqual(rows[0], {'kind': 'Q_alpha', 'value': '0.10000000000000001', 'small': 'true',
                                   'ball': ''})
        self.assertEqual(rows[1]['value'], '2')
        self.assertEqual(rows[1]['small'], '')

    def test_json(self):
        self.store.write_json('run-1', 'm.json', {'seed': 3, 'value': 0.1})
        self.assertEqual(self.store.read_json('run-1', 'm.json'), {'seed': 3, 'value': 0.1})

    def test_field(self):
        """ Test that stored fields read back bit for bit. """
        f = ScalarField.constant(Grid(2, 16), 0.3)
        self.store.write_field('run-1', 'f.qnsf', f)
        self.assertEqual(self.store.read_field('run-1', 'f.qnsf').values.tolist(), f.values.tolist())
