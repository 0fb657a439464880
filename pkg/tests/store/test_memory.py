"""
Test memory result storage.
"""
import unittest

from qnslab.store.memory import MemoryStore
from tests.store import CommonStoreTest

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


class MemoryStoreTest(CommonStoreTest, unittest.TestCase):

    def setUp(self):
        self.store = MemoryStore()

    def test_root_ignored(self):
        """ Test that the factory root argument is accepted. """
        store = MemoryStore('/nonexistent/root')
        store.put('run', 'a.txt', u'x')
        self.assertEqual(store.names('run'), ['a.txt'])


if __name__ == '__main__':
    unittest.main()
