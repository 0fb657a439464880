"""
Result storage in thread-safe, in-memory dictionaries.
"""
import threading
from collections import defaultdict

from qnslab.store import ResultStore
from qnslab.util.concurrency import synchronized

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

lock = threading.RLock()


class MemoryStore(ResultStore):
    """
    A ResultStore that keeps documents in memory; used by the tests and by C{--check}
    recomputation.

    @param root: Accepted for factory compatibility and ignored.
    """

    def __init__(self, root=None):
        ResultStore.__init__(self)
        self._documents = defaultdict(dict)

    @synchronized(lock)
    def put(self, run_id, name, text):
        self._documents[run_id][name] = text

    @synchronized(lock)
    def get(self, run_id, name):
        if name not in self._documents.get(run_id, {}):
            raise KeyError("No document %r in run %r" % (name, run_id))
        return self._documents[run_id][name]

    @synchronized(lock)
    def names(self, run_id):
        return sorted(self._documents.get(run_id, {}))

    @synchronized(lock)
    def runs(self):
        return set(self._documents.keys())
