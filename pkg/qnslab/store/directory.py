"""
Result storage as plain files: one subdirectory per run below a root directory.
"""
import io
import os
import os.path
import threading

from qnslab.exception import ConfigError
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


def make_directory_store(root):
    """
    Creates a directory store rooted at C{root}, creating the directory if needed.

    @raise ConfigError: If the root exists but is not a writable directory.
    """
    if os.path.exists(root) and not os.path.isdir(root):
        raise ConfigError('Output root is not a directory: %s' % root)
    if not os.path.exists(root):
        os.makedirs(root)
    if not os.access(root, os.W_OK | os.R_OK):
        raise ConfigError('Cannot read and write output root: %s' % root)
    return DirectoryStore(root)


class DirectoryStore(ResultStore):
    """
    A ResultStore writing each document to C{root/run_id/name}.

    @ivar root: The output root directory.
    @type root: C{str}
    """

    def __init__(self, root):
        ResultStore.__init__(self)
        self.root = root

    def _path(self, run_id, name):
        if os.sep in name or name.startswith('.'):
            raise ValueError("Invalid document name: %r" % (name,))
        return os.path.join(self.root, run_id, name)

    @synchronized(lock)
    def put(self, run_id, name, text):
        path = self._path(run_id, name)
        directory = os.path.dirname(path)
        if not os.path.isdir(directory):
            os.makedirs(directory)
        self.log.debug("Writing %s" % path)
        with io.open(path, 'w', encoding='utf-8', newline='\n') as fp:
            fp.write(text)

    @synchronized(lock)
    def get(self, run_id, name):
        path = self._path(run_id, name)
        if not os.path.isfile(path):
            raise KeyError("No document %r in run %r" % (name, run_id))
        with io.open(path, 'r', encoding='utf-8') as fp:
            return fp.read()

    @synchronized(lock)
    def names(self, run_id):
        directory = os.path.join(self.root, run_id)
        if not os.path.isdir(directory):
            return []
        return sorted(n for n in os.listdir(directory) if os.path.isfile(os.path.join(directory, n)))

    @synchronized(lock)
    def runs(self):
        if not os.path.isdir(self.root):
            return set()
        return set(n for n in os.listdir(self.root) if os.path.isdir(os.path.join(self.root, n)))
