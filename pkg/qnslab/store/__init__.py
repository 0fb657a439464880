"""
Storage containers for run output (tables, manifests and field files).
"""
import abc
import csv
import io
import json
import logging
import threading

import six

from qnslab.util import formats
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


def format_cell(value):
    """
    Render one CSV cell.

    >>> [format_cell(v) for v in (0.1, 3, True, None, 'Q_inverse')]
    ['0.10000000000000001', '3', 'true', '', 'Q_inverse']
    """
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return formats.format_number(value)
    return str(value)


def table_text(columns, rows):
    """
    CSV text for a header and rows given as sequences or as dicts keyed by column.
    """
    buff = io.StringIO()
    writer = csv.writer(buff, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        if isinstance(row, dict):
            row = [row.get(c) for c in columns]
        writer.writerow([format_cell(v) for v in row])
    return buff.getvalue()


@six.add_metaclass(abc.ABCMeta)
class ResultStore(object):
    """
    Abstract base class for run output storage.

    Output is grouped into runs; each run holds named text documents.  Extensions of this class
    must be thread-safe.

    @ivar log: A logger for this class.
    @type log: C{logging.Logger}
    """

    def __init__(self):
        """
        A base constructor that sets up logging.

        If you extend this class, you should either call this method or at minimum make sure these values
        get set.
        """
        self.log = logging.getLogger('%s.%s' % (self.__module__, self.__class__.__name__))

    @abc.abstractmethod
    @synchronized(lock)
    def put(self, run_id, name, text):
        """
        Store a document under a run.

        @param run_id: The run (directory) name.
        @type run_id: C{str}

        @param name: The document (file) name.
        @type name: C{str}

        @param text: The document contents.
        @type text: C{str}
        """

    @abc.abstractmethod
    @synchronized(lock)
    def get(self, run_id, name):
        """
        The contents of a stored document.

        @raise KeyError: If the run holds no such document.
        """

    @abc.abstractmethod
    @synchronized(lock)
    def names(self, run_id):
        """
        Sorted document names of a run (empty for an unknown run).

        @rtype: C{list}
        """

    @abc.abstractmethod
    @synchronized(lock)
    def runs(self):
        """
        The set of run ids available.

        @rtype: C{set}
        """

    @synchronized(lock)
    def has_document(self, run_id, name):
        return name in self.names(run_id)

    @synchronized(lock)
    def write_table(self, run_id, name, columns, rows):
        self.put(run_id, name, table_text(columns, rows))

    @synchronized(lock)
    def read_table(self, run_id, name):
        """
        Rows of a stored table as dicts of strings.
        """
        return list(csv.DictReader(io.StringIO(self.get(run_id, name))))

    @synchronized(lock)
    def write_json(self, run_id, name, obj):
        self.put(run_id, name, json.dumps(obj, sort_keys=True, indent=2) + '\n')

    @synchronized(lock)
    def read_json(self, run_id, name):
        return json.loads(self.get(run_id, name))

    @synchronized(lock)
    def write_field(self, run_id, name, obj):
        """
        Store a field or trajectory in the QNSF1/QNST1 text format.
        """
        self.put(run_id, name, formats.dumps(obj))

    @synchronized(lock)
    def read_field(self, run_id, name):
        return formats.loads(self.get(run_id, name))
