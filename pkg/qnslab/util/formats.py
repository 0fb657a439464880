"""
Plain-text field and trajectory files.

A field block is a header line C{QNSF1 ndims res_1 .. res_ndims L} followed by the node values
in row-major order, one row (last axis) per line.  Vector fields put a C{component j} line
(j counted from 1) before each component.  A trajectory file is a C{QNST1 n_nodes} line and
then, per node, a C{t <value>} line followed by a field block.  Numbers are written with 17
significant digits so files reproduce the arrays bit for bit.
"""
import io
import logging
import math

import numpy as np

from qnslab.duhamel import Trajectory
from qnslab.exception import FormatError
from qnslab.spaces import TimeMesh
from qnslab.spectral import Grid, ScalarField, VectorField

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

FIELD_MAGIC = 'QNSF1'
TRAJECTORY_MAGIC = 'QNST1'
NUMBER_FORMAT = '%.17g'

logger = logging.getLogger(__name__)


def format_number(x):
    """
    >>> format_number(0.1)
    '0.10000000000000001'
    """
    return NUMBER_FORMAT % x


class LineBuffer(object):
    """
    Non-blank lines of a text buffer with one line of lookahead.
    """

    def __init__(self, buff):
        self.lines = [line.strip() for line in buff if line.strip()]
        self.pos = 0

    def peek(self):
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def readline(self):
        line = self.peek()
        if line is None:
            raise FormatError("Unexpected end of file")
        self.pos += 1
        return line

    def at_end(self):
        return self.pos >= len(self.lines)


def _float(token):
    try:
        return float(token)
    except ValueError:
        raise FormatError("Not a number: %r" % (token,))


def parse_header(buff):
    """
    Parse a C{QNSF1} header line into a L{Grid}.

    @raise FormatError: If the header is missing, malformed or describes an unequal grid.
    """
    line = buff.peek()
    if line is None:
        raise FormatError("Empty field block")
    parts = buff.readline().split()
    if parts[0] != FIELD_MAGIC:
        raise FormatError("Expected %s header, got %r" % (FIELD_MAGIC, line))
    try:
        n_dims = int(parts[1])
        sizes = [int(p) for p in parts[2:2 + n_dims]]
    except (IndexError, ValueError):
        raise FormatError("Malformed field header: %r" % (line,))
    if len(parts) != 3 + n_dims or len(sizes) != n_dims:
        raise FormatError("Malformed field header: %r" % (line,))
    if len(set(sizes)) != 1:
        raise FormatError("Unequal axis resolutions are not supported: %r" % (sizes,))
    try:
        return Grid(n_dims, sizes[0], _float(parts[-1]))
    except ValueError as e:
        raise FormatError("Invalid grid in header %r: %s" % (line, e))


def parse_values(buff, grid):
    """
    Read exactly one grid's worth of node values.
    """
    count = int(np.prod(grid.shape))
    values = []
    while len(values) < count:
        line = buff.peek()
        if line is None or line.startswith('component') or line.startswith(FIELD_MAGIC) or line.startswith('t '):
            raise FormatError("Expected %d values, found %d" % (count, len(values)))
        values.extend(_float(tok) for tok in buff.readline().split())
    if len(values) != count:
        raise FormatError("Expected %d values, found %d" % (count, len(values)))
    return np.array(values).reshape(grid.shape)


def parse_field(buff):
    """
    Parse a field block; C{component} lines make it a vector field.
    """
    grid = parse_header(buff)
    if buff.peek() is None or not buff.peek().startswith('component'):
        return ScalarField(grid, values=parse_values(buff, grid))
    components = []
    for j in range(1, grid.n_dims + 1):
        line = buff.readline()
        if line.split() != ['component', str(j)]:
            raise FormatError("Expected 'component %d', got %r" % (j, line))
        components.append(ScalarField(grid, values=parse_values(buff, grid)))
    return VectorField(components)


def _pack_values(values):
    rows = values.reshape(-1, values.shape[-1])
    return ''.join(' '.join(format_number(x) for x in row) + '\n' for row in rows)


def pack_field(f):
    """
    The text block for a scalar or vector field.

    @rtype: C{str}
    """
    grid = f.grid
    header = ' '.join([FIELD_MAGIC, str(grid.n_dims)] + [str(grid.resolution)] * grid.n_dims +
                      [format_number(grid.box_length)])
    parts = [header + '\n']
    if isinstance(f, VectorField):
        for j, c in enumerate(f, 1):
            parts.append('component %d\n' % j)
            parts.append(_pack_values(c.values))
    else:
        parts.append(_pack_values(f.values))
    return ''.join(parts)


def _mesh_from_samples(times):
    """
    Rebuild the time mesh from its log-midpoint samples.
    """
    if len(times) < 2:
        raise FormatError("A trajectory file needs at least two nodes")
    rho = times[1] / times[0]
    if not 0 < rho < 1:
        raise FormatError("Trajectory times must decrease: %r" % (times[:2],))
    for a, b in zip(times, times[1:]):
        if abs(b / a - rho) > 1e-9 * rho:
            raise FormatError("Trajectory times are not geometric")
    return TimeMesh(times[0] / math.sqrt(rho), rho, len(times))


def parse_trajectory(buff):
    line = buff.readline()
    parts = line.split()
    if len(parts) != 2 or parts[0] != TRAJECTORY_MAGIC:
        raise FormatError("Expected %s header, got %r" % (TRAJECTORY_MAGIC, line))
    try:
        count = int(parts[1])
    except ValueError:
        raise FormatError("Malformed trajectory header: %r" % (line,))
    times, fields = [], []
    for _ in range(count):
        tline = buff.readline().split()
        if len(tline) != 2 or tline[0] != 't':
            raise FormatError("Expected a 't <value>' line, got %r" % (' '.join(tline),))
        times.append(_float(tline[1]))
        fields.append(parse_field(buff))
    mesh = _mesh_from_samples(times)
    if np.max(np.abs(mesh.samples - np.array(times)) / np.array(times)) > 1e-9:
        raise FormatError("Trajectory times do not match a time mesh")
    return Trajectory(mesh, fields)


def pack_trajectory(traj):
    parts = ['%s %d\n' % (TRAJECTORY_MAGIC, len(traj))]
    for t, f in zip(traj.times, traj):
        parts.append('t %s\n' % format_number(t))
        parts.append(pack_field(f))
    return ''.join(parts)


def loads(text):
    """
    Parse a field or trajectory from a string, dispatching on the magic word.
    """
    buff = LineBuffer(io.StringIO(text))
    first = buff.peek()
    if first is None:
        raise FormatError("Empty input")
    if first.startswith(TRAJECTORY_MAGIC):
        result = parse_trajectory(buff)
    else:
        result = parse_field(buff)
    if not buff.at_end():
        raise FormatError("Trailing content after line %d" % buff.pos)
    return result


def dumps(obj):
    if hasattr(obj, 'mesh'):
        return pack_trajectory(obj)
    return pack_field(obj)


def load(path):
    with io.open(path, 'r', encoding='ascii') as fp:
        return loads(fp.read())


def dump(obj, path):
    logger.debug("Writing %s" % path)
    with io.open(path, 'w', encoding='ascii', newline='\n') as fp:
        fp.write(dumps(obj))
