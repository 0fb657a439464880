"""
Deterministic test fields and the lattice transforms used by the invariance checks.

Field specs are strings of the form C{kind:key=value,key=value}; vector-valued parameters
separate their entries with C{/}.  Lengths (centers, widths, radii) are in units of the box
side L.  For example::

    gaussian_bump:center=0.5/0.5,width=0.03125,amplitude=1
    single_mode:k=2/1,amplitude=1,phase=0
    taylor_green:amplitude=0.05
    compact_bump:radius=0.25
    random_smooth:seed=3,decay=2
    random_div_free:seed=1,amplitude=0.05
"""
import logging
import math

import numpy as np
import scipy.fft

from qnslab import spectral
from qnslab.duhamel import Trajectory
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

logger = logging.getLogger(__name__)

# Bumps must decay below this level on the boundary of the central cube.
SUPPORT_TOLERANCE = 1e-12

DEFAULTS = {
    'gaussian_bump': {'center': None, 'width': 1.0 / 32, 'amplitude': 1.0},
    'compact_bump': {'center': None, 'radius': 0.25, 'amplitude': 1.0},
    'single_mode': {'k': (1, 0), 'amplitude': 1.0, 'phase': 0.0},
    'taylor_green': {'amplitude': 1.0, 'k': 1},
    'random_smooth': {'seed': 1, 'decay': 2.0, 'amplitude': 1.0},
    'random_div_free': {'seed': 1, 'decay': 2.0, 'amplitude': 1.0},
}

VECTOR_KINDS = ('taylor_green', 'random_div_free')
INT_KEYS = ('seed', 'k')


class FieldSpec(object):
    """
    A field kind plus its parameters.

    >>> spec = FieldSpec.parse('single_mode:k=2/1,amplitude=0.5')
    >>> spec.kind, spec.params['k'], spec.params['amplitude']
    ('single_mode', (2, 1), 0.5)
    >>> str(FieldSpec.parse(str(spec))) == str(spec)
    True
    """

    def __init__(self, kind, **params):
        if kind not in DEFAULTS:
            raise ValueError("Unknown field kind: %r" % (kind,))
        unknown = set(params) - set(DEFAULTS[kind])
        if unknown:
            raise ValueError("Unknown parameters for %s: %s" % (kind, ', '.join(sorted(unknown))))
        self.kind = kind
        self.params = dict(DEFAULTS[kind])
        self.params.update(params)

    @classmethod
    def parse(cls, text):
        """
        Parse C{kind:key=value,...}.

        @raise ValueError: On malformed text, unknown kinds or unknown keys.
        """
        text = text.strip()
        kind, _, rest = text.partition(':')
        params = {}
        for item in filter(None, (p.strip() for p in rest.split(','))):
            key, sep, value = item.partition('=')
            if not sep:
                raise ValueError("Malformed field parameter %r in %r" % (item, text))
            key = key.strip()
            convert = int if key in INT_KEYS else float
            parts = [convert(v) for v in value.split('/')]
            params[key] = tuple(parts) if len(parts) > 1 else parts[0]
        return cls(kind.strip(), **params)

    @property
    def is_vector(self):
        return self.kind in VECTOR_KINDS

    def __eq__(self, other):
        return isinstance(other, FieldSpec) and str(self) == str(other)

    def __hash__(self):
        return hash(str(self))

    def __str__(self):
        items = []
        for key in sorted(self.params):
            value = self.params[key]
            if value is None:
                continue
            if isinstance(value, tuple):
                value = '/'.join('%r' % v for v in value)
            else:
                value = '%r' % (value,)
            items.append('%s=%s' % (key, value))
        return '%s:%s' % (self.kind, ','.join(items))

    __repr__ = __str__


def _center(grid, center):
    if center is None:
        return (0.5,) * grid.n_dims
    if not isinstance(center, tuple):
        center = (center,) * grid.n_dims
    if len(center) != grid.n_dims:
        raise ValueError("center %r does not match %d dimensions" % (center, grid.n_dims))
    return center


def _torus_distance2(grid, center):
    L = grid.box_length
    total = 0
    for x, c in zip(grid.coordinates(), center):
        d = np.abs(x - c * L)
        d = np.minimum(d, L - d)
        total = total + d ** 2
    return total


def _cube_margin(center):
    """
    Distance (in units of L) from the center to the boundary of the central cube.
    """
    margin = min(min(c - 0.25, 0.75 - c) for c in center)
    if margin <= 0:
        raise ValueError("Bump center %r lies outside the central cube" % (center,))
    return margin


def gaussian_bump(grid, center=None, width=1.0 / 32, amplitude=1.0):
    """
    amplitude exp(-|x - c|^2 / (2 w^2)).

    @raise ValueError: If the bump does not decay to 1e-12 inside the central cube.
    """
    center = _center(grid, center)
    margin = _cube_margin(center)
    if not width > 0 or math.exp(-margin ** 2 / (2.0 * width ** 2)) > SUPPORT_TOLERANCE:
        raise ValueError("Gaussian width %r too large for support in the central cube" % (width,))
    w = width * grid.box_length
    values = amplitude * np.exp(-_torus_distance2(grid, center) / (2.0 * w ** 2))
    return spectral.remove_nyquist(ScalarField(grid, values=values))


def compact_bump(grid, center=None, radius=0.25, amplitude=1.0):
    """
    The C-infinity bump amplitude exp(1 - 1 / (1 - |x - c|^2 / R^2)) on |x - c| < R.
    """
    center = _center(grid, center)
    if not 0 < radius <= _cube_margin(center):
        raise ValueError("Bump radius %r leaves the central cube" % (radius,))
    q = _torus_distance2(grid, center) / (radius * grid.box_length) ** 2
    inside = q < 1.0
    values = np.zeros(grid.shape)
    values[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - q[inside]))
    return spectral.remove_nyquist(ScalarField(grid, values=values))


def single_mode(grid, k=(1, 0), amplitude=1.0, phase=0.0):
    """
    amplitude cos(2 pi m . x / L + phase) for the integer wavevector m.
    """
    m = tuple(k) if isinstance(k, tuple) else (k,) + (0,) * (grid.n_dims - 1)
    m = m + (0,) * (grid.n_dims - len(m))
    if len(m) != grid.n_dims or any(abs(a) >= grid.resolution // 2 for a in m):
        raise ValueError("Wavevector %r not resolved on %r" % (k, grid))
    arg = sum(2 * math.pi * a * x / grid.box_length for a, x in zip(m, grid.coordinates()))
    return ScalarField(grid, values=amplitude * np.cos(arg + phase))


def taylor_green(grid, amplitude=1.0, k=1):
    """
    The Taylor-Green cell, divergence-free:
    2D: A (sin kx cos ky, -cos kx sin ky); 3D: A (sin kx cos ky cos kz, -cos kx sin ky cos kz, 0),
    with k in units of 2 pi / L.
    """
    kappa = 2 * math.pi * k / grid.box_length
    xs = grid.coordinates()
    s = [np.sin(kappa * x) for x in xs]
    c = [np.cos(kappa * x) for x in xs]
    if grid.n_dims == 2:
        comps = [amplitude * s[0] * c[1], -amplitude * c[0] * s[1]]
    else:
        comps = [amplitude * s[0] * c[1] * c[2], -amplitude * c[0] * s[1] * c[2], np.zeros(grid.shape)]
    return VectorField([ScalarField(grid, values=v) for v in comps], divergence_free=True)


def _band_limited_noise(grid, rng, decay):
    w = spectral.wavenumbers(grid)
    m2 = w.k2 * (grid.box_length / (2 * math.pi)) ** 2
    band = (m2 > 0) & (m2 <= (grid.resolution / 4.0) ** 2)
    noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    with np.errstate(divide='ignore'):
        envelope = np.where(band, m2 ** (-decay / 2.0), 0.0)
    return ScalarField(grid, fourier=noise * envelope).values


def random_smooth(grid, seed=1, decay=2.0, amplitude=1.0):
    """
    A mean-zero random field band-limited to |m| <= N/4 with spectrum |m|^-decay, scaled so
    that max |f| = amplitude.
    """
    values = _band_limited_noise(grid, np.random.default_rng(seed), decay)
    peak = np.max(np.abs(values))
    return ScalarField(grid, values=values * (amplitude / peak if peak > 0 else 0.0))


def random_div_free(grid, seed=1, decay=2.0, amplitude=1.0):
    """
    The Leray projection of a band-limited random vector field, scaled so that the maximal
    Euclidean magnitude equals amplitude.
    """
    rng = np.random.default_rng(seed)
    raw = VectorField([ScalarField(grid, values=_band_limited_noise(grid, rng, decay))
                       for _ in range(grid.n_dims)])
    u = spectral.leray_project(raw)
    peak = u.max_abs()
    return u * (amplitude / peak if peak > 0 else 0.0)


GENERATORS = {
    'gaussian_bump': gaussian_bump,
    'compact_bump': compact_bump,
    'single_mode': single_mode,
    'taylor_green': taylor_green,
    'random_smooth': random_smooth,
    'random_div_free': random_div_free,
}


def generate(spec, grid):
    """
    Build the field described by a L{FieldSpec} (or spec string) on a grid.

    @raise ValueError: If the spec is invalid for the grid (for example a bump too wide for
                       the support constraint).
    """
    if not isinstance(spec, FieldSpec):
        spec = FieldSpec.parse(spec)
    params = dict((k, v) for k, v in spec.params.items() if v is not None)
    field = GENERATORS[spec.kind](grid, **params)
    logger.debug("Generated %s on %r", spec, grid)
    return field


def canonical_specs(seed=1):
    """
    The six corpus fields every measured constant refers to.
    """
    return [
        FieldSpec('gaussian_bump', width=1.0 / 32),
        FieldSpec('gaussian_bump', center=(17.0 / 32, 15.0 / 32), width=1.0 / 40),
        FieldSpec('single_mode', k=(2, 1)),
        FieldSpec('compact_bump'),
        FieldSpec('random_smooth', seed=seed),
        FieldSpec('random_smooth', seed=seed + 1),
    ]


def corpus_specs(text, seed=1):
    """
    Resolve a corpus setting: C{canonical} or a C{;} separated list of spec strings.
    """
    text = text.strip()
    if text == 'canonical':
        return canonical_specs(seed)
    return [FieldSpec.parse(s) for s in text.split(';') if s.strip()]


def corpus(grid, seed=1):
    return [generate(spec, grid) for spec in canonical_specs(seed)]


def translate(f, shift):
    """
    Shift a field by whole lattice steps: the output at node i is f at node i - shift.
    """
    shift = tuple(int(s) for s in shift)
    if isinstance(f, VectorField):
        return VectorField([translate(c, shift) for c in f], divergence_free=f.divergence_free)
    axes = tuple(range(f.grid.n_dims))
    return ScalarField(f.grid, values=np.roll(f.values, shift, axis=axes))


def refine(f, factor=2):
    """
    Spectral interpolation onto a grid with C{factor} times the resolution (zero padding).

    Nyquist content of the input is dropped, so refinement is exact for Nyquist-free fields.
    """
    if isinstance(f, VectorField):
        return VectorField([refine(c, factor) for c in f], divergence_free=f.divergence_free)
    grid = f.grid
    fine = Grid(grid.n_dims, grid.resolution * factor, grid.box_length)
    n, big = grid.resolution, fine.resolution
    m = scipy.fft.fftfreq(n, d=1.0 / n).astype(int)
    keep = np.abs(m) < n // 2
    idx = np.where(m >= 0, m, m + big)[keep]
    coarse = f.fourier
    for axis in range(grid.n_dims):
        coarse = np.compress(keep, coarse, axis=axis)
    padded = np.zeros(fine.shape, dtype=complex)
    padded[np.ix_(*([idx] * grid.n_dims))] = coarse
    scale = float(factor) ** grid.n_dims
    return ScalarField(fine, fourier=padded * scale)


def _check_lambda(lam):
    exponent = math.log(lam, 2) if lam > 0 else None
    if exponent is None or abs(exponent - round(exponent)) > 1e-12:
        raise ValueError("Scale factor must be a power of two, got %r" % (lam,))


def scale_transform(f, lam, power=1):
    """
    f_lambda(x) = lambda^power f(lambda x) on the rematched grid of side L / lambda.

    Node i of the rematched grid sits at lambda x_i = x_i of the input lattice, so the samples
    are read exactly.  The default power 1 is the Navier-Stokes scaling; power 0 is the dilation
    under which Q_alpha itself is invariant.

    @raise ValueError: If lambda is not a power of two.
    """
    _check_lambda(lam)
    grid = Grid(f.grid.n_dims, f.grid.resolution, f.grid.box_length / lam)
    factor = float(lam) ** power
    if isinstance(f, VectorField):
        return VectorField([ScalarField(grid, values=c.values * factor) for c in f],
                           divergence_free=f.divergence_free)
    return ScalarField(grid, values=f.values * factor)


def scale_transform_traj(g, lam):
    """
    g_lambda(t, x) = lambda g(lambda^2 t, lambda x) on the rematched grid and the mesh with
    times divided by lambda^2.
    """
    _check_lambda(lam)
    if lam == 1:
        return g
    mesh = g.mesh.scaled(1.0 / lam ** 2)
    return Trajectory(mesh, [scale_transform(f, lam) for f in g])
