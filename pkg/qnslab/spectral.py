"""
Periodic-torus discretization and Fourier-multiplier operators.

A L{Grid} discretizes the torus [0, L)^n with N equispaced nodes per axis.  Fields carry
their node values and their discrete Fourier coefficients (C{scipy.fft} conventions);
whichever representation is missing is computed on first access.  Fields are immutable.

Every operator here is diagonal in Fourier space: it multiplies the coefficient at the
angular frequency C{k = 2 pi m / L} by a symbol.  Odd symbols (derivatives, Riesz transforms,
the Leray correction) vanish on Nyquist planes so that they map real fields to real fields.
"""
import logging
import math
import threading
from collections import namedtuple

import numpy as np
import scipy.fft

from qnslab.exception import GridMismatch
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

logger = logging.getLogger(__name__)

TENT_CHOICES = ('1a', '1b', '2a', '2b')
VECTOR_TENT_CHOICES = ('1b', '2b')

# Relative divergence tolerated in fields treated as divergence-free.
DIVERGENCE_TOLERANCE = 1e-10

Wavenumbers = namedtuple('Wavenumbers', 'k k_odd k2 k2_odd knorm knorm_odd dealias nyquist_free')

_cache_lock = threading.RLock()
_wavenumber_cache = {}


class Grid(object):
    """
    A uniform periodic grid on [0, L)^n.

    @ivar n_dims: Spatial dimension (2 or 3).
    @type n_dims: C{int}

    @ivar resolution: Nodes per axis (a power of two, at least 16).
    @type resolution: C{int}

    @ivar box_length: The torus side L.
    @type box_length: C{float}
    """

    def __init__(self, n_dims, resolution, box_length=2 * math.pi):
        if n_dims not in (2, 3):
            raise ValueError("n_dims must be 2 or 3, got %r" % (n_dims,))
        resolution = int(resolution)
        if resolution < 16 or resolution & (resolution - 1):
            raise ValueError("resolution must be a power of two >= 16, got %r" % (resolution,))
        if not box_length > 0:
            raise ValueError("box_length must be positive, got %r" % (box_length,))
        self.n_dims = n_dims
        self.resolution = resolution
        self.box_length = float(box_length)

    def __eq__(self, other):
        return (isinstance(other, Grid) and
                self.n_dims == other.n_dims and
                self.resolution == other.resolution and
                self.box_length == other.box_length)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.n_dims, self.resolution, self.box_length))

    def __repr__(self):
        return 'Grid(n_dims=%d, resolution=%d, box_length=%r)' % (
            self.n_dims, self.resolution, self.box_length)

    @property
    def shape(self):
        return (self.resolution,) * self.n_dims

    @property
    def spacing(self):
        return self.box_length / self.resolution

    @property
    def cell_volume(self):
        return self.spacing ** self.n_dims

    @property
    def volume(self):
        return self.box_length ** self.n_dims

    def coordinates(self):
        """
        Node coordinates, one array of C{shape} per axis (C{ij} indexing).
        """
        axis = np.arange(self.resolution) * self.spacing
        return np.meshgrid(*([axis] * self.n_dims), indexing='ij')

    def check(self, *fields):
        """
        @raise GridMismatch: If any of the fields lives on another grid.
        """
        for f in fields:
            if f.grid != self:
                raise GridMismatch("Field on %r does not match %r" % (f.grid, self))

    @property
    def wavenumbers(self):
        return wavenumbers(self)


@synchronized(_cache_lock)
def wavenumbers(grid):
    """
    The (cached) angular wavenumber tables of a grid.

    C{k} holds the full lattice (the Nyquist entry is -pi N / L); C{k_odd} is the same with
    Nyquist entries zeroed, used by odd symbols.  C{dealias} is the 2/3-rule mask and
    C{nyquist_free} masks out every mode on a Nyquist plane.

    @rtype: L{Wavenumbers}
    """
    key = (grid.n_dims, grid.resolution, grid.box_length)
    cached = _wavenumber_cache.get(key)
    if cached is not None:
        return cached

    n = grid.resolution
    m = scipy.fft.fftfreq(n, d=1.0 / n)
    scale = 2 * math.pi / grid.box_length
    m_odd = m.copy()
    m_odd[n // 2] = 0.0
    mesh = np.meshgrid(*([m] * grid.n_dims), indexing='ij')
    mesh_odd = np.meshgrid(*([m_odd] * grid.n_dims), indexing='ij')

    k = tuple(scale * a for a in mesh)
    k_odd = tuple(scale * a for a in mesh_odd)
    k2 = sum(a ** 2 for a in k)
    k2_odd = sum(a ** 2 for a in k_odd)
    dealias = np.ones(grid.shape, dtype=bool)
    nyquist_free = np.ones(grid.shape, dtype=bool)
    for a in mesh:
        dealias &= np.abs(a) < n / 3.0
        nyquist_free &= np.abs(a) < n / 2
    knorm = np.sqrt(k2)
    knorm_odd = np.sqrt(k2_odd)
    for arr in k + k_odd + (k2, k2_odd, knorm, knorm_odd, dealias, nyquist_free):
        arr.flags.writeable = False

    result = Wavenumbers(k, k_odd, k2, k2_odd, knorm, knorm_odd, dealias, nyquist_free)
    _wavenumber_cache[key] = result
    logger.debug("Cached wavenumber tables for %r", grid)
    return result


def _readonly(arr):
    arr.flags.writeable = False
    return arr


class ScalarField(object):
    """
    A real scalar field on a L{Grid}.

    Construct with node C{values}, with Fourier coefficients (C{fourier}), or with both when
    they are known to agree.  The missing representation is materialized on demand.
    """

    def __init__(self, grid, values=None, fourier=None):
        if values is None and fourier is None:
            raise ValueError("Either values or fourier coefficients are required")
        self.grid = grid
        self._values = None
        self._fourier = None
        if values is not None:
            values = np.array(values, dtype=float)
            if values.shape != grid.shape:
                raise GridMismatch("values of shape %s do not fit %r" % (values.shape, grid))
            self._values = _readonly(values)
        if fourier is not None:
            fourier = np.array(fourier, dtype=complex)
            if fourier.shape != grid.shape:
                raise GridMismatch("coefficients of shape %s do not fit %r" % (fourier.shape, grid))
            self._fourier = _readonly(fourier)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, values=np.zeros(grid.shape), fourier=np.zeros(grid.shape, dtype=complex))

    @classmethod
    def constant(cls, grid, c):
        fourier = np.zeros(grid.shape, dtype=complex)
        fourier[(0,) * grid.n_dims] = c * grid.resolution ** grid.n_dims
        return cls(grid, values=np.full(grid.shape, float(c)), fourier=fourier)

    @property
    def values(self):
        if self._values is None:
            self._values = _readonly(scipy.fft.ifftn(self._fourier).real)
        return self._values

    @property
    def fourier(self):
        if self._fourier is None:
            self._fourier = _readonly(scipy.fft.fftn(self._values))
        return self._fourier

    def mean(self):
        return float(self.fourier[(0,) * self.grid.n_dims].real) / self.grid.resolution ** self.grid.n_dims

    def max_abs(self):
        return float(np.max(np.abs(self.values)))

    def magnitude(self):
        return np.abs(self.values)

    def is_zero(self):
        return not np.any(self.values)

    def __add__(self, other):
        if isinstance(other, ScalarField):
            self.grid.check(other)
            return ScalarField(self.grid, values=self.values + other.values)
        return ScalarField(self.grid, values=self.values + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return self * -1.0

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            raise TypeError("Use product() for pointwise products of fields")
        return ScalarField(self.grid, values=self.values * float(other))

    __rmul__ = __mul__

    def __repr__(self):
        return 'ScalarField(%r)' % (self.grid,)


class VectorField(object):
    """
    A real vector field: C{n_dims} L{ScalarField} components on a common grid.

    @ivar divergence_free: Set by constructions that guarantee a vanishing divergence
                           (Leray projection, divergence-free generators).
    @type divergence_free: C{bool}
    """

    def __init__(self, components, divergence_free=False):
        components = tuple(components)
        if not components:
            raise ValueError("A vector field needs components")
        grid = components[0].grid
        grid.check(*components)
        if len(components) != grid.n_dims:
            raise GridMismatch("%d components on a %d-dimensional grid" % (len(components), grid.n_dims))
        self.components = components
        self.divergence_free = bool(divergence_free)

    @classmethod
    def zeros(cls, grid):
        return cls([ScalarField.zeros(grid) for _ in range(grid.n_dims)], divergence_free=True)

    @property
    def grid(self):
        return self.components[0].grid

    @property
    def n_dims(self):
        return len(self.components)

    def __getitem__(self, j):
        return self.components[j]

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def magnitude(self):
        """
        Pointwise Euclidean magnitude as an array of node values.
        """
        return np.sqrt(sum(c.values ** 2 for c in self.components))

    def max_abs(self):
        return float(np.max(self.magnitude()))

    def is_zero(self):
        return all(c.is_zero() for c in self.components)

    def __add__(self, other):
        return VectorField([a + b for a, b in zip(self, other)],
                           divergence_free=self.divergence_free and other.divergence_free)

    def __sub__(self, other):
        return VectorField([a - b for a, b in zip(self, other)],
                           divergence_free=self.divergence_free and other.divergence_free)

    def __neg__(self):
        return self * -1.0

    def __mul__(self, c):
        return VectorField([a * c for a in self], divergence_free=self.divergence_free)

    __rmul__ = __mul__

    def __repr__(self):
        return 'VectorField(%r, divergence_free=%s)' % (self.grid, self.divergence_free)


def componentwise(op):
    """
    Lift a scalar operator to vector fields, keeping the divergence-free tag.

    The tag survives because every lifted operator is a scalar Fourier multiplier.
    """
    def wrapper(f, *args, **kwargs):
        if isinstance(f, VectorField):
            return VectorField([op(c, *args, **kwargs) for c in f], divergence_free=f.divergence_free)
        return op(f, *args, **kwargs)
    wrapper.__name__ = op.__name__
    wrapper.__doc__ = op.__doc__
    return wrapper


class MultiplierSymbol(object):
    """
    A Fourier multiplier: its kind, parameters and symbol table on a grid.

    Kinds and parameters::

        heat                  t >= 0          exp(-t |k|^2)
        poisson               t >= 0          exp(-t |k|)
        fractional_laplacian  beta            |k|^beta, zero mode -> 0
        riesz                 axis            i k_j / |k|, zero mode -> 0
        derivative            axis            i k_j
        inverse_laplacian                     1 / |k|^2, zero mode -> 0
        tent_choice           choice, t, axis one of the four tent kernels

    >>> MultiplierSymbol('heat', t=0.5).kind
    'heat'
    """

    KINDS = ('heat', 'poisson', 'fractional_laplacian', 'riesz', 'derivative',
             'inverse_laplacian', 'tent_choice')

    def __init__(self, kind, **params):
        if kind not in self.KINDS:
            raise ValueError("Unknown multiplier kind: %r" % (kind,))
        t = params.get('t')
        if kind in ('heat', 'poisson'):
            if t is None or t < 0:
                raise ValueError("%s requires t >= 0, got %r" % (kind, t))
        if kind == 'tent_choice':
            if params.get('choice') not in TENT_CHOICES:
                raise ValueError("Invalid tent choice: %r" % (params.get('choice'),))
            if t is None or not t > 0:
                raise ValueError("tent kernels require t > 0, got %r" % (t,))
        self.kind = kind
        self.params = params

    def __repr__(self):
        return 'MultiplierSymbol(%r, %r)' % (self.kind, self.params)

    def evaluate(self, grid):
        """
        The symbol table on the grid's frequency lattice.

        @rtype: C{numpy.ndarray}
        """
        w = wavenumbers(grid)
        p = self.params
        with np.errstate(divide='ignore', invalid='ignore'):
            if self.kind == 'heat':
                return np.exp(-p['t'] * w.k2)
            if self.kind == 'poisson':
                return np.exp(-p['t'] * w.knorm)
            if self.kind == 'fractional_laplacian':
                beta = p['beta']
                if beta == 0:
                    return np.ones(grid.shape)
                return np.where(w.k2 > 0, w.knorm ** beta, 0.0)
            if self.kind == 'riesz':
                j = _axis(grid, p.get('axis'))
                return np.where(w.knorm_odd > 0, 1j * w.k_odd[j] / w.knorm_odd, 0.0)
            if self.kind == 'derivative':
                return 1j * w.k_odd[_axis(grid, p.get('axis'))]
            if self.kind == 'inverse_laplacian':
                return np.where(w.k2 > 0, 1.0 / w.k2, 0.0)
            return self._tent(grid, w)

    def _tent(self, grid, w):
        choice, t = self.params['choice'], self.params['t']
        if choice == '1a':
            tk = t * w.knorm
            return -tk * np.exp(-tk)
        if choice == '2a':
            tk2 = (t ** 2) * w.k2
            return -2.0 * tk2 * np.exp(-tk2)
        j = _axis(grid, self.params.get('axis'))
        if choice == '1b':
            return t * 1j * w.k_odd[j] * np.exp(-t * w.knorm)
        return t * 1j * w.k_odd[j] * np.exp(-(t ** 2) * w.k2)

    def apply(self, f):
        return ScalarField(f.grid, fourier=f.fourier * self.evaluate(f.grid))


def _axis(grid, axis):
    if axis is None or not 0 <= axis < grid.n_dims:
        raise ValueError("axis must lie in [0, %d), got %r" % (grid.n_dims, axis))
    return axis


@componentwise
def heat_semigroup(f, t):
    """
    e^{t Delta} f: multiply the coefficient at k by exp(-t |k|^2).

    @raise ValueError: If t is negative.
    """
    if t < 0:
        raise ValueError("Negative time: %r" % (t,))
    if t == 0:
        return f
    return MultiplierSymbol('heat', t=t).apply(f)


@componentwise
def poisson_semigroup(f, t):
    """
    e^{-t sqrt(-Delta)} f.

    @raise ValueError: If t is negative.
    """
    if t < 0:
        raise ValueError("Negative time: %r" % (t,))
    if t == 0:
        return f
    return MultiplierSymbol('poisson', t=t).apply(f)


def fractional_laplacian(f, beta):
    """
    (-Delta)^{beta/2} f.  The zero mode is mapped to zero unless beta is 0 (identity).

    @raise ValueError: If beta < 0 and f has a nonzero mean.
    """
    if beta == 0:
        return f
    if beta < 0 and abs(f.mean()) > 1e-12 * max(f.max_abs(), 1e-300):
        raise ValueError("Negative powers of the Laplacian need a mean-zero field (mean %r)" % f.mean())
    return MultiplierSymbol('fractional_laplacian', beta=beta).apply(f)


def riesz_transform(f, j):
    return MultiplierSymbol('riesz', axis=j).apply(f)


def derivative(f, j):
    return MultiplierSymbol('derivative', axis=j).apply(f)


def gradient(f):
    return VectorField([derivative(f, j) for j in range(f.grid.n_dims)])


def divergence(u):
    w = wavenumbers(u.grid)
    return ScalarField(u.grid, fourier=sum(1j * w.k_odd[j] * c.fourier for j, c in enumerate(u)))


def laplacian(f):
    return ScalarField(f.grid, fourier=-wavenumbers(f.grid).k2 * f.fourier)


def inverse_laplacian(f):
    """
    (-Delta)^{-1} f, defined modulo constants (zero mode mapped to zero).
    """
    return MultiplierSymbol('inverse_laplacian').apply(f)


def leray_project(u):
    """
    Project onto divergence-free fields: u_hat - k (k . u_hat) / |k|^2 per frequency.

    The zero mode is left unchanged.  The result carries the divergence-free tag.
    """
    w = wavenumbers(u.grid)
    k_dot_u = sum(w.k_odd[j] * c.fourier for j, c in enumerate(u))
    with np.errstate(divide='ignore', invalid='ignore'):
        factor = np.where(w.k2_odd > 0, k_dot_u / w.k2_odd, 0.0)
    return VectorField([ScalarField(u.grid, fourier=c.fourier - w.k_odd[j] * factor)
                        for j, c in enumerate(u)], divergence_free=True)


def divergence_defect(u):
    """
    max over frequencies of |k . u_hat(k)| relative to max |u_hat| (0 for the zero field).
    """
    w = wavenumbers(u.grid)
    k_dot_u = np.abs(sum(w.k_odd[j] * c.fourier for j, c in enumerate(u)))
    scale = max(float(np.max(np.abs(c.fourier))) for c in u)
    if scale == 0:
        return 0.0
    return float(np.max(k_dot_u)) / scale


def tent_convolution(f, choice, t, axis=None):
    """
    Convolve with the dilated tent kernel psi_t of the given choice.

    Choices C{1a}/C{1b} are built on the Poisson semigroup (t d/dt e^{-t sqrt(-Delta)} and
    t d_j e^{-t sqrt(-Delta)}); C{2a}/C{2b} on the heat semigroup at time t^2.  The vector
    choices need an C{axis}.

    @raise ValueError: If t <= 0 or the choice is unknown.
    """
    return MultiplierSymbol('tent_choice', choice=choice, t=t, axis=axis).apply(f)


def remove_nyquist(f):
    """
    Drop all content on Nyquist planes.
    """
    if isinstance(f, VectorField):
        return VectorField([remove_nyquist(c) for c in f], divergence_free=f.divergence_free)
    return ScalarField(f.grid, fourier=np.where(wavenumbers(f.grid).nyquist_free, f.fourier, 0.0))


def dealias(f):
    """
    Zero every mode outside the 2/3-rule band.
    """
    return ScalarField(f.grid, fourier=np.where(wavenumbers(f.grid).dealias, f.fourier, 0.0))


def product(f, g):
    """
    Pointwise product with 2/3-rule truncation of both factors and of the result.
    """
    f.grid.check(g)
    return dealias(ScalarField(f.grid, values=dealias(f).values * dealias(g).values))


def tensor_divergence(u, v):
    """
    The vector field with components sum_k d_k (u_j v_k), dealiased.
    """
    u.grid.check(*v.components)
    w = wavenumbers(u.grid)
    n = u.n_dims
    out = []
    for j in range(n):
        acc = 0
        for k in range(n):
            acc = acc + 1j * w.k_odd[k] * product(u[j], v[k]).fourier
        out.append(ScalarField(u.grid, fourier=acc))
    return VectorField(out)


def advection(u):
    """
    u . grad u in divergence form (div(u (x) u)); equal to the advective form for
    divergence-free u.
    """
    return tensor_divergence(u, u)


def l2_norm(f):
    """
    Torus L^2 norm by uniform node quadrature; vector fields use the Euclidean magnitude.
    """
    return math.sqrt(float(np.sum(f.magnitude() ** 2)) * f.grid.cell_volume)


def l1_norm(f):
    return float(np.sum(f.magnitude())) * f.grid.cell_volume
