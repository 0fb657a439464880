"""
Singular time-integral operators built on the heat semigroup.

Time integrals of the form int_0^t e^{(t-s) Delta} F(s) ds are evaluated by product
integration: per Fourier mode the kernel e^{-(t-s)|k|^2} is integrated exactly against the
piecewise-linear interpolant of the samples F(s_i).  Below the earliest sample the interpolant
is held constant; between the latest sample not exceeding t and t itself it holds that sample,
so the result depends on samples at s <= t only (apart from the earliest sample, which stands
in for F near s = 0).
"""
import logging
import math
from collections import namedtuple

import numpy as np
import scipy.integrate
from scipy.special import roots_legendre

from qnslab import spectral
from qnslab.exception import GridMismatch, InconsistencyError
from qnslab.spaces import check_alpha, carleson_levels, trajectory_norm, best_ball
from qnslab.spectral import ScalarField, VectorField, wavenumbers
from qnslab.util.concurrency import ordered_map

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

# Gauss-Legendre points per mesh cell.
GAUSS_POINTS = 8

Lemma23Result = namedtuple('Lemma23Result', 'lhs rhs ratio')
Lemma24Result = namedtuple('Lemma24Result', 'lhs J L1part ratio')
BilinearRatios = namedtuple('BilinearRatios', 'Linf_ratio Carleson_ratio')
SchurRow = namedtuple('SchurRow', 'alpha zeta sup_row sup_column')


class Trajectory(object):
    """
    A field sampled at the log-midpoints of a L{qnslab.spaces.TimeMesh}.

    C{fields[k]} holds g(s_k) with s_k = C{mesh.samples[k]}; samples decrease with k.

    @ivar kind: C{'scalar'} or C{'vector'}.
    @type kind: C{str}
    """

    def __init__(self, mesh, fields):
        fields = list(fields)
        if len(fields) != len(mesh):
            raise GridMismatch("%d fields for a mesh of %d cells" % (len(fields), len(mesh)))
        if fields:
            grid = fields[0].grid
            for f in fields:
                if f.grid != grid:
                    raise GridMismatch("Trajectory fields live on different grids")
            kinds = set(isinstance(f, VectorField) for f in fields)
            if len(kinds) > 1:
                raise ValueError("Trajectory mixes scalar and vector fields")
        self.mesh = mesh
        self.fields = fields
        self.kind = 'vector' if fields and isinstance(fields[0], VectorField) else 'scalar'

    @classmethod
    def zeros(cls, mesh, grid, kind='scalar'):
        make = VectorField.zeros if kind == 'vector' else ScalarField.zeros
        return cls(mesh, [make(grid) for _ in range(len(mesh))])

    @classmethod
    def heat_flow(cls, f, mesh):
        return cls(mesh, [spectral.heat_semigroup(f, t) for t in mesh.samples])

    @classmethod
    def from_function(cls, mesh, func):
        return cls(mesh, [func(t) for t in mesh.samples])

    @property
    def grid(self):
        return self.fields[0].grid

    @property
    def times(self):
        return self.mesh.samples

    @property
    def horizon(self):
        return self.mesh.t_cap

    def __len__(self):
        return len(self.fields)

    def __getitem__(self, k):
        return self.fields[k]

    def __iter__(self):
        return iter(self.fields)

    def index_of(self, t):
        """
        Index of the sample at time t.

        @raise ValueError: If t is not a sample time.
        """
        times = self.times
        k = int(np.argmin(np.abs(np.log(times / t)))) if t > 0 else -1
        if k < 0 or abs(times[k] - t) > 1e-12 * t:
            raise ValueError("%r is not a sample time of %r" % (t, self.mesh))
        return k

    def check_compatible(self, other):
        if self.mesh != other.mesh:
            raise GridMismatch("Trajectories on different meshes: %r, %r" % (self.mesh, other.mesh))
        if self.grid != other.grid:
            raise GridMismatch("Trajectories on different grids")


def phi1(z):
    """
    (1 - e^{-z}) / z, with its limit 1 at z = 0.
    """
    z = np.asarray(z, dtype=float)
    small = z < 1e-8
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.where(small, 1.0 - 0.5 * z, -np.expm1(-z) / np.where(small, 1.0, z))


def phi2(z):
    """
    (z - 1 + e^{-z}) / z^2, with a series near z = 0.
    """
    z = np.asarray(z, dtype=float)
    small = z < 1e-3
    zs = np.where(small, 1.0, z)
    with np.errstate(divide='ignore', invalid='ignore'):
        direct = (zs + np.expm1(-zs)) / zs ** 2
    series = 0.5 - z / 6.0 + z ** 2 / 24.0 - z ** 3 / 120.0
    return np.where(small, series, direct)


def product_weights(times, t, lam):
    """
    Product-integration weights for int_0^t e^{-(t-s) lam} F(s) ds.

    @param times: Sample times in increasing order.
    @param lam: Array of decay rates (one per Fourier mode).

    @return: List of (sample index, weight array) pairs, in increasing sample order.
    """
    weights = {}

    def add(i, w):
        weights[i] = weights[i] + w if i in weights else w

    top = min(t, times[0])
    if top > 0:
        add(0, np.exp(-(t - top) * lam) * top * phi1(lam * top))
    i = 0
    while i + 1 < len(times) and times[i + 1] <= t:
        a, b = times[i], times[i + 1]
        h = b - a
        z = lam * h
        eb = np.exp(-(t - b) * lam)
        whole = eb * h * phi1(z)
        upper = eb * h * phi2(z)
        add(i, whole - upper)
        add(i + 1, upper)
        i += 1
    if t > times[i] and t > times[0]:
        h = t - times[i]
        add(i, h * phi1(lam * h))
    return sorted(weights.items())


def _integrate(traj, t, symbol=None):
    """
    int_0^t e^{(t-s) Delta} (symbol * g(s)) ds for a trajectory g, as Fourier arrays per component.
    """
    grid = traj.grid
    lam = wavenumbers(grid).k2
    order = np.argsort(traj.times)
    times = traj.times[order]
    comps = 1 if traj.kind == 'scalar' else grid.n_dims
    acc = [np.zeros(grid.shape, dtype=complex) for _ in range(comps)]
    for i, w in product_weights(times, t, lam):
        f = traj[order[i]]
        parts = [f] if traj.kind == 'scalar' else list(f)
        for c, part in enumerate(parts):
            coeff = part.fourier if symbol is None else symbol * part.fourier
            acc[c] += w * coeff
    return acc


def _check_time(traj, t):
    if not t > 0:
        raise ValueError("Time must be positive, got %r" % (t,))
    if t > traj.horizon * (1 + 1e-12):
        raise ValueError("Time %r beyond the trajectory horizon %r" % (t, traj.horizon))


def duhamel_laplacian(f, t):
    """
    I(f, t) = int_0^t e^{(t-s) Delta} Delta f(s) ds for a scalar trajectory.

    @raise ValueError: If t is not in (0, horizon].
    """
    _check_time(f, t)
    lam = wavenumbers(f.grid).k2
    return ScalarField(f.grid, fourier=_integrate(f, t, -lam)[0])


def _squared_norm(f):
    return spectral.l2_norm(f) ** 2


def lemma23_check(f, alpha, T=None):
    """
    Compare int_0^T ||I(f, t)||_2^2 t^{-alpha} dt with int_0^T ||f(t)||_2^2 t^{-alpha} dt.

    @return: (lhs, rhs, lhs / rhs), all zero when both sides vanish.
    @raise InconsistencyError: If rhs vanishes while lhs does not.
    """
    check_alpha(alpha)
    T = f.horizon if T is None else T
    weights = f.mesh.weights(alpha, upper=T)
    lhs = rhs = 0.0
    for w, t, g in zip(weights, f.times, f):
        if w > 0:
            lhs += w * _squared_norm(duhamel_laplacian(f, t))
            rhs += w * _squared_norm(g)
    return _ratio(Lemma23Result, lhs, rhs, lhs, rhs)


def _ratio(result_type, lhs, denom, *values):
    tol = 1e-300
    if denom <= tol:
        if lhs > 1e-14:
            raise InconsistencyError("Zero right-hand side against lhs = %r" % lhs)
        return result_type(*([0.0] * len(result_type._fields)))
    return result_type(*(values + (lhs / denom,)))


def schur_kernel(s, t, alpha, zeta):
    """
    K(s, t) = 1_{0 <= s <= t} (s/t)^{alpha/2} |zeta|^2 e^{-(t-s)|zeta|^2}.
    """
    if s < 0 or s > t:
        return 0.0
    return (s / t) ** (alpha / 2.0) * zeta ** 2 * math.exp(-(t - s) * zeta ** 2)


def schur_row_mass(alpha, zeta, t):
    """
    int_0^t K(s, t) ds, integrated in u = (t - s) zeta^2.
    """
    z2 = zeta ** 2
    value, _ = scipy.integrate.quad(lambda u: max(1.0 - u / (t * z2), 0.0) ** (alpha / 2.0) * math.exp(-u),
                                    0.0, t * z2, epsabs=1e-13, epsrel=1e-12, limit=200)
    return value


def schur_column_mass(alpha, zeta, s):
    """
    int_s^inf K(s, t) dt, integrated in u = (t - s) zeta^2.
    """
    z2 = zeta ** 2
    value, _ = scipy.integrate.quad(lambda u: (s / (s + u / z2)) ** (alpha / 2.0) * math.exp(-u),
                                    0.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    return value


def schur_kernel_integrals(alpha, zeta_values, t_values):
    """
    Row and column masses of the Schur kernel, maximized over the sample times.

    @return: One L{SchurRow} per zeta.
    """
    check_alpha(alpha)
    rows = []
    for zeta in zeta_values:
        if not zeta > 0:
            raise ValueError("zeta must be positive, got %r" % (zeta,))
        sup_row = max(schur_row_mass(alpha, zeta, t) for t in t_values)
        sup_col = max(schur_column_mass(alpha, zeta, s) for s in t_values)
        rows.append(SchurRow(alpha, zeta, sup_row, sup_col))
    return rows


def running_integral(f):
    """
    F(t) = int_0^t f(s) ds at every sample time, reading each sample as the value of f on its
    whole cell (the first cell also covers (0, e_K]).
    """
    mesh = f.mesh
    edges = mesh.edges
    K = len(mesh)
    acc = None
    out = [None] * K
    for k in range(K - 1, -1, -1):
        below = edges[k + 1] if k < K - 1 else 0.0
        partial = f[k] * (mesh.samples[k] - below)
        out[k] = partial if acc is None else acc + partial
        whole = f[k] * (edges[k] - below)
        acc = whole if acc is None else acc + whole
    return Trajectory(mesh, out)


def lemma24_check(f, alpha, family):
    """
    Compare int_0^1 ||sqrt(-Delta) e^{t Delta} int_0^t f(s) ds||_2^2 t^{-alpha} dt with
    J(f; alpha) int_0^1 ||f(t)||_1 t^{-alpha} dt on a trajectory over (0, 1).

    Within each cell F(t) = int_0^t f is linear in t; the lhs integrand is summed over modes by
    Parseval and integrated with Gauss-Legendre points per cell.

    @return: (lhs, J, L1part, lhs / (J L1part)).
    @raise ValueError: If the trajectory horizon is not 1.
    @raise InconsistencyError: If J L1part vanishes while lhs does not.
    """
    check_alpha(alpha)
    mesh = f.mesh
    if abs(mesh.t_cap - 1.0) > 1e-12:
        raise ValueError("Rescale time to (0, 1) first; horizon is %r" % mesh.t_cap)
    grid = f.grid
    lam = wavenumbers(grid).k2
    edges = mesh.edges
    nodes, gl_weights = roots_legendre(GAUSS_POINTS)
    norm = grid.volume / float(grid.resolution ** grid.n_dims) ** 2

    def coefficients(field):
        return [field.fourier] if isinstance(field, ScalarField) else [c.fourier for c in field]

    lhs = 0.0
    # (0, e_K] carries the value of the lowest cell
    acc = [edges[-1] * c for c in coefficients(f[len(mesh) - 1])]
    for k in range(len(mesh) - 1, -1, -1):
        lo, hi = edges[k + 1], edges[k]
        rate = coefficients(f[k])
        half = 0.5 * (hi - lo)
        for x, w in zip(nodes, gl_weights):
            t = lo + half * (x + 1.0)
            damp = lam * np.exp(-2.0 * t * lam)
            energy = sum(float(np.sum(damp * np.abs(a + (t - lo) * r) ** 2)) for a, r in zip(acc, rate))
            lhs += half * w * t ** (-alpha) * energy * norm
        acc = [a + (hi - lo) * r for a, r in zip(acc, rate)]

    weights = mesh.weights(alpha)
    l1part = sum(w * spectral.l1_norm(g) for w, g in zip(weights, f))
    levels = carleson_levels([g.magnitude() for g in f], mesh, family, alpha, -alpha)
    J = best_ball([None if v is None else v ** 2 for v in levels], family)[0]
    return _ratio(Lemma24Result, lhs, J * l1part, lhs, J, l1part)


def bilinear_integrand(u, v):
    """
    P div(u (x) v) with dealiased products.
    """
    return spectral.leray_project(spectral.tensor_divergence(u, v))


def integrand_trajectory(u, v, threads=1):
    u.check_compatible(v)
    fields = ordered_map(lambda pair: bilinear_integrand(*pair), list(zip(u, v)), threads)
    return Trajectory(u.mesh, fields)


def propagate(integrand, t):
    """
    int_0^t e^{(t-s) Delta} integrand(s) ds for a precomputed vector integrand trajectory.
    """
    comps = _integrate(integrand, t)
    return VectorField([ScalarField(integrand.grid, fourier=c) for c in comps], divergence_free=True)


def bilinear_B(u, v, t):
    """
    B(u, v; t) = int_0^t e^{(t-s) Delta} P div(u (x) v)(s) ds.

    @raise GridMismatch: If u and v do not share mesh and grid.
    @raise ValueError: If t is not in (0, horizon].
    """
    u.check_compatible(v)
    _check_time(u, t)
    return propagate(integrand_trajectory(u, v), t)


def bilinear_trajectory(u, v, threads=1):
    """
    B(u, v; s_k) at every sample time of the common mesh.
    """
    integrand = integrand_trajectory(u, v, threads)
    fields = ordered_map(lambda t: propagate(integrand, t), list(u.times), threads)
    return Trajectory(u.mesh, fields)


def bilinear_bounds_check(u, v, alpha, T, family, threads=1):
    """
    Measured constants of the L^inf and Carleson bounds for B in the X_{alpha;T} norm.

    @return: (sup_t t^{1/2} max|B| / (|u|_X |v|_X), Carleson part of B / (|u|_X |v|_X)).
    """
    xu = trajectory_norm(u, 'X_alpha_T', family, alpha, T, threads).value
    xv = trajectory_norm(v, 'X_alpha_T', family, alpha, T, threads).value
    if xu == 0 or xv == 0:
        return BilinearRatios(0.0, 0.0)
    b = bilinear_trajectory(u, v, threads)
    estimate = trajectory_norm(b, 'X_alpha_T', family, alpha, T, threads)
    denom = xu * xv
    return BilinearRatios(estimate.parts['linf'] / denom, estimate.parts['second'] / denom)


def pressure_from_velocity(u):
    """
    p = (-Delta)^{-1} d_j d_k (u_j u_k), mean zero.

    @raise ValueError: If u is not divergence-free.
    """
    if spectral.divergence_defect(u) > spectral.DIVERGENCE_TOLERANCE:
        raise ValueError("Pressure recovery needs a divergence-free velocity")
    return spectral.inverse_laplacian(spectral.divergence(spectral.advection(u)))
