"""
Norm and seminorm evaluators over a finite ball family and a graded time mesh.

Every C{sup} over balls B(x, r) is replaced by a max over a L{BallFamily}, so each returned
L{NormEstimate} is a lower bound for the continuum value.  Ball integrals use node-indicator
quadrature: a node belongs to the (open) ball when its position does.  Time integrals use a
L{TimeMesh}: geometric cells integrated exactly against the power weight and sampled at their
log-midpoints.

Carleson quantities honour the horizon T by admitting only balls with r^2 <= T; for such a
ball the time integral runs over (0, r^2].
"""
import logging
import math

import numpy as np

from qnslab import spectral
from qnslab.spectral import ScalarField, VectorField, heat_semigroup, tent_convolution
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

TRAJECTORY_KINDS = ('X_alpha_T', 'X_2n2', 'X_42')


def check_alpha(alpha):
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1), got %r" % (alpha,))


class Ball(object):
    """
    An open ball of the family, by its center (coordinates) and radius.
    """

    __slots__ = ('center', 'radius')

    def __init__(self, center, radius):
        self.center = tuple(float(c) for c in center)
        self.radius = float(radius)

    def __eq__(self, other):
        return isinstance(other, Ball) and (self.center, self.radius) == (other.center, other.radius)

    def __hash__(self):
        return hash((self.center, self.radius))

    def __repr__(self):
        return 'Ball(center=%r, radius=%r)' % (self.center, self.radius)


class BallLevel(object):
    """
    All balls of one radius: lattice centers plus the integer stencil of the open ball.

    @ivar index: Flat node indices, one row per center, one column per stencil offset.
    @type index: C{numpy.ndarray}
    """

    def __init__(self, grid, radius, stride):
        self.grid = grid
        self.radius = radius
        self.stride = stride
        n, res = grid.n_dims, grid.resolution
        reach = int(math.ceil(radius / grid.spacing))
        span = np.arange(-reach, reach + 1)
        offsets = np.stack([a.ravel() for a in np.meshgrid(*([span] * n), indexing='ij')], axis=1)
        dist = np.sqrt(np.sum(offsets ** 2, axis=1)) * grid.spacing
        self.offsets = offsets[dist < radius]

        axis = np.arange(res // 4, 3 * res // 4 + 1, stride)
        self.centers = np.stack([a.ravel() for a in np.meshgrid(*([axis] * n), indexing='ij')], axis=1)
        nodes = (self.centers[:, None, :] + self.offsets[None, :, :]) % res
        self.index = np.ravel_multi_index(tuple(nodes[..., d] for d in range(n)), grid.shape)

    def __len__(self):
        return len(self.centers)

    @property
    def stencil_size(self):
        return len(self.offsets)

    def gather(self, values):
        return np.asarray(values).ravel()[self.index]

    def integrals(self, density):
        """
        Node-indicator integral of C{density} over every ball of this level.
        """
        return self.gather(density).sum(axis=1) * self.grid.cell_volume

    def ball(self, i):
        return Ball(self.centers[i] * self.grid.spacing, self.radius)


class BallFamily(object):
    """
    Dyadic radii r_m = (L/8) 2^-m, m = 0..M-1, with lattice centers covering the central cube
    [L/4, 3L/4]^n at stride max(dx, floor(stride_factor r / dx) dx).
    """

    def __init__(self, grid, dyadic_radii=4, stride_factor=0.5):
        if dyadic_radii < 1:
            raise ValueError("At least one radius is required")
        if not stride_factor > 0:
            raise ValueError("stride_factor must be positive")
        self.grid = grid
        self.dyadic_radii = dyadic_radii
        self.stride_factor = stride_factor
        self.levels = []
        for m in range(dyadic_radii):
            radius = grid.box_length / 8.0 * 2.0 ** -m
            stride = max(1, int(math.floor(stride_factor * radius / grid.spacing + 1e-9)))
            self.levels.append(BallLevel(grid, radius, stride))
        self.log = logging.getLogger('%s.%s' % (self.__module__, self.__class__.__name__))
        self.log.debug("Family on %r: %d balls over radii %s", grid, len(self),
                       [lvl.radius for lvl in self.levels])

    @classmethod
    def from_config(cls, grid, cfg):
        return cls(grid, cfg.getint('balls', 'dyadic_radii'), cfg.getfloat('balls', 'stride_factor'))

    @property
    def radii(self):
        return [lvl.radius for lvl in self.levels]

    def __len__(self):
        return sum(len(lvl) for lvl in self.levels)

    def balls(self):
        for lvl in self.levels:
            for i in range(len(lvl)):
                yield lvl.ball(i)

    def rematched(self, grid):
        """
        The family with the same lattice layout on another grid of equal resolution.
        """
        return BallFamily(grid, self.dyadic_radii, self.stride_factor)

    def summary(self):
        return {'n_balls': len(self), 'radii': self.radii, 'dyadic_radii': self.dyadic_radii,
                'stride_factor': self.stride_factor, 'resolution': self.grid.resolution}


class TimeMesh(object):
    """
    A decreasing geometric partition of (0, T_cap].

    Edges are e_k = T_cap rho^k for k = 0..K.  The nodes are e_0..e_{K-1}; the cell below
    node k is (e_{k+1}, e_k] and is sampled at its log-midpoint sqrt(e_k e_{k+1}).
    """

    def __init__(self, t_cap, rho=0.5, levels=24):
        if not t_cap > 0:
            raise ValueError("t_cap must be positive, got %r" % (t_cap,))
        if not 0.0 < rho < 1.0:
            raise ValueError("rho must lie in (0, 1), got %r" % (rho,))
        if levels < 1:
            raise ValueError("levels must be positive")
        self.t_cap = float(t_cap)
        self.rho = float(rho)
        self.levels = int(levels)
        self.edges = self.t_cap * self.rho ** np.arange(self.levels + 1)

    @classmethod
    def for_horizon(cls, grid, T, rho=0.5, levels=24):
        """
        A mesh capped at min(T, (L/8)^2), the largest squared radius of a default family.
        """
        if not T > 0:
            raise ValueError("Horizon must be positive, got %r" % (T,))
        return cls(min(T, (grid.box_length / 8.0) ** 2), rho, levels)

    def __len__(self):
        return self.levels

    def __eq__(self, other):
        return (isinstance(other, TimeMesh) and
                (self.t_cap, self.rho, self.levels) == (other.t_cap, other.rho, other.levels))

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return 'TimeMesh(t_cap=%r, rho=%r, levels=%d)' % (self.t_cap, self.rho, self.levels)

    @property
    def nodes(self):
        return self.edges[:-1]

    @property
    def samples(self):
        return np.sqrt(self.edges[:-1] * self.edges[1:])

    def cell_weights(self, exponent, upper=None):
        """
        Exact integrals of t^exponent over each cell, clipped to (0, upper].

        >>> TimeMesh(1.0, 0.5, 2).cell_weights(0.0)
        array([0.5 , 0.25])
        """
        hi = self.edges[:-1] if upper is None else np.minimum(self.edges[:-1], upper)
        lo = self.edges[1:]
        hi = np.maximum(hi, lo)
        if exponent == -1.0:
            return np.log(hi / lo)
        q = exponent + 1.0
        return (hi ** q - lo ** q) / q

    def weights(self, alpha, upper=None):
        return self.cell_weights(-alpha, upper)

    def scaled(self, factor):
        return TimeMesh(self.t_cap * factor, self.rho, self.levels)

    def refined(self):
        """
        Same span with twice the cells (ratio sqrt(rho)).
        """
        return TimeMesh(self.t_cap, math.sqrt(self.rho), 2 * self.levels)

    def summary(self):
        return {'t_cap': self.t_cap, 'rho': self.rho, 'levels': self.levels}


class NormEstimate(object):
    """
    A norm value plus the ball that attains it and a summary of the sampling used.

    @ivar parts: Named components of composite norms (for example C{linf} and C{carleson}).
    @type parts: C{dict}
    """

    def __init__(self, kind, value, maximizing_ball=None, family=None, mesh=None,
                 alpha=None, T=None, parts=None):
        self.kind = kind
        self.value = float(value)
        self.maximizing_ball = maximizing_ball
        self.family = family.summary() if hasattr(family, 'summary') else family
        self.mesh = mesh.summary() if hasattr(mesh, 'summary') else mesh
        self.alpha = alpha
        self.T = T
        self.parts = dict(parts or {})

    def __float__(self):
        return self.value

    def __repr__(self):
        return 'NormEstimate(%s=%r, ball=%r)' % (self.kind, self.value, self.maximizing_ball)

    def as_record(self, resolution=None, seed=None, n_dims=2):
        """
        The report row (see L{qnslab.engine.NORM_COLUMNS}).
        """
        ball = self.maximizing_ball
        record = {
            'norm_kind': self.kind,
            'alpha': self.alpha if self.alpha is not None else '',
            'T': self.T if self.T is not None else '',
            'value': self.value,
        }
        for axis, name in enumerate(('max_ball_cx', 'max_ball_cy', 'max_ball_cz')[:n_dims]):
            record[name] = ball.center[axis] if ball is not None else ''
        record['max_ball_r'] = ball.radius if ball is not None else ''
        record['n_balls'] = self.family['n_balls'] if self.family else 0
        record['n_time_levels'] = self.mesh['levels'] if self.mesh else 0
        record['resolution'] = resolution if resolution is not None else ''
        record['seed'] = seed if seed is not None else ''
        return record


def _components(f):
    return list(f) if isinstance(f, VectorField) else [f]


def best_ball(level_values, family):
    """
    Reduce per-level arrays of ball values to (max value, maximizing ball), in level order.
    """
    best, ball = 0.0, None
    for lvl, vals in zip(family.levels, level_values):
        if vals is None or not len(vals):
            continue
        i = int(np.argmax(vals))
        if ball is None or vals[i] > best:
            best, ball = float(vals[i]), lvl.ball(i)
    return best, ball


def lebesgue_norm(f, p):
    """
    Torus L^p norm (Euclidean magnitude for vector fields); p may be C{numpy.inf}.
    """
    mag = f.magnitude()
    if p == np.inf:
        return float(np.max(mag))
    if not p >= 1:
        raise ValueError("p must be >= 1, got %r" % (p,))
    return float(np.sum(mag ** p) * f.grid.cell_volume) ** (1.0 / p)


def q_alpha_seminorm(f, alpha, family):
    """
    The Q_alpha seminorm: max over balls of

        ( r^{2 alpha - n} sum_{y != z in B} |f(y) - f(z)|^2 / |y - z|^{n + 2 alpha} dV^2 )^{1/2}.

    With K_ij = |y_i - y_j|^{-n-2 alpha} (zero diagonal) and row sums R_i the double sum
    equals 2 (sum_i v_i^2 R_i - v^T K v) for the ball-centered samples v.

    @raise ValueError: If alpha lies outside [0, 1).
    """
    check_alpha(alpha)
    grid = f.grid
    n = grid.n_dims
    level_values = []
    for lvl in family.levels:
        d = lvl.offsets[:, None, :] - lvl.offsets[None, :, :]
        dist = np.sqrt(np.sum(d ** 2, axis=2)) * grid.spacing
        with np.errstate(divide='ignore'):
            kernel = np.where(dist > 0, dist ** (-n - 2.0 * alpha), 0.0)
        rows = kernel.sum(axis=1)
        total = np.zeros(len(lvl))
        for comp in _components(f):
            v = lvl.gather(comp.values)
            v = v - v.mean(axis=1, keepdims=True)
            total += 2.0 * (np.sum(v ** 2 * rows, axis=1) - np.sum((v @ kernel) * v, axis=1))
        total = np.maximum(total, 0.0) * grid.cell_volume ** 2
        level_values.append(np.sqrt(lvl.radius ** (2 * alpha - n) * total))
    value, ball = best_ball(level_values, family)
    return NormEstimate('Q_alpha', value, ball, family, alpha=alpha)


def campanato_seminorm(f, alpha, family):
    """
    max over balls of ( r^{2(alpha - n)} int_B int_B |f(y) - f(z)|^2 dy dz )^{1/2}.
    """
    grid = f.grid
    n = grid.n_dims
    level_values = []
    for lvl in family.levels:
        m = lvl.stencil_size
        total = np.zeros(len(lvl))
        for comp in _components(f):
            v = lvl.gather(comp.values)
            v = v - v.mean(axis=1, keepdims=True)
            total += 2.0 * m * np.sum(v ** 2, axis=1)
        total *= grid.cell_volume ** 2
        level_values.append(np.sqrt(lvl.radius ** (2 * (alpha - n)) * total))
    value, ball = best_ball(level_values, family)
    kind = 'BMO' if alpha == 0 else 'Campanato'
    return NormEstimate(kind, value, ball, family, alpha=alpha)


def bmo_seminorm(f, family):
    return campanato_seminorm(f, 0.0, family)


def riesz_campanato(f, alpha, family):
    """
    The Campanato seminorm of (-Delta)^{alpha/2} f, i.e. f measured in
    (-Delta)^{-alpha/2} L_{2,n-2alpha}.
    """
    check_alpha(alpha)
    estimate = campanato_seminorm(spectral.fractional_laplacian(f, alpha), alpha, family)
    estimate.kind = 'Riesz_Campanato'
    return estimate


def carleson_levels(densities, mesh, family, alpha, exponent, T=np.inf, factor=1.0, threads=1):
    """
    Per-level arrays of ( factor r^{2 alpha - n} sum_k w_k(r) int_B density_k )^{1/2}, where
    w_k(r) integrates t^exponent over cell k clipped to (0, r^2].

    @param densities: One array of node values per mesh cell (sampled at the log-midpoints).
    @param T: Only balls with r^2 <= T are admitted; other levels give C{None}.
    """
    n = family.grid.n_dims

    def level(lvl):
        r2 = lvl.radius ** 2
        if r2 > T * (1 + 1e-12):
            return None
        weights = mesh.cell_weights(exponent, upper=r2)
        acc = np.zeros(len(lvl))
        for w, density in zip(weights, densities):
            if w > 0:
                acc += w * lvl.integrals(density)
        return np.sqrt(np.maximum(acc, 0.0) * factor * lvl.radius ** (2 * alpha - n))

    return ordered_map(level, family.levels, threads)


def _carleson(densities, mesh, family, alpha, T, threads=1):
    return best_ball(carleson_levels(densities, mesh, family, alpha, -alpha, T, threads=threads), family)


def heat_densities(f, mesh):
    return [heat_semigroup(f, t).magnitude() ** 2 for t in mesh.samples]


def q_inverse_norm(f, alpha, T, family, mesh, threads=1):
    """
    The T-truncated Q_alpha^{-1} norm: max over balls with r^2 <= T of

        ( r^{2 alpha - n} int_0^{r^2} int_B |e^{t Delta} f|^2 t^{-alpha} dy dt )^{1/2}.

    Pass C{T = numpy.inf} for the untruncated norm (capped by the family radii).

    A mesh capped below the largest admitted r^2 truncates the time integral; this is logged
    as a warning.

    @raise ValueError: If alpha lies outside [0, 1) or T <= 0.
    """
    check_alpha(alpha)
    if not T > 0:
        raise ValueError("Horizon must be positive, got %r" % (T,))
    reach = max([r ** 2 for r in family.radii if r ** 2 <= T * (1 + 1e-12)] or [0.0])
    if mesh.t_cap < reach * (1 - 1e-12):
        logger.warning("Mesh cap %g is below r^2 = %g; larger radii only see t <= %g",
                       mesh.t_cap, reach, mesh.t_cap)
    value, ball = _carleson(heat_densities(f, mesh), mesh, family, alpha, T, threads)
    return NormEstimate('Q_inverse', value, ball, family, mesh, alpha=alpha, T=T)


def morrey_norm(f, p, family):
    """
    max over balls of ( r^{2-n} int_B |f|^p )^{1/p}, p in {2, 4}.
    """
    if p not in (2, 4):
        raise ValueError("Morrey exponent must be 2 or 4, got %r" % (p,))
    n = f.grid.n_dims
    density = f.magnitude() ** p
    level_values = [(lvl.radius ** (2 - n) * lvl.integrals(density)) ** (1.0 / p) for lvl in family.levels]
    value, ball = best_ball(level_values, family)
    return NormEstimate('Morrey%d' % p, value, ball, family)


def besov_norm(f, mesh):
    """
    max over mesh nodes t of t^{1/2} max |e^{t Delta} f|.
    """
    best, best_t = 0.0, None
    for t in mesh.nodes:
        v = math.sqrt(t) * heat_semigroup(f, t).max_abs()
        if best_t is None or v > best:
            best, best_t = v, t
    return NormEstimate('Besov', best, None, None, mesh, parts={'t_max': best_t})


def besov_p_norm(f, p, mesh):
    """
    max over mesh nodes of t^{(1 - n/p)/2} ||e^{t Delta} f||_p, the Besov norm of
    regularity n/p - 1 (p > n for a negative index).
    """
    n = f.grid.n_dims
    power = 0.5 * (1.0 - float(n) / p)
    best, best_t = 0.0, None
    for t in mesh.nodes:
        v = t ** power * lebesgue_norm(heat_semigroup(f, t), p)
        if best_t is None or v > best:
            best, best_t = v, t
    return NormEstimate('Besov_p%g' % p, best, None, None, mesh, parts={'t_max': best_t, 'p': p})


def trajectory_norm(g, kind, family, alpha=None, T=np.inf, threads=1):
    """
    Path-space norms of a trajectory sampled on a L{TimeMesh}.

      - C{X_alpha_T}: sup_t t^{1/2} max|g| plus the Carleson part of L{q_inverse_norm} with
        g(t) in place of the heat extension;
      - C{X_2n2}: sup_t t^{1/2} max|g| plus sup_t morrey_2(g(t));
      - C{X_42}: sup_t t^{1/2} max|g| plus sup_t t^{1/4} morrey_4(g(t)).

    @raise ValueError: For an empty trajectory or an unknown kind, or X_alpha_T without alpha.
    """
    if kind not in TRAJECTORY_KINDS:
        raise ValueError("Unknown trajectory norm: %r" % (kind,))
    if not len(g):
        raise ValueError("Empty trajectory")
    times = g.times
    linf = max(math.sqrt(t) * u.max_abs() for t, u in zip(times, g))
    ball = None
    if kind == 'X_alpha_T':
        if alpha is None:
            raise ValueError("X_alpha_T needs alpha")
        check_alpha(alpha)
        second, ball = _carleson([u.magnitude() ** 2 for u in g], g.mesh, family, alpha, T, threads)
    else:
        second = 0.0
        p = 2 if kind == 'X_2n2' else 4
        for t, u in zip(times, g):
            est = morrey_norm(u, p, family)
            v = est.value if p == 2 else t ** 0.25 * est.value
            if ball is None or v > second:
                second, ball = v, est.maximizing_ball
    return NormEstimate(kind, linf + second, ball, family, g.mesh, alpha=alpha, T=T,
                        parts={'linf': linf, 'second': second})


def tent_characterization(f, alpha, choice, family, mesh, threads=1):
    """
    max over balls of ( r^{2 alpha - n} int_0^r int_B |psi_t * f|^2 t^{-1-2 alpha} dy dt )^{1/2}.

    The integral is taken in s = t^2 on the heat-time mesh, where the weight becomes
    s^{-1-alpha} ds / 2.  Vector kernels sum their axis components in quadrature.

    @raise ValueError: If the choice is unknown or alpha lies outside [0, 1).
    """
    check_alpha(alpha)
    if choice not in spectral.TENT_CHOICES:
        raise ValueError("Invalid tent choice: %r" % (choice,))
    axes = range(f.grid.n_dims) if choice in spectral.VECTOR_TENT_CHOICES else [None]
    densities = []
    for s in mesh.samples:
        t = math.sqrt(s)
        densities.append(sum(tent_convolution(f, choice, t, axis).values ** 2 for axis in axes))
    levels = carleson_levels(densities, mesh, family, alpha, -1.0 - alpha, factor=0.5, threads=threads)
    value, ball = best_ball(levels, family)
    return NormEstimate('Tent_%s' % choice, value, ball, family, mesh, alpha=alpha)


def ball_profiles(f, alpha, family, mesh, threads=1):
    """
    Per-level Carleson values of the heat extension of f with no horizon restriction.
    """
    check_alpha(alpha)
    return carleson_levels(heat_densities(f, mesh), mesh, family, alpha, -alpha, threads=threads)


def vanishing_profile(f, alpha, T_list, family, mesh, threads=1):
    """
    q_inverse_norm(f, alpha, T) for each T in a decreasing list, as (T, value) pairs.

    The heat extension is computed once; each T only restricts the admitted balls, so the
    values are exactly nonincreasing.

    @raise ValueError: If T_list is not strictly decreasing.
    """
    T_list = [float(T) for T in T_list]
    if any(b >= a for a, b in zip(T_list, T_list[1:])):
        raise ValueError("T_list must be decreasing: %r" % (T_list,))
    profiles = ball_profiles(f, alpha, family, mesh, threads)
    result = []
    for T in T_list:
        admitted = [p if lvl.radius ** 2 <= T * (1 + 1e-12) else None
                    for p, lvl in zip(profiles, family.levels)]
        result.append((T, best_ball(admitted, family)[0]))
    return result


def x42_vanishing_profile(f, T_list, family, mesh):
    """
    X_{4,2;T} norm of the heat extension of f restricted to sample times t <= T, per T.
    """
    T_list = [float(T) for T in T_list]
    if any(b >= a for a, b in zip(T_list, T_list[1:])):
        raise ValueError("T_list must be decreasing: %r" % (T_list,))
    per_time = []
    for t in mesh.samples:
        u = heat_semigroup(f, t)
        per_time.append((t, math.sqrt(t) * u.max_abs(), t ** 0.25 * morrey_norm(u, 4, family).value))
    result = []
    for T in T_list:
        inside = [(a, b) for t, a, b in per_time if t <= T]
        value = (max(a for a, _ in inside) + max(b for _, b in inside)) if inside else 0.0
        result.append((T, value))
    return result


def heat_linf_morrey_ratio(f, family, mesh):
    """
    sup_t t^{1/2} max|e^{t Delta} f| divided by morrey_2(f) (0 for the zero field).
    """
    denom = morrey_norm(f, 2, family).value
    if denom == 0:
        return 0.0
    return max(math.sqrt(t) * heat_semigroup(f, t).max_abs() for t in mesh.samples) / denom
