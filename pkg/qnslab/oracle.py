"""
Slow reference implementations for cross-checking the spectral code.

Nothing here uses a Fourier transform on the quantity being checked: heat flow is a direct
sum against the periodized Gaussian kernel, ball seminorms are plain pairwise sums on a
refined lattice, and time integrals use Gauss-Legendre points on a dense geometric mesh.
Costs grow like N^{2n}; keep grids at 32 nodes per axis unless you mean it.
"""
import logging
import math
import itertools

import numpy as np
from scipy.special import roots_legendre

from qnslab import fields
from qnslab.exception import InconsistencyError
from qnslab.spectral import ScalarField

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

TAIL_TOLERANCE = 1e-14
# Pairs per block in the double sums.
BLOCK = 512


def heat_kernel_tail(grid, t, image_count):
    """
    Bound on the relative weight of the periodic images left out of the image sum.
    """
    return math.exp(-(image_count * grid.box_length) ** 2 / (4.0 * t))


def periodized_kernel(grid, t, image_count):
    """
    (4 pi t)^{-n/2} exp(-|d|^2 / 4t) summed over images, on lattice differences d, normalized to
    unit discrete mass.
    """
    n, res, L = grid.n_dims, grid.resolution, grid.box_length
    d = np.arange(res) * grid.spacing
    d = np.where(d >= L / 2, d - L, d)
    diffs = np.meshgrid(*([d] * n), indexing='ij')
    kernel = np.zeros(grid.shape)
    for shift in itertools.product(range(-image_count, image_count + 1), repeat=n):
        r2 = sum((x + s * L) ** 2 for x, s in zip(diffs, shift))
        kernel += np.exp(-r2 / (4.0 * t))
    kernel *= (4 * math.pi * t) ** (-n / 2.0)
    return kernel / (kernel.sum() * grid.cell_volume)


def direct_heat_convolution(f, t, image_count=2):
    """
    e^{t Delta} f as the direct sum over nodes y of f(y) G(x - y) dV.

    @raise ValueError: If t is not positive.
    @raise InconsistencyError: If the omitted images can carry more than 1e-14 of the mass.
    """
    if not t > 0:
        raise ValueError("Time must be positive, got %r" % (t,))
    grid = f.grid
    tail = heat_kernel_tail(grid, t, image_count)
    if tail >= TAIL_TOLERANCE:
        raise InconsistencyError("Image sum with %d shells has tail %g at t=%g" % (image_count, tail, t))
    kernel = periodized_kernel(grid, t, image_count) * grid.cell_volume
    values = f.values
    out = np.zeros(grid.shape)
    axes = tuple(range(grid.n_dims))
    for offset in itertools.product(range(grid.resolution), repeat=grid.n_dims):
        w = kernel[offset]
        if w != 0.0:
            out += w * np.roll(values, offset, axis=axes)
    return ScalarField(grid, values=out)


def _ball_nodes(grid, ball):
    """
    Positions (relative to the ball center) and node values indices of the lattice nodes
    inside an open ball.
    """
    n, res, h = grid.n_dims, grid.resolution, grid.spacing
    reach = int(math.ceil(ball.radius / h)) + 1
    steps = np.array(ball.center) / h
    center = np.round(steps).astype(int)
    # centers within 1e-9 steps of a node sit on it
    shift = np.where(np.abs(steps - center) < 1e-9, 0.0, center - steps)
    span = np.arange(-reach, reach + 1)
    offsets = np.stack([a.ravel() for a in np.meshgrid(*([span] * n), indexing='ij')], axis=1)
    rel = offsets + shift
    inside = np.sqrt(np.sum(rel ** 2, axis=1)) * h < ball.radius
    nodes = (offsets[inside] + center) % res
    return rel[inside] * h, tuple(nodes[:, d] for d in range(n))


def _pairwise(values, positions, weight):
    """
    sum over ordered pairs y != z of |f(y) - f(z)|^2 weight(|y - z|), blockwise.
    """
    total = 0.0
    m = len(values)
    for start in range(0, m, BLOCK):
        v = values[start:start + BLOCK]
        p = positions[start:start + BLOCK]
        dist = np.sqrt(np.sum((p[:, None, :] - positions[None, :, :]) ** 2, axis=2))
        diff2 = (v[:, None] - values[None, :]) ** 2
        with np.errstate(divide='ignore', invalid='ignore'):
            total += float(np.sum(np.where(dist > 0, diff2 * weight(dist), 0.0)))
    return total


def _refined(f, refine_factor):
    return fields.refine(f, refine_factor) if refine_factor > 1 else f


def direct_double_sum_q(f, alpha, ball, refine_factor=2):
    """
    The Q_alpha ball quantity of one ball by an explicit pairwise sum on a refined lattice.
    """
    g = _refined(f, refine_factor)
    grid = g.grid
    n = grid.n_dims
    rel, idx = _ball_nodes(grid, ball)
    total = _pairwise(g.values[idx], rel, lambda d: d ** (-n - 2.0 * alpha))
    return math.sqrt(ball.radius ** (2 * alpha - n) * total * grid.cell_volume ** 2)


def direct_double_sum_campanato(f, alpha, ball, refine_factor=2):
    """
    The Campanato (alpha = 0: BMO) ball quantity of one ball by an explicit pairwise sum.
    """
    g = _refined(f, refine_factor)
    grid = g.grid
    n = grid.n_dims
    rel, idx = _ball_nodes(grid, ball)
    total = _pairwise(g.values[idx], rel, lambda d: 1.0)
    return math.sqrt(ball.radius ** (2 * (alpha - n)) * total * grid.cell_volume ** 2)


def dense_time_quadrature(func, alpha, T, cells_per_octave=4, octaves=24, points=8):
    """
    int_0^T func(t) t^{-alpha} dt with Gauss-Legendre points on geometric cells of ratio
    2^{-1/cells_per_octave}; below the last cell func is frozen at its value there.
    """
    nodes, weights = roots_legendre(points)
    ratio = 2.0 ** (-1.0 / cells_per_octave)
    total = 0.0
    hi = float(T)
    for _ in range(cells_per_octave * octaves):
        lo = hi * ratio
        half = 0.5 * (hi - lo)
        for x, w in zip(nodes, weights):
            t = lo + half * (x + 1.0)
            total += half * w * func(t) * t ** (-alpha)
        hi = lo
    total += func(hi) * hi ** (1.0 - alpha) / (1.0 - alpha)
    return total
