"""
Mild solutions of the incompressible Navier-Stokes equations on the torus.

The mild formulation

    u(t) = e^{t Delta} a - B(u, u; t),    B(u, v; t) = int_0^t e^{(t-s) Delta} P div(u (x) v)(s) ds

is solved by Picard iteration on the sample times of a L{qnslab.spaces.TimeMesh}.  Each
iteration records the path-space norms of the iterate and the decay of successive differences;
a Morrey-norm gate on the data decides whether contraction is expected at all.  An independent
integrating-factor Runge-Kutta stepper cross-checks the fixed point.
"""
import copy
import logging
import math
from collections import namedtuple

import numpy as np

from qnslab import duhamel, fields, spectral
from qnslab.duhamel import Trajectory
from qnslab.exception import DivergenceError, InconsistencyError
from qnslab.spaces import BallFamily, TimeMesh, check_alpha, morrey_norm, q_alpha_seminorm, trajectory_norm
from qnslab.spectral import DIVERGENCE_TOLERANCE, Grid, ScalarField, VectorField

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

# Required decay of successive Picard differences from the third iteration on.
CONTRACTION_RATIO = 0.5

DIAGNOSTIC_COLUMNS = ('iter', 'X_alpha', 'X_2n2', 'X_42', 'd_j', 'contraction_flag')

DivRepresentation = namedtuple('DivRepresentation', 'components residual estimates')
Calibration = namedtuple('Calibration', 'amplitude threshold')


class SolverConfig(object):
    """
    Parameters of a mild-solution run.

    @ivar horizon: The final time T.
    @ivar smallness_threshold: Vector Morrey norm of the data below which the solver expects
                               contraction.
    """

    def __init__(self, alpha=0.5, horizon=0.1, n_dims=2, resolution=64, box_length=2 * math.pi,
                 picard_iterations=12, rho=0.5, levels=24, smallness_threshold=0.25,
                 blowup_factor=1000.0, residual_floor=1e-13, stepper_dt=1e-3, seed=1,
                 dyadic_radii=4, stride_factor=0.5, probes=4):
        check_alpha(alpha)
        if not horizon > 0:
            raise ValueError("Horizon must be positive, got %r" % (horizon,))
        if not 1 <= picard_iterations <= 32:
            raise ValueError("picard_iterations must lie in [1, 32], got %r" % (picard_iterations,))
        if levels < 12:
            raise ValueError("The time mesh needs at least 12 levels, got %r" % (levels,))
        if not smallness_threshold > 0:
            raise ValueError("smallness_threshold must be positive")
        if not stepper_dt > 0:
            raise ValueError("stepper_dt must be positive")
        self.alpha = float(alpha)
        self.horizon = float(horizon)
        self.n_dims = int(n_dims)
        self.resolution = int(resolution)
        self.box_length = float(box_length)
        self.picard_iterations = int(picard_iterations)
        self.rho = float(rho)
        self.levels = int(levels)
        self.smallness_threshold = float(smallness_threshold)
        self.blowup_factor = float(blowup_factor)
        self.residual_floor = float(residual_floor)
        self.stepper_dt = float(stepper_dt)
        self.seed = seed
        self.dyadic_radii = int(dyadic_radii)
        self.stride_factor = float(stride_factor)
        self.probes = int(probes)

    @classmethod
    def from_experiment(cls, cfg):
        """
        Build from an L{qnslab.config.ExperimentConfig}.
        """
        return cls(alpha=cfg.getfloat('solver', 'alpha'),
                   horizon=cfg.getfloat('solver', 'horizon'),
                   n_dims=cfg.n_dims,
                   resolution=cfg.resolution,
                   box_length=cfg.box_length,
                   picard_iterations=cfg.getint('solver', 'picard_iterations'),
                   rho=cfg.getfloat('time', 'rho'),
                   levels=cfg.getint('time', 'levels'),
                   smallness_threshold=cfg.getfloat('solver', 'smallness_threshold'),
                   blowup_factor=cfg.getfloat('solver', 'blowup_factor'),
                   residual_floor=cfg.getfloat('solver', 'residual_floor'),
                   stepper_dt=cfg.getfloat('solver', 'stepper_dt'),
                   seed=cfg.seed,
                   dyadic_radii=cfg.getint('balls', 'dyadic_radii'),
                   stride_factor=cfg.getfloat('balls', 'stride_factor'),
                   probes=cfg.getint('solver', 'probes'))

    def replace(self, **changes):
        other = copy.copy(self)
        for name, value in changes.items():
            if not hasattr(other, name):
                raise AttributeError("SolverConfig has no parameter %r" % (name,))
            setattr(other, name, value)
        return other

    def grid(self):
        return Grid(self.n_dims, self.resolution, self.box_length)

    def mesh(self):
        return TimeMesh(self.horizon, self.rho, self.levels)

    def family(self, grid=None):
        return BallFamily(grid or self.grid(), self.dyadic_radii, self.stride_factor)

    def refined(self):
        """
        The same run with twice the time resolution in both the Picard mesh and the stepper.
        """
        return self.replace(rho=math.sqrt(self.rho), levels=2 * self.levels, stepper_dt=self.stepper_dt / 2.0)

    def rescaled(self, lam):
        """
        The run for data a(lam x) lam: box L/lam, horizon T/lam^2.
        """
        return self.replace(box_length=self.box_length / lam, horizon=self.horizon / lam ** 2,
                            stepper_dt=self.stepper_dt / lam ** 2)

    def as_dict(self):
        return dict(sorted(vars(self).items()))


class IterationDiagnostics(object):
    """
    Per-iteration record of a Picard run.

    Entry j holds the norms of u^(j) and d_j = sup_t t^{1/2} max|u^(j+1) - u^(j)|.

    @ivar small: Whether the data passed the smallness gate.
    @type small: C{bool}
    """

    def __init__(self, gate_value, small, scale=0.0):
        self.gate_value = float(gate_value)
        self.small = bool(small)
        self.scale = float(scale)
        self.X_alpha = []
        self.X_2n2 = []
        self.X_42 = []
        self.differences = []
        self.contraction_flags = []

    def __len__(self):
        return len(self.differences)

    def record(self, x_alpha, x_2n2, x_42, d, flag):
        self.X_alpha.append(float(x_alpha))
        self.X_2n2.append(float(x_2n2))
        self.X_42.append(float(x_42))
        self.differences.append(float(d))
        self.contraction_flags.append(bool(flag))

    @property
    def converged(self):
        """
        Claimed only for gated (small) data whose every iteration contracted.
        """
        return self.small and all(self.contraction_flags)

    def envelope(self):
        """
        d_j (j + 1)^2 per iteration.
        """
        return [d * (j + 1) ** 2 for j, d in enumerate(self.differences)]

    def as_rows(self):
        return [(j, self.X_alpha[j], self.X_2n2[j], self.X_42[j], self.differences[j],
                 self.contraction_flags[j]) for j in range(len(self))]


def sup_weighted(g):
    """
    sup over samples of t^{1/2} max|g(t)|.
    """
    return max(math.sqrt(t) * f.max_abs() for t, f in zip(g.times, g))


def vector_morrey_norm(a, family):
    """
    The L_{2,n-2} Morrey norm of a vector field (Euclidean magnitude).
    """
    return morrey_norm(a, 2, family)


def _check_divergence_free(a):
    if not isinstance(a, VectorField):
        raise ValueError("Initial data must be a vector field")
    defect = spectral.divergence_defect(a)
    if defect > DIVERGENCE_TOLERANCE:
        raise ValueError("Initial data is not divergence-free (defect %g)" % defect)


def heat_flow_initial(a, mesh):
    """
    u^(0)(t) = e^{t Delta} a at every sample time.

    @raise ValueError: If a is not divergence-free.
    """
    _check_divergence_free(a)
    return Trajectory.heat_flow(VectorField(a.components, divergence_free=True), mesh)


def _difference(u, v):
    return max(math.sqrt(t) * (a - b).max_abs() for t, a, b in zip(u.times, u, v))


def _contracting(j, differences, floor):
    d = differences[j]
    return j < 2 or d <= CONTRACTION_RATIO * differences[j - 1] or d <= floor


def picard_solve(a, config, family=None, threads=1):
    """
    Iterate u^(j+1) = u^(0) - B(u^(j), u^(j)) C{config.picard_iterations} times.

    @param a: Divergence-free initial data on C{config.grid()}.
    @type a: L{VectorField}

    @return: (u^(J), L{IterationDiagnostics}).
    @raise ValueError: If a is not divergence-free.
    @raise DivergenceError: If t^{1/2} max|u^(j)| grows past C{blowup_factor} times its
                            initial value.
    @raise InconsistencyError: If an iterate loses its divergence-free property.
    """
    mesh = config.mesh()
    family = family or config.family(a.grid)
    gate = vector_morrey_norm(a, family).value
    small = gate <= config.smallness_threshold
    if not small:
        logger.warning("Data Morrey norm %.6g exceeds the smallness threshold %.6g; no contraction guarantee",
                       gate, config.smallness_threshold)
    u0 = heat_flow_initial(a, mesh)
    scale = sup_weighted(u0)
    floor = config.residual_floor * scale
    diagnostics = IterationDiagnostics(gate, small, scale)
    u = u0
    for j in range(config.picard_iterations):
        x_alpha = trajectory_norm(u, 'X_alpha_T', family, config.alpha, config.horizon, threads).value
        x_2n2 = trajectory_norm(u, 'X_2n2', family).value
        x_42 = trajectory_norm(u, 'X_42', family).value
        b = duhamel.bilinear_trajectory(u, u, threads)
        nxt = Trajectory(mesh, [f - g for f, g in zip(u0, b)])
        for f in nxt:
            defect = spectral.divergence_defect(f)
            if defect > DIVERGENCE_TOLERANCE:
                raise InconsistencyError("Iterate %d has divergence defect %g" % (j + 1, defect))
        size = sup_weighted(nxt)
        if size > 0 and size > config.blowup_factor * scale:
            logger.error("Picard iteration %d diverged: %g against initial %g", j + 1, size, scale)
            raise DivergenceError("Picard iterate %d exceeds %g times the data" % (j + 1, config.blowup_factor),
                                  iteration=j + 1)
        d = _difference(nxt, u)
        flag = small and _contracting(j, diagnostics.differences + [d], floor)
        diagnostics.record(x_alpha, x_2n2, x_42, d, flag)
        logger.debug("Picard iteration %d: d=%.6g X_alpha=%.6g", j, diagnostics.differences[-1], x_alpha)
        u = nxt
    logger.info("Picard solve finished after %d iterations (converged=%s)", len(diagnostics),
                diagnostics.converged)
    return u, diagnostics


def default_probes(mesh, count):
    """
    C{count} sample times spread evenly (in log time) over the mesh.
    """
    samples = mesh.samples
    idx = np.unique(np.linspace(0, len(samples) - 1, max(count, 1)).round().astype(int))
    return [float(samples[i]) for i in idx]


def mild_residual(u, a, probe_times, floor=1e-13):
    """
    max over probes of ||u(t) - e^{t Delta} a + B(u, u; t)||_2 / max(||u(t)||_2, floor).

    @raise ValueError: If a probe is not a sample time of u.
    """
    integrand = duhamel.integrand_trajectory(u, u)
    worst = 0.0
    for t in probe_times:
        k = u.index_of(t)
        t = float(u.times[k])
        r = u[k] - spectral.heat_semigroup(a, t) + duhamel.propagate(integrand, t)
        worst = max(worst, spectral.l2_norm(r) / max(spectral.l2_norm(u[k]), floor))
    return worst


def _nonlinear(v):
    return -duhamel.bilinear_integrand(v, v)


def _rk4_step(v, h):
    """
    One integrating-factor Runge-Kutta step of v' = Delta v - P div(v (x) v).
    """
    heat = spectral.heat_semigroup
    half = heat(v, h / 2.0)
    k1 = _nonlinear(v)
    k2 = _nonlinear(heat(v + k1 * (h / 2.0), h / 2.0))
    k3 = _nonlinear(half + k2 * (h / 2.0))
    k4 = _nonlinear(heat(v, h) + heat(k3, h / 2.0) * h)
    return heat(v, h) + (heat(k1, h) + heat(k2 + k3, h / 2.0) * 2.0 + k4) * (h / 6.0)


def time_step(a, times, dt, blowup_factor=1000.0):
    """
    Integrate from a to each of the given times (any order) with steps no longer than dt.

    @return: Dict from time to field.
    @raise DivergenceError: If the solution stops being finite or grows past
                            C{blowup_factor} times the data.
    """
    initial = a.max_abs()
    v, now, steps = a, 0.0, 0
    out = {}
    for target in sorted(times):
        span = target - now
        if span > 0:
            count = max(1, int(math.ceil(span / dt - 1e-9)))
            h = span / count
            for i in range(count):
                v = _rk4_step(v, h)
                steps += 1
                size = v.max_abs()
                if not np.isfinite(size) or (initial > 0 and size > blowup_factor * initial):
                    reached = now + (i + 1) * h
                    raise DivergenceError("Time stepper unstable at step %d (t=%g)" % (steps, reached),
                                          iteration=steps)
            now = target
        out[target] = v
    return out


def cross_check_timestepper(a, config, u=None, threads=1):
    """
    max over sample times of ||u_picard(t) - u_step(t)||_2 / ||u_step(t)||_2.

    @param u: A Picard solution on C{config.mesh()}; solved here when omitted.
    """
    if u is None:
        u, _ = picard_solve(a, config, threads=threads)
    times = [float(t) for t in u.times]
    stepped = time_step(a, times, config.stepper_dt, config.blowup_factor)
    worst = 0.0
    for t, field in zip(times, u):
        ref = spectral.l2_norm(stepped[t])
        if ref > 0:
            worst = max(worst, spectral.l2_norm(field - stepped[t]) / ref)
    logger.info("Stepper cross-check discrepancy %.6g", worst)
    return worst


def div_representation(f, alpha, family):
    """
    Write a mean-zero f as sum_k d_k f_k with f_k = -d_k (-Delta)^{-1} f.

    @return: (components, ||sum_k d_k f_k - f||_2 / ||f||_2, Q_alpha seminorm of each f_k).
    @raise ValueError: If f has nonzero mean.
    """
    check_alpha(alpha)
    if abs(f.mean()) > 1e-12 * max(f.max_abs(), 1.0):
        raise ValueError("div_representation needs a mean-zero field (mean %g)" % f.mean())
    potential = spectral.inverse_laplacian(f)
    components = [-spectral.derivative(potential, k) for k in range(f.grid.n_dims)]
    rebuilt = ScalarField.zeros(f.grid)
    for k, c in enumerate(components):
        rebuilt = rebuilt + spectral.derivative(c, k)
    norm = spectral.l2_norm(f)
    residual = spectral.l2_norm(rebuilt - f) / norm if norm > 0 else 0.0
    estimates = [q_alpha_seminorm(c, alpha, family) for c in components]
    return DivRepresentation(components, residual, estimates)


def _contracts(a, config, family, threads):
    try:
        _, diag = picard_solve(a, config, family, threads)
    except DivergenceError:
        return False
    floor = config.residual_floor * diag.scale
    return all(_contracting(j, diag.differences, floor) for j in range(len(diag)))


def calibrate_smallness(template, config, family=None, steps=8, threads=1):
    """
    Bisect on the amplitude c of c * template for the largest data that still contracts, and
    report its vector Morrey norm as the smallness threshold.

    @return: L{Calibration} (amplitude, threshold); both zero if nothing contracts.
    """
    _check_divergence_free(template)
    family = family or config.family(template.grid)
    probe = config.replace(smallness_threshold=float('inf'))
    lo, hi = 0.0, 1.0
    while _contracts(template * hi, probe, family, threads) and hi < 1024.0:
        lo, hi = hi, 2.0 * hi
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if _contracts(template * mid, probe, family, threads):
            lo = mid
        else:
            hi = mid
    threshold = vector_morrey_norm(template * lo, family).value if lo > 0 else 0.0
    logger.info("Calibrated smallness: amplitude %.6g, Morrey threshold %.6g", lo, threshold)
    return Calibration(lo, threshold)


def initial_data(config, spec):
    """
    Generate the initial field described by a field spec string on the solver grid.
    """
    return fields.generate(fields.FieldSpec.parse(spec), config.grid())
