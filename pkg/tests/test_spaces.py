"""
Tests for the ball family, the time mesh and the norm estimators.
"""
import math
import unittest

import mock
import numpy as np

from qnslab import spaces, spectral
from qnslab.duhamel import Trajectory
from qnslab.fields import gaussian_bump, random_smooth, scale_transform, single_mode
from qnslab.spaces import BallFamily, NormEstimate, TimeMesh
from qnslab.spectral import Grid, ScalarField

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


class BallFamilyTest(unittest.TestCase):

    def setUp(self):
        self.grid = Grid(2, 32)
        self.family = BallFamily(self.grid, dyadic_radii=3)

    def test_radii(self):
        L = self.grid.box_length
        self.assertEqual(len(self.family.levels), 3)
        for m, r in enumerate(self.family.radii):
            self.assertAlmostEqual(r, L / 8 * 2 ** -m)

    def test_nested_levels(self):
        """ Test that radii halve and each stencil sits inside the one above it. """
        for upper, lower in zip(self.family.levels, self.family.levels[1:]):
            self.assertAlmostEqual(lower.radius, upper.radius / 2)
            self.assertLessEqual(lower.stride, upper.stride)
            outer = set(map(tuple, upper.offsets.tolist()))
            self.assertTrue(set(map(tuple, lower.offsets.tolist())) <= outer)
        self.assertAlmostEqual(self.family.radii[0], self.grid.box_length / 8)

    def test_centers_in_central_cube(self):
        L = self.grid.box_length
        for ball in self.family.balls():
            for c in ball.center:
                self.assertTrue(L / 4 - 1e-12 <= c <= 3 * L / 4 + 1e-12)

    def test_stencil_inside_ball(self):
        for lvl in self.family.levels:
            dist = np.sqrt(np.sum(lvl.offsets ** 2, axis=1)) * self.grid.spacing
            self.assertTrue(np.all(dist < lvl.radius))
            self.assertGreaterEqual(lvl.stencil_size, 1)

    def test_invalid(self):
        self.assertRaises(ValueError, BallFamily, self.grid, 0)
        self.assertRaises(ValueError, BallFamily, self.grid, 2, 0.0)

    def test_summary(self):
        summary = self.family.summary()
        self.assertEqual(summary['n_balls'], len(self.family))
        self.assertEqual(summary['resolution'], 32)


class TimeMeshTest(unittest.TestCase):

    def test_invalid(self):
        self.assertRaises(ValueError, TimeMesh, 0.0)
        self.assertRaises(ValueError, TimeMesh, 1.0, 1.0)
        self.assertRaises(ValueError, TimeMesh, 1.0, 0.5, 0)

    def test_samples_between_edges(self):
        mesh = TimeMesh(0.5, 0.5, 12)
        self.assertEqual(len(mesh.samples), 12)
        self.assertTrue(np.all(mesh.samples < mesh.edges[:-1]))
        self.assertTrue(np.all(mesh.samples > mesh.edges[1:]))
        self.assertTrue(np.all(np.diff(mesh.samples) < 0))

    def test_weights_integrate_power(self):
        """ Test that the cell weights sum to the exact integral of t^-alpha. """
        mesh = TimeMesh(1.0, 0.5, 16)
        lo = mesh.edges[-1]
        total = float(np.sum(mesh.weights(0.5)))
        self.assertAlmostEqual(total, 2 * (1.0 - math.sqrt(lo)), places=12)
        clipped = float(np.sum(mesh.weights(0.5, upper=0.25)))
        self.assertAlmostEqual(clipped, 2 * (0.5 - math.sqrt(lo)), places=12)
        self.assertAlmostEqual(float(np.sum(mesh.cell_weights(-1.0))), 16 * math.log(2), places=12)

    def test_for_horizon(self):
        grid = Grid(2, 32)
        self.assertAlmostEqual(TimeMesh.for_horizon(grid, np.inf).t_cap, (grid.box_length / 8) ** 2)
        self.assertEqual(TimeMesh.for_horizon(grid, 0.01).t_cap, 0.01)
        self.assertRaises(ValueError, TimeMesh.for_horizon, grid, 0)

    def test_refined(self):
        mesh = TimeMesh(1.0, 0.25, 12)
        fine = mesh.refined()
        self.assertEqual(len(fine), 24)
        self.assertAlmostEqual(fine.edges[-1], mesh.edges[-1])
        self.assertEqual(mesh.scaled(0.25), TimeMesh(0.25, 0.25, 12))


class SeminormTest(unittest.TestCase):

    def setUp(self):
        self.grid = Grid(2, 32)
        self.family = BallFamily(self.grid, dyadic_radii=3)
        self.bump = gaussian_bump(self.grid, width=1.0 / 32)

    def test_constants_vanish(self):
        one = ScalarField.constant(self.grid, 2.0)
        self.assertAlmostEqual(spaces.q_alpha_seminorm(one, 0.5, self.family).value, 0.0, places=10)
        self.assertAlmostEqual(spaces.campanato_seminorm(one, 0.5, self.family).value, 0.0, places=10)
        self.assertAlmostEqual(spaces.bmo_seminorm(one, self.family).value, 0.0, places=10)

    def test_kinds_and_ball(self):
        q = spaces.q_alpha_seminorm(self.bump, 0.25, self.family)
        self.assertEqual(q.kind, 'Q_alpha')
        self.assertGreater(q.value, 0.0)
        self.assertIn(q.maximizing_ball.radius, self.family.radii)
        self.assertEqual(spaces.bmo_seminorm(self.bump, self.family).kind, 'BMO')
        self.assertEqual(spaces.campanato_seminorm(self.bump, 0.5, self.family).kind, 'Campanato')
        self.assertEqual(spaces.riesz_campanato(self.bump, 0.5, self.family).kind, 'Riesz_Campanato')

    def test_alpha_range(self):
        self.assertRaises(ValueError, spaces.q_alpha_seminorm, self.bump, 1.0, self.family)
        self.assertRaises(ValueError, spaces.q_alpha_seminorm, self.bump, -0.1, self.family)

    def test_q_alpha_dilation_invariant(self):
        """ Test that Q_alpha is unchanged by f(x) -> f(2x) on the rematched grid. """
        small = scale_transform(self.bump, 2, power=0)
        family = self.family.rematched(small.grid)
        for alpha in (0.0, 0.5):
            a = spaces.q_alpha_seminorm(self.bump, alpha, self.family).value
            b = spaces.q_alpha_seminorm(small, alpha, family).value
            self.assertAlmostEqual(b / a, 1.0, places=10)

    def test_morrey_scaling(self):
        """ Test that morrey_2 is invariant under the Navier-Stokes scaling. """
        small = scale_transform(self.bump, 2)
        family = self.family.rematched(small.grid)
        a = spaces.morrey_norm(self.bump, 2, self.family).value
        b = spaces.morrey_norm(small, 2, family).value
        self.assertAlmostEqual(b / a, 1.0, places=10)

    def test_lebesgue(self):
        one = ScalarField.constant(self.grid, 1.0)
        self.assertAlmostEqual(spaces.lebesgue_norm(one, np.inf), 1.0)
        self.assertAlmostEqual(spaces.lebesgue_norm(one, 2), 2 * math.pi)
        self.assertRaises(ValueError, spaces.lebesgue_norm, one, 0.5)

    def test_morrey_exponent(self):
        self.assertRaises(ValueError, spaces.morrey_norm, self.bump, 3, self.family)

    def test_best_ball_empty(self):
        self.assertEqual(spaces.best_ball([None] * 3, self.family), (0.0, None))


class HeatExtensionNormTest(unittest.TestCase):

    def setUp(self):
        self.grid = Grid(2, 32)
        self.family = BallFamily(self.grid, dyadic_radii=3)
        self.mesh = TimeMesh.for_horizon(self.grid, np.inf, 0.5, 16)
        self.f = random_smooth(self.grid, seed=3)

    def test_q_inverse_truncation(self):
        full = spaces.q_inverse_norm(self.f, 0.5, np.inf, self.family, self.mesh)
        self.assertEqual(full.kind, 'Q_inverse')
        small_T = self.family.radii[-1] ** 2
        truncated = spaces.q_inverse_norm(self.f, 0.5, small_T, self.family, self.mesh)
        self.assertLessEqual(truncated.value, full.value)
        self.assertRaises(ValueError, spaces.q_inverse_norm, self.f, 0.5, 0.0, self.family, self.mesh)

    def test_q_inverse_truncation_monotone(self):
        """ Test that shrinking T never increases the norm, for every alpha. """
        for alpha in (0.0, 0.25, 0.75):
            full = spaces.q_inverse_norm(self.f, alpha, np.inf, self.family, self.mesh).value
            previous = full
            for r in self.family.radii:
                value = spaces.q_inverse_norm(self.f, alpha, r ** 2, self.family, self.mesh).value
                self.assertLessEqual(value, previous)
                self.assertLessEqual(value, full)
                previous = value
            self.assertGreater(previous, 0.0)

    def test_q_inverse_mesh_refinement(self):
        """ Test that doubling the time cells moves the norm by less than ten percent. """
        mesh = TimeMesh.for_horizon(self.grid, np.inf, 0.5, 24)
        fine = mesh.refined()
        self.assertEqual(len(fine), 48)
        for alpha in (0.0, 0.5):
            coarse = spaces.q_inverse_norm(self.f, alpha, np.inf, self.family, mesh).value
            refined = spaces.q_inverse_norm(self.f, alpha, np.inf, self.family, fine).value
            self.assertAlmostEqual(refined / coarse, 1.0, delta=0.1)

    def test_short_mesh_warns(self):
        mesh = TimeMesh(self.family.radii[0] ** 2 / 4, 0.5, 16)
        with self.assertLogs('qnslab.spaces', level='WARNING') as logs:
            spaces.q_inverse_norm(self.f, 0.5, np.inf, self.family, mesh)
        self.assertIn('Mesh cap', logs.output[0])
        with mock.patch.object(spaces.logger, 'warning') as warning:
            spaces.q_inverse_norm(self.f, 0.5, np.inf, self.family, self.mesh)
            spaces.q_inverse_norm(self.f, 0.5, mesh.t_cap, self.family, mesh)
        self.assertFalse(warning.called)

    def test_q_inverse_scaling(self):
        """ Test that Q_alpha^{-1} is invariant under the Navier-Stokes scaling. """
        small = scale_transform(self.f, 2)
        family = self.family.rematched(small.grid)
        mesh = self.mesh.scaled(0.25)
        a = spaces.q_inverse_norm(self.f, 0.25, np.inf, self.family, self.mesh).value
        b = spaces.q_inverse_norm(small, 0.25, np.inf, family, mesh).value
        self.assertAlmostEqual(b / a, 1.0, places=9)

    def test_threads_do_not_change_values(self):
        one = spaces.q_inverse_norm(self.f, 0.5, np.inf, self.family, self.mesh, threads=1)
        many = spaces.q_inverse_norm(self.f, 0.5, np.inf, self.family, self.mesh, threads=3)
        self.assertEqual(one.value, many.value)
        self.assertEqual(one.maximizing_ball, many.maximizing_ball)

    def test_vanishing_profile(self):
        T_list = [self.family.radii[0] ** 2 * 4.0 ** -i for i in range(4)]
        profile = spaces.vanishing_profile(self.f, 0.5, T_list, self.family, self.mesh)
        values = [v for _, v in profile]
        self.assertEqual([T for T, _ in profile], T_list)
        self.assertTrue(all(b <= a for a, b in zip(values, values[1:])))
        self.assertRaises(ValueError, spaces.vanishing_profile, self.f, 0.5, T_list[::-1],
                          self.family, self.mesh)

    def test_x42_profile(self):
        T_list = [0.5, 0.1, 0.01]
        profile = spaces.x42_vanishing_profile(self.f, T_list, self.family, self.mesh)
        values = [v for _, v in profile]
        self.assertTrue(all(b <= a for a, b in zip(values, values[1:])))

    def test_besov_single_mode(self):
        """ Test the Besov norm of a mode against sup t^1/2 exp(-5t). """
        mode = single_mode(self.grid, k=(2, 1))
        estimate = spaces.besov_norm(mode, self.mesh)
        self.assertLessEqual(estimate.value, math.sqrt(0.1) * math.exp(-0.5) + 1e-12)
        t = estimate.parts['t_max']
        self.assertAlmostEqual(estimate.value, math.sqrt(t) * math.exp(-5 * t), places=12)

    def test_tent_characterization(self):
        for choice in ('1a', '1b', '2a', '2b'):
            estimate = spaces.tent_characterization(self.f, 0.5, choice, self.family, self.mesh)
            self.assertEqual(estimate.kind, 'Tent_%s' % choice)
            self.assertGreater(estimate.value, 0.0)
        self.assertRaises(ValueError, spaces.tent_characterization, self.f, 0.5, '3c', self.family, self.mesh)

    def test_heat_ratio_zero_field(self):
        zero = ScalarField.zeros(self.grid)
        self.assertEqual(spaces.heat_linf_morrey_ratio(zero, self.family, self.mesh), 0.0)


class TrajectoryNormTest(unittest.TestCase):

    def setUp(self):
        self.grid = Grid(2, 16)
        self.family = BallFamily(self.grid, dyadic_radii=2)
        self.mesh = TimeMesh(0.1, 0.5, 12)
        self.g = Trajectory.heat_flow(random_smooth(self.grid, seed=1), self.mesh)

    def test_parts(self):
        for kind in spaces.TRAJECTORY_KINDS:
            estimate = spaces.trajectory_norm(self.g, kind, self.family, alpha=0.5, T=0.1)
            self.assertAlmostEqual(estimate.value, estimate.parts['linf'] + estimate.parts['second'])

    def test_carleson_part_matches_q_inverse(self):
        """ Test that X_alpha of a heat flow carries the Q_alpha^{-1} Carleson quantity. """
        estimate = spaces.trajectory_norm(self.g, 'X_alpha_T', self.family, alpha=0.5)
        direct = spaces.q_inverse_norm(random_smooth(self.grid, seed=1), 0.5, np.inf, self.family, self.mesh)
        self.assertAlmostEqual(estimate.parts['second'], direct.value, places=12)

    def test_invalid(self):
        self.assertRaises(ValueError, spaces.trajectory_norm, self.g, 'X_99', self.family)

    def test_missing_alpha(self):
        with self.assertRaises(ValueError) as ctx:
            spaces.trajectory_norm(self.g, 'X_alpha_T', self.family)
        self.assertIn('alpha', str(ctx.exception))


class InclusionConstantTest(unittest.TestCase):
    """ Measured inclusion constants over a small seeded corpus. """

    ALPHAS = (0.0, 0.25, 0.5, 0.75)

    def setUp(self):
        self.grid = Grid(2, 32)
        self.family = BallFamily(self.grid, dyadic_radii=3)
        self.mesh = TimeMesh.for_horizon(self.grid, np.inf, 0.5, 16)
        self.corpus = [random_smooth(self.grid, seed=s) for s in (1, 2, 3)]
        self.corpus.append(single_mode(self.grid, k=(2, 1)))
        self.corpus.append(gaussian_bump(self.grid, width=1.0 / 32))

    def q_inverse(self, f, alpha):
        return spaces.q_inverse_norm(f, alpha, np.inf, self.family, self.mesh).value

    def test_morrey_constant(self):
        """ Test that Q_alpha^{-1} over morrey_2 stays within one corpus-wide band. """
        ratios = []
        for f in self.corpus:
            morrey = spaces.morrey_norm(f, 2, self.family).value
            self.assertGreater(morrey, 0.0)
            ratios.extend(self.q_inverse(f, a) / morrey for a in self.ALPHAS)
        self.assertTrue(all(np.isfinite(r) and r > 0 for r in ratios))
        self.assertLess(max(ratios) / min(ratios), 100.0)

    def test_heat_keeps_morrey_bounded(self):
        for f in self.corpus:
            morrey = spaces.morrey_norm(f, 2, self.family).value
            for t in self.mesh.samples:
                heated = spaces.morrey_norm(spectral.heat_semigroup(f, t), 2, self.family).value
                self.assertLessEqual(heated, 3.0 * morrey)

    def test_besov_constant(self):
        for f in self.corpus:
            besov = spaces.besov_norm(f, self.mesh).value
            self.assertGreater(besov, 0.0)
            self.assertLess(besov / self.q_inverse(f, 0.0), 100.0)

    def test_alpha_ordering(self):
        """ Test that Q_alpha^{-1} at a smaller alpha is bounded by the one at a larger alpha. """
        for f in self.corpus:
            values = [self.q_inverse(f, a) for a in self.ALPHAS]
            self.assertTrue(all(v > 0 for v in values))
            for small, large in zip(values, values[1:]):
                self.assertLess(small / large, 10.0)


class NormEstimateTest(unittest.TestCase):

    def test_record(self):
        ball = spaces.Ball((1.0, 2.0), 0.5)
        estimate = NormEstimate('Morrey2', 3.0, ball, {'n_balls': 7}, alpha=None)
        record = estimate.as_record(resolution=32, seed=4)
        self.assertEqual(record['norm_kind'], 'Morrey2')
        self.assertEqual(record['alpha'], '')
        self.assertEqual((record['max_ball_cx'], record['max_ball_cy'], record['max_ball_r']), (1.0, 2.0, 0.5))
        self.assertEqual(record['n_balls'], 7)
        self.assertEqual(record['n_time_levels'], 0)
        self.assertEqual(float(estimate), 3.0)


if __name__ == '__main__':
    unittest.main()
