import numpy as np

from tests.base_test import BaseTest
from tests.classical.test_flow import T_FLAT
from tests.profile.test_profile import small_gaussian


def minus_packet(profile=None, z0=(-1.0, 0.0, 2.0, 0.0)):
    from pyconic.ansatz.pipeline import PacketData
    from pyconic.potential.eigen import Mode
    return PacketData(mode=Mode.minus, t0=0.0, z0=np.array(z0),
                      profile=profile or small_gaussian(points=128, extent=12.0))


def single_run(epsilon=0.05, times=(0.0, 0.4, 0.7), t_end=0.7):
    from pyconic.ansatz.pipeline import propagate_ansatz
    from pyconic.potential.models import linear_isotropic
    model = linear_isotropic()
    return model, propagate_ansatz(model, minus_packet(), t_end, epsilon, times)


class PhysicalGridTest(BaseTest):

    def test_required_points(self):
        from pyconic.ansatz.grid import PhysicalGrid, required_points, required_spacing

        # --- setup ---
        coarse = PhysicalGrid(2, 0.01, extent=2.0, points=64)

        # --- asserts ---
        self.assertAlmostEqual(required_spacing(0.01), 0.0125)
        self.assertAlmostEqual(required_spacing(0.01, p_max=1.0), 0.0025)
        self.assertEqual(required_points(2.0, 0.01), 512)
        self.assertEqual(required_points(2.0, 0.01, p_max=1.0), 2048)
        self.assertTrue(PhysicalGrid.resolving(2, 0.01, extent=2.0).resolves())
        self.assertFalse(coarse.check_resolution())

    def test_layout(self):
        from pyconic.ansatz.grid import PhysicalGrid
        from pyconic.exceptions import ConicValidationError

        # --- setup ---
        grid = PhysicalGrid(2, 0.1, extent=1.0, points=8)

        # --- asserts ---
        self.assertEqual(grid.coordinates.shape, (8, 8, 2))
        self.assertAllClose(grid.coordinates[4, 4], [0.0, 0.0])
        self.assertAlmostEqual(grid.cell, 0.0625)
        self.assertTrue(grid.contains([0.5, -1.0]))
        self.assertFalse(grid.contains([1.0, 0.0]))
        self.assertEqual(grid.sidecar(), {"dims": 2, "L": 1.0, "N": 8, "epsilon": 0.1})
        with self.assertRaises(ConicValidationError):
            PhysicalGrid(2, 0.1, extent=1.0, points=12)
        with self.assertRaises(ConicValidationError):
            PhysicalGrid(2, 0.0)


class Field2Test(BaseTest):

    def test_masses(self):
        from pyconic.ansatz.grid import PhysicalGrid
        from pyconic.exceptions import ConicValidationError
        from pyconic.reference.field import Field2

        # --- setup ---
        grid = PhysicalGrid(1, 1.0, extent=4.0, points=64)
        scalar = np.exp(-grid.coordinates[..., 0] ** 2 / 2) / np.pi ** 0.25
        field = Field2.from_scalar(grid, scalar, [0.6, 0.8j], time=0.5)

        # --- asserts ---
        self.assertAllClose(field.component_masses(), [0.36, 0.64], atol=1e-12)
        self.assertAlmostEqual(field.mass(), 1.0, places=12)
        self.assertAlmostEqual((field + field).mass(), 4.0, places=11)
        self.assertEqual(field.sidecar()["components"], 2)
        with self.assertRaises(ConicValidationError):
            Field2(grid, np.zeros((3, 64)))
        with self.assertRaises(ConicValidationError):
            field + Field2.zeros(PhysicalGrid(1, 1.0, extent=4.0, points=32))


class WavePacketTest(BaseTest):

    def test_isometry(self):
        from pyconic.ansatz.assembly import wave_packet
        from pyconic.ansatz.grid import PhysicalGrid

        # --- setup ---
        grid = PhysicalGrid(2, 0.01, extent=1.0, points=256)
        profile = small_gaussian(extent=8.0)
        packet = wave_packet(grid, [0.0, 0.0, 0.0, 0.0], profile)
        expected = np.exp(-np.sum(grid.coordinates ** 2, axis=-1) / 0.01) / (np.pi * 0.01)

        # --- asserts ---
        self.assertAlmostEqual(grid.cell * np.sum(np.abs(packet) ** 2), profile.mass(), delta=1e-8)
        self.assertAllClose(np.abs(packet) ** 2, expected, atol=1e-8)

    def test_shift_covariance(self):
        from pyconic.ansatz.assembly import wave_packet
        from pyconic.ansatz.grid import PhysicalGrid

        # --- setup ---
        grid = PhysicalGrid(2, 0.01, extent=1.0, points=256)
        profile = small_gaussian(extent=8.0)
        origin = wave_packet(grid, [0.0, 0.0, 0.0, 0.0], profile)
        shifted = wave_packet(grid, [0.25, 0.0, 0.0, 0.0], profile)

        # --- asserts ---
        self.assertAllClose(shifted, np.roll(origin, 32, axis=0), atol=1e-10)

    def test_moments(self):
        from pyconic.ansatz.assembly import wave_packet
        from pyconic.ansatz.grid import PhysicalGrid
        from pyconic.ansatz.wigner import packet_moments
        from pyconic.profile.grid import gaussian_profile
        from pyconic.reference.field import Field2

        # --- setup ---
        grid = PhysicalGrid(2, 0.01, extent=1.0, points=256)
        profile = gaussian_profile(2, center=[0.5, 0.0], momentum=[0.0, 1.0], extent=8.0, points=64)
        z = [0.2, -0.1, 0.3, 0.0]
        field = Field2.from_scalar(grid, wave_packet(grid, z, profile), [1.0, 0.0])
        position, momentum = packet_moments(field)

        # --- asserts ---
        self.assertAllClose(position, [0.2 + 0.1 * 0.5, -0.1], atol=1e-8)
        self.assertAllClose(momentum, [0.3, 0.1], atol=1e-8)

    def test_out_of_box(self):
        from pyconic.ansatz.assembly import wave_packet
        from pyconic.ansatz.grid import PhysicalGrid
        from pyconic.exceptions import OutOfBox

        # --- setup ---
        grid = PhysicalGrid(2, 0.01, extent=1.0, points=256)
        profile = small_gaussian(extent=8.0)

        # --- asserts ---
        with self.assertRaises(OutOfBox):
            wave_packet(grid, [1.5, 0.0, 0.0, 0.0], profile)
        with self.assertRaises(OutOfBox):
            wave_packet(grid, [0.95, 0.0, 0.0, 0.0], profile)


class SigmaNormTest(BaseTest):

    def test_gaussian(self):
        from pyconic.ansatz.grid import PhysicalGrid
        from pyconic.ansatz.wigner import sigma_norm
        from pyconic.exceptions import ConicValidationError
        from pyconic.reference.field import Field2
        from pyconic.utils.spectral import sigma_terms

        # --- setup ---
        grid = PhysicalGrid(1, 1.0, extent=10.0, points=256)
        f = np.exp(-grid.coordinates[..., 0] ** 2 / 2) / np.pi ** 0.25
        field = Field2.from_scalar(grid, f, [1.0, 0.0])
        terms = sigma_terms(field.values, grid.extent, 1, components=True)

        # --- asserts ---
        self.assertAlmostEqual(sigma_norm(field, 0, 1.0), 1.0, places=12)
        self.assertAlmostEqual(terms[((1,), (0,))], 1 / np.sqrt(2.0), places=12)
        self.assertAlmostEqual(terms[((0,), (1,))], 1 / np.sqrt(2.0), places=12)
        self.assertAlmostEqual(sigma_norm(field, 1, 1.0), 1.0, places=12)
        with self.assertRaises(ConicValidationError):
            sigma_norm(field, 3, 1.0)

    def test_scaled_packets_stay_bounded(self):
        from pyconic.ansatz.assembly import wave_packet
        from pyconic.ansatz.grid import PhysicalGrid
        from pyconic.ansatz.wigner import sigma_norm
        from pyconic.reference.field import Field2

        # --- setup ---
        profile = small_gaussian(extent=8.0)
        norms = []
        for eps in (0.01, 0.02):
            grid = PhysicalGrid(2, eps, extent=1.0, points=256)
            field = Field2.from_scalar(grid, wave_packet(grid, [0.0, 0.0, 0.0, 0.0], profile), [1.0, 0.0])
            norms.append([sigma_norm(field, k, eps) for k in (1, 2)])

        # --- asserts ---
        self.assertAllClose(norms[0], norms[1], atol=1e-8)
        self.assertAlmostEqual(norms[0][0], 1.0, places=8)


class WignerMassesTest(BaseTest):

    def test_single_minus(self):
        from pyconic.ansatz.wigner import wigner_masses
        from pyconic.potential.crossing import crossing_geometry
        from pyconic.potential.models import linear_isotropic

        # --- setup ---
        geom = crossing_geometry(linear_isotropic(), 0.0, [0.0, 0.0, np.sqrt(2.0), 0.0])
        u = small_gaussian(extent=8.0)
        c_plus, c_minus = wigner_masses(None, u, geom)

        # --- asserts ---
        # a^2 = exp(-pi y2^2 / sqrt(2)) against the density exp(-|y|^2) / pi
        self.assertAlmostEqual(c_plus, 1.0 / np.sqrt(1.0 + np.pi / np.sqrt(2.0)), places=10)
        self.assertAlmostEqual(c_plus + c_minus, u.mass(), places=12)
        self.assertEqual(wigner_masses(None, None, geom), (0.0, 0.0))

    def test_total(self):
        from pyconic.ansatz.wigner import wigner_masses
        from pyconic.potential.crossing import crossing_geometry
        from pyconic.potential.models import tilted
        from pyconic.profile.grid import gaussian_profile

        # --- setup ---
        geom = crossing_geometry(tilted([0.0, 0.25], [[1.0, 0.3], [0.0, 1.0]]), 1.0, [0.0, 0.0, 1.0, 0.5])
        u_plus = gaussian_profile(2, center=[0.5, -0.3], extent=8.0, points=64)
        u_minus = gaussian_profile(2, momentum=[1.0, 0.0], extent=8.0, points=64)
        c_plus, c_minus = wigner_masses(u_plus, u_minus, geom)
        swapped = wigner_masses(u_minus, u_plus, geom)

        # --- asserts ---
        self.assertAlmostEqual(c_plus + c_minus, u_plus.mass() + u_minus.mass(), places=12)
        self.assertAlmostEqual(swapped[0], c_minus, places=12)


class AssembleTest(BaseTest):

    def test_harmonic_packet_is_exact(self):
        from pyconic.ansatz.grid import PhysicalGrid
        from pyconic.ansatz.pipeline import PacketData, propagate_adiabatic
        from pyconic.ansatz.wigner import mode_projection_residual
        from pyconic.potential.eigen import Mode
        from pyconic.potential.models import polynomial
        from pyconic.reference.solver import propagate_reference

        # --- setup ---
        eps = 0.02
        model = polynomial(2, v_hess=np.eye(2), w_const=[1.0, 0.0])
        data = PacketData(mode=Mode.plus, t0=0.0, z0=np.array([0.3, 0.0, 0.0, 0.2]),
                          profile=small_gaussian(extent=8.0))
        result = propagate_adiabatic(model, data, 0.5, eps, [0.0, 0.25, 0.5])
        grid = PhysicalGrid(2, eps, extent=1.25, points=256)
        start = result.field_at(0.0, grid)
        end = result.field_at(0.5, grid)
        reference = propagate_reference(model, start, 0.0, 0.5, eps / 10)

        # --- asserts ---
        self.assertAllClose(start.values[1], np.zeros(grid.shape), atol=1e-15)
        self.assertAlmostEqual(start.mass(), data.profile.mass(), delta=1e-8)
        self.assertAlmostEqual(end.mass(), start.mass(), delta=1e-8)
        self.assertLessEqual(end.relative_distance(reference), 1e-4)
        self.assertAlmostEqual(mode_projection_residual(model, end, Mode.plus), 0.0, places=12)
        self.assertEqual(list(result.ingoing), [Mode.plus])
        self.assertEqual(result.times, [0.0, 0.25, 0.5])

    def test_initial_data(self):
        from pyconic.ansatz.assembly import assemble_single_mode, wave_packet
        from pyconic.ansatz.grid import PhysicalGrid
        from pyconic.ansatz.pipeline import propagate_adiabatic
        from pyconic.potential.models import linear_isotropic

        # --- setup ---
        eps = 0.01
        data = minus_packet(z0=(-1.0, 0.0, -0.1, 0.0))
        result = propagate_adiabatic(linear_isotropic(), data, 0.2, eps, [0.0])
        grid = PhysicalGrid(2, eps, extent=1.5, points=256)
        field = assemble_single_mode(result.ingoing[data.mode], 0.0, grid)
        packet = wave_packet(grid, data.z0, data.profile)

        # --- asserts ---
        self.assertAllClose(field.psi1, packet, atol=1e-14)
        self.assertAllClose(field.psi2, np.zeros(grid.shape), atol=1e-14)

    def test_mode_projection_scaling(self):
        from pyconic.ansatz.grid import PhysicalGrid
        from pyconic.ansatz.pipeline import propagate_adiabatic
        from pyconic.ansatz.wigner import mode_projection_residual
        from pyconic.potential.models import linear_isotropic

        # --- setup ---
        model = linear_isotropic()
        data = minus_packet(z0=(-1.0, 0.0, -0.1, 0.0))
        residuals = []
        for eps in (0.04, 0.01):
            result = propagate_adiabatic(model, data, 0.2, eps, [0.0])
            grid = PhysicalGrid(2, eps, extent=2.0, points=512)
            residuals.append(mode_projection_residual(model, result.field_at(0.0, grid)))

        # --- asserts ---
        # the frozen eigenvector misses the rotation of w(x) / |w(x)| across the packet
        self.assertAlmostEqual(residuals[0], 0.5 * np.sqrt(0.02), delta=0.1 * residuals[0])
        self.assertGreaterEqual(residuals[0] / residuals[1], 1.8)
        self.assertLessEqual(residuals[0] / residuals[1], 2.2)

    def test_crossing_rejected(self):
        from pyconic.ansatz.pipeline import propagate_adiabatic
        from pyconic.exceptions import ConicValidationError
        from pyconic.potential.models import linear_isotropic

        # --- asserts ---
        with self.assertRaises(ConicValidationError):
            propagate_adiabatic(linear_isotropic(), minus_packet(), 0.9, 0.05, [0.0])


class PropagateAnsatzTest(BaseTest):

    @classmethod
    def setUpClass(cls):
        cls.model, cls.result = single_run()

    def test_single_crossing(self):
        from pyconic.ansatz.wigner import wigner_masses
        from pyconic.potential.eigen import Mode

        # --- setup ---
        result = self.result
        geom = result.geom
        u_in = result.u_in[Mode.minus]
        c_plus, c_minus = wigner_masses(None, u_in, geom)
        a2 = np.exp(-np.pi * u_in.coordinates()[..., 1] ** 2 / np.sqrt(2.0))

        # --- asserts ---
        self.assertAlmostEqual(geom.t_flat, T_FLAT, places=8)
        self.assertAlmostEqual(geom.r, np.sqrt(2.0), places=8)
        self.assertAlmostEqual(result.u_out[Mode.plus].mass(), c_plus, places=10)
        self.assertAlmostEqual(result.u_out[Mode.minus].mass(), c_minus, places=10)
        self.assertAlmostEqual(c_plus, u_in.cell * np.sum(a2 * np.abs(u_in.values) ** 2), places=12)
        self.assertAlmostEqual(c_plus + c_minus, u_in.mass(), places=12)
        self.assertAlmostEqual(u_in.mass(), 1.0, places=6)
        self.assertLess(result.residual, 1e-2)

    def test_mode_layout(self):
        from pyconic.ansatz.grid import PhysicalGrid
        from pyconic.potential.eigen import Mode

        # --- setup ---
        result = self.result
        grid = PhysicalGrid(2, 0.05, extent=1.5, points=512)
        before = result.mode_fields(0.4, grid)

        # --- asserts ---
        self.assertEqual(list(before), [Mode.minus])
        self.assertAlmostEqual(before[Mode.minus].mass(), 1.0, delta=1e-6)
        self.assertEqual(set(result.outgoing), {Mode.plus, Mode.minus})
        self.assertEqual(result.outgoing[Mode.plus].times, [0.7])
        self.assertAlmostEqual(sum(a.profiles[0.7].mass() for a in result.outgoing.values()), 1.0, delta=1e-6)
        self.assertAllClose(result.outgoing[Mode.plus].frame.at(0.7), result.v_omega, atol=1e-6)

    def test_summary_and_metadata(self):
        # --- setup ---
        result = self.result
        rows = result.summary_rows()
        metadata = result.metadata()

        # --- asserts ---
        self.assertEqual([row["t"] for row in rows], [0.0, 0.4, 0.7])
        self.assertEqual(rows[0]["mass_plus"], 0.0)
        self.assertTrue(np.isnan(rows[0]["S_plus"]))
        self.assertAlmostEqual(rows[0]["S_minus"], 0.0)
        self.assertAlmostEqual(rows[0]["q1_minus"], -1.0)
        self.assertAlmostEqual(rows[-1]["mass_plus"] + rows[-1]["mass_minus"], 1.0, delta=1e-6)
        for key in ("epsilon", "delta", "s0", "R", "t_flat", "r", "s_flat_minus", "omega"):
            self.assertIn(key, metadata)
        self.assertAlmostEqual(metadata["delta"], 0.05 ** (5.0 / 14.0))

    def test_phase_coherence(self):
        from dataclasses import replace

        from pyconic.landau_zener.transfer import transfer_single
        from pyconic.potential.eigen import Mode

        # --- setup ---
        result = self.result
        u_in = result.u_in[Mode.minus]
        shifted = replace(result.spec, s_flat_minus=result.spec.s_flat_minus + 2 * np.pi * result.epsilon)
        outputs = transfer_single(shifted, u_in)

        # --- asserts ---
        for mode, out in zip((Mode.plus, Mode.minus), outputs):
            self.assertAllClose(out.values, result.u_out[mode].values, atol=1e-12)

    def test_invalid_requests(self):
        from pyconic.ansatz.pipeline import propagate_ansatz
        from pyconic.exceptions import AtCrossingTime, NoCrossing
        from pyconic.potential.models import linear_isotropic

        # --- setup ---
        model, result = self.model, self.result

        # --- asserts ---
        with self.assertRaises(AtCrossingTime):
            propagate_ansatz(model, minus_packet(), 0.9, 0.05, [result.geom.t_flat])
        with self.assertRaises(NoCrossing):
            propagate_ansatz(linear_isotropic(), minus_packet(z0=(-1.0, 0.0, 1.0, 0.0)), 0.9, 0.05, [0.0])
        with self.assertRaises(AtCrossingTime):
            result.field_at(result.geom.t_flat, None)


class PropagatePairTest(BaseTest):

    def pair_data(self, plus_profile=None):
        from pyconic.ansatz.pipeline import PacketData
        from pyconic.classical.flow import meeting_data
        from pyconic.potential.eigen import Mode
        from pyconic.potential.models import linear_isotropic
        model = linear_isotropic()
        z_plus, z_minus = meeting_data(model, T_FLAT, np.array([0.0, 0.0, np.sqrt(2.0), 0.0]), 0.0)
        profile = small_gaussian(points=128, extent=12.0)
        plus = PacketData(mode=Mode.plus, t0=0.0, z0=z_plus, profile=plus_profile or profile)
        minus = PacketData(mode=Mode.minus, t0=0.0, z0=z_minus, profile=profile)
        return model, plus, minus

    def test_zero_second_packet(self):
        from pyconic.ansatz.pipeline import AnsatzSettings, propagate_ansatz, propagate_pair
        from pyconic.potential.eigen import Mode
        from pyconic.profile.grid import ProfileGrid

        # --- setup ---
        settings = AnsatzSettings(tol_meet=1e-5)
        model, plus, minus = self.pair_data(ProfileGrid.zeros(2, extent=12.0, points=128))
        pair = propagate_pair(model, plus, minus, 0.7, 0.05, [0.7], settings=settings)
        single = propagate_ansatz(model, minus, 0.7, 0.05, [0.7], settings=settings)

        # --- asserts ---
        self.assertAllClose(pair.u_out[Mode.plus].values, single.u_out[Mode.plus].values, atol=1e-12)
        self.assertAllClose(pair.u_out[Mode.minus].values, single.u_out[Mode.minus].values, atol=1e-12)
        self.assertAlmostEqual(pair.outgoing[Mode.plus].profiles[0.7].mass(),
                               single.outgoing[Mode.plus].profiles[0.7].mass(), places=10)

    def test_mass_conserved(self):
        from pyconic.ansatz.pipeline import AnsatzSettings, propagate_pair
        from pyconic.potential.eigen import Mode

        # --- setup ---
        model, plus, minus = self.pair_data()
        result = propagate_pair(model, plus, minus, 0.7, 0.05, [0.3, 0.7], settings=AnsatzSettings(tol_meet=1e-5))
        incoming = sum(u.mass() for u in result.u_in.values())
        outgoing = sum(u.mass() for u in result.u_out.values())

        # --- asserts ---
        self.assertEqual(set(result.ingoing), {Mode.plus, Mode.minus})
        self.assertAlmostEqual(incoming, outgoing, places=12)
        self.assertAlmostEqual(outgoing, 2.0, delta=1e-5)
        self.assertAlmostEqual(abs(result.ingoing[Mode.plus].frame.at(0.3) @ result.ingoing[Mode.minus].frame.at(0.3)),
                               0.0, places=6)

    def test_meeting_check(self):
        from pyconic.ansatz.pipeline import check_meeting
        from pyconic.exceptions import CrossingMismatch
        from pyconic.potential.crossing import crossing_geometry
        from pyconic.potential.models import linear_isotropic

        # --- setup ---
        model = linear_isotropic()
        geom = crossing_geometry(model, 1.0, [0.0, 0.0, 1.0, 0.0])
        later = crossing_geometry(model, 1.0 + 1e-4, [0.0, 0.0, 1.0, 0.0])

        # --- asserts ---
        check_meeting(geom, geom, 1e-6)
        with self.assertRaises(CrossingMismatch):
            check_meeting(geom, later, 1e-6)


class StageCacheTest(BaseTest):

    def test_stages_shared_between_eps(self):
        from pyconic.ansatz.pipeline import propagate_ansatz
        from pyconic.app.misc.caches import Cache
        from pyconic.potential.eigen import Mode
        from pyconic.potential.models import linear_isotropic

        # --- setup ---
        model = linear_isotropic()
        cache = Cache()
        coarse = propagate_ansatz(model, minus_packet(), 0.7, 0.05, (0.0, 0.4, 0.7), cache=cache)
        fine = propagate_ansatz(model, minus_packet(), 0.7, 0.025, (0.0, 0.4, 0.7), cache=cache)

        # --- asserts ---
        self.assertGreaterEqual(cache.hits, 2)
        self.assertIs(coarse.ingoing[Mode.minus].trajectory, fine.ingoing[Mode.minus].trajectory)
        self.assertIs(coarse.ingoing[Mode.minus].profiles[0.4], fine.ingoing[Mode.minus].profiles[0.4])
        self.assertEqual(coarse.ingoing[Mode.minus].epsilon, 0.05)
        self.assertEqual(fine.ingoing[Mode.minus].epsilon, 0.025)
        self.assertAlmostEqual(coarse.u_out[Mode.plus].mass(), fine.u_out[Mode.plus].mass(), places=12)

    def test_no_cache_recomputes(self):
        from pyconic.ansatz.pipeline import AnsatzSettings, classical_flow
        from pyconic.app.misc.caches import Cache
        from pyconic.potential.models import linear_isotropic

        # --- setup ---
        model = linear_isotropic()
        settings = AnsatzSettings()
        cache = Cache()
        z0 = np.array([-1.0, 0.0, 2.0, 0.0])
        first = classical_flow(model, "minus", z0, 0.0, 0.7, settings, cache)
        second = classical_flow(model, "minus", z0.copy(), 0.0, 0.7, settings, cache)
        other = classical_flow(model, "minus", z0, 0.0, 0.7, settings)

        # --- asserts ---
        self.assertIs(first, second)
        self.assertIsNot(first, other)
        self.assertEqual(cache.hits, 1)
        self.assertEqual(len(cache), 1)
