import numpy as np

from tests.base_test import BaseTest


class PotentialTest(BaseTest):

    def test_eval_potential(self):
        from pyconic.potential.models import eval_potential, linear_isotropic, tilted

        # --- setup ---
        linear = linear_isotropic(3)
        tilt = tilted([1.0, 0.0], np.eye(2))

        # --- asserts ---
        self.assertAllClose(eval_potential(linear, [1.0, 0.0, 5.0]), [[1.0, 0.0], [0.0, -1.0]])
        self.assertAllClose(eval_potential(tilt, [1.0, 2.0]), [[2.0, 2.0], [2.0, 0.0]])
        # only the scalar part survives where w vanishes
        self.assertAllClose(eval_potential(tilt, [0.0, 0.0]), np.zeros((2, 2)))

    def test_symmetry_and_decomposition(self):
        from pyconic.potential.eigen import eigen_at
        from pyconic.potential.models import eval_potential, polynomial

        # --- setup ---
        rng = np.random.RandomState(3)
        model = polynomial(2, v_const=0.3, v_grad=[0.1, -0.2], v_hess=[[1.0, 0.2], [0.4, 2.0]],
                           w_const=[0.5, -0.1], w_jac=[[1.0, 0.3], [0.0, 1.0]],
                           w_hess=[[[0.2, 0.0], [0.0, 0.1]], [[0.0, 0.1], [0.1, 0.0]]])
        points = rng.uniform(-2, 2, size=(50, 2))

        # --- asserts ---
        for x in points:
            matrix = eval_potential(model, x)
            self.assertAllClose(matrix, matrix.T)
            eig = eigen_at(model, x)
            self.assertAllClose(eig.pi_plus + eig.pi_minus, np.eye(2))
            self.assertAllClose(eig.pi_plus @ eig.pi_plus, eig.pi_plus)
            self.assertAllClose(eig.pi_plus @ eig.pi_minus, np.zeros((2, 2)))
            self.assertAllClose(eig.lambda_plus * eig.pi_plus + eig.lambda_minus * eig.pi_minus, matrix, atol=1e-10)
            self.assertLessEqual(eig.lambda_minus, eig.lambda_plus)
            self.assertAlmostEqual(eig.gap, 2 * np.linalg.norm(model.w(x)), places=12)

    def test_eigen_at_examples(self):
        from pyconic.potential.eigen import eigen_at
        from pyconic.potential.models import polynomial

        # --- setup ---
        horizontal = polynomial(2, w_const=[1.0, 0.0])
        vertical = polynomial(2, v_const=3.0, w_const=[0.0, 1.0])
        wide = polynomial(2, w_const=[3.0, 4.0])

        # --- asserts ---
        eig = eigen_at(horizontal, [0.0, 0.0])
        self.assertEqual((eig.lambda_minus, eig.lambda_plus), (-1.0, 1.0))
        self.assertAllClose(eig.pi_plus, np.diag([1.0, 0.0]))
        self.assertAllClose(eig.pi_minus, np.diag([0.0, 1.0]))
        eig = eigen_at(vertical, [0.0, 0.0])
        self.assertEqual((eig.lambda_minus, eig.lambda_plus), (2.0, 4.0))
        self.assertAllClose(eig.pi_plus, 0.5 * np.ones((2, 2)))
        self.assertEqual(eigen_at(wide, [0.0, 0.0]).gap, 10.0)

    def test_on_crossing_set(self):
        from pyconic.exceptions import OnCrossingSet
        from pyconic.potential.eigen import eigen_at
        from pyconic.potential.models import linear_isotropic

        # --- asserts ---
        with self.assertRaises(OnCrossingSet):
            eigen_at(linear_isotropic(), [0.0, 0.0])

    def test_dimension_and_coefficients(self):
        from pyconic.exceptions import ConicValidationError
        from pyconic.potential.models import PotentialModel, build_model

        # --- asserts ---
        with self.assertRaises(ConicValidationError):
            PotentialModel(1)
        with self.assertRaises(ConicValidationError):
            PotentialModel(2, v_grad=[1.0, 2.0, 3.0])
        with self.assertRaises(ConicValidationError):
            build_model("unknown")
        with self.assertRaises(ConicValidationError):
            build_model("tilted", kappa=[0.0, 0.0])
        self.assertEqual(build_model("linear-isotropic", dimension=3).d, 3)

    def test_gradient_and_hessian_of_eigenvalues(self):
        from pyconic.potential.eigen import grad_eigenvalue, hess_eigenvalue, eigenvalue
        from pyconic.potential.models import polynomial

        # --- setup ---
        model = polynomial(2, v_grad=[0.5, 0.0], w_const=[0.2, 0.1], w_jac=[[1.0, 0.2], [0.1, 1.0]],
                           w_hess=[[[0.4, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.3]]])
        x = np.array([0.4, -0.3])
        h = 1e-5
        basis = np.eye(2)

        # --- asserts ---
        for mode in ("plus", "minus"):
            fd_grad = np.array([(eigenvalue(model, mode, x + h * e) - eigenvalue(model, mode, x - h * e)) / (2 * h)
                                for e in basis])
            self.assertAllClose(grad_eigenvalue(model, mode, x), fd_grad, atol=1e-8)
            fd_hess = np.array([(grad_eigenvalue(model, mode, x + h * e) - grad_eigenvalue(model, mode, x - h * e))
                                / (2 * h) for e in basis])
            hess = hess_eigenvalue(model, mode, x)
            self.assertAllClose(hess, fd_hess, atol=1e-6)
            self.assertAllClose(hess, hess.T, atol=1e-14)


class CrossingGeometryTest(BaseTest):

    def test_examples(self):
        from pyconic.potential.crossing import crossing_geometry
        from pyconic.potential.models import linear_isotropic

        # --- setup ---
        model = linear_isotropic()

        # --- asserts ---
        geom = crossing_geometry(model, 0.0, [0.0, 0.0, 2.0, 0.0])
        self.assertAlmostEqual(geom.r, 2.0)
        self.assertAllClose(geom.omega, [1.0, 0.0])
        self.assertAllClose(geom.omega_perp, [0.0, 1.0])
        self.assertAllClose(geom.gamma0, np.diag([0.0, 0.5]))

        geom = crossing_geometry(model, 0.0, [0.0, 0.0, 0.0, 1.0])
        self.assertAlmostEqual(geom.r, 1.0)
        self.assertAllClose(geom.omega, [0.0, 1.0])
        self.assertAllClose(geom.gamma0, np.diag([1.0, 0.0]))

    def test_invariants(self):
        from pyconic.potential.crossing import crossing_geometry
        from pyconic.potential.models import polynomial

        # --- setup ---
        model = polynomial(3, w_jac=[[1.0, 0.5, 0.2], [-0.3, 2.0, 0.7]], v_grad=[0.1, 0.2, 0.3])
        p = np.array([0.7, -1.2, 0.4])
        geom = crossing_geometry(model, 1.5, np.concatenate([np.zeros(3), p]))

        # --- asserts ---
        self.assertAllClose(geom.r * geom.omega, geom.dw @ p, atol=1e-14)
        self.assertAlmostEqual(np.linalg.norm(geom.omega), 1.0, places=14)
        self.assertAllClose(geom.gamma0, geom.gamma0.T)
        self.assertGreaterEqual(np.min(np.linalg.eigvalsh(geom.gamma0)), -1e-14)
        self.assertAllClose(geom.gamma0 @ (geom.dw.T @ geom.omega), np.zeros(3), atol=1e-13)
        expected = geom.dw.T @ (np.eye(2) - np.outer(geom.omega, geom.omega)) @ geom.dw / geom.r
        self.assertAllClose(geom.gamma0, expected, atol=1e-13)

    def test_degenerate(self):
        from pyconic.exceptions import DegenerateCrossing, NoCrossing
        from pyconic.potential.crossing import crossing_geometry
        from pyconic.potential.models import linear_isotropic, polynomial

        # --- setup ---
        rank_one = polynomial(2, w_jac=[[1.0, 0.0], [1.0, 0.0]])

        # --- asserts ---
        with self.assertRaises(DegenerateCrossing):
            crossing_geometry(rank_one, 0.0, [0.0, 0.0, 1.0, 0.0])
        with self.assertRaises(DegenerateCrossing):
            crossing_geometry(linear_isotropic(3), 0.0, [0.0, 0.0, 0.0, 0.0, 0.0, 1.0])
        with self.assertRaises(NoCrossing):
            crossing_geometry(linear_isotropic(), 0.0, [1.0, 0.0, 1.0, 0.0])

    def test_eta_of(self):
        from pyconic.potential.crossing import crossing_geometry, eta_of
        from pyconic.potential.models import linear_isotropic

        # --- setup ---
        model = linear_isotropic()
        along_x = crossing_geometry(model, 0.0, [0.0, 0.0, 1.0, 0.0])
        along_y = crossing_geometry(model, 0.0, [0.0, 0.0, 0.0, 1.0])
        y, y2 = np.array([0.3, -1.7]), np.array([2.0, 0.5])

        # --- asserts ---
        self.assertAllClose(eta_of(along_x, y), y)
        self.assertAllClose(eta_of(along_y, y), [y[1], -y[0]])
        self.assertAllClose(eta_of(along_y, np.zeros(2)), np.zeros(2))
        self.assertAllClose(eta_of(along_y, 2.5 * y + y2), 2.5 * eta_of(along_y, y) + eta_of(along_y, y2),
                            atol=1e-14)
        grid = np.stack(np.meshgrid([0.0, 1.0], [2.0, 3.0], indexing="ij"), axis=-1)
        self.assertEqual(eta_of(along_x, grid).shape, (2, 2, 2))
