from dataclasses import dataclass

import numpy as np

from pyconic import logger
from pyconic.exceptions import DegenerateCrossing, NoCrossing
from pyconic.potential.models import PotentialModel
from pyconic.variables import TOL_GAP, TOL_NONDEG, TOL_RANK


def perp(v):
    """
    Rotation by +pi/2 in the plane: (v1, v2) -> (-v2, v1).
    """
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def wedge(u, v):
    """
    u ^ v = u1 v2 - u2 v1.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


@dataclass(frozen=True)
class CrossingGeometry:
    """
    Local data of a conical crossing point z_flat = (q_flat, p_flat) reached at time t_flat.

    dw is the 2 x d Jacobian of w at q_flat, r omega = dw p_flat with |omega| = 1, omega_perp the rotation of omega
    by +pi/2 and gamma0 = r^-1 dw^T (Id - omega omega^T) dw.
    """
    t_flat: float
    q_flat: np.ndarray
    p_flat: np.ndarray
    dw: np.ndarray
    r: float
    omega: np.ndarray
    omega_perp: np.ndarray
    gamma0: np.ndarray

    @property
    def d(self):
        return self.q_flat.shape[0]

    @property
    def z_flat(self):
        return np.concatenate([self.q_flat, self.p_flat])

    def as_dict(self):
        return {
            "t_flat": float(self.t_flat),
            "q_flat": self.q_flat.tolist(),
            "p_flat": self.p_flat.tolist(),
            "r": float(self.r),
            "omega": self.omega.tolist(),
            "gamma0": self.gamma0.tolist(),
        }


def crossing_geometry(model: PotentialModel, t_flat: float, z_flat, tol_gap=TOL_GAP,
                      tol_nondeg=TOL_NONDEG) -> CrossingGeometry:
    """
    Compute the geometric constants of a crossing point and check the conical non degeneracy conditions.
    :param model: The potential model
    :param t_flat: Crossing time
    :param z_flat: Phase space point (q_flat, p_flat) of shape (2d,)
    :param tol_gap: Bound on |w(q_flat)|
    :param tol_nondeg: Lower bound on |dw p_flat|
    :return: CrossingGeometry
    """
    z_flat = np.asarray(z_flat, dtype=float)
    d = model.d
    q, p = z_flat[:d].copy(), z_flat[d:].copy()
    gap = float(np.linalg.norm(model.w(q)))
    if gap > tol_gap:
        raise NoCrossing("|w(q)| = {:.3e} > {:.1e}: {} is not on the crossing set.".format(gap, tol_gap, q))
    dw = np.array(model.dw(q))
    singular = np.linalg.svd(dw, compute_uv=False)
    if singular[-1] <= TOL_RANK * max(1.0, singular[0]):
        raise DegenerateCrossing("rank dw(q) < 2 at q = {} (singular values {}).".format(q, singular))
    e = dw @ p
    r = float(np.linalg.norm(e))
    if r < tol_nondeg:
        raise DegenerateCrossing("|dw(q) p| = {:.3e} < {:.1e}: the momentum is tangent to the crossing set.".format(
            r, tol_nondeg))
    omega = e / r
    omega_perp = perp(omega)
    g = dw.T @ omega_perp
    gamma0 = np.outer(g, g) / r
    for arr in (q, p, dw, omega, omega_perp, gamma0):
        arr.setflags(write=False)
    logger.debug("Crossing at t = {:.12g}, q = {}, r = {:.6g}, omega = {}".format(t_flat, q, r, omega))
    return CrossingGeometry(t_flat=float(t_flat), q_flat=q, p_flat=p, dw=dw, r=r, omega=omega,
                            omega_perp=omega_perp, gamma0=gamma0)


def eta_of(geom: CrossingGeometry, y):
    """
    eta(y) = (omega.(dw y), omega_perp.(dw y)).
    :param geom: Crossing geometry
    :param y: Profile coordinate(s) of shape (..., d)
    :return: Array of shape (..., 2)
    """
    dwy = np.asarray(y, dtype=float) @ geom.dw.T
    return np.stack([dwy @ geom.omega, dwy @ geom.omega_perp], axis=-1)
