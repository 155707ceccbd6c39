from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from pyconic.classical.trajectory import Trajectory
from pyconic.exceptions import AtCrossingTime, ConicValidationError
from pyconic.potential.crossing import CrossingGeometry
from pyconic.potential.eigen import Mode, hess_eigenvalue
from pyconic.potential.models import PotentialModel


@dataclass(frozen=True)
class HessianSplit:
    """
    Hess lambda(q(t)) = smooth + singular * gamma0, singular = sign / |t - t_flat| near a crossing and 0 elsewhere.
    """
    t: float
    full: np.ndarray
    smooth: np.ndarray
    singular: float
    gamma0: np.ndarray
    sign: int

    @property
    def has_singular(self):
        return self.singular != 0.0


def _split(t, full, geom: Optional[CrossingGeometry], sign):
    full = 0.5 * (full + full.T)
    if geom is None or sign == 0:
        return HessianSplit(t=t, full=full, smooth=full, singular=0.0, gamma0=np.zeros_like(full), sign=sign)
    tau = t - geom.t_flat
    if tau == 0.0:
        raise AtCrossingTime("The Hessian of the eigenvalue is singular at t_flat = {}.".format(geom.t_flat))
    singular = sign / abs(tau)
    return HessianSplit(t=t, full=full, smooth=full - singular * geom.gamma0, singular=singular,
                        gamma0=np.array(geom.gamma0), sign=sign)


def hessian_at(model: PotentialModel, traj: Trajectory, t) -> HessianSplit:
    """
    Hessian of the eigenvalue of the current mode at q(t), split against the crossing form gamma0 of the trajectory.
    :param model: The potential model
    :param traj: Trajectory, possibly continued through a crossing
    :param t: Time different from t_flat
    :return: HessianSplit
    """
    t = float(t)
    geom = traj.crossing
    if geom is not None and t == geom.t_flat:
        raise AtCrossingTime("The Hessian of the eigenvalue is singular at t_flat = {}.".format(geom.t_flat))
    mode = traj.mode_at(t)
    return _split(t, hess_eigenvalue(model, mode, traj.position(t)), geom, mode.sign)


class HessianPath:
    """
    Time dependent Hessian t -> Hess(t) driving a profile, with the crossing data of its trajectory if any.
    """

    def __init__(self, dimension: int, full: Callable, geom: Optional[CrossingGeometry] = None,
                 sign_at: Optional[Callable] = None):
        if dimension < 1:
            raise ConicValidationError("The profile dimension has to be positive.")
        self._d = dimension
        self._full = full
        self._geom = geom
        self._sign_at = sign_at if sign_at is not None else (lambda t: 0)

    @classmethod
    def from_trajectory(cls, model: PotentialModel, traj: Trajectory):

        def full(t):
            return hess_eigenvalue(model, traj.mode_at(t), traj.position(t))

        return cls(model.d, full, geom=traj.crossing, sign_at=lambda t: traj.mode_at(t).sign)

    @classmethod
    def constant(cls, matrix):
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(matrix.shape[0], lambda t: matrix)

    @classmethod
    def singular(cls, smooth: Callable, geom: CrossingGeometry, in_mode, out_mode=None):
        """
        Hess(t) = smooth(t) + s gamma0 / |t - t_flat| with the sign of in_mode before t_flat and of out_mode after.
        """
        in_sign = Mode(in_mode).sign
        out_sign = Mode(out_mode if out_mode is not None else in_mode).sign

        def sign_at(t):
            return in_sign if t <= geom.t_flat else out_sign

        def full(t):
            return np.asarray(smooth(t)) + sign_at(t) / abs(t - geom.t_flat) * geom.gamma0

        return cls(geom.d, full, geom=geom, sign_at=sign_at)

    @property
    def d(self):
        return self._d

    @property
    def geom(self) -> Optional[CrossingGeometry]:
        return self._geom

    def sign_at(self, t) -> int:
        return self._sign_at(t)

    def __call__(self, t):
        return self.split(t).full

    def split(self, t) -> HessianSplit:
        t = float(t)
        if self._geom is not None and t == self._geom.t_flat:
            raise AtCrossingTime("The Hessian path is singular at t_flat = {}.".format(self._geom.t_flat))
        full = np.atleast_2d(np.asarray(self._full(t), dtype=float))
        if full.shape != (self._d, self._d):
            raise ConicValidationError("Hessian has shape {}, expected {}.".format(full.shape, (self._d, self._d)))
        return _split(t, full, self._geom, self.sign_at(t))
