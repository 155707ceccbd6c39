from typing import Optional, Tuple

import numpy as np

from pyconic.classical.flow import integrate_flow
from pyconic.classical.trajectory import Segment, Trajectory
from pyconic.exceptions import ConicValidationError
from pyconic.potential.crossing import CrossingGeometry
from pyconic.potential.eigen import Mode, eigenvalue
from pyconic.potential.models import PotentialModel

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(4)


class ActionCurve:
    """
    Action S(t) = int (p.q' - h) ds = int (|p|^2/2 - lambda_mode(q)) ds along a trajectory, normalised to vanish at
    the anchor time. Each interval between trajectory nodes is integrated with 4 point Gauss-Legendre which is exact
    for the cubic interpolant of the trajectory up to the non polynomial part of lambda.
    """

    def __init__(self, trajectory: Trajectory, anchor: Optional[float] = None):
        self._trajectory = trajectory
        self._times = trajectory.times
        increments = np.array([self._integral(a, b) for a, b in zip(self._times[:-1], self._times[1:])])
        values = np.concatenate([[0.0], np.cumsum(increments)])
        self._anchor = trajectory.t_start if anchor is None else float(anchor)
        self._values = values
        self._values = values - self.at(self._anchor)
        self._times.setflags(write=False)
        self._values.setflags(write=False)

    def _lagrangian(self, t):
        traj = self._trajectory
        z = traj.at(t)
        d = traj.d
        q, p = z[..., :d], z[..., d:]
        modes = [traj.mode_at(s) for s in np.atleast_1d(t)]
        lam = np.array([eigenvalue(traj.model, m, x) for m, x in zip(modes, np.atleast_2d(q))])
        return 0.5 * np.sum(p * p, axis=-1) - lam.reshape(np.shape(t))

    def _integral(self, a, b):
        """
        Lagrangian over [a, b] by 4 point Gauss-Legendre. The rule is exact for polynomials of degree 7, so the error
        per node interval is O(h^8) against O(h^4) for Simpson on the same nodes. With the node spacing of an ODE
        solve at rtol 1e-10 this stays below the integrator's own error and well inside the slope checks on S.
        """
        if a == b:
            return 0.0
        half = 0.5 * (b - a)
        nodes = 0.5 * (a + b) + half * _NODES
        return float(half * np.sum(_WEIGHTS * self._lagrangian(nodes)))

    @property
    def trajectory(self):
        return self._trajectory

    @property
    def mode(self) -> Mode:
        return self._trajectory.mode

    @property
    def times(self):
        return self._times

    @property
    def values(self):
        return self._values

    @property
    def anchor(self):
        return self._anchor

    def at(self, t):
        """
        S(t), integrating from the closest node at or below t.
        """
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty(t_arr.shape)
        for i, s in enumerate(t_arr):
            k = int(np.clip(np.searchsorted(self._times, s, side="right") - 1, 0, len(self._times) - 1))
            out[i] = self._values[k] + self._integral(self._times[k], s)
        return out[0] if np.ndim(t) == 0 else out

    def rate(self, t):
        """
        S'(t) = |p|^2/2 - lambda(q).
        """
        return self._lagrangian(np.asarray(t, dtype=float))


def action_along(trajectory: Trajectory, anchor: Optional[float] = None) -> ActionCurve:
    """
    Accumulate the action along a trajectory.
    :param trajectory: Trajectory
    :param anchor: Time at which S vanishes, the start of the trajectory by default
    :return: ActionCurve
    """
    return ActionCurve(trajectory, anchor=anchor)


def reference_frame(model: PotentialModel, geom: CrossingGeometry, t0, t1, **tolerances) \
        -> Tuple[Trajectory, ActionCurve]:
    """
    Flow of the scalar Hamiltonian |p|^2/2 + v(q) through z_flat and its action S_0, both anchored at t_flat.
    :param model: The potential model
    :param geom: Crossing geometry
    :param t0: Earliest time (t0 <= t_flat)
    :param t1: Latest time (t1 >= t_flat)
    :return: (Trajectory, ActionCurve)
    """
    t_flat = geom.t_flat
    if t0 > t_flat or t1 < t_flat:
        raise ConicValidationError("The reference window [{}, {}] has to contain t_flat = {}.".format(t0, t1, t_flat))
    segments = []
    if t0 < t_flat:
        segments += integrate_flow(model, Mode.reference, geom.z_flat, t_flat, t0, **tolerances).segments
    if t1 > t_flat:
        segments += integrate_flow(model, Mode.reference, geom.z_flat, t_flat, t1, **tolerances).segments
    if not segments:
        z = geom.z_flat
        segments = [Segment(Mode.reference, [t_flat], [z], [np.concatenate([geom.p_flat, -model.grad_v(geom.q_flat)])])]
    trajectory = Trajectory(model, Mode.reference, segments)
    return trajectory, ActionCurve(trajectory, anchor=t_flat)
