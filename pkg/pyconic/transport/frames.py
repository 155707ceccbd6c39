from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from pyconic import logger
from pyconic.classical.trajectory import Trajectory
from pyconic.exceptions import CrossingMismatch, NoCrossing, NotAnEigenvector, OnCrossingSet
from pyconic.potential.crossing import CrossingGeometry, perp
from pyconic.potential.eigen import Mode, projectors
from pyconic.potential.models import PotentialModel, a_matrix
from pyconic.variables import ATOL_TRANSPORT, H_LIMIT, TOL_EIGEN, TOL_GAP, TOL_LIMIT, TOL_TRANSPORT


def b_matrix(model: PotentialModel, mode, x, xi, tol_gap=TOL_GAP):
    """
    Transport generator B_+ = Pi_- (xi.grad Pi_+) Pi_+ and B_- = -Pi_+ (xi.grad Pi_+) Pi_-, with
        xi.grad Pi_+ = (A(U) - (w.U/|w|^2) A(w)) / (2|w|),  U = dw(x) xi.
    :param model: The potential model
    :param mode: plus or minus
    :param x: Position
    :param xi: Momentum
    :return: 2x2 real matrix
    """
    mode = Mode(mode)
    x = np.asarray(x, dtype=float)
    w = model.w(x)
    norm = float(np.linalg.norm(w))
    if norm < tol_gap:
        raise OnCrossingSet("|w(x)| = {:.3e}: the transport generator is singular at x = {}.".format(norm, x))
    u = model.dw(x) @ np.asarray(xi, dtype=float)
    derivative = (a_matrix(u) - (w @ u) / norm ** 2 * a_matrix(w)) / (2.0 * norm)
    pi_plus, pi_minus = projectors(w, tol_gap)
    if mode is Mode.plus:
        return pi_minus @ derivative @ pi_plus
    if mode is Mode.minus:
        return -pi_plus @ derivative @ pi_minus
    raise NotAnEigenvector("The reference mode carries no eigenvector.")


def eigenvector_at(model: PotentialModel, mode, x, sign=1, tol_gap=TOL_GAP):
    """
    Unit eigenvector of V(x) for `mode`, its largest component carrying the sign `sign`.
    """
    mode = Mode(mode)
    w = model.w(np.asarray(x, dtype=float))
    if np.linalg.norm(w) < tol_gap:
        raise OnCrossingSet("No eigenvector can be chosen on the crossing set.")
    pi_plus, pi_minus = projectors(w, tol_gap)
    pi = pi_plus if mode is Mode.plus else pi_minus
    column = pi[:, int(np.argmax(np.linalg.norm(pi, axis=0)))]
    vector = column / np.linalg.norm(column)
    k = int(np.argmax(np.abs(vector)))
    return vector * (np.sign(sign) * np.sign(vector[k]))


@dataclass(frozen=True)
class EigenframePath:
    """
    Real unit eigenvector Y(t) of a mode, transported along a trajectory.
    """
    times: np.ndarray
    vectors: np.ndarray
    mode: Mode
    solution: object = None
    v_omega: Optional[np.ndarray] = None

    @property
    def t_start(self):
        return float(self.times[0])

    @property
    def t_end(self):
        return float(self.times[-1])

    def at(self, t):
        t = np.asarray(t, dtype=float)
        if self.solution is None:
            return np.broadcast_to(self.vectors[0], t.shape + (2,)).copy()
        values = self.solution(np.clip(t, min(self.t_start, self.t_end), max(self.t_start, self.t_end)))
        return values.T if t.ndim else values

    def flipped(self):
        """
        The same path for -Y0.
        """
        solution = None if self.solution is None else (lambda t, s=self.solution: -s(t))
        return EigenframePath(times=self.times, vectors=-self.vectors, mode=self.mode, solution=solution,
                              v_omega=None if self.v_omega is None else -self.v_omega)

    def residual(self, model: PotentialModel, trajectory: Trajectory):
        """
        max_t |Pi_mode(q(t)) Y(t) - Y(t)| over the stored times.
        """
        pi_plus, pi_minus = projectors(model.w(trajectory.position(self.times)))
        pi = pi_plus if self.mode is Mode.plus else pi_minus
        return float(np.max(np.linalg.norm(np.einsum("nij,nj->ni", pi, self.vectors) - self.vectors, axis=-1)))


def _check_eigenvector(model, mode, x, y0, tol_eigen):
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (2,):
        raise NotAnEigenvector("Eigenvector has shape {}, expected (2,).".format(y0.shape))
    pi_plus, pi_minus = projectors(model.w(x))
    pi = pi_plus if Mode(mode) is Mode.plus else pi_minus
    residual = float(np.linalg.norm(pi @ y0 - y0))
    if abs(np.linalg.norm(y0) - 1.0) > tol_eigen or residual > tol_eigen:
        raise NotAnEigenvector("{} is not a unit {} eigenvector at x = {} (residual {:.2e}).".format(
            y0, Mode(mode).value, x, residual))
    return y0


def parallel_transport(model: PotentialModel, trajectory: Trajectory, y0, t0=None, t1=None, h_limit=H_LIMIT,
                       rtol=TOL_TRANSPORT, atol=ATOL_TRANSPORT, tol_eigen=TOL_EIGEN) -> EigenframePath:
    """
    Solve Y' = B_mode(q(t), p(t)) Y along a trajectory. The integration stops h_limit before the crossing time when
    the window contains it.
    :param model: The potential model
    :param trajectory: Trajectory on a single mode inside [t0, t1]
    :param y0: Unit eigenvector of the mode at q(t0)
    :param t0: Initial time, the trajectory start by default
    :param t1: Final time, the trajectory end by default
    :return: EigenframePath
    """
    t0 = trajectory.t_start if t0 is None else float(t0)
    t1 = trajectory.t_end if t1 is None else float(t1)
    geom = trajectory.crossing
    if geom is not None:
        if t0 < geom.t_flat and t1 > geom.t_flat - h_limit:
            t1 = geom.t_flat - h_limit
        elif t0 > geom.t_flat and t1 < geom.t_flat + h_limit:
            t1 = geom.t_flat + h_limit
    mode = trajectory.mode_at(t0) if geom is None or t0 < geom.t_flat else trajectory.mode
    y0 = _check_eigenvector(model, mode, trajectory.position(t0), y0, tol_eigen)
    d = model.d

    def rhs(t, y):
        z = trajectory.at(t)
        return b_matrix(model, mode, z[:d], z[d:]) @ y

    if t0 == t1:
        return EigenframePath(times=np.array([t0]), vectors=y0[None, :], mode=mode)
    sol = solve_ivp(rhs, (t0, t1), y0, method="DOP853", rtol=rtol, atol=atol, dense_output=True)
    order = np.argsort(sol.t)
    logger.debug("Transported {} eigenvector on [{:.6g}, {:.6g}] in {} steps".format(
        mode.value, t0, t1, len(sol.t) - 1))
    return EigenframePath(times=sol.t[order], vectors=sol.y.T[order], mode=mode, solution=sol.sol)


def crossing_limit(frame: EigenframePath, geom: CrossingGeometry, h_limit=H_LIMIT, tol_limit=TOL_LIMIT):
    """
    Limit of Y(t) at t_flat from a Richardson extrapolation of the values at t_flat -/+ (h, 2h, 4h), projected onto
    the matching eigenspace of A(omega): +1 for an ingoing minus frame, -1 for an ingoing plus frame.
    :return: Unit vector
    """
    if geom is None:
        raise NoCrossing("The frame's trajectory does not reach a crossing point.")
    side = -1.0 if frame.t_start < geom.t_flat else 1.0
    if abs(frame.t_end - (geom.t_flat + side * h_limit)) > 1e-9 and abs(
            frame.t_start - (geom.t_flat + side * h_limit)) > 1e-9:
        raise NoCrossing("The frame stops at {} and doesn't reach t_flat = {}.".format(frame.t_end, geom.t_flat))
    values = [frame.at(geom.t_flat + side * k * h_limit) for k in (1, 2, 4)]
    extrapolated = 8.0 / 3.0 * values[0] - 2.0 * values[1] + 1.0 / 3.0 * values[2]
    # w/|w| tends to -omega on the ingoing side
    eigen_sign = 1.0 if frame.mode is Mode.minus else -1.0
    eigen_sign *= -side
    projector = 0.5 * (np.eye(2) + eigen_sign * a_matrix(geom.omega))
    projected = projector @ extrapolated
    residual = float(np.linalg.norm(projected - extrapolated))
    if residual > tol_limit:
        logger.warning("Extrapolated eigenvector limit is off the eigenspace by {:.2e}".format(residual))
    limit = projected / np.linalg.norm(projected)
    logger.debug("Eigenvector limit {} at t_flat (residual {:.2e})".format(limit, residual))
    return limit


def outgoing_frames(geom: CrossingGeometry, v_omega, model: Optional[PotentialModel] = None, points=None) \
        -> Tuple[np.ndarray, np.ndarray]:
    """
    Initial vectors of the outgoing frames: V_omega for the plus mode and V_omega_perp for the minus mode. With a model
    and the restart positions (q_plus, q_minus) both get projected onto the exact eigenspaces there.
    :return: (y_plus, y_minus)
    """
    v_omega = np.asarray(v_omega, dtype=float)
    y_plus, y_minus = v_omega.copy(), perp(v_omega)
    if model is not None and points is not None:
        q_plus, q_minus = points
        pi_plus, _ = projectors(model.w(np.asarray(q_plus, dtype=float)))
        _, pi_minus = projectors(model.w(np.asarray(q_minus, dtype=float)))
        y_plus = pi_plus @ y_plus
        y_minus = pi_minus @ y_minus
        y_plus, y_minus = y_plus / np.linalg.norm(y_plus), y_minus / np.linalg.norm(y_minus)
    return y_plus, y_minus


def align_pair_signs(v_omega, limit_plus, tol=1e-6) -> int:
    """
    Sign relating the limit of an ingoing plus frame to V_omega_perp. With -1 the plus data (Y0, profile) has to be
    replaced by (-Y0, -profile).
    """
    v_omega = np.asarray(v_omega, dtype=float)
    limit_plus = np.asarray(limit_plus, dtype=float)
    overlap = float(abs(limit_plus @ v_omega))
    if overlap > tol:
        raise CrossingMismatch("Plus frame limit {} is not orthogonal to V_omega {} ({:.2e}).".format(
            limit_plus, v_omega, overlap))
    return 1 if limit_plus @ perp(v_omega) >= 0 else -1
