import numpy as np
from scipy.integrate import solve_ivp

from pyconic import logger
from pyconic.classical.trajectory import Segment, Trajectory
from pyconic.exceptions import (ConicValidationError, GrazingCrossing, NoCrossing, NumericalFailure, OnCrossingSet,
                                StiffnessFailure)
from pyconic.potential.crossing import CrossingGeometry, crossing_geometry
from pyconic.potential.eigen import Mode, grad_eigenvalue
from pyconic.potential.models import PotentialModel
from pyconic.variables import (ATOL_ODE, H_RESTART, TOL_CROSS, TOL_GAP, TOL_GRAZE, TOL_NONDEG, TOL_ODE)


def mode_force(model: PotentialModel, mode, q, direction=None):
    """
    -grad lambda_mode(q). On the crossing set `direction` stands for the limit of w/|w| along the path.
    """
    return -grad_eigenvalue(model, mode, q, direction=direction)


def vector_field(model: PotentialModel, mode, tol_gap=TOL_GAP):
    """
    Build the right hand side z' = J grad h_mode(z). Where |w| drops below tol_gap the singular part of the force is
    averaged out, which only happens on a set of times of measure zero.
    """
    mode = Mode(mode)
    s = mode.sign
    d = model.d

    def rhs(t, z):
        q, p = z[:d], z[d:]
        force = -model.grad_v(q)
        if s != 0:
            w = model.w(q)
            norm = np.linalg.norm(w)
            if norm >= tol_gap:
                force = force - s * (model.dw(q).T @ (w / norm))
        return np.concatenate([p, force])

    return rhs


def _closest_approach(model: PotentialModel, direction, t_restart=None):
    """
    Terminal event at the local minima of |w(q(t))|, the zeros of d/dt |w|^2/2 = w.(dw p). Right after a restart
    the event reports a constant value so the restart point itself is not detected again.
    """
    d = model.d
    guard = 1e-9 * max(1.0, abs(t_restart)) if t_restart is not None else 0.0

    def event(t, z):
        if t_restart is not None and abs(t - t_restart) <= guard:
            return float(direction)
        q, p = z[:d], z[d:]
        return float(model.w(q) @ (model.dw(q) @ p))

    event.terminal = True
    event.direction = direction
    return event


def project_onto_crossing(model: PotentialModel, z, iterations=3):
    """
    Newton projection of the position onto {w = 0} along the range of dw^T. The momentum is kept.
    """
    z = np.array(z, dtype=float)
    d = model.d
    for _ in range(iterations):
        q = z[:d]
        correction, *_ = np.linalg.lstsq(model.dw(q), model.w(q), rcond=None)
        z[:d] = q - correction
    return z


def _check_state(model: PotentialModel, z0):
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (2 * model.d,):
        raise ConicValidationError("Phase point has shape {}, expected ({},).".format(z0.shape, 2 * model.d))
    if not np.all(np.isfinite(z0)):
        raise ConicValidationError("Phase point {} is not finite.".format(z0))
    return z0


def integrate_flow(model: PotentialModel, mode, z0, t0, t1, rtol=TOL_ODE, atol=ATOL_ODE, tol_gap=TOL_GAP,
                   tol_cross=TOL_CROSS, tol_graze=TOL_GRAZE, tol_nondeg=TOL_NONDEG) -> Trajectory:
    """
    Integrate the flow of h_mode from z0 at t0 towards t1 (t1 < t0 integrates backward). For the plus and minus modes
    the integration halts at the first crossing point, which is then recorded on the trajectory.
    :param model: The potential model
    :param mode: plus, minus or reference
    :param z0: Initial phase point (q0, p0)
    :param t0: Initial time
    :param t1: Final time
    :return: Trajectory, with `crossing` set if the crossing set was met before t1
    """
    mode = Mode(mode)
    z0 = _check_state(model, z0)
    rhs = vector_field(model, mode, tol_gap=tol_gap)
    if mode is not Mode.reference and np.linalg.norm(model.w(z0[:model.d])) < tol_gap:
        raise OnCrossingSet("Initial point {} lies on the crossing set.".format(z0[:model.d]))
    t0, t1 = float(t0), float(t1)
    if t0 == t1:
        return Trajectory(model, mode, [Segment(mode, [t0], [z0], [rhs(t0, z0)])])

    direction = 1 if t1 > t0 else -1
    segments = []
    t_start, z_start, t_restart = t0, z0, None
    while True:
        # a constant w has no closest approach to detect
        events = None if mode is Mode.reference or model.w_is_constant else [
            _closest_approach(model, direction, t_restart)]
        sol = solve_ivp(rhs, (t_start, t1), z_start, method="RK45", rtol=rtol, atol=atol, events=events)
        if sol.status == -1:
            raise StiffnessFailure("Integration of the {} flow failed at t = {}: {}".format(
                mode.value, sol.t[-1], sol.message))
        times, states = sol.t, sol.y.T.copy()
        logger.debug("{} flow segment [{:.6g}, {:.6g}] with {} steps and {} rhs evaluations".format(
            mode.value, times[0], times[-1], len(times) - 1, sol.nfev))
        if sol.status == 0:
            derivatives = np.array([rhs(t, z) for t, z in zip(times, states)])
            segments.append(Segment(mode, times, states, derivatives))
            return Trajectory(model, mode, segments)

        t_event, z_event = float(sol.t_events[0][0]), sol.y_events[0][0]
        gap = float(np.linalg.norm(model.w(z_event[:model.d])))
        if gap < tol_cross:
            z_flat = project_onto_crossing(model, z_event)
            geom = crossing_geometry(model, t_event, z_flat, tol_gap=tol_gap, tol_nondeg=tol_nondeg)
            states[-1] = z_flat
            derivatives = [rhs(t, z) for t, z in zip(times[:-1], states[:-1])]
            # one sided force: w/|w| tends to sgn(t - t_flat) omega
            side = -direction
            derivatives.append(np.concatenate(
                [z_flat[model.d:], mode_force(model, mode, z_flat[:model.d], direction=side * geom.omega)]))
            segments.append(Segment(mode, times, states, np.array(derivatives)))
            logger.info("{} flow reached the crossing set at t = {:.12g} (|w| = {:.2e}, r = {:.6g})".format(
                mode.value, t_event, gap, geom.r))
            return Trajectory(model, mode, segments, crossing=geom)
        if gap < tol_graze:
            raise GrazingCrossing("{} flow passes the crossing set at distance |w| = {:.3e} at t = {:.6g} "
                                  "without meeting it.".format(mode.value, gap, t_event))
        derivatives = np.array([rhs(t, z) for t, z in zip(times, states)])
        segments.append(Segment(mode, times, states, derivatives))
        logger.debug("Closest approach |w| = {:.3e} at t = {:.6g}, continuing".format(gap, t_event))
        t_start, z_start, t_restart = t_event, z_event, t_event


def restart_state(model: PotentialModel, geom: CrossingGeometry, mode, h):
    """
    Second order Taylor state of the mode flow leaving z_flat: q = q_flat + h p_flat + h^2/2 F, p = p_flat + h F where
    F is the one sided force on the side sgn(h).
    """
    side = 1.0 if h > 0 else -1.0
    force = mode_force(model, mode, geom.q_flat, direction=side * geom.omega)
    q = geom.q_flat + h * geom.p_flat + 0.5 * h * h * force
    p = geom.p_flat + h * force
    return np.concatenate([q, p]), np.concatenate([geom.p_flat, force])


def leave_crossing(model: PotentialModel, geom: CrossingGeometry, mode, t1, h_restart=H_RESTART, **tolerances) \
        -> Trajectory:
    """
    Start the `mode` flow at the crossing point and integrate it towards t1, forward or backward in time.
    :param model: The potential model
    :param geom: Crossing geometry
    :param mode: plus or minus
    :param t1: Final time
    :param h_restart: Length of the Taylor step off the crossing point
    :return: Trajectory from t_flat to t1 carrying `geom` as crossing
    """
    mode = Mode(mode)
    if mode is Mode.reference:
        raise ConicValidationError("Only the plus and minus flows are singular at the crossing point.")
    t_flat = geom.t_flat
    if t1 == t_flat:
        raise ConicValidationError("The final time equals the crossing time.")
    side = 1.0 if t1 > t_flat else -1.0
    h = side * min(h_restart, abs(t1 - t_flat))
    z_h, start_derivative = restart_state(model, geom, mode, h)
    rhs = vector_field(model, mode)
    restart = Segment(mode, [t_flat, t_flat + h], [geom.z_flat, z_h], [start_derivative, rhs(t_flat + h, z_h)])
    if t_flat + h == t1:
        return Trajectory(model, mode, [restart], crossing=geom, in_mode=mode)
    rest = integrate_flow(model, mode, z_h, t_flat + h, t1, **tolerances)
    if rest.crossing is not None:
        raise NumericalFailure("The {} flow leaving the crossing at t = {:.6g} meets the crossing set again at "
                               "t = {:.6g}.".format(mode.value, t_flat, rest.crossing.t_flat))
    return Trajectory(model, mode, [restart] + rest.segments, crossing=geom, in_mode=mode)


def continue_through_crossing(model: PotentialModel, traj_in: Trajectory, out_mode, t1, h_restart=H_RESTART,
                              **tolerances) -> Trajectory:
    """
    Continue a trajectory which halted at a crossing point on `out_mode` up to t1.
    :return: Concatenated trajectory, ingoing segments followed by the outgoing ones
    """
    geom = traj_in.crossing
    if geom is None:
        raise NoCrossing("The ingoing trajectory {} doesn't reach the crossing set.".format(traj_in))
    if abs(traj_in.t_end - geom.t_flat) > 1e-12 * max(1.0, abs(geom.t_flat)) and traj_in.t_start < geom.t_flat:
        raise ConicValidationError("The ingoing trajectory has to end at the crossing time.")
    out = leave_crossing(model, geom, out_mode, t1, h_restart=h_restart, **tolerances)
    logger.info("Continued {} trajectory through the crossing on the {} mode up to t = {:.6g}".format(
        traj_in.in_mode.value, Mode(out_mode).value, t1))
    return Trajectory(model, out_mode, traj_in.segments + out.segments, crossing=geom, in_mode=traj_in.in_mode)


def meeting_data(model: PotentialModel, t_flat, z_flat, t0, h_restart=H_RESTART, tol_gap=TOL_GAP,
                 tol_nondeg=TOL_NONDEG, **tolerances):
    """
    Phase points at t0 whose plus and minus flows both reach z_flat at t_flat.
    :return: (z0_plus, z0_minus)
    """
    geom = crossing_geometry(model, t_flat, z_flat, tol_gap=tol_gap, tol_nondeg=tol_nondeg)
    plus = leave_crossing(model, geom, Mode.plus, t0, h_restart=h_restart, tol_gap=tol_gap, tol_nondeg=tol_nondeg,
                          **tolerances)
    minus = leave_crossing(model, geom, Mode.minus, t0, h_restart=h_restart, tol_gap=tol_gap,
                           tol_nondeg=tol_nondeg, **tolerances)
    return plus.at(t0), minus.at(t0)
