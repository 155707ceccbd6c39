import math
from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

import numpy as np
from scipy.fft import fftn, ifftn

from pyconic import logger
from pyconic.exceptions import ConicValidationError, NoCrossing
from pyconic.potential.crossing import CrossingGeometry
from pyconic.profile.grid import ProfileGrid
from pyconic.profile.hessian import HessianPath
from pyconic.profile.mesh import average_log, crossing_mesh, uniform_mesh
from pyconic.utils.spectral import quadratic_form, squared_wavenumbers
from pyconic.variables import H_EXTRACT, PROFILE_DT, TAU_SWITCH, TOL_SHELL


def compensation_phase(geom: CrossingGeometry, sign, t, y):
    """
    exp(i/2 kappa(t) gamma0 y.y) with kappa(t) = sign sgn(t - t_flat) ln|t - t_flat|, the factor turning a profile
    u(t) of a mode with eigenvalue sign `sign` into its compensated variable v(t).
    """
    tau = float(t) - geom.t_flat
    if tau == 0.0:
        raise ConicValidationError("The compensation phase diverges at t_flat.")
    kappa = sign * math.copysign(1.0, tau) * math.log(abs(tau))
    return np.exp(0.5j * kappa * quadratic_form(geom.gamma0, np.asarray(y, dtype=float)))


def compensate(u: ProfileGrid, geom: CrossingGeometry, sign, t=None) -> ProfileGrid:
    t = u.time if t is None else t
    return u.replace(values=compensation_phase(geom, sign, t, u.coordinates()) * u.values)


def decompensate(v: ProfileGrid, geom: CrossingGeometry, sign, t=None) -> ProfileGrid:
    t = v.time if t is None else t
    return v.replace(values=np.conj(compensation_phase(geom, sign, t, v.coordinates())) * v.values)


class ProfileStepper:
    """
    Strang steps V/2 - T - V/2 of i du/dt = -1/2 Lap u + 1/2 Hess(t) y.y u on the nodes of a profile grid, the Hessian
    frozen at the middle of each step.
    """

    def __init__(self, path: HessianPath, grid: ProfileGrid):
        if path.d != grid.d:
            raise ConicValidationError("Hessian path of dimension {} for a profile of dimension {}.".format(
                path.d, grid.d))
        self._path = path
        self._coords = grid.coordinates()
        self._k2 = squared_wavenumbers(grid.d, grid.extent, grid.points)
        geom = path.geom
        self._gamma_form = None if geom is None else quadratic_form(geom.gamma0, self._coords)

    def _kinetic(self, values, h):
        return ifftn(np.exp(-0.5j * h * self._k2) * fftn(values))

    def step(self, values, a, b):
        h = b - a
        half = np.exp(-0.25j * h * quadratic_form(self._path(0.5 * (a + b)), self._coords))
        return half * self._kinetic(half * values, h)

    def compensated_step(self, values, a, b):
        """
        Step of the compensated variable: the smooth part of the Hessian in the potential factors and the kinetic
        factor conjugated by the compensation phase averaged over the step.
        """
        geom = self._path.geom
        h = b - a
        split = self._path.split(0.5 * (a + b))
        side = 1.0 if 0.5 * (a + b) > geom.t_flat else -1.0
        kappa = split.sign * side * average_log(abs(a - geom.t_flat), abs(b - geom.t_flat))
        phase = np.exp(0.5j * kappa * self._gamma_form)
        half = np.exp(-0.25j * h * quadratic_form(split.smooth, self._coords))
        return half * (phase * self._kinetic(np.conj(phase) * (half * values), h))


def _check_outside_window(path: HessianPath, t0, t1, tau_switch):
    geom = path.geom
    if geom is None:
        return
    slack = 1e-12 * max(1.0, abs(geom.t_flat))
    low, high = min(t0, t1), max(t0, t1)
    if low < geom.t_flat + tau_switch - slack and high > geom.t_flat - tau_switch + slack:
        raise ConicValidationError("[{:.6g}, {:.6g}] meets the crossing window of radius {} around t_flat = {:.6g}; "
                                   "use the compensated evolution there.".format(t0, t1, tau_switch, geom.t_flat))


def evolve_profile(path: HessianPath, u: ProfileGrid, t1, dt=PROFILE_DT, tau_switch=TAU_SWITCH,
                   tol_shell=TOL_SHELL) -> ProfileGrid:
    """
    Split step evolution of a profile from u.time to t1 away from the crossing time.
    :param path: Hessian path Hess lambda(q(t))
    :param u: Profile at its time stamp
    :param t1: Final time
    :param dt: Largest time step
    :return: Profile at t1
    """
    t0 = u.time
    _check_outside_window(path, t0, t1, tau_switch)
    mesh = uniform_mesh(t0, t1, dt)
    stepper = ProfileStepper(path, u)
    values = u.values
    for a, b in zip(mesh[:-1], mesh[1:]):
        values = stepper.step(values, a, b)
    out = u.replace(values=values, time=float(t1))
    logger.debug("Evolved profile on [{:.6g}, {:.6g}] in {} steps, mass drift {:.2e}".format(
        t0, t1, len(mesh) - 1, abs(out.mass() - u.mass())))
    out.check_boundary(tol_shell)
    return out


def iter_compensated(path: HessianPath, u: ProfileGrid, t1, dt=PROFILE_DT, tau_switch=TAU_SWITCH,
                     h_extract=H_EXTRACT) -> Iterator[ProfileGrid]:
    """
    Compensated states v(t) at the nodes of the crossing mesh from u.time to t1, starting with the initial one. A
    profile stamped t_flat is already compensated.
    """
    geom = path.geom
    if geom is None:
        raise NoCrossing("The Hessian path has no crossing to compensate.")
    t0 = u.time
    mesh = crossing_mesh(geom.t_flat, t0, t1, dt=dt, tau_switch=tau_switch, h_extract=h_extract)
    v = u if t0 == geom.t_flat else compensate(u, geom, path.sign_at(t0))
    yield v
    stepper = ProfileStepper(path, u)
    values = v.values
    for a, b in zip(mesh[:-1], mesh[1:]):
        values = stepper.compensated_step(values, a, b)
        yield v.replace(values=values, time=float(b))


def evolve_compensated(path: HessianPath, u: ProfileGrid, t1, dt=PROFILE_DT, tau_switch=TAU_SWITCH,
                       h_extract=H_EXTRACT, tol_shell=TOL_SHELL) -> ProfileGrid:
    """
    Evolution inside the crossing window through the compensated variable; t_flat may be an end point, where the
    profile is the compensated limit.
    :return: Profile at t1
    """
    v = None
    for v in iter_compensated(path, u, t1, dt=dt, tau_switch=tau_switch, h_extract=h_extract):
        pass
    geom = path.geom
    out = v if float(t1) == geom.t_flat else decompensate(v, geom, path.sign_at(t1))
    out.check_boundary(tol_shell)
    return out


def propagate_profile(path: HessianPath, u: ProfileGrid, t1, dt=PROFILE_DT, tau_switch=TAU_SWITCH,
                      h_extract=H_EXTRACT, tol_shell=TOL_SHELL) -> ProfileGrid:
    """
    Evolve a profile from u.time to t1 on one side of the crossing time, switching to the compensated evolution
    inside the crossing window.
    """
    t1 = float(t1)
    geom = path.geom
    options = dict(dt=dt, tau_switch=tau_switch, tol_shell=tol_shell)
    if geom is None:
        return evolve_profile(path, u, t1, **options)
    t_flat = geom.t_flat
    if (u.time - t_flat) * (t1 - t_flat) < 0:
        raise ConicValidationError("Profiles are evolved on one side of t_flat = {:.6g} at a time, got [{:.6g}, "
                                   "{:.6g}].".format(t_flat, u.time, t1))
    side = 1.0 if max(u.time, t1) > t_flat else -1.0
    edge = t_flat + side * tau_switch
    current = u
    if abs(current.time - t_flat) > tau_switch:
        current = evolve_profile(path, current, edge if abs(t1 - t_flat) < tau_switch else t1, **options)
    if abs(current.time - t_flat) <= tau_switch and current.time != t1:
        inside = t1 if abs(t1 - t_flat) <= tau_switch else edge
        current = evolve_compensated(path, current, inside, h_extract=h_extract, **options)
    if current.time != t1:
        current = evolve_profile(path, current, t1, **options)
    return current


def extract_incoming(path: HessianPath, u: ProfileGrid, dt=PROFILE_DT, tau_switch=TAU_SWITCH,
                     h_extract=H_EXTRACT, tol_shell=TOL_SHELL) -> Tuple[ProfileGrid, float]:
    """
    Ingoing profile u_in: the compensated state carried to t_flat. The residual is the distance between the last
    two compensated states, taken at t_flat - tau_K with tau_K <= h_extract and at t_flat.
    :param path: Hessian path of the ingoing mode
    :param u: Profile at a time before t_flat
    :return: (u_in, residual)
    """
    geom = path.geom
    if geom is None:
        raise NoCrossing("The ingoing trajectory does not reach a crossing point.")
    if u.time >= geom.t_flat:
        raise ConicValidationError("The ingoing profile has to be given before t_flat = {}.".format(geom.t_flat))
    if geom.t_flat - u.time > tau_switch:
        u = evolve_profile(path, u, geom.t_flat - tau_switch, dt=dt, tau_switch=tau_switch, tol_shell=tol_shell)
    previous = v = None
    for state in iter_compensated(path, u, geom.t_flat, dt=dt, tau_switch=tau_switch, h_extract=h_extract):
        previous, v = v, state
    residual = 0.0 if previous is None else v.distance(previous)
    v.check_boundary(tol_shell)
    logger.info("Extracted ingoing profile at t_flat = {:.6g} (residual {:.2e}, mass {:.12f})".format(
        geom.t_flat, residual, v.mass()))
    return v, residual


def launch_outgoing(path: HessianPath, u_out: ProfileGrid, t1, dt=PROFILE_DT, tau_switch=TAU_SWITCH,
                    h_extract=H_EXTRACT, tol_shell=TOL_SHELL) -> ProfileGrid:
    """
    Evolve an outgoing profile given at t_flat up to t1 > t_flat.
    :param path: Hessian path of the outgoing mode
    :param u_out: Compensated outgoing profile, stamped t_flat
    :return: Profile at t1
    """
    geom = path.geom
    if geom is None:
        raise NoCrossing("The outgoing trajectory has no crossing point to start from.")
    if t1 <= geom.t_flat:
        raise ConicValidationError("Outgoing profiles are launched forward in time, got t1 = {}.".format(t1))
    u_out = u_out.replace(time=geom.t_flat)
    return propagate_profile(path, u_out, t1, dt=dt, tau_switch=tau_switch, h_extract=h_extract, tol_shell=tol_shell)


@dataclass(frozen=True)
class CompensatedTrace:
    """
    Distances ||v(t) - v(t_flat)|| and Sigma^1 norms of u(t) at the crossing mesh nodes, t = t_flat - taus.
    """
    taus: np.ndarray
    distances: np.ndarray
    sigma_norms: np.ndarray
    limit: ProfileGrid


def compensated_trace(path: HessianPath, u: ProfileGrid, dt=PROFILE_DT, tau_switch=TAU_SWITCH,
                      h_extract=H_EXTRACT) -> CompensatedTrace:
    """
    Record the compensated approach of an ingoing profile to t_flat.
    :param u: Profile at t_flat - tau_switch or earlier
    """
    geom = path.geom
    if geom is None:
        raise NoCrossing("The ingoing trajectory does not reach a crossing point.")
    if geom.t_flat - u.time > tau_switch:
        u = evolve_profile(path, u, geom.t_flat - tau_switch, dt=dt, tau_switch=tau_switch)
    states = list(iter_compensated(path, u, geom.t_flat, dt=dt, tau_switch=tau_switch, h_extract=h_extract))
    limit = states[-1]
    inner = states[:-1]
    taus = np.array([geom.t_flat - v.time for v in inner])
    distances = np.array([v.distance(limit) for v in inner])
    norms = np.array([decompensate(v, geom, path.sign_at(v.time)).sigma_norm(1) for v in inner])
    return CompensatedTrace(taus=taus, distances=distances, sigma_norms=norms, limit=limit)


def cauchy_rate(taus, distances, log_power: Optional[float] = None):
    """
    Least squares fit of log d = p log tau + q log(1 + |ln tau|) + c. With log_power given q is held fixed.
    :return: (p, q)
    """
    taus = np.asarray(taus, dtype=float)
    distances = np.asarray(distances, dtype=float)
    keep = (taus > 0) & (distances > 0)
    if np.count_nonzero(keep) < 3:
        raise ConicValidationError("The rate fit needs at least three positive samples.")
    log_tau = np.log(taus[keep])
    log_log = np.log1p(np.abs(log_tau))
    target = np.log(distances[keep])
    if log_power is not None:
        fit = np.polyfit(log_tau, target - log_power * log_log, 1)
        return float(fit[0]), float(log_power)
    design = np.stack([log_tau, log_log, np.ones_like(log_tau)], axis=1)
    (p, q, _), *_ = np.linalg.lstsq(design, target, rcond=None)
    return float(p), float(q)


def sigma_growth(taus, sigma_norms):
    """
    Smallest c with ||u(t)||_Sigma1 <= c (1 + |ln|t - t_flat||) over the samples.
    """
    taus = np.asarray(taus, dtype=float)
    return float(np.max(np.asarray(sigma_norms) / (1.0 + np.abs(np.log(taus)))))
