"""
Direct integration of the Landau-Zener model problem i u' = A(s r omega + eta) u, used as an oracle for the
scattering coefficients. The state is integrated in the frame of R(theta) with e_theta = omega where the system
matrix reads ((r s + eta1, eta2), (eta2, -r s - eta1)) for eta = (omega.eta, omega_perp.eta).
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from pyconic import logger
from pyconic.exceptions import ConicValidationError, StiffnessFailure
from pyconic.landau_zener.coefficients import coeff_a, coeff_c, frame_angle, lambda_phase, lz_basis, rotate_frame
from pyconic.variables import ORACLE_S0, TOL_LZ

ATOL_LZ = 1e-14
E1 = (1.0, 0.0)


def lz_matrix(s, eta, r):
    """
    System matrix of the model problem in the rotated frame.
    """
    diagonal = r * s + eta[0]
    return np.array([[diagonal, eta[1]], [eta[1], -diagonal]])


def _eta(eta):
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (2,):
        raise ConicValidationError("eta has to be a pair, got shape {}.".format(eta.shape))
    return eta


def lz_flow(eta, r, s_start, s_end, u0, omega=E1, s_eval=None, rtol=TOL_LZ, atol=ATOL_LZ):
    """
    Solve i u' = A(s r omega + eta) u from s_start to s_end.
    :param eta: (omega.eta, omega_perp.eta)
    :param r: Crossing speed
    :param u0: State in C^2 at s_start
    :param omega: Unit direction of the crossing
    :param s_eval: Optional times at which the state is returned
    :return: State at s_end of shape (2,), or states at s_eval of shape (len(s_eval), 2)
    """
    eta = _eta(eta)
    if r <= 0:
        raise ConicValidationError("The crossing speed r has to be positive, got {}.".format(r))
    rotation = rotate_frame(frame_angle(omega))
    v0 = rotation.T @ np.asarray(u0, dtype=complex)
    if s_start == s_end:
        return np.asarray(u0, dtype=complex) if s_eval is None else np.tile(u0, (len(s_eval), 1))

    def rhs(s, v):
        return -1j * (lz_matrix(s, eta, r) @ v)

    sol = solve_ivp(rhs, (s_start, s_end), v0, method="DOP853", rtol=rtol, atol=atol, t_eval=s_eval)
    if sol.status == -1:
        raise StiffnessFailure("Landau-Zener integration failed on [{}, {}]: {}".format(s_start, s_end, sol.message))
    logger.debug("Landau-Zener flow on [{:.4g}, {:.4g}] in {} evaluations".format(s_start, s_end, sol.nfev))
    states = (rotation @ sol.y).T
    return states[-1] if s_eval is None else states


def lz_integrate(eta, r, s0, u0, omega=E1, rtol=TOL_LZ, atol=ATOL_LZ):
    """
    State at s = s0 of the model problem started from u0 at s = -s0.
    """
    if s0 <= 0:
        raise ConicValidationError("s0 has to be positive, got {}.".format(s0))
    return lz_flow(eta, r, -s0, s0, u0, omega=omega, rtol=rtol, atol=atol)


def asymptotic_state(s, eta, r, alpha, omega=E1):
    """
    Two channel asymptotic form e^{i Lambda} alpha1 V_omega_perp + e^{-i Lambda} alpha2 V_omega.
    :param alpha: Channel coefficients of shape (..., 2)
    :param eta: Frame coordinates of shape (..., 2)
    :return: States of shape (..., 2)
    """
    v_omega, v_perp = lz_basis(omega)
    alpha = np.asarray(alpha, dtype=complex)
    phase = np.exp(1j * lambda_phase(s, eta, r))[..., None]
    return phase * alpha[..., 0:1] * v_perp + np.conj(phase) * alpha[..., 1:2] * v_omega


def channel_coefficients(u, s, eta, r, omega=E1):
    """
    Inverse of asymptotic_state: (alpha1, alpha2) = (e^{-i Lambda} V_omega_perp.u, e^{i Lambda} V_omega.u).
    """
    v_omega, v_perp = lz_basis(omega)
    u = np.asarray(u, dtype=complex)
    phase = np.exp(1j * lambda_phase(s, eta, r))
    return np.stack([np.conj(phase) * (u @ v_perp), phase * (u @ v_omega)], axis=-1)


def _adiabatic(s, eta, r):
    # columns: lower, upper eigenvector of the rotated system matrix
    _, vectors = np.linalg.eigh(lz_matrix(s, eta, r))
    return vectors


@dataclass(frozen=True)
class LZTransition:
    """
    Outcome of the oracle for a packet entering on V_omega: population of the upper adiabatic state at s0, its
    largest deviation from a(r^-1/2 eta2)^2 over the terminal window and the phase of the channel that keeps the mode
    relative to c(r^-1/2 eta2), which vanishes up to the integration error.
    """
    eta2: float
    r: float
    s0: float
    probability: float
    predicted: float
    discrepancy: float
    relative_phase: Optional[float]


def lz_transition(eta2, r=1.0, s0=ORACLE_S0, eta1=0.0, window=0.1, samples=64, rtol=TOL_LZ, atol=ATOL_LZ) \
        -> LZTransition:
    """
    Run the oracle for one eta2 starting from the lower adiabatic state at -s0.
    :param window: Relative size of the terminal window [(1 - window) s0, s0]
    :param samples: Number of times sampled in the window
    :return: LZTransition
    """
    if not 0 < window < 1:
        raise ConicValidationError("The terminal window has to be a fraction in (0, 1), got {}.".format(window))
    if s0 <= 0:
        raise ConicValidationError("s0 has to be positive, got {}.".format(s0))
    eta = np.array([eta1, eta2], dtype=float)
    v_start = _adiabatic(-s0, eta, r)[:, 0].astype(complex)
    s_eval = np.linspace((1.0 - window) * s0, s0, samples)
    # omega = e1: rotated and original frames coincide
    states = lz_flow(eta, r, -s0, s0, v_start, s_eval=np.concatenate([[-s0], s_eval]), rtol=rtol, atol=atol)
    populations = np.array([abs(_adiabatic(s, eta, r)[:, 1] @ v) ** 2 for s, v in zip(s_eval, states[1:])])

    eta2_rescaled = eta2 / np.sqrt(r)
    predicted = float(coeff_a(eta2_rescaled) ** 2)
    c = complex(coeff_c(eta2_rescaled))
    relative_phase = None
    if abs(c) > 1e-8:
        alpha_in = channel_coefficients(states[0], -s0, eta, r)
        alpha_out = channel_coefficients(states[-1], s0, eta, r)
        relative_phase = float(np.angle(alpha_out[0] / (c * alpha_in[1])))
    result = LZTransition(eta2=float(eta2), r=float(r), s0=float(s0), probability=float(populations[-1]),
                          predicted=predicted, discrepancy=float(np.max(np.abs(populations - predicted))),
                          relative_phase=relative_phase)
    logger.debug("Landau-Zener oracle at eta2 = {}: P = {:.10f}, a^2 = {:.10f}".format(
        eta2, result.probability, predicted))
    return result
