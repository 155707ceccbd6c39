from dataclasses import dataclass

import numpy as np

from pyconic.exceptions import ConicValidationError
from pyconic.landau_zener.special import log_gamma
from pyconic.potential.crossing import CrossingGeometry, eta_of
from pyconic.variables import B_SERIES_BELOW, BETA, DELTA_EXPONENT


def _out(value, scalar):
    return value.item() if scalar else value


def coeff_a(eta2):
    """
    a(eta2) = exp(-pi eta2^2 / 2).
    """
    scalar = np.ndim(eta2) == 0
    eta2 = np.asarray(eta2, dtype=float)
    return _out(np.exp(-0.5 * np.pi * eta2 ** 2), scalar)


def coeff_b(eta2):
    """
    b(eta2) = 2i / (sqrt(pi) eta2) 2^(-i eta2^2 / 2) exp(-pi eta2^2 / 4) Gamma(1 + i eta2^2 / 2) sinh(pi eta2^2 / 2),
    continued by b(0) = 0. The product is evaluated in logarithmic form so that large arguments don't overflow.
    """
    scalar = np.ndim(eta2) == 0
    eta2 = np.atleast_1d(np.asarray(eta2, dtype=float))
    out = np.zeros(eta2.shape, dtype=complex)
    x = 0.5 * eta2 ** 2
    small = np.abs(eta2) < B_SERIES_BELOW
    if np.any(small):
        xs = x[small]
        out[small] = 1j * np.sqrt(np.pi) * eta2[small] * (
                1.0 - xs * (0.5 * np.pi + 1j * (np.log(2.0) + np.euler_gamma)))
    large = ~small
    if np.any(large):
        xl, el = x[large], eta2[large]
        # log sinh(pi x) = pi x + log((1 - exp(-2 pi x)) / 2)
        log_b = (np.log(2.0 / np.sqrt(np.pi)) - np.log(np.abs(el)) - 1j * xl * np.log(2.0) - 0.5 * np.pi * xl
                 + log_gamma(1.0 + 1j * xl) + np.pi * xl + np.log1p(-np.exp(-2.0 * np.pi * xl)) - np.log(2.0))
        out[large] = 1j * np.sign(el) * np.exp(log_b)
    return out[0] if scalar else out


# phase of the mode keeping amplitude against -conj(b) in the frame of lambda_phase
KEEP_PHASE = 0.75 * np.pi


def coeff_c(eta2):
    """
    Amplitude with which a packet stays on its mode through the crossing, c(eta2) = -e^{3i pi / 4} conj(b(eta2))
    = e^{-i pi / 4} conj(b(eta2)). This is the outgoing coefficient of the channel on V_omega_perp per unit ingoing
    coefficient on V_omega when both are read with the phases e^{+-i Lambda} of asymptotic_state. |c| = |b|.
    """
    return -np.exp(1j * KEEP_PHASE) * np.conj(coeff_b(eta2))


@dataclass(frozen=True)
class ScatterCoeffs:
    """
    Transition coefficients at eta2 with a^2 + |b|^2 = 1.
    """
    a: float
    b: complex
    eta2: float

    @property
    def unitarity_defect(self):
        return abs(self.a ** 2 + abs(self.b) ** 2 - 1.0)


def scatter_coeffs(eta2) -> ScatterCoeffs:
    eta2 = float(eta2)
    return ScatterCoeffs(a=coeff_a(eta2), b=complex(coeff_b(eta2)), eta2=eta2)


def scattering_matrix(eta2):
    """
    S(eta2) = ((a, -conj(b)), (b, a)).
    :param eta2: Scalar or array of (already rescaled) arguments
    :return: Complex array of shape (..., 2, 2)
    """
    a = np.asarray(coeff_a(eta2), dtype=complex)
    b = np.asarray(coeff_b(eta2), dtype=complex)
    out = np.empty(a.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = -np.conj(b)
    out[..., 1, 0] = b
    out[..., 1, 1] = a
    return out


def rotate_frame(theta):
    """
    R(theta) = ((cos theta/2, -sin theta/2), (sin theta/2, cos theta/2)), so that R(theta)^T A(w) R(theta) has the
    diagonal e_theta.w and the off diagonal e_theta ^ w with e_theta = (cos theta, sin theta).
    """
    c, s = np.cos(0.5 * theta), np.sin(0.5 * theta)
    return np.array([[c, -s], [s, c]])


def frame_angle(omega):
    omega = np.asarray(omega, dtype=float)
    norm = np.linalg.norm(omega)
    if abs(norm - 1.0) > 1e-10:
        raise ConicValidationError("omega has to be a unit vector, got |omega| = {}.".format(norm))
    return float(np.arctan2(omega[1], omega[0]))


def lz_basis(omega):
    """
    Direct orthonormal basis (V_omega, V_omega_perp) of C^2 with A(omega) V_omega = V_omega and
    A(omega) V_omega_perp = -V_omega_perp: the columns of R(theta) for e_theta = omega.
    """
    rotation = rotate_frame(frame_angle(omega))
    return rotation[:, 0].copy(), rotation[:, 1].copy()


def lambda_phase(s, eta, r):
    """
    Lambda(s, eta) = |eta1 + r s|^2 / 2r + |eta2|^2 / 2r ln(sqrt(r) |s|) for eta = (omega.eta, omega_perp.eta).
    :param s: Rescaled time, non zero
    :param eta: Array of shape (..., 2) in the (omega, omega_perp) frame
    :param r: Crossing speed |dw p|
    :return: Real scalar or array of shape (...)
    """
    if np.any(np.asarray(s) == 0):
        raise ConicValidationError("The Landau-Zener phase is singular at s = 0.")
    if r <= 0:
        raise ConicValidationError("The crossing speed r has to be positive, got {}.".format(r))
    eta = np.asarray(eta, dtype=float)
    return ((eta[..., 0] + r * s) ** 2 + eta[..., 1] ** 2 * np.log(np.sqrt(r) * np.abs(s))) / (2.0 * r)


@dataclass(frozen=True)
class TransferSpec:
    """
    Data of the transfer through a crossing: geometry, semiclassical parameter and the actions at t_flat.
    """
    geom: CrossingGeometry
    epsilon: float
    s_flat_minus: float = 0.0
    s_flat_plus: float = 0.0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ConicValidationError("epsilon has to be positive, got {}.".format(self.epsilon))

    @property
    def r(self):
        return self.geom.r

    def eta(self, y):
        return eta_of(self.geom, y)

    def eta2_rescaled(self, y):
        """
        r^-1/2 omega_perp.(dw y), the argument of the transition coefficients.
        """
        return self.eta(y)[..., 1] / np.sqrt(self.r)

    def theta(self, eta):
        return theta_value(eta, self.r, self.epsilon)

    def phase_minus(self):
        return np.exp(1j * self.s_flat_minus / self.epsilon)

    def phase_plus(self):
        return np.exp(1j * self.s_flat_plus / self.epsilon)


def theta_value(eta, r, epsilon):
    if r <= 0 or epsilon <= 0:
        raise ConicValidationError("r and epsilon have to be positive, got {} and {}.".format(r, epsilon))
    eta = np.asarray(eta, dtype=float)
    return eta[..., 1] ** 2 / (2.0 * r) * np.log(r / epsilon) + eta[..., 0] ** 2 / r


def theta_eps(spec: TransferSpec, eta):
    """
    theta_eps(eta) = eta2^2 / 2r ln(r / eps) + eta1^2 / r.
    """
    return spec.theta(eta)


def outgoing_phase(spec: TransferSpec, eta):
    """
    Phase exponent of each outgoing channel, eta2^2 / 4r ln(r / eps) + eta1^2 / 2r = theta_eps / 2.
    """
    return 0.5 * spec.theta(eta)


@dataclass(frozen=True)
class LayerParameters:
    """
    Size of the crossing layer: |t - t_flat| <= delta, rescaled time s0 = delta / sqrt(eps) and cut-off radius R.
    """
    epsilon: float
    delta: float
    s0: float
    radius: float

    def as_dict(self):
        return {"epsilon": self.epsilon, "delta": self.delta, "s0": self.s0, "R": self.radius}


def layer_parameters(epsilon, delta_exponent=DELTA_EXPONENT, beta=BETA) -> LayerParameters:
    if not 0 < epsilon < 1:
        raise ConicValidationError("The layer parameters need 0 < epsilon < 1, got {}.".format(epsilon))
    delta = epsilon ** delta_exponent
    return LayerParameters(epsilon=float(epsilon), delta=float(delta), s0=float(delta / np.sqrt(epsilon)),
                           radius=float(epsilon ** -beta))
