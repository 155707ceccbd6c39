"""
Gamma function of a complex argument through the Lanczos approximation with g = 7 and nine coefficients.
"""
import numpy as np

from pyconic.exceptions import PoleOfGamma

LANCZOS_G = 7
LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_HALF_LOG_TWO_PI = 0.5 * np.log(2.0 * np.pi)


def _check_poles(z):
    rounded = np.round(z.real)
    poles = (z.imag == 0.0) & (z.real <= 0.0) & (z.real == rounded)
    if np.any(poles):
        raise PoleOfGamma("The gamma function has poles at the non positive integers, got {}.".format(
            z[poles].real.tolist()))


def _log_gamma_right(z):
    # Re z >= 1/2
    zz = z - 1.0
    series = np.full(zz.shape, LANCZOS_COEFFICIENTS[0], dtype=complex)
    for k, coefficient in enumerate(LANCZOS_COEFFICIENTS[1:], start=1):
        series += coefficient / (zz + k)
    t = zz + LANCZOS_G + 0.5
    return _HALF_LOG_TWO_PI + (zz + 0.5) * np.log(t) - t + np.log(series)


def log_gamma(z):
    """
    A logarithm of Gamma(z) (not necessarily on the principal branch), exp(log_gamma(z)) = Gamma(z).
    :param z: Complex scalar or array
    :return: Complex scalar or array
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    _check_poles(z)
    out = np.empty(z.shape, dtype=complex)
    right = z.real >= 0.5
    out[right] = _log_gamma_right(z[right])
    left = ~right
    if np.any(left):
        # reflection Gamma(z) Gamma(1 - z) = pi / sin(pi z)
        zl = z[left]
        out[left] = np.log(np.pi) - np.log(np.sin(np.pi * zl)) - _log_gamma_right(1.0 - zl)
    return complex(out[0]) if scalar else out


def complex_gamma(z):
    """
    Gamma(z) for complex z off the non positive integers.
    :param z: Complex scalar or array
    :return: Complex scalar or array
    :raises PoleOfGamma: If some z is a non positive integer
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    _check_poles(z)
    out = np.empty(z.shape, dtype=complex)
    right = z.real >= 0.5
    out[right] = np.exp(_log_gamma_right(z[right]))
    left = ~right
    if np.any(left):
        zl = z[left]
        out[left] = np.pi / (np.sin(np.pi * zl) * np.exp(_log_gamma_right(1.0 - zl)))
    return complex(out[0]) if scalar else out
