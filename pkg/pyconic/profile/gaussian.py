from typing import Tuple

import numpy as np
from scipy.integrate import solve_ivp

from pyconic import logger
from pyconic.exceptions import ConicValidationError, StiffnessFailure
from pyconic.profile.grid import ProfileGrid, gaussian_amplitude, gaussian_profile
from pyconic.profile.hessian import HessianPath


def gaussian_oracle(path: HessianPath, a0, c0, t0, t1, rtol=1e-12, atol=1e-14) -> Tuple[np.ndarray, complex]:
    """
    Exact evolution of the centred Gaussian c exp((i/2) A y.y) under the quadratic profile equation through the
    linearised flow Q' = P, P' = -Hess(t) Q with A = P Q^-1 and (log c)' = -1/2 tr(P Q^-1).
    :param path: Hessian path, smooth on [t0, t1]
    :param a0: Initial width matrix (complex symmetric, Im A0 > 0)
    :param c0: Initial amplitude
    :return: (A(t1), c(t1))
    """
    d = path.d
    a0 = np.atleast_2d(np.asarray(a0, dtype=complex))
    if a0.shape != (d, d):
        raise ConicValidationError("Width matrix has shape {}, expected {}.".format(a0.shape, (d, d)))
    geom = path.geom
    if geom is not None and min(t0, t1) <= geom.t_flat <= max(t0, t1):
        raise ConicValidationError("The Gaussian oracle is only valid away from t_flat = {}.".format(geom.t_flat))
    if t0 == t1:
        return a0, complex(c0)

    def rhs(t, y):
        q = y[:d * d].reshape(d, d)
        p = y[d * d:2 * d * d].reshape(d, d)
        dp = -path(t) @ q
        dlog = -0.5 * np.trace(np.linalg.solve(q, p))
        return np.concatenate([p.ravel(), dp.ravel(), [dlog]])

    y0 = np.concatenate([np.eye(d, dtype=complex).ravel(), a0.ravel(), [np.log(complex(c0))]])
    sol = solve_ivp(rhs, (t0, t1), y0, method="DOP853", rtol=rtol, atol=atol)
    if sol.status == -1:
        raise StiffnessFailure("Gaussian oracle failed on [{}, {}]: {}".format(t0, t1, sol.message))
    y = sol.y[:, -1]
    q = y[:d * d].reshape(d, d)
    p = y[d * d:2 * d * d].reshape(d, d)
    a = np.linalg.solve(q.T, p.T).T
    logger.debug("Gaussian oracle on [{:.6g}, {:.6g}] in {} steps".format(t0, t1, len(sol.t) - 1))
    return 0.5 * (a + a.T), complex(np.exp(y[-1]))


def gaussian_grid(template: ProfileGrid, a_matrix, amplitude=None, time=None) -> ProfileGrid:
    """
    Sample c exp((i/2) A y.y) on the nodes of a template grid. The amplitude defaults to the L2 normalisation.
    """
    a = np.atleast_2d(np.asarray(a_matrix, dtype=complex))
    if amplitude is None:
        amplitude = gaussian_amplitude(a.imag)
    return gaussian_profile(template.d, a_matrix=a, extent=template.extent, points=template.points,
                            time=template.time if time is None else time, mode=template.mode, amplitude=amplitude)
