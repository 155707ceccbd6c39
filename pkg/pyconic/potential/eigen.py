from dataclasses import dataclass
from enum import Enum

import numpy as np

from pyconic.exceptions import OnCrossingSet
from pyconic.potential.models import PotentialModel, a_matrix
from pyconic.variables import TOL_GAP


class Mode(Enum):
    plus = "plus"
    minus = "minus"
    reference = "reference"

    @property
    def sign(self) -> int:
        """
        Sign in front of |w| in lambda_mode: +1 for plus, -1 for minus and 0 for the reference (scalar v) mode.
        """
        return {"plus": 1, "minus": -1, "reference": 0}[self.value]


@dataclass(frozen=True)
class EigenData:
    """
    Eigenvalues lambda_- <= lambda_+ and eigenprojectors of V at a point off the crossing set.
    """
    lambda_minus: float
    lambda_plus: float
    pi_minus: np.ndarray
    pi_plus: np.ndarray
    gap: float


def projectors(w, tol_gap=TOL_GAP):
    """
    Eigenprojectors Pi_+/- = 1/2 (Id +/- A(w)/|w|), vectorised over the leading axes of w.
    Points with |w| below tol_gap get Pi_+ = Pi_- = Id/2.
    :param w: Array of shape (..., 2)
    :return: (pi_plus, pi_minus), each of shape (..., 2, 2)
    """
    w = np.asarray(w, dtype=float)
    norm = np.linalg.norm(w, axis=-1)
    safe = np.where(norm < tol_gap, 1.0, norm)
    unit = np.where((norm < tol_gap)[..., None], 0.0, w / safe[..., None])
    half = 0.5 * a_matrix(unit)
    eye = 0.5 * np.eye(2)
    return eye + half, eye - half


def eigen_at(model: PotentialModel, x, tol_gap=TOL_GAP) -> EigenData:
    """
    Eigen decomposition of V(x) at a single point.
    :param model: The potential model
    :param x: Position of shape (d,)
    :param tol_gap: Below this |w(x)| the point counts as a crossing point
    :return: EigenData
    """
    x = np.asarray(x, dtype=float)
    w = model.w(x)
    norm = float(np.linalg.norm(w))
    if norm < tol_gap:
        raise OnCrossingSet("|w(x)| = {:.3e} at x = {}: the eigenprojectors are undefined.".format(norm, x))
    v = float(model.v(x))
    pi_plus, pi_minus = projectors(w, tol_gap)
    return EigenData(lambda_minus=v - norm, lambda_plus=v + norm, pi_minus=pi_minus, pi_plus=pi_plus, gap=2.0 * norm)


def mode_sign(mode) -> int:
    return Mode(mode).sign


def eigenvalue(model: PotentialModel, mode, x):
    x = np.asarray(x, dtype=float)
    return model.v(x) + mode_sign(mode) * np.linalg.norm(model.w(x), axis=-1)


def grad_eigenvalue(model: PotentialModel, mode, x, direction=None):
    """
    Gradient of lambda_mode = v + s|w| at x. On the crossing set the gradient of |w| is replaced by dw^T direction,
    the one sided limit along a trajectory reaching the crossing.
    """
    x = np.asarray(x, dtype=float)
    s = mode_sign(mode)
    grad = model.grad_v(x)
    if s == 0:
        return grad
    w = model.w(x)
    norm = np.linalg.norm(w)
    if norm < TOL_GAP:
        if direction is None:
            raise OnCrossingSet("The gradient of |w| is undefined on the crossing set.")
        unit = np.asarray(direction, dtype=float)
    else:
        unit = w / norm
    return grad + s * model.dw(x).T @ unit


def hess_norm_w(model: PotentialModel, x):
    """
    Hessian of |w| at x,
        d2_ij w.w/|w| + d_i w.d_j w/|w| - (d_i w.w)(d_j w.w)/|w|^3.
    """
    x = np.asarray(x, dtype=float)
    w = model.w(x)
    norm = np.linalg.norm(w)
    if norm < TOL_GAP:
        raise OnCrossingSet("The Hessian of |w| is undefined on the crossing set.")
    dw = model.dw(x)
    dww = dw.T @ w
    return (np.einsum("k,kij->ij", w, model.hess_w()) / norm + dw.T @ dw / norm
            - np.outer(dww, dww) / norm ** 3)


def hess_eigenvalue(model: PotentialModel, mode, x):
    s = mode_sign(mode)
    hess = np.array(model.hess_v(), dtype=float)
    if s == 0:
        return hess
    return hess + s * hess_norm_w(model, x)
