from typing import Callable, Dict, Optional, Sequence

import numpy as np

from pyconic import logger
from pyconic.exceptions import ConicValidationError
from pyconic.variables import LINEAR_ISOTROPIC, POLYNOMIAL, TILTED


def a_matrix(w):
    """
    Trace free symmetric matrix A(w) = ((w1, w2), (w2, -w1)).
    :param w: Array of shape (..., 2)
    :return: Array of shape (..., 2, 2)
    """
    w = np.asarray(w, dtype=float)
    out = np.empty(w.shape[:-1] + (2, 2))
    out[..., 0, 0] = w[..., 0]
    out[..., 0, 1] = w[..., 1]
    out[..., 1, 0] = w[..., 1]
    out[..., 1, 1] = -w[..., 0]
    return out


class PotentialModel:
    """
    Matrix potential V(x) = v(x) Id + A(w(x)) on R^d where v and both components of w are polynomials of degree at
    most two. Derivatives are exact, the third derivatives vanish and the subquadratic growth condition holds by
    construction.

        v(x) = v_const + v_grad.x + 1/2 x.v_hess x
        w_i(x) = w_const_i + w_jac_i.x + 1/2 x.w_hess_i x
    """

    def __init__(self, dimension: int, v_const: float = 0.0, v_grad=None, v_hess=None, w_const=None, w_jac=None,
                 w_hess=None, label: str = POLYNOMIAL):
        if int(dimension) != dimension or dimension < 2:
            raise ConicValidationError(
                "A codimension two crossing needs a spatial dimension of at least 2, got {}.".format(dimension))
        d = int(dimension)
        self._d = d
        self._label = label
        self._v_const = float(v_const)
        self._v_grad = self._coefficients(v_grad, (d,), "v_grad")
        self._v_hess = self._symmetric(self._coefficients(v_hess, (d, d), "v_hess"))
        self._w_const = self._coefficients(w_const, (2,), "w_const")
        self._w_jac = self._coefficients(w_jac, (2, d), "w_jac")
        self._w_hess = self._symmetric(self._coefficients(w_hess, (2, d, d), "w_hess"))
        for arr in (self._v_grad, self._v_hess, self._w_const, self._w_jac, self._w_hess):
            arr.setflags(write=False)

    @staticmethod
    def _coefficients(value, shape, name):
        if value is None:
            return np.zeros(shape)
        arr = np.array(value, dtype=float)
        if arr.shape != shape:
            raise ConicValidationError("Coefficient {} has shape {}, expected {}.".format(name, arr.shape, shape))
        if not np.all(np.isfinite(arr)):
            raise ConicValidationError("Coefficient {} is not finite.".format(name))
        return arr

    @staticmethod
    def _symmetric(arr):
        # only the symmetric part of a quadratic form contributes
        return 0.5 * (arr + np.swapaxes(arr, -1, -2))

    @property
    def d(self):
        return self._d

    @property
    def label(self):
        return self._label

    def v(self, x):
        x = np.asarray(x, dtype=float)
        return self._v_const + x @ self._v_grad + 0.5 * np.einsum("...i,ij,...j->...", x, self._v_hess, x)

    def grad_v(self, x):
        x = np.asarray(x, dtype=float)
        return self._v_grad + x @ self._v_hess

    def hess_v(self):
        return self._v_hess

    def w(self, x):
        x = np.asarray(x, dtype=float)
        return (self._w_const + x @ self._w_jac.T
                + 0.5 * np.einsum("...i,kij,...j->...k", x, self._w_hess, x))

    def dw(self, x):
        """
        Jacobian of w, (dw)_ij = d_j w_i.
        :param x: Array of shape (..., d)
        :return: Array of shape (..., 2, d)
        """
        x = np.asarray(x, dtype=float)
        return self._w_jac + np.einsum("kij,...j->...ki", self._w_hess, x)

    def hess_w(self):
        return self._w_hess

    @property
    def w_is_constant(self):
        return not (np.any(self._w_jac) or np.any(self._w_hess))

    def gap(self, x):
        return 2.0 * np.linalg.norm(self.w(x), axis=-1)

    def matrix(self, x):
        x = np.asarray(x, dtype=float)
        v = self.v(x)
        return v[..., None, None] * np.eye(2) + a_matrix(self.w(x))

    def coefficients(self) -> Dict[str, object]:
        return {
            "label": self._label,
            "dimension": self._d,
            "v_const": self._v_const,
            "v_grad": self._v_grad.tolist(),
            "v_hess": self._v_hess.tolist(),
            "w_const": self._w_const.tolist(),
            "w_jac": self._w_jac.tolist(),
            "w_hess": self._w_hess.tolist(),
        }

    def __repr__(self):
        return "PotentialModel(label={}, d={})".format(self._label, self._d)


def linear_isotropic(dimension: int = 2) -> PotentialModel:
    """
    Minimal conical model: v = 0, w(x) = (x1, x2). Further coordinates are inert.
    """
    jac = np.zeros((2, dimension))
    jac[0, 0] = 1.0
    jac[1, 1] = 1.0
    return PotentialModel(dimension, w_jac=jac, label=LINEAR_ISOTROPIC)


def tilted(kappa: Sequence[float], gradient_matrix, offset: Optional[Sequence[float]] = None) -> PotentialModel:
    """
    Tilted cone: v(x) = kappa.x, w(x) = G x + c.
    """
    kappa = np.asarray(kappa, dtype=float)
    return PotentialModel(kappa.shape[0], v_grad=kappa, w_const=offset, w_jac=gradient_matrix, label=TILTED)


def polynomial(dimension: int, **coefficients) -> PotentialModel:
    return PotentialModel(dimension, label=POLYNOMIAL, **coefficients)


model_catalogue: Dict[str, Callable[..., PotentialModel]] = {
    LINEAR_ISOTROPIC: linear_isotropic,
    TILTED: tilted,
    POLYNOMIAL: polynomial,
}


def build_model(name: str, **parameters) -> PotentialModel:
    """
    Build a model of the catalogue from its name and parameters.
    :param name: One of the catalogue names
    :param parameters: Keyword parameters of the catalogue entry
    :return:
    """
    if name not in model_catalogue:
        raise ConicValidationError(
            "Unknown model {}. Known models are {}.".format(name, ", ".join(sorted(model_catalogue))))
    try:
        model = model_catalogue[name](**parameters)
    except TypeError as e:
        raise ConicValidationError("Invalid parameters for model {}: {}".format(name, e))
    logger.debug("Built potential model {}".format(model))
    return model


def eval_potential(model: PotentialModel, x):
    """
    Evaluate V(x) = v(x) Id + A(w(x)).
    :param model: The potential model
    :param x: Position(s), shape (..., d)
    :return: Symmetric 2x2 matrix (or stack thereof)
    """
    return model.matrix(x)
