from typing import Optional, Tuple

import numpy as np
from scipy.fft import fftn

from pyconic.exceptions import ConicValidationError
from pyconic.landau_zener.coefficients import coeff_a
from pyconic.potential.crossing import CrossingGeometry, eta_of
from pyconic.potential.eigen import Mode, projectors
from pyconic.potential.models import PotentialModel
from pyconic.profile.grid import ProfileGrid
from pyconic.reference.field import Field2
from pyconic.reference.solver import apply_pointwise
from pyconic.utils.spectral import sigma_norm as grid_sigma_norm

MAX_SIGMA_ORDER = 2


def sigma_norm(field: Field2, k: int, epsilon: Optional[float] = None) -> float:
    """
    eps-scaled norm sup_{|alpha| + |beta| <= k} ||x^alpha (eps d_x)^beta psi|| of a two component field.
    """
    if not 0 <= k <= MAX_SIGMA_ORDER:
        raise ConicValidationError("Sigma norms are certified on the grid up to order {}, got {}.".format(
            MAX_SIGMA_ORDER, k))
    epsilon = field.grid.epsilon if epsilon is None else epsilon
    return grid_sigma_norm(field.values, field.grid.extent, k, epsilon=epsilon, components=True)


def wigner_masses(u_in_plus: Optional[ProfileGrid], u_in_minus: Optional[ProfileGrid], geom: CrossingGeometry) \
        -> Tuple[float, float]:
    """
    Masses of the two modes after the crossing:
        c_plus = ||a u_in_minus||^2 + ||sqrt(1 - a^2) u_in_plus||^2
        c_minus = ||a u_in_plus||^2 + ||sqrt(1 - a^2) u_in_minus||^2
    with a = a(r^-1/2 eta2(y)). A missing profile counts as zero.
    """
    present = [u for u in (u_in_plus, u_in_minus) if u is not None]
    if not present:
        return 0.0, 0.0
    template = present[0]
    if len(present) == 2 and not u_in_plus.compatible(u_in_minus):
        raise ConicValidationError("Ingoing profiles {} and {} don't share their nodes.".format(u_in_plus, u_in_minus))
    a2 = coeff_a(eta_of(geom, template.coordinates())[..., 1] / np.sqrt(geom.r)) ** 2

    def density(u):
        return np.zeros(template.values.shape) if u is None else np.abs(u.values) ** 2

    plus, minus = density(u_in_plus), density(u_in_minus)
    c_plus = template.cell * np.sum(a2 * minus + (1.0 - a2) * plus)
    c_minus = template.cell * np.sum(a2 * plus + (1.0 - a2) * minus)
    return float(c_plus), float(c_minus)


def packet_moments(field: Field2, epsilon: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Position and momentum centres <x> and <-i eps grad> of a field.
    :return: (position, momentum), each of shape (d,)
    """
    grid = field.grid
    epsilon = grid.epsilon if epsilon is None else epsilon
    mass = field.mass()
    if mass == 0.0:
        raise ConicValidationError("The centre of a vanishing field is undefined.")
    density = field.density()
    coords = grid.coordinates
    position = grid.cell * np.einsum("...,...i->i", density, coords) / mass
    axes = tuple(range(1, grid.d + 1))
    spectral = np.sum(np.abs(fftn(field.values, axes=axes)) ** 2, axis=0)
    kk = np.stack(np.meshgrid(*([grid.wavenumbers] * grid.d), indexing="ij"), axis=-1)
    momentum = epsilon * np.einsum("...,...i->i", spectral, kk) / np.sum(spectral)
    return position, momentum


def mode_projection_residual(model: PotentialModel, field: Field2, mode=Mode.minus) -> float:
    """
    ||Pi_mode(x) psi - psi|| / ||psi||.
    """
    pi_plus, pi_minus = projectors(model.w(field.grid.coordinates))
    projector = pi_plus if Mode(mode) is Mode.plus else pi_minus
    projected = field.replace(values=apply_pointwise(projector, field.values))
    norm = field.norm()
    if norm == 0.0:
        return 0.0
    return projected.distance(field) / norm
