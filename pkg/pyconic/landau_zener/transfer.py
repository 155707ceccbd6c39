from typing import Tuple

import numpy as np

from pyconic import logger
from pyconic.exceptions import ConicValidationError
from pyconic.landau_zener.coefficients import TransferSpec, coeff_a, coeff_c
from pyconic.profile.grid import ProfileGrid
from pyconic.variables import MINUS, PLUS


def _symbol(spec: TransferSpec, grid: ProfileGrid):
    if grid.d != spec.geom.d:
        raise ConicValidationError("Profile of dimension {} on a crossing of dimension {}.".format(grid.d, spec.geom.d))
    eta = spec.eta(grid.coordinates())
    eta2 = eta[..., 1] / np.sqrt(spec.r)
    return coeff_a(eta2), coeff_c(eta2), spec.theta(eta)


def transfer_single(spec: TransferSpec, u_in_minus: ProfileGrid) -> Tuple[ProfileGrid, ProfileGrid]:
    """
    Outgoing profiles of a single ingoing minus packet:
        u_out_plus = a e^{i S_flat_minus / eps} u_in_minus
        u_out_minus = e^{i theta} c e^{i S_flat_minus / eps} u_in_minus
    with a and c = e^{-i pi / 4} conj(b) evaluated at r^-1/2 eta2(y).
    :param spec: Transfer data of the crossing
    :param u_in_minus: Ingoing minus profile at t_flat
    :return: (u_out_plus, u_out_minus)
    """
    a, c, theta = _symbol(spec, u_in_minus)
    incoming = spec.phase_minus() * u_in_minus.values
    out_plus = u_in_minus.replace(values=a * incoming, mode=PLUS)
    out_minus = u_in_minus.replace(values=np.exp(1j * theta) * c * incoming, mode=MINUS)
    logger.debug("Transfer of one minus packet: plus mass {:.6g}, minus mass {:.6g}".format(
        out_plus.mass(), out_minus.mass()))
    return out_plus, out_minus


def transfer_pair(spec: TransferSpec, u_in_plus: ProfileGrid, u_in_minus: ProfileGrid) \
        -> Tuple[ProfileGrid, ProfileGrid]:
    """
    Outgoing profiles of two ingoing packets meeting at the same crossing point. The pointwise unitary symbol
    ((-e^{-i theta} conj(c), a), (a, e^{i theta} c)) acts on (e^{i S_flat_plus / eps} u_in_plus,
    e^{i S_flat_minus / eps} u_in_minus). Without a plus packet it reduces to transfer_single. The sign of u_in_plus
    has to be aligned with the outgoing frames already.
    """
    if not u_in_plus.compatible(u_in_minus):
        raise ConicValidationError("Ingoing profiles {} and {} don't share their nodes.".format(u_in_plus, u_in_minus))
    a, c, theta = _symbol(spec, u_in_plus)
    x_plus = spec.phase_plus() * u_in_plus.values
    x_minus = spec.phase_minus() * u_in_minus.values
    rotation = np.exp(1j * theta)
    out_plus = -np.conj(rotation * c) * x_plus + a * x_minus
    out_minus = a * x_plus + rotation * c * x_minus
    return u_in_plus.replace(values=out_plus, mode=PLUS), u_in_minus.replace(values=out_minus, mode=MINUS)
