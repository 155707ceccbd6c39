from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from pyconic import logger
from pyconic.ansatz.grid import PhysicalGrid
from pyconic.classical.action import ActionCurve
from pyconic.classical.trajectory import Trajectory
from pyconic.exceptions import AtCrossingTime, ConicValidationError, OutOfBox
from pyconic.potential.eigen import Mode
from pyconic.profile.grid import ProfileGrid
from pyconic.reference.field import Field2
from pyconic.transport.frames import EigenframePath

TOL_PACKET_MASS = 1e-6


def wave_packet(grid: PhysicalGrid, z, profile: ProfileGrid, tol_mass=TOL_PACKET_MASS):
    """
    Sample eps^{-d/4} e^{(i/eps) p.(x - q)} phi((x - q) / sqrt(eps)) on the physical grid.
    :param grid: Physical grid carrying eps
    :param z: Phase point (q, p) of the centre
    :param profile: The profile phi
    :param tol_mass: Largest relative mass defect before the packet counts as leaving the box
    :return: Complex array of shape grid.shape
    :raises OutOfBox: If the centre is outside the box or the packet loses mass at its edges
    """
    z = np.asarray(z, dtype=float)
    d = grid.d
    if z.shape != (2 * d,) or profile.d != d:
        raise ConicValidationError("Phase point {} and profile of dimension {} on a grid of dimension {}.".format(
            z, profile.d, d))
    q, p = z[:d], z[d:]
    if not grid.contains(q):
        raise OutOfBox("Packet centre {} is outside of {}.".format(q, grid))
    scale = np.sqrt(grid.epsilon)
    envelope = profile.sample([(grid.axis - q[i]) / scale for i in range(d)])
    phase = np.exp(1j / grid.epsilon * ((grid.coordinates - q) @ p))
    packet = grid.epsilon ** (-d / 4.0) * phase * envelope
    reference = profile.mass()
    if reference > 0:
        defect = abs(grid.cell * np.sum(np.abs(packet) ** 2) - reference) / reference
        if defect > tol_mass:
            raise OutOfBox("Wave packet at q = {} keeps its mass only up to {:.2e} on {}; the packet leaves the box "
                           "or the grid is too coarse.".format(q, defect, grid))
    return packet


@dataclass
class ModeAnsatz:
    """
    One mode of the approximate solution: Y(t) e^{i S(t) / eps} WP_{z(t)} u(t) on the snapshot times.
    """
    mode: Mode
    trajectory: Trajectory
    action: ActionCurve
    frame: EigenframePath
    epsilon: float
    profiles: Dict[float, ProfileGrid] = field(default_factory=dict)

    @property
    def times(self):
        return sorted(self.profiles)

    def profile_at(self, t) -> ProfileGrid:
        try:
            return self.profiles[float(t)]
        except KeyError:
            raise ConicValidationError("No {} profile at t = {}, known times {}.".format(
                self.mode.value, t, self.times))

    def phase_at(self, t):
        return np.exp(1j * self.action.at(t) / self.epsilon)

    def masses(self):
        return {t: u.mass() for t, u in sorted(self.profiles.items())}


def assemble_single_mode(ansatz: ModeAnsatz, t, grid: PhysicalGrid) -> Field2:
    """
    Field Y(t) e^{i S(t) / eps} WP_{z(t)} u(t) of one mode at a snapshot time.
    """
    t = float(t)
    crossing = ansatz.trajectory.crossing
    if crossing is not None and t == crossing.t_flat:
        raise AtCrossingTime("The ansatz is not assembled at the crossing time {}.".format(t))
    if grid.epsilon != ansatz.epsilon:
        raise ConicValidationError("Ansatz built for eps = {} assembled on {}.".format(ansatz.epsilon, grid))
    profile = ansatz.profile_at(t)
    scalar = ansatz.phase_at(t) * wave_packet(grid, ansatz.trajectory.at(t), profile)
    out = Field2.from_scalar(grid, scalar, ansatz.frame.at(t), time=t)
    logger.debug("Assembled {} mode at t = {:.6g} (mass {:.10f})".format(ansatz.mode.value, t, out.mass()))
    return out


def assemble_modes(modes: Dict[Mode, ModeAnsatz], t, grid: PhysicalGrid) -> Optional[Field2]:
    """
    Sum of the modes carrying a profile at t, None if there is none.
    """
    total = None
    for ansatz in modes.values():
        if float(t) not in ansatz.profiles:
            continue
        part = assemble_single_mode(ansatz, t, grid)
        total = part if total is None else total + part
    return total
