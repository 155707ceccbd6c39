import math
from functools import cached_property

import numpy as np

from pyconic import logger
from pyconic.exceptions import ConicValidationError
from pyconic.utils.spectral import check_box, coordinates, periodic_axis, squared_wavenumbers, wavenumbers
from pyconic.variables import PHYSICAL_EXTENT, PHYSICAL_POINTS


def required_spacing(epsilon, p_max=0.0):
    """
    Largest spacing resolving both the sqrt(eps) envelope and the oscillation e^{i p.x / eps} of a packet.
    """
    bound = math.sqrt(epsilon) / 8.0
    if p_max > 0:
        bound = min(bound, epsilon / (4.0 * p_max))
    return bound


def required_points(extent, epsilon, p_max=0.0):
    """
    Smallest power of two N with 2 extent / N <= required_spacing.
    """
    needed = 2.0 * extent / required_spacing(epsilon, p_max)
    return max(2, 2 ** int(math.ceil(math.log2(needed))))


class PhysicalGrid:
    """
    Periodic box [-L, L)^d with N points per axis carrying fields of semiclassical parameter epsilon.
    """

    def __init__(self, dimension: int, epsilon: float, extent: float = PHYSICAL_EXTENT, points: int = PHYSICAL_POINTS):
        check_box(dimension, extent, points)
        if not epsilon > 0:
            raise ConicValidationError("epsilon has to be positive, got {}.".format(epsilon))
        self._d = int(dimension)
        self._epsilon = float(epsilon)
        self._extent = float(extent)
        self._points = int(points)

    @classmethod
    def resolving(cls, dimension, epsilon, extent=PHYSICAL_EXTENT, p_max=0.0):
        return cls(dimension, epsilon, extent=extent, points=required_points(extent, epsilon, p_max))

    @property
    def d(self):
        return self._d

    @property
    def epsilon(self):
        return self._epsilon

    @property
    def extent(self):
        return self._extent

    @property
    def points(self):
        return self._points

    @property
    def shape(self):
        return (self._points,) * self._d

    @property
    def spacing(self):
        return 2.0 * self._extent / self._points

    @property
    def cell(self):
        return self.spacing ** self._d

    @property
    def axis(self):
        return periodic_axis(self._extent, self._points)

    @property
    def wavenumbers(self):
        return wavenumbers(self._extent, self._points)

    @cached_property
    def coordinates(self):
        """
        Node positions, array of shape (N,) * d + (d,).
        """
        coords = coordinates(self._d, self._extent, self._points)
        coords.setflags(write=False)
        return coords

    @cached_property
    def squared_wavenumbers(self):
        return squared_wavenumbers(self._d, self._extent, self._points)

    def resolves(self, p_max=0.0):
        return self.spacing <= required_spacing(self._epsilon, p_max) * (1.0 + 1e-12)

    def check_resolution(self, p_max=0.0):
        """
        Warn if the spacing doesn't resolve a packet of momentum up to p_max.
        :return: True if resolved
        """
        if self.resolves(p_max):
            return True
        logger.warning("Grid spacing {:.3e} exceeds {:.3e} needed for eps = {} and |p| <= {}; use at least {} "
                       "points per axis.".format(self.spacing, required_spacing(self._epsilon, p_max),
                                                 self._epsilon, p_max,
                                                 required_points(self._extent, self._epsilon, p_max)))
        return False

    def contains(self, q, margin=0.0):
        q = np.asarray(q, dtype=float)
        return bool(np.all(q - margin >= -self._extent) and np.all(q + margin < self._extent))

    def same_as(self, other: "PhysicalGrid"):
        return (self._d, self._epsilon, self._extent, self._points) == (
            other.d, other.epsilon, other.extent, other.points)

    def sidecar(self):
        return {"dims": self._d, "L": self._extent, "N": self._points, "epsilon": self._epsilon}

    def __repr__(self):
        return "PhysicalGrid(d={}, N={}, L={}, eps={})".format(self._d, self._points, self._extent, self._epsilon)
