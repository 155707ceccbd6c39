from typing import Optional

import numpy as np

from pyconic.exceptions import ConicValidationError, GridOverflow
from pyconic.utils.spectral import check_box, coordinates, periodic_axis, sample_tensor, sigma_norm, wavenumbers
from pyconic.variables import PROFILE_EXTENT, PROFILE_POINTS, SHELL_FRACTION, TOL_SHELL


class ProfileGrid:
    """
    Complex samples of a profile u(y) on the periodic box [-L, L)^d with N points per axis.
    """

    def __init__(self, values, extent: float = PROFILE_EXTENT, time: float = 0.0, mode: Optional[str] = None):
        values = np.array(values, dtype=complex)
        if len(set(values.shape)) != 1:
            raise ConicValidationError("Profile samples need the same number of points on every axis, got {}.".format(
                values.shape))
        check_box(values.ndim, extent, values.shape[0])
        self._values = values
        self._values.setflags(write=False)
        self._extent = float(extent)
        self._time = float(time)
        self._mode = mode

    @classmethod
    def zeros(cls, dimension, extent=PROFILE_EXTENT, points=PROFILE_POINTS, time=0.0, mode=None):
        return cls(np.zeros((points,) * dimension, dtype=complex), extent=extent, time=time, mode=mode)

    @classmethod
    def from_function(cls, fn, dimension, extent=PROFILE_EXTENT, points=PROFILE_POINTS, time=0.0, mode=None):
        """
        Sample fn(y) with y of shape (..., d).
        """
        check_box(dimension, extent, points)
        return cls(fn(coordinates(dimension, extent, points)), extent=extent, time=time, mode=mode)

    @property
    def values(self):
        return self._values

    @property
    def d(self):
        return self._values.ndim

    @property
    def points(self):
        return self._values.shape[0]

    @property
    def extent(self):
        return self._extent

    @property
    def time(self):
        return self._time

    @property
    def mode(self):
        return self._mode

    @property
    def spacing(self):
        return 2.0 * self._extent / self.points

    @property
    def cell(self):
        return self.spacing ** self.d

    @property
    def axis(self):
        return periodic_axis(self._extent, self.points)

    @property
    def wavenumbers(self):
        return wavenumbers(self._extent, self.points)

    def coordinates(self):
        return coordinates(self.d, self._extent, self.points)

    def replace(self, values=None, time=None, mode=None):
        return ProfileGrid(self._values if values is None else values, extent=self._extent,
                           time=self._time if time is None else time, mode=self._mode if mode is None else mode)

    def compatible(self, other: "ProfileGrid"):
        return self._values.shape == other.values.shape and self._extent == other.extent

    def _check_compatible(self, other):
        if not self.compatible(other):
            raise ConicValidationError("Profile grids {} and {} don't share their nodes.".format(self, other))

    def mass(self):
        return float(self.cell * np.sum(np.abs(self._values) ** 2))

    def norm(self):
        return float(np.sqrt(self.mass()))

    def inner(self, other: "ProfileGrid"):
        self._check_compatible(other)
        return complex(self.cell * np.sum(np.conj(self._values) * other.values))

    def distance(self, other: "ProfileGrid"):
        self._check_compatible(other)
        return float(np.sqrt(self.cell * np.sum(np.abs(self._values - other.values) ** 2)))

    def boundary_fraction(self, shell=SHELL_FRACTION):
        """
        Mass share carried by the nodes with some |y_i| > (1 - shell) L.
        """
        total = self.mass()
        if total == 0.0:
            return 0.0
        outer = np.max(np.abs(self.coordinates()), axis=-1) > (1.0 - shell) * self._extent
        return float(self.cell * np.sum(np.abs(self._values[outer]) ** 2) / total)

    def check_boundary(self, tol_shell=TOL_SHELL, shell=SHELL_FRACTION):
        fraction = self.boundary_fraction(shell)
        if fraction > tol_shell:
            raise GridOverflow("Profile at t = {:.6g} carries {:.2e} of its mass in the outer shell of the box "
                               "[-{}, {})^{}.".format(self._time, fraction, self._extent, self._extent, self.d))
        return fraction

    def sample(self, axes):
        """
        Band limited interpolation on a tensor grid, zero outside the box.
        :param axes: One 1d array of positions per axis
        :return: Complex array of shape (len(axes[0]), ..., len(axes[d-1]))
        """
        if len(axes) != self.d:
            raise ConicValidationError("Expected {} sample axes, got {}.".format(self.d, len(axes)))
        return sample_tensor(self._values, self._extent, axes)

    def sigma_norm(self, k=1):
        return sigma_norm(self._values, self._extent, k)

    def sidecar(self):
        return {"dims": self.d, "L": self._extent, "N": self.points, "time": self._time, "mode": self._mode,
                "components": 1}

    def __repr__(self):
        return "ProfileGrid(d={}, N={}, L={}, t={:.6g}, mode={})".format(self.d, self.points, self._extent,
                                                                         self._time, self._mode)


def gaussian_amplitude(width):
    """
    Normalisation of exp((i/2) A y.y) for Im A = width.
    """
    width = np.atleast_2d(np.asarray(width, dtype=float))
    return complex((np.linalg.det(width) / np.pi ** width.shape[0]) ** 0.25)


def gaussian_profile(dimension, a_matrix=None, center=None, momentum=None, extent=PROFILE_EXTENT,
                     points=PROFILE_POINTS, time=0.0, mode=None, amplitude=None) -> ProfileGrid:
    """
    c exp((i/2) A (y - y0).(y - y0) + i k0.(y - y0)), normalised in L2 unless an amplitude is given.
    :param a_matrix: Complex symmetric matrix with positive definite imaginary part, i Id by default
    """
    a = 1j * np.eye(dimension) if a_matrix is None else np.asarray(a_matrix, dtype=complex)
    if a.shape != (dimension, dimension):
        raise ConicValidationError("Gaussian width matrix has shape {}, expected {}.".format(
            a.shape, (dimension, dimension)))
    if not np.allclose(a, a.T):
        raise ConicValidationError("Gaussian width matrix has to be symmetric.")
    if np.min(np.linalg.eigvalsh(a.imag)) <= 0:
        raise ConicValidationError("The imaginary part of the Gaussian width matrix has to be positive definite.")
    y0 = np.zeros(dimension) if center is None else np.asarray(center, dtype=float)
    k0 = np.zeros(dimension) if momentum is None else np.asarray(momentum, dtype=float)
    c = gaussian_amplitude(a.imag) if amplitude is None else complex(amplitude)

    def fn(y):
        shifted = y - y0
        return c * np.exp(0.5j * np.einsum("...i,ij,...j->...", shifted, a, shifted) + 1j * shifted @ k0)

    return ProfileGrid.from_function(fn, dimension, extent=extent, points=points, time=time, mode=mode)
