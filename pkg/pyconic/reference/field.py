import numpy as np

from pyconic.ansatz.grid import PhysicalGrid
from pyconic.exceptions import ConicValidationError, GridOverflow
from pyconic.variables import SHELL_FRACTION, TOL_SHELL


class Field2:
    """
    Two component wave function psi = (psi_1, psi_2) sampled on a physical grid, values of shape (2,) + grid.shape.
    """

    def __init__(self, grid: PhysicalGrid, values, time: float = 0.0):
        values = np.array(values, dtype=complex)
        if values.shape != (2,) + grid.shape:
            raise ConicValidationError("Field samples have shape {}, expected {}.".format(
                values.shape, (2,) + grid.shape))
        self._grid = grid
        self._values = values
        self._values.setflags(write=False)
        self._time = float(time)

    @classmethod
    def from_components(cls, grid: PhysicalGrid, psi1, psi2, time=0.0):
        return cls(grid, np.stack([np.asarray(psi1, dtype=complex), np.asarray(psi2, dtype=complex)]), time=time)

    @classmethod
    def zeros(cls, grid: PhysicalGrid, time=0.0):
        return cls(grid, np.zeros((2,) + grid.shape, dtype=complex), time=time)

    @classmethod
    def from_scalar(cls, grid: PhysicalGrid, scalar, vector, time=0.0):
        """
        scalar(x) times a constant vector of C^2.
        """
        vector = np.asarray(vector, dtype=complex).reshape((2,) + (1,) * grid.d)
        return cls(grid, vector * np.asarray(scalar, dtype=complex)[None], time=time)

    @property
    def grid(self):
        return self._grid

    @property
    def values(self):
        return self._values

    @property
    def psi1(self):
        return self._values[0]

    @property
    def psi2(self):
        return self._values[1]

    @property
    def time(self):
        return self._time

    def replace(self, values=None, time=None):
        return Field2(self._grid, self._values if values is None else values,
                      time=self._time if time is None else time)

    def _check_compatible(self, other: "Field2"):
        if not self._grid.same_as(other.grid):
            raise ConicValidationError("Fields on different grids: {} and {}.".format(self._grid, other.grid))

    def __add__(self, other: "Field2"):
        self._check_compatible(other)
        return self.replace(values=self._values + other.values)

    def component_masses(self):
        return tuple(float(self._grid.cell * np.sum(np.abs(c) ** 2)) for c in self._values)

    def mass(self):
        return float(self._grid.cell * np.sum(np.abs(self._values) ** 2))

    def norm(self):
        return float(np.sqrt(self.mass()))

    def distance(self, other: "Field2"):
        self._check_compatible(other)
        return float(np.sqrt(self._grid.cell * np.sum(np.abs(self._values - other.values) ** 2)))

    def relative_distance(self, other: "Field2"):
        reference = other.norm()
        return self.distance(other) / reference if reference > 0 else self.distance(other)

    def density(self):
        return np.sum(np.abs(self._values) ** 2, axis=0)

    def boundary_fraction(self, shell=SHELL_FRACTION):
        """
        Mass share carried by the nodes with some |x_i| > (1 - shell) L.
        """
        total = self.mass()
        if total == 0.0:
            return 0.0
        outer = np.max(np.abs(self._grid.coordinates), axis=-1) > (1.0 - shell) * self._grid.extent
        return float(self._grid.cell * np.sum(self.density()[outer]) / total)

    def check_boundary(self, tol_shell=TOL_SHELL, shell=SHELL_FRACTION):
        fraction = self.boundary_fraction(shell)
        if fraction > tol_shell:
            raise GridOverflow("Field at t = {:.6g} carries {:.2e} of its mass in the outer shell of {}.".format(
                self._time, fraction, self._grid))
        return fraction

    def sidecar(self):
        sidecar = self._grid.sidecar()
        sidecar.update({"time": self._time, "components": 2})
        return sidecar

    def __repr__(self):
        return "Field2({}, t={:.6g})".format(self._grid, self._time)
