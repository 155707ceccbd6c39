"""
Strang split step Fourier solver of i eps d_t psi = -eps^2/2 Laplace psi + V(x) psi on a periodic box.
"""
import math
from typing import List, Sequence, Tuple

import numpy as np
from scipy.fft import fftn, ifftn

from pyconic import logger
from pyconic.ansatz.grid import PhysicalGrid
from pyconic.exceptions import ConicValidationError
from pyconic.potential.eigen import projectors
from pyconic.potential.models import PotentialModel, a_matrix
from pyconic.reference.field import Field2
from pyconic.variables import TOL_SHELL

SINC_SERIES_BELOW = 1e-12
CHECK_EVERY = 100


def potential_factor(model: PotentialModel, grid: PhysicalGrid, dt):
    """
    Pointwise exp(-i (dt / eps) V(x)) = e^{-i theta v} [cos(theta |w|) Id - i sin(theta |w|) / |w| A(w)] with
    theta = dt / eps.
    :return: Complex array of shape grid.shape + (2, 2)
    """
    theta = dt / grid.epsilon
    x = grid.coordinates
    v = model.v(x)
    w = model.w(x)
    norm = np.linalg.norm(w, axis=-1)
    small = norm < SINC_SERIES_BELOW
    safe = np.where(small, 1.0, norm)
    sinc = np.where(small, theta * (1.0 - (theta * norm) ** 2 / 6.0), np.sin(theta * norm) / safe)
    factor = np.cos(theta * norm)[..., None, None] * np.eye(2) - 1j * sinc[..., None, None] * a_matrix(w)
    return np.exp(-1j * theta * v)[..., None, None] * factor


def apply_pointwise(factor, values):
    """
    Multiply the component vector at every node by the 2 x 2 matrix of that node.
    """
    stacked = np.moveaxis(values, 0, -1)[..., None]
    return np.moveaxis((factor @ stacked)[..., 0], -1, 0)


def kinetic_multiplier(grid: PhysicalGrid, dt):
    return np.exp(-0.5j * dt * grid.epsilon * grid.squared_wavenumbers)


def _spatial_axes(grid):
    return tuple(range(1, grid.d + 1))


def apply_kinetic(grid: PhysicalGrid, multiplier, values):
    axes = _spatial_axes(grid)
    return ifftn(fftn(values, axes=axes) * multiplier[None], axes=axes)


def potential_half_step(model: PotentialModel, field: Field2, dt) -> Field2:
    """
    Apply exp(-i (dt / eps) V(x)) pointwise. Inside a Strang step dt is half of the time step.
    """
    return field.replace(values=apply_pointwise(potential_factor(model, field.grid, dt), field.values))


def kinetic_step(field: Field2, dt) -> Field2:
    """
    Multiply the Fourier transform of each component by exp(-i dt eps |k|^2 / 2).
    """
    if dt == 0:
        return field
    return field.replace(values=apply_kinetic(field.grid, kinetic_multiplier(field.grid, dt), field.values))


class SplitStepPropagator:
    """
    One Strang step V/2 - T - V/2 of fixed size dt with precomputed pointwise factors.
    """

    def __init__(self, model: PotentialModel, grid: PhysicalGrid, dt):
        if model.d != grid.d:
            raise ConicValidationError("Model of dimension {} on a grid of dimension {}.".format(model.d, grid.d))
        self._grid = grid
        self._dt = float(dt)
        self._half = potential_factor(model, grid, 0.5 * dt)
        self._kinetic = kinetic_multiplier(grid, dt)

    @property
    def dt(self):
        return self._dt

    def step(self, values):
        values = apply_pointwise(self._half, values)
        values = apply_kinetic(self._grid, self._kinetic, values)
        return apply_pointwise(self._half, values)

    def run(self, field: Field2, steps: int, tol_shell=TOL_SHELL) -> Field2:
        """
        Apply `steps` steps, checking the boundary shell periodically and at the end.
        """
        values = field.values
        for k in range(1, steps + 1):
            values = self.step(values)
            if k % CHECK_EVERY == 0 and k < steps:
                field.replace(values=values, time=field.time + k * self._dt).check_boundary(tol_shell)
        out = field.replace(values=values, time=field.time + steps * self._dt)
        out.check_boundary(tol_shell)
        return out


def _steps(t0, t1, dt):
    if dt <= 0:
        raise ConicValidationError("The time step has to be positive, got {}.".format(dt))
    return max(1, int(math.ceil(abs(t1 - t0) / dt - 1e-9)))


def propagate_reference(model: PotentialModel, psi0: Field2, t0, t1, dt, tol_shell=TOL_SHELL) -> Field2:
    """
    Solve the coupled system from t0 to t1 with Strang steps of size at most dt.
    :param model: The potential model
    :param psi0: Initial field, stamped t0 on return
    :param dt: Largest time step, at most eps / 10 for an accurate splitting
    :return: Field2 at t1
    :raises GridOverflow: If the field reaches the boundary shell of the box
    """
    epsilon = psi0.grid.epsilon
    if dt > epsilon / 10.0 * (1.0 + 1e-12):
        logger.warning("Time step {:.3e} exceeds eps / 10 = {:.3e}; the splitting error may dominate.".format(
            dt, epsilon / 10.0))
    field = psi0.replace(time=t0)
    if t0 == t1:
        return field
    steps = _steps(t0, t1, dt)
    propagator = SplitStepPropagator(model, psi0.grid, (t1 - t0) / steps)
    out = propagator.run(field, steps, tol_shell=tol_shell)
    logger.debug("Reference solution from t = {:.6g} to {:.6g} in {} steps, mass drift {:.2e}".format(
        t0, t1, steps, out.mass() - field.mass()))
    return out.replace(time=t1)


def reference_snapshots(model: PotentialModel, psi0: Field2, t0, times: Sequence[float], dt,
                        tol_shell=TOL_SHELL) -> List[Field2]:
    """
    Reference fields at increasing times, each leg with its own step of size at most dt.
    """
    snapshots = []
    field, current = psi0.replace(time=t0), t0
    for t in times:
        if t < current:
            raise ConicValidationError("Snapshot times have to increase from t0, got {} after {}.".format(t, current))
        field = propagate_reference(model, field, current, t, dt, tol_shell=tol_shell)
        snapshots.append(field)
        current = t
    return snapshots


def mode_masses(model: PotentialModel, field: Field2) -> Tuple[float, float]:
    """
    Masses of Pi_+(x) psi and Pi_-(x) psi; points on the crossing set split evenly.
    """
    pi_plus, pi_minus = projectors(model.w(field.grid.coordinates))
    masses = []
    for projector in (pi_plus, pi_minus):
        projected = apply_pointwise(projector, field.values)
        masses.append(float(field.grid.cell * np.sum(np.abs(projected) ** 2)))
    return masses[0], masses[1]
