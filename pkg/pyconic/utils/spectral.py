import itertools

import numpy as np
from scipy.fft import fftfreq, fftn, ifftn

from pyconic.exceptions import ConicValidationError


def is_power_of_two(n):
    return n >= 2 and n & (n - 1) == 0


def check_box(dimension, extent, points):
    """
    Validate the parameters of a periodic box [-extent, extent)^dimension with `points` nodes per axis.
    """
    if dimension < 1:
        raise ConicValidationError("A grid needs at least one axis, got {}.".format(dimension))
    if not extent > 0:
        raise ConicValidationError("The grid extent has to be positive, got {}.".format(extent))
    if not is_power_of_two(points):
        raise ConicValidationError("The number of grid points per axis has to be a power of two, got {}.".format(
            points))


def periodic_axis(extent, points):
    return -extent + 2.0 * extent / points * np.arange(points)


def wavenumbers(extent, points):
    return 2.0 * np.pi * fftfreq(points, d=2.0 * extent / points)


def coordinates(dimension, extent, points):
    """
    :return: Array of shape (points,) * dimension + (dimension,)
    """
    axis = periodic_axis(extent, points)
    return np.stack(np.meshgrid(*([axis] * dimension), indexing="ij"), axis=-1)


def quadratic_form(matrix, coords):
    """
    M y.y at every node of a coordinate stack.
    """
    return np.einsum("...i,ij,...j->...", coords, np.asarray(matrix), coords)


def squared_wavenumbers(dimension, extent, points):
    k = wavenumbers(extent, points)
    return sum(np.meshgrid(*([k ** 2] * dimension), indexing="ij"))


def interpolation_matrix(extent, points, samples):
    """
    Band limited interpolation of a periodic grid function from its DFT coefficients. Samples outside
    [-extent, extent) get zero rows.
    :param samples: 1d array of sample positions
    :return: Complex matrix of shape (len(samples), points)
    """
    samples = np.asarray(samples, dtype=float)
    k = wavenumbers(extent, points)
    matrix = np.exp(1j * np.outer(samples + extent, k)) / points
    matrix[(samples < -extent) | (samples >= extent)] = 0.0
    return matrix


def sample_tensor(values, extent, axes):
    """
    Evaluate a periodic grid function on the tensor grid axes[0] x ... x axes[d-1].
    """
    values = np.asarray(values, dtype=complex)
    out = fftn(values)
    for axis, samples in enumerate(axes):
        matrix = interpolation_matrix(extent, values.shape[axis], samples)
        out = np.moveaxis(np.tensordot(matrix, out, axes=([1], [axis])), 0, axis)
    return out


def multi_indices(dimension, order):
    """
    All multi indices of the given dimension with |alpha| <= order.
    """
    return [alpha for alpha in itertools.product(range(order + 1), repeat=dimension) if sum(alpha) <= order]


def sigma_terms(values, extent, k, epsilon=1.0, components=False):
    """
    ||x^alpha (epsilon d_x)^beta f||_L2 on a periodic cube for every |alpha| + |beta| <= k, derivatives taken
    spectrally. With `components` the leading axis of values indexes the components of a vector valued f.
    :return: Dict (alpha, beta) -> norm
    """
    values = np.asarray(values, dtype=complex)
    if not components:
        values = values[None]
    dimension, points = values.ndim - 1, values.shape[1]
    axes = tuple(range(1, dimension + 1))
    cell = (2.0 * extent / points) ** dimension
    coords = coordinates(dimension, extent, points)
    kk = np.meshgrid(*([wavenumbers(extent, points)] * dimension), indexing="ij")
    spectrum = fftn(values, axes=axes)
    terms = {}
    for beta in multi_indices(dimension, k):
        multiplier = np.ones(values.shape[1:], dtype=complex)
        for axis, power in enumerate(beta):
            multiplier = multiplier * (1j * epsilon * kk[axis]) ** power
        derivative = ifftn(spectrum * multiplier[None], axes=axes) if sum(beta) else values
        for alpha in multi_indices(dimension, k - sum(beta)):
            weight = np.ones(values.shape[1:])
            for axis, power in enumerate(alpha):
                weight = weight * coords[..., axis] ** power
            terms[(alpha, beta)] = float(np.sqrt(cell * np.sum(np.abs(weight[None] * derivative) ** 2)))
    return terms


def sigma_norm(values, extent, k, epsilon=1.0, components=False):
    """
    sup over |alpha| + |beta| <= k of ||x^alpha (epsilon d_x)^beta f||_L2.
    """
    return max(sigma_terms(values, extent, k, epsilon=epsilon, components=components).values())
