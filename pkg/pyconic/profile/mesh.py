"""
Deterministic time meshes of the profile evolutions. A mesh only depends on the unordered pair of its end points,
so that a backward evolution retraces the nodes of the forward one.
"""
import math

import numpy as np

from pyconic.exceptions import ConicValidationError
from pyconic.variables import H_EXTRACT, PROFILE_DT, TAU_SWITCH


def uniform_mesh(t0, t1, dt=PROFILE_DT):
    """
    Nodes from t0 to t1 with steps of at most dt.
    """
    if dt <= 0:
        raise ConicValidationError("The time step has to be positive, got {}.".format(dt))
    t0, t1 = float(t0), float(t1)
    if t0 == t1:
        return np.array([t0])
    steps = max(1, int(math.ceil(abs(t1 - t0) / dt - 1e-9)))
    nodes = np.linspace(min(t0, t1), max(t0, t1), steps + 1)
    return nodes if t1 > t0 else nodes[::-1]


def crossing_taus(dt=PROFILE_DT, tau_switch=TAU_SWITCH, h_extract=H_EXTRACT):
    """
    Decreasing distances to the crossing time: tau_{k+1} = tau_k - min(dt, tau_k / 4) from tau_switch until the
    first tau <= h_extract, followed by 0.
    """
    if not 0 < h_extract < tau_switch:
        raise ConicValidationError("Expected 0 < h_extract < tau_switch, got {} and {}.".format(h_extract, tau_switch))
    taus = [float(tau_switch)]
    while taus[-1] > h_extract:
        taus.append(taus[-1] - min(dt, taus[-1] / 4.0))
    taus.append(0.0)
    return np.array(taus)


def crossing_mesh(t_flat, t0, t1, dt=PROFILE_DT, tau_switch=TAU_SWITCH, h_extract=H_EXTRACT):
    """
    Nodes from t0 to t1 inside the window |t - t_flat| <= tau_switch, both on the same side of t_flat (either may equal
    t_flat).
    """
    t0, t1 = float(t0), float(t1)
    slack = 1e-12 * max(1.0, abs(t_flat))
    if (t0 - t_flat) * (t1 - t_flat) < 0:
        raise ConicValidationError("[{}, {}] contains the crossing time {} in its interior.".format(t0, t1, t_flat))
    if max(abs(t0 - t_flat), abs(t1 - t_flat)) > tau_switch + slack:
        raise ConicValidationError("[{}, {}] leaves the crossing window of radius {} around {}.".format(
            t0, t1, tau_switch, t_flat))
    if t0 == t1:
        return np.array([t0])
    side = 1.0 if max(t0, t1) > t_flat else -1.0
    nodes = t_flat + side * crossing_taus(dt, tau_switch, h_extract)
    low, high = min(t0, t1), max(t0, t1)
    inner = nodes[(nodes > low + slack) & (nodes < high - slack)]
    mesh = np.unique(np.concatenate([[low, high], inner]))
    return mesh if t1 > t0 else mesh[::-1]


def average_log(a, b):
    """
    Mean of ln(tau) over [a, b] with 0 <= a < b.
    """
    a, b = float(min(a, b)), float(max(a, b))
    if b <= 0:
        raise ConicValidationError("The averaging interval has to reach positive values.")
    if a == b:
        return math.log(a)
    a_log_a = a * math.log(a) if a > 0 else 0.0
    return (b * math.log(b) - a_log_a) / (b - a) - 1.0
