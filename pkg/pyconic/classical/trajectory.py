from typing import List, Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from pyconic.exceptions import ConicValidationError
from pyconic.potential.crossing import CrossingGeometry
from pyconic.potential.eigen import Mode, eigenvalue
from pyconic.potential.models import PotentialModel


def mode_energy(model: PotentialModel, mode, z):
    """
    h_mode(z) = |p|^2/2 + lambda_mode(q), vectorised over the leading axes of z.
    """
    z = np.asarray(z, dtype=float)
    d = model.d
    q, p = z[..., :d], z[..., d:]
    return 0.5 * np.sum(p * p, axis=-1) + eigenvalue(model, mode, q)


class Segment:
    """
    Smooth piece of a trajectory on a single mode. Node states and their time derivatives define a cubic Hermite
    interpolant, so evaluation between nodes is consistent with z' = J grad h.
    """

    def __init__(self, mode, times, states, derivatives):
        times = np.asarray(times, dtype=float)
        states = np.asarray(states, dtype=float)
        derivatives = np.asarray(derivatives, dtype=float)
        order = np.argsort(times, kind="stable")
        times, states, derivatives = times[order], states[order], derivatives[order]
        keep = np.concatenate([[True], np.diff(times) > 0])
        self._mode = Mode(mode)
        self._times = times[keep]
        self._states = states[keep]
        self._derivatives = derivatives[keep]
        for arr in (self._times, self._states, self._derivatives):
            arr.setflags(write=False)
        self._spline = None
        if len(self._times) > 1:
            self._spline = CubicHermiteSpline(self._times, self._states, self._derivatives, axis=0)

    @property
    def mode(self):
        return self._mode

    @property
    def times(self):
        return self._times

    @property
    def states(self):
        return self._states

    @property
    def derivatives(self):
        return self._derivatives

    @property
    def start(self):
        return float(self._times[0])

    @property
    def end(self):
        return float(self._times[-1])

    def contains(self, t):
        return (t >= self.start) & (t <= self.end)

    def at(self, t):
        if self._spline is None:
            return np.broadcast_to(self._states[0], np.shape(t) + self._states[0].shape).copy()
        return self._spline(t)

    def __len__(self):
        return len(self._times)


class Trajectory:
    """
    Time sampled classical flow on one mode, or on an ingoing mode up to a crossing time followed by an outgoing
    mode. Segments are ordered by time and share their boundary nodes.
    """

    def __init__(self, model: PotentialModel, mode, segments: List[Segment],
                 crossing: Optional[CrossingGeometry] = None, in_mode=None):
        if len(segments) == 0:
            raise ConicValidationError("A trajectory needs at least one segment.")
        self._model = model
        self._mode = Mode(mode)
        self._in_mode = Mode(in_mode) if in_mode is not None else self._mode
        self._segments = sorted(segments, key=lambda s: (s.start, s.end))
        self._crossing = crossing

    @property
    def model(self):
        return self._model

    @property
    def mode(self):
        return self._mode

    @property
    def in_mode(self):
        return self._in_mode

    @property
    def crossing(self) -> Optional[CrossingGeometry]:
        return self._crossing

    @property
    def segments(self):
        return list(self._segments)

    @property
    def t_start(self):
        return self._segments[0].start

    @property
    def t_end(self):
        return self._segments[-1].end

    @property
    def d(self):
        return self._model.d

    @property
    def times(self):
        return np.unique(np.concatenate([s.times for s in self._segments]))

    @property
    def states(self):
        return self.at(self.times)

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        span = max(1.0, abs(self.t_start), abs(self.t_end)) * 1e-12
        if np.any(t < self.t_start - span) or np.any(t > self.t_end + span):
            raise ConicValidationError(
                "Time(s) {} outside of the trajectory window [{}, {}].".format(t, self.t_start, self.t_end))
        return np.clip(t, self.t_start, self.t_end)

    def at(self, t):
        """
        Phase space point z(t) = (q(t), p(t)).
        :param t: Time or array of times
        :return: Array of shape (2d,) or (n, 2d)
        """
        t = self._check(t)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.empty((t.shape[0], 2 * self.d))
        for segment in self._segments:
            mask = segment.contains(t)
            if np.any(mask):
                out[mask] = segment.at(t[mask])
        return out[0] if scalar else out

    def position(self, t):
        return self.at(t)[..., :self.d]

    def momentum(self, t):
        return self.at(t)[..., self.d:]

    def mode_at(self, t) -> Mode:
        t = float(self._check(t))
        if self._crossing is not None and t <= self._crossing.t_flat:
            return self._in_mode
        for segment in reversed(self._segments):
            if segment.contains(t):
                return segment.mode
        return self._mode

    def gap_at(self, t):
        return self._model.gap(self.position(t))

    def energy_drift(self):
        """
        Largest deviation of h_mode from its value at the first node, taken over every smooth segment.
        """
        drift = 0.0
        for segment in self._segments:
            energy = mode_energy(self._model, segment.mode, segment.states)
            drift = max(drift, float(np.max(np.abs(energy - energy[0]))))
        return drift

    def __repr__(self):
        return "Trajectory(mode={}, in_mode={}, t=[{:.6g}, {:.6g}], segments={}, crossing={})".format(
            self._mode.value, self._in_mode.value, self.t_start, self.t_end, len(self._segments),
            None if self._crossing is None else "{:.12g}".format(self._crossing.t_flat))
