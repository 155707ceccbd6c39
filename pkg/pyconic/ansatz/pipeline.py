"""
Approximate solution of the coupled system for packets travelling on the eigenvalue surfaces, with the transfer of
the profiles between the modes at a conical crossing.
"""
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from pyconic import logger
from pyconic.ansatz.assembly import ModeAnsatz, assemble_modes, assemble_single_mode
from pyconic.ansatz.grid import PhysicalGrid
from pyconic.app.misc.caches import Cache, stage_key
from pyconic.classical.action import action_along
from pyconic.classical.flow import continue_through_crossing, integrate_flow
from pyconic.classical.trajectory import Trajectory
from pyconic.exceptions import AtCrossingTime, ConicValidationError, CrossingMismatch, NoCrossing
from pyconic.landau_zener.coefficients import LayerParameters, TransferSpec, layer_parameters
from pyconic.landau_zener.transfer import transfer_pair, transfer_single
from pyconic.potential.crossing import CrossingGeometry
from pyconic.potential.eigen import Mode
from pyconic.potential.models import PotentialModel
from pyconic.profile.evolution import extract_incoming, launch_outgoing, propagate_profile
from pyconic.profile.grid import ProfileGrid
from pyconic.profile.hessian import HessianPath
from pyconic.reference.field import Field2
from pyconic.transport.frames import (align_pair_signs, crossing_limit, eigenvector_at, outgoing_frames,
                                      parallel_transport)
from pyconic.variables import (ATOL_ODE, DELTA_EXPONENT, H_EXTRACT, H_LIMIT, H_RESTART, PROFILE_DT, TAU_SWITCH,
                               TOL_CROSS, TOL_GAP, TOL_GRAZE, TOL_MEET, TOL_NONDEG, TOL_ODE, TOL_SHELL,
                               TOL_TRANSPORT)


@dataclass(frozen=True)
class PacketData:
    """
    Initial packet on one mode: eigenvector y0 at q0 (chosen by eigenvector_at if missing) and profile at t0.
    """
    mode: Mode
    t0: float
    z0: np.ndarray
    profile: ProfileGrid
    y0: Optional[np.ndarray] = None

    def eigenvector(self, model: PotentialModel):
        if self.y0 is not None:
            return np.asarray(self.y0, dtype=float)
        return eigenvector_at(model, self.mode, np.asarray(self.z0, dtype=float)[:model.d])


@dataclass(frozen=True)
class AnsatzSettings:
    dt: float = PROFILE_DT
    tau_switch: float = TAU_SWITCH
    h_extract: float = H_EXTRACT
    tol_shell: float = TOL_SHELL
    h_restart: float = H_RESTART
    h_limit: float = H_LIMIT
    tol_meet: float = TOL_MEET
    tol_transport: float = TOL_TRANSPORT
    tol_ode: float = TOL_ODE
    atol_ode: float = ATOL_ODE
    tol_gap: float = TOL_GAP
    tol_cross: float = TOL_CROSS
    tol_graze: float = TOL_GRAZE
    tol_nondeg: float = TOL_NONDEG
    delta_exponent: float = DELTA_EXPONENT

    @classmethod
    def from_tolerances(cls, tolerances: dict, **overrides):
        """
        Settings from a tolerance mapping, unknown keys are ignored.
        """
        known = {k: v for k, v in dict(tolerances, **overrides).items() if k in cls.__dataclass_fields__}
        return cls(**known)

    def profile_options(self):
        return dict(dt=self.dt, tau_switch=self.tau_switch, h_extract=self.h_extract, tol_shell=self.tol_shell)

    def flow_options(self):
        return dict(rtol=self.tol_ode, atol=self.atol_ode, tol_gap=self.tol_gap, tol_cross=self.tol_cross,
                    tol_graze=self.tol_graze, tol_nondeg=self.tol_nondeg)

    def as_dict(self):
        return asdict(self)


@dataclass
class AnsatzResult:
    """
    Ingoing and outgoing modes of a run with the data of its crossing. Runs without crossing only carry ingoing
    modes.
    """
    epsilon: float
    ingoing: Dict[Mode, ModeAnsatz]
    outgoing: Dict[Mode, ModeAnsatz] = field(default_factory=dict)
    geom: Optional[CrossingGeometry] = None
    spec: Optional[TransferSpec] = None
    u_in: Dict[Mode, ProfileGrid] = field(default_factory=dict)
    u_out: Dict[Mode, ProfileGrid] = field(default_factory=dict)
    residual: float = 0.0
    layer: Optional[LayerParameters] = None
    v_omega: Optional[np.ndarray] = None

    @property
    def times(self) -> List[float]:
        stamps = set()
        for ansatz in list(self.ingoing.values()) + list(self.outgoing.values()):
            stamps.update(ansatz.profiles)
        return sorted(stamps)

    def modes_at(self, t) -> Dict[Mode, ModeAnsatz]:
        if self.geom is None or t < self.geom.t_flat:
            return self.ingoing
        if t == self.geom.t_flat:
            raise AtCrossingTime("The ansatz is not assembled at the crossing time {}.".format(t))
        return self.outgoing

    def mode_fields(self, t, grid: PhysicalGrid) -> Dict[Mode, Field2]:
        return {mode: assemble_single_mode(ansatz, t, grid) for mode, ansatz in self.modes_at(t).items()
                if float(t) in ansatz.profiles}

    def field_at(self, t, grid: PhysicalGrid) -> Field2:
        total = assemble_modes(self.modes_at(t), t, grid)
        return Field2.zeros(grid, time=t) if total is None else total

    def metadata(self):
        out = {"epsilon": self.epsilon, "residual": self.residual}
        if self.geom is not None:
            out.update(self.geom.as_dict())
        if self.spec is not None:
            out.update({"s_flat_minus": self.spec.s_flat_minus, "s_flat_plus": self.spec.s_flat_plus})
        if self.layer is not None:
            out.update(self.layer.as_dict())
        if self.v_omega is not None:
            out["v_omega"] = np.asarray(self.v_omega).tolist()
        return out

    def summary_rows(self):
        """
        One row per snapshot time: t, mass_plus, mass_minus, S_plus, S_minus and the positions of both modes.
        Absent modes carry zero mass and NaN action and position.
        """
        rows = []
        for t in self.times:
            modes = self.modes_at(t)
            row = {"t": t}
            for mode in (Mode.plus, Mode.minus):
                ansatz = modes.get(mode)
                present = ansatz is not None and t in ansatz.profiles
                d = next(iter(modes.values())).trajectory.d
                row["mass_" + mode.value] = ansatz.profiles[t].mass() if present else 0.0
                row["S_" + mode.value] = float(ansatz.action.at(t)) if present else np.nan
                position = ansatz.trajectory.position(t) if present else np.full(d, np.nan)
                for i, value in enumerate(position):
                    row["q{}_{}".format(i + 1, mode.value)] = float(value)
            rows.append(row)
        return rows


def _check_times(times: Sequence[float], t0, t_end, t_flat=None):
    times = sorted(float(t) for t in times)
    if len(set(times)) != len(times):
        raise ConicValidationError("Snapshot times have to be distinct, got {}.".format(times))
    if not t_end > t0:
        raise ConicValidationError("The final time {} has to follow the initial time {}.".format(t_end, t0))
    if times and (times[0] < t0 or times[-1] > t_end):
        raise ConicValidationError("Snapshot times {} outside of [{}, {}].".format(times, t0, t_end))
    if t_flat is not None and t_flat in times:
        raise AtCrossingTime("The ansatz is not assembled at the crossing time {}.".format(t_flat))
    return times


def classical_flow(model: PotentialModel, mode, z0, t0, t_end, settings: AnsatzSettings,
                   cache: Optional[Cache] = None) -> Trajectory:
    """
    Flow of one mode up to t_end or the first crossing point, shared through the cache when one is given.
    """

    def compute():
        return integrate_flow(model, mode, z0, t0, t_end, **settings.flow_options())

    if cache is None:
        return compute()
    key = stage_key("flow", model.coefficients(), Mode(mode).value, np.asarray(z0, dtype=float), float(t0),
                    float(t_end), settings.flow_options())
    return cache.get_or_add(key, compute)


def _ingoing(model: PotentialModel, traj: Trajectory, data: PacketData, epsilon, times, settings: AnsatzSettings,
             cache: Optional[Cache] = None):
    """
    Frame, action and profiles of one mode up to the crossing. Returns the ansatz, the frame limit at t_flat, the
    ingoing profile, the extraction residual and the action at t_flat. None of them depends on eps, a cache shares
    them between the entries of a sweep.
    """
    geom = traj.crossing
    mode = Mode(data.mode)
    t0 = float(data.t0)

    def compute():
        frame = parallel_transport(model, traj, data.eigenvector(model), t0=t0, t1=traj.t_end,
                                   h_limit=settings.h_limit, rtol=settings.tol_transport)
        action = action_along(traj, anchor=t0)
        path = HessianPath.from_trajectory(model, traj)
        current = data.profile.replace(time=t0, mode=mode.value)
        ansatz = ModeAnsatz(mode=mode, trajectory=traj, action=action, frame=frame, epsilon=epsilon)
        for t in times:
            if t != current.time:
                current = propagate_profile(path, current, t, **settings.profile_options())
            ansatz.profiles[t] = current
        if geom is None:
            return ansatz, None, None, 0.0, None
        limit = crossing_limit(frame, geom, h_limit=settings.h_limit)
        u_in, residual = extract_incoming(path, current, **settings.profile_options())
        return ansatz, limit, u_in, residual, float(action.at(geom.t_flat))

    if cache is None:
        return compute()
    key = stage_key("ingoing", model.coefficients(), mode.value, t0, np.asarray(data.z0, dtype=float),
                    data.profile.values, data.profile.extent, data.y0, tuple(times), float(traj.t_end),
                    settings.as_dict())
    ansatz, *rest = cache.get_or_add(key, compute)
    return (replace(ansatz, epsilon=epsilon, profiles=dict(ansatz.profiles)), *rest)


def _outgoing(model: PotentialModel, traj_in: Trajectory, v_omega, u_out: Dict[Mode, ProfileGrid], t_end, epsilon,
              times, settings: AnsatzSettings) -> Dict[Mode, ModeAnsatz]:
    geom = traj_in.crossing
    t_frame = geom.t_flat + settings.h_limit
    if not t_end > t_frame:
        raise ConicValidationError("The final time {} is too close to the crossing time {}.".format(
            t_end, geom.t_flat))
    trajectories = {mode: continue_through_crossing(model, traj_in, mode, t_end, h_restart=settings.h_restart,
                                                    **settings.flow_options())
                    for mode in (Mode.plus, Mode.minus)}
    points = (trajectories[Mode.plus].position(t_frame), trajectories[Mode.minus].position(t_frame))
    y_out = dict(zip((Mode.plus, Mode.minus), outgoing_frames(geom, v_omega, model, points)))
    modes = {}
    for mode, traj in trajectories.items():
        frame = parallel_transport(model, traj, y_out[mode], t0=t_frame, t1=t_end, h_limit=settings.h_limit,
                                   rtol=settings.tol_transport)
        path = HessianPath.from_trajectory(model, traj)
        ansatz = ModeAnsatz(mode=mode, trajectory=traj, action=action_along(traj, anchor=geom.t_flat), frame=frame,
                            epsilon=epsilon)
        current = None
        for t in times:
            if current is None:
                current = launch_outgoing(path, u_out[mode], t, **settings.profile_options())
            else:
                current = propagate_profile(path, current, t, **settings.profile_options())
            ansatz.profiles[t] = current
        modes[mode] = ansatz
    return modes


def _layer(epsilon, settings: AnsatzSettings):
    if 0 < epsilon < 1:
        return layer_parameters(epsilon, delta_exponent=settings.delta_exponent)
    logger.warning("No crossing layer bookkeeping for eps = {} outside of (0, 1).".format(epsilon))
    return None


def _split_times(times, t_flat):
    return [t for t in times if t < t_flat], [t for t in times if t > t_flat]


def propagate_ansatz(model: PotentialModel, data: PacketData, t_end, epsilon, times: Sequence[float],
                     settings: Optional[AnsatzSettings] = None, cache: Optional[Cache] = None) -> AnsatzResult:
    """
    Single minus packet through one conical crossing: flow, transport and profile up to t_flat, transfer of the
    ingoing profile onto both modes, then flows, frames and profiles of both outgoing modes up to t_end.
    :param model: The potential model
    :param data: Initial minus packet
    :param t_end: Final time
    :param epsilon: Semiclassical parameter
    :param times: Snapshot times in [t0, t_end], none of them the crossing time
    :return: AnsatzResult
    :raises NoCrossing: If the minus flow doesn't meet the crossing set before t_end
    """
    settings = settings or AnsatzSettings()
    if Mode(data.mode) is not Mode.minus:
        raise ConicValidationError("A single packet enters the crossing on the minus mode, got {}.".format(
            Mode(data.mode).value))
    traj_in = classical_flow(model, Mode.minus, data.z0, data.t0, t_end, settings, cache)
    geom = traj_in.crossing
    if geom is None:
        raise NoCrossing("The minus flow from {} doesn't meet the crossing set in [{}, {}].".format(
            data.z0, data.t0, t_end))
    before, after = _split_times(_check_times(times, data.t0, t_end, geom.t_flat), geom.t_flat)
    ingoing, v_omega, u_in, residual, s_flat = _ingoing(model, traj_in, data, epsilon, before, settings, cache)
    spec = TransferSpec(geom=geom, epsilon=epsilon, s_flat_minus=s_flat)
    out_plus, out_minus = transfer_single(spec, u_in)
    u_out = {Mode.plus: out_plus, Mode.minus: out_minus}
    outgoing = _outgoing(model, traj_in, v_omega, u_out, t_end, epsilon, after, settings)
    logger.info("Transferred minus packet at t_flat = {:.6g}: outgoing masses plus {:.10f}, minus {:.10f}".format(
        geom.t_flat, out_plus.mass(), out_minus.mass()))
    return AnsatzResult(epsilon=epsilon, ingoing={Mode.minus: ingoing}, outgoing=outgoing, geom=geom, spec=spec,
                        u_in={Mode.minus: u_in}, u_out=u_out, residual=residual, layer=_layer(epsilon, settings),
                        v_omega=v_omega)


def check_meeting(geom_plus: CrossingGeometry, geom_minus: CrossingGeometry, tol_meet):
    dt = abs(geom_plus.t_flat - geom_minus.t_flat)
    dz = float(np.linalg.norm(geom_plus.z_flat - geom_minus.z_flat))
    if dt > tol_meet or dz > tol_meet:
        raise CrossingMismatch("The packets meet the crossing set at different points: |dt| = {:.2e}, |dz| = {:.2e} "
                               "(tolerance {:.1e}).".format(dt, dz, tol_meet))


def propagate_pair(model: PotentialModel, plus_data: PacketData, minus_data: PacketData, t_end, epsilon,
                   times: Sequence[float], settings: Optional[AnsatzSettings] = None,
                   cache: Optional[Cache] = None) -> AnsatzResult:
    """
    Two packets, one on each mode, reaching the same crossing point at the same time. The plus data is turned into
    (-Y0, -profile) when its frame limit points against V_omega_perp.
    :raises CrossingMismatch: If the crossing points differ by more than tol_meet
    """
    settings = settings or AnsatzSettings()
    if Mode(plus_data.mode) is not Mode.plus or Mode(minus_data.mode) is not Mode.minus:
        raise ConicValidationError("A pair needs one plus and one minus packet.")
    if plus_data.t0 != minus_data.t0:
        raise ConicValidationError("Both packets have to start at the same time, got {} and {}.".format(
            plus_data.t0, minus_data.t0))
    traj_plus = classical_flow(model, Mode.plus, plus_data.z0, plus_data.t0, t_end, settings, cache)
    traj_minus = classical_flow(model, Mode.minus, minus_data.z0, minus_data.t0, t_end, settings, cache)
    if traj_plus.crossing is None or traj_minus.crossing is None:
        raise NoCrossing("Both packets have to reach the crossing set before t_end = {}.".format(t_end))
    check_meeting(traj_plus.crossing, traj_minus.crossing, settings.tol_meet)
    geom = traj_minus.crossing
    before, after = _split_times(_check_times(times, minus_data.t0, t_end, geom.t_flat), geom.t_flat)

    minus, v_omega, u_in_minus, residual_minus, s_minus = _ingoing(model, traj_minus, minus_data, epsilon, before,
                                                                   settings, cache)
    plus, limit_plus, u_in_plus, residual_plus, s_plus = _ingoing(model, traj_plus, plus_data, epsilon, before,
                                                                  settings, cache)
    if align_pair_signs(v_omega, limit_plus) < 0:
        logger.info("Flipping the sign of the plus packet to match V_omega_perp")
        plus.frame = plus.frame.flipped()
        plus.profiles = {t: u.replace(values=-u.values) for t, u in plus.profiles.items()}
        u_in_plus = u_in_plus.replace(values=-u_in_plus.values)

    spec = TransferSpec(geom=geom, epsilon=epsilon, s_flat_minus=s_minus, s_flat_plus=s_plus)
    out_plus, out_minus = transfer_pair(spec, u_in_plus, u_in_minus)
    u_out = {Mode.plus: out_plus, Mode.minus: out_minus}
    outgoing = _outgoing(model, traj_minus, v_omega, u_out, t_end, epsilon, after, settings)
    logger.info("Transferred packet pair at t_flat = {:.6g}: outgoing masses plus {:.10f}, minus {:.10f}".format(
        geom.t_flat, out_plus.mass(), out_minus.mass()))
    return AnsatzResult(epsilon=epsilon, ingoing={Mode.plus: plus, Mode.minus: minus}, outgoing=outgoing, geom=geom,
                        spec=spec, u_in={Mode.plus: u_in_plus, Mode.minus: u_in_minus}, u_out=u_out,
                        residual=max(residual_plus, residual_minus), layer=_layer(epsilon, settings),
                        v_omega=v_omega)


def propagate_adiabatic(model: PotentialModel, data: PacketData, t_end, epsilon, times: Sequence[float],
                        settings: Optional[AnsatzSettings] = None, cache: Optional[Cache] = None) -> AnsatzResult:
    """
    Packet on one mode along a trajectory that stays away from the crossing set.
    :raises ConicValidationError: If the flow meets the crossing set before t_end
    """
    settings = settings or AnsatzSettings()
    traj = classical_flow(model, data.mode, data.z0, data.t0, t_end, settings, cache)
    if traj.crossing is not None:
        raise ConicValidationError("The {} flow meets the crossing set at t = {:.6g}; propagate it through the "
                                   "crossing instead.".format(Mode(data.mode).value, traj.crossing.t_flat))
    ansatz = _ingoing(model, traj, data, epsilon, _check_times(times, data.t0, t_end), settings, cache)[0]
    return AnsatzResult(epsilon=epsilon, ingoing={Mode(data.mode): ansatz})
