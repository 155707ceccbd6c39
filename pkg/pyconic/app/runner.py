"""
Commands of the command line: every command reads an ExperimentConfig, writes its CSVs and dumps into the output
folder and returns a RunReport.
"""
import os
import time
from typing import List, Optional, Tuple

import numpy as np

from pyconic import logger
from pyconic.ansatz.pipeline import (AnsatzResult, classical_flow, propagate_adiabatic, propagate_ansatz,
                                     propagate_pair)
from pyconic.ansatz.wigner import sigma_norm, wigner_masses
from pyconic.app.misc.caches import Cache
from pyconic.classical.action import action_along
from pyconic.classical.flow import continue_through_crossing, integrate_flow
from pyconic.classical.trajectory import Trajectory, mode_energy
from pyconic.exceptions import NoCrossing
from pyconic.landau_zener.coefficients import coeff_a, coeff_b
from pyconic.landau_zener.oracle import lz_transition
from pyconic.model.config import PACKET_KINDS, ExperimentConfig
from pyconic.model.results import EpsilonReport, RunReport
from pyconic.parallel.joblib import run_parallel
from pyconic.potential.eigen import Mode
from pyconic.potential.models import PotentialModel
from pyconic.profile.evolution import cauchy_rate, compensated_trace, evolve_profile, sigma_growth
from pyconic.profile.gaussian import gaussian_grid, gaussian_oracle
from pyconic.profile.grid import gaussian_amplitude, gaussian_profile
from pyconic.profile.hessian import HessianPath
from pyconic.reference.field import Field2
from pyconic.reference.solver import mode_masses, reference_snapshots
from pyconic.transport.frames import eigenvector_at, parallel_transport
from pyconic.utils.logging_util import FileFormats, store_artifact
from pyconic.variables import (ADIABATIC, CLASSICAL, CLASSICAL_ONLY, CONVERGENCE_CSV, CROSSING_SINGLE,
                               DEFAULT_OUT, EIGENFRAME_CSV, ERRORS_CSV, INITIAL, LZ_CSV, LZ_SCATTER,
                               LZ_TABLE, MIN_PREDICTED_MASS, MIN_SWEEP, PROFILE_CSV, PROFILE_TEST, PROFILE_TRACE_CSV,
                               RUN, SIMULATE, SUMMARY_CSV, SWEEP, TOL_LZ, TOL_MASS_BOOKKEEPING, TOL_PREDICTED_MASS,
                               TRAJECTORY_CSV)

MIN_CAUCHY_EXPONENT = 0.9
MAX_L2_DRIFT = 1e-10
MAX_ORACLE_DISTANCE = 1e-6
MIN_ADIABATIC_SLOPE = 0.4


def output_folder(config: ExperimentConfig, out=None):
    folder = out or config.run.out or DEFAULT_OUT
    os.makedirs(folder, exist_ok=True)
    return folder


def eps_tag(epsilon):
    return "eps{:.6g}".format(epsilon)


def new_report(command, config: ExperimentConfig) -> RunReport:
    return RunReport(command=command, kind=config.run.kind, config=config.dict(by_alias=True))


def snapshot_times(config: ExperimentConfig, epsilon, t0, t_flat=None) -> List[float]:
    """
    The configured snapshot times, or t0, t_flat -/+ delta (inside (t0, t_end)) and t_end.
    """
    if config.run.times is not None:
        return sorted(set(float(t) for t in config.run.times))
    t_end = config.run.t_end
    times = {float(t0), float(t_end)}
    if t_flat is not None and 0 < epsilon < 1:
        delta = epsilon ** config.run.delta_exponent
        times.update(t for t in (t_flat - delta, t_flat + delta) if t0 < t < t_end)
    return sorted(times)


def _largest_momentum(result: AnsatzResult):
    trajectories = [a.trajectory for a in list(result.ingoing.values()) + list(result.outgoing.values())]
    return max(float(np.max(np.abs(traj.states[:, traj.d:]))) for traj in trajectories)


def _ansatz(config: ExperimentConfig, model: PotentialModel, epsilon, cache: Optional[Cache]) -> AnsatzResult:
    settings = config.settings()
    first, second = config.packets(model)
    kind, t0, t_end = config.run.kind, first.t0, config.run.t_end
    if kind == ADIABATIC:
        return propagate_adiabatic(model, first, t_end, epsilon, snapshot_times(config, epsilon, t0), settings,
                                   cache=cache)
    geom = classical_flow(model, Mode.minus, first.z0, t0, t_end, settings, cache).crossing
    if geom is None:
        raise NoCrossing("The minus flow from {} doesn't meet the crossing set before t_end = {}.".format(
            first.z0, t_end))
    times = snapshot_times(config, epsilon, t0, geom.t_flat)
    if kind == CROSSING_SINGLE:
        return propagate_ansatz(model, first, t_end, epsilon, times, settings, cache=cache)
    return propagate_pair(model, second, first, t_end, epsilon, times, settings, cache=cache)


def _masses(result: AnsatzResult, t):
    modes = result.modes_at(t)
    return {mode.value: float(modes[mode].profiles[t].mass()) if mode in modes and t in modes[mode].profiles
            else 0.0 for mode in (Mode.plus, Mode.minus)}


def mass_deviation(reference, predicted):
    """
    Largest relative deviation |m - c| / c over the modes with a predicted mass c of at least MIN_PREDICTED_MASS of
    the total.
    """
    total = sum(predicted.values())
    deviations = [abs(reference[mode] - c) / c for mode, c in predicted.items()
                  if c > 0 and c >= MIN_PREDICTED_MASS * total]
    return max(deviations, default=0.0)


def run_epsilon(config: ExperimentConfig, model: PotentialModel, epsilon, folder, cache: Optional[Cache] = None) \
        -> Tuple[EpsilonReport, List[str]]:
    """
    Ansatz and reference solution for one eps, compared at the snapshot times.
    :return: (EpsilonReport, written files)
    """
    started = time.time()
    timings = {}
    result = _ansatz(config, model, epsilon, cache)
    timings["ansatz"] = time.time() - started
    times = result.times
    grid = config.grid.physical(model.d, epsilon, p_max=_largest_momentum(result))

    started = time.time()
    psi0 = result.field_at(times[0], grid)
    snapshots = [psi0] + reference_snapshots(model, psi0, times[0], times[1:], config.grid.reference_dt(epsilon),
                                             tol_shell=config.tolerances.tol_shell)
    timings["reference"] = time.time() - started

    entry = EpsilonReport(epsilon=epsilon, times=times, metadata=result.metadata(), timings=timings)
    rows = []
    app = None
    for t, ref in zip(times, snapshots):
        app = result.field_at(t, grid)
        difference = Field2(grid, ref.values - app.values, time=t)
        ref_plus, ref_minus = mode_masses(model, ref)
        masses = _masses(result, t)
        entry.l2_errors.append(ref.distance(app))
        entry.sigma1_errors.append(sigma_norm(difference, 1))
        rows.append({"t": t, "l2": entry.l2_errors[-1], "sigma1": entry.sigma1_errors[-1],
                     "reference_mass_plus": ref_plus, "reference_mass_minus": ref_minus,
                     "ansatz_mass_plus": masses["plus"], "ansatz_mass_minus": masses["minus"]})
    entry.reference_masses = {"plus": rows[-1]["reference_mass_plus"], "minus": rows[-1]["reference_mass_minus"]}
    entry.ansatz_masses = _masses(result, times[-1])
    if result.geom is not None:
        c_plus, c_minus = wigner_masses(result.u_in.get(Mode.plus), result.u_in.get(Mode.minus), result.geom)
        entry.predicted_masses = {"plus": c_plus, "minus": c_minus}
        if times[-1] > result.geom.t_flat:
            deviation = mass_deviation(entry.reference_masses, entry.predicted_masses)
            entry.metadata["mass_deviation"] = deviation
            if deviation > TOL_PREDICTED_MASS:
                logger.warning("Reference mode masses {} deviate by {:.2%} from the predicted {} for eps = {}".format(
                    entry.reference_masses, deviation, entry.predicted_masses, epsilon))
                entry.flags.append("predicted_mass")

    initial = sum(_masses(result, times[0]).values())
    final = sum(entry.ansatz_masses.values())
    if abs(final - initial) > TOL_MASS_BOOKKEEPING * max(1.0, initial):
        logger.warning("Mode masses at t = {} sum to {:.12f} instead of {:.12f} for eps = {}".format(
            times[-1], final, initial, epsilon))
        entry.flags.append("mass_bookkeeping")

    tag = eps_tag(epsilon)
    files = [
        store_artifact(folder, "{}_{}".format(SUMMARY_CSV, tag), result.summary_rows(), FileFormats.csv),
        store_artifact(folder, "{}_{}".format(ERRORS_CSV, tag), rows, FileFormats.csv),
        store_artifact(folder, "psi_reference_{}".format(tag), snapshots[-1], FileFormats.bin),
        store_artifact(folder, "psi_ansatz_{}".format(tag), app, FileFormats.bin),
    ]
    logger.info("eps = {}: L2 error {:.4e}, Sigma1 error {:.4e} at t = {}".format(
        epsilon, entry.l2_errors[-1], entry.sigma1_errors[-1], times[-1]))
    return entry, files


def _entries_into(report: RunReport, results):
    for entry, files in results:
        report.entries.append(entry)
        for path in files:
            report.add_file(path)
    if report.entries and "t_flat" in report.entries[0].metadata:
        meta = report.entries[0].metadata
        report.crossing = {k: meta[k] for k in ("t_flat", "q_flat", "p_flat", "r", "omega", "gamma0")}


def simulate(config: ExperimentConfig, folder, n_jobs=1, eta2_grid=None) -> RunReport:
    """
    The configured run kind; packet kinds use the first eps of the list.
    """
    kind = config.run.kind
    if kind == CLASSICAL_ONLY:
        return classical(config, folder, command=SIMULATE)
    if kind == LZ_TABLE:
        return lz_scatter(config, folder, eta2_grid=eta2_grid, command=SIMULATE)
    report = new_report(SIMULATE, config)
    model = config.build_model()
    _entries_into(report, [run_epsilon(config, model, config.run.epsilons[0], folder)])
    entry = report.entries[0]
    report.summary.update({"epsilon": entry.epsilon, "l2_error": entry.final_error,
                           "sigma1_error": entry.sigma1_errors[-1]})
    report.summary.update({"mass_" + k: v for k, v in entry.ansatz_masses.items()})
    return report


def fitted_slope(epsilons, errors):
    """
    Slope of log(error) against log(eps), NaN if an error vanishes.
    """
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0) or len(errors) < 2:
        return float("nan")
    return float(np.polyfit(np.log(epsilons), np.log(errors), 1)[0])


def sweep(config: ExperimentConfig, folder, n_jobs=1) -> RunReport:
    """
    Every eps of the list with a shared cache for the eps independent stages. Reports the slope of the final errors
    against eps. The run is flagged when the errors don't decrease with eps or, for adiabatic packets, when the
    slope stays below MIN_ADIABATIC_SLOPE.
    """
    epsilons = config.run.epsilons
    if len(epsilons) < MIN_SWEEP:
        raise config.error("A sweep needs at least {} eps values, got {}.".format(MIN_SWEEP, len(epsilons)),
                           section=RUN, key="epsilons")
    if config.run.kind not in PACKET_KINDS:
        raise config.error("Sweeps run the packet kinds {}, got {}.".format(", ".join(PACKET_KINDS),
                                                                             config.run.kind),
                           section=RUN, key="kind")
    report = new_report(SWEEP, config)
    model = config.build_model()
    cache = Cache()
    _entries_into(report, run_parallel(lambda eps: run_epsilon(config, model, eps, folder, cache), epsilons,
                                       n_jobs=n_jobs))
    rows = []
    for entry in report.entries:
        rows.append({"epsilon": entry.epsilon, "l2_final": entry.final_error,
                     "sigma1_final": entry.sigma1_errors[-1], "l2_max": max(entry.l2_errors),
                     "sigma1_max": max(entry.sigma1_errors),
                     "reference_mass_plus": entry.reference_masses["plus"],
                     "reference_mass_minus": entry.reference_masses["minus"],
                     "predicted_mass_plus": entry.predicted_masses.get("plus", float("nan")),
                     "predicted_mass_minus": entry.predicted_masses.get("minus", float("nan")),
                     "mass_deviation": entry.metadata.get("mass_deviation", float("nan"))})
    report.add_file(store_artifact(folder, CONVERGENCE_CSV, rows, FileFormats.csv))

    errors = [entry.final_error for entry in report.entries]
    monotone = all(a > b for a, b in zip(errors[:-1], errors[1:]))
    if not monotone:
        report.flag("monotone_decay", "Final errors {} don't decrease with eps {}".format(errors, epsilons))
    report.summary.update({"slope_l2": fitted_slope(epsilons, errors),
                           "slope_sigma1": fitted_slope(epsilons, [e.sigma1_errors[-1] for e in report.entries]),
                           "monotone": monotone, "cache_hits": cache.hits})
    if config.run.kind == ADIABATIC and not report.summary["slope_l2"] >= MIN_ADIABATIC_SLOPE:
        report.flag("adiabatic_slope", "Fitted L2 slope {:.3f} below {} for an adiabatic packet".format(
            report.summary["slope_l2"], MIN_ADIABATIC_SLOPE))
    logger.info("Sweep over eps {}: L2 slope {:.3f}, monotone {}".format(epsilons, report.summary["slope_l2"],
                                                                          monotone))
    return report


def trajectory_rows(model: PotentialModel, traj: Trajectory, action=None):
    rows = []
    d = model.d
    for t, z in zip(traj.times, traj.states):
        mode = traj.mode_at(t)
        row = {"t": t}
        row.update({"q{}".format(i + 1): z[i] for i in range(d)})
        row.update({"p{}".format(i + 1): z[d + i] for i in range(d)})
        row.update({"energy": float(mode_energy(model, mode, z)), "gap": float(traj.gap_at(t)),
                    "mode_sign": mode.sign})
        if action is not None:
            row["S"] = float(action.at(t))
        rows.append(row)
    return rows


def classical(config: ExperimentConfig, folder, eigenframe=False, command=CLASSICAL) -> RunReport:
    """
    Trajectory of the [initial] phase point, continued on both modes when it meets the crossing set, with the
    crossing data in the report.
    """
    report = new_report(command, config)
    model = config.build_model()
    settings = config.settings()
    initial = config.initial
    if initial is None:
        raise config.error("The classical command needs an [initial] section.", section=INITIAL)
    mode = Mode(initial.mode)
    z0 = initial.phase_point(model.d)
    t_end = config.run.t_end
    traj = integrate_flow(model, mode, z0, initial.t0, t_end, **settings.flow_options())
    report.add_file(store_artifact(folder, TRAJECTORY_CSV, trajectory_rows(model, traj, action_along(traj)),
                                   FileFormats.csv))
    report.summary["energy_drift"] = traj.energy_drift()
    geom = traj.crossing
    if geom is not None:
        report.crossing = geom.as_dict()
        for out_mode in (Mode.plus, Mode.minus):
            if not t_end > geom.t_flat + settings.h_restart:
                break
            continued = continue_through_crossing(model, traj, out_mode, t_end, h_restart=settings.h_restart,
                                                  **settings.flow_options())
            report.add_file(store_artifact(folder, "{}_{}".format(TRAJECTORY_CSV, out_mode.value),
                                           trajectory_rows(model, continued), FileFormats.csv))
            report.summary["energy_drift_" + out_mode.value] = continued.energy_drift()
    if eigenframe and mode is not Mode.reference:
        y0 = eigenvector_at(model, mode, z0[:model.d], sign=initial.sign)
        frame = parallel_transport(model, traj, y0, h_limit=settings.h_limit, rtol=settings.tol_transport)
        times = [t for t in traj.times if frame.t_start <= t <= frame.t_end]
        rows = [dict({"t": t}, **{"y{}".format(i + 1): v for i, v in enumerate(frame.at(t))}) for t in times]
        report.add_file(store_artifact(folder, EIGENFRAME_CSV, rows, FileFormats.csv))
        report.summary["eigenframe_residual"] = frame.residual(model, traj)
    return report


def _oracle_columns(near, doubled):
    return {"oracle_r": near.r, "oracle_s0": near.s0, "probability": near.probability, "predicted": near.predicted,
            "discrepancy": near.discrepancy, "discrepancy_2s0": doubled.discrepancy,
            "relative_error": abs(near.probability - near.predicted) / near.predicted,
            "relative_phase": near.relative_phase if near.relative_phase is not None else float("nan")}


def lz_scatter(config: ExperimentConfig, folder, eta2_grid=None, command=LZ_SCATTER) -> RunReport:
    """
    One table of the transition coefficients a, b on an eta2 grid. Rows of the oracle eta2 values also carry the
    oracle transition probability at s0 and its discrepancies at s0 and 2 s0; these are nan on the other rows.
    """
    report = new_report(command, config)
    run = config.run
    oracle = []
    for value in run.oracle_eta2:
        oracle.append((float(value), [lz_transition(value, r=run.oracle_r, s0=s0)
                                      for s0 in (run.oracle_s0, 2.0 * run.oracle_s0)]))

    grid = np.asarray(run.eta2_values(eta2_grid), dtype=float)
    extra = [value for value, _ in oracle if not np.any(np.isclose(grid, value))]
    eta2 = np.sort(np.concatenate([grid, extra]))
    a = np.asarray(coeff_a(eta2))
    b = np.asarray(coeff_b(eta2))
    unitarity = a ** 2 + np.abs(b) ** 2
    blank = {k: float("nan") for k in _oracle_columns(*oracle[0][1])} if oracle else {}
    rows = []
    for e, x, y, u in zip(eta2, a, b, unitarity):
        row = {"eta2": e, "a": x, "re_b": y.real, "im_b": y.imag, "unitarity": u}
        matches = [transitions for value, transitions in oracle if np.isclose(value, e)]
        row.update(_oracle_columns(*matches[0]) if matches else blank)
        rows.append(row)
    report.add_file(store_artifact(folder, LZ_CSV, rows, FileFormats.csv))
    defect = float(np.max(np.abs(unitarity - 1.0)))
    report.summary["unitarity_defect"] = defect
    if defect > TOL_LZ:
        report.flag("lz_unitarity", "Largest |a^2 + |b|^2 - 1| = {:.2e} exceeds {:.0e}".format(defect, TOL_LZ))

    if oracle:
        report.summary["oracle_relative_error"] = max(_oracle_columns(*t)["relative_error"] for _, t in oracle)
    ratios = [near.discrepancy / doubled.discrepancy for _, (near, doubled) in oracle if doubled.discrepancy > 0]
    if ratios:
        report.summary["discrepancy_ratio"] = float(np.mean(ratios))
    return report


def smooth_paths(d):
    """
    Free, harmonic and smooth time dependent Hessian paths of the Gaussian oracle checks.
    """

    def varying(t):
        return (1.0 + 0.5 * np.sin(t)) * np.eye(d) + 0.2 * np.cos(t) * (np.ones((d, d)) - np.eye(d))

    return {"free": HessianPath.constant(np.zeros((d, d))), "harmonic": HessianPath.constant(np.eye(d)),
            "varying": HessianPath(d, varying)}


def profile_test(config: ExperimentConfig, folder) -> RunReport:
    """
    Checks of the profile module on the [initial] packet: Cauchy rate of the compensated profile at the crossing,
    growth of the Sigma1 norm, mass drift and the grid evolution against the Gaussian oracle on smooth paths.
    """
    report = new_report(PROFILE_TEST, config)
    model = config.build_model()
    settings = config.settings()
    packet = config.packets(model)[0]
    traj = integrate_flow(model, packet.mode, packet.z0, packet.t0, config.run.t_end, **settings.flow_options())
    if traj.crossing is None:
        raise NoCrossing("The {} flow doesn't meet the crossing set before t_end = {}.".format(
            Mode(packet.mode).value, config.run.t_end))
    geom = traj.crossing
    path = HessianPath.from_trajectory(model, traj)
    u0 = packet.profile
    trace = compensated_trace(path, u0, dt=settings.dt, tau_switch=settings.tau_switch,
                              h_extract=settings.h_extract)
    rows = [{"tau": tau, "distance": dist, "sigma1": norm}
            for tau, dist, norm in zip(trace.taus, trace.distances, trace.sigma_norms)]
    report.add_file(store_artifact(folder, PROFILE_TRACE_CSV, rows, FileFormats.csv))
    exponent, _ = cauchy_rate(trace.taus, trace.distances, log_power=1.0)
    free_exponent, log_exponent = cauchy_rate(trace.taus, trace.distances)
    drift = abs(trace.limit.mass() - u0.mass()) / (geom.t_flat - packet.t0)
    report.crossing = geom.as_dict()
    report.summary.update({"cauchy_exponent": exponent, "cauchy_free_exponent": free_exponent,
                           "cauchy_log_exponent": log_exponent,
                           "sigma_growth": sigma_growth(trace.taus, trace.sigma_norms), "l2_drift": drift})
    if exponent < MIN_CAUCHY_EXPONENT:
        report.flag("cauchy_rate", "Compensated Cauchy exponent {:.3f} below {}".format(
            exponent, MIN_CAUCHY_EXPONENT))
    if drift > MAX_L2_DRIFT:
        report.flag("l2_drift", "Profile mass drift {:.2e} per unit time exceeds {:.0e}".format(drift, MAX_L2_DRIFT))

    template = gaussian_profile(model.d, extent=u0.extent, points=u0.points)
    a0 = 1j * np.eye(model.d)
    oracle_rows = []
    for index, (name, smooth) in enumerate(sorted(smooth_paths(model.d).items())):
        evolved = evolve_profile(smooth, template, 1.0, dt=settings.dt, tau_switch=settings.tau_switch,
                                 tol_shell=settings.tol_shell)
        a1, c1 = gaussian_oracle(smooth, a0, gaussian_amplitude(a0.imag), 0.0, 1.0)
        distance = evolved.distance(gaussian_grid(template, a1, amplitude=c1, time=1.0))
        report.summary["gaussian_" + name] = distance
        oracle_rows.append({"path": index, "distance": distance})
        if distance > MAX_ORACLE_DISTANCE:
            report.flag("gaussian_oracle", "Grid and Gaussian oracle differ by {:.2e} on the {} path".format(
                distance, name))
    report.add_file(store_artifact(folder, PROFILE_CSV, oracle_rows, FileFormats.csv))
    return report


def run(command, config: ExperimentConfig, out=None, n_jobs=1, eigenframe=False, eta2_grid=None) -> RunReport:
    """
    Run a command, write report.json and track the run when [run] track is set.
    """
    folder = output_folder(config, out)
    if command == SIMULATE:
        report = simulate(config, folder, n_jobs=n_jobs, eta2_grid=eta2_grid)
    elif command == SWEEP:
        report = sweep(config, folder, n_jobs=n_jobs)
    elif command == CLASSICAL:
        report = classical(config, folder, eigenframe=eigenframe)
    elif command == LZ_SCATTER:
        report = lz_scatter(config, folder, eta2_grid=eta2_grid)
    elif command == PROFILE_TEST:
        report = profile_test(config, folder)
    else:
        raise config.error("Unknown command {}.".format(command))
    if config.run.track:
        from pyconic.app.backends.mlflow import track_run
        track_run(report, config, folder)
    report.add_file(report.write(folder))
    return report
