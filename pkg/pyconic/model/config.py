"""
Schema of the experiment files. Every section is a pydantic model rejecting unknown keys.
"""
from typing import Dict, List, Optional, Tuple

import numpy as np
import pydantic
from pydantic import BaseModel, Extra, Field, PrivateAttr, ValidationError

from pyconic import logger
from pyconic.ansatz.grid import PhysicalGrid
from pyconic.ansatz.pipeline import AnsatzSettings, PacketData
from pyconic.exceptions import ConfigValidationError, ConicValidationError
from pyconic.potential.eigen import Mode
from pyconic.potential.models import PotentialModel, build_model, model_catalogue
from pyconic.profile.grid import ProfileGrid, gaussian_profile
from pyconic.transport.frames import eigenvector_at
from pyconic.utils.util import dict_merge
from pyconic.variables import (ADIABATIC, ATOL_ODE, BETA, CLASSICAL_ONLY, CROSSING_PAIR, CROSSING_SINGLE,
                               DEFAULT_EXPERIMENT_NAME, DELTA_EXPONENT, DT_FRACTION, ETA2_GRID, H_EXTRACT, H_LIMIT,
                               H_RESTART, INITIAL, INITIAL_PLUS, LINEAR_ISOTROPIC, LZ_TABLE, MINUS, MODEL, ORACLE_ETA2,
                               ORACLE_S0, PHYSICAL_EXTENT, PLUS, PROFILE_DT, PROFILE_EXTENT, PROFILE_POINTS, REFERENCE,
                               RUN, SECTIONS, TAU_SWITCH, TILTED, TOL_CROSS, TOL_GAP, TOL_GRAZE, TOL_MEET, TOL_NONDEG,
                               TOL_ODE, TOL_SHELL, TOL_TRANSPORT)

KINDS = (ADIABATIC, CROSSING_SINGLE, CROSSING_PAIR, LZ_TABLE, CLASSICAL_ONLY)
PROFILES = ("gaussian",)
PACKET_KINDS = (ADIABATIC, CROSSING_SINGLE, CROSSING_PAIR)


class Section(BaseModel):
    class Config:
        extra = Extra.forbid


class ModelSection(Section):
    """
    [model]: a catalogue model and its coefficients. Polynomial coefficients follow
    v(x) = v_const + v_grad.x + 1/2 x.v_hess x and w_i(x) = w_const_i + w_jac_i.x + 1/2 x.w_hess_i x.
    """
    name: str = LINEAR_ISOTROPIC
    dimension: int = 2
    kappa: Optional[List[float]] = None
    gradient_matrix: Optional[List[List[float]]] = None
    offset: Optional[List[float]] = None
    v_const: float = 0.0
    v_grad: Optional[List[float]] = None
    v_hess: Optional[List[List[float]]] = None
    w_const: Optional[List[float]] = None
    w_jac: Optional[List[List[float]]] = None
    w_hess: Optional[List[List[List[float]]]] = None

    @pydantic.validator("name")
    def known_model(cls, v):
        if v not in model_catalogue:
            raise ValueError("unknown model {}, known models are {}".format(v, ", ".join(sorted(model_catalogue))))
        return v

    @pydantic.validator("dimension")
    def positive_dimension(cls, v):
        if v < 1:
            raise ValueError("the dimension has to be positive")
        return v

    def parameters(self):
        if self.name == LINEAR_ISOTROPIC:
            return {"dimension": self.dimension}
        if self.name == TILTED:
            return {"kappa": self.kappa, "gradient_matrix": self.gradient_matrix, "offset": self.offset}
        coefficients = {k: getattr(self, k) for k in ("v_grad", "v_hess", "w_const", "w_jac", "w_hess")
                        if getattr(self, k) is not None}
        return dict(dimension=self.dimension, v_const=self.v_const, **coefficients)


class InitialSection(Section):
    """
    [initial] and [initial.plus]: phase point, mode and Gaussian profile
    c exp(-1/2 W (y - y0).(y - y0) + i k0.(y - y0)) of a packet. The eigenvector is chosen with its
    largest component carrying `sign` unless y0 is given.
    """
    mode: str = MINUS
    t0: float = 0.0
    z0: List[float]
    profile: str = "gaussian"
    width: Optional[List[List[float]]] = None
    center: Optional[List[float]] = None
    momentum: Optional[List[float]] = None
    extent: float = PROFILE_EXTENT
    points: int = PROFILE_POINTS
    sign: int = 1
    y0: Optional[List[float]] = None

    @pydantic.validator("mode")
    def known_mode(cls, v):
        if v not in (PLUS, MINUS, REFERENCE):
            raise ValueError("mode has to be one of {}, {}, {}".format(PLUS, MINUS, REFERENCE))
        return v

    @pydantic.validator("profile")
    def known_profile(cls, v):
        if v not in PROFILES:
            raise ValueError("profile has to be one of {}".format(", ".join(PROFILES)))
        return v

    @pydantic.validator("sign")
    def unit_sign(cls, v):
        if v not in (-1, 1):
            raise ValueError("sign has to be 1 or -1")
        return v

    @pydantic.validator("extent")
    def positive_extent(cls, v):
        if not v > 0:
            raise ValueError("extent has to be positive")
        return v

    def phase_point(self, d) -> np.ndarray:
        z0 = np.asarray(self.z0, dtype=float)
        if z0.shape != (2 * d,):
            raise ConicValidationError("z0 needs {} entries for a model of dimension {}, got {}.".format(
                2 * d, d, len(self.z0)))
        return z0

    def profile_grid(self, d) -> ProfileGrid:
        a = None if self.width is None else 1j * np.asarray(self.width, dtype=float)
        return gaussian_profile(d, a_matrix=a, center=self.center, momentum=self.momentum, extent=self.extent,
                                points=self.points, time=self.t0, mode=self.mode)

    def packet(self, model: PotentialModel) -> PacketData:
        z0 = self.phase_point(model.d)
        if self.y0 is not None:
            y0 = np.asarray(self.y0, dtype=float)
        else:
            y0 = eigenvector_at(model, self.mode, z0[:model.d], sign=self.sign)
        return PacketData(mode=Mode(self.mode), t0=self.t0, z0=z0, profile=self.profile_grid(model.d), y0=y0)


class RunSection(Section):
    """
    [run]: kind, final time, eps list (descending), snapshot times and the output options.
    """
    kind: str = CROSSING_SINGLE
    t_end: float = 1.0
    epsilons: List[float] = Field(default_factory=lambda: [0.02, 0.01, 0.005])
    times: Optional[List[float]] = None
    delta_exponent: float = DELTA_EXPONENT
    beta: float = BETA
    out: Optional[str] = None
    track: bool = False
    experiment: str = DEFAULT_EXPERIMENT_NAME
    eta2_grid: Tuple[float, float, float] = ETA2_GRID
    oracle_eta2: List[float] = Field(default_factory=lambda: list(ORACLE_ETA2))
    oracle_r: float = 1.0
    oracle_s0: float = ORACLE_S0

    @pydantic.validator("kind")
    def known_kind(cls, v):
        if v not in KINDS:
            raise ValueError("kind has to be one of {}".format(", ".join(KINDS)))
        return v

    @pydantic.validator("epsilons")
    def descending_epsilons(cls, v):
        if not v:
            raise ValueError("at least one eps is needed")
        if any(e <= 0 for e in v):
            raise ValueError("eps values have to be positive")
        if any(a <= b for a, b in zip(v[:-1], v[1:])):
            raise ValueError("eps values have to be strictly descending")
        return v

    @pydantic.validator("eta2_grid")
    def valid_eta2_grid(cls, v):
        if v[2] <= 0 or v[1] < v[0]:
            raise ValueError("eta2_grid is (start, stop, step) with start <= stop and a positive step")
        return v

    @pydantic.validator("oracle_r", "oracle_s0")
    def positive(cls, v):
        if not v > 0:
            raise ValueError("has to be positive")
        return v

    def eta2_values(self, grid: Optional[Tuple[float, float, float]] = None):
        start, stop, step = grid or self.eta2_grid
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return start + step * np.arange(count)


class GridSection(Section):
    """
    [grid]: physical box [-extent, extent)^d with `points` per axis (resolving eps and the momentum when missing),
    the reference time step (eps / 20 when missing) and the profile time step.
    """
    extent: float = PHYSICAL_EXTENT
    points: Optional[int] = None
    dt: Optional[float] = None
    p_max: Optional[float] = None
    profile_dt: float = PROFILE_DT

    @pydantic.validator("extent", "profile_dt")
    def positive(cls, v):
        if not v > 0:
            raise ValueError("has to be positive")
        return v

    def physical(self, d, epsilon, p_max=0.0) -> PhysicalGrid:
        p_max = self.p_max if self.p_max is not None else p_max
        if self.points is None:
            grid = PhysicalGrid.resolving(d, epsilon, extent=self.extent, p_max=p_max)
            logger.info("Using {} points per axis for eps = {}".format(grid.points, epsilon))
            return grid
        grid = PhysicalGrid(d, epsilon, extent=self.extent, points=self.points)
        grid.check_resolution(p_max)
        return grid

    def reference_dt(self, epsilon):
        return self.dt if self.dt is not None else DT_FRACTION * epsilon


class ToleranceSection(Section):
    tol_gap: float = TOL_GAP
    tol_nondeg: float = TOL_NONDEG
    tol_ode: float = TOL_ODE
    atol_ode: float = ATOL_ODE
    tol_cross: float = TOL_CROSS
    tol_graze: float = TOL_GRAZE
    h_restart: float = H_RESTART
    tol_transport: float = TOL_TRANSPORT
    h_limit: float = H_LIMIT
    tau_switch: float = TAU_SWITCH
    h_extract: float = H_EXTRACT
    tol_shell: float = TOL_SHELL
    tol_meet: float = TOL_MEET

    @pydantic.validator("*")
    def positive(cls, v):
        if not v > 0:
            raise ValueError("tolerances have to be positive")
        return v


class ExperimentConfig(Section):
    model: ModelSection = Field(default_factory=ModelSection)
    initial: Optional[InitialSection] = None
    initial_plus: Optional[InitialSection] = Field(None, alias=INITIAL_PLUS)
    run: RunSection = Field(default_factory=RunSection)
    grid: GridSection = Field(default_factory=GridSection)
    tolerances: ToleranceSection = Field(default_factory=ToleranceSection)

    _lines: Dict = PrivateAttr(default_factory=dict)
    _source: Optional[str] = PrivateAttr(default=None)

    class Config:
        extra = Extra.forbid
        allow_population_by_field_name = True

    @property
    def source(self):
        return self._source

    def error(self, message, section=None, key=None) -> ConfigValidationError:
        line = self._lines.get((section, key)) or self._lines.get((section, None))
        return ConfigValidationError(message, section=section, key=key, line=line)

    def build_model(self) -> PotentialModel:
        try:
            return build_model(self.model.name, **self.model.parameters())
        except ConicValidationError as e:
            raise self.error(str(e), section=MODEL)

    def settings(self) -> AnsatzSettings:
        return AnsatzSettings.from_tolerances(self.tolerances.dict(), dt=self.grid.profile_dt,
                                              delta_exponent=self.run.delta_exponent)

    def packets(self, model: PotentialModel) -> Tuple[PacketData, Optional[PacketData]]:
        """
        Packet of [initial] and, for pair runs, of [initial.plus].
        """
        if self.initial is None:
            raise self.error("The run needs an [{}] section.".format(INITIAL), section=INITIAL)
        try:
            first = self.initial.packet(model)
            second = self.initial_plus.packet(model) if self.initial_plus is not None else None
        except ConicValidationError as e:
            raise self.error(str(e), section=INITIAL)
        return first, second

    def check_kind(self):
        """
        Cross section consistency of the run kind.
        """
        kind = self.run.kind
        t0 = self.initial.t0 if self.initial is not None else 0.0
        if kind in PACKET_KINDS + (CLASSICAL_ONLY,) and self.initial is None:
            raise self.error("Runs of kind {} need an [{}] section.".format(kind, INITIAL), section=RUN, key="kind")
        if kind in (CROSSING_SINGLE, CROSSING_PAIR) and self.initial.mode != MINUS:
            raise self.error("Runs of kind {} start the [{}] packet on the minus mode.".format(kind, INITIAL),
                             section=INITIAL, key="mode")
        if kind == ADIABATIC and self.initial.mode == REFERENCE:
            raise self.error("Adiabatic runs start on the plus or the minus mode.", section=INITIAL, key="mode")
        if kind == CROSSING_PAIR:
            if self.initial_plus is None:
                raise self.error("Pair runs need an [{}] section.".format(INITIAL_PLUS), section=RUN, key="kind")
            if self.initial_plus.mode != PLUS:
                raise self.error("The [{}] packet starts on the plus mode.".format(INITIAL_PLUS),
                                 section=INITIAL_PLUS, key="mode")
        if kind != LZ_TABLE and not self.run.t_end > t0:
            raise self.error("t_end = {} has to follow t0 = {}.".format(self.run.t_end, t0), section=RUN, key="t_end")
        return self


def _locate(loc) -> Tuple[Optional[str], Optional[str]]:
    section = loc[0] if loc and isinstance(loc[0], str) else None
    key = loc[1] if len(loc) > 1 and isinstance(loc[1], str) else None
    if section == "initial_plus":
        section = INITIAL_PLUS
    return section, key


def config_from_dict(data: dict, lines: Optional[dict] = None, source: Optional[str] = None) -> ExperimentConfig:
    """
    Validate parsed sections into an ExperimentConfig.
    :param data: Dict section -> dict key -> value
    :param lines: Line numbers (section, key) -> line for the diagnostics
    :raises ConfigValidationError: On unknown sections or keys and invalid values
    """
    lines = lines or {}
    for section in data:
        if section not in SECTIONS:
            raise ConfigValidationError("Unknown section, known sections are {}.".format(", ".join(SECTIONS)),
                                        section=section, line=lines.get((section, None)))
    try:
        config = ExperimentConfig.parse_obj(data)
    except ValidationError as e:
        error = e.errors()[0]
        section, key = _locate(error["loc"])
        raise ConfigValidationError(error["msg"], section=section, key=key,
                                    line=lines.get((section, key)) or lines.get((section, None)))
    config._lines = lines
    config._source = source
    return config.check_kind()


def load_config(path, overrides: Optional[dict] = None) -> ExperimentConfig:
    """
    Read and validate an experiment file.
    :param path: Path to the INI file
    :param overrides: Values replacing those of the file, as dict section -> dict key -> value
    :return: ExperimentConfig
    """
    from pyconic.arguments import config_lines, parse_configfile
    data = dict_merge(parse_configfile(path), overrides or {})
    config = config_from_dict(data, lines=config_lines(path), source=str(path))
    logger.info("Loaded experiment {} of kind {}".format(path, config.run.kind))
    return config


def default_config(kind=LZ_TABLE) -> ExperimentConfig:
    return config_from_dict({RUN: {"kind": kind}})
