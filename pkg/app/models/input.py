"""Input models: physical parameters, filters, sweeps and run configuration."""

from enum import Enum
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, model_validator


class SystemParams(BaseModel):
    """Rates and couplings of the linearized three-mode model.

    All rates are angular frequencies in one common unit; populations are
    dimensionless thermal occupations of the input baths.
    """

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    kappa1: float = Field(description="Cavity-1 amplitude decay rate", gt=0.0)
    kappa2: float = Field(description="Cavity-2 amplitude decay rate", gt=0.0)
    gamma: float = Field(description="Mechanical decay rate", gt=0.0)
    g1: float = Field(description="Beam-splitter coupling to cavity 1", ge=0.0)
    g2: float = Field(description="Parametric coupling to cavity 2", ge=0.0)
    n_m: float = Field(default=0.0, description="Mechanical bath population", ge=0.0)
    n1: float = Field(default=0.0, description="Cavity-1 bath population", ge=0.0)
    n2: float = Field(default=0.0, description="Cavity-2 bath population", ge=0.0)

    @property
    def kappa(self) -> float:
        """Reference cavity decay used to scale frequencies (cavity 1)."""
        return self.kappa1

    def replace(self, **changes: float) -> "SystemParams":
        """Return a validated copy with some fields changed."""
        return SystemParams.model_validate({**self.model_dump(), **changes})


class FilterSpec(BaseModel):
    """Rectangle filter defining one filtered output mode."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    center: float = Field(default=0.0, description="Filter center frequency (rotating frame)")
    bandwidth: float = Field(description="Filter bandwidth sigma", gt=0.0)
    delay: float = Field(default=0.0, description="Emission time tau of mode 1")

    @property
    def lower(self) -> float:
        return self.center - 0.5 * self.bandwidth

    @property
    def upper(self) -> float:
        return self.center + 0.5 * self.bandwidth

    def replace(self, **changes: float) -> "FilterSpec":
        """Return a validated copy with some fields changed."""
        return FilterSpec.model_validate({**self.model_dump(), **changes})


class AnalyticInputs(BaseModel):
    """Symbols of the equal-decay closed forms."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    kappa: float = Field(description="Common cavity decay rate", gt=0.0)
    sigma: float = Field(description="Filter bandwidth", gt=0.0)
    g1: float = Field(description="Coupling G1", gt=0.0)
    g2: Optional[float] = Field(default=None, description="Coupling G2, when needed", gt=0.0)

    def require_g2(self) -> float:
        if self.g2 is None:
            raise ValueError("this closed form needs g2")
        return self.g2


class DelayMode(str, Enum):
    """How the delay tau is chosen at each evaluation."""

    ZERO = "zero"
    ANALYTIC = "analytic"
    NUMERIC = "numeric"


class SweepVariable(str, Enum):
    G2_OVER_G1 = "g2_over_g1"
    G1_OVER_KAPPA = "g1_over_kappa"
    OMEGA_OVER_KAPPA = "omega_over_kappa"
    TAU = "tau"


class G2Rule(str, Enum):
    """Closed-form choice of G2 recomputed at every sweep point."""

    EQ6 = "eq6"
    EQ7 = "eq7"
    EQ9 = "eq9"
    EQUAL = "equal"


class SweepSpec(BaseModel):
    """One-dimensional sweep over the full pipeline."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    variable: SweepVariable
    lo: float = Field(description="First swept value (inclusive)")
    hi: float = Field(description="Last swept value (inclusive)")
    points: int = Field(default=201, description="Number of points", ge=2)
    log_spacing: bool = Field(default=False, description="Geometric instead of linear spacing")
    params: SystemParams = Field(description="Values of all non-swept system quantities")
    filter: FilterSpec = Field(description="Values of all non-swept filter quantities")
    delay_mode: DelayMode = Field(default=DelayMode.ZERO)
    g2_rule: Optional[G2Rule] = Field(
        default=None, description="Recompute G2 from a closed form at every point"
    )

    @model_validator(mode="after")
    def check_range(self) -> "SweepSpec":
        if not self.lo < self.hi:
            raise ValueError(f"sweep range needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.log_spacing and self.lo <= 0.0:
            raise ValueError("log spacing needs a positive lower bound")
        if self.g2_rule is not None and self.variable is SweepVariable.G2_OVER_G1:
            raise ValueError("g2_rule cannot be combined with a g2_over_g1 sweep")
        return self

    def values(self) -> np.ndarray:
        """Swept values, endpoints inclusive."""
        if self.log_spacing:
            return np.geomspace(self.lo, self.hi, self.points)
        return np.linspace(self.lo, self.hi, self.points)


# Run configuration, in the dimensionless units of the config file:
# gamma is the rate unit, kappa is given in units of gamma, every other rate in
# units of kappa and every delay in units of 1/kappa.

G2Choice = Union[NonNegativeFloat, Literal["eq6", "eq7", "eq9", "equal"]]
DelayChoice = Union[float, Literal["eq5", "numeric"]]
FigureId = Literal["2a", "2b", "2c", "3a", "3b", "3c"]


class ParamsSection(BaseModel):
    """``[params]`` section of a run config."""

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    gamma: float = Field(default=1.0, description="Mechanical decay (the rate unit)", gt=0.0)
    kappa: float = Field(default=1e5, description="Cavity decay in units of gamma", gt=0.0)
    kappa1: float = Field(default=1.0, description="Cavity-1 decay in units of kappa", gt=0.0)
    kappa2: float = Field(default=1.0, description="Cavity-2 decay in units of kappa", gt=0.0)
    g1: float = Field(default=10.0, description="G1 in units of kappa", ge=0.0)
    g2: G2Choice = Field(default="eq6", description="G2 in units of kappa, or a closed-form rule")
    n_m: float = Field(default=0.0, ge=0.0)
    n1: float = Field(default=0.0, ge=0.0)
    n2: float = Field(default=0.0, ge=0.0)

    @property
    def kappa_abs(self) -> float:
        return self.kappa * self.gamma

    def to_system(self, g2: Optional[float] = None) -> SystemParams:
        """Physical parameters; a rule-valued g2 must be resolved and passed in."""
        if g2 is None:
            if isinstance(self.g2, str):
                raise ValueError(f"g2 rule {self.g2!r} must be resolved before use")
            g2 = self.g2 * self.kappa_abs
        return SystemParams(
            kappa1=self.kappa1 * self.kappa_abs,
            kappa2=self.kappa2 * self.kappa_abs,
            gamma=self.gamma,
            g1=self.g1 * self.kappa_abs,
            g2=g2,
            n_m=self.n_m,
            n1=self.n1,
            n2=self.n2,
        )


class FilterSection(BaseModel):
    """``[filter]`` section of a run config."""

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    center: float = Field(default=0.0, description="Center frequency in units of kappa")
    bandwidth: float = Field(default=1.0, description="Bandwidth in units of kappa", gt=0.0)
    delay: DelayChoice = Field(default=0.0, description="Delay in units of 1/kappa, eq5 or numeric")

    def to_filter(self, kappa: float, delay: Optional[float] = None) -> FilterSpec:
        if delay is None:
            delay = 0.0 if isinstance(self.delay, str) else self.delay / kappa
        return FilterSpec(center=self.center * kappa, bandwidth=self.bandwidth * kappa, delay=delay)


class SweepSection(BaseModel):
    """``[sweep]`` section of a run config; tau bounds are in units of 1/kappa."""

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    variable: SweepVariable
    lo: float
    hi: float
    points: int = Field(default=201, ge=2)
    log_spacing: bool = False
    delay_mode: DelayMode = DelayMode.ZERO
    g2_rule: Optional[G2Rule] = None

    def to_spec(self, params: SystemParams, filter_spec: FilterSpec, kappa: float) -> SweepSpec:
        scale = 1.0 / kappa if self.variable is SweepVariable.TAU else 1.0
        return SweepSpec(
            variable=self.variable,
            lo=self.lo * scale,
            hi=self.hi * scale,
            points=self.points,
            log_spacing=self.log_spacing,
            params=params,
            filter=filter_spec,
            delay_mode=self.delay_mode,
            g2_rule=self.g2_rule,
        )


class RunMode(str, Enum):
    POINT = "point"
    SWEEP = "sweep"
    OPTIMIZE = "optimize"
    FIGURE = "figure"


_ALWAYS = {"mode", "output", "emit_svg"}
_REQUIRED = {
    RunMode.POINT: set(),
    RunMode.SWEEP: {"sweep"},
    RunMode.OPTIMIZE: set(),
    RunMode.FIGURE: {"figure_id"},
}
_OPTIONAL = {
    RunMode.POINT: {"params", "filter"},
    RunMode.SWEEP: {"params", "filter"},
    RunMode.OPTIMIZE: {"params", "filter", "delay_mode"},
    RunMode.FIGURE: {"params", "points"},
}


class RunConfig(BaseModel):
    """A complete CLI run; only the sections the mode uses may be present."""

    model_config = ConfigDict(extra="forbid")

    mode: RunMode
    params: ParamsSection = Field(default_factory=ParamsSection)
    filter: FilterSection = Field(default_factory=FilterSection)
    sweep: Optional[SweepSection] = None
    figure_id: Optional[FigureId] = None
    delay_mode: Optional[DelayMode] = None
    points: Optional[int] = Field(default=None, description="Points per figure curve", ge=2)
    output: Path = Field(default=Path("results"), description="Output directory")
    emit_svg: bool = Field(default=True, description="Write an SVG next to every CSV")

    @model_validator(mode="after")
    def check_mode_fields(self) -> "RunConfig":
        present = set(self.model_fields_set)
        missing = sorted(_REQUIRED[self.mode] - present)
        if missing:
            raise ValueError(f"mode {self.mode.value!r} requires: {', '.join(missing)}")
        allowed = _ALWAYS | _REQUIRED[self.mode] | _OPTIONAL[self.mode]
        extraneous = sorted(present - allowed)
        if extraneous:
            raise ValueError(f"mode {self.mode.value!r} does not accept: {', '.join(extraneous)}")
        return self

    def echo(self) -> str:
        """Single-line JSON that reloads with ``RunConfig.model_validate_json``."""
        return self.model_dump_json(exclude_unset=True)
