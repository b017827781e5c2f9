"""Output models: scattering data, moments, covariance matrices and run reports."""

import cmath
from enum import Enum
from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.models.input import DelayMode, FilterSpec, SweepSpec, SystemParams


class StabilityVerdict(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


def _frozen_array(value: np.ndarray, shape: tuple, dtype: type) -> np.ndarray:
    array = np.array(value, dtype=dtype)
    if array.shape != shape:
        raise ValueError(f"expected shape {shape}, got {array.shape}")
    array.setflags(write=False)
    return array


class ScatteringMatrix(BaseModel):
    """S(freq) mapping (d1_in, d2_in^dag, b_in) to (d1_out, d2_out^dag, b_out)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    freq: float = Field(description="Rotating-frame angular frequency")
    entries: np.ndarray = Field(description="3x3 complex matrix")

    @field_validator("entries", mode="before")
    @classmethod
    def freeze_entries(cls, v):
        return _frozen_array(v, (3, 3), complex)

    def row_identities(self) -> tuple[float, float]:
        """Left-hand sides of the two Bogoliubov row identities (both equal 1)."""
        s = np.abs(self.entries) ** 2
        return float(s[0, 0] - s[0, 1] + s[0, 2]), float(s[1, 1] - s[1, 0] - s[1, 2])


class MomentSet(BaseModel):
    """Second moments of the filtered output pair D1[w, sigma, tau], D2[-w, sigma, 0]."""

    model_config = ConfigDict(frozen=True)

    n1: float = Field(description="<D1^dag D1>", ge=0.0)
    n2: float = Field(description="<D2^dag D2>", ge=0.0)
    c12: complex = Field(description="<D1 D2>")
    m11: complex = Field(default=0j, description="<D1 D1>")
    m22: complex = Field(default=0j, description="<D2 D2>")
    x12: complex = Field(default=0j, description="<D1^dag D2>")
    comm1: float = Field(default=1.0, description="Band-averaged [D1, D1^dag]")
    comm2: float = Field(default=1.0, description="Band-averaged [D2, D2^dag]")

    def is_physical(self, rtol: float = 1e-9) -> bool:
        bound = (self.n1 + 1.0) * (self.n2 + 1.0)
        return abs(self.c12) ** 2 <= bound * (1.0 + rtol)

    def phase_rotated(self, phi: float) -> "MomentSet":
        """Moments after the local rotation D1 -> exp(i phi) D1."""
        u = cmath.exp(1j * phi)
        return self.model_copy(
            update={"c12": u * self.c12, "m11": u * u * self.m11, "x12": self.x12 / u}
        )

    def scaled_correlation(self, factor: float) -> "MomentSet":
        return self.model_copy(update={"c12": factor * self.c12})

    def as_report(self) -> Dict[str, object]:
        """JSON-friendly view with complex values split into parts."""
        data: Dict[str, object] = {}
        for name, value in self.model_dump().items():
            data[name] = [value.real, value.imag] if isinstance(value, complex) else value
        return data


class CovarianceMatrix(BaseModel):
    """Quadrature covariance matrix over (X1, P1, X2, P2); vacuum is I/2."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    entries: np.ndarray = Field(description="4x4 real symmetric matrix")

    @field_validator("entries", mode="before")
    @classmethod
    def freeze_entries(cls, v):
        array = _frozen_array(v, (4, 4), float)
        scale = max(1.0, float(np.abs(array).max()))
        if not np.allclose(array, array.T, rtol=0.0, atol=1e-12 * scale):
            raise ValueError("covariance matrix must be symmetric")
        return array

    @property
    def a(self) -> np.ndarray:
        return self.entries[:2, :2]

    @property
    def b(self) -> np.ndarray:
        return self.entries[2:, 2:]

    @property
    def c(self) -> np.ndarray:
        return self.entries[:2, 2:]


class EntanglementResult(BaseModel):
    """Logarithmic negativity of the filtered output pair."""

    model_config = ConfigDict(frozen=True)

    e_n: float = Field(description="Logarithmic negativity", ge=0.0)
    nu_minus: float = Field(description="Smallest partially transposed symplectic eigenvalue")
    moments: Optional[MomentSet] = Field(default=None, description="Moments the result came from")


class SweepRow(BaseModel):
    """Everything computed at one sweep point."""

    value: float
    g1: float
    g2: float
    tau: Optional[float] = None
    e_n: Optional[float] = None
    c12_abs: Optional[float] = None
    n1: Optional[float] = None
    n2: Optional[float] = None
    stability: StabilityVerdict
    annotations: List[str] = Field(default_factory=list)
    error: Optional[str] = None


class SweepResult(BaseModel):
    spec: SweepSpec
    rows: List[SweepRow]


class PointReport(BaseModel):
    """Single-point evaluation with the closed forms next to it."""

    params: SystemParams
    filter: FilterSpec
    stability: StabilityVerdict
    eigen_stable: bool
    cooperativities: tuple[float, float]
    result: EntanglementResult
    annotations: List[str] = Field(default_factory=list)
    predictions: Dict[str, Optional[float]] = Field(default_factory=dict)


class OptimizeReport(BaseModel):
    """Numeric optima next to the matching closed forms."""

    params: SystemParams
    filter: FilterSpec
    delay_mode: DelayMode
    g2_numeric: float
    e_n_numeric: float
    tau_numeric: Optional[float] = None
    predictions: Dict[str, Optional[float]] = Field(default_factory=dict)
    gaps: Dict[str, Optional[float]] = Field(default_factory=dict)
    annotations: List[str] = Field(default_factory=list)


class Curve(BaseModel):
    label: str
    column: str
    values: List[Optional[float]]
    style: Literal["solid", "dashed"] = "solid"
    analytic: bool = False


class Marker(BaseModel):
    label: str
    x: float
    y: Optional[float] = None


class FigureData(BaseModel):
    """Columns and overlays of one reproduced figure."""

    figure_id: str
    title: str
    x_label: str
    x_column: str
    y_label: str
    x: List[float]
    curves: List[Curve]
    markers: List[Marker] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)
