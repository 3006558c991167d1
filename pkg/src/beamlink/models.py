"""
Data models for beamlink - laser vehicle-to-vehicle link simulation
All quantities are SI: meters, seconds, watts, radians.
"""

import math
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Iterator, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from beamlink.errors import TraceSupportError


def utc_now():
    """Get current UTC time"""
    return datetime.now(timezone.utc)


class StrictModel(BaseModel):
    """Immutable model that rejects unknown keys (typos in physics parameters)."""

    model_config = ConfigDict(extra="forbid", frozen=True)


# Enums for structured data
class StrategyKind(str, Enum):
    """Pointing compensation capability of the transmitter"""
    NONE = "none"
    STATIC = "static"
    DYNAMIC = "dynamic"

    @property
    def rank(self) -> int:
        return list(StrategyKind).index(self)


class QuantizerMode(str, Enum):
    """How signaled positions are digitised"""
    MID_RISE = "mid_rise"
    IDENTITY = "identity"


class SpotMode(str, Enum):
    """Spot size formula"""
    EXACT = "exact"
    FAR_FIELD = "far_field"


class PowerMethod(str, Enum):
    """Received power evaluation"""
    EXACT_INTEGRAL = "exact_integral"
    POINT_APPROX = "point_approx"


class PerturbationKind(str, Enum):
    """Source of a perturbation time series"""
    ZERO = "zero"
    DEFAULT = "default"
    AR = "ar"
    TRACE = "trace"


# ========================================
# Geometry Models
# ========================================

class VehicleStatic(StrictModel):
    """Rest geometry of a vehicle's FSO unit"""
    length_m: float = Field(4.5, gt=0, description="Vehicle length, lever arm is half of it")
    rest_lateral_m: float = Field(0.0, description="Lateral position at rest")
    rest_height_m: float = Field(1.4, gt=0, description="Height of the FSO unit at rest")


class VehicleState(StrictModel):
    """Instantaneous pose of a vehicle's FSO unit"""
    static: VehicleStatic
    t_s: float
    x_m: float
    y_m: float
    z_m: float = Field(description="Longitudinal position")
    dx_m: float = Field(description="Lateral perturbation")
    dy_m: float = Field(description="Vertical perturbation")

    @model_validator(mode="after")
    def _check_decomposition(self) -> "VehicleState":
        if self.x_m != self.static.rest_lateral_m + self.dx_m:
            raise ValueError("x_m must equal rest_lateral_m + dx_m")
        if self.y_m != self.static.rest_height_m + self.dy_m:
            raise ValueError("y_m must equal rest_height_m + dy_m")
        return self

    @classmethod
    def at(cls, static: VehicleStatic, t_s: float, z_m: float, dx_m: float = 0.0, dy_m: float = 0.0) -> "VehicleState":
        """Build a state from the rest geometry and the current perturbations."""
        return cls(
            static=static,
            t_s=t_s,
            x_m=static.rest_lateral_m + dx_m,
            y_m=static.rest_height_m + dy_m,
            z_m=z_m,
            dx_m=dx_m,
            dy_m=dy_m,
        )


class PointingAngles(StrictModel):
    """Azimuth and elevation of v2 seen from v1"""
    azimuth_rad: float
    elevation_rad: float

    @field_validator("azimuth_rad", "elevation_rad")
    @classmethod
    def _in_range(cls, v: float) -> float:
        if not math.isfinite(v) or abs(v) >= math.pi / 2:
            raise ValueError("angle must be finite and within (-pi/2, pi/2)")
        return v


class RotationAngles(StrictModel):
    """Relative receiver rotation and the yaw/pitch it derives from"""
    beta_x_rad: float = Field(ge=0)
    beta_y_rad: float = Field(ge=0)
    yaw1_rad: float = 0.0
    yaw2_rad: float = 0.0
    pitch1_rad: float = 0.0
    pitch2_rad: float = 0.0


class Displacement(StrictModel):
    """Receiver offset from the beam axis"""
    dx_m: float = Field(allow_inf_nan=False)
    dy_m: float = Field(allow_inf_nan=False)


class LaserArray(StrictModel):
    """Circular array of MEMS-steered lasers, boresights symmetric about 0"""
    n_lasers: int = Field(5, ge=1)
    boresight_spacing_rad: float = Field(math.radians(20.0), gt=0)
    mems_range_rad: float = Field(math.radians(10.0), gt=0, description="Steering half-range per element")

    def boresights(self) -> np.ndarray:
        offsets = np.arange(self.n_lasers) - (self.n_lasers - 1) / 2.0
        return offsets * self.boresight_spacing_rad


# ========================================
# Dynamics Models
# ========================================

class Quantizer(StrictModel):
    """Uniform quantizer applied to signaled positions"""
    bits: int = Field(16, ge=1)
    range_m: float = Field(0.1, gt=0, description="Symmetric full scale")
    mode: QuantizerMode = QuantizerMode.MID_RISE

    @property
    def step_m(self) -> float:
        return 2.0 * self.range_m / 2**self.bits


class CompensationStrategy(StrictModel):
    """Compensation capability plus the signaling channel used by the dynamic case"""
    kind: StrategyKind = StrategyKind.DYNAMIC
    delta_t_s: float = Field(0.02, gt=0, description="Signaling period")
    quantizer: Quantizer = Field(default_factory=Quantizer)


class ARModel(StrictModel):
    """Autoregressive perturbation generator x[n] = sum a_k x[n-k] + e[n]"""
    order: int = Field(ge=0)
    coefficients: List[float]
    noise_std: float = Field(ge=0, description="Innovation standard deviation")
    sample_rate_hz: float = Field(gt=0)

    @model_validator(mode="after")
    def _check_stationary(self) -> "ARModel":
        if self.order != len(self.coefficients):
            raise ValueError("order must equal the number of coefficients")
        roots = self.roots()
        if roots.size and not np.all(np.abs(roots) < 1.0):
            raise ValueError(f"model is not stationary, max |root| = {np.abs(roots).max():.6f}")
        return self

    def roots(self) -> np.ndarray:
        """Roots of z^p - a1 z^(p-1) - ... - a_p."""
        return np.roots(np.concatenate(([1.0], -np.asarray(self.coefficients, dtype=float))))

    @property
    def warmup(self) -> int:
        return 100 * self.order


class PerturbationTrace(BaseModel):
    """Uniformly sampled perturbation time series (immutable)"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    sample_rate_hz: float = Field(gt=0)
    t0_s: float = 0.0
    samples: np.ndarray

    @field_validator("samples", mode="before")
    @classmethod
    def _as_array(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("samples must be a 1-D sequence with at least two values")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        arr.flags.writeable = False
        return arr

    @property
    def period_s(self) -> float:
        return 1.0 / self.sample_rate_hz

    @property
    def t_end_s(self) -> float:
        return self.t0_s + (self.samples.size - 1) / self.sample_rate_hz

    def times(self) -> np.ndarray:
        return self.t0_s + np.arange(self.samples.size) / self.sample_rate_hz

    def values_at(self, t_s) -> np.ndarray | float:
        """Linear interpolation, exact on the sample grid."""
        t = np.asarray(t_s, dtype=float)
        pos = (t - self.t0_s) * self.sample_rate_hz
        last = self.samples.size - 1
        if pos.size and (pos.min() < -1e-9 or pos.max() > last + 1e-9):
            raise TraceSupportError(
                f"time outside trace support [{self.t0_s}, {self.t_end_s}] s"
            )
        idx = np.floor(pos)
        frac = pos - idx
        snap = frac > 1.0 - 1e-9
        idx = np.where(snap, idx + 1, idx)
        frac = np.where(snap | (frac < 1e-9), 0.0, frac)
        idx = np.clip(idx, 0, last).astype(int)
        nxt = np.minimum(idx + 1, last)
        out = self.samples[idx] * (1.0 - frac) + self.samples[nxt] * frac
        return float(out) if out.ndim == 0 else out


class SignalingHistory(BaseModel):
    """Traces of v2's perturbations available to the signaling channel"""
    model_config = ConfigDict(frozen=True)

    x: PerturbationTrace
    y: PerturbationTrace


class PerturbationSource(StrictModel):
    """Where one perturbation axis comes from"""
    kind: PerturbationKind = PerturbationKind.ZERO
    ar_model: Optional[ARModel] = None
    trace_path: Optional[str] = None

    @model_validator(mode="after")
    def _check_fields(self) -> "PerturbationSource":
        if self.kind == PerturbationKind.AR and self.ar_model is None:
            raise ValueError("ar_model is required when kind is 'ar'")
        if self.kind == PerturbationKind.TRACE and not self.trace_path:
            raise ValueError("trace_path is required when kind is 'trace'")
        return self


class PerturbationSet(StrictModel):
    """Per vehicle and axis perturbation sources (platoon default: vertical only)"""
    v1_x: PerturbationSource = Field(default_factory=PerturbationSource)
    v1_y: PerturbationSource = Field(default_factory=lambda: PerturbationSource(kind=PerturbationKind.DEFAULT))
    v2_x: PerturbationSource = Field(default_factory=PerturbationSource)
    v2_y: PerturbationSource = Field(default_factory=lambda: PerturbationSource(kind=PerturbationKind.DEFAULT))

    @classmethod
    def zero(cls) -> "PerturbationSet":
        zero = PerturbationSource()
        return cls(v1_x=zero, v1_y=zero, v2_x=zero, v2_y=zero)


# ========================================
# Optical Models
# ========================================

class BeamParams(StrictModel):
    """TEM00 laser emission with its waist at the transmitter"""
    power_w: float = Field(1e-2, gt=0)
    wavelength_m: float = Field(1550e-9, gt=0)
    waist_x_m: float = Field(1e-3, gt=0)
    waist_y_m: float = Field(1e-3, gt=0)

    @model_validator(mode="after")
    def _check_paraxial(self) -> "BeamParams":
        if self.wavelength_m >= min(self.waist_x_m, self.waist_y_m) / 10.0:
            raise ValueError("paraxial model requires wavelength < waist / 10")
        return self


class SpotSize(StrictModel):
    """Beam radius (1/e^2 intensity) at distance z"""
    w_x_m: float
    w_y_m: float
    z_m: float
    mode: SpotMode = SpotMode.EXACT
    approximation_valid: bool = True


class Aperture(StrictModel):
    """Rectangular receiver collection area"""
    len_x_m: float = Field(1e-3, gt=0)
    len_y_m: float = Field(1e-3, gt=0)

    @property
    def area_m2(self) -> float:
        return self.len_x_m * self.len_y_m


class ReceiverParams(StrictModel):
    """PIN photodetection chain"""
    aperture: Aperture = Field(default_factory=Aperture)
    pd_area_m2: float = Field(1e-7, gt=0, description="Photodiode active area, not used by the SNR")
    responsivity_a_per_w: float = Field(0.8, gt=0)
    filter_center_m: float = Field(1550e-9, gt=0)
    filter_bw_m: float = Field(50e-9, gt=0)
    nep_w_per_sqrthz: float = Field(20e-12, gt=0)
    bandwidth_hz: float = Field(1e9, gt=0)


class SolarSpectrum(StrictModel):
    """Spectral irradiance samples (wavelength m, W/m^2/m)"""
    samples: List[Tuple[float, float]]

    @field_validator("samples")
    @classmethod
    def _check_samples(cls, v: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
        if len(v) < 2:
            raise ValueError("spectrum needs at least two samples")
        wl = np.array([s[0] for s in v])
        irr = np.array([s[1] for s in v])
        if np.any(np.diff(wl) <= 0):
            raise ValueError("wavelengths must be strictly increasing")
        if np.any(irr < 0) or not np.all(np.isfinite(irr)):
            raise ValueError("irradiance must be finite and non-negative")
        return v

    @property
    def wavelengths_m(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def irradiance(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])


# ========================================
# Scenario Models
# ========================================

REFERENCE_IB_W_PER_M2 = 5.58


def _default_z_list() -> List[float]:
    return [5.0 * k for k in range(1, 21)]


def _default_delta_grid() -> List[float]:
    return [k / 1000 for k in range(101)]


class ScenarioConfig(StrictModel):
    """Complete scenario; the defaults reproduce the reference parameter table"""
    vehicle1: VehicleStatic = Field(default_factory=lambda: VehicleStatic(rest_height_m=1.4))
    vehicle2: VehicleStatic = Field(default_factory=lambda: VehicleStatic(rest_height_m=1.7))
    beam: BeamParams = Field(default_factory=BeamParams)
    rx: ReceiverParams = Field(default_factory=ReceiverParams)
    strategy: CompensationStrategy = Field(default_factory=CompensationStrategy)
    sweep_strategies: List[StrategyKind] = Field(
        default_factory=lambda: list(StrategyKind), min_length=1
    )
    laser_array: LaserArray = Field(default_factory=LaserArray)
    z_list_m: List[float] = Field(default_factory=_default_z_list, min_length=1)
    p0_list_w: List[float] = Field(default_factory=lambda: [1e-3, 1e-2], min_length=1)
    delta_grid_m: List[float] = Field(default_factory=_default_delta_grid, min_length=1)
    delta_t_list_s: List[float] = Field(
        default_factory=lambda: [0.02, 0.05, 0.1, 0.2], min_length=1, description="Signaling periods of the signaling sweep"
    )
    duration_s: float = Field(200.0, gt=0)
    timestep_s: float = Field(1e-3, gt=0)
    seed: int = Field(0, ge=0)
    perturbations: PerturbationSet = Field(default_factory=PerturbationSet)
    i_b_w_per_m2: Optional[float] = Field(None, ge=0)
    spectrum_path: Optional[str] = None
    power_method: PowerMethod = PowerMethod.EXACT_INTEGRAL

    @field_validator("z_list_m", "p0_list_w", "delta_t_list_s")
    @classmethod
    def _positive(cls, v: List[float]) -> List[float]:
        if any(not math.isfinite(x) or x <= 0 for x in v):
            raise ValueError("values must be finite and > 0")
        return v

    @field_validator("delta_grid_m")
    @classmethod
    def _finite(cls, v: List[float]) -> List[float]:
        if any(not math.isfinite(x) for x in v):
            raise ValueError("values must be finite")
        return v

    @field_validator("sweep_strategies")
    @classmethod
    def _unique(cls, v: List[StrategyKind]) -> List[StrategyKind]:
        if len(set(v)) != len(v):
            raise ValueError("strategies must be unique")
        return v

    @model_validator(mode="after")
    def _check_scenario(self) -> "ScenarioConfig":
        if self.strategy.delta_t_s < self.timestep_s:
            raise ValueError("strategy.delta_t_s must be >= timestep_s")
        if min(self.delta_t_list_s) < self.timestep_s:
            raise ValueError("delta_t_list_s values must be >= timestep_s")
        if self.n_steps < 1:
            raise ValueError("duration_s must cover at least one timestep")
        if self.i_b_w_per_m2 is not None and self.spectrum_path is not None:
            raise ValueError("set only one of i_b_w_per_m2 and spectrum_path")
        return self

    @property
    def n_steps(self) -> int:
        return int(round(self.duration_s / self.timestep_s))


# ========================================
# Result Models
# ========================================

LINK_SAMPLE_FIELDS = (
    "t_s", "z_m", "p0_w", "dx_m", "dy_m", "beta_x_rad", "beta_y_rad", "p_r_w", "snr", "r_bit_per_s",
)


class LinkSample(StrictModel):
    """One timestep of link output"""
    t_s: float
    z_m: float
    p0_w: float
    dx_m: float
    dy_m: float
    beta_x_rad: float = Field(ge=0)
    beta_y_rad: float = Field(ge=0)
    p_r_w: float = Field(ge=0)
    snr: float = Field(ge=0)
    r_bit_per_s: float = Field(ge=0)


@dataclass(frozen=True)
class LinkSeries:
    """Columnar list of LinkSample, one array per field"""
    t_s: np.ndarray
    z_m: float
    p0_w: float
    dx_m: np.ndarray
    dy_m: np.ndarray
    beta_x_rad: np.ndarray
    beta_y_rad: np.ndarray
    p_r_w: np.ndarray
    snr: np.ndarray
    r_bit_per_s: np.ndarray

    def __len__(self) -> int:
        return int(self.t_s.size)

    def __iter__(self) -> Iterator[LinkSample]:
        columns = [self.column(name).tolist() for name in LINK_SAMPLE_FIELDS]
        for values in zip(*columns):
            yield LinkSample(**dict(zip(LINK_SAMPLE_FIELDS, values)))

    def column(self, name: str) -> np.ndarray:
        value = getattr(self, name)
        if np.ndim(value) == 0:
            return np.full(len(self), value, dtype=float)
        return value

    def _value(self, name: str, i: int) -> float:
        value = getattr(self, name)
        return float(value) if np.ndim(value) == 0 else float(value[i])

    def sample(self, i: int) -> LinkSample:
        return LinkSample(**{name: self._value(name, i) for name in LINK_SAMPLE_FIELDS})

    def to_samples(self) -> List[LinkSample]:
        return list(self)


class RateSummary(StrictModel):
    """Throughput statistics of one simulated run"""
    p0_w: float
    z_m: float
    mean_r_bps: float
    p5_r_bps: float
    p95_r_bps: float
    mean_pr_w: float

    @model_validator(mode="after")
    def _ordered(self) -> "RateSummary":
        if self.p5_r_bps > self.p95_r_bps:
            raise ValueError("p5 must not exceed p95")
        return self


class SweepRow(RateSummary):
    """Aggregate of one (strategy, P0, z) grid point"""
    strategy: StrategyKind


class SignalingRow(RateSummary):
    """Dynamic compensation at one signaling period and (P0, z) grid point"""
    delta_t_s: float
    overhead_bps: float = Field(description="Signaling traffic of the two position values")


class SweepResult(StrictModel):
    """All grid points of a sweep, sorted by (strategy, p0, z)"""
    rows: List[SweepRow]

    def row(self, strategy: StrategyKind, p0_w: float, z_m: float) -> SweepRow:
        for r in self.rows:
            if r.strategy == strategy and r.p0_w == p0_w and r.z_m == z_m:
                return r
        raise KeyError((strategy, p0_w, z_m))


class DisplacementRow(StrictModel):
    """Throughput under an imposed static displacement"""
    p0_w: float
    z_m: float
    delta_m: float
    r_bps: float


class RunManifest(StrictModel):
    """Provenance of a command's outputs"""
    config_hash: str
    seed: int
    tool_version: str
    timestamp: datetime = Field(default_factory=utc_now)
    outputs: List[str] = Field(default_factory=list)
