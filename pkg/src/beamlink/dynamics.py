"""
Vehicle dynamics - autoregressive stroke processes, the delayed and quantized
RF signaling channel, and perturbation trace files.
"""

import csv
import logging
import math
from functools import lru_cache
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike
from pydantic import ValidationError
from scipy.linalg import LinAlgError, solve_discrete_lyapunov, solve_toeplitz
from scipy.signal import lfilter

from beamlink.errors import (
    ConfigError,
    InsufficientHistoryError,
    NonStationaryModelError,
    OutputError,
    SingularSystemError,
)
from beamlink.models import ARModel, PerturbationTrace, Quantizer, QuantizerMode
from beamlink.settings import (
    DEFAULT_AR_ORDER,
    REFERENCE_DAMPING_PER_S,
    REFERENCE_DURATION_S,
    REFERENCE_FLOOR_STD_M,
    REFERENCE_RESONANCE_HZ,
    REFERENCE_SAMPLE_RATE_HZ,
    REFERENCE_SEED,
    REFERENCE_STD_M,
)

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("dy_m", "dx_m")


# ========================================
# Autoregressive processes
# ========================================

def ar_generate(model: ARModel, n: int, seed: int, t0_s: float = 0.0) -> PerturbationTrace:
    """
    Draw n samples of the AR process after discarding model.warmup samples.

    The output is a pure function of (model, n, seed, t0_s).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = np.random.default_rng(seed)
    warmup = model.warmup
    innovations = rng.normal(0.0, model.noise_std, n + warmup)
    denominator = np.concatenate(([1.0], -np.asarray(model.coefficients, dtype=float)))
    x = lfilter([1.0], denominator, innovations)
    return PerturbationTrace(sample_rate_hz=model.sample_rate_hz, t0_s=t0_s, samples=x[warmup:])


def ar_fit(trace: PerturbationTrace, order: int) -> ARModel:
    """
    Yule-Walker estimate of an AR(order) model.

    Uses the biased (1/n) autocovariance of the demeaned trace, which keeps the
    Toeplitz system positive definite and the fitted model stationary.
    """
    samples = np.asarray(trace.samples, dtype=float)
    if order < 1:
        raise ConfigError(f"order must be >= 1, got {order}")
    if samples.size < 10 * order:
        raise ConfigError(f"trace has {samples.size} samples, order {order} needs at least {10 * order}")
    x = samples - samples.mean()
    n = x.size
    auto_cov = np.array([np.dot(x[: n - lag], x[lag:]) / n for lag in range(order + 1)])
    scale = max(float(np.max(np.abs(samples))), np.finfo(float).tiny)
    if auto_cov[0] <= (1e-10 * scale) ** 2:
        raise SingularSystemError("trace has no variance, autocovariance system is singular")
    try:
        coefficients = solve_toeplitz(auto_cov[:-1], auto_cov[1:])
    except LinAlgError as err:
        raise SingularSystemError(f"autocovariance system is singular: {err}") from err
    innovation_var = auto_cov[0] - float(np.dot(auto_cov[1:], coefficients))
    if not np.all(np.isfinite(coefficients)) or not innovation_var > 0:
        raise SingularSystemError("autocovariance system is singular")
    try:
        return ARModel(
            order=order,
            coefficients=[float(c) for c in coefficients],
            noise_std=math.sqrt(innovation_var),
            sample_rate_hz=trace.sample_rate_hz,
        )
    except ValidationError as err:
        raise NonStationaryModelError(f"fitted model rejected: {err.errors()[0]['msg']}") from err


def stationary_variance(model: ARModel) -> float:
    """Process variance from the discrete Lyapunov equation of the companion form."""
    p = model.order
    if p == 0:
        return model.noise_std**2
    companion = np.zeros((p, p))
    companion[0, :] = model.coefficients
    companion[1:, :-1] = np.eye(p - 1)
    drive = np.zeros((p, p))
    drive[0, 0] = model.noise_std**2
    return float(solve_discrete_lyapunov(companion, drive)[0, 0])


def resonator_model(resonance_hz: float, damping_per_s: float, std_m: float, sample_rate_hz: float) -> ARModel:
    """AR(2) with a complex pole pair, scaled to the requested standard deviation."""
    radius = math.exp(-damping_per_s / sample_rate_hz)
    a1 = 2.0 * radius * math.cos(2.0 * math.pi * resonance_hz / sample_rate_hz)
    unit = ARModel(order=2, coefficients=[a1, -radius * radius], noise_std=1.0, sample_rate_hz=sample_rate_hz)
    return unit.model_copy(update={"noise_std": std_m / math.sqrt(stationary_variance(unit))})


@lru_cache(maxsize=1)
def reference_trace() -> PerturbationTrace:
    """Bundled synthetic vertical-stroke trace (deterministic)."""
    model = resonator_model(
        REFERENCE_RESONANCE_HZ, REFERENCE_DAMPING_PER_S, REFERENCE_STD_M, REFERENCE_SAMPLE_RATE_HZ
    )
    n = int(round(REFERENCE_DURATION_S * REFERENCE_SAMPLE_RATE_HZ)) + 1
    settle = int(round(10.0 * REFERENCE_SAMPLE_RATE_HZ / REFERENCE_DAMPING_PER_S))
    stroke_seed, floor_seed = np.random.SeedSequence(REFERENCE_SEED).generate_state(2)
    strokes = ar_generate(model, n + settle, int(stroke_seed)).samples[settle:]
    floor = np.random.default_rng(int(floor_seed)).normal(0.0, REFERENCE_FLOOR_STD_M, n)
    return PerturbationTrace(sample_rate_hz=REFERENCE_SAMPLE_RATE_HZ, t0_s=0.0, samples=strokes + floor)


@lru_cache(maxsize=1)
def default_ar_model() -> ARModel:
    """AR(10) fitted to the bundled reference trace."""
    model = ar_fit(reference_trace(), DEFAULT_AR_ORDER)
    logger.info(
        "default AR(%d) fitted, noise_std=%.3g m, stationary std=%.3g m",
        model.order,
        model.noise_std,
        math.sqrt(stationary_variance(model)),
    )
    return model


# ========================================
# Signaling channel
# ========================================

def quantize(value_m: ArrayLike, q: Quantizer):
    """Mid-rise uniform quantizer over [-range, range], clamping outside values."""
    v = np.asarray(value_m, dtype=float)
    if q.mode == QuantizerMode.IDENTITY:
        return v[()]
    step = q.step_m
    half_levels = float(2 ** (q.bits - 1))
    index = np.floor(np.clip(v, -q.range_m, q.range_m) / step)
    index = np.clip(index, -half_levels, half_levels - 1.0)
    return ((index + 0.5) * step)[()]


def signaling_instants(t_s: ArrayLike, delta_t_s: float) -> np.ndarray:
    """Most recent update instant k*delta_t at or before t."""
    return np.floor(np.asarray(t_s, dtype=float) / delta_t_s + 1e-9) * delta_t_s


def sample_delayed(trace: PerturbationTrace, t_s: ArrayLike, delta_t_s: float):
    """
    Value known to the transmitter at t: the trace at the last update
    instant, held until the next one (zero-order hold).
    """
    if not delta_t_s > 0:
        raise ValueError("delta_t_s must be > 0")
    t = np.asarray(t_s, dtype=float)
    if t.size and t.min() - delta_t_s < trace.t0_s - 1e-9 * trace.period_s:
        raise InsufficientHistoryError(
            f"signaling at t={t.min():.6g} s needs history from {t.min() - delta_t_s:.6g} s, "
            f"trace starts at {trace.t0_s:.6g} s"
        )
    return trace.values_at(signaling_instants(t, delta_t_s))


def signaling_overhead(values_per_update: int, bits: int, delta_t_s: float) -> float:
    """Side-channel rate in bit/s."""
    if values_per_update <= 0 or bits <= 0 or delta_t_s <= 0:
        raise ValueError("all arguments must be positive")
    return values_per_update * bits / delta_t_s


# ========================================
# Trace files
# ========================================

def load_trace(path: str) -> Tuple[PerturbationTrace, str]:
    """
    Read a `time_s,dy_m` (or `time_s,dx_m`) file with uniform sampling.

    Returns:
        (trace, column name)
    """
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            rows = [row for row in csv.reader(handle) if row]
    except OSError as err:
        raise OutputError(f"cannot read trace {path}: {err}") from err
    header = [cell.strip() for cell in rows[0]] if rows else []
    if len(header) != 2 or header[0] != "time_s" or header[1] not in TRACE_COLUMNS:
        raise ConfigError(f"{path}: header must be time_s,dy_m or time_s,dx_m")
    try:
        if any(len(row) != 2 for row in rows[1:]):
            raise ValueError("expected two columns")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]], dtype=float)
    except ValueError as err:
        raise ConfigError(f"{path}: malformed row: {err}") from err
    if data.shape[0] < 2:
        raise ConfigError(f"{path}: trace needs at least two samples")
    times = data[:, 0]
    step = (times[-1] - times[0]) / (times.size - 1)
    if not step > 0 or np.any(np.abs(np.diff(times) - step) > 1e-6 * step):
        raise ConfigError(f"{path}: timestamps must be increasing and uniformly sampled")
    try:
        trace = PerturbationTrace(sample_rate_hz=1.0 / step, t0_s=float(times[0]), samples=data[:, 1])
    except ValidationError as err:
        raise ConfigError(f"{path}: {err.errors()[0]['msg']}") from err
    return trace, header[1]


def write_trace(path: str, trace: PerturbationTrace, column: str = "dy_m") -> None:
    if column not in TRACE_COLUMNS:
        raise ValueError(f"column must be one of {TRACE_COLUMNS}")
    try:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["time_s", column])
            for t, v in zip(trace.times(), trace.samples):
                writer.writerow([repr(float(t)), repr(float(v))])
    except OSError as err:
        raise OutputError(f"cannot write trace {path}: {err}") from err
