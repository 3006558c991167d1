"""
Time-stepped platoon scenarios and parameter sweeps.

A run holds the separation z fixed, draws the four perturbation series
(v1/v2, lateral/vertical), and pushes them through geometry, beam and
receiver to get throughput per timestep.
"""

import asyncio
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from beamlink.asyncwrap import asyncwrap
from beamlink.beam import collected_power
from beamlink.dynamics import ar_generate, default_ar_model, load_trace, signaling_overhead
from beamlink.errors import (
    BeamlinkError,
    ConfigError,
    EmptyInputError,
    ReceiverOrientationError,
    UnreachableAzimuthError,
)
from beamlink.geometry import (
    displacement_series,
    effective_rotations,
    pitch_angle,
    select_laser,
    yaw_angle,
)
from beamlink.models import (
    REFERENCE_IB_W_PER_M2,
    ARModel,
    CompensationStrategy,
    DisplacementRow,
    LinkSample,
    LinkSeries,
    PerturbationKind,
    PerturbationSource,
    PerturbationTrace,
    PowerMethod,
    ScenarioConfig,
    SignalingHistory,
    SignalingRow,
    StrategyKind,
    SweepResult,
    SweepRow,
)
from beamlink.receiver import background_irradiance, load_spectrum, snr, throughput

logger = logging.getLogger(__name__)

AXES = ("v1_x", "v1_y", "v2_x", "v2_y")


@dataclass(frozen=True)
class ScenarioPlan:
    """Config with its file inputs and default models resolved once."""
    cfg: ScenarioConfig
    i_b_w_per_m2: float
    lead_s: float
    models: Dict[str, Optional[ARModel]]
    traces: Dict[str, Optional[PerturbationTrace]]


def resolve_background(cfg: ScenarioConfig) -> float:
    if cfg.spectrum_path is not None:
        spectrum = load_spectrum(cfg.spectrum_path)
        return background_irradiance(spectrum, cfg.rx.filter_center_m, cfg.rx.filter_bw_m)
    if cfg.i_b_w_per_m2 is not None:
        return cfg.i_b_w_per_m2
    return REFERENCE_IB_W_PER_M2


def _resolve_source(source: PerturbationSource) -> Tuple[Optional[ARModel], Optional[PerturbationTrace]]:
    if source.kind == PerturbationKind.DEFAULT:
        return default_ar_model(), None
    if source.kind == PerturbationKind.AR:
        return source.ar_model, None
    if source.kind == PerturbationKind.TRACE:
        trace, _ = load_trace(source.trace_path)
        return None, trace
    return None, None


def prepare(cfg: ScenarioConfig) -> ScenarioPlan:
    models, traces = {}, {}
    for axis in AXES:
        models[axis], traces[axis] = _resolve_source(getattr(cfg.perturbations, axis))
    # one lead-in for every command and signaling period
    lead_s = max(cfg.strategy.delta_t_s, max(cfg.delta_t_list_s), cfg.timestep_s)
    return ScenarioPlan(cfg=cfg, i_b_w_per_m2=resolve_background(cfg), lead_s=lead_s, models=models, traces=traces)


def _axis_trace(plan: ScenarioPlan, axis: str, seed: int) -> PerturbationTrace:
    """
    Perturbation series covering [-lead, duration] on its own sample grid.

    The lead-in gives the signaling channel history at t - delta_t for the
    first timestep at the longest configured signaling period. File traces
    are re-based so their first samples form it.
    """
    cfg = plan.cfg
    model, source = plan.models[axis], plan.traces[axis]
    if source is not None:
        rate = source.sample_rate_hz
    elif model is not None:
        rate = model.sample_rate_hz
    else:
        rate = 1.0 / cfg.timestep_s
    head = math.ceil(plan.lead_s * rate - 1e-9) + 1
    n = head + math.ceil(cfg.duration_s * rate - 1e-9) + 1
    t0 = -head / rate
    if model is not None:
        return ar_generate(model, n, seed, t0_s=t0)
    if source is not None:
        if source.samples.size < n:
            raise ConfigError(
                f"perturbations.{axis}: trace has {source.samples.size} samples, "
                f"the scenario needs {n} at {rate:.6g} Hz"
            )
        return PerturbationTrace(sample_rate_hz=rate, t0_s=t0, samples=source.samples[:n])
    return PerturbationTrace(sample_rate_hz=rate, t0_s=t0, samples=np.zeros(n))


def draw_traces(plan: ScenarioPlan, stream: Sequence[int]) -> Dict[str, PerturbationTrace]:
    """One trace per axis, seeded from (cfg.seed, stream)."""
    seeds = np.random.SeedSequence(plan.cfg.seed, spawn_key=tuple(stream)).generate_state(len(AXES))
    return {axis: _axis_trace(plan, axis, int(seed)) for axis, seed in zip(AXES, seeds)}


def _check_pointing(cfg: ScenarioConfig, kind: StrategyKind, z_m: float) -> None:
    """Static and dynamic transmitters steer toward the nominal receiver position."""
    if kind == StrategyKind.NONE:
        return
    lateral = cfg.vehicle2.rest_lateral_m - cfg.vehicle1.rest_lateral_m
    height = cfg.vehicle2.rest_height_m - cfg.vehicle1.rest_height_m
    select_laser(math.atan(lateral / z_m), cfg.laser_array)
    elevation = math.atan(height / z_m)
    if abs(elevation) > cfg.laser_array.mems_range_rad * (1 + 1e-12):
        raise UnreachableAzimuthError(
            f"elevation {math.degrees(elevation):.3f} deg exceeds the MEMS range at z={z_m} m"
        )


def _link(
    plan: ScenarioPlan,
    traces: Dict[str, PerturbationTrace],
    z_m: float,
    p0_w: float,
    strategy: CompensationStrategy,
) -> LinkSeries:
    cfg = plan.cfg
    t = np.arange(cfg.n_steps) * cfg.timestep_s
    dx1, dy1, dx2, dy2 = (traces[axis].values_at(t) for axis in AXES)

    _check_pointing(cfg, strategy.kind, z_m)
    length1, length2 = cfg.vehicle1.length_m, cfg.vehicle2.length_m
    yaw1, pitch1 = yaw_angle(dx1, length1), pitch_angle(dy1, length1)
    yaw2, pitch2 = yaw_angle(dx2, length2), pitch_angle(dy2, length2)
    dx, dy = displacement_series(
        strategy,
        z_m,
        t,
        (cfg.vehicle1.rest_lateral_m, cfg.vehicle1.rest_height_m),
        (cfg.vehicle2.rest_lateral_m, cfg.vehicle2.rest_height_m),
        length1,
        dx1,
        dy1,
        dx2,
        dy2,
        SignalingHistory(x=traces["v2_x"], y=traces["v2_y"]),
    )
    beta_x, beta_y = effective_rotations(strategy, yaw1, yaw2, pitch1, pitch2)
    facing_away = np.flatnonzero((beta_x >= math.pi / 2) | (beta_y >= math.pi / 2))
    if facing_away.size:
        raise ReceiverOrientationError(f"receiver rotation reaches pi/2 at t={t[facing_away[0]]:.6g} s")

    beam = cfg.beam.model_copy(update={"power_w": p0_w})
    p_r = collected_power(beam, z_m, dx, dy, beta_x, beta_y, cfg.rx.aperture, cfg.power_method)
    s = snr(p_r, cfg.rx, plan.i_b_w_per_m2)
    return LinkSeries(
        t_s=t,
        z_m=z_m,
        p0_w=p0_w,
        dx_m=dx,
        dy_m=dy,
        beta_x_rad=beta_x,
        beta_y_rad=beta_y,
        p_r_w=p_r,
        snr=s,
        r_bit_per_s=throughput(s, cfg.rx.bandwidth_hz),
    )


def _with_context(err: BeamlinkError, strategy: CompensationStrategy, z_m: float, p0_w: float) -> BeamlinkError:
    where = f"strategy={strategy.kind.value}"
    if strategy.kind == StrategyKind.DYNAMIC:
        where += f" delta_t={strategy.delta_t_s} s"
    return type(err)(f"{where} z={z_m} m P0={p0_w} W: {err.detail}")


def run_plan(plan: ScenarioPlan, z_m: float, p0_w: float, stream: Sequence[int] = (0,)) -> LinkSeries:
    strategy = plan.cfg.strategy
    try:
        return _link(plan, draw_traces(plan, stream), z_m, p0_w, strategy)
    except BeamlinkError as err:
        raise _with_context(err, strategy, z_m, p0_w) from err


def run_scenario(cfg: ScenarioConfig, z_m: float, p0_w: float, stream: Sequence[int] = (0,)) -> LinkSeries:
    """
    Simulate one (z, P0) point with cfg.strategy.

    Deterministic in (cfg, stream): the same inputs give bit-identical series.
    """
    return run_plan(prepare(cfg), z_m, p0_w, stream)


def _nearest_rank(ordered: np.ndarray, pct: int) -> float:
    rank = max(1, math.ceil(pct * ordered.size / 100))
    return float(ordered[rank - 1])


def summarize(samples: Union[LinkSeries, Iterable[LinkSample]]) -> Tuple[float, float, float, float]:
    """
    Returns:
        (mean R, 5th percentile R, 95th percentile R, mean received power)
    """
    if isinstance(samples, LinkSeries):
        rates, powers = samples.r_bit_per_s, samples.p_r_w
    else:
        samples = list(samples)
        rates = np.array([s.r_bit_per_s for s in samples], dtype=float)
        powers = np.array([s.p_r_w for s in samples], dtype=float)
    if rates.size == 0:
        raise EmptyInputError("cannot summarize an empty sample list")
    ordered = np.sort(rates)
    return (
        float(np.mean(rates)),
        _nearest_rank(ordered, 5),
        _nearest_rank(ordered, 95),
        float(np.mean(powers)),
    )


def _summary(series: LinkSeries) -> Dict[str, float]:
    mean_r, p5_r, p95_r, mean_p = summarize(series)
    return {
        "p0_w": series.p0_w,
        "z_m": series.z_m,
        "mean_r_bps": mean_r,
        "p5_r_bps": p5_r,
        "p95_r_bps": p95_r,
        "mean_pr_w": mean_p,
    }


def _run_strategies(
    plan: ScenarioPlan,
    stream: Tuple[int, int],
    z_m: float,
    p0_w: float,
    strategies: Sequence[CompensationStrategy],
) -> List[LinkSeries]:
    started = time.perf_counter()
    # all strategies see the same perturbations at a grid point
    traces = draw_traces(plan, stream)
    runs = []
    for strategy in strategies:
        try:
            runs.append(_link(plan, traces, z_m, p0_w, strategy))
        except BeamlinkError as err:
            raise _with_context(err, strategy, z_m, p0_w) from err
    logger.debug("grid point z=%s P0=%s done in %.3f s", z_m, p0_w, time.perf_counter() - started)
    return runs


def _sweep_point(plan: ScenarioPlan, iz: int, z_m: float, ip: int, p0_w: float) -> List[SweepRow]:
    strategies = [plan.cfg.strategy.model_copy(update={"kind": kind}) for kind in plan.cfg.sweep_strategies]
    runs = _run_strategies(plan, (iz, ip), z_m, p0_w, strategies)
    return [SweepRow(strategy=s.kind, **_summary(series)) for s, series in zip(strategies, runs)]


def _signaling_point(plan: ScenarioPlan, iz: int, z_m: float, ip: int, p0_w: float) -> List[SignalingRow]:
    base = plan.cfg.strategy
    strategies = [
        base.model_copy(update={"kind": StrategyKind.DYNAMIC, "delta_t_s": delta_t}) for delta_t in plan.cfg.delta_t_list_s
    ]
    runs = _run_strategies(plan, (iz, ip), z_m, p0_w, strategies)
    return [
        SignalingRow(
            delta_t_s=s.delta_t_s,
            overhead_bps=signaling_overhead(2, s.quantizer.bits, s.delta_t_s),
            **_summary(series),
        )
        for s, series in zip(strategies, runs)
    ]


async def _gather_grid(plan: ScenarioPlan, point: Callable[..., list]) -> list:
    cfg = plan.cfg
    run_point = asyncwrap(point)
    points = [
        run_point(plan, iz, z, ip, p0)
        for iz, z in enumerate(cfg.z_list_m)
        for ip, p0 in enumerate(cfg.p0_list_w)
    ]
    chunks = await asyncio.gather(*points)
    return [row for chunk in chunks for row in chunk]


async def sweep_async(cfg: ScenarioConfig) -> SweepResult:
    plan = prepare(cfg)
    logger.info("sweeping %d grid points x %d strategies", len(cfg.z_list_m) * len(cfg.p0_list_w), len(cfg.sweep_strategies))
    rows = await _gather_grid(plan, _sweep_point)
    return SweepResult(rows=sorted(rows, key=lambda r: (r.strategy.rank, r.p0_w, r.z_m)))


def sweep(cfg: ScenarioConfig) -> SweepResult:
    """Every (strategy, P0, z) of the configured grid, run concurrently."""
    return asyncio.run(sweep_async(cfg))


async def signaling_sweep_async(cfg: ScenarioConfig) -> List[SignalingRow]:
    plan = prepare(cfg)
    logger.info("signaling sweep over %d periods", len(cfg.delta_t_list_s))
    rows = await _gather_grid(plan, _signaling_point)
    return sorted(rows, key=lambda r: (r.delta_t_s, r.p0_w, r.z_m))


def signaling_sweep(cfg: ScenarioConfig) -> List[SignalingRow]:
    """
    Dynamic compensation at every signaling period of cfg.delta_t_list_s.

    Periods share the perturbation draws of a grid point, and the row at
    cfg.strategy.delta_t_s equals the dynamic row of `sweep`.
    """
    return asyncio.run(signaling_sweep_async(cfg))


def displacement_sweep(
    cfg: ScenarioConfig,
    dy_grid_m: Optional[Sequence[float]] = None,
    z_list_m: Optional[Sequence[float]] = None,
) -> List[DisplacementRow]:
    """Throughput under an imposed vertical displacement with zero rotations."""
    grid = np.asarray(cfg.delta_grid_m if dy_grid_m is None else dy_grid_m, dtype=float)
    distances = cfg.z_list_m if z_list_m is None else z_list_m
    if grid.size == 0 or len(distances) == 0:
        raise EmptyInputError("displacement grid and distance list must be non-empty")
    i_b = resolve_background(cfg)
    zeros = np.zeros_like(grid)
    rows = []
    for p0 in cfg.p0_list_w:
        beam = cfg.beam.model_copy(update={"power_w": p0})
        for z in distances:
            p_r = collected_power(beam, z, zeros, grid, zeros, zeros, cfg.rx.aperture, cfg.power_method)
            rates = throughput(snr(p_r, cfg.rx, i_b), cfg.rx.bandwidth_hz)
            rows.extend(
                DisplacementRow(p0_w=p0, z_m=z, delta_m=float(d), r_bps=float(r)) for d, r in zip(grid, rates)
            )
    return rows


def aligned_throughput(
    cfg: ScenarioConfig,
    z_m: float,
    p0_w: float,
    method: Optional[PowerMethod] = None,
) -> float:
    """Rate of the perfectly aligned link, no displacement and no rotation."""
    beam = cfg.beam.model_copy(update={"power_w": p0_w})
    p_r = collected_power(beam, z_m, 0.0, 0.0, 0.0, 0.0, cfg.rx.aperture, method or cfg.power_method)
    return float(throughput(snr(p_r, cfg.rx, resolve_background(cfg)), cfg.rx.bandwidth_hz))
