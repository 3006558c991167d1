import math

import numpy as np
import pytest
from pydantic import ValidationError

from beamlink.errors import TraceSupportError
from beamlink.models import (
    LINK_SAMPLE_FIELDS,
    CompensationStrategy,
    LaserArray,
    LinkSeries,
    PerturbationKind,
    PerturbationSource,
    PerturbationTrace,
    Quantizer,
    ScenarioConfig,
    StrategyKind,
    SweepRow,
)


def test_reference_defaults():
    cfg = ScenarioConfig()
    assert cfg.z_list_m == [5.0 * k for k in range(1, 21)]
    assert cfg.p0_list_w == [1e-3, 1e-2]
    assert len(cfg.delta_grid_m) == 101
    assert cfg.vehicle2.rest_height_m - cfg.vehicle1.rest_height_m == pytest.approx(0.3)
    assert cfg.n_steps == 200_000
    assert cfg.perturbations.v1_y.kind == PerturbationKind.DEFAULT
    assert cfg.perturbations.v1_x.kind == PerturbationKind.ZERO


def test_signaling_period_must_cover_a_timestep():
    with pytest.raises(ValidationError):
        ScenarioConfig(timestep_s=0.01, strategy=CompensationStrategy(delta_t_s=0.001))
    ScenarioConfig(timestep_s=0.01, strategy=CompensationStrategy(delta_t_s=0.01))


def test_signaling_periods_must_cover_a_timestep():
    with pytest.raises(ValidationError):
        ScenarioConfig(timestep_s=0.01, delta_t_list_s=[0.02, 0.005])
    with pytest.raises(ValidationError):
        ScenarioConfig(delta_t_list_s=[])
    assert ScenarioConfig(timestep_s=0.01, delta_t_list_s=[0.01, 0.2]).delta_t_list_s == [0.01, 0.2]


def test_single_background_source():
    with pytest.raises(ValidationError):
        ScenarioConfig(i_b_w_per_m2=5.0, spectrum_path="spectrum.csv")


def test_unknown_keys_rejected():
    with pytest.raises(ValidationError):
        ScenarioConfig.model_validate({"durations": 1.0})
    with pytest.raises(ValidationError):
        ScenarioConfig.model_validate({"beam": {"power": 1.0}})


def test_grid_validation():
    with pytest.raises(ValidationError):
        ScenarioConfig(z_list_m=[10.0, -5.0])
    with pytest.raises(ValidationError):
        ScenarioConfig(p0_list_w=[])
    with pytest.raises(ValidationError):
        ScenarioConfig(delta_grid_m=[0.0, math.inf])
    with pytest.raises(ValidationError):
        ScenarioConfig(sweep_strategies=[StrategyKind.NONE, StrategyKind.NONE])


def test_config_is_frozen():
    cfg = ScenarioConfig()
    with pytest.raises(ValidationError):
        cfg.seed = 3
    assert cfg.model_copy(update={"seed": 3}).seed == 3


def test_perturbation_source_requires_its_payload():
    with pytest.raises(ValidationError):
        PerturbationSource(kind=PerturbationKind.AR)
    with pytest.raises(ValidationError):
        PerturbationSource(kind=PerturbationKind.TRACE)


def test_trace_values_on_grid_are_exact():
    samples = [0.1, -0.3, 0.7, 0.2]
    trace = PerturbationTrace(sample_rate_hz=10.0, t0_s=-0.1, samples=samples)
    assert trace.t_end_s == pytest.approx(0.2)
    assert list(trace.values_at(trace.times())) == samples
    assert trace.values_at(0.05) == pytest.approx(0.5 * (-0.3 + 0.7))


def test_trace_outside_support():
    trace = PerturbationTrace(sample_rate_hz=10.0, samples=[0.0, 1.0, 2.0])
    with pytest.raises(TraceSupportError):
        trace.values_at(-0.05)
    with pytest.raises(TraceSupportError):
        trace.values_at(np.array([0.1, 0.25]))


def test_trace_is_read_only():
    trace = PerturbationTrace(sample_rate_hz=10.0, samples=[0.0, 1.0])
    with pytest.raises(ValueError):
        trace.samples[0] = 5.0
    with pytest.raises(ValidationError):
        PerturbationTrace(sample_rate_hz=10.0, samples=[0.0])
    with pytest.raises(ValidationError):
        PerturbationTrace(sample_rate_hz=10.0, samples=[0.0, math.nan])


def test_laser_array_boresights():
    assert np.degrees(LaserArray().boresights()) == pytest.approx([-40.0, -20.0, 0.0, 20.0, 40.0])
    assert LaserArray(n_lasers=4).boresights() == pytest.approx(np.radians([-30.0, -10.0, 10.0, 30.0]))


def test_quantizer_step():
    assert Quantizer().step_m == pytest.approx(3.0517578125e-6)
    assert Quantizer(bits=1, range_m=1.0).step_m == 1.0


def test_sweep_row_percentile_order():
    with pytest.raises(ValidationError):
        SweepRow(strategy=StrategyKind.NONE, p0_w=1e-3, z_m=5.0, mean_r_bps=1.0, p5_r_bps=2.0, p95_r_bps=1.0, mean_pr_w=1e-6)


def test_strategy_rank():
    assert [kind.rank for kind in StrategyKind] == [0, 1, 2]


def _series(n: int) -> LinkSeries:
    zeros = np.zeros(n)
    return LinkSeries(
        t_s=np.arange(n) * 1e-3,
        z_m=50.0,
        p0_w=0.01,
        dx_m=zeros,
        dy_m=np.full(n, 1e-3),
        beta_x_rad=zeros,
        beta_y_rad=zeros,
        p_r_w=np.full(n, 1e-6),
        snr=np.ones(n),
        r_bit_per_s=np.linspace(1e9, 2e9, n),
    )


def test_link_series_iteration_builds_each_column_once(monkeypatch):
    series = _series(1000)
    calls = []
    column = LinkSeries.column

    def counting_column(self, name):
        calls.append(name)
        return column(self, name)

    monkeypatch.setattr(LinkSeries, "column", counting_column)
    samples = list(series)
    assert len(samples) == 1000
    assert len(calls) == len(LINK_SAMPLE_FIELDS)
    assert samples[10] == series.sample(10)
    assert samples[10].z_m == 50.0
    assert samples[-1].r_bit_per_s == 2e9
    assert samples[-1].t_s == pytest.approx(0.999)
