"""
Test helpers: an event loop for calling coroutines synchronously, reference
configurations and numerical quadrature oracles.
"""

import asyncio
import math
from typing import Awaitable, TypeVar

from scipy.integrate import dblquad, quad

from beamlink.beam import intensity, spot_size
from beamlink.models import BeamParams, PerturbationSet, ScenarioConfig

event_loop = asyncio.new_event_loop()

T = TypeVar("T")


def sync_await(coro: Awaitable[T]) -> T:
    return event_loop.run_until_complete(coro)


def reference_config(**overrides) -> ScenarioConfig:
    """Reference parameters with a static world, fields overridable."""
    overrides.setdefault("perturbations", PerturbationSet.zero())
    return ScenarioConfig(**overrides)


def quad_axis_fraction(lo_m: float, hi_m: float, w_m: float) -> float:
    """
    Adaptive quadrature of the profile sqrt(2/pi)/w exp(-2x^2/w^2) over [lo, hi],
    integrated in units of w so narrow beams stay visible on infinite ranges.
    """
    norm = math.sqrt(2.0 / math.pi)
    value, _ = quad(lambda s: norm * math.exp(-2.0 * s * s), lo_m / w_m, hi_m / w_m, epsabs=0.0, epsrel=1e-12, limit=200)
    return value


def quad_rectangle_power(beam: BeamParams, z_m: float, x_lo: float, x_hi: float, y_lo: float, y_hi: float) -> float:
    """Separable quadrature oracle for the power through a rectangle."""
    spot = spot_size(beam, z_m)
    return beam.power_w * quad_axis_fraction(x_lo, x_hi, spot.w_x_m) * quad_axis_fraction(y_lo, y_hi, spot.w_y_m)


def dblquad_rectangle_power(beam: BeamParams, z_m: float, x_lo: float, x_hi: float, y_lo: float, y_hi: float) -> float:
    """Direct 2-D quadrature of the intensity, independent of the separable form."""
    value, _ = dblquad(
        lambda y, x: float(intensity(beam, z_m, x, y)),
        x_lo,
        x_hi,
        y_lo,
        y_hi,
        epsabs=0.0,
        epsrel=1e-11,
    )
    return value
