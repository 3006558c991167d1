"""
Pointing geometry - angles, vehicle yaw/pitch, receiver rotation and the
receiver displacement from the beam axis for each compensation strategy.

Frame: v1-based, right handed, z along the laser boresight, SI units.
"""

import logging
from typing import Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike
from pydantic import ValidationError

from beamlink.dynamics import quantize, sample_delayed
from beamlink.errors import GeometryError, InsufficientHistoryError, UnreachableAzimuthError
from beamlink.models import (
    CompensationStrategy,
    Displacement,
    LaserArray,
    PointingAngles,
    RotationAngles,
    SignalingHistory,
    StrategyKind,
    VehicleState,
)

logger = logging.getLogger(__name__)


def _separation(s1: VehicleState, s2: VehicleState) -> float:
    z = abs(s2.z_m - s1.z_m)
    if z == 0:
        raise GeometryError("vehicles are co-located along z")
    return z


def pointing_angles(s1: VehicleState, s2: VehicleState) -> PointingAngles:
    """Azimuth and elevation of the v2 receiver seen from the v1 transmitter."""
    z = _separation(s1, s2)
    try:
        return PointingAngles(
            azimuth_rad=float(np.arctan((s2.x_m - s1.x_m) / z)),
            elevation_rad=float(np.arctan((s2.y_m - s1.y_m) / z)),
        )
    except ValidationError as err:
        raise GeometryError(f"pointing angle reaches pi/2 at z={z} m: {err.errors()[0]['msg']}") from err


def _lever(length_m: float) -> float:
    if not length_m > 0:
        raise GeometryError(f"vehicle length must be > 0, got {length_m}")
    return 0.5 * length_m


def yaw_angle(dx_m: ArrayLike, length_m: float):
    """Yaw induced by a lateral perturbation, lever arm half the vehicle length."""
    return np.arctan(np.asarray(dx_m, dtype=float) / _lever(length_m))[()]


def pitch_angle(dy_m: ArrayLike, length_m: float):
    """Pitch induced by a vertical perturbation."""
    return np.arctan(np.asarray(dy_m, dtype=float) / _lever(length_m))[()]


def rotation_angles(yaw1: float, yaw2: float, pitch1: float, pitch2: float) -> RotationAngles:
    return RotationAngles(
        beta_x_rad=abs(yaw2 - yaw1),
        beta_y_rad=abs(pitch2 - pitch1),
        yaw1_rad=yaw1,
        yaw2_rad=yaw2,
        pitch1_rad=pitch1,
        pitch2_rad=pitch2,
    )


def effective_rotations(strategy: CompensationStrategy, yaw1, yaw2, pitch1, pitch2) -> Tuple:
    """
    Relative receiver rotations (beta_x, beta_y) as seen by the link.

    With dynamic compensation v1 cancels its own yaw and pitch from on-board
    sensors, so only v2's rotation remains. Works on scalars and arrays.
    """
    if strategy.kind == StrategyKind.DYNAMIC:
        yaw1 = np.zeros_like(np.asarray(yaw1, dtype=float))
        pitch1 = np.zeros_like(np.asarray(pitch1, dtype=float))
    beta_x = np.abs(np.asarray(yaw2) - yaw1)
    beta_y = np.abs(np.asarray(pitch2) - pitch1)
    return beta_x[()], beta_y[()]


def displacement_series(
    strategy: CompensationStrategy,
    z_m: float,
    t_s: np.ndarray,
    rest1: Tuple[float, float],
    rest2: Tuple[float, float],
    length1_m: float,
    dx1: np.ndarray,
    dy1: np.ndarray,
    dx2: np.ndarray,
    dy2: np.ndarray,
    history: Optional[SignalingHistory] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Receiver displacement (dx, dy) from the beam axis over time.

    Args:
        strategy: compensation capability of v1
        z_m: longitudinal separation, > 0
        t_s: sample times
        rest1, rest2: (rest lateral, rest height) of each vehicle
        length1_m: length of v1, sets the lever arm of its yaw/pitch
        dx1, dy1, dx2, dy2: perturbations at t_s
        history: v2 traces seen by the signaling channel (dynamic only)

    Returns:
        (dx, dy) arrays aligned with t_s
    """
    if z_m <= 0:
        raise GeometryError("vehicles are co-located along z")
    if strategy.kind == StrategyKind.DYNAMIC:
        if history is None:
            raise InsufficientHistoryError("dynamic compensation needs the signaled v2 traces")
        q = strategy.quantizer
        known_x = quantize(sample_delayed(history.x, t_s, strategy.delta_t_s), q)
        known_y = quantize(sample_delayed(history.y, t_s, strategy.delta_t_s), q)
        return np.asarray(dx2 - known_x), np.asarray(dy2 - known_y)

    tilt_x = np.tan(yaw_angle(dx1, length1_m)) * z_m
    tilt_y = np.tan(pitch_angle(dy1, length1_m)) * z_m
    if strategy.kind == StrategyKind.STATIC:
        return np.asarray(dx2 - dx1 - tilt_x), np.asarray(dy2 - dy1 - tilt_y)
    x1, y1 = rest1[0] + dx1, rest1[1] + dy1
    x2, y2 = rest2[0] + dx2, rest2[1] + dy2
    return np.asarray(x2 - x1 - tilt_x), np.asarray(y2 - y1 - tilt_y)


def displacement(
    s1: VehicleState,
    s2: VehicleState,
    strategy: CompensationStrategy,
    history: Optional[SignalingHistory] = None,
) -> Displacement:
    """Displacement at a single instant, s1 and s2 taken at the same time."""
    z = _separation(s1, s2)
    t = np.asarray(s2.t_s, dtype=float)
    dx, dy = displacement_series(
        strategy,
        z,
        t,
        (s1.static.rest_lateral_m, s1.static.rest_height_m),
        (s2.static.rest_lateral_m, s2.static.rest_height_m),
        s1.static.length_m,
        np.asarray(s1.dx_m),
        np.asarray(s1.dy_m),
        np.asarray(s2.dx_m),
        np.asarray(s2.dy_m),
        history,
    )
    return Displacement(dx_m=float(dx), dy_m=float(dy))


def select_laser(azimuth_rad: float, array: LaserArray) -> Tuple[int, float]:
    """
    Pick the array element whose boresight is nearest the azimuth.

    Returns:
        (laser index, residual MEMS steering command in rad)
    """
    boresights = array.boresights()
    index = int(np.argmin(np.abs(azimuth_rad - boresights)))
    residual = float(azimuth_rad - boresights[index])
    if abs(residual) > array.mems_range_rad * (1 + 1e-12):
        raise UnreachableAzimuthError(
            f"azimuth {np.degrees(azimuth_rad):.3f} deg needs {np.degrees(residual):.3f} deg of steering, "
            f"MEMS range is +/-{np.degrees(array.mems_range_rad):.3f} deg"
        )
    logger.debug("laser %d selected, residual %.6g rad", index, residual)
    return index, residual
