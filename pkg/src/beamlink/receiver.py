"""
Photodetection chain - background irradiance, SNR and Shannon throughput
"""

import csv
import logging
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike
from pydantic import ValidationError
from scipy.integrate import trapezoid

from beamlink.errors import ConfigError, OutputError, SpectrumRangeError
from beamlink.models import ReceiverParams, SolarSpectrum

logger = logging.getLogger(__name__)

ELEMENTARY_CHARGE_C = 1.602176634e-19

SPECTRUM_HEADER = ("wavelength_nm", "irradiance_w_m2_nm")
NM = 1e-9


def background_irradiance(spec: SolarSpectrum, center_m: float, bw_m: float) -> float:
    """
    Integrate the spectral irradiance over [center - bw/2, center + bw/2].

    Band edges falling between samples are linearly interpolated, so a flat
    spectrum gives E_b * bw exactly.
    """
    if not bw_m > 0:
        raise ValueError("bw_m must be > 0")
    wavelengths = spec.wavelengths_m
    irradiance = spec.irradiance
    lo, hi = center_m - 0.5 * bw_m, center_m + 0.5 * bw_m
    tol = 1e-12 * (wavelengths[-1] - wavelengths[0])
    if lo < wavelengths[0] - tol or hi > wavelengths[-1] + tol:
        raise SpectrumRangeError(
            f"band [{lo:.6g}, {hi:.6g}] m outside spectrum support "
            f"[{wavelengths[0]:.6g}, {wavelengths[-1]:.6g}] m"
        )
    lo, hi = max(lo, wavelengths[0]), min(hi, wavelengths[-1])
    inside = (wavelengths > lo) & (wavelengths < hi)
    grid = np.concatenate(([lo], wavelengths[inside], [hi]))
    return float(trapezoid(np.interp(grid, wavelengths, irradiance), grid))


def noise_terms(p_r_w: ArrayLike, rx: ReceiverParams, i_b_w_per_m2: float) -> Tuple:
    """
    Noise current variances in A^2.

    Returns:
        (shot, nep) where shot covers background and signal photocurrent
    """
    p = np.asarray(p_r_w, dtype=float)
    if np.any(p < 0) or i_b_w_per_m2 < 0:
        raise ValueError("received power and background irradiance must be >= 0")
    eta = rx.responsivity_a_per_w
    b = rx.bandwidth_hz
    shot = 2.0 * ELEMENTARY_CHARGE_C * b * (i_b_w_per_m2 * rx.aperture.area_m2 * eta + p * eta)
    nep = rx.nep_w_per_sqrthz**2 * eta**2 * b
    return shot[()], nep


def snr(p_r_w: ArrayLike, rx: ReceiverParams, i_b_w_per_m2: float):
    """Electrical SNR of the PIN receiver."""
    shot, nep = noise_terms(p_r_w, rx, i_b_w_per_m2)
    signal = (np.asarray(p_r_w, dtype=float) * rx.responsivity_a_per_w) ** 2
    return (signal / (shot + nep))[()]


def throughput(snr_value: ArrayLike, bandwidth_hz: float):
    """Shannon rate for IM/DD, 0.5 B log2(1 + SNR), in bit/s."""
    s = np.asarray(snr_value, dtype=float)
    if np.any(s < 0):
        raise ValueError("snr must be >= 0")
    return (0.5 * bandwidth_hz * np.log2(1.0 + s))[()]


# ========================================
# Spectrum files
# ========================================

def flat_spectrum(e_b_w_m2_nm: float, lo_nm: float, hi_nm: float) -> SolarSpectrum:
    """Constant spectral irradiance between two wavelengths."""
    return SolarSpectrum(samples=[(lo_nm * NM, e_b_w_m2_nm / NM), (hi_nm * NM, e_b_w_m2_nm / NM)])


def load_spectrum(path: str) -> SolarSpectrum:
    """Read a `wavelength_nm,irradiance_w_m2_nm` file into SI units."""
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            rows = [row for row in csv.reader(handle) if row]
    except OSError as err:
        raise OutputError(f"cannot read spectrum {path}: {err}") from err
    if not rows or tuple(cell.strip() for cell in rows[0]) != SPECTRUM_HEADER:
        raise ConfigError(f"{path}: header must be {','.join(SPECTRUM_HEADER)}")
    try:
        samples = [(float(wl) * NM, float(e) / NM) for wl, e in rows[1:]]
        spectrum = SolarSpectrum(samples=samples)
    except ValueError as err:
        # ValidationError is a ValueError
        detail = err.errors()[0]["msg"] if isinstance(err, ValidationError) else str(err)
        raise ConfigError(f"{path}: {detail}") from err
    logger.info("loaded spectrum %s, %d samples", path, len(samples))
    return spectrum
