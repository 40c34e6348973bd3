"""Azimuthal band filtering in the OAM domain."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .azimuthal import AzimuthalSpectrum, azimuthal_decompose, azimuthal_recompose
from .pipeline import LGSpectrum
from .polar_grid import DetectorSpec, from_polar, to_polar


class BandClippedWarning(UserWarning):
    pass


@dataclass(frozen=True)
class BandSpec:
    """Inclusive band of retained azimuthal orders."""

    l_keep_min: int
    l_keep_max: int

    def __post_init__(self):
        if self.l_keep_min > self.l_keep_max:
            raise ValueError(f"empty band: {self.l_keep_min} > {self.l_keep_max}")

    @classmethod
    def symmetric(cls, m: int) -> "BandSpec":
        return cls(-abs(m), abs(m))

    def mask(self, ls) -> np.ndarray:
        ls = np.asarray(ls)
        return (ls >= self.l_keep_min) & (ls <= self.l_keep_max)


def _check_range(band, lo, hi):
    if band.l_keep_min < lo or band.l_keep_max > hi:
        warnings.warn(f"band [{band.l_keep_min}, {band.l_keep_max}] clipped to spectrum "
                      f"range [{lo}, {hi}]", BandClippedWarning, stacklevel=3)


def band_filter_spectrum(spec, band: BandSpec):
    """Zero every coefficient with ``l`` outside the band; keep the rest untouched."""
    if isinstance(spec, AzimuthalSpectrum):
        _check_range(band, -spec.l_max, spec.l_max)
        coeffs = spec.coeffs.copy()
        coeffs[~band.mask(spec.ls)] = 0
        return AzimuthalSpectrum(coeffs, spec.dr)
    if isinstance(spec, LGSpectrum):
        ls = list(spec.coeffs)
        _check_range(band, min(ls, default=0), max(ls, default=0))
        coeffs = {l: (a.copy() if band.mask(l) else np.zeros_like(a))
                  for l, a in spec.coeffs.items()}
        return LGSpectrum(spec.w0, coeffs, spec.detector, spec.l_max, dict(spec.params))
    raise TypeError(f"cannot filter {type(spec).__name__}")


def denoise(img, spec: DetectorSpec, band: BandSpec, order: int = 3) -> np.ndarray:
    """Remove azimuthal orders outside ``band`` from a detector image.

    Only the per-ring angular spectrum is touched; no radial fit is done.
    """
    polar = to_polar(img, spec, order=order)
    az = azimuthal_decompose(polar)
    filtered = band_filter_spectrum(az, band)
    return from_polar(azimuthal_recompose(filtered, polar.n_theta), spec, order=order)


def l_power_spectrum(spec: AzimuthalSpectrum):
    """Radially integrated power per order, ``P(l) = sum_j |B_l(r_j)|^2 r_j dr``.

    Returns ``(ls, power)``.
    """
    power = (np.abs(spec.coeffs) ** 2 * (spec.radii * spec.dr)[None, :]).sum(axis=1)
    return spec.ls.copy(), power
