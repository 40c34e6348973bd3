"""Resampling between the detector pixel grid and a uniform polar grid.

Cartesian images are plain 2-D arrays indexed ``[row, col]`` = ``[y, x]``.
Angles are measured from the +x (column) axis towards +y (row).  Ring ``j``
sits at radius ``(j + 1/2) * dr`` and column ``k`` at angle
``2 pi k / n_theta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import map_coordinates


@dataclass(frozen=True)
class DetectorSpec:
    """Pixel geometry of a detector.

    ``center`` is the optical axis in (x, y) pixel coordinates; ``None``
    puts it at the geometric centre of the array.
    """

    nx: int
    ny: int
    pitch: float
    center: tuple[float, float] | None = None

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"detector needs at least 2x2 pixels, got {self.nx}x{self.ny}")
        if not (self.pitch > 0 and math.isfinite(self.pitch)):
            raise ValueError(f"pixel pitch must be positive, got {self.pitch}")
        if self.center is None:
            object.__setattr__(self, "center", ((self.nx - 1) / 2.0, (self.ny - 1) / 2.0))
        else:
            object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    def coordinates(self):
        """Physical ``(x, y)`` coordinates of every pixel centre, in metres."""
        cx, cy = self.center
        x = (np.arange(self.nx) - cx) * self.pitch
        y = (np.arange(self.ny) - cy) * self.pitch
        return np.meshgrid(x, y)

    def polar_coordinates(self):
        """``(r, theta)`` of every pixel centre, theta in ``[0, 2 pi)``."""
        x, y = self.coordinates()
        return np.hypot(x, y), np.mod(np.arctan2(y, x), 2 * np.pi)


@dataclass
class PolarImage:
    samples: np.ndarray  # (n_r, n_theta), complex
    dr: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if self.samples.ndim != 2 or min(self.samples.shape) < 1:
            raise ValueError("polar samples must be a non-empty 2-D array")

    @property
    def n_r(self) -> int:
        return self.samples.shape[0]

    @property
    def n_theta(self) -> int:
        return self.samples.shape[1]

    @property
    def radii(self) -> np.ndarray:
        return (np.arange(self.n_r) + 0.5) * self.dr

    @property
    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_theta) / self.n_theta

    def power(self) -> float:
        """``sum |U|^2 r dr dtheta`` over the grid."""
        w = self.radii * self.dr * (2 * np.pi / self.n_theta)
        return float(np.sum(np.abs(self.samples) ** 2 * w[:, None]))


def grid_dimensions(spec: DetectorSpec) -> tuple[int, int]:
    """Polar grid size ``(n_r, n_theta)`` for a detector.

    ``n_r`` is half the shorter side; ``n_theta`` is the pixel count of the
    largest circumference, forced odd so that ``l`` and ``-l`` pair up.
    """
    n_r = min(spec.nx, spec.ny) // 2
    n_theta = math.ceil(2 * math.pi * n_r)
    if n_theta % 2 == 0:
        n_theta += 1
    return n_r, n_theta


def _as_image(img, spec):
    img = np.asarray(img)
    if img.shape != spec.shape:
        raise ValueError(f"image shape {img.shape} does not match detector {spec.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite samples")
    return img.astype(np.complex128)


def _interp(arr, coords, order):
    mode = "constant" if order <= 1 else "nearest"
    re = map_coordinates(arr.real, coords, order=order, mode=mode, cval=0.0)
    im = map_coordinates(arr.imag, coords, order=order, mode=mode, cval=0.0)
    return re + 1j * im


def to_polar(img, spec: DetectorSpec, n_r: int | None = None,
             n_theta: int | None = None, order: int = 3) -> PolarImage:
    """Resample a Cartesian image onto the polar grid.

    ``order`` is the spline order (1 = bilinear, 3 = cubic).  Samples
    falling outside the detector are zero.  ``n_r``/``n_theta`` default to
    :func:`grid_dimensions`; the radial step is always one pixel.
    """
    img = _as_image(img, spec)
    d_nr, d_nt = grid_dimensions(spec)
    n_r = d_nr if n_r is None else int(n_r)
    n_theta = d_nt if n_theta is None else int(n_theta)
    cx, cy = spec.center
    rho = np.arange(n_r) + 0.5
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    rows = cy + rho[:, None] * np.sin(theta)[None, :]
    cols = cx + rho[:, None] * np.cos(theta)[None, :]
    out = _interp(img, np.array([rows, cols]), order)
    outside = (rows < 0) | (rows > spec.ny - 1) | (cols < 0) | (cols > spec.nx - 1)
    out[outside] = 0
    return PolarImage(out, dr=spec.pitch)


def _half_turn(samples):
    """Every ring rotated by pi, exactly, via its angular spectrum."""
    n_t = samples.shape[1]
    l = np.arange(n_t)
    l[l > n_t // 2] -= n_t
    parity = np.where(l % 2, -1.0, 1.0)
    return np.fft.ifft(np.fft.fft(samples, axis=1) * parity, axis=1)


def from_polar(polar: PolarImage, spec: DetectorSpec, order: int = 3) -> np.ndarray:
    """Resample a polar image back onto the detector pixels.

    Interpolation is a tensor spline of order ``order`` in (radius, angle),
    periodic in angle.  Near the axis the grid is continued through the
    centre with the rings rotated by pi; beyond the outermost ring the
    output is zero.
    """
    r, theta = spec.polar_coordinates()
    s = polar.samples
    n_r, n_t = s.shape
    pad = 16 if order > 1 else 1
    rpad = min(pad, n_r)
    inner = _half_turn(s[:rpad])[::-1]
    ext = np.concatenate([inner, s], axis=0)
    ext = np.concatenate([ext[:, -pad:], ext, ext[:, :pad]], axis=1)
    u = r / polar.dr - 0.5
    v = theta * n_t / (2 * np.pi)
    out = _interp(ext, np.array([u + rpad, v + pad]), order)
    out[u > n_r - 1] = 0
    return out


def cartesian_power(img, pitch: float) -> float:
    return float(np.sum(np.abs(img) ** 2) * pitch ** 2)
