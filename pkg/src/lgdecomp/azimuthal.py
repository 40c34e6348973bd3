"""Per-ring OAM spectrum of a polar image.

``B_l(r)`` is the normalised angular Fourier coefficient

    B_l(r) = 1/(2 pi) * int U(r, theta) exp(-i l theta) dtheta,

which makes ``B_l(r) = sum_p A_{l,p} LG_{l,p}(r)`` hold exactly for the
unit-power LG basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polar_grid import PolarImage


@dataclass
class AzimuthalSpectrum:
    """``coeffs[l + l_max, j]`` holds ``B_l(r_j)``."""

    coeffs: np.ndarray
    dr: float

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.ndim != 2 or self.coeffs.shape[0] % 2 != 1:
            raise ValueError("coefficient matrix must have shape (2*l_max+1, n_r)")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("spectrum contains non-finite coefficients")

    @property
    def l_max(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    @property
    def n_r(self) -> int:
        return self.coeffs.shape[1]

    @property
    def ls(self) -> np.ndarray:
        return np.arange(-self.l_max, self.l_max + 1)

    @property
    def radii(self) -> np.ndarray:
        return (np.arange(self.n_r) + 0.5) * self.dr

    def row(self, l: int) -> np.ndarray:
        if abs(l) > self.l_max:
            raise KeyError(l)
        return self.coeffs[l + self.l_max]

    def truncated(self, l_max: int) -> "AzimuthalSpectrum":
        if l_max > self.l_max:
            raise ValueError(f"cannot widen spectrum from {self.l_max} to {l_max}")
        lo = self.l_max - l_max
        return AzimuthalSpectrum(self.coeffs[lo:lo + 2 * l_max + 1].copy(), self.dr)


def azimuthal_decompose(polar: PolarImage, l_max: int | None = None) -> AzimuthalSpectrum:
    """FFT every ring and keep orders ``-l_max..l_max``.

    ``l_max`` defaults to the full order ``(n_theta - 1) // 2``.
    """
    n_t = polar.n_theta
    full = (n_t - 1) // 2
    if l_max is None:
        l_max = full
    if l_max < 0 or 2 * l_max + 1 > n_t:
        raise ValueError(f"l_max={l_max} needs more than {n_t} angular samples")
    f = np.fft.fft(polar.samples, axis=1) / n_t
    idx = np.arange(-l_max, l_max + 1) % n_t
    return AzimuthalSpectrum(f[:, idx].T.copy(), polar.dr)


def azimuthal_recompose(spec: AzimuthalSpectrum, n_theta: int) -> PolarImage:
    """Inverse of :func:`azimuthal_decompose`: ``U_j(theta_k) = sum_l B_l(r_j) e^{i l theta_k}``."""
    if n_theta < 2 * spec.l_max + 1:
        raise ValueError(f"n_theta={n_theta} too small for l_max={spec.l_max}")
    full = np.zeros((spec.n_r, n_theta), dtype=np.complex128)
    full[:, spec.ls % n_theta] = spec.coeffs.T
    return PolarImage(np.fft.ifft(full, axis=1) * n_theta, dr=spec.dr)


def ring_powers(spec: AzimuthalSpectrum) -> np.ndarray:
    """``|B_l(r_j)|^2`` arranged ``(l, ring)``."""
    return np.abs(spec.coeffs) ** 2


def truncation_l(spec: AzimuthalSpectrum, fraction: float = 0.99, floor: float = 0.0):
    """Smallest symmetric order holding ``fraction`` of the power on each ring.

    Rings whose power is at most ``floor`` times the strongest ring's are
    treated as empty (order 0); the default keeps every non-zero ring.

    Returns
    -------
    orders : numpy.ndarray
        per-ring order ``m(r_j)``; zero-power rings get 0
    m_max : int
        the largest per-ring order
    """
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    pw = ring_powers(spec)
    L = spec.l_max
    # cumulative power of the band |l| <= m, for m = 0..L
    band = np.empty((L + 1, spec.n_r))
    band[0] = pw[L]
    if L:
        pair = pw[L + 1:] + pw[L - 1::-1]
        band[1:] = pw[L] + np.cumsum(pair, axis=0)
    total = band[-1]
    reached = band >= fraction * total
    orders = np.argmax(reached, axis=0)
    orders[(total == 0) | (total <= floor * total.max())] = 0
    m_max = int(orders.max()) if orders.size else 0
    return orders, m_max


def retained_fraction(spec: AzimuthalSpectrum, m: int) -> float:
    """Fraction of the radially weighted power kept by the band ``|l| <= m``."""
    pw = ring_powers(spec) * spec.radii[None, :]
    total = pw.sum()
    if total == 0:
        return 1.0
    L = spec.l_max
    m = min(m, L)
    return float(pw[L - m:L + m + 1].sum() / total)
