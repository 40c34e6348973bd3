"""Synthetic test fields: rendered LG superpositions and the radial test profiles."""

from __future__ import annotations

from collections import defaultdict

import numpy as np

from .lg_basis import radial_basis
from .polar_grid import DetectorSpec, PolarImage

# radial test fields for the least-squares vs projection comparison:
# name -> (w0, {p: amplitude}), all with l = 0
COMPARE_FIELDS = {
    "p8": (3000e-6, {8: 1.0}),
    "p50": (1260e-6, {50: 1.0}),
    "mix": (1700e-6, {9: 1.0, 15: 2.0, 28: 1.0}),
}


def _by_l(modes):
    grouped = defaultdict(dict)
    for (l, p), a in modes.items():
        grouped[int(l)][int(p)] = complex(a)
    return grouped


def render_field(modes: dict, w0: float, r, theta) -> np.ndarray:
    """Evaluate ``sum A_{l,p} LG_{l,p}(r, theta)`` at arbitrary points."""
    r = np.asarray(r, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    r, theta = np.broadcast_arrays(r, theta)
    out = np.zeros(r.shape, dtype=np.complex128)
    # pixel grids repeat radii many times over
    r_unique, inverse = np.unique(r, return_inverse=True)
    inverse = inverse.reshape(r.shape)
    for l, amps in _by_l(modes).items():
        p_max = max(amps)
        basis = radial_basis(l, p_max, w0, r_unique)
        c = np.zeros(p_max + 1, dtype=np.complex128)
        for p, a in amps.items():
            c[p] = a
        radial = (c @ basis)[inverse]
        out += radial * np.exp(1j * l * theta)
    return out


def render_image(modes: dict, w0: float, spec: DetectorSpec) -> np.ndarray:
    """Render an LG superposition on the detector pixel centres."""
    r, theta = spec.polar_coordinates()
    return render_field(modes, w0, r, theta)


def render_polar(modes: dict, w0: float, n_r: int, n_theta: int, dr: float) -> PolarImage:
    r = (np.arange(n_r) + 0.5) * dr
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    return PolarImage(render_field(modes, w0, r[:, None], theta[None, :]), dr)


def random_modes(n_modes: int = 200, l_max: int = 40, p_max: int = 60,
                 seed: int = 0, decay: float = 1.0) -> dict:
    """Random complex amplitudes on ``n_modes`` distinct ``(l, p)`` pairs.

    Amplitudes are complex normal scaled by ``1 / (1 + (|l| + p) / 10) ** decay``
    so that low orders dominate, as in natural images.
    """
    rng = np.random.default_rng(seed)
    pool = [(l, p) for l in range(-l_max, l_max + 1) for p in range(p_max + 1)]
    picks = rng.choice(len(pool), size=n_modes, replace=False)
    modes = {}
    for i in sorted(picks):
        l, p = pool[i]
        a = complex(rng.normal(), rng.normal())
        modes[(l, p)] = a / (1 + (abs(l) + p) / 10) ** decay
    return modes


def radial_profile(name_or_modes, r):
    """Radial l=0 profile of a comparison field; returns ``(w0, truth, values)``."""
    if isinstance(name_or_modes, str):
        w0, amps = COMPARE_FIELDS[name_or_modes]
    else:
        w0, amps = name_or_modes
    p_trunc = max(amps)
    truth = np.zeros(p_trunc + 1, dtype=np.complex128)
    for p, a in amps.items():
        truth[p] = a
    values = truth @ radial_basis(0, p_trunc, w0, r)
    return w0, truth, values


def ripple_fixture(spec: DetectorSpec, order: int = 178, amplitude: float = 0.1,
                   seed: int = 3, w0: float = 1.5e-3):
    """Intensity image with an injected azimuthal ripple; returns ``(noisy, clean)``.

    The clean part is the intensity of a seeded low-order LG superposition
    (``|l| <= 12``, ``p <= 10``) normalised to unit peak.  The ripple
    ``amplitude * cos(order * theta)`` is confined to an annulus between
    roughly 43% and 96% of the largest inscribed radius, with soft edges.
    The inner edge resolves order 178 on detectors at least 512 pixels
    across; smaller detectors alias the ripple.
    """
    clean = np.abs(render_image(random_modes(60, 12, 10, seed=seed), w0, spec)) ** 2
    clean /= clean.max()
    r, theta = spec.polar_coordinates()
    scale = min(spec.nx, spec.ny) / 512
    rpx = r / spec.pitch / scale
    window = np.clip((rpx - 110) / 20, 0, 1) * np.clip((245 - rpx) / 10, 0, 1)
    return clean + amplitude * np.cos(order * theta) * window, clean
