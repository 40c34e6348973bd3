"""Image -> LG spectrum -> image, and the intensity fidelity score."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .azimuthal import (AzimuthalSpectrum, azimuthal_decompose, azimuthal_recompose,
                        retained_fraction, truncation_l)
from .lg_basis import DEFAULT_DROPPED, MAX_ORDER, ModeIndex, check_waist, radial_basis
from .polar_grid import DetectorSpec, PolarImage, from_polar, grid_dimensions, to_polar
from .radial_fit import RadialSamples, fit_radial
from .waist import (DEFAULT_SCAN, WaistCandidate, WaistReport, evaluate_waist,
                    select_waist, spectrum_widths)

log = logging.getLogger(__name__)


class DecompositionError(RuntimeError):
    """The pipeline could not produce a spectrum (e.g. no feasible waist)."""

    def __init__(self, message, blocking=()):
        super().__init__(message)
        self.blocking = list(blocking)


@dataclass
class DecomposeParams:
    """Knobs of :func:`decompose`.

    ``ring_floor`` and ``min_row_power`` exclude rings and OAM rows carrying
    a negligible share of the power from the truncation and width rules;
    set both to 0 to apply the rules to every non-zero ring and row.
    With a forced waist, subspaces whose truncation order exceeds the sample
    budget are clipped (``clip_forced``) to the largest order that both fits
    the budget and is resolved by the ring spacing, instead of failing; a
    scanned waist is never clipped.  ``p_orders`` (``{l: p_trunc}``) overrides
    the per-subspace radial truncation; it requires ``forced_w0``.
    """

    power_fraction: float = 0.99
    ring_floor: float = 1e-3
    width_frac_r: float = 0.99
    width_frac_f: float = 0.95
    min_row_power: float = 1e-4
    candidates: tuple = DEFAULT_SCAN
    forced_w0: float | None = None
    sample_budget: int = 256
    dropped: int = DEFAULT_DROPPED
    p_cap: int = MAX_ORDER
    l_max: int | None = None
    clip_forced: bool = True
    workers: int = 1
    p_orders: dict | None = None

    def validate(self):
        if not 0 < self.power_fraction <= 1:
            raise ValueError("power_fraction must lie in (0, 1]")
        for name in ("width_frac_r", "width_frac_f"):
            if not 0 < getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")
        if self.ring_floor < 0 or self.min_row_power < 0:
            raise ValueError("floors must be non-negative")
        if self.sample_budget < 1:
            raise ValueError("sample_budget must be positive")
        if self.forced_w0 is not None:
            check_waist(self.forced_w0)
        if self.forced_w0 is None and len(self.candidates) == 0:
            raise ValueError("no candidate waists")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.p_orders is not None:
            if self.forced_w0 is None:
                raise ValueError("p_orders needs a forced waist")
            if any(p < 0 for p in self.p_orders.values()):
                raise ValueError("p_orders entries must be non-negative")


@dataclass
class LGSpectrum:
    """Coefficients ``A_{l,p}`` keyed by ``l``; each row covers ``p = 0..p_trunc(l)``."""

    w0: float
    coeffs: dict
    detector: DetectorSpec | None = None
    l_max: int = 0
    params: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        check_waist(self.w0)
        self.coeffs = {int(l): np.asarray(a, dtype=np.complex128)
                       for l, a in sorted(self.coeffs.items())}
        for l, a in self.coeffs.items():
            if a.ndim != 1 or not np.all(np.isfinite(a)):
                raise ValueError(f"row l={l} must be a finite 1-D array")
        if self.coeffs:
            self.l_max = max(self.l_max, max(abs(l) for l in self.coeffs))

    @property
    def p_trunc(self) -> dict:
        return {l: len(a) - 1 for l, a in self.coeffs.items()}

    @property
    def mode_count(self) -> int:
        return sum(len(a) for a in self.coeffs.values())

    def entries(self):
        for l, a in self.coeffs.items():
            for p, v in enumerate(a):
                yield ModeIndex(l, p), complex(v)

    def amplitude(self, l: int, p: int) -> complex:
        row = self.coeffs.get(l)
        if row is None or p >= len(row):
            return 0j
        return complex(row[p])

    def power(self) -> float:
        return float(sum(np.vdot(a, a).real for a in self.coeffs.values()))

    def scaled(self, c) -> "LGSpectrum":
        return LGSpectrum(self.w0, {l: c * a for l, a in self.coeffs.items()},
                          self.detector, self.l_max, dict(self.params))


def resolvable_p(l: int, w0: float, dr: float) -> int:
    """Largest ``p`` whose radial oscillation stays below the ring Nyquist limit.

    ``LG_{l,p}`` oscillates at most at ``2 sqrt(2p + |l| + 1) / w0`` rad/m.
    """
    n = (np.pi * w0 / (2 * dr)) ** 2
    return max(int((n - abs(l) - 1) // 2), 0)


def _fit_row(args):
    l, radii, row, w0, p = args
    return l, fit_radial(RadialSamples(l, radii, row), w0, p)


def _front_end(img, spec, params):
    polar = to_polar(img, spec)
    full = azimuthal_decompose(polar)
    orders, m_max = truncation_l(full, params.power_fraction, params.ring_floor)
    if params.l_max is not None:
        m_max = int(params.l_max)
    az = full.truncated(m_max)
    budget = min(params.sample_budget, polar.n_r)
    widths = spectrum_widths(az, params.width_frac_r, params.width_frac_f, params.min_row_power)
    return polar, full, orders, m_max, az, budget, widths


def analyze_waist(img, spec: DetectorSpec, params: DecomposeParams | None = None) -> WaistReport:
    """Run the waist scan of :func:`decompose` alone and return its report."""
    params = params or DecomposeParams()
    params.validate()
    _, _, _, _, az, budget, widths = _front_end(img, spec, params)
    return select_waist(az, params.candidates, budget, dropped=params.dropped,
                        p_cap=params.p_cap, widths=widths)


def decompose(img, spec: DetectorSpec, params: DecomposeParams | None = None) -> LGSpectrum:
    """Decompose a detector image into LG modes.

    Stages: polar resampling, per-ring FFT, azimuthal truncation, subspace
    widths, waist selection (unless ``params.forced_w0`` is set), per-row
    truncation in ``p`` and a least-squares radial fit per row.
    """
    params = params or DecomposeParams()
    params.validate()
    polar, full, orders, m_max, az, budget, widths = _front_end(img, spec, params)

    clipped = []
    if params.p_orders is not None:
        report = None
        choice = WaistCandidate(params.forced_w0, {l: int(params.p_orders.get(l, 0))
                                                   for l in az.ls.tolist()}, True)
        if choice.max_samples > budget:
            raise DecompositionError(
                f"p_orders need {choice.max_samples} radial samples, budget is {budget}",
                choice.blocking(budget))
    elif params.forced_w0 is not None:
        report = None
        choice = evaluate_waist(params.forced_w0, widths, budget, params.dropped, params.p_cap)
        clipped = choice.blocking(budget)
        if clipped:
            if not params.clip_forced:
                raise DecompositionError(
                    f"forced waist {params.forced_w0:g} m is infeasible; "
                    f"blocking subspaces l={clipped}", clipped)
            for l in clipped:
                choice.p_trunc[l] = min(budget - 1, resolvable_p(l, choice.w0, polar.dr))
            log.warning("forced waist: p truncation clipped for l=%s", clipped)
            choice.feasible = True
    else:
        report = select_waist(az, params.candidates, budget, dropped=params.dropped,
                              p_cap=params.p_cap, widths=widths)
        if report.selected is None:
            blocking = sorted({l for c in report.candidates for l in c.blocking(budget)})
            raise DecompositionError(
                f"no candidate waist is feasible with {budget} radial samples; "
                f"blocking subspaces l={blocking}", blocking)
        choice = report.candidate(report.selected)
    w0 = choice.w0
    log.info("w0=%.6g m, l_max=%d, modes=%d", w0, m_max, choice.mode_count)

    radii = az.radii
    jobs = [(l, radii, az.row(l), w0, choice.p_trunc[l]) for l in az.ls.tolist()]
    if params.workers > 1:
        with ThreadPoolExecutor(params.workers) as pool:
            fits = dict(pool.map(_fit_row, jobs))
    else:
        fits = dict(map(_fit_row, jobs))

    provenance = asdict(params)
    provenance["candidates"] = list(params.candidates)
    provenance["waist_scanned"] = params.forced_w0 is None
    # thread count does not affect the result, so keep it out of the record
    del provenance["workers"]
    diagnostics = {
        "ring_orders": orders,
        "retained_fraction": retained_fraction(full, m_max),
        "waist_report": report,
        "residuals": {l: f.residual for l, f in fits.items()},
        "rank_deficient": [l for l, f in fits.items() if f.rank_deficient],
        "clipped": clipped,
        "polar_power": polar.power(),
    }
    return LGSpectrum(w0, {l: f.amplitudes for l, f in fits.items()}, spec, m_max,
                      provenance, diagnostics)


def spectrum_to_azimuthal(spectrum: LGSpectrum, n_r: int, dr: float) -> AzimuthalSpectrum:
    """Evaluate ``B_l(r_j) = sum_p A_{l,p} LG_{l,p}(r_j)`` on the ring grid."""
    radii = (np.arange(n_r) + 0.5) * dr
    L = spectrum.l_max
    B = np.zeros((2 * L + 1, n_r), dtype=np.complex128)
    for l, a in spectrum.coeffs.items():
        if len(a):
            B[l + L] = a @ radial_basis(l, len(a) - 1, spectrum.w0, radii)
    return AzimuthalSpectrum(B, dr)


def reconstruct_polar(spectrum: LGSpectrum, n_r: int, n_theta: int, dr: float) -> PolarImage:
    az = spectrum_to_azimuthal(spectrum, n_r, dr)
    return azimuthal_recompose(az, max(n_theta, 2 * az.l_max + 1))


def reconstruct(spectrum: LGSpectrum, spec: DetectorSpec | None = None) -> np.ndarray:
    """Coherent LG superposition rendered on the detector via the polar grid."""
    spec = spec or spectrum.detector
    if spec is None:
        raise ValueError("no detector geometry given or recorded in the spectrum")
    if not spectrum.coeffs:
        raise ValueError("empty spectrum")
    n_r, n_theta = grid_dimensions(spec)
    return from_polar(reconstruct_polar(spectrum, n_r, n_theta, spec.pitch), spec)


def fidelity(reconstructed, original, intensity: bool = False) -> float:
    """Normalised overlap of the two intensity images, in ``[0, 1]``.

    Inputs are fields (intensity ``|U|^2``) unless ``intensity`` is set, in
    which case they are taken as non-negative intensity images directly.
    """
    a = np.abs(np.asarray(reconstructed))
    b = np.abs(np.asarray(original))
    if intensity:
        a, b = np.sqrt(a), np.sqrt(b)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    if not np.any(b):
        raise ValueError("original image has zero intensity")
    if not np.any(a):
        return 0.0
    # the score is scale invariant; normalising the amplitudes before
    # squaring keeps faint images out of underflow
    a = (a / a.max()) ** 2
    b = (b / b.max()) ** 2
    return float(min(np.sum(a * b) ** 2 / (np.sum(a * a) * np.sum(b * b)), 1.0))


def residual_map(reconstructed, original) -> np.ndarray:
    """Per-pixel intensity difference ``I_r - I_0``."""
    a = np.asarray(reconstructed)
    b = np.asarray(original)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    return np.abs(a) ** 2 - np.abs(b) ** 2
