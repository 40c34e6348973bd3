"""Truncation orders in ``p`` and beam-waist selection.

For each OAM subspace two widths are measured from its radial profile: the
radius enclosing most of the power and the spatial frequency enclosing most
of the spectral power.  A truncated mode is adequate when the outer edge of
its effective area covers that radius and its outer node spacing resolves
that frequency.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .azimuthal import AzimuthalSpectrum
from .lg_basis import DEFAULT_DROPPED, MAX_ORDER, check_waist, effective_area_table
from .radial_fit import RadialSamples

DEFAULT_SCAN = tuple(np.round(np.arange(600e-6, 1500e-6 + 1e-9, 25e-6), 9))


class UndefinedWidthsError(ValueError):
    """The subspace carries no power, so its widths are undefined."""


class InfeasibleSubspaceError(ValueError):
    """No truncation order up to the cap satisfies both conditions."""

    def __init__(self, l, w0, p_cap):
        super().__init__(f"no p <= {p_cap} satisfies the effective-area conditions "
                         f"for l={l} at w0={w0:.6g} m")
        self.l = l
        self.w0 = w0


@dataclass(frozen=True)
class SubspaceWidths:
    l: int
    r_l: float
    f_l: float


def subspace_widths(row: RadialSamples, power_frac_r: float = 0.99,
                    power_frac_f: float = 0.95, pad: int = 4) -> SubspaceWidths:
    """Spatial and frequency widths of one subspace profile.

    ``r_l`` is the first sample radius at which the enclosed power
    ``sum |B|^2 r dr`` reaches ``power_frac_r`` of the total.  ``f_l`` is the
    smallest frequency ``F`` (cycles per metre) for which the band
    ``|f| <= F`` of the profile's spectrum holds ``power_frac_f`` of its power.
    The profile is extended to negative radii with parity ``(-1)^l`` (the cut
    along a diameter) and zero padded ``pad`` times before the FFT; radii are
    assumed uniformly spaced.
    """
    r = row.radii
    v = row.values
    w = np.abs(v) ** 2 * r
    total = w.sum()
    if total == 0:
        raise UndefinedWidthsError(f"subspace l={row.l} has zero power")
    cum = np.cumsum(w)
    r_l = float(r[np.argmax(cum >= power_frac_r * total)])

    dr = r[1] - r[0] if len(r) > 1 else 2 * r[0]
    sign = -1.0 if row.l % 2 else 1.0
    line = np.concatenate([sign * v[::-1], v])
    n = pad * len(line)
    spec = np.abs(np.fft.fft(line, n)) ** 2
    freq = np.abs(np.fft.fftfreq(n, dr))
    order = np.argsort(freq, kind="stable")
    cum_f = np.cumsum(spec[order])
    f_l = float(freq[order][np.argmax(cum_f >= power_frac_f * cum_f[-1])])
    if f_l == 0:
        # all power at DC: the narrowest resolvable band is one frequency bin
        f_l = float(1.0 / (n * dr))
    return SubspaceWidths(row.l, r_l, f_l)


def truncation_p(l: int, w0: float, widths: SubspaceWidths,
                 dropped: int = DEFAULT_DROPPED, p_cap: int = MAX_ORDER) -> int:
    """Smallest ``p`` whose effective area covers and resolves the subspace.

    Coverage: ``N1 * w0 > r_l``.  Resolution: ``2 (N1 - N2) w0 <= 1 / f_l``.
    The search starts at ``dropped + 2``.
    """
    w0 = check_waist(w0)
    n1, n2 = effective_area_table(abs(int(l)), dropped, p_cap)
    with np.errstate(invalid="ignore"):
        ok = (n1 * w0 > widths.r_l) & (2 * (n1 - n2) * w0 <= 1.0 / widths.f_l)
    hits = np.flatnonzero(ok)
    if len(hits) == 0:
        raise InfeasibleSubspaceError(l, w0, p_cap)
    return int(hits[0])


@dataclass
class WaistCandidate:
    w0: float
    p_trunc: dict  # l -> int, or None when the subspace is infeasible
    feasible: bool

    @property
    def max_samples(self) -> float:
        ps = self.p_trunc.values()
        if any(p is None for p in ps):
            return float("inf")
        return max((p + 1 for p in ps), default=0)

    @property
    def mode_count(self) -> float:
        ps = self.p_trunc.values()
        if any(p is None for p in ps):
            return float("inf")
        return sum(p + 1 for p in ps)

    def blocking(self, sample_budget: int) -> list:
        return [l for l, p in self.p_trunc.items() if p is None or p + 1 > sample_budget]


@dataclass
class WaistReport:
    candidates: list
    selected: float | None
    sample_budget: int
    widths: dict = field(default_factory=dict)

    def candidate(self, w0: float) -> WaistCandidate:
        for c in self.candidates:
            if np.isclose(c.w0, w0, rtol=1e-12, atol=0):
                return c
        raise KeyError(w0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["w0", "l", "p_trunc", "feasible"])
        for c in self.candidates:
            for l in sorted(c.p_trunc):
                p = c.p_trunc[l]
                writer.writerow([repr(float(c.w0)), l, "" if p is None else p, int(c.feasible)])
        return buf.getvalue()


def spectrum_widths(spectrum: AzimuthalSpectrum, power_frac_r: float = 0.99,
                    power_frac_f: float = 0.95, min_row_power: float = 0.0) -> dict:
    """Widths per subspace; ``None`` for rows treated as empty.

    Rows whose weighted power is at most ``min_row_power`` times that of
    the strongest row count as empty.
    """
    radii = spectrum.radii
    power = (np.abs(spectrum.coeffs) ** 2 * radii).sum(axis=1)
    floor = min_row_power * power.max() if power.size else 0.0
    out = {}
    for l, pw in zip(spectrum.ls, power):
        l = int(l)
        if pw == 0 or pw <= floor:
            out[l] = None
            continue
        out[l] = subspace_widths(RadialSamples(l, radii, spectrum.row(l)),
                                 power_frac_r, power_frac_f)
    return out


def evaluate_waist(w0: float, widths: dict, sample_budget: int,
                   dropped: int = DEFAULT_DROPPED, p_cap: int = MAX_ORDER) -> WaistCandidate:
    p_trunc = {}
    for l, wd in widths.items():
        if wd is None:
            p_trunc[l] = dropped + 2
            continue
        try:
            p_trunc[l] = truncation_p(l, w0, wd, dropped, p_cap)
        except InfeasibleSubspaceError:
            p_trunc[l] = None
    feasible = all(p is not None and p + 1 <= sample_budget for p in p_trunc.values())
    return WaistCandidate(float(w0), p_trunc, feasible)


def select_waist(spectrum: AzimuthalSpectrum, candidates=DEFAULT_SCAN,
                 sample_budget: int = 256, *, dropped: int = DEFAULT_DROPPED,
                 p_cap: int = MAX_ORDER, power_frac_r: float = 0.99,
                 power_frac_f: float = 0.95, min_row_power: float = 0.0,
                 widths: dict | None = None) -> WaistReport:
    """Scan candidate waists and pick the feasible one with the fewest modes.

    A candidate is feasible when every subspace needs at most
    ``sample_budget`` radial samples (``p_trunc + 1``).  Ties in mode count
    go to the larger waist; ``selected`` is ``None`` when nothing is
    feasible.
    """
    candidates = [check_waist(w) for w in candidates]
    if not candidates:
        raise ValueError("no candidate waists given")
    if widths is None:
        widths = spectrum_widths(spectrum, power_frac_r, power_frac_f, min_row_power)
    evaluated = [evaluate_waist(w, widths, sample_budget, dropped, p_cap) for w in candidates]
    best = None
    for c in evaluated:
        if not c.feasible:
            continue
        if best is None or (c.mode_count, -c.w0) < (best.mode_count, -best.w0):
            best = c
    return WaistReport(evaluated, None if best is None else best.w0, sample_budget, widths)
