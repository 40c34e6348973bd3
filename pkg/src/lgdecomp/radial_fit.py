"""Radial coefficients of one OAM subspace.

Two estimators are provided: a least-squares fit of the sampled profile
against the radial LG functions, and the classical projection integral
used as a baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .lg_basis import check_waist, radial_basis

RANK_RTOL = 1e-10


@dataclass
class RadialSamples:
    l: int
    radii: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.radii.shape != self.values.shape or self.radii.ndim != 1:
            raise ValueError("radii and values must be 1-D arrays of equal length")
        if np.any(self.radii <= 0) or np.any(np.diff(self.radii) <= 0):
            raise ValueError("radii must be positive and strictly increasing")

    def __len__(self):
        return len(self.radii)


@dataclass
class SubspaceCoefficients:
    """Amplitudes ``A_{l,p}`` for ``p = 0..len(amplitudes)-1``."""

    l: int
    w0: float
    amplitudes: np.ndarray
    residual: float = 0.0
    rank_deficient: bool = False

    @property
    def p_trunc(self) -> int:
        return len(self.amplitudes) - 1


def design_matrix(l: int, p_trunc: int, w0: float, radii) -> np.ndarray:
    """``M[j, p] = LG_{l,p}(r_j)``."""
    return radial_basis(l, p_trunc, w0, radii).T


def _relative_residual(values, fitted):
    norm = np.linalg.norm(values)
    if norm == 0:
        return 0.0
    return float(np.linalg.norm(values - fitted) / norm)


def fit_radial(samples: RadialSamples, w0: float, p_trunc: int,
               rtol: float = RANK_RTOL) -> SubspaceCoefficients:
    """Least-squares radial coefficients for one subspace.

    Minimises ``sum_j |B_l(r_j) - sum_p A_{l,p} LG_{l,p}(r_j)|^2`` with an
    SVD-based solver.  Columns are scaled to unit norm first; singular
    values below ``rtol`` times the largest are discarded and the result is
    flagged ``rank_deficient``.
    """
    w0 = check_waist(w0)
    if p_trunc < 0:
        raise ValueError("p_trunc must be non-negative")
    if len(samples) < p_trunc + 1:
        raise ValueError(
            f"need at least {p_trunc + 1} radial samples for p_trunc={p_trunc}, got {len(samples)}")
    M = design_matrix(samples.l, p_trunc, w0, samples.radii)
    if not np.any(samples.values):
        return SubspaceCoefficients(samples.l, w0, np.zeros(p_trunc + 1, complex), 0.0)
    norms = np.linalg.norm(M, axis=0)
    norms[norms == 0] = 1.0
    x, _, rank, _ = scipy.linalg.lstsq(M / norms, samples.values, cond=rtol,
                                        lapack_driver="gelsd")
    amps = x / norms
    return SubspaceCoefficients(samples.l, w0, amps,
                                residual=_relative_residual(samples.values, M @ amps),
                                rank_deficient=bool(rank < p_trunc + 1))


def integral_project(samples: RadialSamples, w0: float, p_trunc: int) -> SubspaceCoefficients:
    """Projection baseline ``A_{l,p} = 2 pi int B_l(r) LG_{l,p}(r) r dr``.

    The integral is a trapezoid rule over the given (possibly non-uniform)
    radii.
    """
    w0 = check_waist(w0)
    M = design_matrix(samples.l, p_trunc, w0, samples.radii)
    r = samples.radii
    if len(r) < 2:
        weights = np.zeros_like(r)
    else:
        weights = np.zeros_like(r)
        h = np.diff(r)
        weights[:-1] += h / 2
        weights[1:] += h / 2
    amps = 2 * np.pi * (M.T @ (samples.values * r * weights))
    return SubspaceCoefficients(samples.l, w0, amps,
                                residual=_relative_residual(samples.values, M @ amps))


def decomposition_accuracy(coeffs, truth) -> float:
    """Normalised overlap ``|<a, b>|^2 / (|a|^2 |b|^2)`` of two coefficient vectors."""
    a = np.asarray(getattr(coeffs, "amplitudes", coeffs), dtype=np.complex128)
    b = np.asarray(getattr(truth, "amplitudes", truth), dtype=np.complex128)
    if a.shape != b.shape:
        raise ValueError(f"coefficient vectors differ in length: {a.shape} vs {b.shape}")
    nb = np.vdot(b, b).real
    if nb == 0:
        raise ValueError("reference coefficients have zero norm")
    na = np.vdot(a, a).real
    if na == 0:
        return 0.0
    return float(min(abs(np.vdot(b, a)) ** 2 / (na * nb), 1.0))


def compare_methods(truth, w0: float, extent: float, counts, l: int = 0):
    """Accuracy of both estimators against known coefficients.

    The profile ``sum_p truth[p] LG_{l,p}`` is sampled at ``m`` midpoints of
    ``[0, extent]`` for every ``m`` in ``counts``.  Returns an array of rows
    ``(m, accuracy_least_squares, accuracy_integral)``.
    """
    truth = np.asarray(truth, dtype=np.complex128)
    if not np.any(truth):
        raise ValueError("reference field is identically zero")
    if not extent > 0:
        raise ValueError("extent must be positive")
    p_trunc = len(truth) - 1
    rows = []
    for m in counts:
        r = (np.arange(m) + 0.5) * extent / m
        samples = RadialSamples(l, r, truth @ radial_basis(l, p_trunc, w0, r))
        rows.append((m, decomposition_accuracy(fit_radial(samples, w0, p_trunc), truth),
                     decomposition_accuracy(integral_project(samples, w0, p_trunc), truth)))
    return np.array(rows)
