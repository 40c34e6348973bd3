"""Laguerre-Gaussian basis functions at the beam waist.

All radial evaluation is done with a rescaled three-term recurrence carried
in extended precision, so that normalisation constants, powers of ``r`` and
Gaussian envelopes never materialise as separate (overflowing) numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.linalg import eigh_tridiagonal

MAX_ORDER = 512
DEFAULT_DROPPED = 8

_LD = np.longdouble
# rescale threshold for the recurrence; far below longdouble overflow
_BIG = _LD(2.0) ** 1000
_LOG_BIG = math.log(2.0) * 1000


class ModeIndex(NamedTuple):
    """Azimuthal index ``l`` and radial index ``p`` of one LG mode."""

    l: int
    p: int


class OrderBoundsError(ValueError):
    """Raised when a mode index exceeds the configured maximum order."""


class DegenerateModeError(ValueError):
    """Raised when a mode has too few nodes to build an effective area."""


class RootBracketingError(RuntimeError):
    """Raised when the node search cannot isolate every root of a mode."""


@dataclass(frozen=True)
class EffectiveArea:
    """Outer edge of the effective area of one LG mode.

    ``n1`` and ``n2`` are the outermost and second outermost surviving node
    radii in units of the beam waist.  ``degenerate`` marks the fallback
    used when fewer than ``dropped + 2`` nodes exist.
    """

    n1: float
    n2: float
    dropped: int
    degenerate: bool = False


def check_order(l: int, p: int, max_order: int = MAX_ORDER) -> None:
    if p < 0:
        raise OrderBoundsError(f"radial index must be non-negative, got p={p}")
    if abs(l) > max_order or p > max_order:
        raise OrderBoundsError(
            f"mode (l={l}, p={p}) exceeds the maximum order {max_order}")


def check_waist(w0: float) -> float:
    w0 = float(w0)
    if not (math.isfinite(w0) and w0 > 0):
        raise ValueError(f"beam waist must be positive and finite, got {w0!r}")
    return w0


def _recurrence(p_max, alpha, x, normalized, keep_all):
    """Run the Laguerre recurrence up to ``p_max``.

    Returns ``(mantissa, log_scale)`` with ``value = mantissa * exp(log_scale)``.
    With ``keep_all`` the arrays have a leading axis of length ``p_max + 1``.
    In normalized mode the polynomial is divided by ``sqrt(binom(p+alpha, p))``.
    """
    x = np.asarray(x, dtype=_LD)
    a = _LD(alpha)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    scale = np.zeros(x.shape, dtype=np.float64)
    if keep_all:
        mant = np.empty((p_max + 1,) + x.shape, dtype=_LD)
        logs = np.empty((p_max + 1,) + x.shape, dtype=np.float64)
        mant[0] = cur
        logs[0] = scale
    for n in range(p_max):
        if normalized:
            nxt = ((2 * n + a + 1 - x) * cur
                   - np.sqrt(_LD(n) * (n + a)) * prev) / np.sqrt(_LD(n + 1) * (n + 1 + a))
        else:
            nxt = ((2 * n + a + 1 - x) * cur - (n + a) * prev) / (n + 1)
        prev, cur = cur, nxt
        big = np.abs(cur) > _BIG
        if np.any(big):
            cur = np.where(big, cur / _BIG, cur)
            prev = np.where(big, prev / _BIG, prev)
            scale = scale + np.where(big, _LOG_BIG, 0.0)
        if keep_all:
            mant[n + 1] = cur
            logs[n + 1] = scale
    if keep_all:
        return mant, logs
    return cur, scale


def log_laguerre(p: int, alpha: float, x):
    """Sign and natural log of ``|L_p^alpha(x)|``.

    Useful where the polynomial itself overflows a double (large ``x`` and
    ``p``).  Zeros give ``log = -inf``.
    """
    check_order(0, p)
    mant, scale = _recurrence(p, alpha, x, normalized=False, keep_all=False)
    sign = np.sign(mant).astype(np.float64)
    with np.errstate(divide="ignore"):
        logabs = np.log(np.abs(mant)).astype(np.float64) + scale
    return sign, logabs


def laguerre(p: int, alpha: float, x):
    """Generalized Laguerre polynomial ``L_p^alpha(x)``.

    Parameters
    ----------
    p : int
        polynomial degree, ``0 <= p <= MAX_ORDER``
    alpha : float
        non-negative shape parameter
    x : float or numpy.ndarray
        evaluation points

    Returns
    -------
    float or numpy.ndarray
        the polynomial value; ``inf`` when it exceeds the double range
    """
    check_order(0, p)
    mant, scale = _recurrence(p, alpha, x, normalized=False, keep_all=False)
    with np.errstate(over="ignore"):
        out = (mant * np.exp(scale.astype(_LD))).astype(np.float64)
    return out if np.ndim(out) else float(out)


@lru_cache(maxsize=1)
def _log_factorials_cached(n: int) -> np.ndarray:
    k = np.arange(1, n + 1, dtype=_LD)
    return np.concatenate([[_LD(0)], np.cumsum(np.log(k))])


def _log_factorials(n: int) -> np.ndarray:
    return _log_factorials_cached(max(n, 2 * MAX_ORDER))


def radial_basis(l: int, p_max: int, w0: float, r) -> np.ndarray:
    """Radial profiles ``LG_{l,p}(r)`` for all ``p = 0..p_max`` at once.

    Returns an array of shape ``(p_max + 1,) + r.shape``.  The profiles are
    normalised so that ``2*pi * int LG^2 r dr = 1``.
    """
    check_order(l, p_max)
    w0 = check_waist(w0)
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 0):
        raise ValueError("radii must be non-negative")
    alpha = abs(int(l))
    rs = r.astype(_LD) / _LD(w0)
    x = 2 * rs * rs
    mant, logs = _recurrence(p_max, alpha, x, normalized=True, keep_all=True)
    # x^(alpha/2) exp(-x/2) / sqrt(alpha!) in log form
    with np.errstate(divide="ignore"):
        logx = np.log(x)
    if alpha == 0:
        log_env = -x / 2
    else:
        log_env = np.where(x > 0, alpha / _LD(2) * logx, -np.inf) - x / 2
    log_env = log_env - _log_factorials(alpha)[alpha] / 2
    log_pref = _LD(0.5) * np.log(_LD(2) / _LD(np.pi)) - np.log(_LD(w0))
    total = log_env + log_pref + logs.astype(_LD)
    with np.errstate(over="ignore", under="ignore"):
        out = mant * np.exp(total)
    return out.astype(np.float64)


def eval_radial(l: int, p: int, w0: float, r):
    """Real radial profile of ``LG_{l,p}`` at radius ``r`` (metres)."""
    out = radial_basis(l, p, w0, np.asarray(r, dtype=np.float64))[p]
    return out if np.ndim(out) else float(out)


def eval_field(l: int, p: int, w0: float, r, theta):
    """Complex LG field ``LG_{l,p}(r, theta)`` at the waist plane."""
    rad = radial_basis(l, p, w0, np.asarray(r, dtype=np.float64))[p]
    out = rad * np.exp(1j * l * np.asarray(theta, dtype=np.float64))
    return out if np.ndim(out) else complex(out)


def _node_search_limit(p: int, alpha: int) -> float:
    # all zeros of L_p^alpha lie below 4p + 2*alpha + 2
    x_turn = 4.0 * p + 2.0 * alpha + 6.0
    return math.sqrt(x_turn / 2.0)


def _node_sign(alpha, p, rho):
    mant, _ = _recurrence(p, alpha, 2 * np.asarray(rho, dtype=_LD) ** 2,
                          normalized=True, keep_all=False)
    return np.sign(mant)


def radial_nodes(l: int, p: int, w0: float, rtol: float = 1e-13) -> np.ndarray:
    """Radii of the ``p`` radial nodes of ``LG_{l,p}``, ascending.

    Roots are bracketed by sign changes of the Laguerre factor on a grid of
    ``32 p`` radii up to the classical turning point and then refined by
    vectorised bisection.
    """
    check_order(l, p)
    w0 = check_waist(w0)
    if p == 0:
        return np.empty(0)
    alpha = abs(int(l))
    rho_max = _node_search_limit(p, alpha)
    grid = np.linspace(0.0, rho_max, 32 * p + 1)[1:]
    s = _node_sign(alpha, p, grid)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    exact = np.flatnonzero(s == 0)
    if len(idx) + len(exact) != p:
        raise RootBracketingError(
            f"found {len(idx) + len(exact)} sign changes for mode (l={l}, p={p}), expected {p}")
    lo = grid[idx].astype(_LD)
    hi = grid[idx + 1].astype(_LD)
    s_lo = s[idx]
    while True:
        width = hi - lo
        if np.all(width <= rtol * hi):
            break
        mid = (lo + hi) / 2
        s_mid = _node_sign(alpha, p, mid)
        go_hi = s_mid == s_lo
        lo = np.where(go_hi, mid, lo)
        hi = np.where(go_hi, hi, mid)
        done = s_mid == 0
        lo = np.where(done, mid, lo)
        hi = np.where(done, mid, hi)
    roots = np.concatenate([((lo + hi) / 2).astype(np.float64), grid[exact]])
    roots.sort()
    _verify_nodes(alpha, p, roots, l)
    return roots * w0


def _verify_nodes(alpha, p, rho, l):
    mant, _ = _recurrence(p, alpha, 2 * rho.astype(_LD) ** 2, normalized=True, keep_all=False)
    # local polynomial scale: the largest neighbour magnitude a quarter spacing away
    gaps = np.diff(np.concatenate([[0.0], rho, [rho[-1] * 1.1 + 1.0]]))
    probe = np.concatenate([rho - gaps[:-1] / 4, rho + gaps[1:] / 4])
    pm, _ = _recurrence(p, alpha, 2 * probe.astype(_LD) ** 2, normalized=True, keep_all=False)
    local = np.maximum(np.abs(pm[: len(rho)]), np.abs(pm[len(rho):]))
    bad = np.abs(mant) >= 1e-10 * local
    if np.any(bad) or np.any(np.diff(rho) <= 0):
        raise RootBracketingError(f"node refinement failed for mode (l={l}, p={p})")


def laguerre_zeros(p: int, alpha: int) -> np.ndarray:
    """Zeros of ``L_p^alpha`` from the eigenvalues of its Jacobi matrix."""
    if p == 0:
        return np.empty(0)
    k = np.arange(p, dtype=np.float64)
    diag = 2 * k + alpha + 1
    off = -np.sqrt(k[1:] * (k[1:] + alpha))
    return eigh_tridiagonal(diag, off, eigvals_only=True)


@lru_cache(maxsize=4096)
def _outer_nodes(alpha: int, p: int, dropped: int) -> tuple[float, float]:
    k = np.arange(p, dtype=np.float64)
    diag = 2 * k + alpha + 1
    off = -np.sqrt(k[1:] * (k[1:] + alpha))
    i = p - dropped - 1
    x = eigh_tridiagonal(diag, off, eigvals_only=True, select="i",
                         select_range=(i - 1, i))
    return math.sqrt(x[1] / 2), math.sqrt(x[0] / 2)


def effective_area(l: int, p: int, w0: float = 1.0, dropped: int = DEFAULT_DROPPED,
                   strict: bool = True) -> EffectiveArea:
    """Outer two nodes of the effective area after removing ``dropped`` nodes.

    The result is dimensionless (node radius divided by ``w0``), so ``w0``
    only enters through validation.  With ``strict=False`` modes with fewer
    than ``dropped + 2`` nodes fall back to ``dropped=0`` and are flagged.
    """
    check_order(l, p)
    check_waist(w0)
    if dropped < 0:
        raise ValueError("dropped must be non-negative")
    degenerate = False
    if p < dropped + 2:
        if strict or p < 2:
            raise DegenerateModeError(
                f"mode (l={l}, p={p}) has fewer than {dropped + 2} nodes")
        dropped, degenerate = 0, True
    n1, n2 = _outer_nodes(abs(int(l)), int(p), int(dropped))
    return EffectiveArea(n1=n1, n2=n2, dropped=dropped, degenerate=degenerate)


@lru_cache(maxsize=1024)
def effective_area_table(alpha: int, dropped: int = DEFAULT_DROPPED,
                         p_cap: int = MAX_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """``(n1, n2)`` arrays indexed by ``p`` for ``p = 0..p_cap``.

    Entries below ``dropped + 2`` are NaN.  Cached per ``(|l|, dropped)``.
    """
    n1 = np.full(p_cap + 1, np.nan)
    n2 = np.full(p_cap + 1, np.nan)
    for p in range(dropped + 2, p_cap + 1):
        n1[p], n2[p] = _outer_nodes(alpha, p, dropped)
    n1.setflags(write=False)
    n2.setflags(write=False)
    return n1, n2
