import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from lgdecomp.azimuthal import (AzimuthalSpectrum, azimuthal_decompose, azimuthal_recompose,
                                retained_fraction, truncation_l)
from lgdecomp.fixtures import render_polar
from lgdecomp.lg_basis import eval_radial
from lgdecomp.polar_grid import PolarImage

N_T = 61


def _ring_image(values_per_ring, n_t=N_T, dr=1.0):
    return PolarImage(np.asarray(values_per_ring, dtype=complex), dr)


def test_ring_constant_image():
    g = np.linspace(1, 2, 5)
    spec = azimuthal_decompose(_ring_image(np.repeat(g[:, None], N_T, axis=1)))
    np.testing.assert_allclose(spec.row(0), g, rtol=1e-14)
    others = np.delete(spec.coeffs, spec.l_max, axis=0)
    assert np.abs(others).max() < 1e-14


def test_cos3_on_one_ring():
    theta = 2 * np.pi * np.arange(N_T) / N_T
    s = np.zeros((4, N_T))
    s[2] = np.cos(3 * theta)
    spec = azimuthal_decompose(_ring_image(s))
    expected = np.zeros_like(spec.coeffs)
    expected[spec.l_max + 3, 2] = expected[spec.l_max - 3, 2] = 0.5
    np.testing.assert_allclose(spec.coeffs, expected, atol=1e-12)
    # direct summation oracle for one coefficient
    direct = np.sum(s[2] * np.exp(-3j * theta)) / N_T
    assert spec.row(3)[2] == pytest.approx(direct, abs=1e-15)


def test_single_mode_injection():
    w0, dr = 1e-3, 50e-6
    polar = render_polar({(7, 2): 1.0}, w0, 64, 201, dr)
    spec = azimuthal_decompose(polar)
    np.testing.assert_allclose(spec.row(7), eval_radial(7, 2, w0, polar.radii),
                               rtol=1e-10, atol=1e-12 * np.abs(spec.row(7)).max())
    others = np.delete(spec.coeffs, spec.l_max + 7, axis=0)
    assert np.abs(others).max() < 1e-10 * np.abs(spec.row(7)).max()


def test_truncation_examples():
    g = np.ones((3, N_T))
    orders, m = truncation_l(azimuthal_decompose(_ring_image(g)))
    assert m == 0 and np.all(orders == 0)
    theta = 2 * np.pi * np.arange(N_T) / N_T
    s = np.zeros((3, N_T))
    s[1] = np.cos(3 * theta)
    orders, m = truncation_l(azimuthal_decompose(_ring_image(s)))
    assert m == 3 and list(orders) == [0, 3, 0]


def test_truncation_floor_ignores_faint_rings():
    theta = 2 * np.pi * np.arange(N_T) / N_T
    s = np.ones((3, N_T), dtype=complex)
    s[2] = 1e-3 * np.cos(20 * theta)
    spec = azimuthal_decompose(_ring_image(s))
    assert truncation_l(spec)[1] == 20
    assert truncation_l(spec, floor=1e-4)[1] == 0


def test_full_order_round_trip(rng):
    s = rng.normal(size=(8, N_T)) + 1j * rng.normal(size=(8, N_T))
    polar = _ring_image(s)
    back = azimuthal_recompose(azimuthal_decompose(polar, (N_T - 1) // 2), N_T)
    np.testing.assert_allclose(back.samples, s, rtol=0, atol=1e-10 * np.abs(s).max())


def test_only_b0_gives_constant_rings():
    coeffs = np.zeros((7, 4), dtype=complex)
    coeffs[3] = [1, 2, 3, 4]
    out = azimuthal_recompose(AzimuthalSpectrum(coeffs, 1.0), 31).samples
    np.testing.assert_allclose(out, np.repeat([[1], [2], [3], [4]], 31, axis=1), atol=1e-14)


ring_data = arrays(np.float64, (5, N_T), elements=st.floats(-1e3, 1e3))


@settings(max_examples=40, deadline=None)
@given(re=ring_data, im=ring_data)
def test_parseval_per_ring(re, im):
    s = re + 1j * im
    spec = azimuthal_decompose(_ring_image(s))
    lhs = np.sum(np.abs(spec.coeffs) ** 2, axis=0)
    rhs = np.sum(np.abs(s) ** 2, axis=1) / N_T
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-10 * max(rhs.max(), 1e-300))


@settings(max_examples=40, deadline=None)
@given(re=ring_data)
def test_conjugate_symmetry_for_real_input(re):
    spec = azimuthal_decompose(_ring_image(re))
    np.testing.assert_allclose(spec.coeffs[::-1], np.conj(spec.coeffs),
                               atol=1e-12 * max(np.abs(re).max(), 1.0))


@settings(max_examples=30, deadline=None)
@given(re=ring_data, fraction=st.floats(0.5, 1.0))
def test_truncation_minimal_and_monotone(re, fraction):
    spec = azimuthal_decompose(_ring_image(re))
    orders, m_max = truncation_l(spec, fraction)
    pw = np.abs(spec.coeffs) ** 2
    L = spec.l_max
    for j, m in enumerate(orders):
        total = pw[:, j].sum()
        if total == 0:
            assert m == 0
            continue
        kept = [pw[L - k:L + k + 1, j].sum() for k in range(L + 1)]
        assert np.all(np.diff(kept) >= -1e-12 * total)
        assert kept[m] >= fraction * total * (1 - 1e-12)
        # brute force: no smaller order reaches the fraction
        assert all(kept[k] < fraction * total for k in range(m))
    assert m_max == orders.max()


def test_retained_fraction_monotone(rng):
    s = rng.normal(size=(6, N_T))
    spec = azimuthal_decompose(_ring_image(s, dr=0.1))
    fr = [retained_fraction(spec, m) for m in range(spec.l_max + 1)]
    assert np.all(np.diff(fr) >= -1e-15)
    assert fr[-1] == pytest.approx(1.0, rel=1e-12)


def test_truncated_and_bounds():
    spec = azimuthal_decompose(_ring_image(np.ones((2, N_T))))
    assert spec.truncated(4).l_max == 4
    with pytest.raises(ValueError):
        spec.truncated(spec.l_max + 1)
    with pytest.raises(ValueError):
        azimuthal_decompose(_ring_image(np.ones((2, N_T))), l_max=31)
    with pytest.raises(ValueError):
        AzimuthalSpectrum(np.ones((4, 3)), 1.0)
