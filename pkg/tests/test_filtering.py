import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lgdecomp.azimuthal import AzimuthalSpectrum, azimuthal_decompose, azimuthal_recompose
from lgdecomp.filtering import (BandClippedWarning, BandSpec, band_filter_spectrum, denoise,
                                l_power_spectrum)
from lgdecomp.fixtures import random_modes, render_image, ripple_fixture
from lgdecomp.pipeline import LGSpectrum, fidelity
from lgdecomp.polar_grid import DetectorSpec, PolarImage, to_polar

N_T = 401


def _spectrum(seed, n_r=6, l_max=200):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=(2 * l_max + 1, n_r)) + 1j * rng.normal(size=(2 * l_max + 1, n_r))
    return AzimuthalSpectrum(c, 1e-4)


def test_band_validation():
    with pytest.raises(ValueError):
        BandSpec(5, -5)
    assert BandSpec.symmetric(-7) == BandSpec(-7, 7)


def test_full_band_is_identity():
    s = _spectrum(0)
    out = band_filter_spectrum(s, BandSpec.symmetric(s.l_max))
    assert np.array_equal(out.coeffs, s.coeffs)


def test_energy_outside_band_is_removed():
    coeffs = np.zeros((401, 3), dtype=complex)
    coeffs[200 + 180] = coeffs[200 - 180] = 1.0
    out = band_filter_spectrum(AzimuthalSpectrum(coeffs, 1e-4), BandSpec.symmetric(150))
    assert not np.any(out.coeffs)


def test_clipped_band_warns():
    s = _spectrum(1, l_max=20)
    with pytest.warns(BandClippedWarning):
        band_filter_spectrum(s, BandSpec(-50, 10))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 31), lo=st.integers(-200, 200), width=st.integers(0, 400))
def test_projection_idempotence(seed, lo, width):
    s = _spectrum(seed, n_r=2)
    band = BandSpec(lo, min(lo + width, 200))
    once = band_filter_spectrum(s, band)
    assert np.array_equal(band_filter_spectrum(once, band).coeffs, once.coeffs)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 31), m=st.integers(0, 200))
def test_non_expansive(seed, m):
    s = _spectrum(seed, n_r=2)
    out = band_filter_spectrum(s, BandSpec.symmetric(m))
    assert np.sum(np.abs(out.coeffs) ** 2) <= np.sum(np.abs(s.coeffs) ** 2)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2 ** 31), m=st.integers(0, 200))
def test_commutes_with_full_order_round_trip(seed, m):
    s = _spectrum(seed, n_r=2)
    band = BandSpec.symmetric(m)
    via = band_filter_spectrum(azimuthal_decompose(azimuthal_recompose(s, N_T)), band)
    direct = band_filter_spectrum(s, band)
    np.testing.assert_allclose(via.coeffs, direct.coeffs, atol=1e-10 * np.abs(s.coeffs).max())


def test_filters_lg_spectrum():
    s = LGSpectrum(1e-3, {-3: [1, 2], 0: [1j], 5: [4]})
    out = band_filter_spectrum(s, BandSpec(-1, 5))
    assert out.amplitude(0, 0) == 1j and out.amplitude(5, 0) == 4
    assert not np.any(out.coeffs[-3])
    assert out.p_trunc == s.p_trunc


def test_denoise_band_limited_image():
    spec = DetectorSpec(256, 256, 50e-6)
    img = render_image(random_modes(40, 10, 8, seed=6), 1e-3, spec)
    out = denoise(img, spec, BandSpec.symmetric(150))
    r, _ = spec.polar_coordinates()
    inside = r <= 120 * spec.pitch
    assert np.linalg.norm((out - img)[inside]) <= 1e-2 * np.linalg.norm(img[inside])


def test_pure_ripple_is_removed():
    spec = DetectorSpec(512, 512, 50e-6)
    r, th = spec.polar_coordinates()
    rpx = r / spec.pitch
    ripple = np.cos(180 * th) * np.clip((rpx - 110) / 20, 0, 1) * np.clip((245 - rpx) / 10, 0, 1)
    out = denoise(ripple, spec, BandSpec.symmetric(150))
    assert np.abs(out).max() <= 1e-2 * np.abs(ripple).max()


def test_ripple_fidelity_improves():
    spec = DetectorSpec(512, 512, 50e-6)
    noisy, clean = ripple_fixture(spec)
    before = fidelity(noisy.clip(0), clean, intensity=True)
    out = denoise(noisy, spec, BandSpec.symmetric(150))
    after = fidelity(out.real.clip(0), clean, intensity=True)
    assert after - before >= 0.05


def test_l_power_spectrum_examples():
    g = np.ones((4, N_T))
    ls, pw = l_power_spectrum(azimuthal_decompose(PolarImage(g, 1.0)))
    assert pw[ls == 0][0] > 0 and np.all(pw[ls != 0] < 1e-25)
    theta = 2 * np.pi * np.arange(N_T) / N_T
    s = np.zeros((4, N_T))
    s[1] = np.cos(3 * theta)
    ls, pw = l_power_spectrum(azimuthal_decompose(PolarImage(s, 1.0)))
    assert pw[ls == 3][0] == pytest.approx(pw[ls == -3][0], rel=1e-12)
    assert pw[ls == 3][0] == pytest.approx(0.25 * 1.5, rel=1e-12)
    assert np.sum(pw) == pytest.approx(2 * 0.25 * 1.5, rel=1e-12)


def test_l_power_symmetric_for_real_images(rng):
    spec = DetectorSpec(64, 64, 1e-4)
    ls, pw = l_power_spectrum(azimuthal_decompose(to_polar(rng.normal(size=spec.shape), spec)))
    np.testing.assert_allclose(pw, pw[::-1], rtol=1e-12, atol=1e-12 * pw.max())
