import math

import numpy as np
import pytest
from scipy.integrate import quad

from thzrestore import (
    BeamGeometry,
    BeamParams,
    ConfigError,
    Psf,
    ValidationError,
    beam_params,
    beam_radius,
    beam_waist,
    delta_psf,
    intensity,
    psf_from_radius,
    synthesize_psf,
    wavelength_from_frequency,
)

GEOM = BeamGeometry(focal_length=4.0, aperture_diameter=1.0)


def test_wavelength_examples():
    assert wavelength_from_frequency(1.0) == pytest.approx(0.299792458, abs=1e-12)
    assert wavelength_from_frequency(0.299792458) == pytest.approx(1.0, abs=1e-12)
    assert wavelength_from_frequency(3.0) == pytest.approx(0.099930819, abs=1e-6)
    with pytest.raises(ValidationError):
        wavelength_from_frequency(0.0)


def test_waist_matches_focusing_optics():
    # two-mirror optics, 1 inch diameter and 4 inch length: w0 ~ 2.547 lambda
    assert beam_waist(1.0, GEOM) == pytest.approx(2.546, abs=1e-3)
    assert beam_waist(math.pi, BeamGeometry(1.0, 1.0)) == pytest.approx(2.0, abs=1e-12)
    lam = wavelength_from_frequency(1.0)
    assert beam_waist(lam, GEOM) == pytest.approx(0.763414, abs=1e-5)


def test_beam_radius_profile():
    params = BeamParams.from_waist(wavelength=0.3, waist_radius=1.0)
    assert beam_radius(0.0, params) == params.waist_radius
    assert beam_radius(params.rayleigh_length, params) == pytest.approx(
        params.waist_radius * math.sqrt(2.0), rel=1e-12
    )
    for z in (0.1, 1.7, 12.0):
        assert beam_radius(z, params) == beam_radius(-z, params)
        assert beam_radius(z, params) >= params.waist_radius


def test_beam_radius_at_twice_rayleigh():
    params = beam_params(1.0, GEOM)
    assert params.waist_radius == pytest.approx(0.7634, abs=1e-4)
    assert params.rayleigh_length == pytest.approx(6.107, abs=2e-3)
    assert beam_radius(2.0 * params.rayleigh_length, params) == pytest.approx(1.707, abs=1e-3)


def test_beam_params_consistency_enforced():
    with pytest.raises(ValidationError):
        BeamParams(wavelength=0.3, waist_radius=1.0, rayleigh_length=1.0)


def test_intensity_peak_and_decay():
    params = BeamParams.from_waist(wavelength=0.3, waist_radius=1.0)
    assert intensity(0.0, 0.0, math.pi / 2.0, params) == pytest.approx(1.0, rel=1e-12)
    for z in (0.0, 3.0):
        w = beam_radius(z, params)
        peak = intensity(0.0, z, 1.0, params)
        assert intensity(w, z, 1.0, params) == pytest.approx(peak * math.exp(-2.0), rel=1e-12)


def test_intensity_integrates_to_power():
    params = beam_params(1.3, GEOM)
    power = 2.7
    for z in (0.0, 4.0, 11.0):
        total, _ = quad(
            lambda r: intensity(r, z, power, params) * 2.0 * math.pi * r, 0.0, np.inf
        )
        assert total == pytest.approx(power, rel=1e-6)


def test_psf_sigma_at_one_thz():
    psf = synthesize_psf(1.0, GEOM, step=0.2)
    assert psf.sigma == pytest.approx(0.3817, abs=5e-4)
    assert psf.sigma_px == pytest.approx(1.909, abs=0.01)


def test_psf_kernel_normalization_and_symmetry():
    for f in (0.28, 1.1, 3.3, 5.85):
        psf = synthesize_psf(f, GEOM, step=0.2)
        assert abs(psf.kernel.sum() - 1.0) <= 1e-9
        assert np.allclose(psf.kernel, psf.kernel[::-1, :])
        assert np.allclose(psf.kernel, psf.kernel[:, ::-1])
        assert np.allclose(psf.kernel, psf.kernel.T)
        k = psf.half_width
        assert psf.kernel[k, k] == psf.kernel.max()


def test_psf_sigma_strictly_decreasing_in_frequency():
    sigmas = [synthesize_psf(f, GEOM, step=0.2).sigma
              for f in (0.28, 0.38, 1.1, 2.1, 3.3, 4.87, 5.85)]
    assert all(a > b for a, b in zip(sigmas, sigmas[1:]))


def test_high_frequency_psf_collapses_to_delta():
    psf = synthesize_psf(20.0 - 1e-9, GEOM, step=2.0, truncation_radius_in_w=3.0)
    k = psf.half_width
    assert psf.kernel[k, k] > 0.999


def test_oversized_kernel_rejected():
    with pytest.raises(ConfigError):
        synthesize_psf(0.28, GEOM, step=0.001)


def test_truncation_precondition():
    with pytest.raises(ValidationError):
        synthesize_psf(1.0, GEOM, step=0.2, truncation_radius_in_w=1.0)


def test_psf_depth_dependence():
    params = beam_params(1.0, GEOM)
    at_focus = synthesize_psf(1.0, GEOM, step=0.2, z=0.0)
    off_focus = synthesize_psf(1.0, GEOM, step=0.2, z=2.0 * params.rayleigh_length)
    assert off_focus.sigma == pytest.approx(at_focus.sigma * math.sqrt(5.0), rel=1e-12)


def test_delta_psf_is_delta():
    psf = delta_psf(0.2)
    assert psf.kernel.shape == (1, 1)
    assert psf.is_delta()
    tiny = psf_from_radius(1e-9, step=0.2)
    assert tiny.is_delta()


def test_psf_validation():
    with pytest.raises(ValidationError):
        Psf(kernel=np.ones((2, 2)) / 4.0, step=0.2, sigma=0.1)
    with pytest.raises(ValidationError):
        Psf(kernel=np.full((3, 3), 1 / 8.0), step=0.2, sigma=0.1)  # sums to 9/8
