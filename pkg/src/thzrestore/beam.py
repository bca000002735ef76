"""Gaussian beam optics and synthesis of the frequency-dependent blur kernel.

Units are millimeters and THz throughout. The transverse intensity profile of
the beam at a plane ``z`` along the propagation axis is

    I(r, z) = P / (pi * w(z)^2 / 2) * exp(-2 r^2 / w(z)^2)

with beam radius ``w(z) = w0 * sqrt(1 + (z / z_R)^2)`` and Rayleigh length
``z_R = pi * w0^2 / lambda``. The focused waist follows from the focusing
optics: ``2 w0 = (4 / pi) * lambda * f_L / D``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ValidationError

#: Speed of light in mm * THz (mm per picosecond).
SPEED_OF_LIGHT_MM_THZ = 0.299792458

#: Kernels above this edge length are rejected: the step is too small
#: relative to the beam radius.
MAX_KERNEL_SIZE = 4096

DEFAULT_TRUNCATION_IN_W = 3.0


@dataclass(frozen=True)
class BeamGeometry:
    """Focusing optics: focal length f_L and aperture diameter D, in mm."""

    focal_length: float
    aperture_diameter: float

    def __post_init__(self):
        if self.focal_length <= 0 or self.aperture_diameter <= 0:
            raise ValidationError("focal length and aperture diameter must be positive")

    @property
    def f_number(self):
        return self.focal_length / self.aperture_diameter


@dataclass(frozen=True)
class BeamParams:
    """Wavelength, waist radius w0 and Rayleigh length z_R (all mm)."""

    wavelength: float
    waist_radius: float
    rayleigh_length: float

    def __post_init__(self):
        if min(self.wavelength, self.waist_radius, self.rayleigh_length) <= 0:
            raise ValidationError("beam parameters must be positive")
        expected = math.pi * self.waist_radius**2 / self.wavelength
        if abs(self.rayleigh_length - expected) > 1e-12 * expected:
            raise ValidationError(
                "rayleigh_length inconsistent with pi*w0^2/lambda "
                f"(got {self.rayleigh_length}, expected {expected})"
            )

    @classmethod
    def from_waist(cls, wavelength, waist_radius):
        return cls(
            wavelength=wavelength,
            waist_radius=waist_radius,
            rayleigh_length=math.pi * waist_radius**2 / wavelength,
        )


@dataclass(frozen=True)
class Psf:
    """Discretized 2D blur kernel.

    ``kernel`` is odd-sized square, non-negative, sums to one, is symmetric
    under horizontal/vertical/transpose flips and peaks at the center.
    ``step`` is mm per pixel; ``sigma`` is the Gaussian standard deviation
    in mm (half the local beam radius).
    """

    kernel: np.ndarray
    step: float
    sigma: float

    def __post_init__(self):
        kernel = np.ascontiguousarray(np.asarray(self.kernel, dtype=np.float64))
        object.__setattr__(self, "kernel", kernel)
        if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1] or kernel.shape[0] % 2 == 0:
            raise ValidationError("PSF kernel must be odd-sized and square")
        if np.any(kernel < 0):
            raise ValidationError("PSF kernel weights must be non-negative")
        total = kernel.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"PSF kernel must sum to 1 (got {total})")
        if not (
            np.allclose(kernel, kernel[::-1, :], atol=1e-12)
            and np.allclose(kernel, kernel[:, ::-1], atol=1e-12)
            and np.allclose(kernel, kernel.T, atol=1e-12)
        ):
            raise ValidationError("PSF kernel must be flip- and transpose-symmetric")
        k = kernel.shape[0] // 2
        if kernel[k, k] < kernel.max():
            raise ValidationError("PSF center element must be the maximum")
        if self.step <= 0:
            raise ValidationError("PSF step must be positive")
        kernel.setflags(write=False)

    @property
    def half_width(self):
        return self.kernel.shape[0] // 2

    @property
    def sigma_px(self):
        return self.sigma / self.step

    def is_delta(self):
        """True when the kernel is an exact one-pixel impulse."""
        k = self.half_width
        return self.kernel[k, k] == 1.0


def wavelength_from_frequency(frequency_thz):
    """Wavelength in mm for a frequency in THz."""
    if frequency_thz <= 0:
        raise ValidationError("frequency must be positive")
    return SPEED_OF_LIGHT_MM_THZ / frequency_thz


def beam_waist(wavelength, geometry):
    """Waist radius w0 = (2/pi) * lambda * f_L / D, in mm."""
    if wavelength <= 0:
        raise ValidationError("wavelength must be positive")
    return (2.0 / math.pi) * wavelength * geometry.f_number


def beam_params(frequency_thz, geometry):
    """BeamParams at a given frequency for the given focusing optics."""
    lam = wavelength_from_frequency(frequency_thz)
    return BeamParams.from_waist(lam, beam_waist(lam, geometry))


def beam_radius(z, params):
    """Beam radius w(z) = w0 * sqrt(1 + (z/z_R)^2), even in z."""
    return params.waist_radius * math.sqrt(1.0 + (z / params.rayleigh_length) ** 2)


def intensity(r, z, power, params):
    """Transverse intensity at radius r and axial position z.

    The profile integrates to ``power`` over the transverse plane at any z.
    """
    if power < 0:
        raise ValidationError("power must be non-negative")
    w = beam_radius(z, params)
    r = np.asarray(r, dtype=np.float64)
    return power / (math.pi * w**2 / 2.0) * np.exp(-2.0 * r**2 / w**2)


def psf_from_radius(radius_mm, step, truncation_radius_in_w=DEFAULT_TRUNCATION_IN_W):
    """Sample the transverse Gaussian profile of a beam of radius ``radius_mm``.

    The kernel samples exp(-2 r^2 / w^2) at pixel centers out to
    ``truncation_radius_in_w * w`` and is normalized to sum one, which makes
    sigma = w/2 in mm.
    """
    if radius_mm <= 0:
        raise ValidationError("beam radius must be positive")
    if step <= 0:
        raise ValidationError("step must be positive")
    if truncation_radius_in_w < 2:
        raise ValidationError("truncation radius must be at least 2 beam radii")
    half = math.ceil(truncation_radius_in_w * radius_mm / step)
    size = 2 * half + 1
    if size > MAX_KERNEL_SIZE:
        raise ConfigError(
            f"PSF kernel {size}x{size} exceeds {MAX_KERNEL_SIZE}: "
            "step too small relative to the beam radius"
        )
    coords = np.arange(-half, half + 1, dtype=np.float64) * step
    r2 = coords[:, None] ** 2 + coords[None, :] ** 2
    kernel = np.exp(-2.0 * r2 / radius_mm**2)
    kernel /= kernel.sum()
    return Psf(kernel=kernel, step=step, sigma=radius_mm / 2.0)


def synthesize_psf(frequency_thz, geometry, step, z=0.0,
                   truncation_radius_in_w=DEFAULT_TRUNCATION_IN_W):
    """Blur kernel for a band at ``frequency_thz``, sampled at depth ``z``."""
    params = beam_params(frequency_thz, geometry)
    return psf_from_radius(beam_radius(z, params), step, truncation_radius_in_w)


def delta_psf(step):
    """One-pixel identity kernel (used to disable deblurring)."""
    return Psf(kernel=np.ones((1, 1)), step=step, sigma=step * 1e-12)
