"""Synthetic phantoms and the degradation operator: per-band beam blur + noise.

Noise is generated with numpy's Philox (4x64 counter-based) bit generator.
Each band draws from its own stream keyed by ``seed XOR band_index``, so
results are reproducible and independent of how bands are scheduled.
"""

import math
from dataclasses import dataclass

import numpy as np

from .beam import synthesize_psf, DEFAULT_TRUNCATION_IN_W
from .convolve import reflect_convolve
from .errors import ConfigError, ValidationError
from .io_formats import HyperCube
from .util import parallel_map

PHANTOM_KINDS = ("disk_hole", "rings", "bars")
NOISE_KINDS = ("gaussian_iid", "gaussian_noniid", "poisson")


@dataclass(frozen=True)
class PhantomSpec:
    """Piecewise-constant test scene.

    ``background`` and ``foreground`` are either scalars or per-band arrays,
    so contrast may ramp over frequency. ``feature_px`` is the disk radius
    for ``disk_hole``, the annulus width for ``rings`` and the bar width for
    ``bars`` (pixels).
    """

    kind: str
    ny: int
    nx: int
    step: float
    frequencies: np.ndarray
    background: object = 1.0
    foreground: object = 0.0
    feature_px: int = 0

    def __post_init__(self):
        if self.kind not in PHANTOM_KINDS:
            raise ValidationError(f"unknown phantom kind {self.kind!r}")
        if self.ny < 16 or self.nx < 16:
            raise ValidationError("phantom must be at least 16x16 pixels")
        if self.step <= 0:
            raise ValidationError("step must be positive")
        freqs = np.asarray(self.frequencies, dtype=np.float64)
        object.__setattr__(self, "frequencies", freqs)
        # Zero contrast (foreground == background everywhere) is allowed and
        # renders a constant cube; it is useful as a degenerate fixture.
        _per_band(self.background, freqs.size)
        _per_band(self.foreground, freqs.size)
        if self.feature_px < 0:
            raise ValidationError("feature size must be non-negative")

    def default_feature_px(self):
        if self.feature_px > 0:
            return self.feature_px
        if self.kind == "disk_hole":
            return min(self.ny, self.nx) // 4
        return 4


def _per_band(value, bands):
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 0:
        return np.full(bands, float(arr))
    if arr.shape != (bands,):
        raise ValidationError("per-band amplitude must be scalar or length-b")
    return arr


@dataclass(frozen=True)
class NoiseModel:
    """One of three degradation noise types, with its Philox seed."""

    kind: str
    sigma: float = 0.0
    sigma_per_band: np.ndarray = None
    gain: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValidationError(f"unknown noise kind {self.kind!r}")
        if self.kind == "gaussian_iid" and self.sigma <= 0:
            raise ValidationError("gaussian_iid requires sigma > 0")
        if self.kind == "gaussian_noniid":
            sig = np.asarray(self.sigma_per_band, dtype=np.float64)
            if sig.ndim != 1 or np.any(sig <= 0):
                raise ValidationError("gaussian_noniid requires positive per-band sigmas")
            object.__setattr__(self, "sigma_per_band", sig)
        if self.kind == "poisson" and self.gain <= 0:
            raise ValidationError("poisson requires gain > 0")

    @classmethod
    def gaussian_iid(cls, sigma, seed=0):
        return cls(kind="gaussian_iid", sigma=sigma, seed=seed)

    @classmethod
    def gaussian_noniid(cls, sigma_per_band, seed=0):
        return cls(kind="gaussian_noniid", sigma_per_band=sigma_per_band, seed=seed)

    @classmethod
    def poisson(cls, gain, seed=0):
        return cls(kind="poisson", gain=gain, seed=seed)

    def describe(self):
        out = {"kind": self.kind, "seed": int(self.seed)}
        if self.kind == "gaussian_iid":
            out["sigma"] = float(self.sigma)
        elif self.kind == "gaussian_noniid":
            out["sigma_per_band"] = [float(s) for s in self.sigma_per_band]
        else:
            out["gain"] = float(self.gain)
        return out


def _band_rng(seed, band_index):
    return np.random.Generator(np.random.Philox(key=np.uint64(seed) ^ np.uint64(band_index)))


def generate_phantom(spec):
    """Render a PhantomSpec to a clean HyperCube."""
    bands = spec.frequencies.size
    bg = _per_band(spec.background, bands)
    fg = _per_band(spec.foreground, bands)
    feature = spec.default_feature_px()

    yy = np.arange(spec.ny, dtype=np.float64)[:, None] - (spec.ny - 1) / 2.0
    xx = np.arange(spec.nx, dtype=np.float64)[None, :] - (spec.nx - 1) / 2.0
    if spec.kind == "disk_hole":
        mask = (yy**2 + xx**2) <= feature**2
    elif spec.kind == "rings":
        radius = np.sqrt(yy**2 + xx**2)
        mask = (np.floor_divide(radius, feature).astype(np.int64) % 2) == 1
        mask &= radius <= min(spec.ny, spec.nx) / 2.0 - 1.0
    else:  # bars
        cols = np.arange(spec.nx) // feature
        mask = np.broadcast_to((cols % 2) == 1, (spec.ny, spec.nx))

    data = np.where(mask[None, :, :], fg[:, None, None], bg[:, None, None])
    return HyperCube(frequencies=spec.frequencies, data=data,
                     step_x=spec.step, step_y=spec.step)


def blur_cube(cube, geometry, z=0.0, truncation=DEFAULT_TRUNCATION_IN_W, workers=1):
    """Convolve every band with its frequency's beam kernel.

    Requires square pixels: the PSF is sampled on a single step size.
    """
    if not math.isclose(cube.step_x, cube.step_y, rel_tol=1e-12):
        raise ConfigError("blur requires square pixels (step_x == step_y)")

    def _one(index):
        psf = synthesize_psf(cube.frequencies[index], geometry, cube.step_x,
                             z=z, truncation_radius_in_w=truncation)
        return reflect_convolve(cube.data[index], psf.kernel)

    blurred = parallel_map(_one, range(cube.bands), workers)
    return cube.with_data(np.stack(blurred))


def add_noise(cube, model, workers=1):
    """Apply a NoiseModel; deterministic given the model's seed."""
    if model.kind == "poisson" and np.any(cube.data < 0):
        raise ValidationError("poisson noise requires non-negative amplitudes")
    if model.kind == "gaussian_noniid" and model.sigma_per_band.size != cube.bands:
        raise ValidationError("sigma_per_band length must equal the band count")

    def _one(index):
        rng = _band_rng(model.seed, index)
        band = cube.data[index]
        if model.kind == "gaussian_iid":
            return band + rng.normal(0.0, model.sigma, band.shape)
        if model.kind == "gaussian_noniid":
            return band + rng.normal(0.0, model.sigma_per_band[index], band.shape)
        return rng.poisson(band / model.gain).astype(np.float64) * model.gain

    noisy = parallel_map(_one, range(cube.bands), workers)
    return cube.with_data(np.stack(noisy))


def simulate(spec, geometry, model, z=0.0, workers=1):
    """Clean phantom plus its degraded observation (blur then noise)."""
    clean = generate_phantom(spec)
    degraded = add_noise(blur_cube(clean, geometry, z=z, workers=workers), model, workers)
    return clean, degraded
