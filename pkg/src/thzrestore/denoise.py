"""Patch-based (non-local means) denoising of single images and eigen-images.

Every pixel is replaced by a weighted average of the pixels inside its search
window; the weight of a candidate decays with the mean squared distance
between the two surrounding patches, debiased by twice the noise variance:

    w = exp(-max(d^2 - 2 sigma^2, 0) / h^2)

Borders are handled by reflective extension. The interface is denoiser
agnostic: a collaborative-filtering denoiser could be swapped in without
touching the pipeline.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter

from .errors import ValidationError
from .util import parallel_map


@dataclass(frozen=True)
class PatchDenoiseParams:
    """Patch size, search window, noise level and filtering strength.

    ``h`` defaults to 0.55 * sigma * patch_size.
    """

    sigma: float
    patch_size: int = 7
    search_window: int = 21
    h: float = None

    def __post_init__(self):
        if self.patch_size % 2 == 0 or self.search_window % 2 == 0:
            raise ValidationError("patch and window sizes must be odd")
        if self.search_window <= self.patch_size:
            raise ValidationError("search window must exceed the patch size")
        if self.sigma <= 0:
            raise ValidationError("sigma must be positive")
        if self.h is None:
            object.__setattr__(self, "h", 0.55 * self.sigma * self.patch_size)
        if self.h <= 0:
            raise ValidationError("filtering strength must be positive")


def patch_denoise(image, params):
    """Non-local means estimate of a single image."""
    image = np.asarray(image, dtype=np.float64)
    ny, nx = image.shape
    p = params.patch_size // 2
    s = params.search_window // 2
    two_var = 2.0 * params.sigma**2
    inv_h2 = 1.0 / params.h**2

    padded = np.pad(image, s + p, mode="symmetric")
    base = padded[s : s + ny + 2 * p, s : s + nx + 2 * p]

    num = np.zeros((ny, nx))
    den = np.zeros((ny, nx))
    for dy in range(-s, s + 1):
        for dx in range(-s, s + 1):
            shifted = padded[s + dy : s + dy + ny + 2 * p, s + dx : s + dx + nx + 2 * p]
            dist2 = uniform_filter((base - shifted) ** 2, size=params.patch_size)
            dist2 = dist2[p : p + ny, p : p + nx]
            weight = np.exp(-np.maximum(dist2 - two_var, 0.0) * inv_h2)
            num += weight * shifted[p : p + ny, p : p + nx]
            den += weight
    return num / den


def denoise_eigen_images(eigen, sigmas, params_template=None, workers=1):
    """Denoise each eigen-image at its own noise level.

    ``sigmas`` has one entry per component; zero disables denoising for that
    component. ``params_template`` optionally overrides patch size, window
    and strength (its sigma field is ignored).
    """
    sigmas = np.asarray(sigmas, dtype=np.float64)
    if sigmas.size != eigen.p:
        raise ValidationError("need one sigma per eigen-image")

    def _params(sigma):
        if params_template is None:
            return PatchDenoiseParams(sigma=sigma)
        return PatchDenoiseParams(
            sigma=sigma,
            patch_size=params_template.patch_size,
            search_window=params_template.search_window,
        )

    def _one(i):
        if sigmas[i] <= 0:
            return eigen.images[i]
        return patch_denoise(eigen.images[i], _params(sigmas[i]))

    return eigen.with_images(np.stack(parallel_map(_one, range(eigen.p), workers)))
