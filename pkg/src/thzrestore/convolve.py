"""2D convolution with reflective (edge-mirrored) boundary handling.

All blur and deconvolution code in the toolkit goes through these helpers so
the forward model and the restoration solvers share one boundary convention:
the image is extended by mirroring across each edge (numpy's ``symmetric``
padding), which keeps a sum-one kernel exactly DC-preserving.
"""

import numpy as np
from scipy.ndimage import convolve as _direct_convolve
from scipy.signal import fftconvolve

# Below this kernel pixel count the direct path is used; it is faster for
# tiny kernels and, for an exact delta kernel, reproduces the input bitwise.
_DIRECT_MAX_TAPS = 49


def reflect_convolve(image, kernel):
    """Convolve ``image`` with ``kernel`` under reflective boundaries.

    Output has the same shape as the input. The kernel must be odd-sized in
    both dimensions.
    """
    image = np.asarray(image, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.shape[0] % 2 == 0 or kernel.shape[1] % 2 == 0:
        raise ValueError("kernel must be odd-sized")
    if kernel.size <= _DIRECT_MAX_TAPS:
        return _direct_convolve(image, kernel, mode="reflect")
    ky = kernel.shape[0] // 2
    kx = kernel.shape[1] // 2
    padded = np.pad(image, ((ky, ky), (kx, kx)), mode="symmetric")
    out = fftconvolve(padded, kernel, mode="same")
    return out[ky : ky + image.shape[0], kx : kx + image.shape[1]]


def reflect_correlate(image, kernel):
    """Correlation (convolution with the flipped kernel), reflective borders."""
    return reflect_convolve(image, np.asarray(kernel)[::-1, ::-1])


def symmetric_extension(image):
    """Whole-image symmetric extension to double size along each axis.

    Circular convolution of the extension with a symmetric kernel, restricted
    to the original window, equals :func:`reflect_convolve` whenever the
    kernel half-width does not exceed the image size. Frequency-domain solvers
    operate on this extension and crop back.
    """
    ny, nx = image.shape
    return np.pad(image, ((0, ny), (0, nx)), mode="symmetric")


def kernel_otf(kernel, shape):
    """FFT of ``kernel`` zero-embedded in ``shape`` with its center at (0, 0)."""
    kernel = np.asarray(kernel, dtype=np.float64)
    kh, kw = kernel.shape
    if kh > shape[0] or kw > shape[1]:
        raise ValueError("kernel larger than the transform domain")
    pad = np.zeros(shape, dtype=np.float64)
    pad[:kh, :kw] = kernel
    pad = np.roll(pad, (-(kh // 2), -(kw // 2)), axis=(0, 1))
    return np.fft.fft2(pad)
