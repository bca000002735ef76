"""Quantitative evaluation: flat-region noise, feature sharpness, reference
errors, integrated-amplitude maps and false-color composition.

Feature sharpness follows the high-peak/low-peak reading of a cross-section
through a feature border: among the samples within tolerance of the profile
maximum and those within tolerance of the minimum, the closest high/low pair
determines the distance (in mm). Smaller is sharper. Profiles whose extremes
sit only at the span endpoints (monotone profiles) have no defined value.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .io_formats import normalize_unit, quantize_unit

#: Fig.-10-style default channel ranges, THz.
FALSE_COLOR_RED_THZ = (0.4, 0.8)
FALSE_COLOR_GREEN_THZ = (1.7, 2.1)
FALSE_COLOR_BLUE_THZ = (4.5, 5.5)

#: PSNR values are capped at this when written to CSV.
PSNR_CSV_CAP_DB = 99.0

_EXTREMA_REL_TOL = 1e-9


@dataclass(frozen=True)
class RegionOfInterest:
    """Rectangular region in mm; converted to pixels with floor/ceil."""

    x0: float
    y0: float
    width: float
    height: float

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0 or self.x0 < 0 or self.y0 < 0:
            raise ValidationError("ROI must have positive extent and non-negative offset")

    def to_slices(self, cube):
        col0 = math.floor(self.x0 / cube.step_x)
        row0 = math.floor(self.y0 / cube.step_y)
        ncols = math.ceil(self.width / cube.step_x)
        nrows = math.ceil(self.height / cube.step_y)
        if row0 + nrows > cube.height or col0 + ncols > cube.width:
            raise ValidationError("ROI exceeds the cube's spatial extent")
        return slice(row0, row0 + nrows), slice(col0, col0 + ncols)


@dataclass(frozen=True)
class CrossSection:
    """A row or column profile restricted to a pixel span [lo, hi)."""

    orientation: str
    index: int
    lo: int
    hi: int

    def __post_init__(self):
        if self.orientation not in ("row", "col"):
            raise ValidationError("orientation must be 'row' or 'col'")
        if self.lo < 0 or self.hi <= self.lo:
            raise ValidationError("span must be a non-empty pixel range")

    def profile(self, band):
        if self.orientation == "row":
            if not 0 <= self.index < band.shape[0] or self.hi > band.shape[1]:
                raise ValidationError("cross-section outside the band")
            return band[self.index, self.lo : self.hi]
        if not 0 <= self.index < band.shape[1] or self.hi > band.shape[0]:
            raise ValidationError("cross-section outside the band")
        return band[self.lo : self.hi, self.index]


def flat_region_std(cube, roi):
    """Per-band sample standard deviation over a homogeneous region.

    Returns (std, log10_std); a perfectly constant band gives std 0 and
    -inf for the log value.
    """
    rows, cols = roi.to_slices(cube)
    patch = cube.data[:, rows, cols].reshape(cube.bands, -1)
    std = patch.std(axis=1, ddof=1)
    with np.errstate(divide="ignore"):
        log_std = np.log10(std)
    return std, log_std


def _sharpness_of_profile(profile, step):
    profile = np.asarray(profile, dtype=np.float64)
    if profile.size < 3:
        return float("nan")
    hi = profile.max()
    lo = profile.min()
    if hi == lo:
        return float("nan")
    tol = (hi - lo) * _EXTREMA_REL_TOL
    high = np.flatnonzero(profile >= hi - tol)
    low = np.flatnonzero(profile <= lo + tol)
    endpoints = {0, profile.size - 1}
    if set(high).issubset(endpoints) and set(low).issubset(endpoints):
        # Monotone profile: extremes only at the span ends, no feature border.
        return float("nan")
    distance = np.abs(high[:, None] - low[None, :]).min()
    return float(distance * step)


def feature_sharpness(cube, cross_section):
    """Distance (mm) between the closest high/low extremes, per band.

    NaN marks bands where the profile is monotone over the span.
    """
    step = cube.step_x if cross_section.orientation == "row" else cube.step_y
    out = np.empty(cube.bands)
    for i in range(cube.bands):
        out[i] = _sharpness_of_profile(cross_section.profile(cube.data[i]), step)
    return out


@dataclass(frozen=True)
class ReferenceErrors:
    """Per-band and aggregate MSE/PSNR against a reference cube."""

    mse_per_band: np.ndarray
    psnr_per_band: np.ndarray
    mse: float
    psnr: float


def mse_psnr(cube, reference):
    """Mean squared error and PSNR (peak = max of the reference)."""
    if cube.data.shape != reference.data.shape:
        raise ValidationError("cube and reference dimensions must match")
    diff = cube.data - reference.data
    mse_band = np.mean(diff**2, axis=(1, 2))
    peak = float(reference.data.max())
    peak2 = peak**2

    def _psnr(mse):
        if mse == 0:
            return float("inf")
        if peak2 == 0:
            return float("-inf")
        return 10.0 * math.log10(peak2 / mse)

    psnr_band = np.array([_psnr(m) for m in mse_band])
    total = float(np.mean(diff**2))
    return ReferenceErrors(
        mse_per_band=mse_band,
        psnr_per_band=psnr_band,
        mse=total,
        psnr=_psnr(total),
    )


def psnr_for_csv(value):
    """Cap PSNR at the CSV sentinel (handles +inf for identical inputs)."""
    return min(value, PSNR_CSV_CAP_DB)


def integrate_range(cube, f_lo, f_hi):
    """Amplitude integrated over bands with frequency in [f_lo, f_hi].

    Trapezoidal integration normalized by the spanned width, so ranges of
    different extents stay comparable. A range covering a single band
    returns that band unchanged.
    """
    if f_hi < f_lo:
        raise ValidationError("frequency range is inverted")
    selected = np.flatnonzero((cube.frequencies >= f_lo) & (cube.frequencies <= f_hi))
    if selected.size == 0:
        raise ValidationError(
            f"range [{f_lo}, {f_hi}] THz does not overlap the frequency axis"
        )
    if selected.size == 1:
        return cube.data[selected[0]].copy()
    freqs = cube.frequencies[selected]
    stack = cube.data[selected]
    integral = np.trapezoid(stack, x=freqs, axis=0)
    return integral / (freqs[-1] - freqs[0])


def _normalize_channel(channel):
    lo = channel.min()
    hi = channel.max()
    if hi == lo:
        return np.zeros_like(channel) if hi == 0 else np.full(channel.shape, 0.5)
    return (channel - lo) / (hi - lo)


def false_color(cube, r_range=FALSE_COLOR_RED_THZ, g_range=FALSE_COLOR_GREEN_THZ,
                b_range=FALSE_COLOR_BLUE_THZ):
    """8-bit RGB composite of three integrated-amplitude channels.

    Each channel is min-max normalized independently; an all-zero channel
    stays black so single-range cubes produce single-color images.
    """
    channels = [
        quantize_unit(_normalize_channel(integrate_range(cube, lo, hi)))
        for lo, hi in (r_range, g_range, b_range)
    ]
    return np.stack(channels, axis=-1)


def band_to_png_unit(band):
    """Convenience: min-max normalized [0, 1] copy of a band."""
    return normalize_unit(band)
