"""Hypercube container I/O and image/CSV export.

The on-disk container is a minimal little-endian binary format:

====================  ==========================================
magic                 4 ASCII bytes ``THZC``
version               uint16, currently 1
b, ny, nx             uint32 each
step_x, step_y        float64, millimeters
frequencies           b float64, THz
data                  b*ny*nx float32, band-major then row-major
====================  ==========================================

The header is 34 bytes, so a valid file is exactly
``34 + 8*b + 4*b*ny*nx`` bytes long.
"""

import csv
import struct
from dataclasses import dataclass, replace

import numpy as np
from PIL import Image

from .errors import CorruptionError, FormatError, ValidationError

MAGIC = b"THZC"
VERSION = 1
_HEADER = struct.Struct("<4sHIIIdd")
HEADER_SIZE = _HEADER.size  # 34

#: Step sizes the scanning stage supports; synthetic cubes may use any
#: positive value.
INSTRUMENT_STEP_SIZES_MM = (0.1, 0.2, 0.5, 1.0, 2.0)

FREQUENCY_RANGE_THZ = (0.0, 20.0)


@dataclass(frozen=True)
class HyperCube:
    """A b-band stack of ny*nx amplitude images with its sampling metadata.

    ``data`` has shape (bands, ny, nx); ``frequencies`` is the strictly
    increasing THz axis. Instances are immutable: the arrays are marked
    read-only so cubes can be shared across threads.
    """

    frequencies: np.ndarray
    data: np.ndarray
    step_x: float
    step_y: float

    def __post_init__(self):
        freqs = np.ascontiguousarray(np.asarray(self.frequencies, dtype=np.float64))
        data = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "data", data)
        if data.ndim != 3:
            raise ValidationError(f"data must be 3-d (bands, ny, nx), got {data.ndim}-d")
        if freqs.ndim != 1 or freqs.shape[0] != data.shape[0]:
            raise ValidationError("frequency axis length must equal the band count")
        if freqs.shape[0] == 0:
            raise ValidationError("cube must contain at least one band")
        if not np.all(np.isfinite(freqs)):
            raise ValidationError("frequencies must be finite")
        if np.any(freqs <= FREQUENCY_RANGE_THZ[0]) or np.any(freqs >= FREQUENCY_RANGE_THZ[1]):
            raise ValidationError("frequencies must lie in (0, 20) THz")
        if freqs.shape[0] > 1 and np.any(np.diff(freqs) <= 0):
            raise ValidationError("frequencies must be strictly increasing")
        for name, step in (("step_x", self.step_x), ("step_y", self.step_y)):
            if not np.isfinite(step) or step <= 0:
                raise ValidationError(f"{name} must be positive and finite")
        if not np.all(np.isfinite(data)):
            raise ValidationError("cube data must be finite (no NaN/Inf)")
        freqs.setflags(write=False)
        data.setflags(write=False)

    @property
    def bands(self):
        return self.data.shape[0]

    @property
    def height(self):
        return self.data.shape[1]

    @property
    def width(self):
        return self.data.shape[2]

    @property
    def n_pixels(self):
        return self.data.shape[1] * self.data.shape[2]

    def as_matrix(self):
        """Band-by-pixel view of shape (bands, ny*nx)."""
        return self.data.reshape(self.bands, self.n_pixels)

    def with_data(self, data):
        """New cube with the same metadata and replaced voxel data."""
        return replace(self, data=np.asarray(data, dtype=np.float64))

    def band(self, index):
        if not 0 <= index < self.bands:
            raise ValidationError(f"band index {index} out of range [0, {self.bands})")
        return self.data[index]


def cube_from_matrix(matrix, template):
    """Rebuild a cube from a (bands, ny*nx) matrix using ``template`` metadata."""
    matrix = np.asarray(matrix, dtype=np.float64)
    return template.with_data(matrix.reshape(template.bands, template.height, template.width))


def write_cube(cube, path):
    """Serialize a cube to the binary container at ``path``.

    The payload is stored as float32; everything else is exact. Refuses to
    write a cube with non-finite values.
    """
    if not np.all(np.isfinite(cube.data)):
        raise ValidationError("refusing to write non-finite cube data")
    b, ny, nx = cube.data.shape
    header = _HEADER.pack(MAGIC, VERSION, b, ny, nx, float(cube.step_x), float(cube.step_y))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(cube.frequencies.astype("<f8").tobytes())
        fh.write(cube.data.astype("<f4").tobytes())


def read_cube(path):
    """Parse a container file back into a HyperCube.

    Raises FormatError on bad magic/version, CorruptionError if the file
    length disagrees with the declared dimensions, ValidationError if the
    decoded cube violates an invariant.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < HEADER_SIZE:
        raise FormatError(f"file too short for a cube header ({len(raw)} bytes)")
    magic, version, b, ny, nx, step_x, step_y = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"unsupported container version {version}")
    expected = HEADER_SIZE + 8 * b + 4 * b * ny * nx
    if len(raw) != expected:
        raise CorruptionError(
            f"file length {len(raw)} does not match declared dims "
            f"{b}x{ny}x{nx} (expected {expected})"
        )
    freqs = np.frombuffer(raw, dtype="<f8", count=b, offset=HEADER_SIZE)
    data = np.frombuffer(raw, dtype="<f4", count=b * ny * nx, offset=HEADER_SIZE + 8 * b)
    data = data.astype(np.float64).reshape(b, ny, nx)
    return HyperCube(frequencies=freqs.copy(), data=data, step_x=step_x, step_y=step_y)


def normalize_unit(image):
    """Min-max normalize to [0, 1]; a constant image maps to 0.5."""
    image = np.asarray(image, dtype=np.float64)
    lo = image.min()
    hi = image.max()
    if hi == lo:
        return np.full(image.shape, 0.5)
    return (image - lo) / (hi - lo)


def quantize_unit(image):
    """[0, 1] floats to uint8 gray levels, rounding half up."""
    levels = np.floor(np.clip(image, 0.0, 1.0) * 255.0 + 0.5)
    return np.clip(levels, 0, 255).astype(np.uint8)


def export_band(cube, band_index, path):
    """Write one band as an 8-bit grayscale PNG, min-max normalized."""
    band = cube.band(band_index)
    Image.fromarray(quantize_unit(normalize_unit(band)), mode="L").save(path, format="PNG")


def save_gray_png(image, path):
    """Min-max normalize an arbitrary 2D array and save as 8-bit gray PNG."""
    Image.fromarray(quantize_unit(normalize_unit(image)), mode="L").save(path, format="PNG")


def save_rgb_png(rgb, path):
    """Save an (ny, nx, 3) uint8 array as an RGB PNG."""
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.dtype != np.uint8:
        raise ValidationError("expected (ny, nx, 3) uint8 RGB data")
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")


def write_csv(path, header, rows):
    """UTF-8 CSV with a header row; floats keep '.' as decimal separator."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
