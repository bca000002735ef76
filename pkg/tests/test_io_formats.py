import numpy as np
import pytest
from PIL import Image

from thzrestore import CorruptionError, FormatError, HyperCube, ValidationError
from thzrestore.io_formats import (
    HEADER_SIZE,
    export_band,
    normalize_unit,
    quantize_unit,
    read_cube,
    write_cube,
)

from oracles import make_cube


def _random_cube(rng, b, ny, nx):
    # float32-representable payload so the container round trip is exact
    data = rng.standard_normal((b, ny, nx)).astype(np.float32).astype(np.float64)
    return make_cube(data)


def test_round_trip_identity(tmp_path):
    rng = np.random.default_rng(42)
    for trial in range(10):
        b = int(rng.integers(1, 6))
        ny = int(rng.integers(1, 12))
        nx = int(rng.integers(1, 12))
        cube = _random_cube(rng, b, ny, nx)
        path = tmp_path / f"cube_{trial}.thz"
        write_cube(cube, path)
        back = read_cube(path)
        assert np.array_equal(back.data, cube.data)
        assert np.array_equal(back.frequencies, cube.frequencies)
        assert back.step_x == cube.step_x and back.step_y == cube.step_y


def test_minimal_file_is_46_bytes(tmp_path):
    cube = HyperCube(frequencies=[1.0], data=np.zeros((1, 1, 1)), step_x=0.2, step_y=0.2)
    path = tmp_path / "one.thz"
    write_cube(cube, path)
    assert path.stat().st_size == 46
    assert HEADER_SIZE == 34


def test_payload_size_arithmetic(tmp_path):
    cube = make_cube(np.zeros((50, 64, 64)))
    path = tmp_path / "big.thz"
    write_cube(cube, path)
    assert path.stat().st_size == HEADER_SIZE + 8 * 50 + 819200


def test_bad_magic_raises(tmp_path):
    path = tmp_path / "bad.thz"
    path.write_bytes(b"XXXX" + bytes(60))
    with pytest.raises(FormatError):
        read_cube(path)


def test_bad_version_raises(tmp_path):
    cube = make_cube(np.zeros((1, 2, 2)))
    path = tmp_path / "v.thz"
    write_cube(cube, path)
    raw = bytearray(path.read_bytes())
    raw[4] = 9  # bump version field
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError):
        read_cube(path)


def test_truncated_payload_raises(tmp_path):
    cube = make_cube(np.zeros((2, 4, 4)))
    path = tmp_path / "t.thz"
    write_cube(cube, path)
    raw = path.read_bytes()
    # declared dims need 2*16*4 = 128 data bytes; keep only 100
    path.write_bytes(raw[: HEADER_SIZE + 16 + 100])
    with pytest.raises(CorruptionError):
        read_cube(path)


def test_nan_cube_rejected_and_nothing_written(tmp_path):
    path = tmp_path / "nan.thz"
    with pytest.raises(ValidationError):
        data = np.zeros((2, 4, 4))
        data[1, 2, 2] = np.nan
        write_cube(make_cube(data), path)
    assert not path.exists()


def test_nonfinite_file_rejected(tmp_path):
    cube = make_cube(np.zeros((1, 2, 2)))
    path = tmp_path / "inf.thz"
    write_cube(cube, path)
    raw = bytearray(path.read_bytes())
    raw[-4:] = np.array([np.inf], dtype="<f4").tobytes()
    path.write_bytes(bytes(raw))
    with pytest.raises(ValidationError):
        read_cube(path)


def test_cube_invariants():
    with pytest.raises(ValidationError):
        HyperCube(frequencies=[2.0, 1.0], data=np.zeros((2, 4, 4)), step_x=0.2, step_y=0.2)
    with pytest.raises(ValidationError):
        HyperCube(frequencies=[1.0, 25.0], data=np.zeros((2, 4, 4)), step_x=0.2, step_y=0.2)
    with pytest.raises(ValidationError):
        HyperCube(frequencies=[1.0], data=np.zeros((1, 4, 4)), step_x=-0.2, step_y=0.2)
    with pytest.raises(ValidationError):
        HyperCube(frequencies=[1.0, 2.0], data=np.zeros((3, 4, 4)), step_x=0.2, step_y=0.2)


def test_cube_data_is_immutable():
    cube = make_cube(np.zeros((1, 4, 4)))
    with pytest.raises(ValueError):
        cube.data[0, 0, 0] = 1.0


def test_export_constant_band_is_midgray(tmp_path):
    cube = make_cube(np.full((1, 5, 5), 3.3))
    path = tmp_path / "flat.png"
    export_band(cube, 0, path)
    img = np.asarray(Image.open(path))
    assert img.shape == (5, 5)
    assert np.all(img == 128)


def test_export_rounds_half_up(tmp_path):
    band = np.array([[0.0, 1.0], [2.0, 2.0]])
    cube = make_cube(band[None])
    path = tmp_path / "b.png"
    export_band(cube, 0, path)
    img = np.asarray(Image.open(path))
    # value 1.0 normalizes to 0.5 -> 127.5 -> rounds half up to 128
    assert img[0, 1] == 128
    assert img[0, 0] == 0 and img[1, 0] == 255


def test_export_band_index_bounds(tmp_path):
    cube = make_cube(np.zeros((2, 4, 4)))
    with pytest.raises(ValidationError):
        export_band(cube, 2, tmp_path / "x.png")


def test_export_scale_invariance(tmp_path):
    rng = np.random.default_rng(7)
    band = rng.random((16, 16))
    a = quantize_unit(normalize_unit(band))
    b = quantize_unit(normalize_unit(4.25 * band - 17.0))
    assert np.max(np.abs(a.astype(int) - b.astype(int))) <= 1
