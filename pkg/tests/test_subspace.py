import numpy as np
import pytest

from thzrestore import (
    AUTO,
    EigenImageSet,
    NoiseEstimate,
    NoiseModel,
    SubspaceBasis,
    ValidationError,
    add_noise,
    component_report,
    estimate_noise,
    learn_subspace,
    project,
    reconstruct,
)

from oracles import make_cube, random_orthonormal, rank3_disk_cube


def _rank3_cube(rng, bands=8, ny=32, nx=32):
    basis = random_orthonormal(bands, 3, rng)
    coeffs = rng.standard_normal((3, ny * nx)) * np.array([[3.0], [1.0], [0.4]])
    return make_cube((basis @ coeffs).reshape(bands, ny, nx)), basis, coeffs


def test_noise_estimate_needs_three_bands():
    with pytest.raises(ValidationError):
        estimate_noise(make_cube(np.zeros((2, 8, 8))))


def test_noiseless_low_rank_estimates_are_tiny():
    cube, _, _ = _rank3_cube(np.random.default_rng(0))
    est = estimate_noise(cube)
    assert est.sigma_per_band.max() <= 1e-6


def test_iid_noise_estimates_within_15_percent():
    for seed in range(10):
        rng = np.random.default_rng(100 + seed)
        spectrum = np.abs(rng.standard_normal(30)) + 0.2
        image = rng.random((64, 64)) * 2.0
        clean = make_cube(np.einsum("b,yx->byx", spectrum, image), f_min=0.3, f_max=6.0)
        noisy = add_noise(clean, NoiseModel.gaussian_iid(0.05, seed=seed))
        est = estimate_noise(noisy).sigma_per_band
        assert np.max(np.abs(est / 0.05 - 1.0)) <= 0.15


def test_noniid_ramp_recovered():
    sigmas = np.linspace(0.01, 0.2, 30)
    estimates = []
    for seed in range(10):
        rng = np.random.default_rng(seed)
        clean = make_cube(np.einsum("b,yx->byx", 20.0 * sigmas, rng.random((64, 64))),
                          f_min=0.3, f_max=6.0)
        noisy = add_noise(clean, NoiseModel.gaussian_noniid(sigmas, seed=seed))
        est = estimate_noise(noisy).sigma_per_band
        estimates.append(est)
        assert np.max(np.abs(est / sigmas - 1.0)) <= 0.2
    mean_est = np.mean(estimates, axis=0)
    assert np.all(np.diff(mean_est) > 0)


def test_learn_subspace_exact_recovery():
    cube, basis0, _ = _rank3_cube(np.random.default_rng(1))
    learned = learn_subspace(cube, 3, estimate_noise(cube))
    projected = learned.matrix @ (learned.matrix.T @ basis0)
    assert np.linalg.norm(basis0 - projected) <= 1e-6


def test_auto_rank_on_noiseless_and_noisy_cubes():
    cube, _, _ = _rank3_cube(np.random.default_rng(2))
    assert learn_subspace(cube, AUTO, estimate_noise(cube)).p == 3
    hits = 0
    for seed in range(10):
        rng = np.random.default_rng(200 + seed)
        noisy = cube.with_data(cube.data + 0.01 * rng.standard_normal(cube.data.shape))
        if learn_subspace(noisy, AUTO, estimate_noise(noisy)).p == 3:
            hits += 1
    assert hits >= 9


def test_full_rank_basis_is_lossless():
    rng = np.random.default_rng(3)
    cube = make_cube(rng.random((6, 16, 16)))
    basis = learn_subspace(cube, 6, NoiseEstimate.uniform(1.0, 6))
    assert basis.p == 6
    back = reconstruct(basis, project(cube, basis))
    assert np.max(np.abs(back.data - cube.data)) <= 1e-8


def test_project_with_identity_basis_returns_bands():
    rng = np.random.default_rng(4)
    cube = make_cube(rng.random((4, 8, 8)))
    basis = SubspaceBasis(np.eye(4))
    eigen = project(cube, basis)
    assert np.allclose(eigen.images, cube.data)


def test_project_recovers_exact_coefficients():
    rng = np.random.default_rng(5)
    basis0 = random_orthonormal(7, 3, rng)
    coeffs = rng.standard_normal((3, 12 * 12))
    cube = make_cube((basis0 @ coeffs).reshape(7, 12, 12))
    eigen = project(cube, SubspaceBasis(basis0))
    assert np.max(np.abs(eigen.as_matrix() - coeffs)) <= 1e-8


def test_projection_is_non_expansive():
    rng = np.random.default_rng(6)
    cube = make_cube(rng.standard_normal((6, 10, 10)))
    basis = learn_subspace(cube, 3, NoiseEstimate.uniform(1.0, 6))
    eigen = project(cube, basis)
    assert np.linalg.norm(eigen.as_matrix()) <= np.linalg.norm(cube.as_matrix()) + 1e-12


def test_rank_p_residual_matches_eigen_spectrum():
    rng = np.random.default_rng(7)
    cube = make_cube(rng.standard_normal((8, 16, 16)))
    y = cube.as_matrix()
    n = y.shape[1]
    evals = np.sort(np.linalg.eigvalsh(y @ y.T / n))[::-1]
    for p in (2, 5):
        basis = learn_subspace(cube, p, NoiseEstimate.uniform(1.0, 8))
        approx = reconstruct(basis, project(cube, basis))
        residual = np.linalg.norm(y - approx.as_matrix()) ** 2
        expected = n * evals[p:].sum()
        assert residual == pytest.approx(expected, rel=1e-6)


def test_zero_eigen_images_give_zero_cube():
    rng = np.random.default_rng(8)
    cube = make_cube(rng.random((5, 8, 8)))
    basis = learn_subspace(cube, 2, NoiseEstimate.uniform(1.0, 5))
    eigen = project(cube, basis)
    zero = eigen.with_images(np.zeros_like(eigen.images))
    assert np.all(reconstruct(basis, zero).data == 0.0)


def test_reconstruct_project_is_idempotent():
    rng = np.random.default_rng(9)
    cube = make_cube(rng.standard_normal((7, 14, 14)))
    basis = learn_subspace(cube, 3, NoiseEstimate.uniform(1.0, 7))
    once = reconstruct(basis, project(cube, basis))
    twice = reconstruct(basis, project(once, basis))
    assert np.max(np.abs(once.data - twice.data)) <= 1e-8


def test_learned_basis_invariants():
    rng = np.random.default_rng(10)
    for trial in range(5):
        cube = make_cube(rng.standard_normal((9, 12, 12)))
        basis = learn_subspace(cube, 4, NoiseEstimate.uniform(1.0, 9))
        gram = basis.matrix.T @ basis.matrix
        assert np.max(np.abs(gram - np.eye(4))) <= 1e-8
        # sign convention: peak-magnitude element of each column non-negative
        for j in range(4):
            col = basis.matrix[:, j]
            assert col[np.argmax(np.abs(col))] >= 0
        # energy ordering of the eigen-images
        energies = np.sum(project(cube, basis).as_matrix() ** 2, axis=1)
        assert np.all(np.diff(energies) <= 1e-9)


def test_component_report_effective_frequency():
    freqs = np.linspace(1.0, 4.0, 4)
    cube = make_cube(np.random.default_rng(11).random((4, 8, 8)), f_min=1.0, f_max=4.0)
    basis = SubspaceBasis(np.eye(4)[:, 1:3])
    eigen = project(cube, basis)
    report = component_report(basis, eigen, freqs)
    assert report[0].effective_frequency == pytest.approx(freqs[1])
    assert report[1].effective_frequency == pytest.approx(freqs[2])


def test_component_report_edge_score_of_constant_is_zero():
    basis = SubspaceBasis(np.eye(3)[:, :2])
    images = np.stack([np.full((8, 8), 4.0), np.random.default_rng(1).random((8, 8))])
    eigen = EigenImageSet(images=images, step_x=0.5, step_y=0.5,
                          frequencies=np.array([1.0, 2.0, 3.0]))
    report = component_report(basis, eigen, np.array([1.0, 2.0, 3.0]))
    assert report[0].edge_energy == 0.0
    assert report[1].edge_energy > 0.0


def test_disk_cube_first_component_dominates():
    cube = rank3_disk_cube(bands=20, ny=48, nx=48)
    basis = learn_subspace(cube, 3, NoiseEstimate.uniform(1.0, 20))
    report = component_report(basis, project(cube, basis))
    assert report[0].energy_fraction > 0.8
    fractions = [c.energy_fraction for c in report]
    assert np.all(np.diff(fractions) <= 0)


def test_dimension_mismatch_errors():
    rng = np.random.default_rng(12)
    cube = make_cube(rng.random((5, 8, 8)))
    other = make_cube(rng.random((4, 8, 8)))
    basis = learn_subspace(cube, 2, NoiseEstimate.uniform(1.0, 5))
    with pytest.raises(ValidationError):
        project(other, basis)
    eigen = project(cube, basis)
    bad_basis = SubspaceBasis(np.eye(5)[:, :3])
    with pytest.raises(ValidationError):
        reconstruct(bad_basis, eigen)
    with pytest.raises(ValidationError):
        learn_subspace(cube, 9, NoiseEstimate.uniform(1.0, 5))
