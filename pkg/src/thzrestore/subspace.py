"""Signal-subspace identification for hyperspectral cubes.

Covers the shared front and back ends of the restoration pipelines: per-band
noise estimation by inter-band regression, subspace learning from the
noise-whitened band correlation matrix, projection to eigen-images and
reconstruction, plus a per-component diagnostic report.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .io_formats import HyperCube

AUTO = "auto"

#: Relative margin over the noise floor used by automatic rank selection.
AUTO_TAU = 0.05

#: Ridge added to the band Gram matrix, as a fraction of the trace of the
#: band correlation matrix (total mean-square amplitude).
RIDGE_FACTOR = 1e-6

#: Whitening floor relative to the cube's RMS amplitude; keeps near-noiseless
#: cubes from being divided by numerically meaningless sigma estimates.
SIGMA_FLOOR_REL = 1e-7


@dataclass(frozen=True)
class NoiseEstimate:
    """Per-band noise standard deviations."""

    sigma_per_band: np.ndarray

    def __post_init__(self):
        sig = np.asarray(self.sigma_per_band, dtype=np.float64)
        object.__setattr__(self, "sigma_per_band", sig)
        if sig.ndim != 1 or not np.all(np.isfinite(sig)) or np.any(sig < 0):
            raise ValidationError("noise sigmas must be finite and non-negative")

    @classmethod
    def uniform(cls, sigma, bands):
        return cls(np.full(bands, float(sigma)))


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal basis E (bands x p) for the signal subspace."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.ascontiguousarray(np.asarray(self.matrix, dtype=np.float64))
        object.__setattr__(self, "matrix", mat)
        if mat.ndim != 2 or not 1 <= mat.shape[1] <= mat.shape[0]:
            raise ValidationError("basis must be b x p with 1 <= p <= b")
        gram = mat.T @ mat
        if np.max(np.abs(gram - np.eye(mat.shape[1]))) > 1e-8:
            raise ValidationError("basis columns must be orthonormal")
        mat.setflags(write=False)

    @property
    def bands(self):
        return self.matrix.shape[0]

    @property
    def p(self):
        return self.matrix.shape[1]


@dataclass(frozen=True)
class EigenImageSet:
    """Representation coefficients reshaped to p images of ny x nx pixels."""

    images: np.ndarray
    step_x: float
    step_y: float
    frequencies: np.ndarray

    def __post_init__(self):
        imgs = np.ascontiguousarray(np.asarray(self.images, dtype=np.float64))
        object.__setattr__(self, "images", imgs)
        freqs = np.asarray(self.frequencies, dtype=np.float64)
        object.__setattr__(self, "frequencies", freqs)
        if imgs.ndim != 3:
            raise ValidationError("eigen-images must be (p, ny, nx)")

    @property
    def p(self):
        return self.images.shape[0]

    @property
    def ny(self):
        return self.images.shape[1]

    @property
    def nx(self):
        return self.images.shape[2]

    def as_matrix(self):
        return self.images.reshape(self.p, self.ny * self.nx)

    def with_images(self, images):
        return replace(self, images=np.asarray(images, dtype=np.float64))


def estimate_noise(cube):
    """Per-band noise sigma from regressing each band on all other bands.

    A small ridge term keeps the regression solvable when the band Gram
    matrix is rank deficient, so the estimate never fails on finite input.
    """
    if cube.bands < 3:
        raise ValidationError("noise estimation needs at least 3 bands")
    y = cube.as_matrix()
    b, n = y.shape
    gram = y @ y.T
    ridge = RIDGE_FACTOR * np.trace(gram) / n
    if ridge <= 0:
        ridge = RIDGE_FACTOR
    gram_inv = np.linalg.inv(gram + ridge * np.eye(b))
    sigmas = np.empty(b)
    for i in range(b):
        # Regression on all bands but i, via the partitioned-inverse identity.
        partial = gram_inv - np.outer(gram_inv[:, i], gram_inv[i, :]) / gram_inv[i, i]
        rhs = gram[:, i].copy()
        rhs[i] = 0.0
        beta = partial @ rhs
        beta[i] = 0.0
        residual = y[i] - beta @ y
        sigmas[i] = residual.std()
    return NoiseEstimate(sigmas)


def _whitening_weights(cube, noise):
    sig = noise.sigma_per_band
    if sig.size != cube.bands:
        raise ValidationError("noise estimate length must equal the band count")
    floor = SIGMA_FLOOR_REL * np.sqrt(np.mean(cube.data**2))
    return np.maximum(sig, max(floor, 1e-300))


def _fix_signs(basis):
    out = basis.copy()
    for j in range(out.shape[1]):
        peak = np.argmax(np.abs(out[:, j]))
        if out[peak, j] < 0:
            out[:, j] = -out[:, j]
    return out


def learn_subspace(cube, p=AUTO, noise=None):
    """Learn an orthonormal signal basis from a (possibly noisy) cube.

    The band correlation matrix is formed after whitening by the per-band
    noise sigmas; eigenvectors are mapped back through the whitening and
    re-orthonormalized. With ``p=AUTO`` the rank is the number of whitened
    eigenvalues above ``(1 + tau)`` times the noise floor, where the floor is
    the Marchenko-Pastur upper edge ``(1 + sqrt(b/n))^2`` of a pure-noise
    correlation matrix, clamped to [1, b].

    Each returned column has its largest-magnitude element non-negative, so
    eigen-images are reproducible.
    """
    if noise is None:
        noise = estimate_noise(cube)
    y = cube.as_matrix()
    b, n = y.shape
    weights = _whitening_weights(cube, noise)
    yw = y / weights[:, None]
    corr = (yw @ yw.T) / n
    evals, evecs = np.linalg.eigh(corr)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]

    if p == AUTO:
        floor = (1.0 + np.sqrt(b / n)) ** 2
        chosen = int(np.count_nonzero(evals > (1.0 + AUTO_TAU) * floor))
        p = min(max(chosen, 1), b)
    else:
        p = int(p)
        if not 1 <= p <= b:
            raise ValidationError(f"subspace dimension must be in [1, {b}]")

    unwhitened = weights[:, None] * evecs[:, :p]
    q, _ = np.linalg.qr(unwhitened)
    return SubspaceBasis(_fix_signs(q))


def project(cube, basis):
    """Noisy eigen-images: coefficients of the cube in the basis."""
    if basis.bands != cube.bands:
        raise ValidationError("basis band count must match the cube")
    coeffs = basis.matrix.T @ cube.as_matrix()
    return EigenImageSet(
        images=coeffs.reshape(basis.p, cube.height, cube.width),
        step_x=cube.step_x,
        step_y=cube.step_y,
        frequencies=cube.frequencies,
    )


def reconstruct(basis, eigen):
    """Cube estimate from basis and eigen-images, metadata restored."""
    if basis.p != eigen.p:
        raise ValidationError("basis and eigen-image dimensions disagree")
    data = basis.matrix @ eigen.as_matrix()
    return HyperCube(
        frequencies=eigen.frequencies,
        data=data.reshape(basis.bands, eigen.ny, eigen.nx),
        step_x=eigen.step_x,
        step_y=eigen.step_y,
    )


@dataclass(frozen=True)
class ComponentInfo:
    """Diagnostics for one subspace component."""

    index: int
    energy_fraction: float
    effective_frequency: float
    edge_energy: float


def component_report(basis, eigen, frequencies=None):
    """Energy share, spectral center and edge score of each component.

    The effective frequency of a component is the basis-column-weighted mean
    of the band frequencies (weights are the squared column entries); the
    edge score is the mean gradient magnitude of the eigen-image divided by
    its standard deviation.
    """
    if frequencies is None:
        frequencies = eigen.frequencies
    frequencies = np.asarray(frequencies, dtype=np.float64)
    if frequencies.size != basis.bands:
        raise ValidationError("frequency axis length must match the basis")
    energies = np.sum(eigen.as_matrix() ** 2, axis=1)
    total = energies.sum()
    report = []
    for i in range(basis.p):
        col2 = basis.matrix[:, i] ** 2
        f_eff = float(np.sum(col2 * frequencies) / np.sum(col2))
        img = eigen.images[i]
        sd = img.std()
        if sd < 1e-300:
            edge = 0.0
        else:
            gy, gx = np.gradient(img)
            edge = float(np.mean(np.hypot(gy, gx)) / sd)
        fraction = float(energies[i] / total) if total > 0 else 0.0
        report.append(ComponentInfo(index=i, energy_fraction=fraction,
                                    effective_frequency=f_eff, edge_energy=edge))
    return report
