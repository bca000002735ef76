"""thzrestore: simulation and restoration of THz time-domain amplitude cubes.

The toolkit models the frequency-dependent Gaussian-beam blur and instrument
noise of a raster-scanning THz time-domain imager, and restores degraded
hyperspectral amplitude cubes either band by band, by subspace denoising, or
by joint deblurring and denoising of the subspace eigen-images.
"""

from .beam import (
    BeamGeometry,
    BeamParams,
    Psf,
    beam_params,
    beam_radius,
    beam_waist,
    delta_psf,
    intensity,
    psf_from_radius,
    synthesize_psf,
    wavelength_from_frequency,
)
from .deblur import DeblurMethod, deblur_eigen_images, hyper_laplacian, richardson_lucy, wiener
from .denoise import PatchDenoiseParams, denoise_eigen_images, patch_denoise
from .errors import ConfigError, CorruptionError, FormatError, ThzError, ValidationError
from .forward import NoiseModel, PhantomSpec, add_noise, blur_cube, generate_phantom, simulate
from .io_formats import HyperCube, export_band, read_cube, write_cube
from .metrics import (
    CrossSection,
    RegionOfInterest,
    false_color,
    feature_sharpness,
    flat_region_std,
    integrate_range,
    mse_psnr,
)
from .pipeline import RestorationConfig, fasthyde, joint_restore, run_restoration
from .subspace import (
    AUTO,
    EigenImageSet,
    NoiseEstimate,
    SubspaceBasis,
    component_report,
    estimate_noise,
    learn_subspace,
    project,
    reconstruct,
)

__version__ = "0.1.0"

__all__ = [
    "AUTO",
    "BeamGeometry",
    "BeamParams",
    "ConfigError",
    "CorruptionError",
    "CrossSection",
    "DeblurMethod",
    "EigenImageSet",
    "FormatError",
    "HyperCube",
    "NoiseEstimate",
    "NoiseModel",
    "PatchDenoiseParams",
    "PhantomSpec",
    "Psf",
    "RegionOfInterest",
    "RestorationConfig",
    "SubspaceBasis",
    "ThzError",
    "ValidationError",
    "add_noise",
    "beam_params",
    "beam_radius",
    "beam_waist",
    "blur_cube",
    "component_report",
    "deblur_eigen_images",
    "delta_psf",
    "denoise_eigen_images",
    "estimate_noise",
    "export_band",
    "false_color",
    "fasthyde",
    "feature_sharpness",
    "flat_region_std",
    "generate_phantom",
    "hyper_laplacian",
    "integrate_range",
    "intensity",
    "joint_restore",
    "learn_subspace",
    "mse_psnr",
    "patch_denoise",
    "project",
    "psf_from_radius",
    "read_cube",
    "reconstruct",
    "richardson_lucy",
    "run_restoration",
    "simulate",
    "synthesize_psf",
    "wavelength_from_frequency",
    "wiener",
    "write_cube",
]
