import numpy as np
import pytest

from thzrestore import (
    BeamGeometry,
    DeblurMethod,
    NoiseModel,
    PhantomSpec,
    RestorationConfig,
    run_restoration,
    simulate,
)


@pytest.fixture(scope="session")
def geometry():
    return BeamGeometry(focal_length=4.0, aperture_diameter=1.0)


@pytest.fixture(scope="session")
def disk_experiment(geometry):
    """One shared matched-model experiment: clean, degraded, fasthyde, joint.

    30 bands, 64x64, blur by the default optics plus iid sigma=0.05.
    """
    freqs_args = dict(f_min=0.38, f_max=5.85)
    spec = PhantomSpec(
        kind="disk_hole",
        ny=64,
        nx=64,
        step=0.5,
        frequencies=np.linspace(freqs_args["f_min"], freqs_args["f_max"], 30),
    )
    clean, degraded = simulate(spec, geometry, NoiseModel.gaussian_iid(0.05, seed=101))
    config = RestorationConfig(deblur=DeblurMethod.rl(iterations=20))
    denoised = run_restoration(degraded, config, deblur_stage=False)
    restored = run_restoration(degraded, config, deblur_stage=True)
    return {
        "spec": spec,
        "clean": clean,
        "degraded": degraded,
        "fasthyde": denoised.cube,
        "joint": restored.cube,
        "joint_run": restored,
    }
