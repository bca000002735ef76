"""Command-line interface.

Subcommands: simulate, analyze, deblur, denoise, restore, metrics,
falsecolor, export. Every successful run writes a JSON run report next to
its primary output (``<output>.run.json``) with the resolved configuration,
the chosen subspace dimension, per-component effective frequencies and waist
radii, stage timings and FNV-1a digests of the input/output files.

Exit codes: 0 success, 1 validation/configuration/format error, 2 I/O error.
Errors print a single machine-parsable line ``E_<CLASS>: message`` on stderr.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .beam import BeamGeometry, synthesize_psf
from .deblur import DeblurMethod, apply_method
from .denoise import PatchDenoiseParams
from .errors import ConfigError, CorruptionError, FormatError, ValidationError
from .forward import NoiseModel, PhantomSpec, simulate
from .figures import save_band_panel, save_eigen_panel, save_metric_curves
from .io_formats import export_band, read_cube, save_gray_png, save_rgb_png, write_cube, write_csv
from .metrics import (
    FALSE_COLOR_BLUE_THZ,
    FALSE_COLOR_GREEN_THZ,
    FALSE_COLOR_RED_THZ,
    CrossSection,
    RegionOfInterest,
    false_color,
    feature_sharpness,
    flat_region_std,
    mse_psnr,
    psnr_for_csv,
)
from .pipeline import AUTO, RestorationConfig, run_restoration
from .subspace import component_report, estimate_noise, learn_subspace, project
from .util import default_workers, fnv1a64_file

_NOISE_FLAG_TO_KIND = {"iid": "gaussian_iid", "noniid": "gaussian_noniid", "poisson": "poisson"}
_DEBLUR_FLAGS = {"rl": "richardson_lucy", "wiener": "wiener", "hyplap": "hyper_laplacian"}


def _write_report(args, subcommand, inputs, outputs, timings, extra=None):
    report = {
        "subcommand": subcommand,
        "config": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        "timings_s": {k: round(v, 6) for k, v in timings.items()},
        "inputs": {str(p): fnv1a64_file(p) for p in inputs},
        "outputs": {str(p): fnv1a64_file(p) for p in outputs},
    }
    if extra:
        report.update(extra)
    primary = outputs[0] if outputs else inputs[0]
    path = Path(str(primary) + ".run.json")
    path.write_text(json.dumps(report, indent=2, default=str), encoding="utf-8")
    return path


def _parse_range(text):
    lo, hi = (float(v) for v in text.split(","))
    return lo, hi


def _parse_int_list(text):
    return tuple(int(v) for v in text.split(",") if v != "")


def _geometry(args):
    return BeamGeometry(focal_length=args.f_number, aperture_diameter=1.0)


def _noise_model(args, bands):
    kind = _NOISE_FLAG_TO_KIND[args.noise]
    if kind == "gaussian_iid":
        return NoiseModel.gaussian_iid(args.sigma, seed=args.seed)
    if kind == "gaussian_noniid":
        hi = args.sigma_max if args.sigma_max is not None else 4.0 * args.sigma
        return NoiseModel.gaussian_noniid(np.linspace(args.sigma, hi, bands), seed=args.seed)
    return NoiseModel.poisson(args.gain, seed=args.seed)


def _deblur_method(args):
    kind = _DEBLUR_FLAGS[args.deblur]
    if kind == "richardson_lucy":
        return DeblurMethod.rl(iterations=args.iterations)
    if kind == "wiener":
        return DeblurMethod.wiener_filter(nsr=args.nsr)
    return DeblurMethod.hyplap(lambda_reg=args.lambda_reg, alpha=args.alpha,
                               outer_iterations=args.outer_iterations)


def _restoration_config(args, method):
    p = AUTO if args.p == "auto" else int(args.p)
    scale = args.psf_scale
    if scale == "auto":
        mode, waists = "effective_frequency", None
    elif scale.startswith("manual:"):
        mode = "manual"
        waists = tuple(float(v) for v in scale.split(":", 1)[1].split(","))
    else:
        raise ValidationError("--psf-scale must be 'auto' or 'manual:w0,w0,...'")
    denoise_params = None
    if args.patch_size != 7 or args.search_window != 21:
        denoise_params = PatchDenoiseParams(sigma=1.0, patch_size=args.patch_size,
                                            search_window=args.search_window)
    return RestorationConfig(
        p=p,
        noise_type=_NOISE_FLAG_TO_KIND[args.noise],
        deblur=method,
        psf_geometry=_geometry(args),
        psf_scale_mode=mode,
        manual_waists=waists,
        components_to_discard=_parse_int_list(args.discard),
        denoise_params=denoise_params,
    )


def _cmd_simulate(args):
    freqs = np.linspace(args.f_min, args.f_max, args.bands)
    fg = np.linspace(args.fg, args.fg_end if args.fg_end is not None else args.fg, args.bands)
    bg = np.linspace(args.bg, args.bg_end if args.bg_end is not None else args.bg, args.bands)
    spec = PhantomSpec(kind=args.phantom, ny=args.ny, nx=args.nx, step=args.step,
                       frequencies=freqs, background=bg, foreground=fg,
                       feature_px=args.feature)
    model = _noise_model(args, args.bands)
    t0 = time.perf_counter()
    clean, degraded = simulate(spec, _geometry(args), model, z=args.z, workers=args.workers)
    elapsed = time.perf_counter() - t0
    write_cube(clean, args.out_clean)
    write_cube(degraded, args.out_degraded)
    sidecar = {
        "phantom": {"kind": args.phantom, "ny": args.ny, "nx": args.nx,
                    "step_mm": args.step, "feature_px": spec.default_feature_px(),
                    "f_min_thz": args.f_min, "f_max_thz": args.f_max,
                    "bands": args.bands, "fg": args.fg, "bg": args.bg,
                    "fg_end": args.fg_end, "bg_end": args.bg_end},
        "geometry": {"focal_length": args.f_number, "aperture_diameter": 1.0},
        "noise": model.describe(),
        "z_mm": args.z,
        "seed": args.seed,
    }
    Path(args.out_degraded + ".sim.json").write_text(
        json.dumps(sidecar, indent=2), encoding="utf-8")
    _write_report(args, "simulate", [], [args.out_degraded, args.out_clean,
                                         args.out_degraded + ".sim.json"],
                  {"simulate": elapsed})
    return 0


def _cmd_analyze(args):
    cube = read_cube(args.input)
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    noise = estimate_noise(cube)
    p = AUTO if args.p == "auto" else int(args.p)
    basis = learn_subspace(cube, p, noise)
    eigen = project(cube, basis)
    report = component_report(basis, eigen)
    elapsed = time.perf_counter() - t0

    csv_path = outdir / "components.csv"
    write_csv(csv_path,
              ["component", "energy_fraction", "effective_frequency_thz", "edge_energy"],
              [[c.index, f"{c.energy_fraction:.8g}", f"{c.effective_frequency:.6g}",
                f"{c.edge_energy:.6g}"] for c in report])
    outputs = [csv_path]
    for i in range(eigen.p):
        png = outdir / f"eigen_{i:02d}.png"
        save_gray_png(eigen.images[i], png)
        outputs.append(png)
    panel = outdir / "eigen_panel.png"
    save_eigen_panel(eigen, panel, report)
    outputs.append(panel)
    _write_report(args, "analyze", [args.input], outputs,
                  {"analyze": elapsed}, extra={"p": basis.p})
    return 0


def _cmd_deblur(args):
    cube = read_cube(args.input)
    geom = _geometry(args)
    method = _deblur_method(args)
    noise = estimate_noise(cube)
    t0 = time.perf_counter()
    restored = []
    for i in range(cube.bands):
        psf = synthesize_psf(cube.frequencies[i], geom, cube.step_x, z=args.z)
        restored.append(apply_method(cube.data[i], psf, method,
                                     sigma=noise.sigma_per_band[i]))
    out = cube.with_data(np.stack(restored))
    elapsed = time.perf_counter() - t0
    write_cube(out, args.output)
    outputs = [args.output]
    if args.png_dir:
        pngdir = Path(args.png_dir)
        pngdir.mkdir(parents=True, exist_ok=True)
        for i in range(out.bands):
            png = pngdir / f"band_{i:03d}.png"
            export_band(out, i, png)
            outputs.append(png)
        panel = pngdir / "bands_panel.png"
        save_band_panel(out, list(range(out.bands)), panel, title="deblurred bands")
        outputs.append(panel)
    _write_report(args, "deblur", [args.input], outputs, {"deblur": elapsed})
    return 0


def _run_pipeline_command(args, subcommand, deblur_stage):
    cube = read_cube(args.input)
    method = _deblur_method(args)
    config = _restoration_config(args, method)
    run = run_restoration(cube, config, deblur_stage=deblur_stage, workers=args.workers)
    write_cube(run.cube, args.output)
    extra = {
        "p": run.p,
        "components": [
            {"index": c.index,
             "energy_fraction": c.energy_fraction,
             "effective_frequency_thz": c.effective_frequency,
             "edge_energy": c.edge_energy,
             "waist_mm": run.waists_mm[c.index]}
            for c in run.components
        ],
    }
    _write_report(args, subcommand, [args.input], [args.output], run.timings, extra)
    return 0


def _cmd_denoise(args):
    return _run_pipeline_command(args, "denoise", deblur_stage=False)


def _cmd_restore(args):
    return _run_pipeline_command(args, "restore", deblur_stage=args.method == "joint")


def _cmd_metrics(args):
    cube = read_cube(args.input)
    t0 = time.perf_counter()
    columns = {"band": np.arange(cube.bands), "frequency_thz": cube.frequencies}
    curves = {}
    inputs = [args.input]
    if args.roi:
        x0, y0, w, h = (float(v) for v in args.roi.split(","))
        std, log_std = flat_region_std(cube, RegionOfInterest(x0, y0, w, h))
        columns["flat_std"] = std
        columns["log10_flat_std"] = log_std
        curves["flat-region std"] = std
    if args.cross:
        orientation, index, lo, hi = args.cross.split(":")
        cs = CrossSection(orientation, int(index), int(lo), int(hi))
        sharp = feature_sharpness(cube, cs)
        columns["sharpness_mm"] = sharp
        curves["feature sharpness (mm)"] = sharp
    if args.reference:
        ref = read_cube(args.reference)
        inputs.append(args.reference)
        err = mse_psnr(cube, ref)
        columns["mse"] = err.mse_per_band
        columns["psnr_db"] = np.array([psnr_for_csv(v) for v in err.psnr_per_band])
    elapsed = time.perf_counter() - t0

    header = list(columns.keys())
    rows = []
    for i in range(cube.bands):
        row = []
        for key in header:
            v = columns[key][i]
            row.append(int(v) if key == "band" else f"{float(v):.8g}")
        rows.append(row)
    write_csv(args.out_csv, header, rows)
    outputs = [args.out_csv]
    if args.fig and curves:
        save_metric_curves(cube.frequencies, curves, args.fig,
                           ylabel="metric value", logy=args.logy)
        outputs.append(args.fig)
    _write_report(args, "metrics", inputs, outputs, {"metrics": elapsed})
    return 0


def _cmd_falsecolor(args):
    cube = read_cube(args.input)
    ranges = {
        "red_thz": _parse_range(args.r_range),
        "green_thz": _parse_range(args.g_range),
        "blue_thz": _parse_range(args.b_range),
    }
    t0 = time.perf_counter()
    rgb = false_color(cube, ranges["red_thz"], ranges["green_thz"], ranges["blue_thz"])
    elapsed = time.perf_counter() - t0
    save_rgb_png(rgb, args.output)
    ranges_path = Path(args.output + ".ranges.json")
    ranges_path.write_text(json.dumps({k: list(v) for k, v in ranges.items()}, indent=2),
                           encoding="utf-8")
    _write_report(args, "falsecolor", [args.input], [args.output, ranges_path],
                  {"falsecolor": elapsed})
    return 0


def _cmd_export(args):
    cube = read_cube(args.input)
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    indices = range(cube.bands) if args.band is None else [args.band]
    t0 = time.perf_counter()
    outputs = []
    for i in indices:
        png = outdir / f"band_{i:03d}.png"
        export_band(cube, i, png)
        outputs.append(png)
    _write_report(args, "export", [args.input], outputs,
                  {"export": time.perf_counter() - t0})
    return 0


def _add_common(parser):
    parser.add_argument("--workers", type=int, default=None,
                        help="worker threads (default: THZRESTORE_WORKERS or CPU count)")
    parser.add_argument("--seed", type=int, default=0, help="random seed")


def _add_geometry(parser):
    parser.add_argument("--f-number", type=float, default=4.0,
                        help="focal length over aperture diameter of the focusing optics")


def _add_noise_flags(parser):
    parser.add_argument("--noise", choices=sorted(_NOISE_FLAG_TO_KIND), default="iid")
    parser.add_argument("--sigma", type=float, default=0.05, help="gaussian noise sigma")
    parser.add_argument("--sigma-max", type=float, default=None,
                        help="top of the per-band sigma ramp for non-iid noise")
    parser.add_argument("--gain", type=float, default=0.01, help="poisson gain")


def _add_deblur_flags(parser):
    parser.add_argument("--deblur", choices=sorted(_DEBLUR_FLAGS), default="rl")
    parser.add_argument("--iterations", type=int, default=20)
    parser.add_argument("--nsr", type=float, default=None,
                        help="wiener noise-to-signal ratio (default: sigma^2/var)")
    parser.add_argument("--lambda-reg", type=float, default=1e-3)
    parser.add_argument("--alpha", type=float, default=2.0 / 3.0)
    parser.add_argument("--outer-iterations", type=int, default=4)


def _add_restore_flags(parser):
    parser.add_argument("--p", default="auto", help="subspace dimension or 'auto'")
    parser.add_argument("--psf-scale", default="auto",
                        help="'auto' (effective frequency) or 'manual:w0,w0,...' in mm")
    parser.add_argument("--discard", default="",
                        help="comma-separated component indices to zero before reconstruction")
    parser.add_argument("--patch-size", type=int, default=7)
    parser.add_argument("--search-window", type=int, default=21)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="thzrestore",
        description="Simulate and restore THz time-domain hyperspectral amplitude cubes.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simulate", help="render a phantom and its degraded observation")
    p.add_argument("--phantom", choices=("disk_hole", "rings", "bars"), default="disk_hole")
    p.add_argument("--ny", type=int, default=64)
    p.add_argument("--nx", type=int, default=64)
    p.add_argument("--step", type=float, default=0.5, help="pixel pitch in mm")
    p.add_argument("--bands", type=int, default=30)
    p.add_argument("--f-min", type=float, default=0.38)
    p.add_argument("--f-max", type=float, default=5.85)
    p.add_argument("--fg", type=float, default=0.0)
    p.add_argument("--bg", type=float, default=1.0)
    p.add_argument("--fg-end", type=float, default=None, help="foreground at f-max (ramp)")
    p.add_argument("--bg-end", type=float, default=None, help="background at f-max (ramp)")
    p.add_argument("--feature", type=int, default=0, help="feature size in px (0 = default)")
    p.add_argument("--z", type=float, default=0.0, help="sample plane offset from focus, mm")
    p.add_argument("out_clean", metavar="CLEAN")
    p.add_argument("out_degraded", metavar="DEGRADED")
    _add_geometry(p)
    _add_noise_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="subspace component report and eigen-images")
    p.add_argument("input")
    p.add_argument("--p", default="auto")
    p.add_argument("--out-dir", default="analysis")
    _add_common(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("deblur", help="band-by-band deconvolution")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--z", type=float, default=0.0)
    p.add_argument("--png-dir", default=None, help="also export per-band PNGs here")
    _add_geometry(p)
    _add_deblur_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_deblur)

    p = sub.add_parser("denoise", help="subspace denoising (no deblurring)")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--noise", choices=sorted(_NOISE_FLAG_TO_KIND), default="iid")
    _add_geometry(p)
    _add_deblur_flags(p)
    _add_restore_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_denoise)

    p = sub.add_parser("restore", help="full restoration pipeline")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--method", choices=("fasthyde", "joint"), default="joint")
    p.add_argument("--noise", choices=sorted(_NOISE_FLAG_TO_KIND), default="iid")
    _add_geometry(p)
    _add_deblur_flags(p)
    _add_restore_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_restore)

    p = sub.add_parser("metrics", help="per-band CSV metrics and metric curves")
    p.add_argument("input")
    p.add_argument("--reference", default=None, help="clean cube for MSE/PSNR")
    p.add_argument("--roi", default=None, help="flat region 'x0,y0,width,height' in mm")
    p.add_argument("--cross", default=None,
                   help="cross-section 'row:index:lo:hi' or 'col:index:lo:hi' (pixels)")
    p.add_argument("--out-csv", default="metrics.csv")
    p.add_argument("--fig", default=None, help="write a metric-curve figure here")
    p.add_argument("--logy", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("falsecolor", help="three-range false-RGB composite")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--r-range", default=f"{FALSE_COLOR_RED_THZ[0]},{FALSE_COLOR_RED_THZ[1]}")
    p.add_argument("--g-range", default=f"{FALSE_COLOR_GREEN_THZ[0]},{FALSE_COLOR_GREEN_THZ[1]}")
    p.add_argument("--b-range", default=f"{FALSE_COLOR_BLUE_THZ[0]},{FALSE_COLOR_BLUE_THZ[1]}")
    _add_common(p)
    p.set_defaults(func=_cmd_falsecolor)

    p = sub.add_parser("export", help="per-band grayscale PNG export")
    p.add_argument("input")
    p.add_argument("--band", type=int, default=None, help="single band (default: all)")
    p.add_argument("--out-dir", default="bands")
    _add_common(p)
    p.set_defaults(func=_cmd_export)

    return parser


def dispatch(argv):
    """Run one CLI invocation; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles --help and usage errors
        return int(exc.code or 0)
    if getattr(args, "workers", None) is None and hasattr(args, "workers"):
        args.workers = default_workers()
    try:
        return args.func(args)
    except OSError as exc:
        print(f"E_IO: {exc}".replace("\n", " "), file=sys.stderr)
        return 2
    except FormatError as exc:
        print(f"E_FORMAT: {exc}".replace("\n", " "), file=sys.stderr)
        return 1
    except CorruptionError as exc:
        print(f"E_CORRUPT: {exc}".replace("\n", " "), file=sys.stderr)
        return 1
    except (ValidationError, ConfigError, ValueError) as exc:
        print(f"E_VALIDATION: {exc}".replace("\n", " "), file=sys.stderr)
        return 1


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
