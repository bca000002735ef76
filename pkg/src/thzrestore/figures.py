"""Matplotlib renderers for the report paths of the CLI.

Every function writes a PNG to a path and returns the path; nothing is shown
interactively. Figures carry fixed metadata so repeated runs are
byte-reproducible.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KWARGS = {"dpi": 120, "metadata": {"Software": "thzrestore"}}


def _grid_shape(count):
    cols = int(np.ceil(np.sqrt(count)))
    rows = int(np.ceil(count / cols))
    return rows, cols


def save_band_panel(cube, band_indices, path, title=None):
    """Grid of selected bands, each min-max scaled, labeled by frequency."""
    rows, cols = _grid_shape(len(band_indices))
    fig, axes = plt.subplots(rows, cols, figsize=(3 * cols, 3 * rows), squeeze=False)
    for ax in axes.ravel():
        ax.set_axis_off()
    for ax, idx in zip(axes.ravel(), band_indices):
        ax.imshow(cube.data[idx], cmap="gray")
        ax.set_title(f"{cube.frequencies[idx]:.2f} THz", fontsize=9)
        ax.set_axis_on()
        ax.set_xticks([])
        ax.set_yticks([])
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
    return path


def save_eigen_panel(eigen, path, report=None):
    """Grid of eigen-images, optionally annotated with the component report."""
    rows, cols = _grid_shape(eigen.p)
    fig, axes = plt.subplots(rows, cols, figsize=(3 * cols, 3 * rows), squeeze=False)
    for ax in axes.ravel():
        ax.set_axis_off()
    for i, ax in zip(range(eigen.p), axes.ravel()):
        ax.imshow(eigen.images[i], cmap="gray")
        label = f"#{i + 1}"
        if report is not None:
            label += (f"  {100 * report[i].energy_fraction:.1f}%"
                      f"  {report[i].effective_frequency:.2f} THz")
        ax.set_title(label, fontsize=9)
        ax.set_axis_on()
        ax.set_xticks([])
        ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
    return path


def save_metric_curves(frequencies, curves, path, ylabel, logy=False, title=None):
    """Per-band metric curves vs frequency; ``curves`` maps label -> array."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, values in curves.items():
        values = np.asarray(values, dtype=np.float64)
        ok = np.isfinite(values)
        ax.plot(np.asarray(frequencies)[ok], values[ok], marker="o",
                markersize=3, label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel("frequency (THz)")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    if len(curves) > 1:
        ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
    return path


def save_profile_plot(positions_mm, profiles, path, title=None):
    """Cross-section profiles (label -> 1D amplitude) vs position in mm."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, profile in profiles.items():
        ax.plot(positions_mm, profile, label=label)
    ax.set_xlabel("position (mm)")
    ax.set_ylabel("amplitude")
    ax.grid(True, alpha=0.3)
    if len(profiles) > 1:
        ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
    return path
