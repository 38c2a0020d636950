"""Static figures written next to the CSV outputs (PNG, Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams.update(
    {
        "font.size": 9,
        "axes.spines.top": False,
        "axes.spines.right": False,
        "figure.dpi": 110,
        "savefig.bbox": "tight",
    }
)


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_trajectory(traj, path, title: str = "", overlay=None) -> Path:
    """|alpha_j|^2 versus t; ``overlay`` is a second trajectory drawn dotted."""
    fig, ax = plt.subplots(figsize=(4.8, 3.0))
    p = traj.probabilities
    for j in range(traj.n):
        ax.plot(traj.t, p[:, j], lw=1.2, label=f"emitter {j + 1}")
    if overlay is not None:
        q = overlay.probabilities
        for j in range(overlay.n):
            ax.plot(overlay.t, q[:, j], ":", lw=1.0, color=f"C{j}")
    ax.set_xlabel(r"$\Gamma t$")
    ax.set_ylabel(r"$|\alpha_j|^2$")
    ax.set_ylim(bottom=0)
    if traj.n <= 6:
        ax.legend(frameon=False, fontsize=7)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_spectrum(spec, path, title: str = "", overlay=None, xlim=None) -> Path:
    """Reflection/transmission (scattering) or left/right densities (decay)."""
    fig, ax = plt.subplots(figsize=(4.8, 3.0))
    if spec.kind == "scattering":
        pairs = [("reflection", r"$|\beta_R/\beta_0|^2$"), ("transmission", r"$|\beta_T/\beta_0|^2$")]
    else:
        pairs = [("left", r"$|\beta_-|^2/2\pi$"), ("right", r"$|\beta_+|^2/2\pi$")]
    for i, (ch, label) in enumerate(pairs):
        ax.plot(spec.dk, spec.intensity(ch), lw=1.2, color=f"C{i}", label=label)
        if overlay is not None:
            ax.plot(overlay.dk, overlay.intensity(ch), ":", lw=1.0, color=f"C{i}")
    ax.set_xlabel(r"$\delta k\, v_g/\Gamma$")
    if spec.kind == "scattering":
        ax.set_ylim(-0.02, 1.05)
    if xlim is not None:
        ax.set_xlim(*xlim)
    ax.legend(frameon=False, fontsize=7)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_sweep(x, series: dict, path, xlabel: str, logx: bool = False, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(4.8, 3.0))
    for label, y in series.items():
        ax.plot(x, np.asarray(y, dtype=float), "o-", ms=2.5, lw=1.0, label=label)
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    if len(series) > 1:
        ax.legend(frameon=False, fontsize=7)
    if title:
        ax.set_title(title)
    return _save(fig, path)
