"""Scenario definitions and data bundles for the published figure set.

Every figure scenario uses lambda_a = 1e-3 (lengths in v_g / Gamma), so the
arrays are optically short compared with the pulse and the decay length.
The JSON files under ``figconfigs/`` are these scenarios serialized.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import (
    canonical_grid,
    conservation_audit,
    coupling_transition_sweep,
    find_peaks,
    separation_sweep,
)
from .dynamics import evolve
from .model import EmitterArray, GaussianPulse, Scenario, load_scenario, save_scenario
from .spectra import decay_spectra, default_grid, scattering_spectra

LAMBDA = 1e-3
CONFIG_DIR = Path(__file__).with_name("figconfigs")


def _chain(n, a, gamma_nw, z0, dk=None):
    return EmitterArray.chain(n, a, z0=z0, gamma_nw=gamma_nw, dk=dk, lambda_a=LAMBDA)


def _scenarios() -> dict:
    s = {}
    for tag, a in (("fig2ab", 0.5), ("fig2cd", 0.05)):
        s[tag] = Scenario(_chain(2, a, 0.2, 0.0), initial_excitation=(1.0, 0.0), name=tag)
    s["fig3"] = Scenario(_chain(2, 0.05, 0.2, 10.0), GaussianPulse(10.0), name="fig3")
    s["fig4"] = Scenario(_chain(2, 0.05, 0.1, 2.0), GaussianPulse(10.0), name="fig4")
    fig5 = {"fig5a": ([0.0, 0.0], 0.0), "fig5b": ([0.1, -0.1], 0.0), "fig5c": ([1.0, -1.0], 1.0)}
    for tag, (dk, c) in fig5.items():
        s[tag] = Scenario(_chain(2, 0.5, 0.0, 20.0, dk), GaussianPulse(1.0, c), name=tag)
    for tag, dw in (("fig6a", 0.0), ("fig6b", 2.0), ("fig6c", 10.0)):
        arr = _chain(2, 0.05, 0.1, 2.0, [dw / 2, -dw / 2])
        s[tag] = Scenario(arr, GaussianPulse(10.0), name=tag)
    s["fig7"] = Scenario(_chain(2, 0.05, 0.1, 2.0), GaussianPulse(10.0), name="fig7")
    s["fig8ab"] = Scenario(_chain(5, 0.05, 0.2, 2.0), GaussianPulse(10.0), name="fig8ab")
    comb = [0.2, 0.1, 0.0, -0.1, -0.2]
    s["fig8cd"] = Scenario(_chain(5, 0.5, 0.0, 20.0, comb), GaussianPulse(1.0), name="fig8cd")
    return s


SCENARIOS = _scenarios()


@dataclass(frozen=True)
class FigureSpec:
    name: str
    trajectory: bool = False
    spectrum: bool = False
    compare_nw: bool = False
    t_max: float = 40.0
    sweep: str = ""
    sweep_values: tuple = ()
    extra: dict = field(default_factory=dict)


FIGURES = {
    "fig2ab": FigureSpec("fig2ab", trajectory=True, spectrum=True, compare_nw=True, t_max=40.0),
    "fig2cd": FigureSpec("fig2cd", trajectory=True, spectrum=True, compare_nw=True, t_max=40.0),
    "fig3": FigureSpec("fig3", trajectory=True, spectrum=True, compare_nw=True, t_max=40.0),
    "fig4": FigureSpec(
        "fig4",
        sweep="r12",
        sweep_values=tuple(np.geomspace(0.005, 2.0, 40)),
        extra={"gamma_nw": (0.1, 0.5)},
    ),
    "fig5a": FigureSpec("fig5a", trajectory=True, spectrum=True, t_max=60.0),
    "fig5b": FigureSpec("fig5b", trajectory=True, spectrum=True, t_max=60.0),
    "fig5c": FigureSpec("fig5c", trajectory=True, spectrum=True, t_max=60.0),
    "fig6a": FigureSpec("fig6a", spectrum=True),
    "fig6b": FigureSpec("fig6b", spectrum=True),
    "fig6c": FigureSpec("fig6c", spectrum=True),
    "fig7": FigureSpec("fig7", sweep="dw12", sweep_values=tuple(np.linspace(0.0, 20.0, 81))),
    "fig8ab": FigureSpec("fig8ab", trajectory=True, spectrum=True, t_max=30.0),
    "fig8cd": FigureSpec("fig8cd", trajectory=True, spectrum=True, t_max=200.0),
}


def write_configs(directory=CONFIG_DIR) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name, s in SCENARIOS.items():
        p = directory / f"{name}.json"
        save_scenario(s, p)
        out.append(p)
    return out


def config_path(name: str) -> Path:
    return CONFIG_DIR / f"{name}.json"


def load_figure(name: str) -> Scenario:
    return load_scenario(config_path(name))


# --- bundle ---------------------------------------------------------------------


def _write_rows(path: Path, header, rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    return path


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.16e}"


def _spectrum(s: Scenario, grid=None):
    if s.pulse is None:
        return decay_spectra(s, grid)
    return scattering_spectra(s, grid)


def build_figure(name: str, out, threads: int = 1, plot: bool = True, h: float = 1e-3) -> list[Path]:
    """Write the data (and, with ``plot``, PNGs) for one figure into ``out``."""
    spec = FIGURES[name]
    s = load_figure(name)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    if plot:
        from . import plotting

    variants = {"": s}
    if spec.compare_nw:
        variants["_no_nw"] = s.without_nw()

    if spec.trajectory:
        steps = int(round(spec.t_max / h))
        every = max(1, steps // 4000)
        trajs = {}
        for suffix, sc in variants.items():
            trajs[suffix] = evolve(sc, t_max=spec.t_max, h=h, store_every=every)
            p = out / f"{name}_trajectory{suffix}.csv"
            trajs[suffix].write_csv(p)
            files.append(p)
        if plot:
            files.append(
                plotting.plot_trajectory(
                    trajs[""], out / f"{name}_trajectory.png", name, trajs.get("_no_nw")
                )
            )

    if spec.spectrum:
        grid = default_grid(s, kind="decay" if s.pulse is None else "scattering")
        specs = {}
        for suffix, sc in variants.items():
            specs[suffix] = _spectrum(sc, grid)
            p = out / f"{name}_spectrum{suffix}.csv"
            specs[suffix].write_csv(p)
            files.append(p)
        audit = conservation_audit(
            decay_grid=specs[""] if s.pulse is None else None,
            scattering_grid=specs[""] if s.pulse is not None else None,
        )
        p = out / f"{name}_audit.json"
        p.write_text(json.dumps(audit, indent=2, sort_keys=True) + "\n")
        files.append(p)
        for flag in audit["flags"]:
            warnings.warn(f"{name}: {flag}", RuntimeWarning, stacklevel=2)
        if s.pulse is not None:
            cat = find_peaks(specs[""], "reflection")
            p = out / f"{name}_peaks.json"
            p.write_text(json.dumps(cat.to_dict(), indent=2, sort_keys=True) + "\n")
            files.append(p)
        if plot:
            span = 12.0 if s.pulse is None or s.pulse.width > 2 else 4.0
            c = s.reference_dk
            files.append(
                plotting.plot_spectrum(
                    specs[""], out / f"{name}_spectrum.png", name, specs.get("_no_nw"), (c - span, c + span)
                )
            )

    if spec.sweep == "r12":
        xs = np.array(spec.sweep_values)
        series = {}
        for g in spec.extra["gamma_nw"]:
            base = s.replace(array=s.array.with_gamma_nw(g))
            series[f"gamma={g}"] = [r["delta_sd"] for r in separation_sweep(base, xs, threads)]
        header = ["r12"] + [f"delta_sd({k})" for k in series]
        p = _write_rows(out / f"{name}_sweep.csv", header, zip(xs, *series.values()))
        files.append(p)
        if plot:
            files.append(
                plotting.plot_sweep(xs, series, out / f"{name}_sweep.png", r"$r_{12}/\lambda$", True, name)
            )
    elif spec.sweep == "dw12":
        xs = np.array(spec.sweep_values)
        rows = coupling_transition_sweep(s, xs, canonical_grid(), threads)
        sep = [r["separation"] for r in rows]
        lw = [r["linewidth_difference"] for r in rows]
        p = _write_rows(
            out / f"{name}_sweep.csv", ["dw12", "separation", "linewidth_difference"], zip(xs, sep, lw)
        )
        files.append(p)
        if plot:
            files.append(
                plotting.plot_sweep(
                    xs,
                    {"peak separation": sep, "linewidth difference": lw},
                    out / f"{name}_sweep.png",
                    r"$\Delta\omega_{12}/\Gamma$",
                    False,
                    name,
                )
            )
    return files
