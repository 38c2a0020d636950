"""Metrics on computed spectra: spectrum difference, peaks, sweeps, audits."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .model import Scenario
from .spectra import SpectrumGrid, scattering_spectra, waveguide_branching

CANONICAL_SPAN = 20.0
CANONICAL_POINTS = 16001


def canonical_grid(center: float = 0.0) -> np.ndarray:
    """Fixed grid for comparing spectra: +-20 Gamma, 16001 points."""
    return np.linspace(center - CANONICAL_SPAN, center + CANONICAL_SPAN, CANONICAL_POINTS)


@dataclass(frozen=True)
class SpectrumDifference:
    value: float
    reflection_term: float
    transmission_term: float
    grid: dict


def spectrum_difference(spec_with: SpectrumGrid, spec_without: SpectrumGrid) -> SpectrumDifference:
    """Normalized difference of two reflection/transmission pairs, in [0, 1].

    Half the sum of sum|R1 - R2| / sum(R1 + R2) and
    sum|T1 - T2| / sum(2 - T1 - T2), summed over grid points.
    """
    a, b = spec_with, spec_without
    if a.dk.shape != b.dk.shape or not np.array_equal(a.dk, b.dk):
        raise ValidationError("spectrum_difference: both spectra must share the same dk grid")
    r1, r2 = a.reflectance, b.reflectance
    t1, t2 = a.transmittance, b.transmittance
    den_r = np.sum(r1 + r2)
    den_t = np.sum(2.0 - t1 - t2)
    term_r = float(np.sum(np.abs(r1 - r2)) / den_r) if den_r > 0 else 0.0
    term_t = float(np.sum(np.abs(t1 - t2)) / den_t) if den_t > 0 else 0.0
    grid = {"points": int(len(a.dk)), "min": float(a.dk[0]), "max": float(a.dk[-1])}
    return SpectrumDifference(0.5 * (term_r + term_t), term_r, term_t, grid)


def nw_spectrum_difference(scenario: Scenario, grid=None) -> SpectrumDifference:
    """Spectrum difference with versus without the free-space couplings."""
    if grid is None:
        grid = canonical_grid(scenario.reference_dk)
    with_nw = scattering_spectra(scenario.replace(include_nw_coupling=True), grid)
    without = scattering_spectra(scenario.replace(include_nw_coupling=False), grid)
    return spectrum_difference(with_nw, without)


# --- peaks --------------------------------------------------------------------


@dataclass(frozen=True)
class Peak:
    position: float
    height: float
    fwhm: float


@dataclass(frozen=True)
class PeakCatalogue:
    peaks: list = field(default_factory=list)
    separation: float = math.nan
    linewidth_difference: float = math.nan

    @property
    def dominant(self) -> list:
        return _dominant(self.peaks)

    def to_dict(self) -> dict:
        return {
            "peaks": [{"position": p.position, "height": p.height, "fwhm": p.fwhm} for p in self.peaks],
            "separation": None if math.isnan(self.separation) else self.separation,
            "linewidth_difference": None
            if math.isnan(self.linewidth_difference)
            else self.linewidth_difference,
        }


def _dominant(peaks):
    return sorted(peaks, key=lambda p: (-p.height, -abs(p.position)))[:2]


def _crossing(x, y, i, half, direction):
    """Interpolated position where y falls to ``half`` walking from peak ``i``.

    Returns None if the walk reaches the grid edge or climbs above the peak.
    """
    j = i
    top = y[i]
    while True:
        nxt = j + direction
        if nxt < 0 or nxt >= len(y) or y[nxt] > top:
            return None
        if y[nxt] <= half:
            x0, x1, y0, y1 = x[j], x[nxt], y[j], y[nxt]
            return x0 + (half - y0) * (x1 - x0) / (y1 - y0)
        j = nxt


def find_peaks(spec: SpectrumGrid, channel: str = "reflection", threshold: float = 1e-3) -> PeakCatalogue:
    """Local maxima above ``threshold`` of the global maximum, with FWHMs.

    Widths come from linear interpolation of the half-maximum crossings on
    each side. When one side never drops to half maximum (a shoulder on a
    larger neighbour) the other half-width is doubled.
    """
    x = spec.dk
    y = spec.intensity(channel)
    if len(y) < 3 or not np.any(y > 0):
        return PeakCatalogue()
    cut = threshold * float(y.max())
    interior = np.arange(1, len(y) - 1)
    is_max = (y[interior] > y[interior - 1]) & (y[interior] >= y[interior + 1]) & (y[interior] > cut)
    peaks = []
    for i in interior[is_max]:
        half = 0.5 * y[i]
        left = _crossing(x, y, i, half, -1)
        right = _crossing(x, y, i, half, +1)
        if left is None and right is None:
            continue
        if left is None:
            width = 2.0 * (right - x[i])
        elif right is None:
            width = 2.0 * (x[i] - left)
        else:
            width = right - left
        if width <= 0:
            continue
        spacing = 0.5 * (x[i + 1] - x[i - 1])
        if width < 5 * spacing:
            warnings.warn(
                f"peak at {x[i]:.4g} is unresolved (FWHM {width:.3g} < 5 grid steps)",
                RuntimeWarning,
                stacklevel=2,
            )
        peaks.append(Peak(float(x[i]), float(y[i]), float(width)))
    dom = _dominant(peaks)
    if len(dom) < 2:
        return PeakCatalogue(peaks)
    sep = abs(dom[0].position - dom[1].position)
    lw = abs(dom[0].fwhm - dom[1].fwhm)
    return PeakCatalogue(peaks, sep, lw)


# --- sweeps -------------------------------------------------------------------


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def detuned_pair(base: Scenario, dw: float) -> Scenario:
    """Two-emitter scenario with dk_1 = -dk_2 = dw / 2."""
    if base.array.n != 2:
        raise ValidationError("two-emitter scenario required")
    return base.replace(array=base.array.with_dk([dw / 2.0, -dw / 2.0]))


def coupling_transition_sweep(base: Scenario, dw_list, grid=None, threads: int = 1) -> list[dict]:
    """Peak separation and linewidth difference of the reflection spectrum
    versus the emitter frequency difference."""

    def point(dw):
        s = detuned_pair(base, float(dw))
        cat = find_peaks(scattering_spectra(s, grid), "reflection")
        return {
            "dw12": float(dw),
            "separation": cat.separation,
            "linewidth_difference": cat.linewidth_difference,
            "n_peaks": len(cat.peaks),
        }

    return _map(point, list(dw_list), threads)


def separation_sweep(base: Scenario, r_list, threads: int = 1) -> list[dict]:
    """Spectrum difference with/without free-space coupling versus r_12 (in wavelengths)."""

    def point(r):
        s = base.replace(array=base.array.with_spacing(float(r)))
        d = nw_spectrum_difference(s)
        return {"r12": float(r), "delta_sd": d.value}

    return _map(point, list(r_list), threads)


def crossing(xs, ys, level: float = 0.5) -> float:
    """First x where the piecewise-linear (log x) curve crosses ``level``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    for i in range(len(xs) - 1):
        a, b = ys[i] - level, ys[i + 1] - level
        if a == 0:
            return float(xs[i])
        if a * b < 0:
            lx0, lx1 = math.log(xs[i]), math.log(xs[i + 1])
            return float(math.exp(lx0 + (lx1 - lx0) * a / (a - b)))
    return math.nan


# --- bookkeeping --------------------------------------------------------------


def conservation_audit(traj=None, decay_grid=None, scattering_grid=None, tol: float = 1e-3) -> dict:
    """Probability bookkeeping for a run.

    Reports the surviving excitation at the end of ``traj``, the guided
    emission integrated from ``decay_grid`` and the non-guided remainder, and
    the worst pointwise deviation of R + T from 1 for ``scattering_grid``.
    Residuals beyond ``tol`` are listed under ``flags``.
    """
    rep: dict = {"flags": []}
    survivors = None
    if traj is not None:
        survivors = float(np.sum(np.abs(traj.alpha[-1]) ** 2))
        rep["survivors"] = survivors
        rep["t_max"] = float(traj.t[-1])
    if decay_grid is not None:
        guided = waveguide_branching(decay_grid)
        rep["guided"] = guided
        rep["non_guided"] = 1.0 - guided - (survivors or 0.0)
        if rep["non_guided"] < -tol:
            rep["flags"].append("guided emission exceeds the initial excitation")
    if scattering_grid is not None:
        loss = 1.0 - scattering_grid.reflectance - scattering_grid.transmittance
        rep["unitarity_residual"] = float(np.max(np.abs(loss)))
        rep["min_loss"] = float(np.min(loss))
        if rep["min_loss"] < -tol:
            rep["flags"].append("R + T exceeds 1 (apparent gain)")
    return rep
