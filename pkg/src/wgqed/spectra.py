"""Frequency-domain solver for emission and scattering spectra.

For each detuning dk the Fourier amplitudes chi solve M(dk) chi = A with

    M_pq = V_pq exp(i k z_pq) - i (dk - dk_p) delta_pq,   k = k_a + dk

and the guided output to the left/right is

    -i sum_j sqrt(Gamma_j / 2) exp(+/- i k z_j) chi_j.

L = 1 throughout; scattering channels are stored as ratios to the input
spectrum and decay channels are exported as densities |beta|^2 / 2 pi.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coupling import build_couplings, scenario_modes
from .errors import NumericalError, ValidationError
from .model import Scenario, scenario_hash

MIN_POINTS = 8001
MAX_COND = 1e12


@dataclass(frozen=True)
class SpectrumGrid:
    """Spectra on a dk grid.

    kind is ``scattering`` (channels ``reflection`` and ``transmission`` hold
    beta/beta_0, ``input`` holds beta_0) or ``decay`` / ``trajectory``
    (channels ``left`` and ``right`` hold beta_-/+ with L = 1).
    """

    dk: np.ndarray
    kind: str
    channels: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __getitem__(self, name) -> np.ndarray:
        return self.channels[name]

    @property
    def reflectance(self) -> np.ndarray:
        return np.abs(self.channels["reflection"]) ** 2

    @property
    def transmittance(self) -> np.ndarray:
        return np.abs(self.channels["transmission"]) ** 2

    def density(self, channel: str) -> np.ndarray:
        return np.abs(self.channels[channel]) ** 2 / (2.0 * math.pi)

    def intensity(self, channel: str) -> np.ndarray:
        """Real series plotted/analysed for a channel name."""
        if self.kind == "scattering":
            if channel in ("reflection", "R"):
                return self.reflectance
            if channel in ("transmission", "T"):
                return self.transmittance
            if channel == "input":
                return self.density("input")
        aliases = {"L": "left", "-": "left", "R": "right", "+": "right"}
        return self.density(aliases.get(channel, channel))

    @property
    def normalization(self) -> str:
        return "ratio beta/beta0" if self.kind == "scattering" else "density |beta|^2/(2 pi), L=1"

    def write_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if self.kind == "scattering":
                names = ["reflection", "transmission", "input"]
                head = ["dk", "|bR/b0|^2", "|bT/b0|^2"]
                cols = [self.dk, self.reflectance, self.transmittance]
            else:
                names = ["left", "right"]
                head = ["dk", "density_left", "density_right"]
                cols = [self.dk, self.density("left"), self.density("right")]
            for nm in names:
                c = self.channels[nm]
                head += [f"re({nm})", f"im({nm})"]
                cols += [c.real, c.imag]
            w.writerow(head)
            for row in zip(*cols):
                w.writerow([f"{v:.16e}" for v in row])

    def manifest(self) -> dict:
        d = np.diff(self.dk)
        return {
            "kind": self.kind,
            "normalization": self.normalization,
            "grid": {
                "points": int(len(self.dk)),
                "min": float(self.dk[0]),
                "max": float(self.dk[-1]),
                "min_spacing": float(d.min()) if len(d) else 0.0,
                "max_spacing": float(d.max()) if len(d) else 0.0,
            },
            **self.meta,
        }

    def write_manifest(self, path) -> None:
        Path(path).write_text(json.dumps(self.manifest(), indent=2, sort_keys=True) + "\n")


# --- matrix assembly ------------------------------------------------------------


def coupling_matrix(scenario: Scenario, offdiag_scale: float = 1.0) -> np.ndarray:
    """V with V_pp = (Gamma_p + gamma_p)/2 and V^w + V^nw off the diagonal.

    ``offdiag_scale`` multiplies the off-diagonal couplings; it exists only to
    build deliberately inconsistent models for negative controls.
    """
    cm = build_couplings(scenario)
    v = cm.total.astype(complex) * offdiag_scale
    np.fill_diagonal(v, (scenario.array.gamma_wg + scenario.array.gamma_nw) / 2.0)
    return v


def m_matrix(scenario: Scenario, dk, offdiag_scale: float = 1.0) -> np.ndarray:
    """M(dk); shape (N, N) for scalar dk, (K, N, N) for an array."""
    arr = scenario.array
    dk_arr = np.atleast_1d(np.asarray(dk, dtype=float))
    v = coupling_matrix(scenario, offdiag_scale)
    r = arr.separations
    k = arr.k_a + dk_arr
    m = v[None, :, :] * np.exp(1j * k[:, None, None] * r[None, :, :])
    idx = np.arange(arr.n)
    m[:, idx, idx] -= 1j * (dk_arr[:, None] - arr.dk[None, :])
    return m[0] if np.ndim(dk) == 0 else m


def _solve(m: np.ndarray, rhs: np.ndarray, strict: bool) -> np.ndarray:
    """Batched solve of m[k] x[k] = rhs[k].

    Exactly singular points (lossless dark modes hit on the real axis) raise
    when ``strict``; otherwise they get the minimum-norm solution, which drops
    the undriven dark component, and a warning.
    """
    # rounding keeps exactly singular points (k r = pi) from failing in
    # LAPACK, so singularity is judged by the condition number
    cond = np.linalg.cond(m)
    ok = np.isfinite(cond) & (cond < MAX_COND)
    x = np.zeros_like(rhs)
    if np.any(ok):
        x[ok] = np.linalg.solve(m[ok], rhs[ok][..., None])[..., 0]
    bad = [int(i) for i in np.flatnonzero(~ok)]
    for i in bad:
        if strict:
            raise NumericalError(
                f"M(dk) is singular at grid index {i} (condition number {cond[i]:.3g}):\n{m[i]!r}"
            )
        x[i] = np.linalg.lstsq(m[i], rhs[i], rcond=1e-12)[0]
    if bad:
        warnings.warn(
            f"M(dk) singular at {len(bad)} grid point(s); used the minimum-norm limit",
            RuntimeWarning,
            stacklevel=3,
        )
    return x


def _output_vectors(scenario: Scenario, dk: np.ndarray):
    arr = scenario.array
    k = arr.k_a + dk
    s = np.sqrt(arr.gamma_wg / 2.0)
    e = np.exp(1j * k[:, None] * arr.z[None, :])
    return s, e


def _drive_over_beta0(scenario: Scenario, dk: np.ndarray) -> np.ndarray:
    # b_l(dk - dk_l) / beta_0(dk) = -i sqrt(Gamma_l / 2) exp(i k z_l)
    s, e = _output_vectors(scenario, dk)
    return -1j * s[None, :] * e


def solve_chi(scenario: Scenario, dk, offdiag_scale: float = 1.0) -> np.ndarray:
    """chi_j(dk - dk_j) for all emitters.

    The source is A_l = alpha_l(0) + b_l with the photon term built from the
    scenario's input spectrum. Raises NumericalError if M(dk) is singular.
    """
    scalar = np.ndim(dk) == 0
    dk_arr = np.atleast_1d(np.asarray(dk, dtype=float))
    m = m_matrix(scenario, dk_arr, offdiag_scale)
    beta0 = scenario.input_spectrum(dk_arr)
    rhs = scenario.alpha0[None, :] + _drive_over_beta0(scenario, dk_arr) * beta0[:, None]
    x = _solve(m, rhs, strict=True)
    return x[0] if scalar else x


def _check_grid(dk) -> np.ndarray:
    dk = np.asarray(dk, dtype=float)
    if dk.ndim != 1 or len(dk) < 2 or np.any(np.diff(dk) <= 0):
        raise ValidationError("grid: need a strictly increasing 1-D array of >= 2 points")
    return dk


def scattering_spectra(
    scenario: Scenario, grid=None, offdiag_scale: float = 1.0
) -> SpectrumGrid:
    """Reflection and transmission of the input photon, as ratios to beta_0.

    beta_0 cancels from the ratios, so they are finite even where the pulse
    spectrum underflows.
    """
    problems = []
    if scenario.pulse is None:
        problems.append("scattering spectra need an input pulse")
    if scenario.has_initial_excitation:
        problems.append("scattering spectra need all emitters initially in the ground state")
    if problems:
        raise ValidationError(problems)
    dk = default_grid(scenario) if grid is None else _check_grid(grid)
    m = m_matrix(scenario, dk, offdiag_scale)
    x = _solve(m, _drive_over_beta0(scenario, dk), strict=False)
    s, e = _output_vectors(scenario, dk)
    refl = -1j * np.sum(s[None, :] * e * x, axis=1)
    trans = 1.0 - 1j * np.sum(s[None, :] * np.conj(e) * x, axis=1)
    chans = {"reflection": refl, "transmission": trans, "input": scenario.input_spectrum(dk)}
    return SpectrumGrid(dk, "scattering", chans, {"scenario": scenario_hash(scenario)})


def decay_spectra(scenario: Scenario, grid=None) -> SpectrumGrid:
    """Left (beta_-) and right (beta_+) emission from an initial excitation."""
    if scenario.pulse is not None:
        raise ValidationError("decay spectra are defined without an input pulse")
    if not scenario.has_initial_excitation:
        raise ValidationError("empty scenario: all initial amplitudes are zero")
    dk = default_grid(scenario, kind="decay") if grid is None else _check_grid(grid)
    m = m_matrix(scenario, dk)
    rhs = np.broadcast_to(scenario.alpha0, (len(dk), scenario.array.n)).copy()
    x = _solve(m, rhs, strict=False)
    s, e = _output_vectors(scenario, dk)
    left = -1j * np.sum(s[None, :] * e * x, axis=1)
    right = -1j * np.sum(s[None, :] * np.conj(e) * x, axis=1)
    chans = {"left": left, "right": right}
    return SpectrumGrid(dk, "decay", chans, {"scenario": scenario_hash(scenario)})


def waveguide_branching(grid: SpectrumGrid) -> float:
    """Probability emitted into the waveguide: (1/2pi) int (|beta_-|^2 + |beta_+|^2)."""
    dens = grid.density("left") + grid.density("right")
    peak = float(dens.max())
    if peak > 0 and max(dens[0], dens[-1]) > 1e-4 * peak:
        warnings.warn(
            "spectral density at the grid edge exceeds 1e-4 of the peak; "
            "integrated emission is truncated",
            RuntimeWarning,
            stacklevel=2,
        )
    return float(np.trapezoid(dens, grid.dk))


# --- grids ----------------------------------------------------------------------


def default_grid(
    scenario: Scenario,
    span: float | None = None,
    points: int | None = None,
    kind: str = "scattering",
) -> np.ndarray:
    """Uniform grid about the pulse centre, refined around every collective line.

    The half-span is max(5 Delta_0, 2 max|Im mu| + 10). Each mode with
    linewidth w gets a window of half-width 3 w sampled at min(base/10, w/20).
    Decay grids also get geometric tails out to |dk| ~ 1e4 so the integrated
    Lorentzian wings are captured.
    """
    center = scenario.reference_dk
    modes = scenario_modes(scenario)
    width = 0.0 if scenario.pulse is None else scenario.pulse.width
    if span is None:
        span = max(5.0 * width, 2.0 * max(abs(m.eigenvalue.imag) for m in modes) + 10.0)
    points = MIN_POINTS if points is None else int(points)
    if points < 2 or not span > 0:
        raise ValidationError("grid: need span > 0 and at least 2 points")
    base = np.linspace(center - span, center + span, points)
    step = base[1] - base[0]
    parts = [base]
    for m in modes:
        w = m.linewidth
        if w <= 0:
            continue
        pos = m.eigenvalue.imag
        if abs(pos - center) > span:
            continue
        h = min(step / 10.0, w / 20.0)
        n = int(min(2 * 3.0 * w / h, 4000)) + 1
        lo, hi = max(pos - 3 * w, base[0]), min(pos + 3 * w, base[-1])
        if hi > lo:
            parts.append(np.linspace(lo, hi, n))
    if kind == "decay":
        far = max(1e4, 1e3 * max(abs(m.eigenvalue) for m in modes))
        tail = np.geomspace(step, far, 600)
        parts += [base[-1] + tail, base[0] - tail]
    g = np.unique(np.concatenate(parts))
    # drop near-duplicates introduced by overlapping windows
    keep = np.concatenate([[True], np.diff(g) > 1e-12 * max(1.0, abs(g).max())])
    return g[keep]


# --- time-domain link -----------------------------------------------------------


def chi_from_trajectory(traj, s) -> np.ndarray:
    """int_0^T alpha_j(t) exp(i s t) dt by the trapezoid rule, shape (len(s), N).

    ``s`` may be 1-D (same frequencies for all emitters) or (K, N).
    """
    t = traj.t
    a = traj.alpha
    s = np.asarray(s, dtype=float)
    w = np.full(len(t), traj.h)
    w[0] = w[-1] = traj.h / 2
    n = a.shape[1]
    s2 = np.broadcast_to(s[:, None], (len(s), n)) if s.ndim == 1 else s
    out = np.empty(s2.shape, dtype=complex)
    chunk = max(1, 4_000_000 // len(t))
    for j in range(n):
        aw = a[:, j] * w
        for i in range(0, len(s2), chunk):
            out[i : i + chunk, j] = np.exp(1j * np.outer(s2[i : i + chunk, j], t)) @ aw
    return out


def spectra_from_trajectory(scenario: Scenario, traj, grid) -> SpectrumGrid:
    """Guided output assembled from the numerically transformed amplitudes.

    ``left`` and ``right`` hold only the emitted field; for a pulse the
    transmitted amplitude is beta_0 + right.
    """
    dk = _check_grid(grid)
    arr = scenario.array
    chi = chi_from_trajectory(traj, dk[:, None] - arr.dk[None, :])
    s, e = _output_vectors(scenario, dk)
    left = -1j * np.sum(s[None, :] * e * chi, axis=1)
    right = -1j * np.sum(s[None, :] * np.conj(e) * chi, axis=1)
    meta = {"scenario": scenario_hash(scenario), "t_max": float(traj.t[-1])}
    return SpectrumGrid(dk, "trajectory", {"left": left, "right": right}, meta)
