"""Dipole-dipole coupling matrices and the collective modes they induce."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NumericalError, SingularSeparationError
from .model import Scenario


def nonwaveguide_coupling(gamma_j, gamma_l, x, phi=np.pi / 2):
    """Free-space dipole-dipole coupling between two emitters.

    Parameters
    ----------
    gamma_j, gamma_l : float
        Non-guided decay rates of the two emitters.
    x : float or array
        Dimensionless separation k_a * r_jl; must be > 0.
    phi : float
        Angle between the dipoles and the inter-emitter axis.

    Returns
    -------
    complex or complex array
        (3 sqrt(g_j g_l) / 4) * [sin^2(phi) (-i/x) + (1 - 3 cos^2(phi)) (1/x^2 + i/x^3)]

    The angular factor (1 - 3 cos^2 phi) multiplies both near-field terms.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise SingularSeparationError(
            "coincident emitters: k_a * r must be > 0 for the free-space coupling"
        )
    pref = 0.75 * np.sqrt(gamma_j * gamma_l)
    s2 = np.sin(phi) ** 2
    near = 1.0 - 3.0 * np.cos(phi) ** 2
    out = pref * (s2 * (-1j / x) + near * (1.0 / x**2 + 1j / x**3))
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class CouplingMatrices:
    """Coupling matrices of an array.

    v_w : waveguide couplings sqrt(G_j G_l)/2 (diagonal G_j/2)
    v_nw : free-space couplings (diagonal g_j/2)
    phase : exp(i k_a z_jl)
    effective : (v_w + v_nw) * phase, the non-Hermitian mode matrix
    """

    v_w: np.ndarray
    v_nw: np.ndarray
    phase: np.ndarray
    effective: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.v_w + self.v_nw

    @property
    def n(self) -> int:
        return self.v_w.shape[0]

    def write_csv(self, path, which: str = "effective") -> None:
        """Write one matrix row-major, two columns (re, im) per cell."""
        m = np.asarray(getattr(self, which), dtype=complex)
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"{p}_{j}" for j in range(m.shape[1]) for p in ("re", "im")])
            for row in m:
                w.writerow([f"{v:.16e}" for c in row for v in (c.real, c.imag)])


def build_couplings(scenario: Scenario) -> CouplingMatrices:
    arr = scenario.array
    gw, gn = arr.gamma_wg, arr.gamma_nw
    r = arr.separations
    n = arr.n
    off = ~np.eye(n, dtype=bool)
    if np.any(r[off] == 0):
        i, j = np.argwhere((r == 0) & off)[0]
        raise SingularSeparationError(f"emitters {i} and {j} share position z={arr.z[i]}")

    v_w = np.sqrt(np.outer(gw, gw)) / 2.0
    v_nw = np.zeros((n, n), dtype=complex)
    np.fill_diagonal(v_nw, gn / 2.0)
    if scenario.include_nw_coupling and n > 1:
        jj, ll = np.nonzero(off)
        v_nw[jj, ll] = nonwaveguide_coupling(gn[jj], gn[ll], arr.k_a * r[jj, ll], arr.phi)
    phase = np.exp(1j * arr.k_a * r)
    effective = (v_w + v_nw) * phase
    np.fill_diagonal(effective, (gw + gn) / 2.0)
    return CouplingMatrices(v_w, v_nw, phase, effective)


@dataclass(frozen=True)
class CollectiveMode:
    """One eigenpair of the effective matrix.

    decay_rate is Re(mu), the amplitude decay rate; the emission line has
    intensity FWHM ``linewidth`` = 2 Re(mu) and sits at detuning ``shift``.
    """

    eigenvalue: complex
    vector: np.ndarray
    shift: float

    @property
    def decay_rate(self) -> float:
        return float(self.eigenvalue.real)

    @property
    def linewidth(self) -> float:
        return 2.0 * float(self.eigenvalue.real)


def _eig(m: np.ndarray):
    try:
        w, v = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigen-decomposition failed ({exc}) for matrix:\n{m!r}") from None
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise NumericalError(f"eigen-decomposition returned non-finite values for matrix:\n{m!r}")
    return w, v


def collective_modes(coupling: CouplingMatrices, detuning=None) -> list[CollectiveMode]:
    """Eigenmodes of the effective matrix, sorted by descending decay rate.

    With ``detuning`` (the per-emitter dk offsets) the modes of
    G + i diag(dk) are returned instead; their Im parts locate the spectral
    peaks of detuned arrays.
    """
    g = coupling.effective
    if detuning is not None:
        g = g + 1j * np.diag(np.asarray(detuning, dtype=float))
    w, v = _eig(g)
    ref = float(np.mean(np.diag(g).imag))
    modes = []
    for i in range(len(w)):
        vec = v[:, i] / np.linalg.norm(v[:, i])
        k = int(np.argmax(np.abs(vec)))
        vec = vec * np.exp(-1j * np.angle(vec[k]))
        modes.append(CollectiveMode(complex(w[i]), vec, float(w[i].imag) - ref))
    modes.sort(key=lambda m: (-m.eigenvalue.real, m.eigenvalue.imag))
    return modes


def scenario_modes(scenario: Scenario, detuned: bool = True) -> list[CollectiveMode]:
    c = build_couplings(scenario)
    return collective_modes(c, scenario.array.dk if detuned else None)
