"""Closed-form one- and two-emitter spectra.

These are written out term by term, without any matrix inversion, and serve
as independent oracles for the general solver in :mod:`wgqed.spectra`.
"""

from __future__ import annotations

import numpy as np

from .coupling import build_couplings
from .errors import ValidationError
from .model import Scenario


def _pair(scenario: Scenario, identical: bool):
    arr = scenario.array
    if arr.n != 2:
        raise ValidationError("closed form needs exactly two emitters")
    gw, gn = arr.gamma_wg, arr.gamma_nw
    if gw[0] != gw[1] or gn[0] != gn[1]:
        raise ValidationError("closed form needs equal decay rates")
    if identical and np.any(arr.dk != 0):
        raise ValidationError("closed form needs identical emitters (dk = 0)")
    cm = build_couplings(scenario)
    v11 = (gw[0] + gn[0]) / 2.0
    v12 = cm.v_w[0, 1] + cm.v_nw[0, 1]
    return arr, gw[0], v11, v12, arr.z[0], arr.z[1] - arr.z[0]


def single_emitter_chi(scenario: Scenario, dk) -> np.ndarray:
    """chi_1 = (alpha_1(0) + b_1(dk)) / (V_11 - i dk)."""
    arr = scenario.array
    if arr.n != 1 or arr.dk[0] != 0:
        raise ValidationError("closed form needs a single resonant emitter")
    dk = np.asarray(dk, dtype=float)
    g, gn, z1 = arr.gamma_wg[0], arr.gamma_nw[0], arr.z[0]
    k = arr.k_a + dk
    b1 = -1j * np.sqrt(g / 2.0) * scenario.input_spectrum(dk) * np.exp(1j * k * z1)
    return (scenario.alpha0[0] + b1) / ((g + gn) / 2.0 - 1j * dk)


def single_emitter_spectra(scenario: Scenario, dk) -> dict:
    """Left/right emission or reflection/transmission ratios for one emitter."""
    arr = scenario.array
    dk = np.asarray(dk, dtype=float)
    g, gn, z1 = arr.gamma_wg[0], arr.gamma_nw[0], arr.z[0]
    k = arr.k_a + dk
    c = np.sqrt(g / 2.0)
    if scenario.pulse is None:
        chi = single_emitter_chi(scenario, dk)
        return {
            "left": -1j * c * np.exp(1j * k * z1) * chi,
            "right": -1j * c * np.exp(-1j * k * z1) * chi,
        }
    den = (g + gn) / 2.0 - 1j * dk
    return {
        "reflection": -(g / 2.0) * np.exp(2j * k * z1) / den,
        "transmission": 1.0 - (g / 2.0) / den,
    }


def two_identical_decay(scenario: Scenario, dk) -> dict:
    """Emission to the left and right with emitter 1 initially excited."""
    arr, g, v11, v12, z1, z12 = _pair(scenario, identical=True)
    if not np.allclose(scenario.alpha0, [1.0, 0.0]):
        raise ValidationError("closed form needs alpha(0) = (1, 0)")
    dk = np.asarray(dk, dtype=float)
    k = arr.k_a + dk
    a = v11 - 1j * dk
    e2 = np.exp(2j * k * z12)
    den = a * a - v12 * v12 * e2
    c = -1j * np.sqrt(g / 2.0)
    return {
        "left": c * np.exp(1j * k * z1) * (a - v12 * e2) / den,
        "right": c * np.exp(-1j * k * z1) * (a - v12) / den,
    }


def two_identical_scattering(scenario: Scenario, dk) -> dict:
    """Reflection and transmission ratios for two identical emitters."""
    arr, g, v11, v12, z1, z12 = _pair(scenario, identical=True)
    dk = np.asarray(dk, dtype=float)
    k = arr.k_a + dk
    a = v11 - 1j * dk
    e2 = np.exp(2j * k * z12)
    den = a * a - v12 * v12 * e2
    refl = -(g / 2.0) * np.exp(2j * k * z1) * (a * (1 + e2) - 2 * v12 * e2) / den
    trans = 1.0 - (g / 2.0) * (2 * a - v12 * (1 + e2)) / den
    return {"reflection": refl, "transmission": trans}


def two_nonidentical_scattering(scenario: Scenario, dk) -> dict:
    """Reflection and transmission ratios for two emitters of different frequency."""
    arr, g, v11, v12, z1, z12 = _pair(scenario, identical=False)
    dk = np.asarray(dk, dtype=float)
    k = arr.k_a + dk
    m11 = v11 - 1j * (dk - arr.dk[0])
    m22 = v11 - 1j * (dk - arr.dk[1])
    m12 = v12 * np.exp(1j * k * z12)
    det = m11 * m22 - m12 * m12
    refl = (
        (g / 2.0)
        * np.exp(2j * k * z1)
        * (2 * m12 * np.exp(1j * k * z12) - m11 * np.exp(2j * k * z12) - m22)
        / det
    )
    trans = 1.0 - (g / 2.0) * (m11 + m22 - 2 * m12 * np.cos(k * z12)) / det
    return {"reflection": refl, "transmission": trans}


def independent_reflection(scenario: Scenario, dk) -> np.ndarray:
    """Reflection ratio of each emitter on its own, shape (len(dk), N).

    This is the decoupled-emitter control: every emitter scatters as if the
    others were absent.
    """
    arr = scenario.array
    dk = np.atleast_1d(np.asarray(dk, dtype=float))
    k = arr.k_a + dk
    g, gn = arr.gamma_wg, arr.gamma_nw
    den = (g + gn)[None, :] / 2.0 - 1j * (dk[:, None] - arr.dk[None, :])
    return -(g[None, :] / 2.0) * np.exp(2j * k[:, None] * arr.z[None, :]) / den
