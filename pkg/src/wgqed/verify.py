"""Acceptance checks with measured-versus-expected reporting.

Each check returns a :class:`Check`; :func:`run_checks` runs them all and
:func:`report` turns the results into a JSON-ready dict. ``perturb`` scales
the off-diagonal couplings in the spectral checks so that a deliberately
broken model can be shown to fail (negative control).
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import closed_forms as cf
from .analysis import (
    canonical_grid,
    coupling_transition_sweep,
    crossing,
    detuned_pair,
    find_peaks,
    separation_sweep,
    spectrum_difference,
)
from .coupling import build_couplings, nonwaveguide_coupling, scenario_modes
from .dynamics import evolve
from .model import EmitterArray, GaussianPulse, Scenario
from .spectra import (
    SpectrumGrid,
    decay_spectra,
    scattering_spectra,
    solve_chi,
    chi_from_trajectory,
    waveguide_branching,
)

LAMBDA = 1e-3


@dataclass
class Check:
    id: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)
    tolerance: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.id:2d} {self.name}: measured {_short(self.measured)}"


def _short(d: dict) -> str:
    parts = []
    for k, v in d.items():
        if isinstance(v, float):
            parts.append(f"{k}={v:.6g}")
        elif isinstance(v, (list, tuple)) and v and isinstance(v[0], float):
            parts.append(f"{k}=[{', '.join(f'{x:.4g}' for x in v)}]")
        else:
            parts.append(f"{k}={v}")
    return ", ".join(parts)


def pair(spacing, gamma_nw=0.0, z0=2.0, dk=None, pulse=None, alpha0=None, nw=True, mode="markovian"):
    arr = EmitterArray.chain(2, spacing, z0=z0, gamma_nw=gamma_nw, dk=dk, lambda_a=LAMBDA)
    return Scenario(arr, pulse, alpha0, nw, mode)


def _sig(x: float, digits: int) -> float:
    if x == 0:
        return 0.0
    return round(x, digits - 1 - int(math.floor(math.log10(abs(x)))))


def _quoted_digits(s: str) -> int:
    return len(s.replace("-", "").replace(".", "").lstrip("0"))


def _matches(measured: float, quoted: str, cap: int = 2) -> bool:
    """Agreement to the precision quoted, capped at ``cap`` significant figures."""
    d = min(_quoted_digits(quoted), cap)
    return _sig(measured, d) == _sig(float(quoted), d)


# --- 1. golden couplings --------------------------------------------------------


def check_couplings() -> Check:
    k_a = 2 * math.pi / LAMBDA
    got = {
        "a=0.5": complex(nonwaveguide_coupling(0.2, 0.2, k_a * 0.5 * LAMBDA)),
        "a=0.05": complex(nonwaveguide_coupling(0.2, 0.2, k_a * 0.05 * LAMBDA)),
    }
    want = {"a=0.5": ("0.0152", "-0.0429"), "a=0.05": ("1.52", "4.36")}
    ok = all(
        _matches(got[k].real, want[k][0], 3) and _matches(got[k].imag, want[k][1], 3) for k in got
    )
    return Check(
        1,
        "golden non-waveguide couplings",
        ok,
        {k: [v.real, v.imag] for k, v in got.items()},
        {"a=0.5": "0.015-0.043i", "a=0.05": "1.52+4.36i"},
        "3 significant figures",
    )


# --- 2. collective modes --------------------------------------------------------


def _mode_summary(s: Scenario):
    modes = scenario_modes(s)
    return [m.decay_rate for m in modes], [abs(m.shift) for m in modes]


def check_modes() -> Check:
    cases = {
        "a=0.5 no nw": (0.5, False, ("1.1", "0.1"), "0"),
        "a=0.5 nw": (0.5, True, ("1.115", "0.085"), "0.043"),
        "a=0.05 no nw": (0.05, False, ("1.08", "0.12"), "0.15"),
        "a=0.05 nw": (0.05, True, ("1.17", "0.03"), "4.77"),
    }
    measured, ok = {}, True
    for name, (a, nw, rates, shift) in cases.items():
        r, sh = _mode_summary(pair(a, 0.2, nw=nw))
        measured[name] = [r[0], r[1], sh[0], sh[1]]
        ok &= _matches(r[0], rates[0]) and _matches(r[1], rates[1])
        if shift == "0":
            ok &= max(sh) < 5e-3
        else:
            ok &= _matches(sh[0], shift) and _matches(sh[1], shift)
    expected = {k: [v[2][0], v[2][1], "+-" + v[3]] for k, v in cases.items()}
    return Check(2, "two-emitter collective modes", ok, measured, expected, "2 significant figures")


# --- 3. oracle equivalence --------------------------------------------------------


def _rel(a, b) -> float:
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


def oracle_errors(offdiag_scale: float = 1.0) -> dict:
    # arrays sit near z = 0: phases k z of order 1e4 would cost ~1e-12 in
    # rounding alone, independent of the method
    dk = np.linspace(-15, 15, 10_000)
    out = {}
    one = Scenario(EmitterArray.chain(1, 1.0, z0=1.3, gamma_nw=0.2, lambda_a=LAMBDA))
    d = decay_spectra(one.replace(initial_excitation=(1.0,)), dk)
    ref = cf.single_emitter_spectra(one.replace(initial_excitation=(1.0,)), dk)
    out["N=1 decay"] = max(_rel(d["left"], ref["left"]), _rel(d["right"], ref["right"]))
    sp = one.replace(pulse=GaussianPulse(10.0))
    s = scattering_spectra(sp, dk)
    ref = cf.single_emitter_spectra(sp, dk)
    out["N=1 scattering"] = max(
        _rel(s["reflection"], ref["reflection"]), _rel(s["transmission"], ref["transmission"])
    )
    for a in (0.05, 0.3):
        dec = pair(a, 0.2, z0=0.0, alpha0=(1.0, 0.0))
        d = decay_spectra(dec, dk)
        ref = cf.two_identical_decay(dec, dk)
        out[f"N=2 decay a={a}"] = max(_rel(d["left"], ref["left"]), _rel(d["right"], ref["right"]))
        sc = pair(a, 0.2, z0=0.0, pulse=GaussianPulse(10.0))
        s = scattering_spectra(sc, dk, offdiag_scale)
        ref = cf.two_identical_scattering(sc, dk)
        out[f"N=2 scattering a={a}"] = max(
            _rel(s["reflection"], ref["reflection"]), _rel(s["transmission"], ref["transmission"])
        )
        nd = pair(a, 0.2, z0=0.0, dk=[1.0, -1.0], pulse=GaussianPulse(10.0))
        s = scattering_spectra(nd, dk, offdiag_scale)
        ref = cf.two_nonidentical_scattering(nd, dk)
        out[f"N=2 detuned a={a}"] = max(
            _rel(s["reflection"], ref["reflection"]), _rel(s["transmission"], ref["transmission"])
        )
    return out


def check_oracles(perturb: float = 0.0) -> Check:
    errs = oracle_errors(1.0 + perturb)
    ok = max(errs.values()) < 1e-12
    return Check(3, "matrix solve vs closed forms", ok, errs, {"max_rel_error": "< 1e-12"}, "1e-12")


# --- 4. unitarity ---------------------------------------------------------------


def unitarity_residuals(offdiag_scale: float = 1.0) -> dict:
    dk = np.linspace(-20, 20, 10_001)
    out = {}
    arrays = {
        "N=1": EmitterArray.chain(1, 1.0, z0=2.0, lambda_a=LAMBDA),
        "N=2": EmitterArray.chain(2, 0.3, z0=2.0, lambda_a=LAMBDA),
        "N=2 detuned": EmitterArray.chain(2, 0.05, z0=2.0, dk=[0.5, -0.5], lambda_a=LAMBDA),
        "N=5": EmitterArray.chain(5, 0.3, z0=2.0, lambda_a=LAMBDA),
        "N=5 detuned": EmitterArray.chain(5, 0.5, z0=20.0, dk=[0.2, 0.1, 0, -0.1, -0.2], lambda_a=LAMBDA),
    }
    for name, arr in arrays.items():
        s = scattering_spectra(Scenario(arr, GaussianPulse(1.0)), dk, offdiag_scale)
        out[name] = float(np.max(np.abs(s.reflectance + s.transmittance - 1.0)))
    return out


def check_unitarity(perturb: float = 0.0) -> Check:
    res = unitarity_residuals(1.0 + perturb)
    ok = max(res.values()) < 1e-9
    return Check(4, "lossless unitarity |R|^2 + |T|^2 = 1", ok, res, {"residual": "< 1e-9"}, "1e-9")


# --- 5. total reflection ----------------------------------------------------------


def check_total_reflection() -> Check:
    s = pair(0.3, 0.0, z0=2.0, pulse=GaussianPulse(1.0))
    g = scattering_spectra(s, np.array([-1.0, 0.0, 1.0]))
    bt = abs(g["transmission"][1])
    k = s.array.k_a
    want = 2 * k * s.array.z[0] + math.pi
    dphi = float(np.angle(g["reflection"][1] * np.exp(-1j * want)))
    ok = bt < 1e-12 and abs(dphi) < 1e-9
    return Check(
        5,
        "resonant total reflection with pi phase",
        ok,
        {"|bT/b0|": bt, "phase_error": dphi},
        {"|bT/b0|": "< 1e-12", "arg(bR/b0)": "2 k z1 + pi"},
        "1e-12 / 1e-9",
    )


# --- 6. DIET ----------------------------------------------------------------------


def check_diet() -> Check:
    dw = 0.2
    s = pair(0.5, 0.0, z0=20.0, dk=[dw / 2, -dw / 2], pulse=GaussianPulse(1.0))
    coupled = float(scattering_spectra(s, np.array([-0.5, 0.0, 0.5])).reflectance[1])
    # decoupled control: one emitter probed at a detuning of dw from its line
    one = Scenario(EmitterArray.chain(1, 1.0, z0=20.0, lambda_a=LAMBDA), GaussianPulse(1.0))
    control = float(np.abs(cf.independent_reflection(one, [dw])[0, 0]) ** 2)
    expected_control = 1.0 / (1.0 + (2 * dw) ** 2)
    ok = coupled < 1e-6 and abs(control - expected_control) < 1e-3
    return Check(
        6,
        "dipole-induced transparency at the detuning midpoint",
        ok,
        {"coupled_reflectance": coupled, "decoupled_reflectance": control},
        {"coupled_reflectance": "< 1e-6", "decoupled_reflectance": expected_control},
        "1e-6 / 1e-3",
    )


# --- 7. spectrum difference curve -------------------------------------------------


def delta_sd_curve(gamma_nw: float, points: int = 40, threads: int = 1):
    rs = np.geomspace(0.005, 2.0, points)
    rows = separation_sweep(pair(0.05, gamma_nw, pulse=GaussianPulse(10.0)), rs, threads)
    return rs, np.array([r["delta_sd"] for r in rows])


def check_delta_sd(threads: int = 1) -> Check:
    rs, y1 = delta_sd_curve(0.1, threads=threads)
    _, y5 = delta_sd_curve(0.5, threads=threads)
    c1, c5 = crossing(rs, y1), crossing(rs, y5)
    ok = (
        abs(c1 - 0.05) <= 0.01
        and abs(c5 - 0.08) <= 0.016
        and y1[0] > 0.9
        and y1[-1] < 0.1
        and y5[0] > 0.9
        and y5[-1] < 0.1
    )
    return Check(
        7,
        "spectrum difference versus separation",
        ok,
        {
            "crossing(g=0.1)": c1,
            "crossing(g=0.5)": c5,
            "dsd(0.005)": float(y1[0]),
            "dsd(2)": float(y1[-1]),
        },
        {"crossing(g=0.1)": "0.05+-0.01", "crossing(g=0.5)": "0.08+-0.016", "dsd(0.005)": "> 0.9", "dsd(2)": "< 0.1"},
        "as listed",
    )


# --- 8. peak metrology -------------------------------------------------------------


def fig6_catalogue(dw: float):
    base = pair(0.05, 0.1, pulse=GaussianPulse(10.0))
    return find_peaks(scattering_spectra(detuned_pair(base, dw), canonical_grid()), "reflection")


def check_peaks() -> Check:
    c0 = fig6_catalogue(0.0)
    c10 = fig6_catalogue(10.0)
    d0 = sorted(c0.dominant, key=lambda p: p.position)
    d10 = sorted(c10.dominant, key=lambda p: -p.fwhm)
    pos = [p.position for p in d0]
    w0 = sorted((p.fwhm for p in d0), reverse=True)
    w10 = [p.fwhm for p in d10]
    ok = (
        len(d0) == 2
        and len(d10) == 2
        and all(abs(abs(x) - 2.46) <= 0.05 * 2.46 for x in pos)
        and abs(w0[0] - 2.13) <= 0.15 * 2.13
        and abs(w0[1] - 0.06) <= 0.15 * 0.06
        and abs(c10.separation - 11.0) <= 1.1
        and abs(w10[0] - 1.56) <= 0.15 * 1.56
        and abs(w10[1] - 0.66) <= 0.15 * 0.66
    )
    return Check(
        8,
        "reflection peak positions and widths",
        ok,
        {"positions(dw=0)": pos, "widths(dw=0)": w0, "separation(dw=10)": c10.separation, "widths(dw=10)": w10},
        {"positions(dw=0)": "+-2.46 (5%)", "widths(dw=0)": "2.13, 0.06 (15%)", "separation(dw=10)": "11 (10%)", "widths(dw=10)": "1.56, 0.66 (15%)"},
        "as listed",
    )


# --- 9. transition curve ------------------------------------------------------------


def check_transition(threads: int = 1) -> Check:
    base = pair(0.05, 0.1, pulse=GaussianPulse(10.0))
    cm = build_couplings(base)
    im_v = float(cm.effective[0, 1].imag)
    dws = np.linspace(0.0, 20.0, 41)
    rows = coupling_transition_sweep(base, dws, canonical_grid(), threads)
    seps = np.array([r["separation"] for r in rows])
    monotone = bool(np.all(np.diff(seps) >= -1e-9))
    lw0 = rows[0]["linewidth_difference"]
    at = coupling_transition_sweep(base, [2 * im_v], canonical_grid())[0]["linewidth_difference"]
    # the reference "maximum" read both as the dw = 0 value and as 2 (Gamma + gamma)
    frac_obs = at / lw0
    frac_max = at / (2 * (1.0 + 0.1))
    ok = (
        monotone
        and abs(lw0 - 2.1) <= 0.21
        and abs(frac_obs - 0.66) <= 0.10
        and abs(frac_max - 0.66) <= 0.10
    )
    return Check(
        9,
        "coupled-to-independent transition",
        ok,
        {
            "monotone": monotone,
            "lw_diff(0)": lw0,
            "2 Im V12": 2 * im_v,
            "fraction_of_dw0": frac_obs,
            "fraction_of_2(G+g)": frac_max,
            "separation(20)": float(seps[-1]),
        },
        {"monotone": True, "lw_diff(0)": "2.1+-10%", "fraction": "0.66+-0.10"},
        "as listed",
    )


# --- 10. time/frequency consistency ---------------------------------------------------


def time_frequency_error(s: Scenario, t_max: float, h: float = 1e-3, store_every: int = 10) -> float:
    """Relative L2 distance between transformed alpha(t) and the direct chi."""
    traj = evolve(s, t_max=t_max, h=h, store_every=store_every)
    dk = np.linspace(-15.0, 15.0, 1501)
    num = chi_from_trajectory(traj, dk[:, None] - s.array.dk[None, :])
    direct = solve_chi(s, dk)
    return float(np.linalg.norm(num - direct) / np.linalg.norm(direct))


def check_time_frequency() -> Check:
    fig2a = pair(0.5, 0.2, z0=0.0, alpha0=(1.0, 0.0))
    # the narrow subradiant line of this case resolves the delta_k * z_12
    # phase that the markovian equations drop, so integrate with delays
    fig3 = pair(0.05, 0.2, z0=10.0, pulse=GaussianPulse(10.0), mode="full")
    e2 = time_frequency_error(fig2a, 150.0)
    e3 = time_frequency_error(fig3, 300.0, h=5e-5, store_every=200)
    ok = e2 < 0.02 and e3 < 0.02
    return Check(
        10,
        "Fourier transform of alpha(t) vs frequency solve",
        ok,
        {"fig2a": e2, "fig3": e3},
        {"relative_L2": "< 0.02"},
        "2%",
    )


# --- 11. branching ratio ---------------------------------------------------------------


def check_branching() -> Check:
    s = Scenario(EmitterArray.chain(1, 1.0, z0=1.0, gamma_nw=0.2, lambda_a=LAMBDA), initial_excitation=(1.0,))
    guided = waveguide_branching(decay_spectra(s))
    ok = abs(guided - 5 / 6) < 1e-3
    return Check(11, "single-emitter branching ratio", ok, {"guided": guided}, {"guided": 5 / 6}, "1e-3")


# --- 12. properties ------------------------------------------------------------------


def property_results(threads: int = 4) -> dict:
    out = {}
    one = Scenario(EmitterArray.chain(1, 1.0, gamma_nw=0.2, lambda_a=LAMBDA), initial_excitation=(1.0,))
    tr = evolve(one, t_max=20.0, h=1e-3, store_every=10)
    out["exp_decay_error"] = float(np.max(np.abs(tr.alpha[:, 0] - np.exp(-0.6 * tr.t))))

    dark = {}
    for mode, h in (("markovian", 1e-3), ("full", 1e-4)):
        s = pair(0.5, 0.0, z0=0.0, alpha0=(1.0, 0.0), mode=mode)
        tr = evolve(s, t_max=30.0, h=h, store_every=100)
        dark[mode] = float(abs(tr.alpha[-1, 0]) ** 2)
    out["dark_state"] = dark

    dk = np.linspace(-20, 20, 4001)
    s1 = pair(0.05, 0.2, z0=2.0, pulse=GaussianPulse(10.0))
    s2 = pair(0.05, 0.2, z0=7.25, pulse=GaussianPulse(10.0))
    g1, g2 = scattering_spectra(s1, dk), scattering_spectra(s2, dk)
    out["frame_invariance"] = float(
        max(np.max(np.abs(g1.reflectance - g2.reflectance)), np.max(np.abs(g1.transmittance - g2.transmittance)))
    )

    rng = np.random.default_rng(7)
    sym, lo, hi = 0.0, 1.0, 0.0
    for _ in range(20):
        a = _random_grid(rng, dk)
        b = _random_grid(rng, dk)
        ab, ba = spectrum_difference(a, b).value, spectrum_difference(b, a).value
        sym = max(sym, abs(ab - ba))
        lo, hi = min(lo, ab), max(hi, ab)
    ones, zeros = np.ones(len(dk), complex), np.zeros(len(dk), complex)
    mirror = SpectrumGrid(dk, "scattering", {"reflection": ones, "transmission": zeros})
    clear = SpectrumGrid(dk, "scattering", {"reflection": zeros, "transmission": ones})
    extreme = spectrum_difference(mirror, clear).value
    lo, hi = min(lo, extreme), max(hi, extreme)
    out["dsd_symmetry"] = sym
    out["dsd_range"] = [lo, hi]
    out["dsd_self"] = spectrum_difference(g1, g1).value

    rs = np.geomspace(0.01, 1.0, 8)
    base = pair(0.05, 0.1, pulse=GaussianPulse(10.0))
    out["deterministic_threads"] = separation_sweep(base, rs, 1) == separation_sweep(base, rs, threads)
    return out


def _random_grid(rng, dk) -> SpectrumGrid:
    r = rng.uniform(0, 1, len(dk))
    t = np.sqrt(rng.uniform(0, 1 - r))
    return SpectrumGrid(dk, "scattering", {"reflection": np.sqrt(r) + 0j, "transmission": t + 0j})


def check_properties(threads: int = 4) -> Check:
    p = property_results(threads)
    ok = (
        p["exp_decay_error"] < 1e-6
        and all(abs(v - 0.25) < 1e-3 for v in p["dark_state"].values())
        and p["frame_invariance"] < 1e-9
        and p["dsd_symmetry"] < 1e-15
        and 0.0 <= p["dsd_range"][0]
        and p["dsd_range"][1] <= 1.0
        and p["dsd_self"] == 0.0
        and p["deterministic_threads"]
    )
    return Check(
        12,
        "property suite",
        ok,
        p,
        {
            "exp_decay_error": "< 1e-6",
            "dark_state": "0.25 +- 1e-3",
            "frame_invariance": "< 1e-9",
            "dsd_symmetry": "0",
            "dsd_range": "[0, 1]",
            "deterministic_threads": True,
        },
        "as listed",
    )


CHECKS = {
    1: check_couplings,
    2: check_modes,
    3: check_oracles,
    4: check_unitarity,
    5: check_total_reflection,
    6: check_diet,
    7: check_delta_sd,
    8: check_peaks,
    9: check_transition,
    10: check_time_frequency,
    11: check_branching,
    12: check_properties,
}


def run_check(i: int, perturb: float = 0.0, threads: int = 1) -> Check:
    fn = CHECKS[i]
    t0 = time.perf_counter()
    if i in (3, 4):
        c = fn(perturb)
    elif i in (7, 9, 12):
        c = fn(max(threads, 1) if i != 12 else max(threads, 2))
    else:
        c = fn()
    c.seconds = time.perf_counter() - t0
    return c


def run_checks(perturb: float = 0.0, threads: int = 1, only=None) -> list[Check]:
    ids = sorted(CHECKS) if not only else sorted(only)
    return [run_check(i, perturb, threads) for i in ids]


def report(checks: list[Check]) -> dict:
    return {
        "passed": all(c.passed for c in checks),
        "checks": [_jsonable(asdict(c)) for c in checks],
    }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x
