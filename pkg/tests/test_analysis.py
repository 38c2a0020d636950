import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wgqed import (
    GaussianPulse,
    SpectrumGrid,
    ValidationError,
    conservation_audit,
    coupling_transition_sweep,
    decay_spectra,
    evolve,
    find_peaks,
    scattering_spectra,
    spectrum_difference,
)
from wgqed.analysis import (
    canonical_grid,
    crossing,
    detuned_pair,
    nw_spectrum_difference,
    separation_sweep,
)
from wgqed.coupling import build_couplings

from conftest import pair, single


def grid_of(dk, r, t):
    return SpectrumGrid(np.asarray(dk), "scattering", {"reflection": np.sqrt(r) + 0j, "transmission": np.sqrt(t) + 0j})


DK = np.linspace(-5, 5, 1001)


def test_identical_inputs_give_zero():
    g = grid_of(DK, np.exp(-DK**2), 1 - np.exp(-DK**2))
    assert spectrum_difference(g, g).value == 0.0


def test_disjoint_reflection_gives_unit_term():
    r1 = np.where(DK < 0, 0.5, 0.0)
    r2 = np.where(DK > 0.1, 0.5, 0.0)
    t = np.full_like(DK, 0.3)
    d = spectrum_difference(grid_of(DK, r1, t), grid_of(DK, r2, t))
    assert d.reflection_term == pytest.approx(1.0)
    assert d.transmission_term == 0.0
    assert d.value == pytest.approx(0.5)


def test_zero_denominators_are_zero():
    zeros, ones = np.zeros_like(DK), np.ones_like(DK)
    d = spectrum_difference(grid_of(DK, zeros, ones), grid_of(DK, zeros, ones))
    assert d.value == 0.0


def test_mismatched_grids_rejected():
    a = grid_of(DK, np.zeros_like(DK), np.ones_like(DK))
    b = grid_of(DK + 1e-3, np.zeros_like(DK), np.ones_like(DK))
    with pytest.raises(ValidationError, match="same dk grid"):
        spectrum_difference(a, b)


unit = st.lists(st.floats(0, 1), min_size=50, max_size=50)


@settings(max_examples=60, deadline=None)
@given(r1=unit, r2=unit, f1=unit, f2=unit)
def test_difference_bounded_and_symmetric(r1, r2, f1, f2):
    dk = np.linspace(-1, 1, 50)
    r1, r2 = np.array(r1), np.array(r2)
    t1 = (1 - r1) * np.array(f1)
    t2 = (1 - r2) * np.array(f2)
    a, b = grid_of(dk, r1, t1), grid_of(dk, r2, t2)
    ab, ba = spectrum_difference(a, b).value, spectrum_difference(b, a).value
    assert 0.0 <= ab <= 1.0
    assert ab == pytest.approx(ba, abs=1e-15)


def test_difference_at_quoted_separation():
    d = nw_spectrum_difference(pair(0.05, 0.1, pulse=GaussianPulse(10.0)))
    assert d.value == pytest.approx(0.5, abs=0.05)
    assert d.grid["points"] == 16001


def test_difference_stable_under_finer_grid():
    s = pair(0.05, 0.1, pulse=GaussianPulse(10.0))
    coarse = nw_spectrum_difference(s).value
    fine = nw_spectrum_difference(s, np.linspace(-20, 20, 64001)).value
    assert fine == pytest.approx(coarse, rel=0.01)


def test_separation_sweep_limits():
    rows = separation_sweep(pair(0.05, 0.1, pulse=GaussianPulse(10.0)), [0.005, 1.0, 2.0])
    assert rows[0]["delta_sd"] > 0.9
    assert rows[1]["delta_sd"] < 0.1
    assert rows[2]["delta_sd"] < 0.1


def test_crossing_interpolates_in_log():
    assert crossing([0.01, 0.1], [1.0, 0.0]) == pytest.approx(math.sqrt(0.001))
    assert math.isnan(crossing([1, 2], [0.1, 0.2]))


def test_single_lorentzian_width():
    g = scattering_spectra(single(0.0, pulse=GaussianPulse(1.0)), np.linspace(-10, 10, 20001))
    cat = find_peaks(g)
    assert len(cat.peaks) == 1
    assert cat.peaks[0].position == pytest.approx(0.0, abs=1e-9)
    assert cat.peaks[0].fwhm == pytest.approx(1.0, rel=0.02)
    assert math.isnan(cat.separation)


def test_lossy_lorentzian_width():
    g = scattering_spectra(single(0.3, pulse=GaussianPulse(1.0)), np.linspace(-10, 10, 20001))
    assert find_peaks(g).peaks[0].fwhm == pytest.approx(1.3, rel=0.01)


def test_no_peaks_empty_catalogue():
    cat = find_peaks(grid_of(DK, np.zeros_like(DK), np.ones_like(DK)))
    assert cat.peaks == []
    assert cat.to_dict()["separation"] is None


def test_edge_maximum_not_reported():
    cat = find_peaks(grid_of(DK, np.exp(-((DK - 5) ** 2)), np.zeros_like(DK)))
    assert cat.peaks == []


def test_unresolved_peak_warns():
    dk = np.linspace(-5, 5, 101)
    with pytest.warns(RuntimeWarning, match="unresolved"):
        find_peaks(grid_of(dk, 0.01 / (0.01 + dk**2), np.zeros_like(dk)))


def test_dominant_ties_prefer_larger_offset():
    dk = np.linspace(-10, 10, 20001)
    r = sum(1 / (1 + ((dk - c) / 0.2) ** 2) for c in (-1.0, 3.0))
    cat = find_peaks(grid_of(dk, r / 2, np.zeros_like(dk)))
    small = np.exp(-((dk - 7) ** 2) / 0.01) * 0.1
    cat3 = find_peaks(grid_of(dk, r / 2 + small, np.zeros_like(dk)))
    assert cat.separation == pytest.approx(4.0, abs=1e-2)
    assert cat3.separation == pytest.approx(cat.separation)


def test_identical_pair_peaks():
    g = scattering_spectra(pair(0.05, 0.1, pulse=GaussianPulse(10.0)), canonical_grid())
    cat = find_peaks(g)
    dom = sorted(cat.dominant, key=lambda p: p.position)
    assert [p.position for p in dom] == pytest.approx([-2.46, 2.46], rel=0.05)
    widths = sorted(p.fwhm for p in dom)
    assert widths[0] == pytest.approx(0.06, rel=0.15)
    assert widths[1] == pytest.approx(2.13, rel=0.15)
    assert all(p.fwhm > 0 for p in cat.peaks)


def test_strongly_detuned_pair_peaks():
    s = detuned_pair(pair(0.05, 0.1, pulse=GaussianPulse(10.0)), 10.0)
    cat = find_peaks(scattering_spectra(s, canonical_grid()))
    assert cat.separation == pytest.approx(11.0, rel=0.1)
    assert sorted(p.fwhm for p in cat.dominant) == pytest.approx([0.66, 1.56], rel=0.15)


def test_detuned_pair_requires_two():
    with pytest.raises(ValidationError):
        detuned_pair(single(pulse=GaussianPulse(1.0)), 1.0)


def test_transition_sweep():
    base = pair(0.05, 0.1, pulse=GaussianPulse(10.0))
    im_v = build_couplings(base).effective[0, 1].imag
    rows = coupling_transition_sweep(base, [0.0, 2 * im_v, 10.0, 20.0], canonical_grid(), threads=2)
    assert [r["dw12"] for r in rows] == pytest.approx([0.0, 2 * im_v, 10.0, 20.0])
    assert rows[0]["separation"] == pytest.approx(2 * im_v, rel=0.01)
    assert rows[0]["linewidth_difference"] == pytest.approx(2.1, rel=0.1)
    assert rows[-1]["separation"] == pytest.approx(20.0, rel=0.1)
    seps = [r["separation"] for r in rows]
    assert seps == sorted(seps)


def test_sweeps_deterministic_across_threads():
    base = pair(0.05, 0.1, pulse=GaussianPulse(10.0))
    rs = np.geomspace(0.01, 1, 6)
    assert separation_sweep(base, rs, 1) == separation_sweep(base, rs, 3)


@pytest.mark.parametrize("gamma_nw, guided", [(0.0, 1.0), (0.2, 5 / 6)])
def test_audit_decay(gamma_nw, guided):
    s = single(gamma_nw, alpha0=(1.0,))
    tr = evolve(s, t_max=40.0, h=1e-3, store_every=100)
    rep = conservation_audit(tr, decay_spectra(s))
    assert rep["guided"] == pytest.approx(guided, abs=1e-3)
    assert rep["non_guided"] == pytest.approx(1 - guided, abs=1e-3)
    assert rep["survivors"] < 1e-8
    assert rep["flags"] == []


def test_audit_unitarity():
    s = scattering_spectra(pair(0.3, 0.0, pulse=GaussianPulse(1.0)), np.linspace(-5, 5, 1001))
    rep = conservation_audit(scattering_grid=s)
    assert rep["unitarity_residual"] < 1e-9
    assert rep["flags"] == []
