import math

import numpy as np
import pytest

from wgqed import GaussianPulse, MissingDriveError, TabulatedSpectrum, ValidationError, drive, evolve
from wgqed import dynamics
from wgqed.dynamics import default_t_max, drive_matrix, propagation_coefficients
from wgqed.figures import load_figure
from wgqed.spectra import chi_from_trajectory, solve_chi

from conftest import pair, single


@pytest.mark.parametrize("gamma_nw", [0.0, 0.2])
def test_single_emitter_exponential_decay(gamma_nw):
    s = single(gamma_nw, alpha0=(1.0,))
    tr = evolve(s, t_max=15.0, h=1e-3)
    exact = np.exp(-(1 + gamma_nw) / 2 * tr.t)
    assert np.max(np.abs(tr.alpha[:, 0] - exact)) < 1e-6


@pytest.mark.parametrize("mode, h", [("markovian", 1e-3), ("full", 1e-4)])
def test_dark_state_trapping(mode, h):
    s = pair(0.5, 0.0, z0=0.0, alpha0=(1.0, 0.0), mode=mode)
    tr = evolve(s, t_max=25.0, h=h, store_every=50)
    # alpha_1 = (1 + e^{-t}) / 2 for the markovian equations
    assert abs(tr.alpha[-1, 0]) ** 2 == pytest.approx(0.25, abs=1e-3)
    assert abs(tr.alpha[-1, 1]) ** 2 == pytest.approx(0.25, abs=1e-3)
    if mode == "markovian":
        assert np.allclose(tr.alpha[:, 0], (1 + np.exp(-tr.t)) / 2, atol=1e-9)


def test_chunk_boundaries_do_not_change_result(monkeypatch):
    s = pair(0.05, 0.2, z0=0.5, pulse=GaussianPulse(10.0), mode="full")
    ref = evolve(s, t_max=2.0, h=2.5e-5, store_every=10)
    monkeypatch.setattr(dynamics, "CHUNK", 997)
    chunked = evolve(s, t_max=2.0, h=2.5e-5, store_every=10)
    assert np.array_equal(ref.alpha, chunked.alpha)
    assert np.array_equal(ref.t, chunked.t)


def test_store_every_rows():
    tr = evolve(single(alpha0=(1.0,)), t_max=1.0, h=1e-3, store_every=100)
    assert len(tr.t) == 11
    assert tr.t[-1] == pytest.approx(1.0)
    assert tr.h == pytest.approx(0.1)


def test_retardation_is_small_for_short_arrays():
    base = dict(spacing=0.05, gamma_nw=0.2, z0=0.0, alpha0=(1.0, 0.0))
    m = evolve(pair(**base), t_max=5.0, h=2.5e-5, store_every=400)
    f = evolve(pair(**base, mode="full"), t_max=5.0, h=2.5e-5, store_every=400)
    assert np.max(np.abs(m.alpha - f.alpha)) < 1e-2
    assert np.max(np.abs(m.alpha - f.alpha)) > 0


def test_retarded_revival_for_long_delay():
    # lambda_a = 1e-3 with 1000.5 wavelengths: delay ~ 1, a genuine non-markovian case
    from wgqed import EmitterArray, Scenario

    arr = EmitterArray.chain(2, 1000.5, lambda_a=1e-3)
    s = Scenario(arr, initial_excitation=(1.0, 0.0), retardation_mode="full")
    tr = evolve(s, t_max=3.0, h=1e-3)
    delay = arr.z[1] - arr.z[0]
    before = tr.t < delay - 1e-9
    assert np.max(np.abs(tr.alpha[before, 1])) == 0.0
    assert np.max(np.abs(tr.alpha[~before, 1])) > 0.1


def test_pulse_drive_consistent_with_frequency_solve():
    s = single(0.2, z=5.0, pulse=GaussianPulse(5.0))
    tr = evolve(s, t_max=40.0, h=1e-3, store_every=5)
    dk = np.linspace(-10, 10, 401)
    chi_t = chi_from_trajectory(tr, dk)[:, 0]
    chi_f = solve_chi(s, dk)[:, 0]
    assert np.linalg.norm(chi_t - chi_f) / np.linalg.norm(chi_f) < 1e-3


def test_tabulated_drive_matches_gaussian():
    g = pair(0.05, 0.2, z0=3.0, pulse=GaussianPulse(4.0, 0.5), dk=[0.2, -0.2])
    tab = g.replace(pulse=TabulatedSpectrum.from_pulse(g.pulse, 6001))
    t = np.linspace(0.0, 6.0, 301)
    a = drive_matrix(g, t)
    b = drive_matrix(tab, t)
    assert np.max(np.abs(a - b)) < 1e-6 * np.max(np.abs(a))


def test_drive_peaks_at_arrival():
    s = single(z=5.0, pulse=GaussianPulse(10.0))
    t = np.linspace(0, 10, 10001)
    b = np.abs(drive(s, 0, t))
    assert t[np.argmax(b)] == pytest.approx(5.0, abs=1e-3)
    assert drive(s, 0, 5.0) == pytest.approx(drive_matrix(s, np.array([5.0]))[0, 0])


def test_drive_requires_pulse():
    with pytest.raises(MissingDriveError):
        drive(single(alpha0=(1.0,)), 0, 0.0)


def test_step_size_validation():
    with pytest.raises(ValidationError, match="too large"):
        evolve(pair(0.05, 0.2, alpha0=(1, 0)), t_max=1.0, h=0.5)
    with pytest.raises(ValidationError, match="smallest delay"):
        evolve(pair(0.05, 0.2, alpha0=(1, 0), mode="full"), t_max=1.0, h=1e-3)
    with pytest.raises(ValidationError):
        evolve(single(alpha0=(1.0,)), t_max=float("inf"))


def test_propagation_coefficients_diagonal():
    c = propagation_coefficients(pair(0.05, 0.2))
    assert np.allclose(np.diag(c), 0.6)


def test_default_t_max_covers_slow_mode():
    s = pair(0.05, 0.2, alpha0=(1, 0))
    assert default_t_max(s) == pytest.approx(10 / (2 * 0.02644), rel=1e-2)


def test_fig2c_exchange_with_slow_envelope():
    s = load_figure("fig2cd")
    tr = evolve(s, t_max=120.0, h=1e-3, store_every=10)
    p = tr.probabilities
    late = tr.t > 20
    total = p[late].sum(axis=1)
    rate = -np.polyfit(tr.t[late], np.log(total), 1)[0] / 2
    assert rate == pytest.approx(0.03, abs=0.005)
    # populations swap back and forth between the emitters
    diff = np.sign(p[late, 0] - p[late, 1])
    assert np.count_nonzero(np.diff(diff)) > 20


def test_fig5_detuned_pair_lasts_longer():
    a = evolve(load_figure("fig5a"), t_max=60.0, h=1e-3, store_every=100)
    b = evolve(load_figure("fig5b"), t_max=60.0, h=1e-3, store_every=100)
    assert b.probabilities[-1].sum() > 100 * a.probabilities[-1].sum()


def test_trajectory_csv(tmp_path):
    tr = evolve(pair(0.5, 0.2, alpha0=(1, 0)), t_max=0.01, h=1e-3)
    p = tmp_path / "t.csv"
    tr.write_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "t,re(alpha_1),im(alpha_1),re(alpha_2),im(alpha_2),|alpha_1|^2,|alpha_2|^2"
    assert len(lines) == 12
    assert lines[1].split(",")[1] == "1.0000000000000000e+00"
