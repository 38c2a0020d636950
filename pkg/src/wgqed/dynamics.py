"""Time-domain integration of the emitter amplitude equations.

    d alpha_j/dt = b_j(t) - sum_l C_jl exp(i (dk_j - dk_l) t) alpha_l(t - z_jl / v_g)

with C_jl = (V^w_jl + V^nw_jl) exp(i k_l z_jl). Markovian mode evaluates
alpha_l at t; full mode keeps the delays and reads them from the stored
history by cubic Hermite interpolation. Amplitudes vanish before t = 0.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np

from .coupling import build_couplings, scenario_modes
from .errors import MissingDriveError, NumericalError, ValidationError
from .model import GAUSS_PEAK, GaussianPulse, Scenario

T_MAX_CAP = 1e4
CHUNK = 50_000


@dataclass(frozen=True)
class AmplitudeTrajectory:
    """Sampled amplitudes alpha_j(t) on a uniform grid (step ``h`` between rows)."""

    t: np.ndarray
    alpha: np.ndarray
    drive: np.ndarray | None = None
    h: float = 0.0

    @property
    def n(self) -> int:
        return self.alpha.shape[1]

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.alpha) ** 2

    def write_csv(self, path) -> None:
        n = self.n
        header = ["t"]
        header += [f"{p}(alpha_{j + 1})" for j in range(n) for p in ("re", "im")]
        header += [f"|alpha_{j + 1}|^2" for j in range(n)]
        prob = self.probabilities
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for i in range(len(self.t)):
                row = [self.t[i]]
                for j in range(n):
                    row += [self.alpha[i, j].real, self.alpha[i, j].imag]
                row += list(prob[i])
                w.writerow([f"{v:.16e}" for v in row])


def excitation_probabilities(traj: AmplitudeTrajectory) -> np.ndarray:
    """|alpha_j(t)|^2, shape (len(t), N)."""
    return traj.probabilities


# --- drive --------------------------------------------------------------------


def drive(scenario: Scenario, j: int, t):
    """Excitation of emitter ``j`` by the incident photon at time(s) ``t``."""
    if scenario.pulse is None:
        raise MissingDriveError("scenario has no input pulse")
    t = np.asarray(t, dtype=float)
    out = drive_matrix(scenario, t.reshape(-1))[:, j].reshape(t.shape)
    return out[()] if out.ndim == 0 else out


def drive_matrix(scenario: Scenario, t: np.ndarray) -> np.ndarray:
    """Drive b_j(t) for all emitters, shape (len(t), N)."""
    t = np.asarray(t, dtype=float)
    arr = scenario.array
    n = arr.n
    if scenario.pulse is None:
        return np.zeros((len(t), n), dtype=complex)
    z, gw, dk, ka = arr.z, arr.gamma_wg, arr.dk, arr.k_a
    p = scenario.pulse
    if isinstance(p, GaussianPulse):
        d0, c = p.width, p.center_dk
        amp = -1j / GAUSS_PEAK * np.sqrt(gw * d0) * np.exp(1j * (ka + c) * z)
        x = z[None, :] - t[:, None]
        return amp[None, :] * np.exp(1j * (dk - c)[None, :] * t[:, None] - 0.25 * d0 * d0 * x * x)
    # tabulated: trapezoid quadrature of the pulse envelope over its table
    q = np.asarray(p.dk)
    beta = np.asarray(p.values)
    wq = np.empty_like(q)
    wq[1:-1] = 0.5 * (q[2:] - q[:-2])
    wq[0] = 0.5 * (q[1] - q[0])
    wq[-1] = 0.5 * (q[-1] - q[-2])
    bw = beta * wq
    out = np.empty((len(t), n), dtype=complex)
    step = max(1, 2_000_000 // len(q))
    for j in range(n):
        pref = -1j / (2 * math.pi) * math.sqrt(gw[j] / 2.0) * np.exp(1j * ka * z[j])
        for s in range(0, len(t), step):
            ts = t[s : s + step]
            env = np.exp(1j * np.outer(z[j] - ts, q)) @ bw
            out[s : s + step, j] = pref * np.exp(1j * dk[j] * ts) * env
    return out


# --- integrator -----------------------------------------------------------------


@numba.njit(cache=True)
def _delayed(alpha, deriv, l, s, base, h):
    # value of alpha_l at global time s from the local history buffer
    if s < 0.0:
        return 0j
    p = s / h - base
    m = int(math.floor(p))
    th = p - m
    if th < 1e-13:
        return alpha[m, l]
    th2 = th * th
    th3 = th2 * th
    h00 = 2 * th3 - 3 * th2 + 1
    h10 = th3 - 2 * th2 + th
    h01 = -2 * th3 + 3 * th2
    h11 = th3 - th2
    return (
        h00 * alpha[m, l]
        + h10 * h * deriv[m, l]
        + h01 * alpha[m + 1, l]
        + h11 * h * deriv[m + 1, l]
    )


@numba.njit(cache=True)
def _rhs(t, a, b, C, dkv, delay, alpha, deriv, base, h, markov, out):
    n = a.shape[0]
    for j in range(n):
        acc = b[j]
        for l in range(n):
            mod = np.exp(1j * (dkv[j] - dkv[l]) * t)
            if markov or delay[j, l] == 0.0:
                al = a[l]
            else:
                al = _delayed(alpha, deriv, l, t - delay[j, l], base, h)
            acc -= C[j, l] * mod * al
        out[j] = acc


@numba.njit(cache=True)
def _rk4_chunk(C, dkv, delay, alpha, deriv, b_full, b_half, i0, i1, base, h, markov):
    """Advance local rows i0..i1; returns the first bad row or -1."""
    n = alpha.shape[1]
    k1 = np.empty(n, np.complex128)
    k2 = np.empty(n, np.complex128)
    k3 = np.empty(n, np.complex128)
    k4 = np.empty(n, np.complex128)
    tmp = np.empty(n, np.complex128)
    for i in range(i0, i1):
        t = (base + i) * h
        a = alpha[i]
        _rhs(t, a, b_full[i], C, dkv, delay, alpha, deriv, base, h, markov, k1)
        for j in range(n):
            deriv[i, j] = k1[j]
            tmp[j] = a[j] + 0.5 * h * k1[j]
        _rhs(t + 0.5 * h, tmp, b_half[i], C, dkv, delay, alpha, deriv, base, h, markov, k2)
        for j in range(n):
            tmp[j] = a[j] + 0.5 * h * k2[j]
        _rhs(t + 0.5 * h, tmp, b_half[i], C, dkv, delay, alpha, deriv, base, h, markov, k3)
        for j in range(n):
            tmp[j] = a[j] + h * k3[j]
        _rhs(t + h, tmp, b_full[i + 1], C, dkv, delay, alpha, deriv, base, h, markov, k4)
        for j in range(n):
            v = a[j] + h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j])
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                return i + 1
            alpha[i + 1, j] = v
    return -1


def propagation_coefficients(scenario: Scenario) -> np.ndarray:
    """C_jl = V_jl exp(i k_l z_jl), the per-pair coefficients of the equations."""
    arr = scenario.array
    cm = build_couplings(scenario)
    k_l = arr.k_a + arr.dk
    c = cm.total * np.exp(1j * k_l[None, :] * arr.separations)
    np.fill_diagonal(c, (arr.gamma_wg + arr.gamma_nw) / 2.0)
    return c


def default_t_max(scenario: Scenario) -> float:
    """Ten slowest-mode intensity lifetimes after the pulse has arrived, capped."""
    modes = scenario_modes(scenario)
    slowest = min(m.linewidth for m in modes)
    t = T_MAX_CAP if slowest <= 0 else 10.0 / slowest
    if scenario.pulse is not None:
        t += float(np.max(scenario.array.z)) + 8.0 / scenario.pulse.width
    return float(min(t, T_MAX_CAP))


def check_step(scenario: Scenario, h: float) -> None:
    problems = []
    modes = scenario_modes(scenario)
    rho = max(abs(m.eigenvalue) for m in modes)
    if h * rho > 1.0:
        problems.append(f"step h={h} too large for fastest rate {rho:.4g} (need h*rate <= 1)")
    if scenario.pulse is not None and h * scenario.pulse.width > 0.5:
        problems.append(f"step h={h} too coarse for pulse width {scenario.pulse.width}")
    if scenario.retardation_mode == "full" and scenario.array.n > 1:
        r = scenario.array.separations
        min_delay = float(np.min(r[~np.eye(scenario.array.n, dtype=bool)]))
        # delayed reads must land in already-computed history
        if min_delay > 0 and h > min_delay * (1 + 1e-9):
            problems.append(f"step h={h} exceeds the smallest delay {min_delay:.4g}")
    if problems:
        raise ValidationError(problems)


def evolve(
    scenario: Scenario,
    t_max: float | None = None,
    h: float = 1e-3,
    store_every: int = 1,
) -> AmplitudeTrajectory:
    """Integrate the amplitudes from t = 0 to ``t_max`` with fixed-step RK4.

    Rows of the returned trajectory are every ``store_every`` steps.
    """
    if t_max is None:
        t_max = default_t_max(scenario)
    if not (t_max > 0 and math.isfinite(t_max)):
        raise ValidationError(f"t_max must be positive and finite, got {t_max}")
    if not (h > 0 and math.isfinite(h)):
        raise ValidationError(f"h must be positive, got {h}")
    check_step(scenario, h)
    store_every = max(1, int(store_every))

    arr = scenario.array
    n = arr.n
    steps = int(round(t_max / h))
    markov = scenario.retardation_mode == "markovian" or n == 1
    C = propagation_coefficients(scenario)
    dkv = arr.dk
    delay = np.zeros((n, n)) if markov else arr.separations.copy()
    hist = 0 if markov else int(math.ceil(delay.max() / h)) + 3

    n_out = steps // store_every + 1
    out_alpha = np.empty((n_out, n), dtype=complex)
    out_drive = np.empty((n_out, n), dtype=complex) if scenario.pulse is not None else None

    alpha = np.zeros((hist + CHUNK + 1, n), dtype=complex)
    deriv = np.zeros_like(alpha)
    alpha[hist] = scenario.alpha0
    done = 0
    # local row `hist` holds global step `done`; rows before it are history
    while True:
        m = min(CHUNK, steps - done)
        base = done - hist
        g_idx = base + np.arange(hist + m + 1)
        tt = g_idx * h
        b_full = drive_matrix(scenario, tt)
        b_half = drive_matrix(scenario, tt + 0.5 * h)
        bad = _rk4_chunk(C, dkv, delay, alpha, deriv, b_full, b_half, hist, hist + m, base, h, markov)
        if bad >= 0:
            raise NumericalError(
                f"non-finite amplitude at t={(base + bad) * h:.6g}; "
                f"check rates and step size (h={h})"
            )
        rows = np.arange(hist, hist + m + 1)
        keep = rows[(g_idx[rows] % store_every) == 0]
        if done > 0:
            keep = keep[g_idx[keep] > done]
        dst = g_idx[keep] // store_every
        out_alpha[dst] = alpha[keep]
        if out_drive is not None:
            out_drive[dst] = b_full[keep]
        done += m
        if done >= steps:
            break
        # carry the tail of this chunk forward as history
        tail = slice(m, hist + m + 1)
        alpha[: hist + 1] = alpha[tail]
        deriv[: hist + 1] = deriv[tail]
        alpha[hist + 1 :] = 0
        deriv[hist + 1 :] = 0
    t = np.arange(n_out) * (h * store_every)
    return AmplitudeTrajectory(t, out_alpha, out_drive, h * store_every)
