"""Domain types, unit conventions and scenario configuration.

Natural units throughout: the reference waveguide decay rate is 1 and the
group velocity is 1, so a time of 1 is one radiative lifetime 1/Gamma and a
length of 1 is v_g/Gamma. The resonance wavelength ``lambda_a`` is the one free
scale. The waveguide quantization length is fixed to 1; it cancels in every
exported quantity.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import ConfigError, ValidationError

RETARDATION_MODES = ("markovian", "full")

# (8 pi)^(1/4): peak of the unit-width Gaussian single-photon spectrum
GAUSS_PEAK = (8.0 * math.pi) ** 0.25


@dataclass(frozen=True)
class UnitSystem:
    """Scale conventions. Only ``lambda_a`` is adjustable."""

    lambda_a: float = 1e-3
    v_g: float = field(default=1.0, init=False)
    gamma_ref: float = field(default=1.0, init=False)

    @property
    def k_a(self) -> float:
        return 2.0 * math.pi / self.lambda_a

    def problems(self) -> list[str]:
        if not (math.isfinite(self.lambda_a) and self.lambda_a > 0):
            return [f"lambda_a: must be a positive finite number, got {self.lambda_a!r}"]
        return []


@dataclass(frozen=True)
class EmitterParams:
    """One two-level emitter.

    z is the position along the waveguide, gamma_wg and gamma_nw the decay
    rates into guided and non-guided modes, dk the transition wavevector
    offset k_j - k_a (equal to the frequency detuning since v_g = 1).
    """

    z: float
    gamma_wg: float = 1.0
    gamma_nw: float = 0.0
    dk: float = 0.0

    def problems(self, label: str = "emitter") -> list[str]:
        out = []
        for name in ("z", "gamma_wg", "gamma_nw", "dk"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                out.append(f"{label}.{name}: must be a finite number, got {v!r}")
        if not out:
            if self.gamma_wg <= 0:
                out.append(f"{label}.gamma_wg: must be > 0, got {self.gamma_wg}")
            if self.gamma_nw < 0:
                out.append(f"{label}.gamma_nw: must be >= 0, got {self.gamma_nw}")
        return out


@dataclass(frozen=True)
class EmitterArray:
    """Collinear array of emitters sorted by position along the waveguide."""

    emitters: tuple[EmitterParams, ...]
    phi: float = math.pi / 2
    units: UnitSystem = field(default_factory=UnitSystem)

    def __post_init__(self):
        object.__setattr__(self, "emitters", tuple(self.emitters))
        problems = self.problems()
        if problems:
            raise ValidationError(problems)

    def problems(self) -> list[str]:
        out = list(self.units.problems())
        if not self.emitters:
            out.append("emitters: at least one emitter is required")
        for i, e in enumerate(self.emitters):
            out.extend(e.problems(f"emitters[{i}]"))
        if not math.isfinite(self.phi):
            out.append(f"phi: must be finite, got {self.phi!r}")
        zs = [e.z for e in self.emitters]
        if not out and any(b < a for a, b in zip(zs, zs[1:])):
            out.append("emitters: positions must be sorted by z ascending")
        return out

    @classmethod
    def chain(
        cls,
        n: int,
        spacing: float,
        z0: float = 0.0,
        gamma_wg: float = 1.0,
        gamma_nw: float = 0.0,
        dk: Sequence[float] | None = None,
        lambda_a: float = 1e-3,
        phi: float = math.pi / 2,
    ) -> "EmitterArray":
        """Evenly spaced chain; ``spacing`` is given in resonance wavelengths."""
        dk = [0.0] * n if dk is None else list(dk)
        if len(dk) != n:
            raise ValidationError(f"dk: expected {n} offsets, got {len(dk)}")
        ems = [
            EmitterParams(z0 + i * spacing * lambda_a, gamma_wg, gamma_nw, float(dk[i]))
            for i in range(n)
        ]
        return cls(tuple(ems), phi, UnitSystem(lambda_a))

    @classmethod
    def from_wavevectors(
        cls,
        z: Sequence[float],
        k: Sequence[float],
        gamma_wg: Sequence[float] | float = 1.0,
        gamma_nw: Sequence[float] | float = 0.0,
        phi: float = math.pi / 2,
    ) -> "EmitterArray":
        """Build from absolute transition wavevectors.

        The reference k_a is the mean wavevector, so the offsets average to zero
        and lambda_a = 2 pi / k_a.
        """
        k = np.asarray(k, dtype=float)
        n = len(k)
        gw = np.broadcast_to(np.asarray(gamma_wg, dtype=float), (n,))
        gn = np.broadcast_to(np.asarray(gamma_nw, dtype=float), (n,))
        k_a = float(np.mean(k))
        if k_a <= 0:
            raise ValidationError("k: mean transition wavevector must be positive")
        dk = k - k_a
        ems = [EmitterParams(float(z[i]), float(gw[i]), float(gn[i]), float(dk[i])) for i in range(n)]
        return cls(tuple(ems), phi, UnitSystem(2.0 * math.pi / k_a))

    @property
    def n(self) -> int:
        return len(self.emitters)

    @property
    def k_a(self) -> float:
        return self.units.k_a

    @property
    def lambda_a(self) -> float:
        return self.units.lambda_a

    @property
    def z(self) -> np.ndarray:
        return np.array([e.z for e in self.emitters])

    @property
    def gamma_wg(self) -> np.ndarray:
        return np.array([e.gamma_wg for e in self.emitters])

    @property
    def gamma_nw(self) -> np.ndarray:
        return np.array([e.gamma_nw for e in self.emitters])

    @property
    def dk(self) -> np.ndarray:
        return np.array([e.dk for e in self.emitters])

    @property
    def separations(self) -> np.ndarray:
        """Matrix of |z_j - z_l|."""
        z = self.z
        return np.abs(z[:, None] - z[None, :])

    def with_dk(self, dk: Sequence[float]) -> "EmitterArray":
        ems = tuple(replace(e, dk=float(d)) for e, d in zip(self.emitters, dk))
        return replace(self, emitters=ems)

    def with_gamma_nw(self, gamma_nw: float) -> "EmitterArray":
        ems = tuple(replace(e, gamma_nw=float(gamma_nw)) for e in self.emitters)
        return replace(self, emitters=ems)

    def with_spacing(self, spacing: float) -> "EmitterArray":
        """Re-space the chain uniformly (``spacing`` in wavelengths), keeping z_1."""
        z0 = self.emitters[0].z
        ems = tuple(
            replace(e, z=z0 + i * spacing * self.lambda_a) for i, e in enumerate(self.emitters)
        )
        return replace(self, emitters=ems)


def gaussian_spectrum(pulse: "GaussianPulse", dk) -> np.ndarray:
    """Single-photon Gaussian spectrum beta_0(dk).

    (8 pi)^(1/4) / sqrt(width) * exp(-(dk - center)^2 / width^2), normalized so
    that (1/2 pi) * integral |beta_0|^2 = 1.
    """
    dk = np.asarray(dk, dtype=float)
    x = (dk - pulse.center_dk) / pulse.width
    return GAUSS_PEAK / math.sqrt(pulse.width) * np.exp(-x * x)


@dataclass(frozen=True)
class GaussianPulse:
    """Gaussian single-photon pulse.

    ``width`` is the spectral width Delta_0 in inverse length; the intensity
    FWHM in frequency is sqrt(2 ln 2) * width.
    """

    width: float
    center_dk: float = 0.0

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ValidationError(problems)

    def problems(self, label: str = "pulse") -> list[str]:
        out = []
        if not (math.isfinite(self.width) and self.width > 0):
            out.append(f"{label}.width: must be > 0, got {self.width!r}")
        if not math.isfinite(self.center_dk):
            out.append(f"{label}.center_dk: must be finite, got {self.center_dk!r}")
        return out

    @property
    def fwhm(self) -> float:
        return math.sqrt(2.0 * math.log(2.0)) * self.width

    @property
    def center(self) -> float:
        return self.center_dk

    @property
    def support(self) -> tuple[float, float]:
        return self.center_dk - 8.0 * self.width, self.center_dk + 8.0 * self.width

    def spectrum(self, dk) -> np.ndarray:
        return gaussian_spectrum(self, dk)


@dataclass(frozen=True)
class TabulatedSpectrum:
    """Arbitrary input spectrum sampled on an increasing dk grid.

    Linear interpolation of real and imaginary parts; zero outside the table.
    """

    dk: tuple[float, ...]
    values: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "dk", tuple(float(x) for x in self.dk))
        object.__setattr__(self, "values", tuple(complex(v) for v in self.values))
        problems = self.problems()
        if problems:
            raise ValidationError(problems)

    def problems(self, label: str = "spectrum") -> list[str]:
        out = []
        if len(self.dk) < 2 or len(self.dk) != len(self.values):
            out.append(f"{label}: need >= 2 samples with matching dk/value lengths")
        elif any(b <= a for a, b in zip(self.dk, self.dk[1:])):
            out.append(f"{label}.dk: must be strictly increasing")
        return out

    @property
    def center(self) -> float:
        p = np.abs(np.asarray(self.values)) ** 2
        return float(np.sum(p * np.asarray(self.dk)) / np.sum(p))

    @property
    def support(self) -> tuple[float, float]:
        return self.dk[0], self.dk[-1]

    @property
    def width(self) -> float:
        """RMS half-width of |beta_0|^2 times 2, comparable to a Gaussian's Delta_0."""
        p = np.abs(np.asarray(self.values)) ** 2
        x = np.asarray(self.dk)
        c = np.sum(p * x) / np.sum(p)
        return float(2.0 * np.sqrt(np.sum(p * (x - c) ** 2) / np.sum(p)))

    def spectrum(self, dk) -> np.ndarray:
        dk = np.asarray(dk, dtype=float)
        x = np.asarray(self.dk)
        v = np.asarray(self.values)
        re = np.interp(dk, x, v.real, left=0.0, right=0.0)
        im = np.interp(dk, x, v.imag, left=0.0, right=0.0)
        return re + 1j * im

    @classmethod
    def from_pulse(cls, pulse: GaussianPulse, points: int = 4001) -> "TabulatedSpectrum":
        lo, hi = pulse.support
        dk = np.linspace(lo, hi, points)
        return cls(tuple(dk), tuple(pulse.spectrum(dk).astype(complex)))


InputSpectrum = Union[GaussianPulse, TabulatedSpectrum]


@dataclass(frozen=True)
class Scenario:
    """Emitter array plus excitation and model switches.

    ``include_nw_coupling`` turns the free-space dipole-dipole couplings off
    while keeping each gamma_nw as a local loss. In ``markovian`` mode the
    intra-array travel times are dropped from the time-domain equations but
    the propagation phases are kept.
    """

    array: EmitterArray
    pulse: InputSpectrum | None = None
    initial_excitation: tuple[complex, ...] | None = None
    include_nw_coupling: bool = True
    retardation_mode: str = "markovian"
    name: str = ""

    def __post_init__(self):
        if self.initial_excitation is None:
            init = (0j,) * self.array.n
        else:
            init = tuple(complex(a) for a in self.initial_excitation)
        object.__setattr__(self, "initial_excitation", init)
        problems = self.problems()
        if problems:
            raise ValidationError(problems)

    def problems(self) -> list[str]:
        out = []
        init = self.initial_excitation
        if len(init) != self.array.n:
            out.append(
                f"initial_excitation: expected {self.array.n} amplitudes, got {len(init)}"
            )
        elif sum(abs(a) ** 2 for a in init) > 1.0 + 1e-12:
            out.append("initial_excitation: total probability exceeds 1")
        if self.retardation_mode not in RETARDATION_MODES:
            out.append(
                f"retardation_mode: must be one of {RETARDATION_MODES}, got {self.retardation_mode!r}"
            )
        return out

    @property
    def alpha0(self) -> np.ndarray:
        return np.array(self.initial_excitation, dtype=complex)

    @property
    def has_initial_excitation(self) -> bool:
        return any(a != 0 for a in self.initial_excitation)

    def input_spectrum(self, dk) -> np.ndarray:
        """beta_0 on ``dk`` (zeros when there is no input photon)."""
        if self.pulse is None:
            return np.zeros(np.shape(dk), dtype=complex)
        return np.asarray(self.pulse.spectrum(dk), dtype=complex)

    @property
    def reference_dk(self) -> float:
        return 0.0 if self.pulse is None else self.pulse.center

    def replace(self, **changes) -> "Scenario":
        return replace(self, **changes)

    def without_nw(self) -> "Scenario":
        return replace(self, include_nw_coupling=False)


# --- config serialization -------------------------------------------------


def _complex_to_json(a: complex):
    a = complex(a)
    return a.real if a.imag == 0 else [a.real, a.imag]


def scenario_to_dict(s: Scenario) -> dict:
    arr = s.array
    d = {
        "emitters": [
            {"z": e.z, "gamma_wg": e.gamma_wg, "gamma_nw": e.gamma_nw, "dk": e.dk}
            for e in arr.emitters
        ],
        "phi": arr.phi,
        "lambda_a": arr.lambda_a,
        "pulse": None,
        "initial_excitation": [_complex_to_json(a) for a in s.initial_excitation],
        "include_nw_coupling": s.include_nw_coupling,
        "retardation_mode": s.retardation_mode,
    }
    if isinstance(s.pulse, GaussianPulse):
        d["pulse"] = {"width": s.pulse.width, "center_dk": s.pulse.center_dk}
    elif isinstance(s.pulse, TabulatedSpectrum):
        v = np.asarray(s.pulse.values)
        d["pulse"] = {
            "tabulated": {"dk": list(s.pulse.dk), "re": v.real.tolist(), "im": v.imag.tolist()}
        }
    if s.name:
        d["name"] = s.name
    return d


def _num(d: dict, key: str, path: str, problems: list, default=None):
    if key not in d:
        if default is None:
            problems.append(f"{path}.{key}: missing")
            return math.nan
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        problems.append(f"{path}.{key}: expected a number, got {v!r}")
        return math.nan
    return float(v)


def _parse_complex(v, path: str, problems: list) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
    ):
        return complex(v[0], v[1])
    problems.append(f"{path}: expected a number or [re, im], got {v!r}")
    return 0j


def scenario_from_dict(d: dict) -> Scenario:
    """Parse a config mapping, collecting every problem before raising."""
    problems: list[str] = []
    if not isinstance(d, dict):
        raise ConfigError("config: top level must be an object")
    raw = d.get("emitters")
    if not isinstance(raw, list) or not raw:
        raise ConfigError("emitters: a non-empty list is required")
    ems = []
    for i, e in enumerate(raw):
        path = f"emitters[{i}]"
        if not isinstance(e, dict):
            problems.append(f"{path}: expected an object")
            continue
        em = EmitterParams(
            z=_num(e, "z", path, problems),
            gamma_wg=_num(e, "gamma_wg", path, problems, 1.0),
            gamma_nw=_num(e, "gamma_nw", path, problems, 0.0),
            dk=_num(e, "dk", path, problems, 0.0),
        )
        # one message per field: skip range checks on fields that failed to parse
        seen = {m.split(":")[0] for m in problems}
        problems.extend(m for m in em.problems(path) if m.split(":")[0] not in seen)
        ems.append(em)
    phi = _num(d, "phi", "config", problems, math.pi / 2)
    lam = _num(d, "lambda_a", "config", problems, 1e-3)
    units = UnitSystem(lam)
    problems.extend(units.problems())

    pulse = None
    p = d.get("pulse")
    if p is not None:
        if not isinstance(p, dict):
            problems.append("pulse: expected an object or null")
        elif "tabulated" in p:
            t = p["tabulated"]
            try:
                vals = [complex(a, b) for a, b in zip(t["re"], t["im"])]
                pulse = TabulatedSpectrum(tuple(t["dk"]), tuple(vals))
            except (KeyError, TypeError) as exc:
                problems.append(f"pulse.tabulated: malformed ({exc})")
            except ValidationError as exc:
                problems.extend(exc.problems)
        else:
            w = _num(p, "width", "pulse", problems)
            c = _num(p, "center_dk", "pulse", problems, 0.0)
            try:
                pulse = GaussianPulse(w, c)
            except ValidationError as exc:
                problems.extend(exc.problems)

    init = d.get("initial_excitation")
    init_vals = None
    if init is not None:
        if not isinstance(init, list):
            problems.append("initial_excitation: expected a list")
        else:
            init_vals = tuple(
                _parse_complex(v, f"initial_excitation[{i}]", problems) for i, v in enumerate(init)
            )
    inc = d.get("include_nw_coupling", True)
    if not isinstance(inc, bool):
        problems.append(f"include_nw_coupling: expected true/false, got {inc!r}")
    mode = d.get("retardation_mode", "markovian")
    name = d.get("name", "")
    if problems:
        raise ConfigError(problems)
    try:
        arr = EmitterArray(tuple(ems), phi, units)
        return Scenario(arr, pulse, init_vals, bool(inc), mode, str(name))
    except ValidationError as exc:
        raise ConfigError(exc.problems) from None


def load_config(path) -> dict:
    """Read a JSON config, reporting syntax errors with line and column."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def load_scenario(path) -> Scenario:
    return scenario_from_dict(load_config(path))


def save_scenario(s: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(s), indent=2) + "\n", encoding="utf-8")


def scenario_hash(s: Scenario) -> str:
    blob = json.dumps(scenario_to_dict(s), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


# --- dimensional round trip -----------------------------------------------


def to_physical(s: Scenario, gamma_ref: float, v_g: float) -> dict:
    """Express a scenario in dimensional units (rates in 1/s, lengths in m).

    ``gamma_ref`` is the reference waveguide decay rate and ``v_g`` the group
    velocity, both in SI.
    """
    length = v_g / gamma_ref
    arr = s.array
    out = {
        "gamma_ref": gamma_ref,
        "v_g": v_g,
        "lambda_a": arr.lambda_a * length,
        "phi": arr.phi,
        "z": (arr.z * length).tolist(),
        "gamma_wg": (arr.gamma_wg * gamma_ref).tolist(),
        "gamma_nw": (arr.gamma_nw * gamma_ref).tolist(),
        "dk": (arr.dk / length).tolist(),
        "pulse": None,
        "initial_excitation": [_complex_to_json(a) for a in s.initial_excitation],
        "include_nw_coupling": s.include_nw_coupling,
        "retardation_mode": s.retardation_mode,
    }
    if isinstance(s.pulse, GaussianPulse):
        out["pulse"] = {"width": s.pulse.width / length, "center_dk": s.pulse.center_dk / length}
    elif s.pulse is not None:
        raise ValidationError("to_physical: only Gaussian pulses are supported")
    return out


def from_physical(p: dict) -> Scenario:
    """Inverse of :func:`to_physical`."""
    length = p["v_g"] / p["gamma_ref"]
    g = p["gamma_ref"]
    ems = tuple(
        EmitterParams(z / length, gw / g, gn / g, dk * length)
        for z, gw, gn, dk in zip(p["z"], p["gamma_wg"], p["gamma_nw"], p["dk"])
    )
    arr = EmitterArray(ems, p["phi"], UnitSystem(p["lambda_a"] / length))
    pulse = None
    if p.get("pulse"):
        pulse = GaussianPulse(p["pulse"]["width"] * length, p["pulse"]["center_dk"] * length)
    init = tuple(_parse_complex(v, "initial_excitation", []) for v in p["initial_excitation"])
    return Scenario(arr, pulse, init, p["include_nw_coupling"], p["retardation_mode"])
