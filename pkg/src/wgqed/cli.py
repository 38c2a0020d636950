"""Command-line front end.

    wgqed simulate --config fig2cd.json --out runs/
    wgqed spectrum --config fig6a --peaks
    wgqed sweep --config fig4 --param r12 --range 0.005:2:40 --log
    wgqed verify
    wgqed figures fig6a fig7

Exit status: 0 ok, 1 invalid input (or a failed verification),
2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    canonical_grid,
    conservation_audit,
    detuned_pair,
    find_peaks,
    spectrum_difference,
)
from .coupling import scenario_modes
from .dynamics import evolve
from .errors import MissingDriveError, NumericalError, ValidationError, WgqedError
from .figures import FIGURES, build_figure, config_path
from .model import GaussianPulse, Scenario, load_scenario, scenario_hash
from .spectra import (
    SpectrumGrid,
    decay_spectra,
    default_grid,
    scattering_spectra,
    waveguide_branching,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3
SWEEP_PARAMS = ("r12", "dw12", "gamma_nw", "delta0")


@dataclass
class RunManifest:
    scenario_hash: str
    command: str
    argv: list
    parameters: dict
    version: str = __version__
    wall_time_s: float = 0.0
    files: list = field(default_factory=list)

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return path


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for numerical failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _common(suppress: bool) -> argparse.ArgumentParser:
    d = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=d, help="scenario JSON, or the name of a bundled figure config")
    p.add_argument("--out", default=d, help="output directory (default: out)")
    p.add_argument("--threads", type=int, default=d, help="worker threads for grids and sweeps")
    p.add_argument("--grid-span", type=float, default=d, help="half-width of a uniform dk grid")
    p.add_argument("--grid-points", type=int, default=d, help="points in a uniform dk grid")
    p.add_argument("--no-nw", action="store_true", default=d, help="drop free-space couplings")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--markovian", dest="retardation", action="store_const", const="markovian", default=d)
    mode.add_argument("--retarded", dest="retardation", action="store_const", const="full", default=d)
    p.add_argument("--peaks", action="store_true", default=d, help="also write a peak catalogue")
    p.add_argument("--no-plot", action="store_true", default=d, help="skip PNG output")
    return p


DEFAULTS = {
    "config": None,
    "out": "out",
    "threads": 1,
    "grid_span": None,
    "grid_points": None,
    "no_nw": False,
    "retardation": None,
    "peaks": False,
    "no_plot": False,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wgqed", description=__doc__.split("\n\n")[0], parents=[_common(False)])
    parser.add_argument("--version", action="version", version=f"wgqed {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common(True)

    p = sub.add_parser("simulate", parents=[common], help="integrate the emitter amplitudes")
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--step", type=float, default=None, help="RK4 step (default 1e-3)")
    p.add_argument("--store-every", type=int, default=None, help="keep every n-th step")

    p = sub.add_parser("spectrum", parents=[common], help="reflection/transmission or emission spectra")
    p.add_argument("--channel", default=None, help="peak channel (reflection, transmission, left, right)")

    p = sub.add_parser("sweep", parents=[common], help="metrics over a parameter range")
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--range", dest="range_", required=True, metavar="START:STOP:NUM")
    p.add_argument("--log", action="store_true", help="geometric spacing")

    p = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    p.add_argument("--perturb", type=float, default=0.0, help="scale error on off-diagonal couplings (negative control)")
    p.add_argument("--only", type=int, nargs="*", default=None)

    p = sub.add_parser("figures", parents=[common], help="write data and plots for the figure set")
    p.add_argument("names", nargs="*", default=[], help=f"subset of: {' '.join(FIGURES)}")
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    args = build_parser().parse_args(argv)
    for k, v in DEFAULTS.items():
        if getattr(args, k, None) is None:
            setattr(args, k, v)
    if args.threads < 1:
        raise ValidationError("--threads must be >= 1")
    return args


# --- helpers --------------------------------------------------------------------


def _scenario(args) -> Scenario:
    if not args.config:
        raise ValidationError("--config is required for this command")
    path = Path(args.config)
    if not path.exists() and args.config in FIGURES:
        path = config_path(args.config)
    s = load_scenario(path)
    if args.no_nw:
        s = s.without_nw()
    if args.retardation:
        s = s.replace(retardation_mode=args.retardation)
    return s


def _stem(args, s: Scenario) -> str:
    if s.name:
        return s.name
    return Path(args.config).stem


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _user_grid(args, s: Scenario):
    if args.grid_span is None and args.grid_points is None:
        return None
    span = 20.0 if args.grid_span is None else args.grid_span
    pts = 16001 if args.grid_points is None else args.grid_points
    if not (span > 0 and math.isfinite(span)) or pts < 3:
        raise ValidationError("grid: --grid-span must be > 0 and --grid-points >= 3")
    c = s.reference_dk
    return np.linspace(c - span, c + span, pts)


def _spectrum(s: Scenario, grid, threads: int) -> SpectrumGrid:
    fn = decay_spectra if s.pulse is None else scattering_spectra
    if threads <= 1 or len(grid) < 2 * threads:
        return fn(s, grid)
    # independent per-point solves: chunking does not change any value
    parts = np.array_split(grid, threads)
    with ThreadPoolExecutor(max_workers=threads) as ex:
        res = list(ex.map(lambda g: fn(s, g), parts))
    chans = {k: np.concatenate([r.channels[k] for r in res]) for k in res[0].channels}
    return SpectrumGrid(np.asarray(grid), res[0].kind, chans, res[0].meta)


def _default_step(s: Scenario) -> float:
    h = 1e-3
    if s.retardation_mode == "full" and s.array.n > 1:
        r = s.array.separations[~np.eye(s.array.n, dtype=bool)]
        h = min(h, float(r.min()))
    return h


def _say(msg: str) -> None:
    print(msg, flush=True)


# --- commands -------------------------------------------------------------------


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    s = _scenario(args)
    out = _out(args)
    h = args.step if args.step is not None else _default_step(s)
    traj_t = args.t_max
    every = args.store_every
    if every is None:
        from .dynamics import default_t_max

        tm = traj_t if traj_t is not None else default_t_max(s)
        every = max(1, int(round(tm / h)) // 20000)
    traj = evolve(s, t_max=traj_t, h=h, store_every=every)
    stem = _stem(args, s)
    files = []
    p = out / f"{stem}_trajectory.csv"
    traj.write_csv(p)
    files.append(p)
    if not args.no_plot:
        from .plotting import plot_trajectory

        files.append(plot_trajectory(traj, out / f"{stem}_trajectory.png", stem))
    audit = conservation_audit(traj)
    modes = scenario_modes(s)
    slowest = min(m.decay_rate for m in modes)
    m = RunManifest(
        scenario_hash(s),
        "simulate",
        list(getattr(args, "argv", [])),
        {"t_max": float(traj.t[-1]), "h": h, "store_every": every, "retardation_mode": s.retardation_mode},
    )
    m.files = [str(f) for f in files]
    m.wall_time_s = time.perf_counter() - t0
    files.append(m.write(out / f"{stem}_simulate_manifest.json"))
    _say(f"final survival probability: {audit['survivors']:.6g}")
    _say(f"slowest mode decay rate: {slowest:.6g}")
    _say(f"wrote {p}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    t0 = time.perf_counter()
    s = _scenario(args)
    out = _out(args)
    grid = _user_grid(args, s)
    if grid is None:
        grid = default_grid(s, kind="decay" if s.pulse is None else "scattering")
    spec = _spectrum(s, grid, args.threads)
    stem = _stem(args, s)
    files = []
    p = out / f"{stem}_spectrum.csv"
    spec.write_csv(p)
    files.append(p)
    channel = args.channel or ("reflection" if s.pulse is not None else "left")
    if args.peaks:
        cat = find_peaks(spec, channel)
        pp = out / f"{stem}_peaks.json"
        pp.write_text(json.dumps({"channel": channel, **cat.to_dict()}, indent=2, sort_keys=True) + "\n")
        files.append(pp)
        for pk in cat.peaks:
            _say(f"peak at {pk.position:+.4f}  height {pk.height:.4g}  fwhm {pk.fwhm:.4g}")
    if not args.no_plot:
        from .plotting import plot_spectrum

        files.append(plot_spectrum(spec, out / f"{stem}_spectrum.png", stem))
    audit = conservation_audit(
        decay_grid=spec if spec.kind == "decay" else None,
        scattering_grid=spec if spec.kind == "scattering" else None,
    )
    for flag in audit["flags"]:
        _say(f"audit: {flag}")
    m = RunManifest(
        scenario_hash(s),
        "spectrum",
        list(getattr(args, "argv", [])),
        {**spec.manifest(), "audit": audit, "threads": args.threads},
    )
    m.files = [str(f) for f in files]
    m.wall_time_s = time.perf_counter() - t0
    files.append(m.write(out / f"{stem}_spectrum_manifest.json"))
    _say(f"wrote {p}")
    return EXIT_OK


def parse_range(text: str, log: bool) -> np.ndarray:
    parts = text.replace(",", ":").split(":")
    if len(parts) not in (2, 3):
        raise ValidationError(f"--range: expected START:STOP[:NUM], got {text!r}")
    try:
        a, b = float(parts[0]), float(parts[1])
        n = int(parts[2]) if len(parts) == 3 else 21
    except ValueError:
        raise ValidationError(f"--range: could not parse {text!r}") from None
    if not (math.isfinite(a) and math.isfinite(b)) or n < 1:
        raise ValidationError(f"--range: bounds must be finite and NUM >= 1, got {text!r}")
    if log:
        if a <= 0 or b <= 0:
            raise ValidationError("--range with --log needs positive bounds")
        return np.geomspace(a, b, n)
    return np.linspace(a, b, n)


def sweep_point(base: Scenario, param: str, value: float) -> Scenario:
    arr = base.array
    if param == "r12":
        return base.replace(array=arr.with_spacing(value))
    if param == "dw12":
        return detuned_pair(base, value)
    if param == "gamma_nw":
        return base.replace(array=arr.with_gamma_nw(value))
    if param == "delta0":
        if base.pulse is None:
            raise MissingDriveError("delta0 sweep needs a scenario with an input pulse")
        return base.replace(pulse=GaussianPulse(value, getattr(base.pulse, "center_dk", 0.0)))
    raise ValidationError(f"unknown sweep parameter {param!r}; choose from {SWEEP_PARAMS}")


def sweep_row(base: Scenario, param: str, value: float, grid, channel: str) -> list:
    s = sweep_point(base, param, value)
    if s.pulse is None:
        # branching needs the wide decay grid; the comparison grid truncates tails
        return [value, waveguide_branching(decay_spectra(s, grid))]
    g = grid if grid is not None else canonical_grid(s.reference_dk)
    spec = scattering_spectra(s, g)
    other = scattering_spectra(s.replace(include_nw_coupling=not s.include_nw_coupling), g)
    dsd = spectrum_difference(spec, other).value
    cat = find_peaks(spec, channel)
    return [value, dsd, cat.separation, cat.linewidth_difference, len(cat.peaks)]


def cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    base = _scenario(args)
    values = parse_range(args.range_, args.log)
    sweep_point(base, args.param, float(values[0]))  # fail fast on bad input
    out = _out(args)
    grid = _user_grid(args, base)
    channel = "reflection"
    if base.pulse is None:
        header = [args.param, "guided_fraction"]
    else:
        header = [args.param, "delta_sd", "separation", "linewidth_difference", "n_peaks"]

    def run(v):
        return sweep_row(base, args.param, float(v), grid, channel)

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as ex:
            rows = list(ex.map(run, values))
    else:
        rows = [run(v) for v in values]

    stem = _stem(args, base)
    p = out / f"{stem}_sweep_{args.param}.csv"
    # single writer, rows in input order
    with open(p, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(v) for v in r) + "\n")
    files = [p]
    if not args.no_plot:
        from .plotting import plot_sweep

        cols = {h: [r[i] for r in rows] for i, h in enumerate(header) if i > 0 and h != "n_peaks"}
        files.append(plot_sweep(values, cols, out / f"{stem}_sweep_{args.param}.png", args.param, args.log, stem))
    m = RunManifest(
        scenario_hash(base),
        "sweep",
        list(getattr(args, "argv", [])),
        {
            "param": args.param,
            "values": [float(v) for v in values],
            "grid": ("decay default" if base.pulse is None else "canonical") if grid is None else {"points": len(grid), "min": float(grid[0]), "max": float(grid[-1])},
            "threads": args.threads,
        },
    )
    m.files = [str(f) for f in files]
    m.wall_time_s = time.perf_counter() - t0
    m.write(out / f"{stem}_sweep_{args.param}_manifest.json")
    _say(f"wrote {p} ({len(rows)} rows)")
    return EXIT_OK


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    return "nan" if math.isnan(v) else f"{v:.16e}"


def cmd_verify(args) -> int:
    from .verify import report, run_check, CHECKS

    out = _out(args)
    ids = args.only or sorted(CHECKS)
    checks = []
    for i in ids:
        if i not in CHECKS:
            raise ValidationError(f"--only: no check {i}; valid ids are 1-{len(CHECKS)}")
        c = run_check(i, args.perturb, args.threads)
        checks.append(c)
        _say(c.line())
    rep = report(checks)
    rep["perturb"] = args.perturb
    rep["version"] = __version__
    p = out / "verify_report.json"
    p.write_text(json.dumps(rep, indent=2, sort_keys=True) + "\n")
    n_ok = sum(c.passed for c in checks)
    _say(f"{n_ok}/{len(checks)} checks passed; report in {p}")
    return EXIT_OK if rep["passed"] else EXIT_VALIDATION


def cmd_figures(args) -> int:
    out = _out(args)
    names = args.names or list(FIGURES)
    unknown = [n for n in names if n not in FIGURES]
    if unknown:
        raise ValidationError(f"unknown figure(s) {unknown}; choose from {list(FIGURES)}")
    for name in names:
        t0 = time.perf_counter()
        files = build_figure(name, out / name, args.threads, plot=not args.no_plot)
        _say(f"{name}: {len(files)} files in {time.perf_counter() - t0:.1f} s")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "figures": cmd_figures,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        args.argv = argv
        return COMMANDS[args.command](args)
    except (ValidationError, MissingDriveError) as exc:
        problems = getattr(exc, "problems", None) or [str(exc)]
        for msg in problems:
            print(f"error: {msg}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except WgqedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
