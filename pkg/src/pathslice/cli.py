"""Command-line driver: ``pathslice <command> --config <path> [--strict] [--out <dir>]``.

The config is an INI file with sections [grid], [potential] and [experiment].
Every run writes ``manifest.json`` (config echo, versions, seed),
``<command>.csv``, ``summary.json`` and a two-column ``<command>.dat`` for
gnuplot.  Nothing time-dependent is written, so identical configs give
byte-identical outputs.

Exit codes: 0 pass, 1 criterion failed, 2 I/O, 3 validation, 4 degenerate
fit, 5 numerical resolution (warnings escalate under --strict).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import platform
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .action import DEFAULT_MAX_ORDER, ActionExpansion, transport_residual
from .errors import ConfigurationError, DerivativeBudgetError, PathSliceError
from .grid import Grid, gaussian_packet, l2_distance, make_grid, random_bandlimited_state
from .oio import apply_short_time_propagator, free_propagate
from .parametrix import parametrix_norm_scan
from .potential import make_potential, verify_assumption_A
from .reference import ReferenceConfig, reference_propagate, self_refinement_ratios
from .slicing import apply_time_sliced, convergence_study, make_subdivision, single_step_study
from .timefreq import PhaseSpaceLattice, frozen_amplitude_norm, modulation_norm, stft

COMMANDS = ("converge", "single-step", "parametrix", "action-table", "norms", "verify")

EXIT_PASS, EXIT_FAIL, EXIT_IO, EXIT_VALIDATION, EXIT_DEGENERATE, EXIT_RESOLUTION = 0, 1, 2, 3, 4, 5

# cap on the frozen-slice M^{inf,1} norm of exp(i R / hbar)
FROZEN_NORM_CAP = 2.0

GRID_KEYS = {"half_width": float, "points": int}
POTENTIAL_KEYS = {
    "kind": str, "a": float, "b": float, "kappa": float, "coefficients": str, "frequencies": str,
    "n": int, "j": int, "budget": int, "envelope": str, "base": str,
}
EXPERIMENT_KEYS = {
    "n": int, "hbar": float, "t_window": float, "s": float, "t": float, "scheme": str, "l_list": str,
    "dt_list": str, "substeps": int, "seed": int, "jitter": float, "center": float, "momentum": float,
    "width": float, "norm": str, "y0": str,
}

CSV_HELP = """CSV columns per command:
  converge      label, mesh, error
  single-step   label, dt, error
  parametrix    label, dt, norm
  action-table  x, y, then W<k>_re, W<k>_im for k = 1..N
  norms         quantity, k, alpha, dt, y0, value
  verify        check, value, threshold, passed
"""


@dataclass
class ExperimentConfig:
    grid: dict = field(default_factory=lambda: {"half_width": 12.0, "points": 1024})
    potential: dict = field(default_factory=lambda: {"kind": "cosine"})
    N: int = 1
    hbar: float = 1.0
    T: float = 1.0
    s: float = 0.0
    t: float = 1.0
    scheme: str = "uniform"
    L_list: list = field(default_factory=lambda: [4, 8, 16, 32])
    dt_list: list = field(default_factory=lambda: [0.25, 0.125, 0.0625, 0.03125])
    substeps: int = 4096
    seed: int = 0
    jitter: float = 0.2
    center: float = 0.0
    momentum: float = 0.0
    width: float = 1.0
    norm: str = "sup"
    y0: list = field(default_factory=lambda: [-2.0, 0.0, 2.0])

    def make_grid(self) -> Grid:
        return make_grid(self.grid["half_width"], self.grid["points"])

    def make_model(self):
        return make_potential(**self.potential)

    def make_packet(self, grid: Grid):
        return gaussian_packet(grid, self.center, self.momentum, self.width, self.hbar)

    def echo(self) -> dict:
        return asdict(self)


def _floats(text: str, key: str) -> list:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"{key}: expected a comma-separated list of numbers, got {text!r}") from exc


def _section(parser, name, allowed) -> dict:
    if not parser.has_section(name):
        return {}
    out = {}
    for key, raw in parser.items(name):
        if key not in allowed:
            raise ConfigurationError(f"[{name}] unknown key {key!r}; allowed: {sorted(allowed)}")
        try:
            out[key] = allowed[key](raw.strip())
        except ValueError as exc:
            raise ConfigurationError(f"[{name}] {key}: cannot parse {raw!r} as {allowed[key].__name__}") from exc
    return out


def _potential_spec(raw: dict) -> dict:
    spec = {"kind": raw.pop("kind", "cosine").lower()}
    for key in ("coefficients", "frequencies"):
        if key in raw:
            spec[key] = _floats(raw.pop(key), key)
    if "envelope" in raw:
        spec["envelope"] = tuple(_floats(raw.pop("envelope"), "envelope"))
    if "n" in raw:
        spec["N"] = raw.pop("n")
    if "j" in raw:
        spec["J"] = raw.pop("j")
    if spec["kind"] == "time_modulated":
        base = {"kind": raw.pop("base", "cosine")}
        for key in ("a", "b", "kappa"):
            if key in raw:
                base[key] = raw.pop(key)
        spec["base"] = base
    spec.update(raw)
    return spec


def parse_config(path) -> ExperimentConfig:
    """Read and validate an INI experiment config; unknown keys are rejected."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file {path} not found")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(path.read_text(), source=str(path))
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from exc
    for name in parser.sections():
        if name not in ("grid", "potential", "experiment"):
            raise ConfigurationError(f"unknown section [{name}]")
    cfg = ExperimentConfig()
    cfg.grid.update(_section(parser, "grid", GRID_KEYS))
    pot = _section(parser, "potential", POTENTIAL_KEYS)
    if pot:
        cfg.potential = _potential_spec(pot)
    exp = _section(parser, "experiment", EXPERIMENT_KEYS)
    renames = {"n": "N", "t_window": "T", "l_list": "L_list"}
    for key, val in exp.items():
        name = renames.get(key, key)
        if name == "L_list":
            val = [int(v) for v in _floats(val, key)]
        elif name in ("dt_list", "y0"):
            val = _floats(val, key)
        setattr(cfg, name, val)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    grid = cfg.make_grid()
    try:
        model = cfg.make_model()
    except KeyError as exc:
        raise ConfigurationError(f"[potential] missing key {exc}") from exc
    except TypeError as exc:
        raise ConfigurationError(f"[potential] {exc}") from exc
    if 2 * cfg.N > model.derivative_budget:
        raise DerivativeBudgetError(
            f"[experiment] N = {cfg.N}: Assumption (A) requires derivatives with 2k+alpha <= {2 * cfg.N} "
            f"but the potential budget is {model.derivative_budget}")
    if not 1 <= cfg.N <= DEFAULT_MAX_ORDER:
        raise ConfigurationError(f"[experiment] N must lie in 1..{DEFAULT_MAX_ORDER}, got {cfg.N}")
    if not 0 < cfg.hbar <= 1:
        raise ConfigurationError(f"[experiment] hbar must lie in (0, 1], got {cfg.hbar}")
    if not cfg.T > 0:
        raise ConfigurationError(f"[experiment] t_window must be positive, got {cfg.T}")
    if not cfg.t > cfg.s:
        raise ConfigurationError(f"[experiment] need t > s, got s={cfg.s}, t={cfg.t}")
    if cfg.scheme not in ("uniform", "random"):
        raise ConfigurationError(f"[experiment] scheme must be uniform or random, got {cfg.scheme!r}")
    if cfg.norm not in ("sup", "modulation"):
        raise ConfigurationError(f"[experiment] norm must be sup or modulation, got {cfg.norm!r}")
    if len(cfg.L_list) < 3 or any(b <= a for a, b in zip(cfg.L_list[:-1], cfg.L_list[1:])) or min(cfg.L_list) < 1:
        raise ConfigurationError(f"[experiment] l_list must be >= 3 increasing positive integers, got {cfg.L_list}")
    if len(cfg.dt_list) < 3 or any(b >= a for a, b in zip(cfg.dt_list[:-1], cfg.dt_list[1:])) or min(cfg.dt_list) <= 0:
        raise ConfigurationError(f"[experiment] dt_list must be >= 3 decreasing positive values, got {cfg.dt_list}")
    if max(cfg.dt_list) > cfg.T * cfg.hbar or (cfg.t - cfg.s) / min(cfg.L_list) > cfg.T * cfg.hbar:
        raise ConfigurationError("[experiment] a step exceeds the window t - s <= T*hbar")
    if not 0 <= cfg.jitter < 0.4:
        raise ConfigurationError(f"[experiment] jitter must lie in [0, 0.4), got {cfg.jitter}")
    if not cfg.width > 0:
        raise ConfigurationError(f"[experiment] width must be positive, got {cfg.width}")
    ReferenceConfig(cfg.substeps, cfg.hbar)
    del grid


# -- commands -----------------------------------------------------------------


def _report_rows(report, xname):
    return ["label", xname, "error"], [[l, m, e] for l, m, e in zip(report.labels, report.meshes, report.errors)]


def cmd_converge(cfg, ctx):
    grid, model = cfg.make_grid(), cfg.make_model()
    f = cfg.make_packet(grid)
    ctx.warn(f.meta.get("support_warning"))
    rep = convergence_study(model, cfg.N, f, cfg.s, cfg.t, cfg.L_list, cfg.hbar,
                            ReferenceConfig(cfg.substeps, cfg.hbar), cfg.T, scheme=cfg.scheme, seed=cfg.seed)
    header, rows = _report_rows(rep, "mesh")
    return header, rows, {**rep.summary(), **_meta(rep)}, (rep.meshes, rep.errors)


def cmd_single_step(cfg, ctx):
    grid, model = cfg.make_grid(), cfg.make_model()
    f = cfg.make_packet(grid)
    ctx.warn(f.meta.get("support_warning"))
    rep = single_step_study(model, cfg.N, f, cfg.s, cfg.dt_list, cfg.hbar,
                            ReferenceConfig(cfg.substeps, cfg.hbar), cfg.T)
    header, rows = _report_rows(rep, "dt")
    return header, rows, {**rep.summary(), **_meta(rep)}, (rep.meshes, rep.errors)


def cmd_parametrix(cfg, ctx):
    rep = parametrix_norm_scan(cfg.make_model(), cfg.N, cfg.s, cfg.dt_list, cfg.hbar, cfg.make_grid(), cfg.norm)
    rows = [[l, m, e] for l, m, e in zip(rep.labels, rep.meshes, rep.errors)]
    return ["label", "dt", "norm"], rows, {**rep.summary(), "norm": cfg.norm}, (rep.meshes, rep.errors)


def cmd_action_table(cfg, ctx):
    grid = cfg.make_grid()
    exp = ActionExpansion(cfg.make_model(), cfg.N, cfg.s, cfg.hbar, grid=grid)
    residuals = {k: transport_residual(exp, k, grid) for k in range(1, cfg.N + 1)}
    x = grid.x
    # a coarse sample of the inner half of the product grid
    idx = np.nonzero(np.abs(x) <= grid.half_width / 2)[0][:: max(1, grid.points // 32)]
    header = ["x", "y"] + [f"W{k}_{part}" for k in range(1, cfg.N + 1) for part in ("re", "im")]
    rows = []
    for i in idx:
        for j in idx:
            row = [x[i], x[j]]
            for k in range(1, cfg.N + 1):
                w = exp.table(grid, k)[i, j]
                row += [w.real, w.imag]
            rows.append(row)
    worst = max(residuals.values())
    summary = {"transport_residual": {str(k): v for k, v in residuals.items()}, "target": 1e-6,
               "passed": bool(worst <= 1e-6)}
    diag = exp.table(grid, cfg.N)[idx, idx]
    return header, rows, summary, (x[idx], diag.real)


def cmd_norms(cfg, ctx):
    grid, model = cfg.make_grid(), cfg.make_model()
    lattice = PhaseSpaceLattice.default(grid)
    report = verify_assumption_A(model, cfg.N, lattice, t=cfg.s)
    rows = [["potential", k, a, "", "", v] for (k, a), v in sorted(report["norms"].items())]
    exp = ActionExpansion(model, cfg.N, cfg.s, cfg.hbar)
    frozen = []
    for dt in cfg.dt_list:
        for y0 in cfg.y0:
            v = frozen_amplitude_norm(exp, cfg.s + dt, y0, lattice)
            frozen.append(v)
            rows.append(["frozen_amplitude", "", "", dt, y0, v])
    f = cfg.make_packet(grid)
    moyal = modulation_norm(stft(f, lattice), 2, 2)
    rows.append(["moyal_packet", "", "", "", "", moyal])
    passed = bool(report["finite"] and max(frozen) <= FROZEN_NORM_CAP and abs(moyal - 1) <= 1e-6)
    summary = {"assumption_A_finite": report["finite"], "max_potential_norm": report["max_norm"],
               "max_frozen_norm": max(frozen), "frozen_cap": FROZEN_NORM_CAP, "moyal": moyal, "passed": passed}
    return ["quantity", "k", "alpha", "dt", "y0", "value"], rows, summary, (list(range(len(frozen))), frozen)


def cmd_verify(cfg, ctx):
    """A light pass over the invariant suite on the configured potential."""
    grid, model = cfg.make_grid(), cfg.make_model()
    f = cfg.make_packet(grid)
    hb = cfg.hbar
    exp = ActionExpansion(model, cfg.N, cfg.s, hb, grid=grid)
    checks = []

    def check(name, value, threshold, ok):
        checks.append([name, float(value), float(threshold), bool(ok)])

    for k in range(1, cfg.N + 1):
        r = transport_residual(exp, k, grid)
        check(f"transport_residual_k{k}", r, 1e-6, r <= 1e-6)
    ref = reference_propagate(model, f, cfg.s, cfg.s + 0.25, ReferenceConfig(cfg.substeps, hb))
    check("reference_unitarity", abs(ref.norm() - f.norm()), 1e-12, abs(ref.norm() - f.norm()) <= 1e-12)
    ratios = self_refinement_ratios(model, f, cfg.s, cfg.s + 0.25, hbar=hb)
    check("reference_refinement_ratio", min(ratios), 3.5, min(ratios) >= 3.5)
    zero = make_potential("zero")
    omega = make_subdivision(cfg.s, cfg.t, min(cfg.L_list), cfg.scheme, cfg.seed, cfg.jitter)
    free = l2_distance(apply_time_sliced(zero, cfg.N, f, omega, hb, cfg.T), free_propagate(f, cfg.t - cfg.s, hb))
    check("free_exactness", free, 1e-8, free <= 1e-8)
    errs = [l2_distance(apply_short_time_propagator(exp, f, exp.s + eps, T=cfg.T), f) for eps in (1e-2, 1e-3, 1e-4)]
    check("identity_limit_1e-3", errs[1], 0.01, errs[1] <= 0.01 and errs[0] > errs[1] > errs[2])
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(8):
        g = random_bandlimited_state(grid, rng)
        for dt in cfg.dt_list:
            worst = max(worst, apply_short_time_propagator(exp, g, exp.s + dt, T=cfg.T).norm())
    check("boundedness_ratio", worst, 2.0, worst <= 2.0)
    summary = {"checks": {c[0]: c[3] for c in checks}, "passed": all(c[3] for c in checks)}
    return ["check", "value", "threshold", "passed"], checks, summary, (list(range(len(checks))), [c[1] for c in checks])


HANDLERS = {
    "converge": cmd_converge, "single-step": cmd_single_step, "parametrix": cmd_parametrix,
    "action-table": cmd_action_table, "norms": cmd_norms, "verify": cmd_verify,
}


def _meta(rep):
    return {k: v for k, v in rep.meta.items() if isinstance(v, (int, float, str))}


# -- output -------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.12e" % v
    if isinstance(v, (complex, np.complexfloating)):
        raise TypeError("split complex values into re/im columns")
    return str(v)


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(_json_safe(data), indent=2, sort_keys=True) + "\n")


class Context:
    def __init__(self):
        self.warnings = []

    def warn(self, msg):
        if msg and msg not in self.warnings:
            self.warnings.append(msg)


def run(config: ExperimentConfig, command: str, out: str | Path = "pathslice-out", strict: bool = False,
        config_path: str | None = None) -> int:
    """Execute ``command`` and write its outputs under ``out``; returns the exit code."""
    if command not in HANDLERS:
        raise ConfigurationError(f"unknown command {command!r}; choose from {COMMANDS}")
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"pathslice: cannot create output directory {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    manifest = {
        "command": command,
        "config": config.echo(),
        "config_path": config_path,
        "seed": config.seed,
        "versions": {"pathslice": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
    }
    ctx = Context()
    try:
        _write_json(out / "manifest.json", manifest)
        try:
            header, rows, summary, series = HANDLERS[command](config, ctx)
        except PathSliceError as exc:
            _write_json(out / "summary.json", {"command": command, "passed": False, "error": exc.category,
                                               "message": str(exc)})
            print(f"pathslice {command}: {exc.category} error: {exc}", file=sys.stderr)
            return exc.exit_code
        summary = {"command": command, **summary, "warnings": ctx.warnings}
        stem = command.replace("-", "_")
        with open(out / f"{stem}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
        with open(out / f"{stem}.dat", "w") as fh:
            fh.write(f"# {command}\n")
            for a, b in zip(*series):
                fh.write(f"{float(a):.12e} {float(b):.12e}\n")
        _write_json(out / "summary.json", summary)
    except OSError as exc:
        print(f"pathslice: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if strict and ctx.warnings:
        print("pathslice: resolution warnings under --strict:\n  " + "\n  ".join(ctx.warnings), file=sys.stderr)
        return EXIT_RESOLUTION
    status = "passed" if summary.get("passed") else "FAILED"
    print(f"pathslice {command}: {status} (outputs in {out})")
    return EXIT_PASS if summary.get("passed") else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pathslice",
        description="Short-time parametrices, time slicing and their convergence checks.",
        epilog=CSV_HELP + "\nExit codes: 0 pass, 1 failed, 2 I/O, 3 validation, 4 degenerate fit, "
                          "5 resolution warning (--strict) or unresolved reference.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="INI file with [grid], [potential], [experiment]")
    p.add_argument("--strict", action="store_true", help="treat resolution warnings as failures (exit 5)")
    p.add_argument("--out", default="pathslice-out", help="output directory (default: pathslice-out)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
    except OSError as exc:
        print(f"pathslice: {exc}", file=sys.stderr)
        return EXIT_IO
    except PathSliceError as exc:
        print(f"pathslice: invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return run(cfg, args.command, args.out, args.strict, config_path=str(args.config))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
