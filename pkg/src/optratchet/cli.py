"""Command-line front end.

Subcommands write CSV (header row, ``#`` metadata comments) to stdout or
``--output``::

    optratchet propagate   --alpha 1 --phi-deg 37         # z,j,intensity
    optratchet observables --compare-methods              # z,mean_j,mean_j2,power,method
    optratchet sweep --param phi-deg --start 0 --stop 360 --num 13
    optratchet figure 3b
    optratchet verify

Settings are layered: built-in defaults, then a figure preset, then a
``key = value`` config file (``--config`` or ``$RATCHET_CONFIG``), then flags.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import verification
from .lattice import InputSpec, build_model, default_half_width
from .observables import observable_series
from .propagators import LEAKAGE_FLAG, METHODS, NumericalError, PropagationMethod

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_NUMERIC = 3

CONFIG_ENV = "RATCHET_CONFIG"
FLOAT_FMT = "{:.12g}"

PROPAGATE_HEADER = ("z", "j", "intensity")
OBSERVABLE_HEADER = ("z", "mean_j", "mean_j2", "power", "method")

SWEEP_PARAMS = {"alpha": "alpha", "phi-deg": "phi_deg", "beta-over-c": "beta_over_c"}

FIGURES = {
    "3a": dict(command="propagate", alpha=0.0, phi_deg=37.0, beta_over_c=0.73),
    "3b": dict(command="propagate", alpha=1.0, phi_deg=37.0, beta_over_c=0.73),
    "4": dict(command="observables", alpha=1.0, phi_deg=37.0, beta_over_c=0.73, periods=2.0),
    "5": dict(command="observables", alpha=1.0, phi_deg=217.0, beta_over_c=0.73, periods=2.0),
}

DEFAULT_PERIODS = 4.0
# z_max for a flat array, in units of 1/C.
FLAT_Z_MAX = 10.0


class UsageError(Exception):
    """Bad flags, config keys or values."""


# key -> converter; keys are the RunConfig field names
_CONVERTERS = {
    "half_width": int,
    "coupling": float,
    "beta_over_c": float,
    "ramp": float,
    "alpha": float,
    "phi_deg": float,
    "z_max": float,
    "z_steps": int,
    "method": str,
    "compare_methods": "bool",
    "normalized": "bool",
    "output": str,
    "window": int,
    "rk4_step": float,
    "spectral_k": int,
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _convert(key, raw):
    conv = _CONVERTERS[key]
    if conv == "bool":
        if isinstance(raw, bool):
            return raw
        text = str(raw).strip().lower()
        if text in _TRUE:
            return True
        if text in _FALSE:
            return False
        raise UsageError(f"{key}: expected a boolean, got {raw!r}")
    try:
        return conv(raw)
    except (TypeError, ValueError):
        raise UsageError(f"{key}: malformed value {raw!r}") from None


def read_config_file(path):
    """Parse ``key = value`` lines; ``#`` starts a comment. Dashes in keys are allowed."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONVERTERS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _convert(key, raw)
    return values


@dataclass(frozen=True)
class RunConfig:
    command: str = "propagate"
    half_width: int = 40
    coupling: float = 1.0
    beta_over_c: float = 0.73
    alpha: float = 1.0
    phi_deg: float = 37.0
    z_max: float = DEFAULT_PERIODS * 2.0 * math.pi / 0.73
    z_steps: int = 801
    method: str = "green"
    compare_methods: bool = False
    normalized: bool = False
    output: Optional[str] = None
    window: int = 12
    rk4_step: Optional[float] = None
    spectral_k: Optional[int] = None
    figure: Optional[str] = None
    sweep_param: Optional[str] = None
    sweep_start: Optional[float] = None
    sweep_stop: Optional[float] = None
    sweep_num: int = 5
    half_width_explicit: bool = False
    z_max_explicit: bool = False

    @property
    def ramp(self):
        return self.beta_over_c * self.coupling

    def model(self):
        return build_model(self.half_width, self.coupling, self.ramp)

    def input_spec(self):
        return InputSpec.from_degrees(self.alpha, self.phi_deg)

    def method_spec(self, tag=None):
        return PropagationMethod(tag or self.method, self.rk4_step, self.spectral_k)

    def z_grid(self):
        return np.linspace(0.0, self.z_max, self.z_steps)


def finalize(cfg, periods=DEFAULT_PERIODS):
    """Validate and fill the defaults that depend on other settings."""
    if cfg.coupling <= 0 or not math.isfinite(cfg.coupling):
        raise UsageError(f"coupling: must be positive, got {cfg.coupling}")
    if cfg.beta_over_c < 0 or not math.isfinite(cfg.beta_over_c):
        raise UsageError(f"beta_over_c: must be >= 0, got {cfg.beta_over_c}")
    if cfg.alpha < 0 or not math.isfinite(cfg.alpha):
        raise UsageError(f"alpha: must be >= 0, got {cfg.alpha}")
    if not math.isfinite(cfg.phi_deg):
        raise UsageError(f"phi_deg: must be finite, got {cfg.phi_deg}")
    if cfg.method not in METHODS:
        raise UsageError(f"method: unknown {cfg.method!r}; choose from {', '.join(METHODS)}")
    if cfg.z_steps < 2:
        raise UsageError(f"z_steps: must be >= 2, got {cfg.z_steps}")
    if cfg.window < 0:
        raise UsageError(f"window: must be >= 0, got {cfg.window}")
    if cfg.rk4_step is not None and not cfg.rk4_step > 0:
        raise UsageError(f"rk4_step: must be positive, got {cfg.rk4_step}")
    if cfg.spectral_k is not None and (cfg.spectral_k < 1 or cfg.spectral_k % 2 == 0):
        raise UsageError(f"spectral_k: must be a positive odd integer, got {cfg.spectral_k}")
    phi = math.fmod(cfg.phi_deg, 360.0)
    if phi < 0:
        phi += 360.0
    ramp = cfg.beta_over_c * cfg.coupling
    z_max = cfg.z_max
    if not cfg.z_max_explicit:
        z_max = periods * 2.0 * math.pi / ramp if ramp > 0 else FLAT_Z_MAX / cfg.coupling
    if not (z_max > 0 and math.isfinite(z_max)):
        raise UsageError(f"z_max: must be positive, got {z_max}")
    half_width = cfg.half_width
    if not cfg.half_width_explicit:
        half_width = default_half_width(cfg.coupling, ramp, z_max)
    if half_width < 1:
        raise UsageError(f"half_width: must be >= 1, got {half_width}")
    return dataclasses.replace(cfg, phi_deg=phi, z_max=float(z_max), half_width=int(half_width))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common_flags():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model and run settings")
    g.add_argument("--half-width", type=str, help="array half-width M (sites -M..M)")
    g.add_argument("--coupling", type=str, help="coupling C (default 1)")
    g.add_argument("--beta-over-c", type=str, help="ramp in units of C (default 0.73)")
    g.add_argument("--ramp", type=str, help="absolute ramp beta; excludes --beta-over-c")
    g.add_argument("--alpha", type=str, help="second-site amplitude (default 1)")
    g.add_argument("--phi-deg", type=str, help="relative phase in degrees (default 37)")
    g.add_argument("--z-max", type=str, help="last z (default four Bloch periods)")
    g.add_argument("--z-steps", type=str, help="number of z samples (default 801)")
    g.add_argument("--method", choices=METHODS, help="propagator (default green)")
    g.add_argument("--compare-methods", action="store_true", default=None,
                   help="observables: one row group per propagator")
    g.add_argument("--normalized", action="store_true", default=None,
                   help="divide moments by the total power")
    g.add_argument("--window", type=str, help="propagate: emit sites -W..W (default 12)")
    g.add_argument("--rk4-step", type=str, help="RK4 step size (default 0.001/max(C, beta M))")
    g.add_argument("--spectral-k", type=str, help="spectral grid size (odd; default 2M+1)")
    g.add_argument("--output", "-o", help="write CSV/report here instead of stdout")
    g.add_argument("--config", help=f"key = value settings file (default ${CONFIG_ENV})")
    return p


def build_parser():
    parser = _Parser(prog="optratchet", description="Optical quantum-ratchet waveguide-array simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common_flags()
    sub.add_parser("propagate", parents=[common], help="intensity I_j(z) table")
    sub.add_parser("observables", parents=[common], help="moments <j>, <j^2> and power vs z")
    sweep = sub.add_parser("sweep", parents=[common], help="observables over a parameter range")
    sweep.add_argument("--param", required=True, choices=sorted(SWEEP_PARAMS))
    sweep.add_argument("--start", type=float, required=True)
    sweep.add_argument("--stop", type=float, required=True)
    sweep.add_argument("--num", type=int, default=5)
    fig = sub.add_parser("figure", parents=[common], help="preset runs for the published figures")
    fig.add_argument("name", choices=sorted(FIGURES))
    sub.add_parser("verify", parents=[common], help="run the cross-oracle verification suite")
    return parser


def parse_config(argv, config_path=None):
    """Build a validated :class:`RunConfig` from ``argv`` and an optional config file."""
    args = build_parser().parse_args(argv)
    layers = {}
    periods = DEFAULT_PERIODS
    command = args.command
    if command == "figure":
        preset = dict(FIGURES[args.name])
        command = preset.pop("command")
        periods = preset.pop("periods", DEFAULT_PERIODS)
        layers.update(preset)

    path = args.config or config_path or os.environ.get(CONFIG_ENV)
    from_file = read_config_file(path) if path else {}
    from_flags = {}
    for key in _CONVERTERS:
        raw = getattr(args, key, None)
        if raw is not None:
            from_flags[key] = _convert(key, raw)

    for source in (from_file, from_flags):
        if "ramp" in source and "beta_over_c" in source:
            raise UsageError("ramp: conflicts with beta_over_c; give only one")
    layers.update(from_file)
    layers.update(from_flags)
    if "ramp" in from_flags and "beta_over_c" in from_file:
        layers.pop("beta_over_c")
    if "beta_over_c" in from_flags and "ramp" in from_file:
        layers.pop("ramp")
    ramp = layers.pop("ramp", None)
    coupling = layers.get("coupling", 1.0)
    if ramp is not None:
        if coupling <= 0:
            raise UsageError(f"coupling: must be positive, got {coupling}")
        layers["beta_over_c"] = ramp / coupling

    cfg = RunConfig(
        command=command,
        figure=getattr(args, "name", None),
        half_width_explicit="half_width" in layers,
        z_max_explicit="z_max" in layers,
        **layers,
    )
    if command == "sweep":
        if args.num < 1:
            raise UsageError(f"num: must be >= 1, got {args.num}")
        cfg = dataclasses.replace(cfg, sweep_param=args.param, sweep_start=args.start,
                                  sweep_stop=args.stop, sweep_num=args.num)
    return finalize(cfg, periods)


# --------------------------------------------------------------------------
# Runs
# --------------------------------------------------------------------------

def _fmt(v):
    return FLOAT_FMT.format(float(v))


def _metadata(cfg):
    lines = [f"optratchet {cfg.command}" + (f" (figure {cfg.figure})" if cfg.figure else "")]
    skip = {"half_width_explicit", "z_max_explicit", "output"}
    for f in dataclasses.fields(cfg):
        if f.name in skip or f.name == "command":
            continue
        value = getattr(cfg, f.name)
        if f.name.startswith("sweep_") and cfg.command != "sweep":
            continue
        lines.append(f"{f.name}={_fmt(value) if isinstance(value, float) else value}")
    return lines


def _truncation_warnings(cfg, leakage=None):
    warnings = []
    if not cfg.model().adequate_for(cfg.z_max):
        warnings.append(f"WARNING: half_width={cfg.half_width} is below the truncation rule")
    if leakage is not None and leakage > LEAKAGE_FLAG:
        warnings.append(f"WARNING: edge leakage {leakage:.3e} exceeds {LEAKAGE_FLAG:g}")
    return warnings


def _render(comments, header, rows):
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def run_propagation(cfg):
    """CSV of ``z,j,intensity`` over the z grid and the site window, z-major."""
    model = cfg.model()
    series = observable_series(model, cfg.input_spec(), cfg.z_grid(), cfg.method_spec())
    w = min(cfg.window, model.half_width)
    cols = np.arange(-w, w + 1)
    offs = cols + model.half_width
    rows = []
    for z, ints in zip(series.z_grid, series.intensity):
        zs = _fmt(z)
        rows.extend((zs, int(j), _fmt(v)) for j, v in zip(cols, ints[offs]))
    comments = _metadata(cfg) + _truncation_warnings(cfg, series.max_leakage)
    return _render(comments, PROPAGATE_HEADER, rows)


def _scan_rows(cfg, prefix=()):
    model = cfg.model()
    tags = METHODS if cfg.compare_methods else (cfg.method,)
    rows = []
    leak = 0.0
    for tag in tags:
        s = observable_series(model, cfg.input_spec(), cfg.z_grid(), cfg.method_spec(tag),
                              normalized=cfg.normalized)
        leak = max(leak, s.max_leakage)
        for z, m1, m2, p in zip(s.z_grid, s.mean_site, s.mean_site_sq, s.power):
            rows.append((*prefix, _fmt(z), _fmt(m1), _fmt(m2), _fmt(p), tag))
    return rows, leak


def run_observable_scan(cfg):
    """CSV of ``z,mean_j,mean_j2,power,method``; one row group per method when comparing."""
    rows, leak = _scan_rows(cfg)
    return _render(_metadata(cfg) + _truncation_warnings(cfg, leak), OBSERVABLE_HEADER, rows)


def run_sweep(cfg):
    """Observable scans for evenly spaced values of one parameter, with a leading value column."""
    field_name = SWEEP_PARAMS[cfg.sweep_param]
    values = np.linspace(cfg.sweep_start, cfg.sweep_stop, cfg.sweep_num)
    rows = []
    warnings = []
    for v in values:
        point = dataclasses.replace(cfg, **{field_name: float(v)})
        # z_max and half_width follow each swept value unless pinned
        point = finalize(point)
        r, leak = _scan_rows(point, prefix=(_fmt(v),))
        rows.extend(r)
        for w in _truncation_warnings(point, leak):
            warnings.append(f"{w} at {field_name}={_fmt(v)}")
    return _render(_metadata(cfg) + warnings, (field_name,) + OBSERVABLE_HEADER, rows)


def run_verification(cfg):
    """Run the verification suite; returns ``(report_text, all_passed)``."""
    checks = verification.run_all(
        coupling=cfg.coupling,
        beta_over_c=cfg.beta_over_c if cfg.beta_over_c > 0 else 0.73,
        half_width=cfg.half_width if cfg.half_width_explicit else None,
        rk4_step=cfg.rk4_step,
        spectral_k=cfg.spectral_k,
    )
    failed = [c for c in checks if not c.passed]
    lines = [c.line() for c in checks]
    lines.append(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n", not failed


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
        if cfg.command == "verify":
            report, ok = run_verification(cfg)
            _emit(report, cfg.output)
            return EXIT_OK if ok else EXIT_VERIFY
        run = {"propagate": run_propagation, "observables": run_observable_scan,
               "sweep": run_sweep}[cfg.command]
        _emit(run(cfg), cfg.output)
    except (UsageError, ValueError) as exc:
        print(f"optratchet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"optratchet: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"optratchet: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
