"""Command-line front end: sectioned key-value configs in, CSV/SVG out.

Subcommands: simulate, r0, orbit, sweep, validate. All take a `--config`
pointing at a flat INI-style document with sections [mu], [beta], [d],
[scalars], [integrator], [run]; times are hours, rates per hour.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 invariant
violation (validate only). Every failure prints a one-line
machine-parsable "<category>: <message>" to stderr.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .analysis import Regime, classify, monitor_invariants, simulate, sweep
from .integrate import IntegrationError, IntegratorConfig
from .model import ModelParameters, SinusoidalCoefficient, State
from .periodic import (
    ConvergedToBoundary,
    NewtonDiverged,
    find_periodic_orbit,
    warm_start_guess,
)
from .reproduction import BracketFailure, r0_periodic
from .svgplot import Panel, Series, write_panels

__all__ = [
    "ParseError",
    "ValidationError",
    "RunConfig",
    "parse_config",
    "serialize_config",
    "load_config",
    "main",
]


class ParseError(Exception):
    """The config document is not syntactically valid."""


class ValidationError(Exception):
    """A config value violates a model invariant; message names the key."""


@dataclass(frozen=True)
class RunConfig:
    """Everything a subcommand needs besides its own flags."""

    params: ModelParameters
    integrator: IntegratorConfig
    initial_conditions: tuple[State, ...]
    horizon: float


_COEFF_SECTIONS = ("mu", "beta", "d")
_SCALAR_KEYS = ("k", "delta", "p", "c", "c1", "c2")


def _get_float(cp: configparser.ConfigParser, section: str, key: str,
               default: float | None = None) -> float:
    if not cp.has_option(section, key):
        if default is not None:
            return default
        raise ValidationError(f"missing required key {section}.{key}")
    raw = cp.get(section, key)
    try:
        return float(raw)
    except ValueError as exc:
        raise ValidationError(f"{section}.{key}: not a number: {raw!r}") from exc


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a config document.

    Raises ParseError for syntax problems (with line numbers, courtesy of
    configparser) and ValidationError naming the offending key for
    invariant breaches. There are no silent model defaults: the model
    sections and run horizon are required.
    """
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ParseError(str(exc)) from exc

    for section in _COEFF_SECTIONS + ("scalars", "run"):
        if not cp.has_section(section):
            raise ValidationError(f"missing required section [{section}]")

    omega = _get_float(cp, "scalars", "angular_frequency")
    if omega <= 0.0:
        raise ValidationError("scalars.angular_frequency: must be positive")

    coeffs = {}
    for section in _COEFF_SECTIONS:
        mean = _get_float(cp, section, "mean")
        amplitude = _get_float(cp, section, "amplitude")
        if mean < 0.0:
            raise ValidationError(f"{section}.mean: must be nonnegative")
        if amplitude < 0.0:
            raise ValidationError(f"{section}.amplitude: must be nonnegative")
        if amplitude >= mean and not (mean == 0.0 and amplitude == 0.0):
            raise ValidationError(
                f"{section}.amplitude: must be strictly below {section}.mean")
        coeffs[section] = SinusoidalCoefficient(mean, amplitude, omega)

    scalars = {}
    for key in _SCALAR_KEYS:
        v = _get_float(cp, "scalars", key)
        if key in ("c1", "c2"):
            if v < 0.0:
                raise ValidationError(f"scalars.{key}: must be nonnegative")
        elif v <= 0.0:
            raise ValidationError(f"scalars.{key}: must be strictly positive")
        scalars[key] = v

    try:
        params = ModelParameters(mu=coeffs["mu"], beta=coeffs["beta"], d=coeffs["d"],
                                 **scalars)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc

    integ_kwargs = {}
    if cp.has_section("integrator"):
        defaults = IntegratorConfig()
        integ_kwargs = {
            "rel_tol": _get_float(cp, "integrator", "rel_tol", defaults.rel_tol),
            "abs_tol": _get_float(cp, "integrator", "abs_tol", defaults.abs_tol),
            "initial_step": _get_float(cp, "integrator", "initial_step", defaults.initial_step),
            "max_step": _get_float(cp, "integrator", "max_step", defaults.max_step),
            "max_steps": int(_get_float(cp, "integrator", "max_steps", defaults.max_steps)),
        }
    try:
        integrator = IntegratorConfig(**integ_kwargs)
    except ValueError as exc:
        raise ValidationError(f"integrator: {exc}") from exc

    horizon = _get_float(cp, "run", "horizon")
    if horizon <= 0.0:
        raise ValidationError("run.horizon: must be positive")

    ics: list[State] = []
    if cp.has_option("run", "initial_conditions"):
        raw = cp.get("run", "initial_conditions").strip()
        if raw:
            for i, chunk in enumerate(raw.split(";")):
                parts = [p.strip() for p in chunk.split(",")]
                if len(parts) != 4:
                    raise ValidationError(
                        f"run.initial_conditions[{i}]: need 4 comma-separated values")
                try:
                    vals = [float(p) for p in parts]
                    ics.append(State(*vals))
                except ValueError as exc:
                    raise ValidationError(
                        f"run.initial_conditions[{i}]: {exc}") from exc

    return RunConfig(params=params, integrator=integrator,
                     initial_conditions=tuple(ics), horizon=horizon)


def serialize_config(cfg: RunConfig) -> str:
    """Config document that parses back to an identical RunConfig."""
    p = cfg.params
    lines = []
    for name, coeff in (("mu", p.mu), ("beta", p.beta), ("d", p.d)):
        lines += [f"[{name}]", f"mean = {coeff.mean!r}", f"amplitude = {coeff.amplitude!r}", ""]
    lines += ["[scalars]", f"angular_frequency = {p.angular_frequency!r}"]
    lines += [f"{key} = {getattr(p, key)!r}" for key in _SCALAR_KEYS]
    ic = cfg.integrator
    lines += ["", "[integrator]",
              f"rel_tol = {ic.rel_tol!r}", f"abs_tol = {ic.abs_tol!r}",
              f"initial_step = {ic.initial_step!r}", f"max_step = {ic.max_step!r}",
              f"max_steps = {ic.max_steps}"]
    lines += ["", "[run]", f"horizon = {cfg.horizon!r}"]
    if cfg.initial_conditions:
        ics = "; ".join(
            f"{s.t_cells!r},{s.e_cells!r},{s.i_cells!r},{s.virus!r}"
            for s in cfg.initial_conditions)
        lines.append(f"initial_conditions = {ics}")
    return "\n".join(lines) + "\n"


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def _fmt_float(v: float) -> str:
    return repr(float(v))


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt_float(v) if isinstance(v, (int, float, np.floating))
                              and not isinstance(v, bool) else str(v)
                              for v in row) + "\n")


def _trajectory_rows(traj):
    for t, y in zip(traj.times, traj.states):
        yield (t, y[0], y[1], y[2], y[3])


def _ic_path(base: str, index: int, total: int) -> str:
    if total == 1:
        return base
    stem, ext = os.path.splitext(base)
    return f"{stem}_ic{index}{ext}"


def _cmd_simulate(cfg: RunConfig, args) -> int:
    if not cfg.initial_conditions:
        raise ValidationError("run.initial_conditions: need at least one for simulate")
    trajectories = []
    for i, ic in enumerate(cfg.initial_conditions):
        traj = simulate(cfg.params, ic, args.t_end, cfg.integrator,
                        grid_step=args.grid_step)
        path = _ic_path(args.out, i, len(cfg.initial_conditions))
        _write_csv(path, ("t", "T", "E", "I", "V"), _trajectory_rows(traj))
        print(f"wrote {path}")
        trajectories.append(traj)
    if args.svg:
        names = ("T cells", "E cells", "I cells", "virus")
        panels = [
            Panel(title=names[comp], x_label="time (hours)", y_label="density",
                  series=tuple(Series(tr.times, tr.states[:, comp], label=f"ic{i}")
                               for i, tr in enumerate(trajectories)))
            for comp in range(4)
        ]
        write_panels(args.svg, panels, n_cols=2)
        print(f"wrote {args.svg}")
    return 0


def _cmd_r0(cfg: RunConfig, args) -> int:
    result = r0_periodic(cfg.params, tol=args.tol, cfg=cfg.integrator)
    print(f"R0 = {result.value!r}")
    print(f"rho(Phi_F-G(P)) = {result.rho_at_one!r}")
    print(f"bracket = [{result.bracket[0]!r}, {result.bracket[1]!r}]")
    print(f"iterations = {result.iterations}")
    print(f"method = {result.method}")
    print(json.dumps({
        "r0": result.value, "rho_at_one": result.rho_at_one,
        "bracket": list(result.bracket), "iterations": result.iterations,
        "method": result.method,
    }))
    return 0


def _cmd_orbit(cfg: RunConfig, args) -> int:
    if not cfg.initial_conditions:
        raise ValidationError("run.initial_conditions: need at least one for orbit")
    guess = warm_start_guess(cfg.params, cfg.initial_conditions[0],
                             args.transient, cfg.integrator)
    orbit = find_periodic_orbit(cfg.params, guess, cfg.integrator,
                                newton_tol=args.newton_tol)
    _write_csv(args.out, ("t", "T", "E", "I", "V"),
               zip(orbit.times, *(orbit.states[:, i] for i in range(4))))
    print(f"wrote {args.out}")
    print(f"newton_residual = {orbit.newton_residual!r}")
    print(f"stable = {orbit.stable} (margin {orbit.stability_margin!r})")
    for m in orbit.floquet_multipliers:
        sign = "+" if m.imag >= 0 else "-"
        print(f"multiplier = {float(m.real)!r} {sign} {abs(float(m.imag))!r}j"
              f"  |.| = {float(abs(m))!r}")
    print(json.dumps({
        "initial_state": [float(v) for v in orbit.initial_state.as_array()],
        "newton_residual": orbit.newton_residual,
        "multipliers": [[float(m.real), float(m.imag)] for m in orbit.floquet_multipliers],
        "stable": orbit.stable,
        "stability_margin": orbit.stability_margin,
    }))
    if args.svg:
        pairs = (("I", 2, "V", 3), ("T", 0, "V", 3), ("E", 1, "V", 3))
        for xn, xi, yn, yi in pairs:
            path = f"{args.svg}_{xn.lower()}{yn.lower()}.svg"
            panel = Panel(title=f"{xn}-{yn} limit cycle",
                          x_label=f"{xn} density", y_label=f"{yn} density",
                          series=(Series(orbit.states[:, xi], orbit.states[:, yi]),))
            write_panels(path, [panel], n_cols=1)
            print(f"wrote {path}")
    return 0


def _cmd_sweep(cfg: RunConfig, args) -> int:
    values = [float(v) for v in args.values.split(",") if v.strip()]
    ics = cfg.initial_conditions or None
    rows = sweep(cfg.params, args.param, values, cfg.horizon, cfg.integrator,
                 initial_conditions=ics)
    _write_csv(args.out, ("value", "r0", "rho_at_one", "regime", "error"),
               ((r.value,
                 "" if r.r0 is None else r.r0,
                 "" if r.rho_at_one is None else r.rho_at_one,
                 r.regime or "", r.error or "") for r in rows))
    print(f"wrote {args.out}")
    return 0


def _cmd_validate(cfg: RunConfig, args) -> int:
    if not cfg.initial_conditions:
        raise ValidationError("run.initial_conditions: need at least one for validate")
    total_violations = 0
    all_bounded = True
    for i, ic in enumerate(cfg.initial_conditions):
        traj = simulate(cfg.params, ic, cfg.horizon, cfg.integrator,
                        grid_step=cfg.params.period / 96.0)
        log = monitor_invariants(traj, cfg.params, abs_tol=cfg.integrator.abs_tol)
        print(f"ic{i}: violations={log.positivity_violations} "
              f"worst_undershoot={log.worst_undershoot!r} "
              f"bound={log.bound_estimate!r} bounded={log.bounded}")
        total_violations += log.positivity_violations
        all_bounded = all_bounded and log.bounded
    if total_violations or not all_bounded:
        print(f"invariant-violation: {total_violations} positivity violations, "
              f"bounded={all_bounded}", file=sys.stderr)
        return 4
    print("all invariants hold")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perivir",
        description="Periodic within-host viral model: simulation, R0, periodic orbits.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="path to the config document")
        sp.set_defaults(fn=fn)
        return sp

    sp = add("simulate", _cmd_simulate, "integrate the model and write time-series CSV/SVG")
    sp.add_argument("--t-end", type=float, required=True, help="end time (hours)")
    sp.add_argument("--out", required=True, help="output CSV path")
    sp.add_argument("--svg", help="optional time-series SVG panel path")
    sp.add_argument("--grid-step", type=float, default=None,
                    help="uniform output grid step (hours); default: accepted steps")

    sp = add("r0", _cmd_r0, "compute the periodic reproduction number")
    sp.add_argument("--tol", type=float, default=1e-8, help="bisection bracket tolerance")

    sp = add("orbit", _cmd_orbit, "locate an endemic periodic orbit by Newton shooting")
    sp.add_argument("--transient", type=float, default=2000.0,
                    help="warm-start transient length (hours)")
    sp.add_argument("--newton-tol", type=float, default=1e-10, help="shooting residual target")
    sp.add_argument("--out", required=True, help="one-period samples CSV path")
    sp.add_argument("--svg", help="optional phase-plane SVG path prefix")

    sp = add("sweep", _cmd_sweep, "classify across one varying parameter")
    sp.add_argument("--param", required=True,
                    help="scalar field (k, delta, p, c, c1, c2) or mu/beta/d.mean|amplitude")
    sp.add_argument("--values", required=True, help="comma-separated values")
    sp.add_argument("--out", required=True, help="output CSV path")

    add("validate", _cmd_validate, "check positivity/boundedness invariants over the horizon")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.fn(cfg, args)
    except (ParseError, ValidationError, ValueError) as exc:
        # DegenerateDecay derives from ValueError: corrupted input, not numerics
        print(f"config-error: {exc}", file=sys.stderr)
        return 2
    except (IntegrationError, NewtonDiverged, ConvergedToBoundary,
            BracketFailure, np.linalg.LinAlgError) as exc:
        print(f"numerical-failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"config-error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
