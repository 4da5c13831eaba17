"""Command-line front end: config parsing, dispatch, CSV/JSON artifacts.

Commands: waiting-time | spectrum | cooling-scan | trajectory | validate.
Configs are INI files (sections of flat key = value pairs, all frequencies in
units of the trap frequency); bundled presets reproduce the reference figure
inputs.  Exit codes: 0 success, 2 config error, 3 compute error, 4 validation
tolerance failure.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field

from .errors import ComputeError, ConfigError
from .params import SystemParams

COMMANDS = ("waiting-time", "spectrum", "cooling-scan", "trajectory", "validate")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTE = 3
EXIT_VALIDATION = 4

_PARAM_FIELDS = [f for f in SystemParams.__dataclass_fields__]


@dataclass
class RunConfig:
    """Parsed configuration for one command."""

    command: str
    params: SystemParams
    options: dict = field(default_factory=dict)
    output_dir: str = "."

    def canonical(self) -> dict:
        return {
            "command": self.command,
            "units": "trap_frequency",
            "system": {k: getattr(self.params, k) for k in _PARAM_FIELDS},
            "options": dict(sorted(self.options.items())),
        }

    def hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass
class RunSummary:
    command: str
    wall_time_s: float
    scalars: dict
    outputs: list
    version: str
    config_hash: str


def bundled_presets() -> dict:
    """Named configurations reproducing the reference figures.

    fig2: waiting-time distribution in the telegraph regime.
    fig3: transition-1 emission spectrum (sidebands and central peak).
    fig4: transition-2 emission spectrum (blue sideband and pedestal).
    fig5-scan: mean phonon number against the sideband-laser detuning.
    """
    base = SystemParams()
    return {
        "fig2": RunConfig(
            command="waiting-time", params=base,
            options={"t_min": 1e-3, "t_max": 5.0 / base.gamma2, "n_points": 400}),
        "fig3": RunConfig(
            command="spectrum", params=base,
            options={"transition": 1, "omega_min": -2.0, "omega_max": 2.0,
                     "n_points": 801}),
        "fig4": RunConfig(
            command="spectrum", params=base,
            options={"transition": 2, "omega_min": -2.0, "omega_max": 2.0,
                     "n_points": 801}),
        "fig5-scan": RunConfig(
            command="cooling-scan", params=base,
            options={"parameter": "delta2", "start": 0.4, "stop": 1.4,
                     "n_points": 51}),
    }


def parse_config(path: str, command: str | None = None) -> RunConfig:
    """Read an INI run configuration.

    Required: a ``[system]`` section with the physical parameters and
    ``units = trap_frequency`` under ``[units]``.  Command options live in a
    section named after the command.
    """
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    if not cp.has_section("system"):
        raise ConfigError("missing [system] section")
    if cp.get("units", "units", fallback=None) != "trap_frequency":
        raise ConfigError("config must declare units = trap_frequency under [units]")
    if command is None:
        command = cp.get("run", "command", fallback=None)
        if command is None:
            raise ConfigError("no command given and no [run] command in config")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {COMMANDS}")

    missing = [k for k in _PARAM_FIELDS if not cp.has_option("system", k)]
    if missing:
        raise ConfigError(f"missing [system] fields: {', '.join(missing)}")
    kwargs = {}
    for k in _PARAM_FIELDS:
        raw = cp.get("system", k)
        try:
            kwargs[k] = int(raw) if k == "n_fock" else float(raw)
        except ValueError as exc:
            raise ConfigError(f"invalid value for {k}: {raw!r}") from exc
    try:
        params = SystemParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    options = {}
    if cp.has_section(command):
        for k, v in cp.items(command):
            try:
                options[k] = int(v) if v.lstrip("+-").isdigit() else float(v)
            except ValueError:
                options[k] = v
    return RunConfig(command=command, params=params, options=options)


def write_config(cfg: RunConfig, path: str) -> None:
    """Serialize a RunConfig to INI (round-trips through parse_config)."""
    cp = configparser.ConfigParser()
    cp["units"] = {"units": "trap_frequency"}
    cp["run"] = {"command": cfg.command}
    cp["system"] = {k: repr(getattr(cfg.params, k)) for k in _PARAM_FIELDS}
    if cfg.options:
        cp[cfg.command] = {k: repr(v) for k, v in cfg.options.items()}
    with open(path, "w") as fh:
        cp.write(fh)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: list, rows, config_hash: str) -> None:
    """CSV with a header row and a config-hash comment, written atomically."""
    lines = [f"# config_hash={config_hash}", ",".join(header)]
    for row in rows:
        lines.append(",".join("%.8e" % v if isinstance(v, float) else str(v)
                              for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _out(cfg: RunConfig, name: str) -> str:
    os.makedirs(cfg.output_dir, exist_ok=True)
    return os.path.join(cfg.output_dir, name)


def _run_waiting_time(cfg: RunConfig):
    import numpy as np

    from .jumps import waiting_time

    o = cfg.options
    grid = np.concatenate(([0.0], np.geomspace(
        float(o.get("t_min", 1e-3)),
        float(o.get("t_max", 5.0 / cfg.params.gamma2)),
        int(o.get("n_points", 400)))))
    res = waiting_time(cfg.params, grid)
    path = _out(cfg, "waiting_time.csv")
    write_csv(path, ["t", "P_exact", "P_perturbative"],
              zip(map(float, res.times), map(float, res.P),
                  map(float, res.P_perturbative)), cfg.hash())
    scalars = {"n_bar": res.n_bar, "tau": res.tau, "T_B": res.T_B, "T_D": res.T_D,
               "T_B_analytic": res.T_B_analytic, "T_D_analytic": res.T_D_analytic,
               "Gamma": res.Gamma, "T0": res.T0}
    return scalars, [path]


def _run_spectrum(cfg: RunConfig):
    import numpy as np

    from .cooling import cooling_rates
    from .spectrum import (central_peak_transition1, perturbative_spectrum,
                           transition2_signals)

    o = cfg.options
    j = int(o.get("transition", 1))
    if j not in (1, 2):
        raise ConfigError("transition must be 1 or 2")
    grid = np.linspace(float(o.get("omega_min", -2.0)),
                       float(o.get("omega_max", 2.0)),
                       int(o.get("n_points", 801)))
    rates = cooling_rates(cfg.params)
    res = perturbative_spectrum(cfg.params, j, rates.n_bar, grid)
    comp = res.components
    zeros = np.zeros_like(grid)
    path = _out(cfg, f"spectrum_t{j}.csv")
    write_csv(
        path,
        ["delta_omega", "total", "elastic_correction", "sb_red", "sb_blue",
         "inel_0", "inel_2"],
        zip(*(map(float, arr) for arr in (
            grid, res.total, comp.get("elastic_correction", zeros),
            comp.get("sideband_red", zeros), comp.get("sideband_blue", zeros),
            comp.get("inelastic_zero", zeros), comp.get("inelastic_second", zeros)))),
        cfg.hash())
    dw = grid[1] - grid[0]
    scalars = {
        "transition": j,
        "n_bar": rates.n_bar,
        "elastic_weight_zero_order": res.metadata["elastic_weight_zero_order"],
        "elastic_weight_second_order": res.metadata["elastic_weight"],
        "gamma_sb": res.metadata["gamma_sb"],
        "component_integrals": {k: float(np.sum(v) * dw) for k, v in comp.items()},
    }
    if j == 1:
        cp = central_peak_transition1(cfg.params, rates.n_bar, grid)
        scalars["central_peak"] = {"hwhm": cp.metadata["hwhm"],
                                   "weight": cp.metadata["weight"],
                                   "weight_small_s": cp.metadata["weight_small_s"]}
    else:
        t2 = transition2_signals(cfg.params, rates.n_bar, grid, W=rates.W_total)
        scalars["closed_form"] = {
            "gamma_sb": t2.metadata["gamma_sb"],
            "weights": {k: (v.real if isinstance(v, complex) else v)
                        for k, v in t2.metadata["weights"].items()},
        }
    return scalars, [path]


def _run_cooling_scan(cfg: RunConfig):
    import numpy as np

    from .cooling import scan_mean_phonon

    o = cfg.options
    name = str(o.get("parameter", "delta2"))
    values = np.linspace(float(o.get("start", 0.4)), float(o.get("stop", 1.4)),
                         int(o.get("n_points", 51)))
    rows = scan_mean_phonon(cfg.params, name, values)
    path = _out(cfg, "cooling_scan.csv")
    write_csv(path, [name, "n1", "n2", "n_bar", "heating"],
              ((r.value, r.n1, r.n2, r.n_bar, int(r.heating)) for r in rows),
              cfg.hash())
    finite = [r.n_bar for r in rows if not r.heating and not math.isnan(r.n_bar)]
    best = min(((r.n_bar, r.value) for r in rows if not r.heating), default=(None, None))
    return {"parameter": name, "n_rows": len(rows),
            "min_n_bar": best[0], "argmin": best[1],
            "n_heating_rows": sum(r.heating for r in rows)}, [path]


def _run_trajectory(cfg: RunConfig):
    from .jumps import simulate_trajectory

    o = cfg.options
    seed = int(o.get("seed", 12345))
    duration = float(o.get("duration", 100.0 / cfg.params.gamma2))
    rec = simulate_trajectory(cfg.params, duration, seed)
    path = _out(cfg, "trajectory.csv")
    write_csv(path, ["time", "transition", "u"],
              ((float(t), j, float(u)) for t, j, u in rec.events), cfg.hash())
    ppath = _out(cfg, "trajectory_periods.csv")
    write_csv(ppath, ["start", "end", "kind"],
              ((float(s), float(e), k) for s, e, k in rec.periods), cfg.hash())
    dark = rec.dark_durations()
    bright = rec.bright_durations()
    return {"seed": seed, "duration": duration, "n_events": len(rec.events),
            "tau": rec.tau, "n_bar": rec.n_bar,
            "n_dark_periods": int(dark.size),
            "mean_dark": float(dark.mean()) if dark.size else None,
            "mean_bright": float(bright.mean()) if bright.size else None}, [path, ppath]


def _run_validate(cfg: RunConfig):
    """Quick physics validation at the configured parameters."""
    import numpy as np

    from .cooling import cooling_rates
    from .jumps import waiting_time
    from .liouville import dipole_w2

    p = cfg.params
    checks = []
    rates = cooling_rates(p)
    checks.append(("W2_moment", abs(dipole_w2() - 0.4) < 1e-12, dipole_w2()))
    checks.append(("mean_phonon_number", abs(rates.n_bar - 0.3) <= 0.05, rates.n_bar))
    grid = np.concatenate(([0.0], np.geomspace(1e-3, 5.0 / p.gamma2, 400)))
    res = waiting_time(p, grid, n_bar=rates.n_bar)
    td_ok = abs(res.T_D * p.gamma2 - 1.0) <= 0.10
    checks.append(("dark_period_vs_1_over_gamma2", td_ok, res.T_D * p.gamma2))
    tb_ok = abs(res.T_B / res.T_B_analytic - 1.0) <= 0.25
    checks.append(("bright_period_vs_analytic", tb_ok, res.T_B / res.T_B_analytic))
    scalars = {"n_bar": rates.n_bar, "T_D": res.T_D, "T_B": res.T_B,
               "tau": res.tau,
               "checks": {name: {"ok": ok, "value": val} for name, ok, val in checks}}
    for name, ok, val in checks:
        print(f"  {'PASS' if ok else 'FAIL'}  {name} = {val:.6g}")
    if not all(ok for _, ok, _ in checks):
        raise _ValidationFailure()
    return scalars, []


class _ValidationFailure(Exception):
    pass


_RUNNERS = {
    "waiting-time": _run_waiting_time,
    "spectrum": _run_spectrum,
    "cooling-scan": _run_cooling_scan,
    "trajectory": _run_trajectory,
    "validate": _run_validate,
}


def run(cfg: RunConfig) -> RunSummary:
    """Dispatch one configured command and write its artifacts."""
    from . import __version__

    t0 = time.perf_counter()
    scalars, outputs = _RUNNERS[cfg.command](cfg)
    summary = RunSummary(
        command=cfg.command,
        wall_time_s=round(time.perf_counter() - t0, 3),
        scalars=scalars,
        outputs=outputs,
        version=__version__,
        config_hash=cfg.hash(),
    )
    spath = _out(cfg, f"{cfg.command.replace('-', '_')}_summary.json")
    _atomic_write(spath, json.dumps(asdict(summary), indent=2, default=str) + "\n")
    summary.outputs.append(spath)
    return summary


def main(argv=None) -> int:
    threads = os.environ.get("MOTIONJUMPS_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)

    ap = argparse.ArgumentParser(
        prog="motionjumps",
        description="Quantum-jump statistics and fluorescence spectra of a "
                    "trapped, laser-cooled three-level atom.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="INI run configuration")
    ap.add_argument("--preset", choices=sorted(bundled_presets().keys()),
                    help="use a bundled figure preset instead of --config")
    ap.add_argument("--output-dir", default=".", help="directory for artifacts")
    ap.add_argument("--transition", type=int, choices=(1, 2),
                    help="override the spectrum transition")
    ap.add_argument("--seed", type=int, help="override the trajectory seed")
    args = ap.parse_args(argv)

    try:
        if args.preset:
            cfg = bundled_presets()[args.preset]
            if args.command != cfg.command and args.command != "validate":
                cfg = RunConfig(command=args.command, params=cfg.params,
                                options=dict(cfg.options))
            elif args.command == "validate":
                cfg = RunConfig(command="validate", params=cfg.params)
        elif args.config:
            cfg = parse_config(args.config, args.command)
        else:
            raise ConfigError("either --config or --preset is required")
        cfg.output_dir = args.output_dir
        if args.transition is not None:
            cfg.options["transition"] = args.transition
        if args.seed is not None:
            cfg.options["seed"] = args.seed
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        summary = run(cfg)
    except _ValidationFailure:
        print("validation failed", file=sys.stderr)
        return EXIT_VALIDATION
    except ComputeError as exc:
        print(f"compute error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE

    print(json.dumps(asdict(summary), indent=2, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
