"""Command-line entry point.

Simulator settings are in units of omega_m = 1 (times in 1/omega_m); the
[squid] section is in SI units. Exit codes: 0 success, 1 numerical
failure, 2 configuration or usage error.
"""

import argparse
import configparser
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import analytic_t1
from .bath import QuadratureError
from .experiments import (CALIBRATIONS, SweepFailure, decoherence_experiment, eta_sweep,
                          storage_decay_experiment, transfer_experiment)
from .model import RAMP_SHAPES, SimulationConfig, WindowSpec
from .output import OutputExistsError, check_writable, config_hash, write_csv
from .redfield import PhysicalityError, trajectory_header, trajectory_rows
from .squid import MU_B, ConvergenceError, SquidBecParams, coupling_gain, feasibility_report

log = logging.getLogger("qramsim")

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG = 0, 1, 2
NUMERICAL_ERRORS = (PhysicalityError, QuadratureError, ConvergenceError,
                    FloatingPointError, np.linalg.LinAlgError)

DEFAULTS = {
    "model": {"omega_m": "1.0", "rabi": "0.01"},
    "bath": {"omega_c": "100.0", "beta": "100.0"},
    "window": {"w_off": "0.5", "lead": "0.65", "ramp_fraction": "0.05",
               "shape": "half-cosine"},
    "redfield": {"dt": "1.0", "n_sub": "4"},
    "experiments": {
        "eta": "5e-4",
        "eta_list": "1e-4, 2e-4, 5e-4, 1e-3",
        "sweep_kind": "transfer",
        "sweep_eta_list": "1e-4, 2e-4, 3e-4, 5e-4, 1e-3",
        "state": "superposition",
        "alpha": "",
        "beta_amp": "",
        "calibration": "in-situ",
        "storage_eta": "5e-4",
        "storage_rabi": "0.2",
        "storage_w_off": "2.0",
        "storage_horizon": "2.5",
    },
    "squid": {
        "loop_radius": "1e-6",
        "current": "1e-3",
        "separation": "50e-6",
        "atom_number": "1e6",
        "cloud_widths": "1e-6, 1e-6, 1e-6",
        "dipole_matrix_element": repr(MU_B),
        "hyperfine_splitting": str(2 * np.pi * 6.8e9),
        "squid_t1": "1e-6",
        "target_ratio": "6.0",
        "compare_separation": "10e-6",
    },
}

STATES = {
    "direct": (0.0, 1.0),
    "superposition": (2 ** -0.5, 1j * 2 ** -0.5),
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunManifest:
    subcommand: str
    config_path: str
    out_dir: str
    workers: int
    config_hash: str

    def comments(self):
        return [f"qramsim {__version__} {self.subcommand}",
                f"config_hash {self.config_hash}",
                f"config {self.config_path or '(defaults)'}"]


def load_settings(path=None):
    """Defaults overlaid with an INI file; unknown sections or keys are errors."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.read_dict(DEFAULTS)
    if path is not None:
        user = configparser.ConfigParser(interpolation=None)
        try:
            with open(path) as fh:
                user.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for section in user.sections():
            if section not in DEFAULTS:
                raise ConfigError(f"unknown config section [{section}]")
            for key, value in user[section].items():
                if key not in DEFAULTS[section]:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                parser[section][key] = value
    return {s: dict(parser[s]) for s in DEFAULTS}


def _num(settings, section, key, kind=float):
    raw = settings[section][key].strip()
    try:
        return kind(raw.replace(" ", ""))
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid {kind.__name__}") from exc


def _num_list(settings, section, key):
    raw = settings[section][key]
    try:
        return [float(v) for v in raw.replace(";", ",").split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a list of numbers") from exc


def simulation_config(settings):
    try:
        w = settings["window"]
        if w["shape"] not in RAMP_SHAPES:
            raise ConfigError(f"[window] shape must be one of {RAMP_SHAPES}")
        rabi = _num(settings, "model", "rabi", complex)
        rabi = rabi.real if rabi.imag == 0 else rabi
        window = WindowSpec.for_transfer(
            rabi, w_off=_num(settings, "window", "w_off"),
            lead=_num(settings, "window", "lead"),
            ramp_fraction=_num(settings, "window", "ramp_fraction"), shape=w["shape"])
        return SimulationConfig(
            omega_m=_num(settings, "model", "omega_m"), rabi=rabi,
            omega_c=_num(settings, "bath", "omega_c"), beta=_num(settings, "bath", "beta"),
            window=window, dt=_num(settings, "redfield", "dt"),
            n_sub=_num(settings, "redfield", "n_sub", int))
    except ConfigError:
        raise
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc)) from exc


def initial_amplitudes(settings):
    exp = settings["experiments"]
    if exp["alpha"].strip() or exp["beta_amp"].strip():
        alpha = _num(settings, "experiments", "alpha", complex) if exp["alpha"].strip() else 0j
        beta = _num(settings, "experiments", "beta_amp", complex) if exp["beta_amp"].strip() else 0j
    elif exp["state"] in STATES:
        alpha, beta = STATES[exp["state"]]
    else:
        raise ConfigError(f"[experiments] state must be one of {sorted(STATES)}")
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-9:
        raise ConfigError("initial amplitudes must satisfy |alpha|^2 + |beta|^2 = 1")
    return complex(alpha), complex(beta)


def calibration(settings):
    value = settings["experiments"]["calibration"].strip()
    if value not in CALIBRATIONS:
        raise ConfigError(f"[experiments] calibration must be one of {CALIBRATIONS}")
    return value


def squid_params(settings):
    try:
        widths = _num_list(settings, "squid", "cloud_widths")
        return SquidBecParams(
            loop_radius=_num(settings, "squid", "loop_radius"),
            current=_num(settings, "squid", "current"),
            separation=_num(settings, "squid", "separation"),
            atom_number=_num(settings, "squid", "atom_number"),
            cloud_widths=tuple(widths),
            dipole_matrix_element=_num(settings, "squid", "dipole_matrix_element"),
            hyperfine_splitting=_num(settings, "squid", "hyperfine_splitting"),
            squid_t1=_num(settings, "squid", "squid_t1"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[squid] {exc}") from exc


def validate(settings):
    """Parse every section once so a bad value fails whichever command runs."""
    simulation_config(settings)
    initial_amplitudes(settings)
    calibration(settings)
    squid_params(settings)
    for key in ("eta", "storage_eta", "storage_rabi", "storage_w_off", "storage_horizon"):
        _num(settings, "experiments", key)
    for key in ("eta_list", "sweep_eta_list"):
        _num_list(settings, "experiments", key)
    for key in ("target_ratio", "compare_separation"):
        _num(settings, "squid", key)


def _failure_status(item):
    return "ok" if not isinstance(item, SweepFailure) else f"failed: {item.error}"


DECOHERENCE_COLUMNS = ["eta", "t1", "t1_over_half_rabi", "t2", "t2_over_half_rabi",
                       "t1_analytic", "fit_residual_t1", "fit_residual_t2", "status"]


def _decoherence_rows(results, cfg):
    rows = []
    for r in results:
        if isinstance(r, SweepFailure):
            t1a = analytic_t1(r.eta, cfg.omega_m, cfg.omega_c) if r.eta > 0 else np.inf
            rows.append([r.eta] + [np.nan] * 4 + [t1a, np.nan, np.nan, _failure_status(r)])
        else:
            rows.append([r.eta, r.t1, r.t1_over_half_rabi, r.t2, r.t2_over_half_rabi,
                         r.t1_analytic, r.fit_t1.rms_residual, r.fit_t2.rms_residual, "ok"])
    return rows


def cmd_decohere(settings, manifest, out, force):
    cfg = simulation_config(settings)
    etas = _num_list(settings, "experiments", "eta_list")
    if not etas:
        raise ConfigError("[experiments] eta_list is empty")
    path = out / "decoherence.csv"
    check_writable([path], force)
    results = eta_sweep(etas, "decoherence", cfg.with_(window=None), workers=manifest.workers)
    write_csv(path, DECOHERENCE_COLUMNS, _decoherence_rows(results, cfg),
              manifest.comments() + ["times in 1/omega_m"], force)
    return EXIT_NUMERICAL if any(isinstance(r, SweepFailure) for r in results) else EXIT_OK


def cmd_transfer(settings, manifest, out, force):
    cfg = simulation_config(settings)
    alpha, beta = initial_amplitudes(settings)
    eta = _num(settings, "experiments", "eta")
    paths = [out / "transfer_trace.csv", out / "transfer_summary.csv", out / "trajectory.csv"]
    check_writable(paths, force)
    res = transfer_experiment(alpha, beta, eta, cfg=cfg, calibrate_phase=calibration(settings),
                              keep_record=True)
    rec = res.record
    traj = trajectory_rows(rec)
    comments = manifest.comments() + [
        f"alpha {alpha}, beta_amp {beta}, eta {eta}, rabi {res.cfg.rabi}"]
    trace_rows = [[t, f, w, row[-2], row[-1]]
                  for t, f, w, row in zip(res.series.times, res.series.values,
                                          res.window_values, traj)]
    write_csv(paths[0], ["time", "fidelity", "window_value", "trace", "min_eigenvalue"],
              trace_rows, comments, force)
    write_csv(paths[1], ["eta", "t1_over_half_rabi", "final_fidelity"],
              [[eta, res.t1_over_half_rabi, res.final_fidelity]], comments, force)
    write_csv(paths[2], trajectory_header(), traj,
              comments + ["interaction-picture density matrix"], force)
    return EXIT_OK


def cmd_sweep(settings, manifest, out, force):
    cfg = simulation_config(settings)
    kind = settings["experiments"]["sweep_kind"].strip()
    etas = _num_list(settings, "experiments", "sweep_eta_list")
    if not etas:
        raise ConfigError("[experiments] sweep_eta_list is empty")
    if kind == "decoherence":
        path = out / "decoherence.csv"
        check_writable([path], force)
        results = eta_sweep(etas, "decoherence", cfg.with_(window=None), workers=manifest.workers)
        write_csv(path, DECOHERENCE_COLUMNS, _decoherence_rows(results, cfg),
                  manifest.comments(), force)
        return EXIT_NUMERICAL if any(isinstance(r, SweepFailure) for r in results) else EXIT_OK
    if kind != "transfer":
        raise ConfigError("[experiments] sweep_kind must be transfer or decoherence")
    path = out / "transfer_sweep.csv"
    check_writable([path], force)
    cal = calibration(settings)
    rows, failed = [], False
    for name, (alpha, beta) in STATES.items():
        results = eta_sweep(etas, "transfer", cfg, workers=manifest.workers,
                            alpha=alpha, beta_amp=beta, calibrate_phase=cal)
        for eta, r in zip(sorted(etas), results):
            if isinstance(r, SweepFailure):
                failed = True
                t1 = analytic_t1(eta, cfg.omega_m, cfg.omega_c) / cfg.t_half_rabi if eta > 0 else np.inf
                rows.append([eta, name, t1, np.nan, _failure_status(r)])
            else:
                rows.append([eta, name, r.t1_over_half_rabi, r.final_fidelity, "ok"])
    write_csv(path, ["eta", "state", "t1_over_half_rabi", "final_fidelity", "status"], rows,
              manifest.comments(), force)
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_storage(settings, manifest, out, force):
    cfg = simulation_config(settings)
    path = out / "storage.csv"
    check_writable([path], force)
    rabi = _num(settings, "experiments", "storage_rabi")
    if not 0 < rabi < cfg.omega_m:
        raise ConfigError("[experiments] storage_rabi must lie in (0, omega_m)")
    res = storage_decay_experiment(
        eta=_num(settings, "experiments", "storage_eta"), cfg=cfg.with_(window=None), rabi=rabi,
        w_off=_num(settings, "experiments", "storage_w_off"),
        horizon=_num(settings, "experiments", "storage_horizon"))
    write_csv(path, ["rabi", "w_off", "t1", "decay_time", "decay_over_t1", "predicted_ratio",
                     "resolved", "fit_residual", "min_eigenvalue"],
              [[res.rabi, res.w_off, res.t1, res.decay_time, res.ratio, res.predicted_ratio,
                res.fit.resolved, res.fit.rms_residual, res.min_eigenvalue]],
              manifest.comments() + ["scaled regime: enlarged |Omega|"], force)
    return EXIT_OK


def cmd_squid(settings, manifest, out, force):
    params = squid_params(settings)
    target = _num(settings, "squid", "target_ratio")
    other = _num(settings, "squid", "compare_separation")
    paths = [out / "squid_report.txt", out / "squid.csv"]
    check_writable(paths, force)
    try:
        report = feasibility_report(params, target_ratio=target)
        gain = coupling_gain(params, other)
    except ValueError as exc:
        raise ConfigError(f"[squid] {exc}") from exc
    text = report.to_text() + (
        f"\ncoupling gain moving to d = {other:.3g} m: {gain:.4g}\n")
    paths[0].parent.mkdir(parents=True, exist_ok=True)
    paths[0].write_text("\n".join(f"# {c}" for c in manifest.comments()) + "\n" + text)
    cols = ["separation", "field_on_axis", "coupling_hz", "convention", "rabi",
            "t_half_rabi", "t1_ratio", "required_improvement", "separation_needed",
            "gap_closed", "compare_separation", "coupling_gain"]
    rows = [[params.separation, report.field_on_axis, report.coupling_hz, e.convention,
             e.rabi, e.t_half_rabi, e.t1_ratio, e.required_improvement, e.separation_needed,
             e.gap_closed, other, gain] for e in report.estimates]
    write_csv(paths[1], cols, rows, manifest.comments() + ["SI units"], force)
    print(text, end="")
    return EXIT_OK


COMMANDS = {
    "decohere": (cmd_decohere, "fit T1 and T2 over [experiments] eta_list"),
    "transfer": (cmd_transfer, "one state transfer at [experiments] eta"),
    "sweep": (cmd_sweep, "eta sweep of [experiments] sweep_kind"),
    "storage": (cmd_storage, "post-transfer storage decay (scaled |Omega|)"),
    "squid": (cmd_squid, "BEC-SQUID coupling and feasibility estimate (SI units)"),
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qramsim", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="INI file overriding the defaults")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--workers", type=int, default=1, help="processes for sweeps")
        p.add_argument("--force", action="store_true", help="overwrite existing outputs")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        settings = load_settings(args.config)
        validate(settings)
        manifest = RunManifest(subcommand=args.command,
                               config_path=str(args.config) if args.config else "",
                               out_dir=str(args.out), workers=args.workers,
                               config_hash=config_hash(settings))
        handler = COMMANDS[args.command][0]
        return handler(settings, manifest, args.out, args.force)
    except (ConfigError, OutputExistsError) as exc:
        print(f"qramsim: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"qramsim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
