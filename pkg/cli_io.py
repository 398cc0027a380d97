"""
Command-line entry point and serialization for the Dirac transition simulator.

Commands:
    simulate-ci     CI run: observables, long-form density, scalars
    simulate-rsi    RSI run for one channel
    compare         CI and both RSI channels, drift-subtracted trajectories,
                    symmetry discriminator, antiparticle report, scalar table
    validate        invariant battery and oracle suite
    emit-figures    density profiles at t_i, midpoint, t_f- and t_f+

Usage:
    python cli_io.py compare --config configs/reference_default.ini --out results/
"""
# pylint: disable=line-too-long trailing-whitespace

import argparse
import json
import logging
import os
import sys
import warnings
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, Field
from tabulate import tabulate

from analysis import asymmetry_metrics, snapshot_at, trajectory
from core_model import ARTIFACT_VERSION, Scenario, TimeSeries
from errors import ConfigError, DiracSimError, InvariantBreachError, NumericalWarning, OutputError, ProjectionError
from pipelines.ci_pipeline import CITransitionResult, probability_density, run_ci
from pipelines.rsi_pipeline import RSITransitionResult, amplitude_density, antiparticle_phase_check, projected_states, run_rsi
from scenario_config import RunConfig, load_run_config, parse_scenario
from spectral_engine import EnergySign, SpectralPropagator
from validation_framework import ValidationFramework

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

COMMANDS = ("simulate-ci", "simulate-rsi", "compare", "validate", "emit-figures")
FLOAT_FORMAT = "%.15g"
MANIFEST_NAME = "manifest.json"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

__all__ = ["OutputRecord", "RunManifest", "parse_scenario", "run_command", "main"]


class OutputRecord(BaseModel):
    """One emitted file."""
    path: str
    kind: str
    rows: int


class RunManifest(BaseModel):
    """Provenance of one command run."""
    config_digest: str
    artifact_version: str = ARTIFACT_VERSION
    command: str
    status: str = "ok"
    error: Optional[str] = None
    outputs: List[OutputRecord] = Field(default_factory=list)
    scalars: Dict[str, Optional[float]] = Field(default_factory=dict)

    def write(self, out_dir: str) -> str:
        """Write as sorted JSON into out_dir."""
        path = os.path.join(out_dir, MANIFEST_NAME)
        try:
            with open(path, "w", encoding="utf-8") as f:
                json.dump(self.model_dump(), f, indent=2, sort_keys=True)
                f.write("\n")
        except OSError as e:
            raise OutputError(f"Cannot write manifest {path}: {e}") from e
        return path


class _Emitter:
    """Writes CSV files into one directory and records them in a manifest."""

    def __init__(self, out_dir: str, manifest: RunManifest):
        self.out_dir = out_dir
        self.manifest = manifest

    def csv(self, name: str, frame: pd.DataFrame, kind: str) -> str:
        """Write a frame with 15 significant digits."""
        path = os.path.join(self.out_dir, name)
        try:
            frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        except OSError as e:
            raise OutputError(f"Cannot write {path}: {e}") from e
        self.manifest.outputs.append(OutputRecord(path=name, kind=kind, rows=len(frame)))
        logger.debug("Wrote %s (%d rows)", path, len(frame))
        return path

    def json(self, name: str, payload: Dict[str, Any], kind: str, rows: int) -> str:
        """Write a JSON document."""
        path = os.path.join(self.out_dir, name)
        try:
            with open(path, "w", encoding="utf-8") as f:
                json.dump(payload, f, indent=2, sort_keys=True)
                f.write("\n")
        except OSError as e:
            raise OutputError(f"Cannot write {path}: {e}") from e
        self.manifest.outputs.append(OutputRecord(path=name, kind=kind, rows=rows))
        return path


def profile_frame(grid_x: np.ndarray, values: np.ndarray) -> pd.DataFrame:
    """x, re, im columns (im is 0 for real profiles)."""
    values = np.asarray(values)
    return pd.DataFrame({"x": grid_x, "re": np.real(values), "im": np.imag(values) if np.iscomplexobj(values) else np.zeros(len(values))})


def density_frame(series: TimeSeries, stride: int) -> pd.DataFrame:
    """Long-form t, x, re, im rows for every `stride`-th snapshot."""
    records = series.records[::stride]
    if not records:
        return pd.DataFrame(columns=["t", "x", "re", "im"])
    x = series.grid.x
    data = np.stack([r.data for r in records])
    return pd.DataFrame({
        "t": np.repeat([r.time for r in records], len(x)),
        "x": np.tile(x, len(records)),
        "re": np.real(data).ravel(),
        "im": np.imag(data).ravel() if np.iscomplexobj(data) else np.zeros(data.size),
    })


def observables_frame(series: TimeSeries) -> pd.DataFrame:
    """t followed by every scalar observable; complex ones split into _re/_im."""
    columns: Dict[str, Any] = {"t": series.times}
    if series.records:
        for name in series.records[0].observables:
            values = series.observable(name)
            if np.iscomplexobj(values):
                columns[f"{name}_re"] = values.real
                columns[f"{name}_im"] = values.imag
            else:
                columns[name] = values
    return pd.DataFrame(columns)


def _scalar_frame(scalars: Dict[str, Optional[float]]) -> pd.DataFrame:
    return pd.DataFrame({"quantity": list(scalars), "value": [np.nan if v is None else v for v in scalars.values()]})


def _print_scalars(scalars: Dict[str, Optional[float]]) -> None:
    rows = [(name, "n/a" if value is None else f"{value:.6g}") for name, value in scalars.items()]
    print(tabulate(rows, headers=["quantity", "value"], tablefmt="simple"))


def _ci_scalars(ci: CITransitionResult) -> Dict[str, Optional[float]]:
    return {"A_re": ci.amplitude.real, "A_im": ci.amplitude.imag, "P": ci.probability,
            "ci_norm_drift": ci.norm_drift, "ci_continuity_residual": ci.continuity_residual}


def _rsi_scalars(rsi: RSITransitionResult, prefix: str = "") -> Dict[str, Optional[float]]:
    return {f"{prefix}A_s_re": rsi.amplitude.real, f"{prefix}A_s_im": rsi.amplitude.imag, f"{prefix}P_s": rsi.probability,
            f"{prefix}rsi_invariance_drift": rsi.invariance_drift, f"{prefix}rsi_continuity_residual": rsi.continuity_residual}


def _symmetry(series: TimeSeries, t: float, prefix: str) -> Dict[str, Optional[float]]:
    """Complex and absolute asymmetry of the snapshot at t, keyed under prefix."""
    names = (f"{prefix}_at_symmetry_time", f"{prefix}_abs_at_symmetry_time")
    if not series.grid.is_symmetric():
        logger.warning("Grid is not symmetric about the origin; skipping the symmetry discriminator")
        return dict.fromkeys(names)
    try:
        metrics = asymmetry_metrics(snapshot_at(series, t).data, series.grid)
    except DiracSimError as e:
        logger.warning("Symmetry discriminator unavailable: %s", e)
        return dict.fromkeys(names)
    return {names[0]: metrics["complex"], names[1]: metrics["absolute"]}


def _channel_name(sign: EnergySign) -> str:
    return "plus" if sign is EnergySign.PLUS else "minus"


def _simulate_ci(run: RunConfig, emit: _Emitter, progress: bool) -> Dict[str, Optional[float]]:
    ci = run_ci(run.scenario, progress=progress)
    emit.csv("ci_observables.csv", observables_frame(ci.series), "time-series")
    emit.csv("ci_density.csv", density_frame(ci.series, run.output.density_stride), "density")
    return _ci_scalars(ci)


def _simulate_rsi(run: RunConfig, emit: _Emitter, progress: bool, sign: EnergySign) -> Dict[str, Optional[float]]:
    rsi = run_rsi(run.scenario, sign, progress=progress)
    name = _channel_name(sign)
    emit.csv(f"rsi_{name}_observables.csv", observables_frame(rsi.series), "time-series")
    emit.csv(f"rsi_{name}_density.csv", density_frame(rsi.series, run.output.density_stride), "density")
    return _rsi_scalars(rsi)


def _compare(run: RunConfig, emit: _Emitter, progress: bool) -> Dict[str, Optional[float]]:
    scenario = run.scenario
    tasks = [delayed(run_ci)(scenario, progress=progress),
             delayed(run_rsi)(scenario, EnergySign.PLUS, progress=progress),
             delayed(run_rsi)(scenario, EnergySign.MINUS, progress=progress)]
    ci, plus, minus = Parallel(n_jobs=3, prefer="threads")(tasks)

    window = (scenario.t_i, scenario.t_i + run.analysis.zitter_window)
    ci_path = trajectory(ci.series, use_abs=False, window=window, detrend_order=run.analysis.detrend_order)
    rsi_path = trajectory(plus.series, use_abs=True, window=window, detrend_order=run.analysis.rsi_detrend_order)
    rsi_linear = trajectory(plus.series, use_abs=True, window=window, detrend_order=1)
    emit.csv("fig2_trajectories.csv", pd.DataFrame({
        "t": ci_path.times,
        "ci_mean": ci_path.raw,
        "ci_detrended": ci_path.detrended,
        "rsi_mean": rsi_path.raw,
        "rsi_detrended": rsi_path.detrended,
    }), "time-series")

    antiparticle = antiparticle_phase_check(plus, minus)
    emit.json("antiparticle_report.json", antiparticle.to_dict(), "report", 1)

    scalars = _ci_scalars(ci)
    scalars.update(_rsi_scalars(plus))
    scalars.update({
        "A_s_minus_re": minus.amplitude.real,
        "A_s_minus_im": minus.amplitude.imag,
        "zitter_amplitude_ci": ci_path.amplitude,
        "zitter_frequency_ci": ci_path.frequency,
        "zitter_amplitude_rsi": rsi_path.amplitude,
        "zitter_amplitude_rsi_linear": rsi_linear.amplitude,
        "drift_velocity_ci": ci_path.velocity,
        "drift_velocity_rsi": rsi_path.velocity,
        "antiparticle_magnitude_mismatch": antiparticle.magnitude_mismatch,
        "antiparticle_conjugation_mismatch": antiparticle.conjugation_mismatch,
        "antiparticle_trajectory_mismatch": antiparticle.trajectory_mismatch,
    })
    scalars.update(_symmetry(ci.series, run.analysis.symmetry_time, "asymmetry_ci"))
    scalars.update(_symmetry(plus.series, run.analysis.symmetry_time, "asymmetry_rsi"))
    return scalars


def _emit_figures(run: RunConfig, emit: _Emitter, progress: bool, sign: EnergySign) -> Dict[str, Optional[float]]:
    """Panels a-d: CI probability density; e-h: RSI amplitude density.

    a-c follow the evolved field to t_f, d is the collapsed density. e-h
    track rho_s from t_i through the midpoint and t_f to a time past t_f,
    where the amplitude density keeps evolving without a jump.
    """
    scenario = run.scenario
    ci = run_ci(scenario, progress=progress)
    rsi = run_rsi(scenario, sign, progress=progress)
    psi, phi = projected_states(scenario, sign)
    retarded, advanced = SpectralPropagator(psi, scenario.params), SpectralPropagator(phi, scenario.params)
    full = SpectralPropagator(scenario.build_initial_field(), scenario.params)
    midpoint = 0.5 * (scenario.t_i + scenario.t_f)
    beyond = scenario.t_f + 0.125 * (scenario.t_f - scenario.t_i)
    x = scenario.grid.x

    panels = [
        ("a", probability_density(full.at(scenario.t_i))),
        ("b", probability_density(full.at(midpoint))),
        ("c", probability_density(ci.collapse.pre_collapse)),
        ("d", probability_density(ci.collapse.post_collapse)),
    ]
    for label, t in zip("efgh", (scenario.t_i, midpoint, scenario.t_f, beyond)):
        panels.append((label, amplitude_density(advanced.at(t), retarded.at(t))))
    for label, values in panels:
        emit.csv(f"fig1_{label}.csv", profile_frame(x, values), "profile")

    scalars = _ci_scalars(ci)
    scalars.update(_rsi_scalars(rsi))
    scalars["panel_h_time"] = beyond
    return scalars


def _validate(run: RunConfig, emit: _Emitter, seed: Optional[int]) -> Dict[str, Optional[float]]:
    config: Dict[str, Any] = {}
    if seed is not None:
        config["seed"] = seed
    framework = ValidationFramework(config)
    results = framework.run_checks()
    emit.json("validation_report.json", results, "report", len(results["results"]))
    summary = results["summary"]
    if not summary["all_passed"]:
        failed = [r["name"] for r in results["results"] if not r["passed"]]
        raise InvariantBreachError(f"Validation failed: {', '.join(failed)}")
    return {"checks_passed": float(summary["passed"]), "checks_failed": float(summary["failed"])}


def run_command(command: str,
                scenario: Any,
                out_dir: str,
                channel: str = "+",
                seed: Optional[int] = None,
                progress: bool = False) -> RunManifest:
    """Run one command and write its outputs and manifest into out_dir.

    On failure a partial manifest (status "failed") is written before the
    error propagates.

    Args:
        command: One of COMMANDS
        scenario: RunConfig, or a bare Scenario (default analysis/output settings)
        out_dir: Output directory (created if missing)
        channel: RSI channel for simulate-rsi and emit-figures
        seed: Seed for the validation battery's random fields
        progress: Show tqdm bars

    Returns:
        The manifest
    """
    if command not in COMMANDS:
        raise ConfigError(f"Unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    run = scenario if isinstance(scenario, RunConfig) else RunConfig(scenario=scenario)
    sign = EnergySign.from_symbol(channel)
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise OutputError(f"Cannot create output directory {out_dir}: {e}") from e

    manifest = RunManifest(config_digest=run.digest(), command=command)
    emit = _Emitter(out_dir, manifest)
    logger.info("Running %s (config %s)", command, manifest.config_digest[:12])
    try:
        if command == "simulate-ci":
            scalars = _simulate_ci(run, emit, progress)
        elif command == "simulate-rsi":
            scalars = _simulate_rsi(run, emit, progress, sign)
        elif command == "compare":
            scalars = _compare(run, emit, progress)
        elif command == "emit-figures":
            scalars = _emit_figures(run, emit, progress, sign)
        else:
            scalars = _validate(run, emit, seed)
        manifest.scalars = {k: (None if v is None else float(v)) for k, v in scalars.items()}
        emit.csv("scalars.csv", _scalar_frame(manifest.scalars), "scalars")
    except (DiracSimError, NumericalWarning, OSError) as e:
        manifest.status = "failed"
        manifest.error = f"{type(e).__name__}: {e}"
        try:
            manifest.write(out_dir)
        except OutputError:
            logger.error("Partial manifest could not be written either")
        raise
    manifest.write(out_dir)
    return manifest


def parse_arguments(argv: Optional[List[str]] = None):
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        description='Free Dirac transition simulator: conventional vs symmetrical interpretation'
    )
    parser.add_argument(
        'command',
        choices=COMMANDS,
        help='Command to run'
    )
    parser.add_argument(
        '--config',
        default=None,
        help='Path to a scenario file (reference defaults when omitted)'
    )
    parser.add_argument(
        '--out',
        default='results',
        help='Output directory'
    )
    parser.add_argument(
        '--grid-n',
        type=int,
        default=None,
        help='Override the number of grid points'
    )
    parser.add_argument(
        '--channel',
        choices=['+', '-'],
        default='+',
        help='RSI energy channel'
    )
    parser.add_argument(
        '--seed',
        type=int,
        default=None,
        help='Seed for the validation battery random fields'
    )
    parser.add_argument(
        '--strict',
        action='store_true',
        help='Treat numerical warnings as errors'
    )
    parser.add_argument(
        '--progress',
        action='store_true',
        help='Show progress bars'
    )
    parser.add_argument(
        '--verbose',
        action='store_true',
        help='Enable verbose logging'
    )
    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    args = parse_arguments(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
        logger.debug("Verbose logging enabled")

    with warnings.catch_warnings():
        if args.strict:
            warnings.simplefilter("error", NumericalWarning)
        try:
            overrides = {"grid": {"n": args.grid_n}} if args.grid_n is not None else None
            run = load_run_config(args.config, overrides)
            manifest = run_command(args.command, run, args.out, channel=args.channel,
                                   seed=args.seed, progress=args.progress)
        except ConfigError as e:
            logger.error("Configuration error: %s", e)
            return EXIT_CONFIG
        except (InvariantBreachError, ProjectionError, NumericalWarning) as e:
            logger.error("Numerical failure: %s", e)
            return EXIT_NUMERICAL
        except OSError as e:
            logger.error("I/O failure: %s", e)
            return EXIT_IO
        except DiracSimError as e:
            logger.error("Invalid input: %s", e)
            return EXIT_CONFIG

    _print_scalars(manifest.scalars)
    logger.info("Wrote %d files to %s", len(manifest.outputs) + 1, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
