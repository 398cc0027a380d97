"""
Validation Framework for the Dirac transition simulator

Runs the invariant battery (projector and propagator algebra on random
fields, plane-wave residuals, norm and amplitude conservation, CI/RSI
equivalence, continuity convergence) and the Crank-Nicolson oracle suite,
and writes a JSON report.
"""
# pylint: disable=line-too-long trailing-whitespace

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np

from core_model import ARTIFACT_VERSION, Scenario, SeriesKind, SpinorField, TimeSeries, gaussian_initial_state, inner_product, make_grid, norm_squared
from oracle import FDConfig, cn_amplification, cn_step, dirac_residual, plane_wave_solution, validate_against_spectral
from pipelines.ci_pipeline import continuity_residual_ci, probability_density, run_ci
from pipelines.rsi_pipeline import AdvancedProvider, amplitude_density, continuity_residual_rsi, projected_states, run_rsi
from spectral_engine import EnergySign, SpectralPropagator, apply_hamiltonian, project_energy, propagate

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

DEFAULT_VALIDATION_CONFIG: Dict[str, Any] = {
    "seed": 0,
    "random_fields": 100,
    "grid_n": 256,
    "grid_half_width": 12.8,
    "max_random_dt": 40.0,
    "tolerance": 1e-12,
    "order_target": 2.0,
    "order_window": 0.2,
    "oracle": {
        "n": 512,
        "half_width": 25.6,
        "sigma": 2.0,
        "t_f": 2.0,
        "dt": 1e-2,
        "halvings": 2,
        "stencil_order": 4,
        "max_linf": 1e-5,
    },
    "invariants": {
        "n": 1024,
        "half_width": 40.0,
        "t_f": 10.0,
        "n_steps": 100,
        "invariance_limit": 1e-10,
    },
    "continuity": {
        "center": 1.0,
        "dts": [0.02, 0.01, 0.005],
    },
}


@dataclass
class CheckResult:
    """Outcome of one validation check."""
    name: str
    passed: bool
    value: Optional[float] = None
    threshold: Optional[float] = None
    details: Dict[str, Any] = field(default_factory=dict)


class ValidationFramework:
    """Invariant battery and oracle suite with a JSON report."""

    def __init__(self, config: Union[Dict[str, Any], str, None] = None):
        """Initialize the framework.

        Args:
            config: Settings dictionary, path to a JSON settings file, or None
        """
        self.config = self._load_config(config)
        self.rng = np.random.default_rng(self.config["seed"])
        self.grid = make_grid(-self.config["grid_half_width"], self.config["grid_half_width"], self.config["grid_n"])
        self.checks: List[CheckResult] = []
        self.results: Dict[str, Any] = {}
        logger.info("Initialized validation framework (seed %d, %d random fields)",
                    self.config["seed"], self.config["random_fields"])

    def _load_config(self, config: Union[Dict[str, Any], str, None]) -> Dict[str, Any]:
        """Merge user settings over the defaults (one level deep for nested sections).

        Args:
            config: Settings dictionary, path to a JSON file, or None

        Returns:
            Effective settings
        """
        loaded: Dict[str, Any] = {}
        if isinstance(config, str):
            with open(config, "r", encoding="utf-8") as f:
                loaded = json.load(f)
            logger.info("Loaded validation settings from %s", config)
        elif isinstance(config, dict):
            loaded = config

        merged = json.loads(json.dumps(DEFAULT_VALIDATION_CONFIG))
        for key, value in loaded.items():
            if isinstance(value, dict) and isinstance(merged.get(key), dict):
                merged[key].update(value)
            else:
                merged[key] = value
        return merged

    def _random_field(self) -> SpinorField:
        values = self.rng.standard_normal((self.grid.n, 2)) + 1j * self.rng.standard_normal((self.grid.n, 2))
        field_ = SpinorField(self.grid, values)
        return field_ * (1.0 / math.sqrt(norm_squared(field_)))

    def _record(self, name: str, value: float, threshold: float, passed: Optional[bool] = None, **details) -> CheckResult:
        ok = value <= threshold if passed is None else passed
        result = CheckResult(name, bool(ok), float(value), float(threshold), details)
        self.checks.append(result)
        log = logger.info if result.passed else logger.error
        log("%-28s %s (value %.3e, threshold %.1e)", name, "PASS" if result.passed else "FAIL", value, threshold)
        return result

    def check_algebra(self) -> None:
        """Projector and propagator identities on random fields."""
        tol = self.config["tolerance"]
        worst: Dict[str, float] = {key: 0.0 for key in (
            "completeness", "idempotency", "orthogonality", "unitarity", "group_property", "commutation", "energy_sign")}
        max_dt = self.config["max_random_dt"]
        for _ in range(self.config["random_fields"]):
            f, g = self._random_field(), self._random_field()
            a, b = self.rng.uniform(-max_dt, max_dt, size=2)
            plus, minus = project_energy(f, "+"), project_energy(f, "-")
            worst["completeness"] = max(worst["completeness"], np.max(np.abs((plus + minus - f).values)))
            worst["idempotency"] = max(worst["idempotency"], np.max(np.abs((project_energy(plus, "+") - plus).values)))
            worst["orthogonality"] = max(worst["orthogonality"], abs(inner_product(plus, project_energy(g, "-"))))
            evolved = propagate(f, a)
            worst["unitarity"] = max(worst["unitarity"], abs(norm_squared(evolved) - 1.0))
            twice = propagate(evolved, b)
            worst["group_property"] = max(worst["group_property"], np.max(np.abs((propagate(f, a + b) - twice).values)))
            commuted = project_energy(evolved, "+") - propagate(plus, a)
            worst["commutation"] = max(worst["commutation"], np.max(np.abs(commuted.values)))
            energy_plus = inner_product(plus, apply_hamiltonian(plus)).real
            energy_minus = inner_product(minus, apply_hamiltonian(minus)).real
            worst["energy_sign"] = max(worst["energy_sign"], max(-energy_plus, energy_minus, 0.0))
        for name, value in worst.items():
            self._record(f"algebra.{name}", value, tol)

    def check_plane_waves(self) -> None:
        """Dirac residual of exact plane waves and the CN phase of the k = 0 mode."""
        k = 3 * self.grid.dk
        for sign in (EnergySign.PLUS, EnergySign.MINUS):
            residual = dirac_residual(lambda t, s=sign: plane_wave_solution(k, s, t, self.grid), 0.5)
            self._record(f"plane_wave.residual{sign.value}", residual, 1e-10)
        cfg = FDConfig(dt=self.config["oracle"]["dt"])
        rest = plane_wave_solution(0.0, "+", 0.0, self.grid)
        stepped = cn_step(rest, cfg)
        expected = cn_amplification(0.0, "+", cfg, self.grid)
        self._record("plane_wave.cn_phase", float(np.max(np.abs(stepped.values - expected * rest.values))), 1e-12)

    def check_oracle(self) -> None:
        """CN vs spectral convergence on the small instance."""
        settings = self.config["oracle"]
        half = settings["half_width"]
        scenario = Scenario(grid=make_grid(-half, half, settings["n"]), initial_sigma=settings["sigma"],
                            t_f=settings["t_f"], n_steps=20)
        cfg = FDConfig(dt=settings["dt"], stencil_order=settings["stencil_order"])
        report = validate_against_spectral(scenario, cfg, halvings=settings["halvings"])
        order = report.observed_order if report.observed_order is not None else float("nan")
        target, window = self.config["order_target"], self.config["order_window"]
        self._record("oracle.order", abs(order - target), window, passed=abs(order - target) <= window, **report.to_dict())
        self._record("oracle.final_linf", report.linf_errors[-1], settings["max_linf"])

    def _invariant_scenario(self) -> Scenario:
        settings = self.config["invariants"]
        half = settings["half_width"]
        return Scenario(grid=make_grid(-half, half, settings["n"]), t_f=settings["t_f"], n_steps=settings["n_steps"])

    def check_invariants(self) -> None:
        """Norm conservation, A_s invariance and the CI/RSI equivalence."""
        scenario = self._invariant_scenario()
        ci = run_ci(scenario)
        norms = ci.series.observable("norm")
        self._record("ci.norm_conservation", float(np.max(np.abs(norms - 1.0))), self.config["tolerance"])
        rsi = run_rsi(scenario, "+")
        self._record("rsi.amplitude_invariance", rsi.invariance_drift, self.config["invariants"]["invariance_limit"])
        psi, phi = projected_states(scenario, "+")
        equivalent = run_ci(scenario.with_overrides(initial_state=psi, final_state=phi))
        self._record("equivalence.ci_rsi", abs(equivalent.amplitude - rsi.amplitude), self.config["tolerance"])

    def _order_check(self, name: str, residual_for: Callable[[float], float]) -> None:
        dts = self.config["continuity"]["dts"]
        residuals = [residual_for(h) for h in dts]
        orders = [math.log2(residuals[i] / residuals[i + 1]) for i in range(len(residuals) - 1)]
        target, window = self.config["order_target"], self.config["order_window"]
        gap = max(abs(o - target) for o in orders)
        self._record(name, gap, window, passed=gap <= window, residuals=residuals, orders=orders)

    def check_continuity(self) -> None:
        """Second-order decay of the CI and RSI continuity residuals."""
        scenario = self._invariant_scenario()
        center = self.config["continuity"]["center"]
        full = SpectralPropagator(scenario.build_initial_field())
        psi, phi = projected_states(scenario, "+")
        retarded, advanced = SpectralPropagator(psi), AdvancedProvider(phi)

        def ci_residual(h: float) -> float:
            times = [center - h, center, center + h]
            fields = [full.at(t) for t in times]
            series = TimeSeries(scenario.fingerprint(), SeriesKind.CI_PROBABILITY, scenario.grid)
            for t, f in zip(times, fields):
                series.add(t, probability_density(f))
            return continuity_residual_ci(series, fields)

        def rsi_residual(h: float) -> float:
            times = [center - h, center, center + h]
            psis = [retarded.at(t) for t in times]
            phis = [advanced(t) for t in times]
            series = TimeSeries(scenario.fingerprint(), SeriesKind.RSI_AMPLITUDE, scenario.grid)
            for t, p, q in zip(times, phis, psis):
                series.add(t, amplitude_density(p, q))
            return continuity_residual_rsi(series, phis, psis)

        self._order_check("continuity.ci_order", ci_residual)
        self._order_check("continuity.rsi_order", rsi_residual)

    def run_checks(self) -> Dict[str, Any]:
        """Run every check and collect the report.

        Returns:
            Report dictionary
        """
        self.checks = []
        for check in (self.check_algebra, self.check_plane_waves, self.check_oracle,
                      self.check_invariants, self.check_continuity):
            check()
        self.results = self._collect_results()
        return self.results

    def _collect_results(self) -> Dict[str, Any]:
        passed = sum(1 for c in self.checks if c.passed)
        return {
            "test_info": {
                "framework": "dirac-validation",
                "artifact_version": ARTIFACT_VERSION,
                "checks_run": len(self.checks),
            },
            "summary": {
                "passed": passed,
                "failed": len(self.checks) - passed,
                "all_passed": passed == len(self.checks),
            },
            "results": [asdict(c) for c in self.checks],
            "config": self.config,
        }

    def save_results(self, output_file: str) -> bool:
        """Save the report to a JSON file.

        Args:
            output_file: Path to output file

        Returns:
            True if successful, False otherwise
        """
        if not self.results:
            logger.error("No results to save")
            return False
        try:
            output_dir = os.path.dirname(output_file)
            if output_dir:
                os.makedirs(output_dir, exist_ok=True)
            with open(output_file, "w", encoding="utf-8") as f:
                json.dump(self.results, f, indent=2, sort_keys=True, default=_json_default)
            logger.info("Saved validation report to %s", output_file)
            return True
        except (IOError, TypeError) as e:
            logger.error("Error saving results: %s", e)
            return False


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    raise TypeError(f"Not JSON serializable: {type(value).__name__}")


def parse_arguments():
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        description='Invariant battery and oracle suite for the Dirac simulator'
    )
    parser.add_argument(
        '--config',
        default=None,
        help='Path to a JSON settings file'
    )
    parser.add_argument(
        '--output',
        default='validation_report.json',
        help='Path to output JSON file'
    )
    parser.add_argument(
        '--seed',
        type=int,
        default=None,
        help='Seed for the random fields'
    )
    parser.add_argument(
        '--verbose',
        action='store_true',
        help='Enable verbose logging'
    )
    return parser.parse_args()


def main():
    """Main entry point."""
    args = parse_arguments()
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
        logger.debug("Verbose logging enabled")

    config: Dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config, 'r', encoding='utf-8') as f:
                config = json.load(f)
        except (IOError, json.JSONDecodeError) as e:
            logger.error("Error loading configuration: %s", e)
            return 2
    if args.seed is not None:
        config["seed"] = args.seed

    framework = ValidationFramework(config)
    results = framework.run_checks()
    if not framework.save_results(args.output):
        return 4
    return 0 if results["summary"]["all_passed"] else 3


if __name__ == "__main__":
    sys.exit(main())
