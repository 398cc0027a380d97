"""
Scenario files: INI text with [grid], [physics], [scenario], [analysis]
and [output] sections. Omitted keys take the reference defaults; unknown
sections or keys are rejected with the line they appear on.
"""
# pylint: disable=line-too-long trailing-whitespace

import configparser
import hashlib
import json
import logging
import math
import os
import re
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, Optional, Tuple

from core_model import (
    DEFAULT_GRID_N, DEFAULT_N_STEPS, DEFAULT_SIGMA, DEFAULT_SNAPSHOT_STRIDE, DEFAULT_T_F, DEFAULT_T_I,
    DEFAULT_X_MAX, DEFAULT_X_MIN, MassTerm, PhysicalParams, RSINormalization, Scenario,
    gaussian_initial_state, make_grid,
)
from errors import ConfigError, DiracSimError

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

DEFAULT_ZITTER_WINDOW = 2.0 * math.pi
DEFAULT_DETREND_ORDER = 1
# drift of the |rho_s| mean position is fitted with a quadratic
DEFAULT_RSI_DETREND_ORDER = 2
DEFAULT_SYMMETRY_TIME = 20.0
DEFAULT_DENSITY_STRIDE = 10

FINAL_STATE_CHOICES = ("same-as-initial", "gaussian")

# Reference defaults, as INI text
DEFAULT_CONFIG: Dict[str, Dict[str, str]] = {
    "grid": {
        "x_min": repr(DEFAULT_X_MIN),
        "x_max": repr(DEFAULT_X_MAX),
        "n": str(DEFAULT_GRID_N),
    },
    "physics": {
        "m": "1.0",
        "c": "1.0",
        "hbar": "1.0",
        "mass_term": MassTerm.SIGMA_Z.value,
    },
    "scenario": {
        "sigma": repr(DEFAULT_SIGMA),
        "weight_1": "1+0j",
        "weight_2": "1+0j",
        "center": "0.0",
        "momentum": "0.0",
        "t_i": repr(DEFAULT_T_I),
        "t_f": repr(DEFAULT_T_F),
        "n_steps": str(DEFAULT_N_STEPS),
        "snapshot_stride": str(DEFAULT_SNAPSHOT_STRIDE),
        "final_state": "same-as-initial",
        "final_sigma": repr(DEFAULT_SIGMA),
        "final_weight_1": "1+0j",
        "final_weight_2": "1+0j",
        "final_center": "0.0",
        "final_momentum": "0.0",
        "rsi_normalization": RSINormalization.UNIT.value,
    },
    "analysis": {
        "zitter_window": repr(DEFAULT_ZITTER_WINDOW),
        "detrend_order": str(DEFAULT_DETREND_ORDER),
        "rsi_detrend_order": str(DEFAULT_RSI_DETREND_ORDER),
        "symmetry_time": repr(DEFAULT_SYMMETRY_TIME),
    },
    "output": {
        "density_stride": str(DEFAULT_DENSITY_STRIDE),
    },
}

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")


@dataclass(frozen=True)
class AnalysisSettings:
    """Trajectory window, drift models (CI and RSI) and symmetry probe time."""
    zitter_window: float = DEFAULT_ZITTER_WINDOW
    detrend_order: int = DEFAULT_DETREND_ORDER
    symmetry_time: float = DEFAULT_SYMMETRY_TIME
    rsi_detrend_order: int = DEFAULT_RSI_DETREND_ORDER


@dataclass(frozen=True)
class OutputSettings:
    """Output cadence for long-form density files."""
    density_stride: int = DEFAULT_DENSITY_STRIDE


@dataclass(frozen=True)
class RunConfig:
    """Everything a scenario file describes."""
    scenario: Scenario
    analysis: AnalysisSettings = field(default_factory=AnalysisSettings)
    output: OutputSettings = field(default_factory=OutputSettings)
    source: Optional[str] = None

    def digest(self) -> str:
        """SHA-256 over the scenario fingerprint and the analysis/output settings."""
        payload = json.dumps({
            "scenario": self.scenario.fingerprint(),
            "analysis": asdict(self.analysis),
            "output": asdict(self.output),
        }, sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _line_index(text: str) -> Dict[Tuple[str, Optional[str]], int]:
    """Map (section, key) and (section, None) to 1-based line numbers."""
    index: Dict[Tuple[str, Optional[str]], int] = {}
    section = None
    for number, line in enumerate(text.splitlines(), start=1):
        header = _SECTION_RE.match(line)
        if header:
            section = header.group(1).strip().lower()
            index.setdefault((section, None), number)
            continue
        key = _KEY_RE.match(line)
        if key and section is not None:
            index.setdefault((section, key.group(1).strip().lower()), number)
    return index


class _Reader:
    """Typed access to a parsed config with line-aware errors."""

    def __init__(self, parser: configparser.ConfigParser, lines: Dict[Tuple[str, Optional[str]], int], path: Optional[str]):
        self.parser = parser
        self.lines = lines
        self.path = path

    def fail(self, section: str, key: Optional[str], message: str) -> ConfigError:
        """Build a ConfigError pointing at a key (or its section)."""
        line = self.lines.get((section, key)) or self.lines.get((section, None))
        return ConfigError(message, self.path, line)

    def raw(self, section: str, key: str) -> str:
        """Value as text, default when omitted."""
        if self.parser.has_option(section, key):
            return self.parser.get(section, key).strip()
        return DEFAULT_CONFIG[section][key]

    def _convert(self, section: str, key: str, convert: Callable[[str], Any], kind: str) -> Any:
        text = self.raw(section, key)
        try:
            return convert(text)
        except (TypeError, ValueError) as e:
            raise self.fail(section, key, f"[{section}] {key} = {text!r} is not a valid {kind}") from e

    def real(self, section: str, key: str) -> float:
        """Finite float."""
        value = self._convert(section, key, float, "number")
        if not math.isfinite(value):
            raise self.fail(section, key, f"[{section}] {key} must be finite")
        return value

    def integer(self, section: str, key: str) -> int:
        """Integer."""
        return self._convert(section, key, int, "integer")

    def complex_value(self, section: str, key: str) -> complex:
        """Complex number such as 1+0j, 0.5-0.5i or 2."""
        return self._convert(section, key, lambda s: complex(s.replace(" ", "").replace("i", "j")), "complex number")

    def choice(self, section: str, key: str, choices: Tuple[str, ...]) -> str:
        """One of `choices`."""
        text = self.raw(section, key).lower()
        if text not in choices:
            raise self.fail(section, key, f"[{section}] {key} must be one of {', '.join(choices)}, got {text!r}")
        return text


def _validate_keys(parser: configparser.ConfigParser, reader: _Reader) -> None:
    for section in parser.sections():
        if section not in DEFAULT_CONFIG:
            raise reader.fail(section, None, f"Unknown section [{section}]")
        for key in parser.options(section):
            if key not in DEFAULT_CONFIG[section]:
                raise reader.fail(section, key, f"Unknown key {key!r} in [{section}]")


def _build(reader: _Reader) -> RunConfig:
    grid_n = reader.integer("grid", "n")
    x_min, x_max = reader.real("grid", "x_min"), reader.real("grid", "x_max")
    try:
        grid = make_grid(x_min, x_max, grid_n)
    except DiracSimError as e:
        key = "n" if "size" in str(e) else "x_max"
        raise reader.fail("grid", key, str(e)) from e

    try:
        params = PhysicalParams(
            m=reader.real("physics", "m"),
            c=reader.real("physics", "c"),
            hbar=reader.real("physics", "hbar"),
            mass_term=MassTerm(reader.choice("physics", "mass_term", tuple(m.value for m in MassTerm))),
        )
    except ConfigError:
        raise
    except DiracSimError as e:
        raise reader.fail("physics", None, str(e)) from e

    t_i, t_f = reader.real("scenario", "t_i"), reader.real("scenario", "t_f")
    if t_f < t_i:
        raise reader.fail("scenario", "t_f", f"t_f ({t_f}) must not precede t_i ({t_i})")
    n_steps = reader.integer("scenario", "n_steps")
    if n_steps < 1:
        raise reader.fail("scenario", "n_steps", f"n_steps must be >= 1, got {n_steps}")
    stride = reader.integer("scenario", "snapshot_stride")
    if stride < 1 or n_steps % stride != 0:
        raise reader.fail("scenario", "snapshot_stride", f"snapshot_stride ({stride}) must divide n_steps ({n_steps})")
    sigma = reader.real("scenario", "sigma")
    if sigma <= 0:
        raise reader.fail("scenario", "sigma", f"sigma must be positive, got {sigma}")

    final_state = None
    if reader.choice("scenario", "final_state", FINAL_STATE_CHOICES) == "gaussian":
        try:
            final_state = gaussian_initial_state(
                grid, reader.real("scenario", "final_sigma"),
                (reader.complex_value("scenario", "final_weight_1"), reader.complex_value("scenario", "final_weight_2")),
                center=reader.real("scenario", "final_center"),
                momentum=reader.real("scenario", "final_momentum"),
                time=t_f,
            )
        except ConfigError:
            raise
        except DiracSimError as e:
            raise reader.fail("scenario", "final_sigma", f"Invalid final state: {e}") from e

    try:
        scenario = Scenario(
            grid=grid,
            params=params,
            initial_sigma=sigma,
            spinor_weights=(reader.complex_value("scenario", "weight_1"), reader.complex_value("scenario", "weight_2")),
            t_i=t_i,
            t_f=t_f,
            n_steps=n_steps,
            snapshot_stride=stride,
            final_state=final_state,
            rsi_normalization=RSINormalization(reader.choice("scenario", "rsi_normalization", tuple(r.value for r in RSINormalization))),
            initial_center=reader.real("scenario", "center"),
            initial_momentum=reader.real("scenario", "momentum"),
        )
        scenario.build_initial_field()
    except ConfigError:
        raise
    except DiracSimError as e:
        raise reader.fail("scenario", None, str(e)) from e

    detrend_order = reader.integer("analysis", "detrend_order")
    if detrend_order < 1:
        raise reader.fail("analysis", "detrend_order", "detrend_order must be >= 1")
    rsi_detrend_order = reader.integer("analysis", "rsi_detrend_order")
    if rsi_detrend_order < 1:
        raise reader.fail("analysis", "rsi_detrend_order", "rsi_detrend_order must be >= 1")
    window = reader.real("analysis", "zitter_window")
    if window <= 0:
        raise reader.fail("analysis", "zitter_window", "zitter_window must be positive")
    density_stride = reader.integer("output", "density_stride")
    if density_stride < 1:
        raise reader.fail("output", "density_stride", "density_stride must be >= 1")

    return RunConfig(
        scenario=scenario,
        analysis=AnalysisSettings(window, detrend_order, reader.real("analysis", "symmetry_time"), rsi_detrend_order),
        output=OutputSettings(density_stride),
        source=reader.path,
    )


def parse_config_text(text: str, path: Optional[str] = None,
                      overrides: Optional[Dict[str, Dict[str, Any]]] = None) -> RunConfig:
    """Parse scenario INI text.

    Args:
        text: INI content
        path: File name used in error messages
        overrides: {section: {key: value}} applied on top of the file

    Returns:
        RunConfig
    """
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        parser.read_string(text, source=path or "<string>")
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("Entries must follow a [section] header", path, e.lineno) from e
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as e:
        raise ConfigError(f"Duplicate entry: {e.message}", path, e.lineno) from e
    except configparser.ParsingError as e:
        line = e.errors[0][0] if e.errors else None
        raise ConfigError("Malformed line (expected key = value)", path, line) from e

    reader = _Reader(parser, _line_index(text), path)
    _validate_keys(parser, reader)
    for section, values in (overrides or {}).items():
        if section not in DEFAULT_CONFIG or any(k not in DEFAULT_CONFIG[section] for k in values):
            raise ConfigError(f"Invalid override for [{section}]: {sorted(values)}")
        if not parser.has_section(section):
            parser.add_section(section)
        for key, value in values.items():
            parser.set(section, key, str(value))
    return _build(reader)


def load_run_config(path: Optional[str] = None, overrides: Optional[Dict[str, Dict[str, Any]]] = None) -> RunConfig:
    """Read a scenario file; None gives the reference defaults.

    Args:
        path: INI file path
        overrides: {section: {key: value}} from the command line

    Returns:
        RunConfig
    """
    if path is None:
        return parse_config_text("", None, overrides)
    if not os.path.isfile(path):
        raise ConfigError("Scenario file not found", path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"Cannot read scenario file: {e}", path) from e
    logger.info("Loaded scenario file %s", path)
    return parse_config_text(text, path, overrides)


def parse_scenario(path: str) -> Scenario:
    """Validated Scenario from a scenario file."""
    return load_run_config(path).scenario


def write_config(values: Dict[str, Dict[str, Any]], path: str, header: Optional[str] = None) -> None:
    """Write a {section: {key: value}} mapping as a scenario file."""
    parser = configparser.ConfigParser(interpolation=None)
    for section in DEFAULT_CONFIG:
        if section in values:
            parser[section] = {k: str(v) for k, v in values[section].items()}
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        if header:
            for line in header.splitlines():
                f.write(f"# {line}\n")
            f.write("\n")
        parser.write(f)
