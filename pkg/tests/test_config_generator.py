"""Tests for scenario-file generation."""
import os

import pytest

from config_generator import (
    BASE_CONFIG, SCENARIOS, generate_cadence_configs, generate_refinement_configs,
    generate_scenario_configs, merge_config,
)
from core_model import MassTerm
from scenario_config import load_run_config, parse_scenario


def test_merge_config_leaves_base_untouched():
    merged = merge_config(BASE_CONFIG, {"grid": {"n": "8192"}})
    assert merged["grid"]["n"] == "8192"
    assert BASE_CONFIG["grid"]["n"] == "4096"
    assert merged["scenario"] == BASE_CONFIG["scenario"]


def test_named_scenarios(tmp_path):
    paths = generate_scenario_configs(str(tmp_path))
    assert len(paths) == len(SCENARIOS)
    by_name = {os.path.splitext(os.path.basename(p))[0]: p for p in paths}
    assert parse_scenario(by_name["oracle_small"]).grid.n == 512
    assert parse_scenario(by_name["sigma0_mass_term"]).params.mass_term is MassTerm.SIGMA_0
    assert parse_scenario(by_name["reference_default"]).fingerprint() == load_run_config().scenario.fingerprint()


def test_refinement_ladder(tmp_path):
    sizes = [parse_scenario(p).grid.n for p in generate_refinement_configs(str(tmp_path))]
    assert sizes == [2048, 4096, 8192]


def test_cadence_variants_keep_density_spacing(tmp_path):
    for path in generate_cadence_configs(str(tmp_path)):
        run = load_run_config(path)
        spacing = run.scenario.snapshot_interval * run.output.density_stride
        assert spacing == pytest.approx(1.0)
