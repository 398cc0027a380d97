"""Tests for scenario-file parsing and validation."""
import os

import pytest

from core_model import MassTerm, RSINormalization, reference_scenario
from errors import ConfigError
from scenario_config import DEFAULT_CONFIG, load_run_config, parse_config_text, parse_scenario, write_config


def test_empty_config_is_the_default_experiment():
    config = parse_config_text("")
    assert config.scenario.fingerprint() == reference_scenario().fingerprint()
    assert config.analysis.detrend_order == 1
    assert config.analysis.rsi_detrend_order == 2
    assert config.analysis.symmetry_time == 20.0
    assert config.output.density_stride == 10
    assert load_run_config().digest() == config.digest()


def test_keys_override_defaults():
    text = "[grid]\nn = 2048\n[physics]\nmass_term = sigma_0\n[scenario]\nweight_2 = 0.5-0.5i\nrsi_normalization = raw\n"
    scenario = parse_config_text(text).scenario
    assert scenario.grid.n == 2048
    assert scenario.params.mass_term is MassTerm.SIGMA_0
    assert scenario.spinor_weights[1] == complex(0.5, -0.5)
    assert scenario.rsi_normalization is RSINormalization.RAW


def test_reversed_times_point_at_t_f():
    text = "[scenario]\nt_i = 5\nt_f = 1\n"
    with pytest.raises(ConfigError) as excinfo:
        parse_config_text(text, "bad.ini")
    assert excinfo.value.line == 3
    assert str(excinfo.value).startswith("bad.ini:3: ")


@pytest.mark.parametrize("text,line", [
    ("[grid]\nn = 4096\n[colors]\nred = 1\n", 3),
    ("[grid]\nn = 4096\nwidth = 3\n", 3),
    ("[scenario]\nn_steps = 400\nsnapshot_stride = 7\n", 3),
    ("[scenario]\nsigma = -2\n", 2),
    ("[scenario]\nweight_1 = one\n", 2),
    ("[grid]\nn = 1000\n", 2),
    ("[physics]\nmass_term = sigma_y\n", 2),
    ("[analysis]\ndetrend_order = 0\n", 2),
    ("[analysis]\nzitter_window = 6\nrsi_detrend_order = 0\n", 3),
    ("[physics]\nm = 1\nc = 1\nmass_term = sigma_y\n", 4),
    ("[scenario]\nfinal_state = gaussian\nfinal_weight_2 = 1+\n", 3),
    ("[output]\ndensity_stride = 0\n", 2),
])
def test_invalid_entries_report_their_line(text, line):
    with pytest.raises(ConfigError) as excinfo:
        parse_config_text(text, "run.ini")
    assert excinfo.value.line == line


def test_value_errors_keep_their_own_line():
    text = "[grid]\nn = 4096\n[scenario]\nt_f = 40\nweight_2 = oops\n"
    with pytest.raises(ConfigError) as excinfo:
        parse_config_text(text, "run.ini")
    assert excinfo.value.line == 5
    message = str(excinfo.value)
    assert message.startswith("run.ini:5: ")
    assert message.count("run.ini:") == 1


def test_malformed_files():
    with pytest.raises(ConfigError):
        parse_config_text("n = 4096\n")
    with pytest.raises(ConfigError) as excinfo:
        parse_config_text("[grid]\nn = 4096\nthis line has no separator\n")
    assert excinfo.value.line == 3
    with pytest.raises(ConfigError):
        parse_config_text("[grid]\nn = 1\nn = 2\n")


def test_gaussian_final_state():
    text = "[scenario]\nfinal_state = gaussian\nfinal_center = 3.0\nfinal_sigma = 1.5\n"
    scenario = parse_config_text(text).scenario
    final = scenario.build_final_field()
    assert final.time == scenario.t_f
    assert scenario.final_state is not None


def test_overrides_apply_on_top_of_the_file():
    config = parse_config_text("[grid]\nn = 2048\n", overrides={"grid": {"n": 8192}})
    assert config.scenario.grid.n == 8192
    with pytest.raises(ConfigError):
        parse_config_text("", overrides={"grid": {"depth": 1}})


def test_missing_file(tmp_path):
    path = str(tmp_path / "absent.ini")
    with pytest.raises(ConfigError) as excinfo:
        load_run_config(path)
    assert excinfo.value.path == path


def test_write_then_parse(tmp_path):
    path = os.path.join(str(tmp_path), "nested", "small.ini")
    write_config({"grid": {"x_min": -25.6, "x_max": 25.6, "n": 512}, "scenario": {"t_f": 2.0, "n_steps": 20}},
                 path, header="small\ninstance")
    with open(path, encoding="utf-8") as f:
        assert f.readline() == "# small\n"
    scenario = parse_scenario(path)
    assert scenario.grid.n == 512
    assert scenario.n_steps == 20


def test_shipped_configs_parse():
    root = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "configs")
    names = [name for name in os.listdir(root) if name.endswith(".ini")]
    assert "reference_default.ini" in names
    for name in names:
        load_run_config(os.path.join(root, name))
    assert parse_scenario(os.path.join(root, "reference_default.ini")).fingerprint() == reference_scenario().fingerprint()


def test_default_config_covers_every_section():
    assert set(DEFAULT_CONFIG) == {"grid", "physics", "scenario", "analysis", "output"}
