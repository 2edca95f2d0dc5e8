import pytest

import semifold as sf
from semifold.config import (CANONICAL_CONFIG, build_scenario_instance,
                             load_config, parse_config)
from semifold.errors import ConfigError

SMALL = CANONICAL_CONFIG.replace("n = 4000", "n = 400")


def test_round_trip_stability():
    cfg = parse_config(CANONICAL_CONFIG)
    again = parse_config(cfg.serialize())
    assert again.serialize() == cfg.serialize()
    assert again.scenario_id() == cfg.scenario_id()


def test_scenario_id_tracks_content():
    cfg = parse_config(CANONICAL_CONFIG)
    other = parse_config(CANONICAL_CONFIG.replace("t = 0.0", "t = 1.0"))
    assert cfg.scenario_id() != other.scenario_id()
    assert len(cfg.scenario_id()) == 12


def test_missing_section_named_in_error():
    text = "\n".join(line for line in CANONICAL_CONFIG.splitlines()
                     if "forcing" not in line and "t = 0.0" not in line
                     and "f1 = zero" not in line)
    with pytest.raises(ConfigError, match=r"\[forcing\]"):
        parse_config(text)


def test_bad_values_rejected():
    with pytest.raises(ConfigError):
        parse_config(CANONICAL_CONFIG.replace("n = 4000", "n = 2"))
    with pytest.raises(ConfigError):
        parse_config(CANONICAL_CONFIG.replace("r = 40.0", "r = -1.0"))
    with pytest.raises(ConfigError):
        parse_config(CANONICAL_CONFIG.replace(
            "farfield = robin_decay", "farfield = absorbing"))
    with pytest.raises(ConfigError):
        parse_config(CANONICAL_CONFIG.replace(
            "preset = rational_decay", "preset = mystery"))
    with pytest.raises(ConfigError):
        parse_config(CANONICAL_CONFIG.replace("r = 40.0", "r = forty"))


def test_load_config(tmp_path):
    path = tmp_path / "s.ini"
    path.write_text(SMALL)
    cfg = load_config(path)
    assert cfg.grid["n"] == "400"


def test_built_instance_matches_canonical():
    cfg = parse_config(CANONICAL_CONFIG.replace("n = 4000", "n = 500"))
    inst = build_scenario_instance(cfg)
    ref = sf.canonical_instance(R=40.0, n=500)
    assert inst.eigen.lambda1 == pytest.approx(ref.eigen.lambda1, rel=1e-12)
    assert inst.nonlinearity.mu_lower == pytest.approx(
        ref.nonlinearity.mu_lower, rel=1e-12)


def test_linear_preset_skips_straddle_check():
    text = SMALL.replace(
        "preset = smooth_ramp", "preset = linear"
    ).replace("mu_lower_factor = 0.5", "slope = 0.1"
              ).replace("mu_upper_factor = 2.0", "").replace("offset = 1.0", "")
    cfg = parse_config(text)
    inst = build_scenario_instance(cfg)
    assert inst.eigen is not None
    assert inst.nonlinearity.preset_id == "linear"


def test_table_weight_preset():
    text = SMALL.replace("preset = rational_decay",
                         "preset = table\ntable = 0:1, 10:0.5, 40:0.1"
                         ).replace("power = 3.0", "")
    cfg = parse_config(text)
    inst = build_scenario_instance(cfg)
    assert inst.weight_values[0] == pytest.approx(1.0)
    assert inst.weight_values[-1] == pytest.approx(0.1)
