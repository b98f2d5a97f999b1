import json

import pytest

from xwalk.config import load_config, parse_config
from xwalk.errors import ConfigError

MINIMAL = {
    "regions": [
        {"name": "a", "bottom_left": [0.0, 0.0], "top_right": [0.01, 0.01]},
    ]
}


def write_config(tmp_path, raw):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(raw), encoding="utf-8")
    return path


def test_minimal_config_defaults(tmp_path):
    config = load_config(write_config(tmp_path, MINIMAL))
    assert config.provider == "sim"
    assert config.seed == 0
    assert config.thresholds.max_dimension_deg == 0.25
    assert config.thresholds.sector_half_angle_deg == 35.0
    assert config.thresholds.sector_min_dist_deg == 5e-5
    assert config.thresholds.sector_max_dist_deg == 2.5e-4
    assert config.split.test_fraction == 0.25
    assert config.split.negative_ratio == 2.0
    assert config.regions[0].name == "a"
    assert config.regions[0].region.top_right.lat == 0.01


def test_nested_sections_parsed(tmp_path):
    raw = dict(MINIMAL)
    raw.update(
        {
            "seed": 7,
            "provider": "live",
            "thresholds": {"min_sites": 5},
            "sim": {"n_sites": 80},
            "split": {"test_fraction": 0.3},
            "rate_limits": {"imagery": 10.0},
            "daily_caps": {"imagery": 1000},
        }
    )
    config = load_config(write_config(tmp_path, raw))
    assert config.seed == 7
    assert config.provider == "live"
    assert config.thresholds.min_sites == 5
    assert config.thresholds.max_sites == 2000  # untouched default
    assert config.sim.n_sites == 80
    assert config.split.test_fraction == 0.3
    assert config.rate_limits == {"imagery": 10.0}
    assert config.daily_caps == {"imagery": 1000}


def test_overrides_win(tmp_path):
    path = write_config(tmp_path, {**MINIMAL, "seed": 1, "provider": "sim"})
    config = load_config(path, {"seed": 99, "provider": None})
    assert config.seed == 99
    assert config.provider == "sim"  # None override is ignored


def test_unknown_keys_rejected(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, {**MINIMAL, "sead": 3}))
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, {**MINIMAL, "thresholds": {"min_site": 1}}))


def test_region_validation():
    with pytest.raises(ConfigError):
        parse_config({"regions": []})
    with pytest.raises(ConfigError):
        parse_config({"regions": [{"bottom_left": [0, 0], "top_right": [1, 1]}]})
    with pytest.raises(ConfigError):
        parse_config(
            {"regions": [{"name": "x", "bottom_left": [0], "top_right": [1, 1]}]}
        )
    with pytest.raises(ConfigError):
        # Degenerate: top_right not above bottom_left.
        parse_config(
            {"regions": [{"name": "x", "bottom_left": [1, 1], "top_right": [0, 0]}]}
        )


def test_value_validation():
    with pytest.raises(ConfigError):
        parse_config({**MINIMAL, "provider": "carrier-pigeon"})
    with pytest.raises(ConfigError):
        parse_config({**MINIMAL, "parallelism": 0})
    with pytest.raises(ConfigError):
        parse_config({**MINIMAL, "thresholds": {"sector_min_dist_deg": 3e-4}})


def test_bad_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{broken", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
