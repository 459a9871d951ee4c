import dataclasses
import math

import numpy as np
import pytest

from gsmhp.params import (
    ChannelParams,
    ConfigError,
    RadioParams,
    SystemGeometry,
    config_from_mapping,
    dbm_to_watts,
    default_config,
    load_config,
    load_config_file,
    most_square_factorization,
    noise_variance,
    validate_geometry,
    watts_to_dbm,
)

FIG5_GEOMETRY = dict(n_t=128, n_m=16, n_k=8, n_rf=14, n_s=8, rows_l=16, cols_r=8)


def test_dbm_to_watts_examples():
    assert dbm_to_watts(0.0) == 1e-3
    assert dbm_to_watts(30.0) == pytest.approx(1.0, rel=1e-12)
    assert dbm_to_watts(39.0) == pytest.approx(7.943, abs=1e-3)


def test_dbm_round_trip():
    for x in np.logspace(-15, 3, 181):
        assert dbm_to_watts(watts_to_dbm(x)) == pytest.approx(x, rel=1e-12)


def test_watts_to_dbm_rejects_nonpositive():
    with pytest.raises(ValueError):
        watts_to_dbm(0.0)


def test_noise_variance_examples():
    # hand evaluations: 10^(-17.4) mW/Hz times the band
    assert noise_variance(-174.0, 8e8) == pytest.approx(3.185e-12, abs=1e-15)
    assert noise_variance(-174.0, 1.0) == pytest.approx(3.981e-21, abs=1e-24)
    assert noise_variance(0.0, 1.0) == 1e-3


def test_noise_variance_linear_in_bandwidth_exactly():
    rng = np.random.default_rng(7)
    for _ in range(50):
        psd = rng.uniform(-200.0, 0.0)
        b = 10 ** rng.uniform(0.0, 9.0)
        assert noise_variance(psd, 2.0 * b) == 2.0 * noise_variance(psd, b)


def test_validate_geometry_accepts_reference_configuration():
    assert validate_geometry(SystemGeometry(**FIG5_GEOMETRY)) == []


def test_validate_geometry_boundary_n_rf():
    g = SystemGeometry(**{**FIG5_GEOMETRY, "n_rf": 16})
    violations = validate_geometry(g)
    assert len(violations) == 1 and "n_rf < n_m" in violations[0]


def test_validate_geometry_product_mismatch():
    g = SystemGeometry(**{**FIG5_GEOMETRY, "n_t": 100})
    joined = " ".join(validate_geometry(g))
    assert "n_t == n_m*n_k" in joined and "rows_l*cols_r" in joined


@pytest.mark.parametrize("field,value", [
    ("n_t", 129), ("n_m", 15), ("n_k", 9), ("rows_l", 10), ("cols_r", 9),
])
def test_validate_geometry_rejects_equality_perturbations(field, value):
    g = SystemGeometry(**{**FIG5_GEOMETRY, field: value})
    assert validate_geometry(g)


def test_validate_geometry_rejects_nonpositive_counts():
    g = SystemGeometry(**{**FIG5_GEOMETRY, "n_s": 0})
    assert any("positive" in v for v in validate_geometry(g))


def test_most_square_factorization():
    assert most_square_factorization(128) == (16, 8)
    assert most_square_factorization(64) == (8, 8)
    assert most_square_factorization(7) == (7, 1)
    assert most_square_factorization(1) == (1, 1)


def test_geometry_make_derives_total_and_array():
    g = SystemGeometry.make(n_m=16, n_k=8, n_rf=14, n_s=8)
    assert (g.n_t, g.rows_l, g.cols_r) == (128, 16, 8)


def test_radio_defaults_are_table_values():
    r = RadioParams()
    assert r.p_max_w == pytest.approx(dbm_to_watts(39.0))
    assert r.alpha == 0.38
    assert r.noise_variance_w == pytest.approx(3.185e-12, abs=1e-15)


@pytest.mark.parametrize("kwargs", [
    dict(alpha=0.0), dict(alpha=1.2), dict(tau=0.5),
    dict(p_max_w=-1.0), dict(l_bs_flops_per_w=0.0), dict(bandwidth_hz=-1.0),
])
def test_radio_validation(kwargs):
    with pytest.raises(ConfigError):
        RadioParams(**kwargs)


def test_channel_params_spacing_must_be_half_wavelength():
    good = ChannelParams()
    assert good.spacing_m == good.wavelength_m / 2.0
    ChannelParams(element_spacing_m=good.wavelength_m / 2.0)  # exact value passes
    with pytest.raises(ConfigError):
        ChannelParams(element_spacing_m=good.wavelength_m / 2.0 * 1.01)


@pytest.mark.parametrize("kwargs", [
    dict(n_ray=0), dict(user_dist_min_m=0.0),
    dict(user_dist_min_m=100.0, user_dist_max_m=100.0),
    dict(elevation_range="wide"), dict(shadowing_sigma_db=-1.0),
])
def test_channel_params_validation(kwargs):
    with pytest.raises(ConfigError):
        ChannelParams(**kwargs)


def test_load_config_file_parses_types(tmp_path):
    path = tmp_path / "sim.cfg"
    path.write_text(
        "# comment line\n"
        "n_rf = 10\n"
        "bandwidth_hz = 4e8   # trailing comment\n"
        "mode = equal-gain\n"
        "\n")
    values = load_config_file(path)
    assert values == {"n_rf": 10, "bandwidth_hz": 4e8, "mode": "equal-gain"}


def test_load_config_applies_overrides(tmp_path):
    path = tmp_path / "sim.cfg"
    path.write_text("n_rf = 10\nn_s = 4\n")
    cfg = load_config(path, overrides={"n_s": 6, "alpha": 0.5})
    assert cfg.geometry.n_rf == 10
    assert cfg.geometry.n_s == 6
    assert cfg.radio.alpha == 0.5
    assert cfg.mode == "idealized-zf"


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown config keys"):
        config_from_mapping({"n_rff": 3})


def test_config_rejects_inconsistent_n_t():
    with pytest.raises(ConfigError, match="n_t"):
        config_from_mapping({"n_t": 100})


def test_config_rejects_bad_syntax(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("just some words\n")
    with pytest.raises(ConfigError):
        load_config_file(path)


def test_default_config_is_valid():
    cfg = default_config()
    assert validate_geometry(cfg.geometry) == []
    assert cfg.gain_model == "active-set"


def test_params_are_immutable():
    cfg = default_config()
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.radio.alpha = 0.5


def test_config_knob_validation():
    with pytest.raises(ConfigError):
        config_from_mapping({"mode": "nonsense"})
    with pytest.raises(ConfigError):
        config_from_mapping({"gain_model": "nonsense"})
