from __future__ import annotations

import pytest

from villa.config import Config, ConfigError, apply_overrides, load_config


def test_defaults_match_documented_constants():
    cfg = load_config(None)
    assert cfg.k == 150
    assert cfg.t == 0.5
    assert cfg.k_a == 160
    assert cfg.k_c == 160
    assert cfg.chunk_size == 1000
    assert cfg.chunk_overlap == 100
    assert cfg.abstract_limit == 5000
    assert cfg.iterations == 5
    assert cfg.t_level2 is None


def test_file_overrides_defaults(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text("k_a = 80\nt = 0.4\n", encoding="utf-8")
    cfg = load_config(path)
    assert cfg.k_a == 80
    assert cfg.t == 0.4
    assert cfg.k == 150  # untouched default


def test_flags_override_file(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text("k_a = 80\n", encoding="utf-8")
    cfg = apply_overrides(load_config(path), k_a=20)
    assert cfg.k_a == 20


def test_precedence_per_key(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text("k_a = 80\nk_c = 70\niterations = 2\n", encoding="utf-8")
    cfg = apply_overrides(load_config(path), k_a=20, iterations=None)
    assert cfg.k_a == 20  # flag wins
    assert cfg.k_c == 70  # file wins
    assert cfg.iterations == 2  # None flag defers to file
    assert cfg.k == 150  # default

def test_unknown_key_lists_valid_keys(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text("chunk_len = 100\n", encoding="utf-8")
    with pytest.raises(ConfigError) as excinfo:
        load_config(path)
    assert "chunk_len" in str(excinfo.value)
    assert "chunk_size" in str(excinfo.value)


def test_out_of_range_values_rejected(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text("t = 3.5\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="t must be"):
        load_config(path)


def test_overlap_ge_chunk_size_rejected(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text("chunk_size = 1000\nchunk_overlap = 1000\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="chunk_overlap"):
        load_config(path)


def test_invalid_toml_reported(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text("k_a = = 2\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="invalid TOML"):
        load_config(path)


def test_negative_and_zero_rejected():
    with pytest.raises(ConfigError):
        apply_overrides(Config(), k=0)
    with pytest.raises(ConfigError):
        apply_overrides(Config(), iterations=-1)


def test_unknown_override_key_rejected():
    with pytest.raises(ConfigError, match="nope"):
        apply_overrides(Config(), nope=3)
