import logging
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import config
from qmahg.logging import level_from_name


@pytest.fixture
def write_config(tmp_path):
    def _write(text):
        path = tmp_path / "settings.env"
        path.write_text(text)
        return str(path)
    return _write


def test_no_config_file():
    assert config.load_config_file(None) == {}
    assert config.load_config_file("") == {}


def test_missing_config_file(tmp_path):
    with pytest.raises(ValueError, match="not found"):
        config.load_config_file(str(tmp_path / "absent.env"))


def test_typed_values(write_config):
    path = write_config("N=2\nmode=float\nseed=42\ntol=1e-6\nlog-level=debug\nrule=trapezoid\n# comment\n")
    settings = config.load_config_file(path)
    assert settings == {"n": 2, "mode": "float", "seed": 42, "tol": 1e-6, "log_level": "debug",
                        "rule": "trapezoid"}


@pytest.mark.parametrize("text", ["seeds=1\n", "n=two\n", "mode=complex\n", "tol=small\n"])
def test_rejected_values(write_config, text):
    with pytest.raises(ValueError):
        config.load_config_file(write_config(text))


def test_validate_mode():
    assert config.validate_mode("rational") == "rational"
    with pytest.raises(ValueError):
        config.validate_mode("exact")


def test_log_levels():
    assert level_from_name("debug") == logging.DEBUG
    assert level_from_name("WARNING") == logging.WARNING
    with pytest.raises(ValueError):
        level_from_name("chatty")


def test_cli_resolution_uses_config_defaults(monkeypatch):
    import qmahg_cli

    monkeypatch.setattr(qmahg_cli, "DEFAULT_SEED", 99)
    args = qmahg_cli.build_parser().parse_args(["density", "--fn", "x1"])
    settings = qmahg_cli.resolve_settings(args, {"n": 2})
    assert settings.n == 2
    assert settings.seed == 99
    assert settings.mode == config.DEFAULT_MODE
    assert args.points is None and args.rule is None
