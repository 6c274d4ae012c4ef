import json

import pytest

from cli import config as cfg
from cli import streamer
from errors import ConfigError


def test_load_config_defaults_and_overrides(isolated_home):
    assert cfg.load_config() == cfg.DEFAULTS
    isolated_home.mkdir()
    cfg.CONFIG_FILE.write_text(json.dumps({"max_queries": 50}))
    config = cfg.load_config()
    assert config["max_queries"] == 50
    assert config["workers"] == cfg.DEFAULTS["workers"]


def test_load_config_rejects_garbage(isolated_home):
    isolated_home.mkdir()
    cfg.CONFIG_FILE.write_text("{not json")
    with pytest.raises(ConfigError):
        cfg.load_config()


def test_parse_kv_file(tmp_path):
    path = tmp_path / "a.conf"
    path.write_text("# comment\n\nN-Range = 4..8:2\ntrials=3\n")
    assert cfg.parse_kv_file(path) == {"n_range": "4..8:2", "trials": "3"}
    with pytest.raises(ConfigError):
        cfg.parse_kv_file(tmp_path / "missing.conf")


@pytest.mark.parametrize("text, expected", [
    ("8,10,12", [8, 10, 12]),
    ("4..6", [4, 5, 6]),
    (" 8..16:4 ", [8, 12, 16]),
])
def test_parse_n_range(text, expected):
    assert cfg.parse_n_range(text) == expected


def test_quiet_silences_emit_but_not_fail(capsys):
    streamer.set_quiet(True)
    streamer.emit("hidden")
    streamer.check_line("parseval", True, "ok")
    streamer.fail("broken")
    out, err = capsys.readouterr()
    assert out == ""
    assert "broken" in err
    streamer.set_quiet(False)
    streamer.check_line("parseval", False, "x" * 500)
    out, _ = capsys.readouterr()
    assert "parseval" in out and "x" * 121 not in out
