import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from cli import config as cfg  # noqa: E402
from cli.streamer import set_quiet  # noqa: E402


@pytest.fixture(autouse=True)
def isolated_home(tmp_path, monkeypatch):
    """Point config and history at a scratch directory; keep output quiet."""
    home = tmp_path / "home"
    monkeypatch.setattr(cfg, "CONFIG_DIR", home)
    monkeypatch.setattr(cfg, "CONFIG_FILE", home / "config.json")
    monkeypatch.setattr(cfg, "HISTORY_FILE", home / "history.json")
    set_quiet(True)
    yield home
    set_quiet(False)
