"""Configuration management for HiddenShift"""
from pathlib import Path
import json
import os
import sys

from errors import ConfigError

# Color codes for terminal output
class C:
    RESET = '\033[0m'
    BOLD = '\033[1m'
    GRAY = '\033[90m'
    RED = '\033[91m'
    GREEN = '\033[92m'
    YELLOW = '\033[93m'
    CYAN = '\033[96m'


def disable_colors():
    for name in ("RESET", "BOLD", "GRAY", "RED", "GREEN", "YELLOW", "CYAN"):
        setattr(C, name, "")


if os.environ.get("NO_COLOR") or not sys.stdout.isatty():
    disable_colors()

# Config file locations
CONFIG_DIR = Path(os.environ.get("HIDDENSHIFT_HOME", Path.home() / ".hiddenshift"))
CONFIG_FILE = CONFIG_DIR / "config.json"
HISTORY_FILE = CONFIG_DIR / "history.json"

# Tunables
MAX_N             = 28   # largest table the WHT accepts
MAX_CLASSICAL_N   = 26   # candidate mask is 2^n bytes
EXACT_WHT_MAX_N   = 20   # integer butterfly is the reference path up to here
STATE_DUMP_MAX_N  = 10
PROMISE_CONSTANT  = 4    # cutoff = ceil(C * n * ln(1/eps) / sqrt(delta))
SCHEMA_VERSION    = 1
MAX_SWEEP_BYTES   = 2 * 1024 ** 3

DEFAULTS = {
    "max_queries":   1_000_000,
    "workers":       1,
    "history_limit": 100,
}


def ensure_config_dir():
    """Ensure config directory exists"""
    CONFIG_DIR.mkdir(parents=True, exist_ok=True)

def load_config():
    """Load configuration from file, filling in defaults"""
    config = dict(DEFAULTS)
    if CONFIG_FILE.exists():
        try:
            with open(CONFIG_FILE) as f:
                config.update(json.load(f))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"unreadable config {CONFIG_FILE}: {e}")
    return config


def parse_kv_file(path) -> dict:
    """
    Parse a flat `key=value` file. Blank lines and `#` comments are skipped.
    Values stay strings; callers convert.
    """
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}")

    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got '{line}'")
        key, _, value = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key '{key}'")
        values[key] = value.strip()
    return values


def parse_n_range(text: str) -> list[int]:
    """`8,10,12` or `8..16` or `8..16:2` (inclusive)."""
    text = text.strip()
    try:
        if ".." in text:
            bounds, _, step = text.partition(":")
            lo, _, hi = bounds.partition("..")
            return list(range(int(lo), int(hi) + 1, int(step) if step else 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"bad n range '{text}'")
