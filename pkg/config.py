# config.py - Runtime configuration (metric parameters, tool version, app base dir)
#
# Single place for loading configuration. The CLI and the services import
# from here instead of reading config files themselves.
# Precedence: command-line flags > config file > preset (DEFAULT_METRIC_CONFIG
# unless --preset names another entry of METRIC_PRESETS).

import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Mapping, Optional

from domain.models import MetricConfig

logger = logging.getLogger(__name__)

DEFAULT_METRIC_CONFIG = MetricConfig(
    lam=0.5, alpha=1.0, metric_terms=60, circle_samples=4096
)
# quick runs of large estimate samples; chosen explicitly with --preset coarse
COARSE_METRIC_CONFIG = MetricConfig(
    lam=0.5, alpha=1.0, metric_terms=20, circle_samples=16
)
METRIC_PRESETS = {
    "default": DEFAULT_METRIC_CONFIG,
    "coarse": COARSE_METRIC_CONFIG,
}

VERSION_FILE = "VERSION"
FALLBACK_VERSION = "0.0.0"

# config-file key -> MetricConfig field
CONFIG_KEYS = {
    "lambda": "lam",
    "alpha": "alpha",
    "metric_terms": "metric_terms",
    "circle_samples": "circle_samples",
}


def get_app_base_dir() -> Path:
    """App directory (install dir when frozen, script dir when run from source)."""
    if getattr(sys, "frozen", False):
        return Path(sys.executable).resolve().parent
    return Path(__file__).resolve().parent


def get_tool_version() -> str:
    """Contents of the VERSION file next to the app, or FALLBACK_VERSION."""
    path = get_app_base_dir() / VERSION_FILE
    try:
        version = path.read_text(encoding="utf-8").strip()
    except OSError:
        logger.warning("VERSION file not found at %s; using %s", path, FALLBACK_VERSION)
        return FALLBACK_VERSION
    return version or FALLBACK_VERSION


def load_config_file(path: Path) -> dict[str, Any]:
    """
    Read a JSON config file and return MetricConfig field overrides.
    Keys starting with "_" are comments. Unknown keys raise ValueError;
    unreadable files raise OSError.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"Config file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ValueError(f"Config file {path} must contain a JSON object")
    overrides: dict[str, Any] = {}
    for key, value in data.items():
        if key.startswith("_"):
            continue
        if key not in CONFIG_KEYS:
            raise ValueError(
                f"Unknown config key {key!r} in {path}; "
                f"expected one of {sorted(CONFIG_KEYS)}"
            )
        overrides[CONFIG_KEYS[key]] = value
    return overrides


def metric_preset(name: str) -> MetricConfig:
    try:
        return METRIC_PRESETS[name]
    except KeyError:
        raise ValueError(
            f"Unknown metric preset {name!r}; expected one of {sorted(METRIC_PRESETS)}"
        )


def resolve_metric_config(
    path: Optional[Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    base: MetricConfig = DEFAULT_METRIC_CONFIG,
) -> MetricConfig:
    """
    Build the effective MetricConfig: base, then the config file, then
    `overrides` (MetricConfig field names; None values are ignored).
    Validation errors from MetricConfig surface as ValueError.
    """
    cfg = base
    if path is not None:
        cfg = replace(cfg, **load_config_file(path))
        logger.info("Loaded metric config from %s", path)
    flags = {k: v for k, v in (overrides or {}).items() if v is not None}
    if flags:
        cfg = replace(cfg, **flags)
    return cfg
