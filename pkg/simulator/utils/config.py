"""
Configuration Module for the QEC Simulator

Builds a RunConfig from, lowest precedence first: model defaults, the
environment (.env via python-dotenv), a sectioned key-value file, and
command-line flags.
"""

import os
import re
import logging
import configparser
from typing import Any, Dict, Optional, Tuple

from dotenv import load_dotenv
from pydantic import ValidationError

from ..schemas.run_config import RunConfig
from .errors import ConfigError

logger = logging.getLogger(__name__)

SECTIONS = ("bath", "qec", "run", "analysis")

ENV_KEYS = {
    "QECSIM_LOG_LEVEL": "log_level",
    "QECSIM_WORKERS": "workers",
    "QECSIM_OUTPUT_DIR": "output_path",
    "QECSIM_KERNEL_METHOD": "kernel_method",
}

_KEY_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*[=:]")


def config_keys() -> Dict[str, str]:
    """Config-file key -> RunConfig field name (aliases included)."""
    keys = {}
    for name, model_field in RunConfig.__fields__.items():
        keys[model_field.alias] = name
    return keys


def env_overrides() -> Dict[str, str]:
    load_dotenv()
    values = {}
    for env_name, key in ENV_KEYS.items():
        value = os.getenv(env_name)
        if value:
            values[key] = value
    return values


def _key_lines(text: str) -> Dict[str, int]:
    lines = {}
    for number, line in enumerate(text.splitlines(), start=1):
        match = _KEY_LINE.match(line)
        if match:
            lines.setdefault(match.group(1), number)
    return lines


def read_config_file(path: str) -> Tuple[Dict[str, str], Dict[str, int]]:
    """
    Parse a config file into {key: raw value} plus the line each key is set on.

    Raises:
        ConfigError: unreadable file, syntax error, unknown section or key,
            or a key repeated across sections
    """
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e.strerror}")

    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text, source=path)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError(f"{path}: key outside any section", e.lineno)
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as e:
        raise ConfigError(f"{path}: {e.message}", e.lineno)
    except configparser.ParsingError as e:
        line = e.errors[0][0] if e.errors else None
        raise ConfigError(f"{path}: malformed line", line)

    lines = _key_lines(text)
    known = config_keys()
    values: Dict[str, str] = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, value in parser.items(section):
            if key not in known:
                raise ConfigError(f"{path}: unknown key '{key}'", lines.get(key))
            if key in values:
                raise ConfigError(f"{path}: key '{key}' is set in more than one section", lines.get(key))
            values[key] = value
    return values, lines


def load_config(path: Optional[str] = None, flags: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Merge every configuration layer and validate the result.

    Args:
        path: Optional config file
        flags: Command-line overrides keyed by config key (None values ignored)

    Returns:
        Validated RunConfig
    """
    merged: Dict[str, Any] = dict(env_overrides())
    lines: Dict[str, int] = {}
    if path:
        file_values, lines = read_config_file(path)
        merged.update(file_values)
        logger.debug(f"Loaded {len(file_values)} keys from {path}")
    merged.update({key: value for key, value in (flags or {}).items() if value is not None})

    try:
        return RunConfig(**merged)
    except ValidationError as e:
        first = e.errors()[0]
        key = str(first["loc"][0]) if first["loc"] else "config"
        raise ConfigError(f"invalid value for '{key}': {first['msg']}", lines.get(key))
