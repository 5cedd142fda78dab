"""
Run configuration from a config file merged with command-line flags.

Config files are flat ``key = value`` text (``#`` starts a comment); files
ending in ``.yaml``/``.yml`` are read as a YAML mapping. Values are parsed
with YAML scalar rules, so ``true``, ``0.5`` and ``[1, 2]`` keep their types.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from pydantic import ValidationError

from crel.core.exceptions import UsageError
from crel.core.models import RunConfig

logger = logging.getLogger(__name__)


def _scalar(text: str) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError:
        return text


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Parse a config file into a dict.

    Raises:
        UsageError: If the file is missing or a line is not ``key = value``
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"Cannot read config file: {e}", {"path": str(path)})
    if path.suffix.lower() in (".yaml", ".yml"):
        try:
            values = yaml.safe_load(text) or {}
        except yaml.YAMLError as e:
            raise UsageError(f"Invalid YAML config: {e}", {"path": str(path)})
        if not isinstance(values, dict):
            raise UsageError("YAML config must be a mapping", {"path": str(path)})
        return {str(k).replace("-", "_"): v for k, v in values.items()}

    values: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"{path}:{lineno}: expected key = value", {"line": raw})
        values[key.strip().replace("-", "_")] = _scalar(value.strip())
    return values


def build_run_config(file_values: Optional[Dict[str, Any]], flags: Dict[str, Any]) -> RunConfig:
    """
    Merge config-file values with flags (flags win) into a RunConfig.

    Flags left at None do not override the file.

    Raises:
        UsageError: On unknown keys or invalid values
    """
    merged = dict(file_values or {})
    merged.update({k: v for k, v in flags.items() if v is not None})
    try:
        return RunConfig.model_validate(merged)
    except ValidationError as e:
        raise UsageError("Invalid run configuration",
                         {"errors": [f"{'.'.join(map(str, err['loc']))}: {err['msg']}"
                                     for err in e.errors()]})
