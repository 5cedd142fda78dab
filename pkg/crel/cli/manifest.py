"""
Provenance manifest written next to every command's outputs.
"""

import json
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

from crel import __version__
from crel.core.audit import RunLogger
from crel.core.models import RunConfig

MANIFEST_NAME = "manifest.json"


def snapshot(out_dir: Union[str, Path]) -> Dict[str, int]:
    """Modification times of the files directly under ``out_dir``."""
    out = Path(out_dir)
    if not out.is_dir():
        return {}
    return {p.name: p.stat().st_mtime_ns for p in out.iterdir() if p.is_file()}


def written_since(out_dir: Union[str, Path], before: Dict[str, int]) -> List[Path]:
    """Files under ``out_dir`` created or rewritten after ``before`` was taken."""
    out = Path(out_dir)
    return [out / name for name, mtime in snapshot(out).items()
            if name != MANIFEST_NAME and before.get(name) != mtime]


def write_manifest(out_dir: Union[str, Path], command: str, config: RunConfig, seed: int,
                   artifacts: Iterable[Union[str, Path]], error: Optional[str] = None) -> Path:
    """
    Write ``manifest.json``: command, resolved config, seed, version, artifacts
    and the error code of a failed run (null on success).

    Keys are sorted and no timestamps are recorded, so identical runs give
    identical manifests.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = sorted(Path(a).name for a in artifacts)
    manifest = {
        "command": command,
        "config": config.model_dump(mode="json"),
        "seed": seed,
        "version": __version__,
        "artifacts": names,
        "error": error,
    }
    path = out / MANIFEST_NAME
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    RunLogger.log_manifest_written(str(path), names)
    return path
