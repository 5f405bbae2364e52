"""
Content-addressed cache for calibration grid cells.
"""

import json
import os
import tempfile
from pathlib import Path
from typing import Optional

from src.utils.logging_utils import get_logger

logger = get_logger(__name__)

CACHE_ENV = "DRMC_CACHE_DIR"


def atomic_write_text(path: Path, text: str) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


class GridCache:
    """One JSON file per cell, named by the SHA-256 of the cell parameters."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.hits = 0
        self.misses = 0

    @classmethod
    def from_env(cls, directory: Optional[str] = None) -> Optional["GridCache"]:
        """Cache at ``directory`` or DRMC_CACHE_DIR; None when neither is set."""
        directory = directory or os.getenv(CACHE_ENV)
        return cls(directory) if directory else None

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> Optional[dict]:
        path = self._path(key)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            self.misses += 1
            return None
        except json.JSONDecodeError:
            logger.warning("Ignoring unreadable cache entry %s", path.name)
            self.misses += 1
            return None
        self.hits += 1
        return payload

    def put(self, key: str, payload: dict) -> None:
        atomic_write_text(self._path(key), json.dumps(payload, sort_keys=True))

    @property
    def stats(self) -> dict:
        return {"hits": self.hits, "misses": self.misses}
