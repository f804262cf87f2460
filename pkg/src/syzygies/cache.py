"""On-disk cache of single Betti numbers ``k_{p,q}``, one JSON file per entry."""

from __future__ import annotations

import hashlib
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Any

from . import __version__

STATS_FILE = "session-stats.json"


def default_dir() -> Path:
    env = os.environ.get("KOSZUL_CACHE_DIR")
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "syzygies"


def entry_key(spaces, b, l, prime: int, p: int, q: int) -> str:
    canon = json.dumps({"spaces": list(spaces), "b": list(b), "l": list(l), "prime": int(prime),
                        "p": int(p), "q": int(q)}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


class ResultCache:
    """Fail-open cache: unreadable entries count as misses, unwritable directories disable it."""

    def __init__(self, directory: str | Path | None = None, enabled: bool = True):
        self.dir = Path(directory) if directory is not None else default_dir()
        self.enabled = enabled
        self.hits = 0
        self.misses = 0
        if enabled:
            try:
                self.dir.mkdir(parents=True, exist_ok=True)
                probe = tempfile.NamedTemporaryFile(dir=self.dir, delete=True)
                probe.close()
            except OSError as exc:
                _warn(f"cache directory {self.dir} is not writable ({exc}); caching disabled")
                self.enabled = False

    def _path(self, key: str) -> Path:
        return self.dir / f"{key}.json"

    def get(self, spaces, b, l, prime, p, q) -> int | None:
        if not self.enabled:
            return None
        path = self._path(entry_key(spaces, b, l, prime, p, q))
        if not path.exists():
            self.misses += 1
            return None
        try:
            data = json.loads(path.read_text())
            ok = (data["engine"] == __version__ and data["p"] == p and data["q"] == q
                  and data["spaces"] == list(spaces) and data["prime"] == prime)
            dim = int(data["dim"])
        except (OSError, ValueError, KeyError, TypeError) as exc:
            _warn(f"ignoring corrupt cache entry {path.name}: {exc}")
            self.misses += 1
            return None
        if not ok or dim < 0:
            self.misses += 1
            return None
        self.hits += 1
        return dim

    def put(self, spaces, b, l, prime, p, q, dim: int, seconds: float | None = None) -> None:
        if not self.enabled:
            return
        payload = {"spaces": list(spaces), "b": list(b), "l": list(l), "prime": int(prime),
                   "p": int(p), "q": int(q), "dim": int(dim), "seconds": seconds, "engine": __version__}
        self._atomic_write(self._path(entry_key(spaces, b, l, prime, p, q)), json.dumps(payload, sort_keys=True))

    def _atomic_write(self, path: Path, text: str) -> None:
        try:
            fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=".tmp-", suffix=".json")
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except OSError as exc:
            _warn(f"could not write cache entry ({exc}); caching disabled")
            self.enabled = False

    def entries(self) -> list[dict[str, Any]]:
        out = []
        if not self.dir.is_dir():
            return out
        for path in sorted(self.dir.glob("*.json")):
            if path.name == STATS_FILE or path.name.startswith(".tmp-"):
                continue
            try:
                data = json.loads(path.read_text())
                data["key"] = path.stem
                out.append(data)
            except (OSError, ValueError) as exc:
                _warn(f"unreadable cache entry {path.name}: {exc}")
        return out

    def clear(self) -> int:
        n = 0
        if not self.dir.is_dir():
            return 0
        for path in self.dir.glob("*.json"):
            try:
                path.unlink()
                n += 1
            except OSError as exc:
                _warn(f"could not remove {path.name}: {exc}")
        return n

    def save_session(self) -> None:
        """Record this process's hit/miss counts for a later ``cache stat``."""
        if self.enabled:
            self._atomic_write(self.dir / STATS_FILE, json.dumps({"hits": self.hits, "misses": self.misses}))

    def last_session(self) -> dict[str, int]:
        try:
            return json.loads((self.dir / STATS_FILE).read_text())
        except (OSError, ValueError):
            return {"hits": 0, "misses": 0}
