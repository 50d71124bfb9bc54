"""Content-addressed, resumable store of computed result cells.

Layout::

    root/
      manifest.json          cell key -> {path, checksum, kind}
      cells/ab/abcdef....json

Cell files are written to a temporary name and renamed into place, so a
reader never sees a partial file. Only the manifest update takes a lock.
"""
from __future__ import annotations

import hashlib
import json
import os
import shutil
import tempfile
from pathlib import Path

from filelock import FileLock

from ..exceptions import StoreCorruption


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def cell_key(description: dict) -> str:
    return hashlib.sha256(canonical(description).encode()).hexdigest()


def checksum(payload) -> str:
    return hashlib.sha256(canonical(payload).encode()).hexdigest()


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class ResultStore:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = FileLock(str(self.root / ".manifest.lock"))

    @property
    def manifest_path(self) -> Path:
        return self.root / "manifest.json"

    def _cell_path(self, key: str) -> Path:
        return self.root / "cells" / key[:2] / f"{key}.json"

    def manifest(self) -> dict:
        if not self.manifest_path.exists():
            return {}
        with open(self.manifest_path) as fh:
            return json.load(fh)

    def __contains__(self, key: str) -> bool:
        return self._cell_path(key).exists()

    def get(self, key: str):
        """Stored payload for ``key``, or ``None`` if absent.

        Raises
        ------
        StoreCorruption
            If the file is unreadable or its checksum does not match.
        """
        path = self._cell_path(key)
        if not path.exists():
            return None
        try:
            with open(path) as fh:
                record = json.load(fh)
            payload = record["payload"]
            ok = record["key"] == key and record["checksum"] == checksum(payload)
        except (ValueError, KeyError, TypeError) as exc:
            raise StoreCorruption(f"cell {key[:12]}: {exc}") from None
        if not ok:
            raise StoreCorruption(f"cell {key[:12]}: checksum mismatch")
        return payload

    def put(self, key: str, payload, description: dict, metadata: dict = None):
        record = {
            "key": key,
            "checksum": checksum(payload),
            "description": description,
            "metadata": metadata or {},
            "payload": payload,
        }
        path = self._cell_path(key)
        _atomic_write(path, canonical(record))
        with self._lock:
            manifest = self.manifest()
            manifest[key] = {
                "path": str(path.relative_to(self.root)),
                "checksum": record["checksum"],
                "kind": description.get("kind"),
            }
            _atomic_write(self.manifest_path, json.dumps(manifest, indent=1, sort_keys=True))

    def discard(self, key: str):
        path = self._cell_path(key)
        if path.exists():
            path.unlink()

    def clear(self):
        if self.root.exists():
            shutil.rmtree(self.root)
        self.root.mkdir(parents=True, exist_ok=True)
