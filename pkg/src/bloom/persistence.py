"""Persistence contract and its two desk-scale implementations.

Documents are JSON objects addressed by (userId, collection, documentId).
Writes for one user apply in submission order and reads observe completed
writes; that per-user ordering is the only consistency the engine needs.
"""

from __future__ import annotations

import json
import os
import re
import threading
from pathlib import Path
from typing import Dict, List, Optional, Protocol, Tuple

COLLECTIONS = ("plans", "gardens", "sessions", "memories", "notifications",
               "healthSamples", "usageEvents")

_SAFE_ID = re.compile(r"^[A-Za-z0-9._:@-]+$")


def _check_address(user_id: str, collection: str, doc_id: Optional[str] = None) -> None:
    if collection not in COLLECTIONS:
        raise ValueError(f"unknown collection: {collection!r}")
    for part in (user_id, doc_id):
        if part is not None and not _SAFE_ID.match(part):
            raise ValueError(f"unsafe document address component: {part!r}")


class PersistenceStore(Protocol):
    def get(self, user_id: str, collection: str, doc_id: str) -> Optional[dict]: ...

    def put(self, user_id: str, collection: str, doc_id: str, doc: dict) -> None: ...

    def delete(self, user_id: str, collection: str, doc_id: str) -> None: ...

    def list_docs(self, user_id: str, collection: str) -> List[Tuple[str, dict]]: ...


class InMemoryStore:
    def __init__(self):
        self._data: Dict[str, Dict[str, Dict[str, dict]]] = {}
        self._locks: Dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def _lock_for(self, user_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(user_id, threading.Lock())

    def get(self, user_id: str, collection: str, doc_id: str) -> Optional[dict]:
        _check_address(user_id, collection, doc_id)
        with self._lock_for(user_id):
            doc = self._data.get(user_id, {}).get(collection, {}).get(doc_id)
            return json.loads(json.dumps(doc)) if doc is not None else None

    def put(self, user_id: str, collection: str, doc_id: str, doc: dict) -> None:
        _check_address(user_id, collection, doc_id)
        snapshot = json.loads(json.dumps(doc))  # store is not aliased to caller state
        with self._lock_for(user_id):
            self._data.setdefault(user_id, {}).setdefault(collection, {})[doc_id] = snapshot

    def delete(self, user_id: str, collection: str, doc_id: str) -> None:
        _check_address(user_id, collection, doc_id)
        with self._lock_for(user_id):
            self._data.get(user_id, {}).get(collection, {}).pop(doc_id, None)

    def list_docs(self, user_id: str, collection: str) -> List[Tuple[str, dict]]:
        _check_address(user_id, collection)
        with self._lock_for(user_id):
            docs = self._data.get(user_id, {}).get(collection, {})
            return [(doc_id, json.loads(json.dumps(doc))) for doc_id, doc in sorted(docs.items())]


class FileStore:
    """One JSON file per document under root/user/collection/doc.json.

    Writes are atomic (temp file + rename), so a crash never leaves a
    half-written document behind.
    """

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: Dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def _lock_for(self, user_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(user_id, threading.Lock())

    def _path(self, user_id: str, collection: str, doc_id: str) -> Path:
        return self.root / user_id / collection / f"{doc_id}.json"

    def get(self, user_id: str, collection: str, doc_id: str) -> Optional[dict]:
        _check_address(user_id, collection, doc_id)
        with self._lock_for(user_id):
            path = self._path(user_id, collection, doc_id)
            if not path.exists():
                return None
            return json.loads(path.read_text(encoding="utf-8"))

    def put(self, user_id: str, collection: str, doc_id: str, doc: dict) -> None:
        _check_address(user_id, collection, doc_id)
        with self._lock_for(user_id):
            path = self._path(user_id, collection, doc_id)
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")
            os.replace(tmp, path)

    def delete(self, user_id: str, collection: str, doc_id: str) -> None:
        _check_address(user_id, collection, doc_id)
        with self._lock_for(user_id):
            path = self._path(user_id, collection, doc_id)
            if path.exists():
                path.unlink()

    def list_docs(self, user_id: str, collection: str) -> List[Tuple[str, dict]]:
        _check_address(user_id, collection)
        with self._lock_for(user_id):
            folder = self.root / user_id / collection
            if not folder.exists():
                return []
            out = []
            for path in sorted(folder.glob("*.json")):
                out.append((path.stem, json.loads(path.read_text(encoding="utf-8"))))
            return out
