"""Content-addressed proof storage: one file per document, named by hash.

The store holds the full proof documents whose 32-byte digests ride on-chain
inside proof-reference carriers.  Integrity is the reader's job: a verifier
re-hashes whatever it fetches, so a store whose files were tampered with is
detected rather than trusted.
"""

from __future__ import annotations

import hashlib
from pathlib import Path


class ProofStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, digest: bytes) -> Path:
        return self.root / digest.hex()

    def put(self, data: bytes) -> bytes:
        digest = hashlib.sha256(data).digest()
        self._path(digest).write_bytes(data)
        return digest

    def get(self, digest: bytes) -> bytes:
        path = self._path(digest)
        if not path.is_file():
            raise KeyError(digest.hex())
        return path.read_bytes()

    def __contains__(self, digest: bytes) -> bool:
        return self._path(digest).is_file()
