"""Merkle commitments over block transaction ids.

Single-leaf trees have the leaf as root and an empty path; odd levels pair
the last node with itself.  Paths record the sibling and which side it sits
on, which is everything a header-only client needs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

EMPTY_ROOT = b"\x00" * 32


def _pair(left: bytes, right: bytes) -> bytes:
    return hashlib.sha256(left + right).digest()


@dataclass(frozen=True)
class PathNode:
    sibling: bytes
    sibling_on_left: bool


def merkle_root(txids: list[bytes]) -> bytes:
    if not txids:
        return EMPTY_ROOT
    level = list(txids)
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        level = [_pair(level[i], level[i + 1]) for i in range(0, len(level), 2)]
    return level[0]


def inclusion_path(txids: list[bytes], index: int) -> list[PathNode]:
    if not 0 <= index < len(txids):
        raise IndexError(f"leaf {index} outside tree of {len(txids)}")
    path = []
    level = list(txids)
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        sibling = index ^ 1
        path.append(PathNode(level[sibling], sibling_on_left=sibling < index))
        level = [_pair(level[i], level[i + 1]) for i in range(0, len(level), 2)]
        index //= 2
    return path


def verify_path(root: bytes, txid: bytes, path: list[PathNode]) -> bool:
    node = txid
    for step in path:
        if step.sibling_on_left:
            node = _pair(step.sibling, node)
        else:
            node = _pair(node, step.sibling)
    return node == root


def path_to_json(path: list[PathNode]) -> list[dict]:
    return [{"sibling": p.sibling.hex(), "left": p.sibling_on_left} for p in path]


def path_from_json(items: list[dict]) -> list[PathNode]:
    return [PathNode(bytes.fromhex(p["sibling"]), p["left"]) for p in items]
