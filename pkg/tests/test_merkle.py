import hashlib

import pytest

from idchain.ledger.merkle import (
    EMPTY_ROOT,
    PathNode,
    inclusion_path,
    merkle_root,
    verify_path,
)


def brute_force_root(txids):
    """Recompute the root level by level, duplicating odd tails."""
    level = list(txids)
    if not level:
        return EMPTY_ROOT
    while len(level) > 1:
        if len(level) % 2:
            level = level + [level[-1]]
        level = [
            hashlib.sha256(level[i] + level[i + 1]).digest()
            for i in range(0, len(level), 2)
        ]
    return level[0]


def leaves(n):
    return [hashlib.sha256(bytes([i])).digest() for i in range(n)]


class TestRoot:
    def test_empty(self):
        assert merkle_root([]) == EMPTY_ROOT

    def test_single_leaf_is_root(self):
        txid = leaves(1)[0]
        assert merkle_root([txid]) == txid

    @pytest.mark.parametrize("n", range(1, 17))
    def test_matches_brute_force(self, n):
        txids = leaves(n)
        assert merkle_root(txids) == brute_force_root(txids)


class TestInclusion:
    def test_single_tx_block_has_empty_path(self):
        txids = leaves(1)
        path = inclusion_path(txids, 0)
        assert path == []
        assert verify_path(merkle_root(txids), txids[0], path)

    @pytest.mark.parametrize("n", [2, 3, 5, 7, 8, 16])
    def test_every_leaf_verifies(self, n):
        txids = leaves(n)
        root = merkle_root(txids)
        for i, txid in enumerate(txids):
            assert verify_path(root, txid, inclusion_path(txids, i))

    def test_tampered_node_rejected(self):
        txids = leaves(7)
        root = merkle_root(txids)
        path = inclusion_path(txids, 3)
        bad = list(path)
        bad[1] = PathNode(b"\x00" * 32, bad[1].sibling_on_left)
        assert not verify_path(root, txids[3], bad)

    def test_wrong_leaf_rejected(self):
        txids = leaves(4)
        root = merkle_root(txids)
        assert not verify_path(root, txids[1], inclusion_path(txids, 0))

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            inclusion_path(leaves(3), 3)
