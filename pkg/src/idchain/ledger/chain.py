"""A deterministic UTXO ledger with branches, mining, and reorgs.

The ledger is a single mutable state machine; callers serialize mutations
(submit / mine / fork / reorg).  Each branch keeps its own UTXO set, spender
index, and mempool, all reproducible by replaying its blocks from genesis.
The active branch is the longest one, ties going to whichever branch reached
that height first.

Mining has no proof of work and no size limit: a block simply packages every
currently valid mempool transaction in submission order, which keeps every
run byte-for-byte reproducible.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

from ..dlrep.group import Group, SECP256K1
from ..economics import FeeSchedule
from .errors import (
    BadSignatureError,
    DoubleSpendError,
    DustOutputError,
    MissingInputsError,
    MultipleDataCarriersError,
    NegativeFeeError,
    NonzeroDataCarrierValueError,
    OversizedDataCarrierError,
    UnknownBranchError,
    UnknownHeightError,
    UnknownOutpointError,
    UnknownTxError,
)
from .merkle import PathNode, inclusion_path, merkle_root, verify_path
from .scripts import DataCarrier, MAX_CARRIER_PAYLOAD, PayToAddress, Script
from .tx import Outpoint, Transaction, TxOutput, input_authorizes

HEADER_VERSION = 1
GENESIS_PREV = b"\x00" * 32


@dataclass(frozen=True)
class BlockHeader:
    prev: bytes
    merkle_root: bytes
    height: int

    def encode(self) -> bytes:
        """80-byte header: version, prev, root, height, timestamp, nonce."""
        return (
            HEADER_VERSION.to_bytes(4, "big")
            + self.prev
            + self.merkle_root
            + self.height.to_bytes(4, "big")
            + self.height.to_bytes(4, "big")  # simulated clock: one tick per block
            + (0).to_bytes(4, "big")
        )

    @property
    def hash(self) -> bytes:
        return hashlib.sha256(self.encode()).digest()


@dataclass(frozen=True)
class Block:
    header: BlockHeader
    transactions: tuple[Transaction, ...]

    @property
    def hash(self) -> bytes:
        return self.header.hash


@dataclass
class Branch:
    id: int
    hashes: list[bytes]
    utxo: dict[Outpoint, TxOutput] = field(default_factory=dict)
    spender: dict[Outpoint, bytes] = field(default_factory=dict)
    tx_heights: dict[bytes, int] = field(default_factory=dict)
    mempool: list[Transaction] = field(default_factory=list)
    extended_seq: int = 0

    @property
    def height(self) -> int:
        return len(self.hashes) - 1


def _apply_tx(branch: Branch, tx: Transaction, height: int) -> None:
    for txin in tx.inputs:
        branch.utxo.pop(txin.outpoint, None)
        branch.spender[txin.outpoint] = tx.txid
    for idx, out in enumerate(tx.outputs):
        if not isinstance(out.script, DataCarrier):  # carriers are unspendable
            branch.utxo[Outpoint(tx.txid, idx)] = out
    branch.tx_heights[tx.txid] = height


class UtxoLedger:
    def __init__(
        self,
        faucet: list[tuple[bytes, int]],
        schedule: FeeSchedule | None = None,
        group: Group = SECP256K1,
    ):
        self.schedule = schedule or FeeSchedule()
        self.group = group
        self._txs: dict[bytes, Transaction] = {}
        self.blocks: dict[bytes, Block] = {}
        self._seq = 0

        coinbase = Transaction(
            (), tuple(TxOutput(value, PayToAddress(addr)) for addr, value in faucet)
        )
        header = BlockHeader(GENESIS_PREV, merkle_root([coinbase.txid]), 0)
        genesis = Block(header, (coinbase,))
        self.blocks[genesis.hash] = genesis
        self._txs[coinbase.txid] = coinbase

        main = Branch(0, [genesis.hash])
        _apply_tx(main, coinbase, 0)
        self.branches: dict[int, Branch] = {0: main}
        self.active_id = 0

    # -- views ----------------------------------------------------------------

    def branch(self, branch_id: int | None = None) -> Branch:
        if branch_id is None:
            branch_id = self.active_id
        try:
            return self.branches[branch_id]
        except KeyError:
            raise UnknownBranchError(f"no branch {branch_id}") from None

    @property
    def active(self) -> Branch:
        return self.branches[self.active_id]

    @property
    def mempool(self) -> list[Transaction]:
        return list(self.active.mempool)

    def get_tx(self, txid: bytes, branch_id: int | None = None) -> Transaction:
        branch = self.branch(branch_id)
        if txid not in branch.tx_heights:
            raise UnknownTxError(txid.hex())
        return self._txs[txid]

    def tx_height(self, txid: bytes, branch_id: int | None = None) -> int:
        branch = self.branch(branch_id)
        if txid not in branch.tx_heights:
            raise UnknownTxError(txid.hex())
        return branch.tx_heights[txid]

    def headers(self, branch_id: int | None = None) -> list[BlockHeader]:
        return [self.blocks[h].header for h in self.branch(branch_id).hashes]

    def utxos_of(self, address: bytes, branch_id: int | None = None):
        branch = self.branch(branch_id)
        return sorted(
            (
                (op, out)
                for op, out in branch.utxo.items()
                if address in out.script.spend_addresses()
            ),
            key=lambda pair: pair[0],
        )

    def balance(self, address: bytes, branch_id: int | None = None) -> int:
        return sum(out.value for _, out in self.utxos_of(address, branch_id))

    def _output_exists(self, branch: Branch, outpoint: Outpoint) -> bool:
        if outpoint.txid not in branch.tx_heights:
            return False
        tx = self._txs[outpoint.txid]
        return 0 <= outpoint.index < len(tx.outputs)

    def find_spender(
        self, outpoint: Outpoint, branch_id: int | None = None
    ) -> bytes | None:
        """The txid spending ``outpoint`` on the branch, or None if unspent."""
        branch = self.branch(branch_id)
        if not self._output_exists(branch, outpoint):
            raise UnknownOutpointError(str(outpoint))
        return branch.spender.get(outpoint)

    # -- validation -----------------------------------------------------------

    def _validate(self, tx: Transaction, utxo: dict[Outpoint, TxOutput]) -> int:
        """Full validity + standardness against a UTXO view; returns the fee."""
        if not tx.inputs:
            raise MissingInputsError("only the genesis transaction has no inputs")
        seen: set[Outpoint] = set()
        total_in = 0
        for idx, txin in enumerate(tx.inputs):
            if txin.outpoint in seen:
                raise DoubleSpendError(f"{txin.outpoint} spent twice in one tx")
            seen.add(txin.outpoint)
            spent = utxo.get(txin.outpoint)
            if spent is None:
                raise UnknownOutpointError(str(txin.outpoint))
            if not input_authorizes(tx, idx, spent.script, self.group):
                raise BadSignatureError(f"input {idx}")
            total_in += spent.value
        if total_in < tx.total_output:
            raise NegativeFeeError(
                f"inputs {total_in} < outputs {tx.total_output}"
            )
        carriers = 0
        for out in tx.outputs:
            if isinstance(out.script, DataCarrier):
                carriers += 1
                if len(out.script.payload) > MAX_CARRIER_PAYLOAD:
                    raise OversizedDataCarrierError(
                        f"{len(out.script.payload)} bytes"
                    )
                if out.value != 0:
                    raise NonzeroDataCarrierValueError(f"value {out.value}")
            elif out.value < self.schedule.dust:
                raise DustOutputError(
                    f"output of {out.value} below dust {self.schedule.dust}"
                )
        if carriers > 1:
            raise MultipleDataCarriersError(f"{carriers} carriers")
        return total_in - tx.total_output

    # -- mutations ------------------------------------------------------------

    def submit(self, tx: Transaction, branch_id: int | None = None) -> bytes:
        """Validate against the branch's confirmed state and enqueue.

        Two mempool transactions may conflict; mining keeps the first.
        """
        branch = self.branch(branch_id)
        self._validate(tx, branch.utxo)
        branch.mempool.append(tx)
        return tx.txid

    def mine(self, branch_id: int | None = None) -> Block:
        """Package every still-valid mempool tx into a block, FIFO order."""
        branch = self.branch(branch_id)
        staged_utxo = dict(branch.utxo)
        included: list[Transaction] = []
        for tx in branch.mempool:
            try:
                self._validate(tx, staged_utxo)
            except Exception:
                continue  # conflicting or stale; dropped
            for txin in tx.inputs:
                del staged_utxo[txin.outpoint]
            for idx, out in enumerate(tx.outputs):
                if not isinstance(out.script, DataCarrier):
                    staged_utxo[Outpoint(tx.txid, idx)] = out
            included.append(tx)
        branch.mempool = []

        height = branch.height + 1
        header = BlockHeader(
            branch.hashes[-1], merkle_root([t.txid for t in included]), height
        )
        block = Block(header, tuple(included))
        self.blocks[block.hash] = block
        branch.hashes.append(block.hash)
        for tx in included:
            self._txs[tx.txid] = tx
            _apply_tx(branch, tx, height)
        self._seq += 1
        branch.extended_seq = self._seq
        self.reorg()
        return block

    def fork(self, at_height: int) -> int:
        """Open a competing branch sharing active history through at_height."""
        active = self.active
        if not 0 <= at_height <= active.height:
            raise UnknownHeightError(f"no block at height {at_height}")
        branch_id = max(self.branches) + 1
        branch = Branch(branch_id, list(active.hashes[: at_height + 1]))
        for height, bh in enumerate(branch.hashes):
            for tx in self.blocks[bh].transactions:
                _apply_tx(branch, tx, height)
        self._seq += 1
        branch.extended_seq = self._seq
        self.branches[branch_id] = branch
        return branch_id

    def reorg(self) -> int:
        """Re-designate the longest branch (first to its height wins ties)."""
        best = min(self.branches.values(), key=lambda b: (-b.height, b.extended_seq))
        self.active_id = best.id
        return best.id

    # -- inclusion proofs -------------------------------------------------------

    def inclusion_proof(
        self, txid: bytes, branch_id: int | None = None
    ) -> tuple[BlockHeader, list[PathNode]]:
        branch = self.branch(branch_id)
        if txid not in branch.tx_heights:
            raise UnknownTxError(txid.hex())
        height = branch.tx_heights[txid]
        block = self.blocks[branch.hashes[height]]
        txids = [t.txid for t in block.transactions]
        return block.header, inclusion_path(txids, txids.index(txid))

    @staticmethod
    def verify_inclusion(
        header: BlockHeader, txid: bytes, path: list[PathNode]
    ) -> bool:
        return verify_path(header.merkle_root, txid, path)

    # -- persistence --------------------------------------------------------------

    def export(self) -> dict:
        return {
            "schema_version": 1,
            "fee": {
                "sat_per_byte": self.schedule.sat_per_byte,
                "dust": self.schedule.dust,
                "usd_per_btc": str(self.schedule.usd_per_btc),
            },
            "blocks": {
                bh.hex(): {
                    "prev": block.header.prev.hex(),
                    "merkle_root": block.header.merkle_root.hex(),
                    "height": block.header.height,
                    "txs": [tx.to_json() for tx in block.transactions],
                }
                for bh, block in self.blocks.items()
            },
            "branches": [
                {
                    "id": b.id,
                    "hashes": [h.hex() for h in b.hashes],
                    "mempool": [tx.to_json() for tx in b.mempool],
                    "extended_seq": b.extended_seq,
                }
                for b in sorted(self.branches.values(), key=lambda b: b.id)
            ],
            "active": self.active_id,
            "seq": self._seq,
        }

    def export_json(self) -> str:
        return json.dumps(self.export(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_export(cls, data: dict, group: Group = SECP256K1) -> "UtxoLedger":
        if data.get("schema_version") != 1:
            raise ValueError("unsupported ledger schema")
        schedule = FeeSchedule(
            data["fee"]["sat_per_byte"],
            data["fee"]["dust"],
            Fraction(data["fee"]["usd_per_btc"]),
        )
        ledger = cls.__new__(cls)
        ledger.schedule = schedule
        ledger.group = group
        ledger._txs = {}
        ledger.blocks = {}
        ledger._seq = data["seq"]

        for bh_hex, blk in data["blocks"].items():
            txs = tuple(Transaction.from_json(t) for t in blk["txs"])
            header = BlockHeader(
                bytes.fromhex(blk["prev"]),
                bytes.fromhex(blk["merkle_root"]),
                blk["height"],
            )
            block = Block(header, txs)
            if block.hash.hex() != bh_hex:
                raise ValueError(f"block hash mismatch for {bh_hex}")
            if merkle_root([t.txid for t in txs]) != header.merkle_root:
                raise ValueError(f"merkle root mismatch for {bh_hex}")
            ledger.blocks[block.hash] = block
            for tx in txs:
                ledger._txs[tx.txid] = tx

        ledger.branches = {}
        for b in data["branches"]:
            branch = Branch(
                b["id"],
                [bytes.fromhex(h) for h in b["hashes"]],
                extended_seq=b["extended_seq"],
            )
            for height, bh in enumerate(branch.hashes):
                if height:
                    prev = ledger.blocks[branch.hashes[height - 1]]
                    if ledger.blocks[bh].header.prev != prev.hash:
                        raise ValueError("broken header chain")
                for tx in ledger.blocks[bh].transactions:
                    _apply_tx(branch, tx, height)
            branch.mempool = [Transaction.from_json(t) for t in b["mempool"]]
            ledger.branches[branch.id] = branch
        ledger.active_id = data["active"]
        if ledger.active_id not in ledger.branches:
            raise ValueError("active branch missing from export")
        return ledger

    @classmethod
    def from_export_json(cls, text: str, group: Group = SECP256K1) -> "UtxoLedger":
        return cls.from_export(json.loads(text), group)


def replay_utxo(ledger: UtxoLedger, branch_id: int) -> dict[Outpoint, TxOutput]:
    """Recompute a branch's UTXO set from genesis; the invariant oracle."""
    shadow = Branch(-1, [])
    for height, bh in enumerate(ledger.branch(branch_id).hashes):
        for tx in ledger.blocks[bh].transactions:
            _apply_tx(shadow, tx, height)
    return shadow.utxo
