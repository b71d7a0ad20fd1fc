"""Where a verifier gets its view of the chain.

Three modes with one duck-typed interface (``get_tx``, ``spender_of``,
``publishes_to``, ``txids_from``):

* :class:`FullLedgerSource` reads the ledger directly.
* :class:`HeaderOnlySource` holds nothing but block headers; transactions
  arrive from an untrusted provider together with inclusion proofs, and
  every fetched transaction is checked against a header before use.  Claimed
  spenders are fetched and checked to actually spend the outpoint; only the
  claim "unspent" is taken on trust, which is the inherent gap of
  header-only verification.
* :class:`ExplorerSource` models outsourcing queries to a block explorer:
  structurally a full reader, but with injectable faults so tests can show
  what a lying explorer costs a verifier that skips its own checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..ledger.chain import BlockHeader, UtxoLedger
from ..ledger.errors import UnknownTxError
from ..ledger.merkle import PathNode, verify_path
from ..ledger.scripts import PayToAddress
from ..ledger.tx import Outpoint, Transaction, input_address
from .records import publish_payload


class _LedgerScanMixin:
    """Shared block-order scans over a pinned (or active) branch."""

    ledger: UtxoLedger
    branch_id: int | None

    def _branch(self):
        return self.ledger.branch(self.branch_id)

    def _scan_txs(self):
        for bh in self._branch().hashes:
            yield from self.ledger.blocks[bh].transactions

    def _publishes_to(self, address: bytes) -> list[bytes]:
        found = []
        for tx in self._scan_txs():
            if publish_payload(tx, self.ledger.group) is None:
                continue
            script = tx.outputs[0].script
            if isinstance(script, PayToAddress) and script.address == address:
                found.append(tx.txid)
        return found

    def _txids_from(self, address: bytes) -> list[bytes]:
        return [
            tx.txid
            for tx in self._scan_txs()
            if tx.inputs and input_address(tx.inputs[0]) == address
        ]


@dataclass
class FullLedgerSource(_LedgerScanMixin):
    ledger: UtxoLedger
    branch_id: int | None = None

    def get_tx(self, txid: bytes) -> Transaction:
        return self.ledger.get_tx(txid, self.branch_id)

    def spender_of(self, outpoint: Outpoint) -> bytes | None:
        return self.ledger.find_spender(outpoint, self.branch_id)

    def publishes_to(self, address: bytes) -> list[bytes]:
        return self._publishes_to(address)

    def txids_from(self, address: bytes) -> list[bytes]:
        return self._txids_from(address)


@dataclass
class LedgerInclusionProvider(_LedgerScanMixin):
    """The full node a header-only client talks to."""

    ledger: UtxoLedger
    branch_id: int | None = None

    def fetch(self, txid: bytes) -> tuple[Transaction, int, list[PathNode]]:
        tx = self.ledger.get_tx(txid, self.branch_id)
        height = self.ledger.tx_height(txid, self.branch_id)
        _, path = self.ledger.inclusion_proof(txid, self.branch_id)
        return tx, height, path

    def spender_of(self, outpoint: Outpoint) -> bytes | None:
        return self.ledger.find_spender(outpoint, self.branch_id)

    def publishes_to(self, address: bytes) -> list[bytes]:
        return self._publishes_to(address)

    def txids_from(self, address: bytes) -> list[bytes]:
        return self._txids_from(address)


class HeaderOnlySource:
    def __init__(self, headers: list[BlockHeader], provider):
        self.headers = list(headers)
        self.provider = provider

    @classmethod
    def for_ledger(cls, ledger: UtxoLedger, branch_id: int | None = None) -> "HeaderOnlySource":
        # pin the branch now; headers are a snapshot, not a live view
        resolved = ledger.branch(branch_id).id
        return cls(ledger.headers(resolved), LedgerInclusionProvider(ledger, resolved))

    def get_tx(self, txid: bytes) -> Transaction:
        tx, height, path = self.provider.fetch(txid)
        if tx.txid != txid:
            raise UnknownTxError(f"provider returned a different tx for {txid.hex()}")
        if not 0 <= height < len(self.headers):
            raise UnknownTxError(f"claimed height {height} beyond known headers")
        if not verify_path(self.headers[height].merkle_root, txid, path):
            raise UnknownTxError(f"inclusion proof failed for {txid.hex()}")
        return tx

    def spender_of(self, outpoint: Outpoint) -> bytes | None:
        claimed = self.provider.spender_of(outpoint)
        if claimed is None:
            return None
        spender = self.get_tx(claimed)
        if all(txin.outpoint != outpoint for txin in spender.inputs):
            raise UnknownTxError("claimed spender does not spend the outpoint")
        return claimed

    def publishes_to(self, address: bytes) -> list[bytes]:
        return [t for t in self.provider.publishes_to(address) if self.get_tx(t)]

    def txids_from(self, address: bytes) -> list[bytes]:
        return [t for t in self.provider.txids_from(address) if self.get_tx(t)]


@dataclass
class ExplorerSource(_LedgerScanMixin):
    """A trusted-query reader with fault injection for tests.

    ``fake_spenders`` overrides spender answers (including None to hide a
    revocation); ``hidden_txids`` makes transactions unresolvable.
    """

    ledger: UtxoLedger
    branch_id: int | None = None
    fake_spenders: dict = field(default_factory=dict)
    hidden_txids: set = field(default_factory=set)

    def get_tx(self, txid: bytes) -> Transaction:
        if txid in self.hidden_txids:
            raise UnknownTxError(txid.hex())
        return self.ledger.get_tx(txid, self.branch_id)

    def spender_of(self, outpoint: Outpoint) -> bytes | None:
        if outpoint in self.fake_spenders:
            return self.fake_spenders[outpoint]
        return self.ledger.find_spender(outpoint, self.branch_id)

    def publishes_to(self, address: bytes) -> list[bytes]:
        return [t for t in self._publishes_to(address) if t not in self.hidden_txids]

    def txids_from(self, address: bytes) -> list[bytes]:
        return [t for t in self._txids_from(address) if t not in self.hidden_txids]


def make_source(mode: str, ledger: UtxoLedger, branch_id: int | None = None):
    """Construct a verification source by mode name."""
    if mode == "full":
        return FullLedgerSource(ledger, branch_id)
    if mode == "headers":
        return HeaderOnlySource.for_ledger(ledger, branch_id)
    if mode == "explorer":
        return ExplorerSource(ledger, branch_id)
    raise ValueError(f"unknown verification source mode {mode!r}")
