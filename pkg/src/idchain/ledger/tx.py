"""Transactions: outpoints, inputs, outputs, digests, and construction.

The txid is the hash of the full canonical body, signatures included.  The
digest an input signs is the body with all signatures blanked, concatenated
with that input's own outpoint, so each signature authorizes one specific
spend of one specific coin.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Sequence

from ..dlrep.group import Group, SECP256K1
from .keys import KeyPair, address_of, verify_signature
from .scripts import (
    Multisig1of2,
    PayToAddress,
    Script,
    decode_script,
    encode_script,
    script_from_json,
    script_to_json,
)

TX_VERSION = 1
SIGN_TAG = b"idchain.tx.sign.v1"


@dataclass(frozen=True, order=True)
class Outpoint:
    txid: bytes
    index: int

    def encode(self) -> bytes:
        return self.txid + self.index.to_bytes(4, "big")

    def __str__(self) -> str:
        return f"{self.txid.hex()}:{self.index}"


@dataclass(frozen=True)
class TxInput:
    outpoint: Outpoint
    pubkey: bytes = b""
    signature: bytes = b""
    signer_index: int = 0

    def encode(self, with_signature: bool = True) -> bytes:
        sig = self.signature if with_signature else b""
        return (
            self.outpoint.encode()
            + len(self.pubkey).to_bytes(1, "big")
            + self.pubkey
            + self.signer_index.to_bytes(1, "big")
            + len(sig).to_bytes(1, "big")
            + sig
        )


@dataclass(frozen=True)
class TxOutput:
    value: int
    script: Script

    def encode(self) -> bytes:
        return self.value.to_bytes(8, "big") + encode_script(self.script)


@dataclass(frozen=True)
class Transaction:
    inputs: tuple[TxInput, ...]
    outputs: tuple[TxOutput, ...]

    def body(self, with_signatures: bool = True) -> bytes:
        out = bytearray([TX_VERSION])
        out += len(self.inputs).to_bytes(2, "big")
        for txin in self.inputs:
            out += txin.encode(with_signature=with_signatures)
        out += len(self.outputs).to_bytes(2, "big")
        for txout in self.outputs:
            out += txout.encode()
        return bytes(out)

    @cached_property
    def txid(self) -> bytes:
        return hashlib.sha256(self.body()).digest()

    def signing_digest(self, input_index: int) -> bytes:
        return hashlib.sha256(
            SIGN_TAG + self.body(with_signatures=False)
            + self.inputs[input_index].outpoint.encode()
        ).digest()

    @property
    def total_output(self) -> int:
        return sum(o.value for o in self.outputs)

    def to_json(self) -> dict:
        return {
            "txid": self.txid.hex(),
            "inputs": [
                {
                    "txid": i.outpoint.txid.hex(),
                    "index": i.outpoint.index,
                    "pubkey": i.pubkey.hex(),
                    "signature": i.signature.hex(),
                    "signer_index": i.signer_index,
                }
                for i in self.inputs
            ],
            "outputs": [
                {"value": o.value, "script": script_to_json(o.script)}
                for o in self.outputs
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Transaction":
        tx = cls(
            tuple(
                TxInput(
                    Outpoint(bytes.fromhex(i["txid"]), i["index"]),
                    bytes.fromhex(i["pubkey"]),
                    bytes.fromhex(i["signature"]),
                    i["signer_index"],
                )
                for i in obj["inputs"]
            ),
            tuple(
                TxOutput(o["value"], script_from_json(o["script"]))
                for o in obj["outputs"]
            ),
        )
        if "txid" in obj and tx.txid.hex() != obj["txid"]:
            raise ValueError(f"txid mismatch for {obj['txid']}")
        return tx


def build_signed(
    spends: Sequence[tuple[Outpoint, KeyPair, int]],
    outputs: Sequence[TxOutput],
) -> Transaction:
    """Construct and sign a transaction spending the given outpoints.

    ``spends`` carries (outpoint, key, signer_index) triples; signer_index
    selects which slot of a multisig the key claims (0 for single-key
    scripts).
    """
    unsigned = Transaction(
        tuple(
            TxInput(op, key.pubkey, b"", signer_index)
            for op, key, signer_index in spends
        ),
        tuple(outputs),
    )
    signed_inputs = []
    for idx, (op, key, signer_index) in enumerate(spends):
        sig = key.sign(unsigned.signing_digest(idx))
        signed_inputs.append(TxInput(op, key.pubkey, sig, signer_index))
    return replace(unsigned, inputs=tuple(signed_inputs))


def input_authorizes(
    tx: Transaction, input_index: int, script: Script, group: Group = SECP256K1
) -> bool:
    """Does input ``input_index`` carry a valid signature for ``script``?"""
    txin = tx.inputs[input_index]
    addresses = script.spend_addresses()
    if not addresses:  # data carriers are never spendable
        return False
    if not 0 <= txin.signer_index < len(addresses):
        return False
    if isinstance(script, PayToAddress) and txin.signer_index != 0:
        return False
    if address_of(txin.pubkey) != addresses[txin.signer_index]:
        return False
    return verify_signature(
        txin.pubkey, tx.signing_digest(input_index), txin.signature, group
    )


def input_address(txin: TxInput) -> bytes:
    """The address the input's pubkey hashes to (its claimed identity)."""
    return address_of(txin.pubkey)
