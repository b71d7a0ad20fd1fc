"""Output script variants: single-key, 1-of-2 multisig, and data carrier.

Constructors are permissive; standardness limits (carrier size, carrier
value, dust) are enforced at submission so that rule violations are
observable as rejections rather than construction errors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import TxRejected
from .keys import ADDRESS_SIZE

MAX_CARRIER_PAYLOAD = 80

KIND_P2PKH = 0
KIND_MULTISIG = 1
KIND_CARRIER = 2


@dataclass(frozen=True)
class PayToAddress:
    address: bytes

    def spend_addresses(self) -> tuple[bytes, ...]:
        return (self.address,)


@dataclass(frozen=True)
class Multisig1of2:
    """Spendable by either listed key; the signer records which one it used."""

    address_a: bytes
    address_b: bytes

    def spend_addresses(self) -> tuple[bytes, ...]:
        return (self.address_a, self.address_b)


@dataclass(frozen=True)
class DataCarrier:
    payload: bytes

    def spend_addresses(self) -> tuple[bytes, ...]:
        return ()


Script = Union[PayToAddress, Multisig1of2, DataCarrier]


def encode_script(script: Script) -> bytes:
    if isinstance(script, PayToAddress):
        return bytes([KIND_P2PKH]) + script.address
    if isinstance(script, Multisig1of2):
        return bytes([KIND_MULTISIG]) + script.address_a + script.address_b
    if isinstance(script, DataCarrier):
        return bytes([KIND_CARRIER, len(script.payload)]) + script.payload
    raise TypeError(f"not a script: {script!r}")


def decode_script(data: bytes) -> tuple[Script, int]:
    """Decode one script from the front of ``data``; returns (script, used)."""
    if not data:
        raise ValueError("empty script")
    kind = data[0]
    if kind == KIND_P2PKH:
        if len(data) < 1 + ADDRESS_SIZE:
            raise ValueError("truncated P2PKH script")
        return PayToAddress(data[1 : 1 + ADDRESS_SIZE]), 1 + ADDRESS_SIZE
    if kind == KIND_MULTISIG:
        if len(data) < 1 + 2 * ADDRESS_SIZE:
            raise ValueError("truncated multisig script")
        return (
            Multisig1of2(
                data[1 : 1 + ADDRESS_SIZE], data[1 + ADDRESS_SIZE : 1 + 2 * ADDRESS_SIZE]
            ),
            1 + 2 * ADDRESS_SIZE,
        )
    if kind == KIND_CARRIER:
        if len(data) < 2 or len(data) < 2 + data[1]:
            raise ValueError("truncated data carrier")
        return DataCarrier(data[2 : 2 + data[1]]), 2 + data[1]
    raise ValueError(f"unknown script kind {kind}")


def script_to_json(script: Script) -> dict:
    if isinstance(script, PayToAddress):
        return {"kind": "p2pkh", "address": script.address.hex()}
    if isinstance(script, Multisig1of2):
        return {
            "kind": "multisig",
            "address_a": script.address_a.hex(),
            "address_b": script.address_b.hex(),
        }
    return {"kind": "carrier", "payload": script.payload.hex()}


def script_from_json(obj: dict) -> Script:
    kind = obj["kind"]
    if kind == "p2pkh":
        return PayToAddress(bytes.fromhex(obj["address"]))
    if kind == "multisig":
        return Multisig1of2(
            bytes.fromhex(obj["address_a"]), bytes.fromhex(obj["address_b"])
        )
    if kind == "carrier":
        return DataCarrier(bytes.fromhex(obj["payload"]))
    raise ValueError(f"unknown script kind {kind!r}")
