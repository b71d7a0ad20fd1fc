"""Reputation from the public record, and signature-only verification.

Every acknowledged authentication is visible on-chain, so an address
accumulates a walkable history: requests, who acknowledged them, and under
which issuer.  A very small provider can skip proof checking entirely and
instead ask the user to sign a fresh challenge with the key behind an
already-acknowledged chain -- trusting the providers who did the real work.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from ..dlrep.group import Group, SECP256K1
from ..ledger.errors import LedgerError
from ..ledger.keys import address_of, verify_signature
from ..ledger.scripts import PayToAddress
from ..ledger.tx import Outpoint, input_address
from .lifecycle import _walk_to_publish
from .records import SpendKind, classify_script_spend, request_token_slots

CHALLENGE_TAG = b"idchain.lightweight.v1"


@dataclass(frozen=True)
class ReputationRow:
    request_txid: bytes
    accept_txid: bytes | None
    sp_address: bytes
    issuer_address: bytes


def _acknowledgment_of(source, request_txid: bytes, issuer_address: bytes):
    """The tx spending the provider payment toward the issuer, if any."""
    try:
        spender = source.spender_of(Outpoint(request_txid, 0))
    except LedgerError:
        return None
    if spender is None:
        return None
    try:
        ack = source.get_tx(spender)
    except LedgerError:
        return None
    for out in ack.outputs:
        if isinstance(out.script, PayToAddress) and out.script.address == issuer_address:
            return spender
    return None


def reputation_report(user_address: bytes, source) -> list[ReputationRow]:
    """Every request hop of every identity published to this address."""
    rows = []
    for publish_txid in source.publishes_to(user_address):
        publish = source.get_tx(publish_txid)
        token_script = publish.outputs[1].script
        issuer_address = input_address(publish.inputs[0])
        outpoint = Outpoint(publish_txid, 1)
        while True:
            try:
                spender = source.spender_of(outpoint)
            except LedgerError:
                break
            if spender is None:
                break
            tx = source.get_tx(spender)
            kind = classify_script_spend(tx, token_script)
            if kind is SpendKind.REVOKE:
                break
            slots = request_token_slots(tx)
            out_idx = next(
                i for _, i in slots if tx.outputs[i].script == token_script
            )
            sp_script = tx.outputs[0].script
            rows.append(
                ReputationRow(
                    tx.txid,
                    _acknowledgment_of(source, tx.txid, issuer_address),
                    sp_script.address,
                    issuer_address,
                )
            )
            outpoint = Outpoint(tx.txid, out_idx)
    return rows


@dataclass(frozen=True)
class LightweightClaim:
    """One 'that chain is mine' assertion: a request txid plus key control."""

    request_txid: bytes
    pubkey: bytes
    signature: bytes


@dataclass(frozen=True)
class LightweightResult:
    accepted: bool
    reason: str | None = None
    annotations: tuple[str, ...] = ()


WEAK_LINKAGE_NOTE = (
    "weak linkage: multiple keys signed, which proves key control but not "
    "that the identities belong to one person"
)


def challenge_digest(challenge: bytes) -> bytes:
    return hashlib.sha256(CHALLENGE_TAG + challenge).digest()


def lightweight_verify(
    challenge: bytes,
    claims: list[LightweightClaim],
    source,
    group: Group = SECP256K1,
) -> LightweightResult:
    """Accept when every claimed chain is acknowledged and its key signs.

    No disclosure proofs are checked here; the caller is explicitly trusting
    the providers whose acknowledgments appear on-chain.
    """
    if not claims:
        return LightweightResult(False, "no claims")
    addresses = set()
    for claim in claims:
        try:
            tx = source.get_tx(claim.request_txid)
        except LedgerError:
            return LightweightResult(False, "unknown-tx")
        slots = request_token_slots(tx)
        if slots is None:
            return LightweightResult(False, "bad-shape")
        users = []
        issuers = []
        for in_idx, out_idx in slots:
            info, reason = _walk_to_publish(source, tx, in_idx, out_idx, group)
            if info is None:
                return LightweightResult(False, reason)
            users.append(info.record.user_address)
            issuers.append(info.record.issuer_address)
        claimed_address = address_of(claim.pubkey)
        if claimed_address not in users:
            return LightweightResult(False, "address-mismatch")
        if not verify_signature(
            claim.pubkey, challenge_digest(challenge), claim.signature, group
        ):
            return LightweightResult(False, "bad-signature")
        if not any(
            _acknowledgment_of(source, claim.request_txid, issuer)
            for issuer in issuers
        ):
            return LightweightResult(False, "not-acknowledged")
        addresses.add(claimed_address)
    annotations = (WEAK_LINKAGE_NOTE,) if len(addresses) > 1 else ()
    return LightweightResult(True, None, annotations)
