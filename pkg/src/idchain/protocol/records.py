"""Identity records, token chains, spend classification, verdicts."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ..dlrep.commitment import DlrepCommitment, GeneratorSet
from ..dlrep.proof import DisclosureStatement
from ..ledger.keys import KeyPair
from ..ledger.scripts import DataCarrier, Multisig1of2, PayToAddress
from ..ledger.tx import Outpoint, Transaction
from .errors import PayloadError
from .payloads import parse_proof_ref, parse_publish


@dataclass(frozen=True)
class IssuerProfile:
    """An identity provider: keys plus its published generator list."""

    name: str
    keys: KeyPair
    gens: GeneratorSet

    @classmethod
    def create(cls, name: str, keys: KeyPair, field_labels) -> "IssuerProfile":
        gens = GeneratorSet.derive(keys.group, keys.address.hex(), tuple(field_labels))
        return cls(name, keys, gens)

    @property
    def address(self) -> bytes:
        return self.keys.address


@dataclass(frozen=True)
class IdentityRecord:
    """Everything public about one issued identity."""

    publish_txid: bytes
    issuer_address: bytes
    user_address: bytes
    commitment: DlrepCommitment
    limit: int
    token_script: Multisig1of2
    token_value: int

    @property
    def gens(self) -> GeneratorSet:
        return self.commitment.gens


@dataclass(frozen=True)
class TokenChain:
    """The request hops of one identity, publish onwards."""

    record: IdentityRecord
    hops: tuple[bytes, ...]  # request txids, oldest first
    current_token: Outpoint
    current_value: int

    @property
    def uses(self) -> int:
        return len(self.hops)


@dataclass(frozen=True)
class ProofRef:
    digest: bytes
    locator: str


class SpendKind(Enum):
    REQUEST = "request"
    REQUEST_DOUBLE = "request_double"
    REVOKE = "revoke"


# -- transaction shapes -------------------------------------------------------


def _is_proof_carrier(out) -> bool:
    if not isinstance(out.script, DataCarrier):
        return False
    try:
        parse_proof_ref(out.script.payload)
        return True
    except PayloadError:
        return False


def request_token_slots(tx: Transaction) -> list[tuple[int, int]] | None:
    """(input index, output index) pairs of token flow, if request-shaped.

    A single authentication spends one token into outputs
    [payment, token, proof carrier]; a coordinated one spends two tokens into
    [payment, token, token, proof carrier] with distinct token scripts.
    Anything else is not a request.
    """
    outs = tx.outputs
    if len(tx.inputs) == 1 and len(outs) == 3:
        if (
            isinstance(outs[0].script, PayToAddress)
            and isinstance(outs[1].script, Multisig1of2)
            and _is_proof_carrier(outs[2])
        ):
            return [(0, 1)]
        return None
    if len(tx.inputs) == 2 and len(outs) == 4:
        if (
            isinstance(outs[0].script, PayToAddress)
            and isinstance(outs[1].script, Multisig1of2)
            and isinstance(outs[2].script, Multisig1of2)
            and outs[1].script != outs[2].script
            and _is_proof_carrier(outs[3])
        ):
            return [(0, 1), (1, 2)]
        return None
    return None


def publish_payload(tx: Transaction, group) -> tuple | None:
    """(commitment element, limit) if the tx has the publication shape."""
    if len(tx.inputs) != 1 or len(tx.outputs) != 3:
        return None
    user_out, token_out, carrier = tx.outputs
    if not isinstance(user_out.script, PayToAddress):
        return None
    if not isinstance(token_out.script, Multisig1of2):
        return None
    if not isinstance(carrier.script, DataCarrier):
        return None
    try:
        return parse_publish(group, carrier.script.payload)
    except PayloadError:
        return None


def classify_script_spend(tx: Transaction, token_script: Multisig1of2) -> SpendKind:
    """Total classification of any spend of a token under ``token_script``."""
    slots = request_token_slots(tx)
    if slots is None:
        return SpendKind.REVOKE
    token_scripts = [tx.outputs[out_idx].script for _, out_idx in slots]
    if token_script not in token_scripts:
        return SpendKind.REVOKE  # token not returned: chain is cut
    return SpendKind.REQUEST if len(slots) == 1 else SpendKind.REQUEST_DOUBLE


def classify_spend(tx: Transaction, identity: IdentityRecord) -> SpendKind:
    return classify_script_spend(tx, identity.token_script)


# -- verification verdicts ------------------------------------------------------

REASON_UNKNOWN_TX = "unknown-tx"
REASON_BAD_SHAPE = "bad-shape"
REASON_BROKEN_CHAIN = "broken-chain"
REASON_UNTRUSTED_ISSUER = "untrusted-issuer"
REASON_USE_LIMIT = "use-limit-exceeded"
REASON_REVOKED = "revoked"
REASON_TOKEN_SPENT = "token-spent"
REASON_PROOF_MISSING = "proof-missing"
REASON_HASH_MISMATCH = "proof-hash-mismatch"
REASON_MALFORMED_PROOF = "malformed-proof"
REASON_CONTEXT_MISMATCH = "context-mismatch"
REASON_INVALID_PROOF = "invalid-proof"

ALL_REASONS = frozenset(
    {
        REASON_UNKNOWN_TX,
        REASON_BAD_SHAPE,
        REASON_BROKEN_CHAIN,
        REASON_UNTRUSTED_ISSUER,
        REASON_USE_LIMIT,
        REASON_REVOKED,
        REASON_TOKEN_SPENT,
        REASON_PROOF_MISSING,
        REASON_HASH_MISMATCH,
        REASON_MALFORMED_PROOF,
        REASON_CONTEXT_MISMATCH,
        REASON_INVALID_PROOF,
    }
)


@dataclass(frozen=True)
class VerifyResult:
    accepted: bool
    reason: str | None = None
    chains: tuple[TokenChain, ...] = ()
    statement: DisclosureStatement | None = None

    @classmethod
    def reject(cls, reason: str) -> "VerifyResult":
        return cls(False, reason)

    @classmethod
    def accept(cls, chains, statement) -> "VerifyResult":
        return cls(True, None, tuple(chains), statement)

    @property
    def uses(self) -> int:
        return max((c.uses for c in self.chains), default=0)
