"""Key pairs, addresses, and the signature scheme used by ledger scripts.

Signatures are plain Schnorr over the same group as the credential layer:
sign(m) picks a nonce k, forms R = base**k, e = H(R, P, m), s = k + e*x; a
signature is (e, s) and verifies by recomputing R = base**s * P**-e.  This
gives the authorization-plus-attribution the protocol needs without modeling
any real wire format.  Nonces are derived from the secret and the message,
so signing is deterministic.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property

from ..dlrep.group import Group, InvalidEncodingError, SECP256K1

SIG_NONCE_TAG = b"idchain.sig.nonce.v1"
SIG_CHALLENGE_TAG = b"idchain.sig.challenge.v1"

ADDRESS_SIZE = 20


def address_of(pubkey: bytes) -> bytes:
    """20-byte address: truncated sha256 of the canonical pubkey encoding."""
    return hashlib.sha256(pubkey).digest()[:ADDRESS_SIZE]


@dataclass(frozen=True)
class KeyPair:
    group: Group
    secret: int

    @classmethod
    def from_seed(cls, seed: bytes, group: Group = SECP256K1) -> "KeyPair":
        digest = hashlib.sha256(b"idchain.key." + seed).digest()
        secret = int.from_bytes(digest, "big") % (group.order - 1) + 1
        return cls(group, secret)

    @cached_property
    def pubkey(self) -> bytes:
        return self.group.encode_element(self.group.power(self.group.base, self.secret))

    @cached_property
    def address(self) -> bytes:
        return address_of(self.pubkey)

    def sign(self, message: bytes) -> bytes:
        group = self.group
        k = group.hash_to_scalar(
            SIG_NONCE_TAG, group.encode_scalar(self.secret), message
        )
        r_enc = group.encode_element(group.power(group.base, k))
        e = group.hash_to_scalar(SIG_CHALLENGE_TAG, r_enc, self.pubkey, message)
        s = (k + e * self.secret) % group.order
        return group.encode_scalar(e) + group.encode_scalar(s)


def verify_signature(
    pubkey: bytes, message: bytes, signature: bytes, group: Group = SECP256K1
) -> bool:
    width = group.scalar_size
    if len(signature) != 2 * width:
        return False
    try:
        e = group.decode_scalar(signature[:width])
        s = group.decode_scalar(signature[width:])
        pk = group.decode_element(pubkey)
    except InvalidEncodingError:
        return False
    r = group.op(group.power(group.base, s), group.power(pk, -e))
    r_enc = group.encode_element(r)
    return group.hash_to_scalar(SIG_CHALLENGE_TAG, r_enc, pubkey, message) == e
