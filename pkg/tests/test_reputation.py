import pytest

from idchain.ledger import KeyPair
from idchain.protocol import (
    LightweightClaim,
    challenge_digest,
    lightweight_verify,
    reputation_report,
    revoke,
)


def sign_challenge(keys: KeyPair, challenge: bytes) -> bytes:
    return keys.sign(challenge_digest(challenge))


class TestReputationReport:
    def test_fresh_address_empty(self, world):
        assert reputation_report(b"\x10" * 20, world.source()) == []

    def test_single_acknowledged_auth(self, world):
        record, attrs = world.enroll_identity((5, 9), limit=2)
        txid = world.request(record, attrs)
        ack = world.accept(txid)
        rows = reputation_report(world.user.address, world.source())
        assert len(rows) == 1
        row = rows[0]
        assert row.request_txid == txid
        assert row.accept_txid == ack
        assert row.sp_address == world.sp.address
        assert row.issuer_address == world.issuer.address

    def test_three_auths_two_acknowledged(self, world):
        record, attrs = world.enroll_identity((5, 9), limit=3)
        txids = []
        for i in range(3):
            txids.append(world.request(record, attrs, sp=(world.sp if i < 2 else world.sp2)))
        acks = [world.accept(txids[0]), world.accept(txids[1])]
        rows = reputation_report(world.user.address, world.source())
        assert [r.request_txid for r in rows] == txids
        assert [r.accept_txid for r in rows] == acks + [None]
        assert rows[2].sp_address == world.sp2.address

    def test_rows_span_multiple_identities(self, world):
        r1, a1 = world.enroll_identity((5, 9), limit=1)
        r2, a2 = world.enroll_identity((6, 7), limit=1)
        t1 = world.request(r1, a1)
        t2 = world.request(r2, a2)
        rows = reputation_report(world.user.address, world.source())
        assert {r.request_txid for r in rows} == {t1, t2}

    def test_revocation_is_not_a_row(self, world):
        record, attrs = world.enroll_identity((5, 9), limit=3)
        txid = world.request(record, attrs)
        revoke(world.user, record, world.user.address, world.ledger)
        world.ledger.mine()
        rows = reputation_report(world.user.address, world.source())
        assert [r.request_txid for r in rows] == [txid]


class TestLightweightVerify:
    def _acknowledged_request(self, world, limit=2):
        record, attrs = world.enroll_identity((5, 9), limit=limit)
        txid = world.request(record, attrs)
        world.accept(txid)
        return record, txid

    def test_valid_signature_over_fresh_challenge(self, world):
        _, txid = self._acknowledged_request(world)
        challenge = b"pool-entry-7031"
        claim = LightweightClaim(
            txid, world.user.pubkey, sign_challenge(world.user, challenge)
        )
        result = lightweight_verify(challenge, [claim], world.source())
        assert result.accepted
        assert result.annotations == ()

    def test_replay_under_other_challenge_rejected(self, world):
        _, txid = self._acknowledged_request(world)
        old = sign_challenge(world.user, b"challenge-1")
        claim = LightweightClaim(txid, world.user.pubkey, old)
        result = lightweight_verify(b"challenge-2", [claim], world.source())
        assert not result.accepted
        assert result.reason == "bad-signature"

    def test_unacknowledged_chain_rejected(self, world):
        record, attrs = world.enroll_identity((5, 9), limit=1)
        txid = world.request(record, attrs)  # nobody acknowledged
        challenge = b"x"
        claim = LightweightClaim(
            txid, world.user.pubkey, sign_challenge(world.user, challenge)
        )
        result = lightweight_verify(challenge, [claim], world.source())
        assert result.reason == "not-acknowledged"

    def test_wrong_key_rejected(self, world):
        _, txid = self._acknowledged_request(world)
        challenge = b"x"
        claim = LightweightClaim(
            txid, world.sp.pubkey, sign_challenge(world.sp, challenge)
        )
        result = lightweight_verify(challenge, [claim], world.source())
        assert result.reason == "address-mismatch"

    def test_unknown_tx_rejected(self, world):
        challenge = b"x"
        claim = LightweightClaim(
            b"\x99" * 32, world.user.pubkey, sign_challenge(world.user, challenge)
        )
        result = lightweight_verify(challenge, [claim], world.source())
        assert result.reason == "unknown-tx"

    def test_two_addresses_accept_with_weak_linkage_note(self, world):
        other_user = KeyPair.from_seed(b"w.user2")
        r1, a1 = world.enroll_identity((5, 9), limit=1)
        r2, a2 = world.enroll_identity((6, 7), limit=1, user=other_user)
        t1 = world.request(r1, a1)
        t2 = world.request(r2, a2, user=other_user)
        world.accept(t1)
        world.accept(t2)
        challenge = b"joint"
        claims = [
            LightweightClaim(t1, world.user.pubkey, sign_challenge(world.user, challenge)),
            LightweightClaim(t2, other_user.pubkey, sign_challenge(other_user, challenge)),
        ]
        result = lightweight_verify(challenge, claims, world.source())
        assert result.accepted
        assert len(result.annotations) == 1
        assert "weak linkage" in result.annotations[0]
