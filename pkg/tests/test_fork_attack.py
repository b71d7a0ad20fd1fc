"""Token reuse across competing branches, and what a reorg leaves standing."""

import pytest

from idchain.ledger import UnknownTxError
from idchain.protocol import revoke, verify_request


class TestForkAttack:
    def test_divergent_spends_verify_differently_per_branch(self, world):
        record, attrs = world.enroll_identity((5, 9), limit=1)
        fork_height = world.ledger.active.height

        # branch A: honest authentication
        txid_a = world.request(record, attrs)

        # branch B: the same token spent toward a different provider
        fork_id = world.ledger.fork(fork_height)
        txid_b = world.request(record, attrs, sp=world.sp2, branch_id=fork_id)

        result_a = world.verify(txid_a, branch_id=0)
        result_b = world.verify(txid_b, branch_id=fork_id)
        assert result_a.accepted and result_b.accepted

        # neither request exists on the other branch
        assert world.verify(txid_a, branch_id=fork_id).reason == "unknown-tx"
        assert world.verify(txid_b, branch_id=0).reason == "unknown-tx"

    def test_reorg_leaves_one_outcome(self, world):
        record, attrs = world.enroll_identity((5, 9), limit=1)
        fork_height = world.ledger.active.height

        txid_a = world.request(record, attrs)
        fork_id = world.ledger.fork(fork_height)
        txid_b = world.request(record, attrs, sp=world.sp2, branch_id=fork_id)

        assert world.ledger.active_id == 0
        world.ledger.mine(fork_id)  # fork overtakes
        assert world.ledger.active_id == fork_id

        # on the surviving branch only the attacker's spend verifies
        assert world.verify(txid_b).accepted
        assert world.verify(txid_a).reason == "unknown-tx"

    def test_revocation_outrun_by_fork(self, world):
        # an issuer revoke on the current branch does not exist on a fork,
        # so the dishonest user keeps authenticating there until the fork
        # resolves
        record, attrs = world.enroll_identity((5, 9), limit=2)
        fork_height = world.ledger.active.height
        revoke(world.issuer.keys, record, world.issuer.address, world.ledger)
        world.ledger.mine()

        fork_id = world.ledger.fork(fork_height)
        txid = world.request(record, attrs, branch_id=fork_id)
        assert world.verify(txid, branch_id=fork_id).accepted

        # the revocation branch regains the lead: the spend disappears
        world.ledger.mine()
        world.ledger.mine()
        assert world.ledger.active_id == 0
        assert world.verify(txid).reason == "unknown-tx"

    def test_double_spend_exceeds_use_limit_across_branches(self, world):
        # one-use identity, used once per branch: each branch alone respects
        # the limit, so a fork is exactly a limit-evasion window
        record, attrs = world.enroll_identity((5, 9), limit=1)
        fork_height = world.ledger.active.height
        txid_a = world.request(record, attrs)
        fork_id = world.ledger.fork(fork_height)
        txid_b = world.request(record, attrs, sp=world.sp2, branch_id=fork_id)
        uses_a = world.verify(txid_a, branch_id=0).uses
        uses_b = world.verify(txid_b, branch_id=fork_id).uses
        assert uses_a == uses_b == 1  # 2 total uses of a 1-use identity
