import pytest

from idchain.ledger import Outpoint, UnknownTxError
from idchain.protocol import (
    ExplorerSource,
    FullLedgerSource,
    HeaderOnlySource,
    LedgerInclusionProvider,
    make_source,
    read_generators,
    revoke,
    setup,
    verify_request,
)


def run_flow(world, limit=2):
    record, attrs = world.enroll_identity((5, 9), limit=limit)
    txid = world.request(record, attrs, reveal=(1,))
    return record, attrs, txid


class TestModeEquivalence:
    def test_accept_decision_identical(self, world):
        _, _, txid = run_flow(world)
        for mode in ("full", "headers", "explorer"):
            source = make_source(mode, world.ledger)
            result = verify_request(txid, world.trusted, source, world.store)
            assert result.accepted, mode
            assert result.uses == 1

    def test_reject_decisions_identical(self, world):
        record, attrs, txid = run_flow(world)
        revoke(world.user, record, world.user.address, world.ledger)
        world.ledger.mine()
        for mode in ("full", "headers", "explorer"):
            source = make_source(mode, world.ledger)
            result = verify_request(txid, world.trusted, source, world.store)
            assert result.reason == "revoked", mode

    def test_generator_read_back_identical(self, world):
        setup(world.issuer, world.ledger)
        group = world.issuer.gens.group
        full = read_generators(world.issuer.address, make_source("full", world.ledger), group)
        spv = read_generators(world.issuer.address, make_source("headers", world.ledger), group)
        explorer = read_generators(
            world.issuer.address, make_source("explorer", world.ledger), group
        )
        assert full == spv == explorer == world.issuer.gens


class TestHeaderOnly:
    def test_rejects_claims_beyond_known_headers(self, world):
        _, _, txid = run_flow(world)
        headers = world.ledger.headers()
        stale = HeaderOnlySource(headers[:1], LedgerInclusionProvider(world.ledger))
        with pytest.raises(UnknownTxError):
            stale.get_tx(txid)

    def test_rejects_tampered_inclusion_path(self, world):
        _, _, txid = run_flow(world)

        class PathTamperer(LedgerInclusionProvider):
            def fetch(self, wanted):
                tx, height, path = super().fetch(wanted)
                # claim the tx sits one block earlier than it does
                return tx, height - 1, path

        source = HeaderOnlySource(world.ledger.headers(), PathTamperer(world.ledger))
        with pytest.raises(UnknownTxError):
            source.get_tx(txid)

    def test_detects_wrong_tx_substitution(self, world):
        record, attrs, txid = run_flow(world)

        class SwappingProvider(LedgerInclusionProvider):
            def fetch(self, wanted):
                return super().fetch(record.publish_txid)

        source = HeaderOnlySource(world.ledger.headers(), SwappingProvider(world.ledger))
        with pytest.raises(UnknownTxError):
            source.get_tx(txid)

    def test_detects_fake_spender_claim(self, world):
        record, attrs, txid = run_flow(world)

        class FakeSpender(LedgerInclusionProvider):
            def spender_of(self, outpoint):
                return record.publish_txid  # a real tx that spends elsewhere

        source = HeaderOnlySource(world.ledger.headers(), FakeSpender(world.ledger))
        with pytest.raises(UnknownTxError):
            source.spender_of(Outpoint(txid, 1))

    def test_verify_decision_via_spv_matches_full(self, world):
        _, _, txid = run_flow(world)
        spv = HeaderOnlySource.for_ledger(world.ledger)
        full = FullLedgerSource(world.ledger)
        assert (
            verify_request(txid, world.trusted, spv, world.store).accepted
            == verify_request(txid, world.trusted, full, world.store).accepted
            is True
        )

    def test_headers_are_a_snapshot(self, world):
        # txs mined after the snapshot are unknown to the client
        spv = HeaderOnlySource.for_ledger(world.ledger)
        _, _, txid = run_flow(world)
        with pytest.raises(UnknownTxError):
            spv.get_tx(txid)


class TestExplorerFaults:
    def test_hiding_a_revocation_flips_the_decision(self, world):
        # the trust gap of outsourced queries: an explorer that lies about
        # spentness makes the verifier accept a revoked identity
        record, attrs, txid = run_flow(world)
        revoke(world.user, record, world.user.address, world.ledger)
        world.ledger.mine()

        honest = ExplorerSource(world.ledger)
        assert verify_request(txid, world.trusted, honest, world.store).reason == "revoked"

        lying = ExplorerSource(world.ledger)
        lying.fake_spenders[Outpoint(txid, 1)] = None  # "unspent, promise"
        result = verify_request(txid, world.trusted, lying, world.store)
        assert result.accepted  # wrong, and invisible to this verifier

    def test_hiding_the_publish_breaks_the_chain(self, world):
        record, attrs, txid = run_flow(world)
        lying = ExplorerSource(world.ledger)
        lying.hidden_txids.add(record.publish_txid)
        result = verify_request(txid, world.trusted, lying, world.store)
        assert result.reason == "broken-chain"

    def test_full_source_is_immune_to_explorer_faults(self, world):
        record, attrs, txid = run_flow(world)
        revoke(world.user, record, world.user.address, world.ledger)
        world.ledger.mine()
        full = FullLedgerSource(world.ledger)
        assert verify_request(txid, world.trusted, full, world.store).reason == "revoked"


class TestBranchScoping:
    def test_sources_pin_a_branch(self, world):
        record, attrs = world.enroll_identity((5, 9), limit=1)
        height_before = world.ledger.active.height
        txid = world.request(record, attrs)
        fork_id = world.ledger.fork(height_before)
        # on the fork the request never happened
        fork_source = FullLedgerSource(world.ledger, fork_id)
        with pytest.raises(UnknownTxError):
            fork_source.get_tx(txid)
        result = verify_request(txid, world.trusted, fork_source, world.store)
        assert result.reason == "unknown-tx"
