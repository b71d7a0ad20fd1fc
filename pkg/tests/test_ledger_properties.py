"""Randomized state-machine checks for the ledger invariants."""

import hypothesis.strategies as st
from hypothesis import settings
from hypothesis.stateful import RuleBasedStateMachine, initialize, invariant, rule

from idchain.ledger import (
    KeyPair,
    Outpoint,
    PayToAddress,
    TxOutput,
    TxRejected,
    UtxoLedger,
    build_signed,
    replay_utxo,
)

ACTORS = [KeyPair.from_seed(bytes([i])) for i in range(3)]
BY_ADDRESS = {k.address: k for k in ACTORS}
DUST = 546


class LedgerMachine(RuleBasedStateMachine):
    @initialize()
    def setup(self):
        self.ledger = UtxoLedger(
            [(k.address, 2_000_000) for k in ACTORS for _ in range(2)]
        )
        self.submitted_fees: dict[bytes, int] = {}

    def _spendable(self, branch_id):
        branch = self.ledger.branch(branch_id)
        return sorted(branch.utxo.items(), key=lambda p: p[0])

    @rule(
        pick=st.integers(0, 10**6),
        dest=st.integers(0, 2),
        fraction=st.floats(0.2, 0.9),
    )
    def spend_something(self, pick, dest, fraction):
        utxos = self._spendable(self.ledger.active_id)
        if not utxos:
            return
        op, out = utxos[pick % len(utxos)]
        owner = BY_ADDRESS[out.script.spend_addresses()[0]]
        value = int(out.value * fraction)
        if value < DUST:
            return
        tx = build_signed(
            [(op, owner, 0)], [TxOutput(value, PayToAddress(ACTORS[dest].address))]
        )
        fee = out.value - value
        try:
            self.ledger.submit(tx)
        except TxRejected:
            return
        self.submitted_fees[tx.txid] = fee

    @rule(pick=st.integers(0, 10**6))
    def double_spend_attempt(self, pick):
        # resubmitting a spend of an already-queued outpoint must never corrupt
        # state; at most one spend of each outpoint survives mining
        utxos = self._spendable(self.ledger.active_id)
        if not utxos:
            return
        op, out = utxos[pick % len(utxos)]
        owner = BY_ADDRESS[out.script.spend_addresses()[0]]
        if out.value < 2 * DUST:
            return
        for value in (out.value - DUST, out.value - 2 * DUST):
            tx = build_signed(
                [(op, owner, 0)], [TxOutput(value, PayToAddress(owner.address))]
            )
            try:
                self.ledger.submit(tx)
                self.submitted_fees[tx.txid] = out.value - value
            except TxRejected:
                pass

    @rule()
    def mine_active(self):
        self.ledger.mine()

    @rule(back=st.integers(0, 3))
    def fork_and_extend(self, back):
        if len(self.ledger.branches) >= 4:
            return
        height = max(0, self.ledger.active.height - back)
        branch_id = self.ledger.fork(height)
        self.ledger.mine(branch_id)

    @invariant()
    def incremental_utxo_matches_replay(self):
        if not hasattr(self, "ledger"):
            return
        for branch_id in self.ledger.branches:
            assert replay_utxo(self.ledger, branch_id) == self.ledger.branch(branch_id).utxo

    @invariant()
    def no_outpoint_spent_twice_per_branch(self):
        if not hasattr(self, "ledger"):
            return
        for branch in self.ledger.branches.values():
            consumed = set()
            for bh in branch.hashes:
                for tx in self.ledger.blocks[bh].transactions:
                    for txin in tx.inputs:
                        assert txin.outpoint not in consumed
                        consumed.add(txin.outpoint)

    @invariant()
    def mined_value_is_conserved(self):
        if not hasattr(self, "ledger"):
            return
        for branch in self.ledger.branches.values():
            values: dict[Outpoint, int] = {}
            for bh in branch.hashes:
                for tx in self.ledger.blocks[bh].transactions:
                    total_in = sum(values[i.outpoint] for i in tx.inputs)
                    if tx.inputs:
                        assert total_in >= tx.total_output  # fee is non-negative
                    for idx, out in enumerate(tx.outputs):
                        values[Outpoint(tx.txid, idx)] = out.value

    @invariant()
    def active_branch_is_longest(self):
        if not hasattr(self, "ledger"):
            return
        top = max(b.height for b in self.ledger.branches.values())
        assert self.ledger.active.height == top


TestLedgerMachine = LedgerMachine.TestCase
TestLedgerMachine.settings = settings(
    max_examples=25, stateful_step_count=12, deadline=None
)
