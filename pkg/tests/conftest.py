import random
from dataclasses import dataclass, field

import pytest

from idchain.dlrep import AttributeVector, DisclosureStatement, Revelation, blind_contribution
from idchain.economics import FeeSchedule, SizeModel
from idchain.ledger import KeyPair, UtxoLedger
from idchain.protocol import (
    FullLedgerSource,
    IdentityRecord,
    IssuerProfile,
    ProofStore,
    accept,
    build_request,
    enroll,
    setup,
    verify_request,
)

BTC = 10**8

SCHEDULE = FeeSchedule()
MODEL = SizeModel()

REQUEST_FEE = 334 * 360
ACCEPT_FEE = 191 * 360
PUBLISH_FEE = 267 * 360
REVOKE_FEE = 229 * 360
PER_USE = REQUEST_FEE + ACCEPT_FEE + SCHEDULE.dust  # 189_546


@dataclass
class World:
    """One issuer, one user, two providers, a funded ledger, a proof store."""

    ledger: UtxoLedger
    store: ProofStore
    issuer: IssuerProfile
    user: KeyPair
    sp: KeyPair
    sp2: KeyPair
    rng: random.Random = field(default_factory=lambda: random.Random(1234))

    @property
    def trusted(self) -> dict:
        return {self.issuer.address: self.issuer.gens}

    def source(self, branch_id=None):
        return FullLedgerSource(self.ledger, branch_id)

    def enroll_identity(self, values, limit, margin=0, user=None):
        """User-side blinding plus issuer-side publication; mines the publish."""
        user = user or self.user
        group = self.issuer.gens.group
        x0 = group.random_scalar(self.rng)
        attrs = AttributeVector(group, (x0,) + tuple(values))
        blinded = group.encode_element(blind_contribution(x0, self.issuer.gens))
        record = enroll(
            self.issuer,
            user.address,
            blinded,
            values,
            limit,
            self.ledger,
            value_margin=margin,
        )
        self.ledger.mine()
        return record, attrs

    def request(
        self, record, attrs, reveal=(), sp=None, user=None, branch_id=None, mine=True
    ):
        """Build, submit, and optionally mine one authentication request."""
        reveals = tuple(
            Revelation(0, idx, attrs.scalars[idx]) for idx in reveal
        )
        txid = build_request(
            user or self.user,
            record,
            attrs,
            (sp or self.sp).address,
            DisclosureStatement(reveals=reveals),
            self.store,
            self.ledger,
            branch_id=branch_id,
        )
        if mine:
            self.ledger.mine(branch_id)
        return txid

    def verify(self, request_txid, branch_id=None):
        return verify_request(
            request_txid, self.trusted, self.source(branch_id), self.store
        )

    def accept(self, request_txid, sp=None, branch_id=None, mine=True):
        txid = accept(
            sp or self.sp, request_txid, self.ledger, branch_id=branch_id
        )
        if mine:
            self.ledger.mine(branch_id)
        return txid


def build_world(tmp_path, labels=("status", "tier"), issuer_funds=20 * BTC) -> World:
    issuer_keys = KeyPair.from_seed(b"w.issuer")
    world = World(
        ledger=UtxoLedger([(issuer_keys.address, issuer_funds)]),
        store=ProofStore(tmp_path / "proofs"),
        issuer=IssuerProfile.create("registrar", issuer_keys, labels),
        user=KeyPair.from_seed(b"w.user"),
        sp=KeyPair.from_seed(b"w.sp"),
        sp2=KeyPair.from_seed(b"w.sp2"),
    )
    return world


@pytest.fixture
def world(tmp_path) -> World:
    return build_world(tmp_path)


@pytest.fixture
def world_with_params(tmp_path) -> World:
    w = build_world(tmp_path)
    setup(w.issuer, w.ledger)
    return w
