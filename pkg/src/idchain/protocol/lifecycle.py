"""The identity lifecycle: publish, authenticate, acknowledge, revoke.

Four transaction shapes drive everything:

* publication: issuer funds dust to the user's address, a token worth
  calibrate_v(limit) to a 1-of-2 multisig of (user, issuer), and a carrier
  holding the identity commitment and the use limit;
* request: the user spends the current token, paying the provider's
  acknowledgment budget, returning a shrunken token to the same multisig,
  and carrying a reference to an off-chain disclosure proof;
* acknowledgment: the provider spends its payment output, sending dust to
  the issuer -- a public, chainable record that it accepted the proof;
* revocation: any other spend of the token, by either keyholder.

Chain verification walks token ancestry back to a publication, insisting
every hop has the request shape, the issuer is trusted, the hop count is
within the published limit, the newest token is unspent, and the referenced
proof hashes correctly, binds to the spent outpoint, and verifies against
the published commitment.

Funding preparation (splitting an issuer coin into the exact publication
amount, and parameter publication at setup) submits and mines helper
transactions on the spot; everything else only enqueues and lets the caller
mine, so scenarios control block boundaries.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from ..dlrep.commitment import (
    AttributeVector,
    DlrepCommitment,
    GeneratorSet,
    combine,
    issue_commitment,
)
from ..dlrep.group import Group, InvalidEncodingError
from ..dlrep.proof import (
    DisclosureStatement,
    DlrepProof,
    MalformedProofError,
    prove,
    verify,
)
from ..economics import SizeModel, TxTemplate, calibrate_v, fee_of
from ..ledger.chain import UtxoLedger
from ..ledger.errors import LedgerError
from ..ledger.keys import KeyPair
from ..ledger.scripts import DataCarrier, Multisig1of2, PayToAddress
from ..ledger.tx import Outpoint, Transaction, TxOutput, build_signed, input_address
from .errors import (
    InsufficientFundsError,
    InvalidBlindedElementError,
    NotAKeyholderError,
    OutputSpentError,
    PayloadError,
    ProtocolError,
    TokenSpentError,
    UseLimitExhaustedError,
)
from .payloads import (
    GENERATOR_TAG,
    chunk_blob,
    encode_generator_blob,
    encode_proof_ref,
    encode_publish,
    locator_for,
    parse_generator_blob,
    parse_proof_ref,
    reassemble_chunks,
)
from .proofstore import ProofStore
from .records import (
    REASON_BAD_SHAPE,
    REASON_BROKEN_CHAIN,
    REASON_CONTEXT_MISMATCH,
    REASON_HASH_MISMATCH,
    REASON_INVALID_PROOF,
    REASON_MALFORMED_PROOF,
    REASON_PROOF_MISSING,
    REASON_REVOKED,
    REASON_TOKEN_SPENT,
    REASON_UNKNOWN_TX,
    REASON_UNTRUSTED_ISSUER,
    REASON_USE_LIMIT,
    IdentityRecord,
    IssuerProfile,
    ProofRef,
    SpendKind,
    TokenChain,
    VerifyResult,
    classify_script_spend,
    publish_payload,
    request_token_slots,
)
from .sources import FullLedgerSource

DEFAULT_MODEL = SizeModel()

_MAX_WALK = 100_000  # cycle guard; chains are finite by construction


# ---------------------------------------------------------------------------
# funding helpers
# ---------------------------------------------------------------------------


def ensure_exact_utxo(
    ledger: UtxoLedger, keys: KeyPair, amount: int, model: SizeModel = DEFAULT_MODEL
) -> Outpoint:
    """Find or create (split + mine) a coin of exactly ``amount``."""
    for op, out in ledger.utxos_of(keys.address):
        if out.value == amount:
            return op
    split_fee = model.estimate(["p2pkh"], ["p2pkh", "p2pkh"]) * ledger.schedule.sat_per_byte
    needed = amount + split_fee + ledger.schedule.dust
    candidates = [
        (op, out) for op, out in ledger.utxos_of(keys.address) if out.value >= needed
    ]
    if not candidates:
        raise InsufficientFundsError(
            f"no coin of {keys.address.hex()} covers {amount} plus split costs"
        )
    op, out = min(candidates, key=lambda pair: pair[1].value)
    split = build_signed(
        [(op, keys, 0)],
        [
            TxOutput(amount, PayToAddress(keys.address)),
            TxOutput(out.value - amount - split_fee, PayToAddress(keys.address)),
        ],
    )
    ledger.submit(split)
    ledger.mine()
    return Outpoint(split.txid, 0)


# ---------------------------------------------------------------------------
# setup phase: parameter publication
# ---------------------------------------------------------------------------


def setup(issuer: IssuerProfile, ledger: UtxoLedger, model: SizeModel = DEFAULT_MODEL) -> list[bytes]:
    """Publish the issuer's generators and field labels in carrier chunks.

    One transaction per chunk (standardness allows a single carrier each);
    each is mined immediately so the next can spend the change.
    """
    txids = []
    for chunk in chunk_blob(encode_generator_blob(issuer.gens)):
        fee = (
            model.estimate(["p2pkh"], ["p2pkh"], carrier_payload=len(chunk))
            * ledger.schedule.sat_per_byte
        )
        needed = fee + ledger.schedule.dust
        coins = [
            (op, out)
            for op, out in ledger.utxos_of(issuer.keys.address)
            if out.value >= needed
        ]
        if not coins:
            raise InsufficientFundsError("issuer cannot fund parameter publication")
        op, out = min(coins, key=lambda pair: pair[1].value)
        tx = build_signed(
            [(op, issuer.keys, 0)],
            [
                TxOutput(out.value - fee, PayToAddress(issuer.keys.address)),
                TxOutput(0, DataCarrier(chunk)),
            ],
        )
        txids.append(ledger.submit(tx))
        ledger.mine()
    return txids


def read_generators(issuer_address: bytes, source, group: Group) -> GeneratorSet:
    """Reassemble an issuer's published generator set from chain carriers."""
    payloads = []
    for txid in source.txids_from(issuer_address):
        tx = source.get_tx(txid)
        for out in tx.outputs:
            if isinstance(out.script, DataCarrier) and out.script.payload[:1] == bytes(
                [GENERATOR_TAG]
            ):
                payloads.append(out.script.payload)
    blob = reassemble_chunks(payloads)
    return parse_generator_blob(group, blob, issuer_address.hex())


# ---------------------------------------------------------------------------
# enrollment
# ---------------------------------------------------------------------------


def enroll(
    issuer: IssuerProfile,
    user_address: bytes,
    blinded: bytes,
    field_values,
    limit: int,
    ledger: UtxoLedger,
    model: SizeModel = DEFAULT_MODEL,
    value_margin: int = 0,
) -> IdentityRecord:
    """Issue an identity: build and submit the publication transaction.

    ``blinded`` is the user's encoded g0**x0 share; the issuer never sees
    x0.  ``value_margin`` tops the token up beyond exact calibration (the
    hedge an issuer would keep against fee drift).  The publication lands in
    the mempool; the caller mines.
    """
    group = issuer.gens.group
    try:
        element = group.decode_element(blinded)
    except InvalidEncodingError as exc:
        raise InvalidBlindedElementError(str(exc)) from exc
    commitment = issue_commitment(element, field_values, issuer.gens)

    token_value = calibrate_v(limit, ledger.schedule, model) + value_margin
    publish_fee = fee_of(TxTemplate.PUBLISH, ledger.schedule, model)
    funding = ensure_exact_utxo(
        ledger, issuer.keys, token_value + ledger.schedule.dust + publish_fee, model
    )
    token_script = Multisig1of2(user_address, issuer.keys.address)
    tx = build_signed(
        [(funding, issuer.keys, 0)],
        [
            TxOutput(ledger.schedule.dust, PayToAddress(user_address)),
            TxOutput(token_value, token_script),
            TxOutput(0, DataCarrier(encode_publish(group, commitment.element, limit))),
        ],
    )
    ledger.submit(tx)
    return IdentityRecord(
        tx.txid,
        issuer.keys.address,
        user_address,
        commitment,
        limit,
        token_script,
        token_value,
    )


# ---------------------------------------------------------------------------
# token walking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TokenState:
    outpoint: Outpoint
    value: int
    uses: int
    spent_kind: SpendKind | None = None  # REVOKE (or a stale view) if consumed
    spender_txid: bytes | None = None


def current_token(record: IdentityRecord, source) -> TokenState:
    """Follow request hops forward from publication to the live token."""
    outpoint = Outpoint(record.publish_txid, 1)
    value = record.token_value
    uses = 0
    for _ in range(_MAX_WALK):
        spender = source.spender_of(outpoint)
        if spender is None:
            return TokenState(outpoint, value, uses)
        tx = source.get_tx(spender)
        kind = classify_script_spend(tx, record.token_script)
        if kind is SpendKind.REVOKE:
            return TokenState(outpoint, value, uses, kind, spender)
        slots = request_token_slots(tx)
        out_idx = next(
            i for _, i in slots if tx.outputs[i].script == record.token_script
        )
        outpoint = Outpoint(tx.txid, out_idx)
        value = tx.outputs[out_idx].value
        uses += 1
    raise ProtocolError("token walk exceeded the chain-length guard")


# ---------------------------------------------------------------------------
# authentication
# ---------------------------------------------------------------------------


def _authentication_budget(ledger, model) -> tuple[int, int]:
    accept_budget = (
        fee_of(TxTemplate.ACCEPT, ledger.schedule, model) + ledger.schedule.dust
    )
    decrease = fee_of(TxTemplate.REQUEST, ledger.schedule, model) + accept_budget
    return accept_budget, decrease


def build_request(
    user_keys: KeyPair,
    record: IdentityRecord,
    attrs: AttributeVector,
    sp_address: bytes,
    statement: DisclosureStatement,
    store: ProofStore,
    ledger: UtxoLedger,
    branch_id: int | None = None,
    model: SizeModel = DEFAULT_MODEL,
) -> bytes:
    """Spend the current token to authenticate; returns the request txid.

    The disclosure proof is stored off-chain under its hash; the statement's
    context is overwritten with the spent outpoint so the proof cannot be
    replayed for any other spend.
    """
    source = FullLedgerSource(ledger, branch_id)
    state = current_token(record, source)
    if state.spent_kind is not None:
        raise TokenSpentError(
            f"token consumed by {state.spender_txid.hex()} ({state.spent_kind.value})"
        )
    accept_budget, decrease = _authentication_budget(ledger, model)
    residual = state.value - decrease
    if residual < ledger.schedule.dust:
        raise UseLimitExhaustedError(
            f"residual {residual} would fall below dust {ledger.schedule.dust}"
        )

    bound = statement.with_context(state.outpoint.encode())
    proof = prove([attrs], [record.gens], bound)
    digest = store.put(proof.encode(record.gens.group))
    tx = build_signed(
        [(state.outpoint, user_keys, 0)],
        [
            TxOutput(accept_budget, PayToAddress(sp_address)),
            TxOutput(residual, record.token_script),
            TxOutput(0, DataCarrier(encode_proof_ref(digest, locator_for(digest)))),
        ],
    )
    return ledger.submit(tx, branch_id)


def build_request_double(
    user_keys: tuple[KeyPair, KeyPair],
    records: tuple[IdentityRecord, IdentityRecord],
    attrs: tuple[AttributeVector, AttributeVector],
    sp_address: bytes,
    statement: DisclosureStatement,
    store: ProofStore,
    ledger: UtxoLedger,
    branch_id: int | None = None,
    model: SizeModel = DEFAULT_MODEL,
) -> bytes:
    """Authenticate with two identities at once.

    Both tokens are spent and returned in one transaction; the proof covers
    the product commitment over the concatenated generator sets, so the
    statement may link fields across the two identities.  Each token
    decreases by exactly one ordinary authentication; the fee surplus beyond
    the double-request rate is folded into the provider payment.
    """
    source = FullLedgerSource(ledger, branch_id)
    states = []
    for record in records:
        state = current_token(record, source)
        if state.spent_kind is not None:
            raise TokenSpentError(f"token of {record.publish_txid.hex()} consumed")
        states.append(state)
    accept_budget, decrease = _authentication_budget(ledger, model)
    residuals = [s.value - decrease for s in states]
    for residual in residuals:
        if residual < ledger.schedule.dust:
            raise UseLimitExhaustedError("a token cannot fund another use")

    double_fee = fee_of(TxTemplate.REQUEST_DOUBLE, ledger.schedule, model)
    single_fee = fee_of(TxTemplate.REQUEST, ledger.schedule, model)
    sp_value = 2 * accept_budget + (2 * single_fee - double_fee)

    context = states[0].outpoint.encode() + states[1].outpoint.encode()
    bound = statement.with_context(context)
    merged_gens = records[0].gens.concat(records[1].gens)
    merged_attrs = attrs[0].concat(attrs[1])
    proof = prove([merged_attrs], [merged_gens], bound)
    digest = store.put(proof.encode(merged_gens.group))

    tx = build_signed(
        [
            (states[0].outpoint, user_keys[0], 0),
            (states[1].outpoint, user_keys[1], 0),
        ],
        [
            TxOutput(sp_value, PayToAddress(sp_address)),
            TxOutput(residuals[0], records[0].token_script),
            TxOutput(residuals[1], records[1].token_script),
            TxOutput(0, DataCarrier(encode_proof_ref(digest, locator_for(digest)))),
        ],
    )
    return ledger.submit(tx, branch_id)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _PublishInfo:
    record: IdentityRecord
    hops: tuple[bytes, ...]


def _walk_to_publish(source, tx: Transaction, in_idx: int, out_idx: int, group: Group):
    """Backward walk from one token input to its publication.

    Returns (_PublishInfo, None) or (None, reject-reason).  The record it
    builds carries a placeholder commitment resolved later against the
    trusted issuer's generators.
    """
    token_script = tx.outputs[out_idx].script
    hops = [tx.txid]
    outpoint = tx.inputs[in_idx].outpoint
    for _ in range(_MAX_WALK):
        try:
            parent = source.get_tx(outpoint.txid)
        except LedgerError:
            return None, REASON_BROKEN_CHAIN
        if not 0 <= outpoint.index < len(parent.outputs):
            return None, REASON_BROKEN_CHAIN
        if parent.outputs[outpoint.index].script != token_script:
            return None, REASON_BROKEN_CHAIN

        published = publish_payload(parent, group)
        if published is not None:
            if outpoint.index != 1 or len(parent.inputs) != 1:
                return None, REASON_BROKEN_CHAIN
            element, limit = published
            issuer_address = input_address(parent.inputs[0])
            user_script = parent.outputs[0].script
            if token_script != Multisig1of2(user_script.address, issuer_address):
                return None, REASON_BROKEN_CHAIN
            record = IdentityRecord(
                parent.txid,
                issuer_address,
                user_script.address,
                DlrepCommitment(element, None),  # gens filled in by the caller
                limit,
                token_script,
                parent.outputs[1].value,
            )
            return _PublishInfo(record, tuple(reversed(hops))), None

        slots = request_token_slots(parent)
        if slots is None:
            return None, REASON_BROKEN_CHAIN
        match = [pair for pair in slots if pair[1] == outpoint.index]
        if not match:
            return None, REASON_BROKEN_CHAIN
        parent_in, _ = match[0]
        hops.append(parent.txid)
        outpoint = parent.inputs[parent_in].outpoint
    return None, REASON_BROKEN_CHAIN


def verify_request(
    request_txid: bytes,
    trusted: dict[bytes, GeneratorSet],
    source,
    store: ProofStore,
) -> VerifyResult:
    """The provider-side acceptance decision for an authentication.

    ``trusted`` maps issuer addresses to their published generator sets
    (obtained once via :func:`read_generators`).  Hostile input expected
    throughout; the result names the first failed check.
    """
    if not trusted:
        return VerifyResult.reject(REASON_UNTRUSTED_ISSUER)
    group = next(iter(trusted.values())).group
    try:
        tx = source.get_tx(request_txid)
    except LedgerError:
        return VerifyResult.reject(REASON_UNKNOWN_TX)

    slots = request_token_slots(tx)
    if slots is None:
        return VerifyResult.reject(REASON_BAD_SHAPE)

    # (a) ancestry: every hop back to a publication is request-shaped
    infos = []
    for in_idx, out_idx in slots:
        info, reason = _walk_to_publish(source, tx, in_idx, out_idx, group)
        if info is None:
            return VerifyResult.reject(reason)
        infos.append(info)

    # (b) trusted issuer; resolve commitments against published generators
    commitments = []
    for i, info in enumerate(infos):
        gens = trusted.get(info.record.issuer_address)
        if gens is None:
            return VerifyResult.reject(REASON_UNTRUSTED_ISSUER)
        record = IdentityRecord(
            info.record.publish_txid,
            info.record.issuer_address,
            info.record.user_address,
            DlrepCommitment(info.record.commitment.element, gens),
            info.record.limit,
            info.record.token_script,
            info.record.token_value,
        )
        infos[i] = _PublishInfo(record, info.hops)
        commitments.append(record.commitment)

    # (c) hop count within the published limit
    for info in infos:
        if len(info.hops) > info.record.limit:
            return VerifyResult.reject(REASON_USE_LIMIT)

    # (d) the fresh token outputs are still unspent
    for (in_idx, out_idx), info in zip(slots, infos):
        fresh = Outpoint(tx.txid, out_idx)
        try:
            spender = source.spender_of(fresh)
        except LedgerError:
            return VerifyResult.reject(REASON_TOKEN_SPENT)
        if spender is not None:
            try:
                spender_tx = source.get_tx(spender)
            except LedgerError:
                return VerifyResult.reject(REASON_TOKEN_SPENT)
            kind = classify_script_spend(spender_tx, info.record.token_script)
            if kind is SpendKind.REVOKE:
                return VerifyResult.reject(REASON_REVOKED)
            return VerifyResult.reject(REASON_TOKEN_SPENT)

    # (e) the referenced proof is intact, bound to this spend, and valid
    carrier = tx.outputs[-1].script
    try:
        digest, _locator = parse_proof_ref(carrier.payload)
    except PayloadError:
        return VerifyResult.reject(REASON_BAD_SHAPE)
    try:
        proof_bytes = store.get(digest)
    except KeyError:
        return VerifyResult.reject(REASON_PROOF_MISSING)
    if hashlib.sha256(proof_bytes).digest() != digest:
        return VerifyResult.reject(REASON_HASH_MISMATCH)
    try:
        proof = DlrepProof.decode(group, proof_bytes)
    except MalformedProofError:
        return VerifyResult.reject(REASON_MALFORMED_PROOF)

    expected_context = b"".join(
        tx.inputs[in_idx].outpoint.encode() for in_idx, _ in slots
    )
    if proof.statement.context != expected_context:
        return VerifyResult.reject(REASON_CONTEXT_MISMATCH)

    if len(commitments) == 1:
        statement_targets = [commitments[0]]
    else:
        try:
            statement_targets = [combine(commitments[0], commitments[1])]
        except Exception:
            return VerifyResult.reject(REASON_INVALID_PROOF)
    if not verify(statement_targets, proof.statement, proof):
        return VerifyResult.reject(REASON_INVALID_PROOF)

    chains = tuple(
        TokenChain(
            info.record,
            info.hops,
            Outpoint(tx.txid, out_idx),
            tx.outputs[out_idx].value,
        )
        for (in_idx, out_idx), info in zip(slots, infos)
    )
    return VerifyResult.accept(chains, proof.statement)


# ---------------------------------------------------------------------------
# acknowledgment
# ---------------------------------------------------------------------------


def _issuers_of(request_txid: bytes, source, group: Group) -> list[bytes]:
    tx = source.get_tx(request_txid)
    slots = request_token_slots(tx)
    if slots is None:
        raise ProtocolError("transaction is not an authentication request")
    issuers = []
    for in_idx, out_idx in slots:
        info, reason = _walk_to_publish(source, tx, in_idx, out_idx, group)
        if info is None:
            raise ProtocolError(f"cannot resolve issuer: {reason}")
        issuers.append(info.record.issuer_address)
    return issuers


def accept(
    sp_keys: KeyPair,
    request_txid: bytes,
    ledger: UtxoLedger,
    branch_id: int | None = None,
    model: SizeModel = DEFAULT_MODEL,
) -> bytes:
    """Publicly acknowledge a verified request: send dust to the issuer."""
    source = FullLedgerSource(ledger, branch_id)
    issuers = _issuers_of(request_txid, source, ledger.group)
    if len(issuers) != 1:
        raise ProtocolError("use accept_double for coordinated requests")
    tx = source.get_tx(request_txid)
    payment = Outpoint(request_txid, 0)
    if tx.outputs[0].script != PayToAddress(sp_keys.address):
        raise ProtocolError("request does not pay this provider")
    if source.spender_of(payment) is not None:
        raise OutputSpentError("acknowledgment output already spent")
    fee = fee_of(TxTemplate.ACCEPT, ledger.schedule, model)
    value = tx.outputs[0].value - fee
    if value < ledger.schedule.dust:
        raise InsufficientFundsError("payment output cannot cover the acknowledgment")
    ack = build_signed(
        [(payment, sp_keys, 0)],
        [TxOutput(value, PayToAddress(issuers[0]))],
    )
    return ledger.submit(ack, branch_id)


def accept_double(
    sp_keys: KeyPair,
    request_txid: bytes,
    ledger: UtxoLedger,
    branch_id: int | None = None,
    model: SizeModel = DEFAULT_MODEL,
) -> bytes:
    """Acknowledge a coordinated request: dust to each issuer, change back."""
    source = FullLedgerSource(ledger, branch_id)
    issuers = _issuers_of(request_txid, source, ledger.group)
    if len(issuers) != 2:
        raise ProtocolError("not a coordinated request")
    tx = source.get_tx(request_txid)
    payment = Outpoint(request_txid, 0)
    if tx.outputs[0].script != PayToAddress(sp_keys.address):
        raise ProtocolError("request does not pay this provider")
    if source.spender_of(payment) is not None:
        raise OutputSpentError("acknowledgment output already spent")
    fee = fee_of(TxTemplate.ACCEPT_DOUBLE, ledger.schedule, model)
    dust = ledger.schedule.dust
    change = tx.outputs[0].value - 2 * dust - fee
    if change < 0:
        raise InsufficientFundsError("payment output cannot cover both dust sends")
    outputs = [
        TxOutput(dust, PayToAddress(issuers[0])),
        TxOutput(dust, PayToAddress(issuers[1])),
    ]
    if change:
        if change < dust:
            raise InsufficientFundsError("change would be dust")
        outputs.append(TxOutput(change, PayToAddress(sp_keys.address)))
    ack = build_signed([(payment, sp_keys, 0)], outputs)
    return ledger.submit(ack, branch_id)


# ---------------------------------------------------------------------------
# revocation
# ---------------------------------------------------------------------------


def revoke(
    actor_keys: KeyPair,
    record: IdentityRecord,
    destination: bytes,
    ledger: UtxoLedger,
    branch_id: int | None = None,
    model: SizeModel = DEFAULT_MODEL,
) -> bytes:
    """Destroy the token by spending it outside the request shape.

    Either keyholder may do this.  A token already at the dust floor cannot
    pay the full revocation rate, so the fee is capped at what the token can
    afford while leaving a standard output.
    """
    if actor_keys.address == record.token_script.address_a:
        signer_index = 0
    elif actor_keys.address == record.token_script.address_b:
        signer_index = 1
    else:
        raise NotAKeyholderError("actor holds neither key of the token multisig")
    state = current_token(record, FullLedgerSource(ledger, branch_id))
    if state.spent_kind is not None:
        raise TokenSpentError("token already consumed")
    fee = min(
        fee_of(TxTemplate.REVOKE, ledger.schedule, model),
        state.value - ledger.schedule.dust,
    )
    tx = build_signed(
        [(state.outpoint, actor_keys, signer_index)],
        [TxOutput(state.value - fee, PayToAddress(destination))],
    )
    return ledger.submit(tx, branch_id)
