"""Non-interactive proofs of knowledge for multi-base commitments.

The base protocol proves knowledge of exponents (X0..Xn) behind
h = prod(g_j ** X_j):

1. pick random nonces a_j, form A = prod(g_j ** a_j), derive c = H(A)
2. respond with b_j = a_j + c * X_j
3. a verifier accepts when H(prod(g_j ** b_j) * h ** -c) == c

This module layers selective disclosure on top: a statement may reveal
chosen attribute values and assert equalities between attribute slots
(within one commitment or across several).  Revealed slots are divided out
of h before the exchange, so responses exist only for hidden slots; slots
joined by an equality assertion share a single nonce and a single response,
which is what makes the equality binding.

The challenge is bound to a domain tag, the full commitment list, the
encoded statement (including its context bytes), and every A value, so a
transcript cannot be replayed for a different spend or a different claim.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

from .commitment import DlrepCommitment
from .group import Group, GroupError, InvalidEncodingError, Scalar

CHALLENGE_TAG = b"idchain.dlrep.challenge.v1"
NONCE_TAG = b"idchain.dlrep.nonce.v1"
PROOF_TAG = 0x01


class StatementError(GroupError):
    """Statement is malformed or contradicts the prover's attributes."""


class MalformedProofError(GroupError):
    """Proof bytes do not parse; distinct from an honest verification failure."""


Slot = tuple[int, int]  # (commitment index, attribute index)


@dataclass(frozen=True)
class Revelation:
    commitment: int
    index: int
    value: Scalar


@dataclass(frozen=True)
class EqualityLink:
    a: Slot
    b: Slot


@dataclass(frozen=True)
class DisclosureStatement:
    """What a proof discloses: value revelations, equality links, context.

    ``context`` binds the proof to one specific use -- the protocol layer
    sets it to the ledger outpoint being spent -- so that verifying the same
    proof under any other context fails.
    """

    reveals: tuple[Revelation, ...] = ()
    links: tuple[EqualityLink, ...] = ()
    context: bytes = b""

    def normalized(self) -> "DisclosureStatement":
        reveals = tuple(
            sorted(self.reveals, key=lambda r: (r.commitment, r.index))
        )
        links = []
        for link in self.links:
            a, b = sorted((link.a, link.b))
            links.append(EqualityLink(a, b))
        return DisclosureStatement(reveals, tuple(sorted(links, key=lambda l: (l.a, l.b))), self.context)

    def with_context(self, context: bytes) -> "DisclosureStatement":
        return replace(self, context=context)

    def encode(self, group: Group) -> bytes:
        s = self.normalized()
        out = bytearray()
        out += len(s.reveals).to_bytes(2, "big")
        for r in s.reveals:
            out += r.commitment.to_bytes(2, "big")
            out += r.index.to_bytes(2, "big")
            out += group.encode_scalar(r.value)
        out += len(s.links).to_bytes(2, "big")
        for link in s.links:
            for ci, ai in (link.a, link.b):
                out += ci.to_bytes(2, "big")
                out += ai.to_bytes(2, "big")
        out += len(s.context).to_bytes(2, "big")
        out += s.context
        return bytes(out)

    @classmethod
    def decode(cls, group: Group, data: bytes) -> tuple["DisclosureStatement", int]:
        try:
            pos = 0

            def take(n: int) -> bytes:
                nonlocal pos
                if pos + n > len(data):
                    raise MalformedProofError("statement truncated")
                chunk = data[pos : pos + n]
                pos += n
                return chunk

            n_reveals = int.from_bytes(take(2), "big")
            reveals = []
            for _ in range(n_reveals):
                ci = int.from_bytes(take(2), "big")
                ai = int.from_bytes(take(2), "big")
                value = group.decode_scalar(take(group.scalar_size))
                reveals.append(Revelation(ci, ai, value))
            n_links = int.from_bytes(take(2), "big")
            links = []
            for _ in range(n_links):
                a = (int.from_bytes(take(2), "big"), int.from_bytes(take(2), "big"))
                b = (int.from_bytes(take(2), "big"), int.from_bytes(take(2), "big"))
                links.append(EqualityLink(a, b))
            ctx_len = int.from_bytes(take(2), "big")
            context = take(ctx_len)
        except InvalidEncodingError as exc:
            raise MalformedProofError(str(exc)) from exc
        return cls(tuple(reveals), tuple(links), context), pos


@dataclass(frozen=True)
class DlrepProof:
    """Challenge plus one response per hidden equality class."""

    statement: DisclosureStatement
    challenge: Scalar
    responses: tuple[Scalar, ...]

    def encode(self, group: Group) -> bytes:
        stmt = self.statement.encode(group)
        out = bytearray([PROOF_TAG])
        out += len(stmt).to_bytes(2, "big")
        out += stmt
        out += group.encode_scalar(self.challenge)
        out += len(self.responses).to_bytes(2, "big")
        for b in self.responses:
            out += group.encode_scalar(b)
        return bytes(out)

    @classmethod
    def decode(cls, group: Group, data: bytes) -> "DlrepProof":
        if len(data) < 3 or data[0] != PROOF_TAG:
            raise MalformedProofError("bad proof tag")
        stmt_len = int.from_bytes(data[1:3], "big")
        body = data[3:]
        if len(body) < stmt_len:
            raise MalformedProofError("proof truncated")
        statement, used = DisclosureStatement.decode(group, body[:stmt_len])
        if used != stmt_len:
            raise MalformedProofError("trailing bytes inside statement")
        rest = body[stmt_len:]
        width = group.scalar_size
        if len(rest) < width + 2:
            raise MalformedProofError("proof truncated")
        try:
            challenge = group.decode_scalar(rest[:width])
            n = int.from_bytes(rest[width : width + 2], "big")
            rest = rest[width + 2 :]
            if len(rest) != n * width:
                raise MalformedProofError("response block has the wrong length")
            responses = tuple(
                group.decode_scalar(rest[i * width : (i + 1) * width])
                for i in range(n)
            )
        except InvalidEncodingError as exc:
            raise MalformedProofError(str(exc)) from exc
        return cls(statement, challenge, responses)


# ---------------------------------------------------------------------------
# statement analysis
# ---------------------------------------------------------------------------


def _check_statement_shape(statement: DisclosureStatement, gen_sets) -> None:
    """Structural checks that need no secrets; used by prover and verifier."""
    seen_reveals = set()
    for r in statement.reveals:
        if not 0 <= r.commitment < len(gen_sets):
            raise StatementError(f"revelation names commitment {r.commitment}")
        gens = gen_sets[r.commitment]
        if not 0 <= r.index < len(gens):
            raise StatementError(f"revelation index {r.index} out of range")
        if r.index in gens.blinding_indices:
            raise StatementError("the blinding slot may never be revealed")
        if (r.commitment, r.index) in seen_reveals:
            raise StatementError("duplicate revelation")
        seen_reveals.add((r.commitment, r.index))
    for link in statement.links:
        for ci, ai in (link.a, link.b):
            if not 0 <= ci < len(gen_sets):
                raise StatementError(f"equality link names commitment {ci}")
            if not 0 <= ai < len(gen_sets[ci]):
                raise StatementError(f"equality link index {ai} out of range")
            if ai in gen_sets[ci].blinding_indices:
                raise StatementError("the blinding slot may never be linked")
            if (ci, ai) in seen_reveals:
                raise StatementError("a revealed slot cannot also be linked")
        if link.a == link.b:
            raise StatementError("equality link must join two distinct slots")


def _hidden_slots(statement: DisclosureStatement, gen_sets) -> list[Slot]:
    revealed = {(r.commitment, r.index) for r in statement.reveals}
    slots = []
    for ci, gens in enumerate(gen_sets):
        for ai in range(len(gens)):
            if (ci, ai) not in revealed:
                slots.append((ci, ai))
    return slots


def _equality_classes(
    statement: DisclosureStatement, gen_sets
) -> tuple[list[list[Slot]], dict[Slot, int]]:
    """Partition hidden slots; linked slots share a class (and a response).

    Classes are ordered by their smallest member so prover and verifier
    agree on response ordering without extra bookkeeping.
    """
    slots = _hidden_slots(statement, gen_sets)
    parent: dict[Slot, Slot] = {s: s for s in slots}

    def find(s: Slot) -> Slot:
        while parent[s] != s:
            parent[s] = parent[parent[s]]
            s = parent[s]
        return s

    for link in statement.links:
        ra, rb = find(link.a), find(link.b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    groups: dict[Slot, list[Slot]] = {}
    for s in slots:
        groups.setdefault(find(s), []).append(s)
    classes = [sorted(member) for _, member in sorted(groups.items())]
    index = {s: i for i, cls in enumerate(classes) for s in cls}
    return classes, index


def _challenge(
    group: Group,
    commitment_encs: list[bytes],
    statement_bytes: bytes,
    a_encs: list[bytes],
) -> Scalar:
    parts = [CHALLENGE_TAG, len(commitment_encs).to_bytes(2, "big")]
    parts += commitment_encs
    parts.append(statement_bytes)
    parts += a_encs
    return group.hash_to_scalar(*parts)


def _residual(group: Group, commitment, gens, reveals) -> object:
    """h with every revealed contribution divided out."""
    h = commitment
    for r in reveals:
        h = group.op(h, group.power(gens.generators[r.index], -r.value))
    return h


# ---------------------------------------------------------------------------
# prove / verify
# ---------------------------------------------------------------------------


def prove(attr_vectors, gen_sets, statement: DisclosureStatement, rng=None) -> DlrepProof:
    """Prove knowledge of every hidden attribute under ``statement``.

    ``attr_vectors`` and ``gen_sets`` are parallel sequences, one entry per
    commitment the statement refers to.  With ``rng=None`` the nonces are
    derived by hashing the secret scalars together with the encoded
    statement, which makes proofs reproducible for a fixed input; pass a
    randomness source to get fresh transcripts instead.

    Raises :class:`StatementError` rather than emitting a proof that can
    never verify (wrong revealed value, unequal linked values, or a
    statement touching a blinding slot).
    """
    attr_vectors = list(attr_vectors)
    gen_sets = list(gen_sets)
    if len(attr_vectors) != len(gen_sets) or not gen_sets:
        raise StatementError("need one attribute vector per generator set")
    group = gen_sets[0].group
    for attrs, gens in zip(attr_vectors, gen_sets):
        if gens.group is not group or attrs.group is not group:
            raise StatementError("all commitments must share one group")
        if len(attrs) != len(gens):
            raise StatementError("attribute vector does not match its generators")

    statement = statement.normalized()
    _check_statement_shape(statement, gen_sets)
    for r in statement.reveals:
        if attr_vectors[r.commitment].scalars[r.index] != r.value % group.order:
            raise StatementError(
                f"claimed value for slot ({r.commitment},{r.index}) is false"
            )
    for link in statement.links:
        (ca, ia), (cb, ib) = link.a, link.b
        if attr_vectors[ca].scalars[ia] != attr_vectors[cb].scalars[ib]:
            raise StatementError("linked attributes are not equal")

    classes, class_of = _equality_classes(statement, gen_sets)
    statement_bytes = statement.encode(group)

    if rng is None:
        seed = hashlib.sha256(
            NONCE_TAG
            + b"".join(
                group.encode_scalar(x)
                for attrs in attr_vectors
                for x in attrs.scalars
            )
            + statement_bytes
        ).digest()
        nonces = [
            group.hash_to_scalar(seed, t.to_bytes(4, "big"))
            for t in range(len(classes))
        ]
    else:
        nonces = [group.random_scalar(rng) for _ in classes]

    commitment_encs = []
    a_encs = []
    for ci, (attrs, gens) in enumerate(zip(attr_vectors, gen_sets)):
        h = group.multi_power(zip(gens.generators, attrs.scalars))
        commitment_encs.append(group.encode_element(h))
        a_i = group.multi_power(
            (gens.generators[ai], nonces[class_of[(ci, ai)]])
            for (cj, ai) in class_of
            if cj == ci
        )
        a_encs.append(group.encode_element(a_i))

    c = _challenge(group, commitment_encs, statement_bytes, a_encs)
    responses = []
    for cls_slots, a in zip(classes, nonces):
        ci, ai = cls_slots[0]
        x = attr_vectors[ci].scalars[ai]
        responses.append((a + c * x) % group.order)
    return DlrepProof(statement, c, tuple(responses))


def verify(commitments, statement: DisclosureStatement, proof: DlrepProof) -> bool:
    """Check a proof against commitments and the statement the verifier wants.

    Returns False on any inconsistency: challenge mismatch, tampered
    response, a statement that differs from the proven one, out-of-range
    indices, or a touched blinding slot.  Hostile input is expected; nothing
    here raises on untrusted values that merely fail to verify.
    """
    commitments = list(commitments)
    if not commitments:
        return False
    group = commitments[0].group
    gen_sets = [c.gens for c in commitments]
    if statement.normalized() != proof.statement.normalized():
        return False
    statement = proof.statement.normalized()
    try:
        _check_statement_shape(statement, gen_sets)
    except StatementError:
        return False

    classes, class_of = _equality_classes(statement, gen_sets)
    if len(proof.responses) != len(classes):
        return False
    c = proof.challenge % group.order

    statement_bytes = statement.encode(group)
    commitment_encs = [c_i.encode() for c_i in commitments]
    a_encs = []
    for ci, commitment in enumerate(commitments):
        reveals = [r for r in statement.reveals if r.commitment == ci]
        residual = _residual(group, commitment.element, commitment.gens, reveals)
        a_i = group.multi_power(
            (commitment.gens.generators[ai], proof.responses[class_of[(cj, ai)]])
            for (cj, ai) in class_of
            if cj == ci
        )
        a_i = group.op(a_i, group.power(residual, -c))
        a_encs.append(group.encode_element(a_i))

    return _challenge(group, commitment_encs, statement_bytes, a_encs) == c
