"""Data-carrier payload layouts.

Three layouts share the 80-byte carrier budget:

* identity publication: tag, commitment element, 2-byte use limit
* authentication proof reference: tag, 32-byte digest, locator (<= 30 bytes)
* issuer parameter chunks: tag, chunk index/total, then a slice of the
  generator blob (element count, elements, length-prefixed labels)
"""

from __future__ import annotations

from ..dlrep.commitment import BLINDING_LABEL, GeneratorSet
from ..dlrep.group import Element, Group, InvalidEncodingError
from .errors import PayloadError

PUBLISH_TAG = 0x50
PROOF_REF_TAG = 0x52
GENERATOR_TAG = 0x47

MAX_LOCATOR_BYTES = 30
MAX_CARRIER = 80
_CHUNK_HEADER = 3  # tag, total, index
CHUNK_CAPACITY = MAX_CARRIER - _CHUNK_HEADER


def encode_publish(group: Group, commitment: Element, limit: int) -> bytes:
    if not 0 <= limit <= 0xFFFF:
        raise PayloadError(f"use limit {limit} does not fit in two bytes")
    return bytes([PUBLISH_TAG]) + group.encode_element(commitment) + limit.to_bytes(2, "big")


def parse_publish(group: Group, payload: bytes) -> tuple[Element, int]:
    if len(payload) != 1 + group.element_size + 2 or payload[0] != PUBLISH_TAG:
        raise PayloadError("not an identity publication payload")
    try:
        element = group.decode_element(payload[1 : 1 + group.element_size])
    except InvalidEncodingError as exc:
        raise PayloadError(str(exc)) from exc
    return element, int.from_bytes(payload[-2:], "big")


def encode_proof_ref(digest: bytes, locator: str) -> bytes:
    raw = locator.encode()
    if len(digest) != 32:
        raise PayloadError("proof digest must be 32 bytes")
    if len(raw) > MAX_LOCATOR_BYTES:
        raise PayloadError(f"locator exceeds {MAX_LOCATOR_BYTES} bytes")
    return bytes([PROOF_REF_TAG]) + digest + raw


def parse_proof_ref(payload: bytes) -> tuple[bytes, str]:
    if len(payload) < 33 or payload[0] != PROOF_REF_TAG:
        raise PayloadError("not a proof reference payload")
    locator = payload[33:]
    if len(locator) > MAX_LOCATOR_BYTES:
        raise PayloadError("locator too long")
    return payload[1:33], locator.decode()


def locator_for(digest: bytes) -> str:
    return "store:" + digest[:12].hex()


# -- issuer parameter publication -------------------------------------------


def encode_generator_blob(gens: GeneratorSet) -> bytes:
    out = bytearray()
    out += len(gens).to_bytes(2, "big")
    for g in gens.generators:
        out += gens.group.encode_element(g)
    for label in gens.labels:
        raw = label.encode()
        if len(raw) > 255:
            raise PayloadError("label too long")
        out += bytes([len(raw)]) + raw
    return bytes(out)


def parse_generator_blob(group: Group, blob: bytes, issuer: str) -> GeneratorSet:
    try:
        count = int.from_bytes(blob[:2], "big")
        pos = 2
        gens = []
        for _ in range(count):
            gens.append(group.decode_element(blob[pos : pos + group.element_size]))
            pos += group.element_size
        labels = []
        for _ in range(count):
            n = blob[pos]
            labels.append(blob[pos + 1 : pos + 1 + n].decode())
            pos += 1 + n
        if pos != len(blob):
            raise PayloadError("trailing bytes in generator blob")
    except (IndexError, InvalidEncodingError, UnicodeDecodeError) as exc:
        raise PayloadError(f"bad generator blob: {exc}") from exc
    blinding = frozenset(i for i, l in enumerate(labels) if l == BLINDING_LABEL)
    return GeneratorSet(group, tuple(gens), tuple(labels), issuer, blinding or frozenset({0}))


def chunk_blob(blob: bytes) -> list[bytes]:
    chunks = [blob[i : i + CHUNK_CAPACITY] for i in range(0, len(blob), CHUNK_CAPACITY)]
    chunks = chunks or [b""]
    if len(chunks) > 255:
        raise PayloadError("parameter blob too large to publish")
    return [
        bytes([GENERATOR_TAG, len(chunks), idx]) + chunk
        for idx, chunk in enumerate(chunks)
    ]


def reassemble_chunks(payloads: list[bytes]) -> bytes:
    """Stitch generator chunks back together; order of arrival is irrelevant."""
    parts: dict[int, bytes] = {}
    total = None
    for payload in payloads:
        if len(payload) < _CHUNK_HEADER or payload[0] != GENERATOR_TAG:
            continue  # some other carrier from the same issuer
        declared, idx = payload[1], payload[2]
        if total is None:
            total = declared
        if declared != total or idx >= total:
            raise PayloadError("inconsistent chunk headers")
        parts[idx] = payload[3:]
    if total is None or len(parts) != total:
        raise PayloadError("missing generator chunks")
    return b"".join(parts[i] for i in range(total))
