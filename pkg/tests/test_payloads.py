import pytest

from idchain.dlrep import GeneratorSet, SECP256K1, toy_group
from idchain.protocol import PayloadError
from idchain.protocol.payloads import (
    CHUNK_CAPACITY,
    chunk_blob,
    encode_generator_blob,
    encode_proof_ref,
    encode_publish,
    locator_for,
    parse_generator_blob,
    parse_proof_ref,
    parse_publish,
    reassemble_chunks,
)


class TestPublishPayload:
    def test_roundtrip_secp(self):
        h = SECP256K1.derive_generator(b"h")
        payload = encode_publish(SECP256K1, h, 7)
        assert len(payload) == 36  # tag + 33-byte point + 2-byte limit
        assert parse_publish(SECP256K1, payload) == (h, 7)

    def test_roundtrip_toy(self):
        payload = encode_publish(toy_group(), 6, 3)
        assert parse_publish(toy_group(), payload) == (6, 3)

    def test_limit_range(self):
        with pytest.raises(PayloadError):
            encode_publish(toy_group(), 6, 70_000)

    def test_garbage_rejected(self):
        with pytest.raises(PayloadError):
            parse_publish(SECP256K1, b"\x00" * 36)
        with pytest.raises(PayloadError):
            parse_publish(SECP256K1, b"")


class TestProofRef:
    def test_roundtrip(self):
        digest = bytes(range(32))
        payload = encode_proof_ref(digest, locator_for(digest))
        assert len(payload) <= 80
        parsed_digest, locator = parse_proof_ref(payload)
        assert parsed_digest == digest
        assert locator == locator_for(digest)

    def test_locator_is_thirty_bytes(self):
        assert len(locator_for(bytes(32)).encode()) == 30

    def test_long_locator_refused(self):
        with pytest.raises(PayloadError):
            encode_proof_ref(bytes(32), "x" * 31)

    def test_bad_digest_length(self):
        with pytest.raises(PayloadError):
            encode_proof_ref(bytes(16), "loc")


class TestGeneratorChunks:
    def test_blob_roundtrip(self):
        gens = GeneratorSet.derive(SECP256K1, "beef", ("name", "status", "tier"))
        blob = encode_generator_blob(gens)
        parsed = parse_generator_blob(SECP256K1, blob, "beef")
        assert parsed == gens

    def test_chunking_is_ceil_division(self):
        gens = GeneratorSet.derive(SECP256K1, "beef", ("name", "status", "tier"))
        blob = encode_generator_blob(gens)
        chunks = chunk_blob(blob)
        assert len(chunks) == -(-len(blob) // CHUNK_CAPACITY)
        assert all(len(c) <= 80 for c in chunks)
        assert reassemble_chunks(chunks) == blob

    def test_reassembly_ignores_order_and_foreign_carriers(self):
        blob = bytes(range(200))
        chunks = chunk_blob(blob)
        shuffled = list(reversed(chunks)) + [b"\x50unrelated"]
        assert reassemble_chunks(shuffled) == blob

    def test_missing_chunk_detected(self):
        chunks = chunk_blob(bytes(range(200)))
        with pytest.raises(PayloadError):
            reassemble_chunks(chunks[:-1])

    def test_single_generator_fits_one_chunk(self):
        gens = GeneratorSet.derive(SECP256K1, "solo", ())
        chunks = chunk_blob(encode_generator_blob(gens))
        assert len(chunks) == 1
