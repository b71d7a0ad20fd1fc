import random

import pytest

from idchain.dlrep.group import (
    SECP256K1,
    GroupError,
    InvalidEncodingError,
    SubgroupModP,
    toy_group,
)


def naive_power(g: int, k: int, p: int) -> int:
    """Repeated multiplication, the brute-force oracle for the small group."""
    acc = 1
    for _ in range(k):
        acc = acc * g % p
    return acc


class TestToyGroup:
    def test_parameters(self):
        g = toy_group()
        assert g.order == 11
        assert g.modulus == 23
        assert g.element_size == 1
        assert g.scalar_size == 1

    def test_rejects_non_safe_prime(self):
        with pytest.raises(GroupError):
            SubgroupModP(13)  # 2*13+1 = 27 is not prime

    def test_power_matches_naive_oracle(self):
        g = toy_group()
        for base in (2, 3, 4, 9, 13):
            for k in range(11):
                assert g.power(base, k) == naive_power(base, k, 23)

    def test_membership(self):
        g = toy_group()
        residues = {x * x % 23 for x in range(1, 23)}
        for el in range(1, 23):
            assert g.is_valid(el) == (el in residues)
        assert not g.is_valid(0)
        assert not g.is_valid(23)

    def test_encode_decode_roundtrip(self):
        g = toy_group()
        for el in sorted({x * x % 23 for x in range(1, 23)}):
            assert g.decode_element(g.encode_element(el)) == el
        with pytest.raises(InvalidEncodingError):
            g.decode_element(bytes([5]))  # 5 is not a quadratic residue mod 23
        with pytest.raises(InvalidEncodingError):
            g.decode_element(b"\x01\x02")

    def test_derived_generators_live_in_subgroup(self):
        g = toy_group()
        for tag in (b"a", b"b", b"c", b"issuer|0||0"):
            el = g.derive_generator(tag)
            assert g.is_valid(el)
            assert el != 1


class TestSecp256k1:
    def test_base_on_curve(self):
        assert SECP256K1.is_valid(SECP256K1.base)

    def test_power_matches_addition_chain(self):
        g = SECP256K1.base
        doubled = SECP256K1.op(g, g)
        assert SECP256K1.power(g, 2) == doubled
        assert SECP256K1.power(g, 3) == SECP256K1.op(doubled, g)

    def test_order_annihilates(self):
        assert SECP256K1.power(SECP256K1.base, SECP256K1.order) is None
        assert SECP256K1.power(SECP256K1.base, 0) is None

    def test_negative_exponent_is_inverse(self):
        g = SECP256K1.base
        assert SECP256K1.op(SECP256K1.power(g, 5), SECP256K1.power(g, -5)) is None

    def test_windowed_and_plain_ladders_agree(self):
        rng = random.Random(7)
        h = SECP256K1.derive_generator(b"unwarmed")  # no table cached
        assert h not in SECP256K1._tables
        SECP256K1.warm(h)
        for _ in range(10):
            k = rng.randrange(SECP256K1.order)
            fresh = SECP256K1.derive_generator(b"unwarmed")
            # same point, one path through the table and one without
            del SECP256K1._tables[h]
            plain = SECP256K1.power(fresh, k)
            SECP256K1.warm(h)
            assert SECP256K1.power(h, k) == plain

    def test_encode_decode_roundtrip(self):
        rng = random.Random(11)
        for _ in range(20):
            p = SECP256K1.power(SECP256K1.base, rng.randrange(1, SECP256K1.order))
            assert SECP256K1.decode_element(SECP256K1.encode_element(p)) == p
        assert SECP256K1.decode_element(b"\x00" * 33) is None
        assert SECP256K1.encode_element(None) == b"\x00" * 33

    def test_decode_rejects_garbage(self):
        with pytest.raises(InvalidEncodingError):
            SECP256K1.decode_element(b"\x04" + b"\x11" * 32)
        with pytest.raises(InvalidEncodingError):
            SECP256K1.decode_element(b"\x02" + b"\xff" * 32)
        with pytest.raises(InvalidEncodingError):
            SECP256K1.decode_element(b"\x02\x01")

    def test_derived_generators_distinct_and_valid(self):
        seen = set()
        for i in range(8):
            el = SECP256K1.derive_generator(b"gen%d" % i)
            assert SECP256K1.is_valid(el)
            seen.add(SECP256K1.encode_element(el))
        assert len(seen) == 8


class TestScalars:
    @pytest.mark.parametrize("group", [toy_group(), SECP256K1])
    def test_scalar_roundtrip(self, group):
        for k in (0, 1, group.order - 1):
            assert group.decode_scalar(group.encode_scalar(k)) == k

    def test_scalar_decode_requires_canonical(self):
        g = toy_group()
        with pytest.raises(InvalidEncodingError):
            g.decode_scalar(bytes([11]))  # == order, not reduced
        with pytest.raises(InvalidEncodingError):
            g.decode_scalar(b"\x01\x02")

    def test_hash_to_scalar_consistent_across_groups(self):
        # same digest, different reductions
        big = SECP256K1.hash_to_scalar(b"x")
        small = toy_group().hash_to_scalar(b"x")
        assert 0 <= small < 11
        assert 0 <= big < SECP256K1.order
