import itertools
import random

import pytest

from idchain.dlrep import (
    AttributeVector,
    GeneratorSet,
    LengthMismatchError,
    OverlappingGeneratorsError,
    SECP256K1,
    blind_contribution,
    combine,
    commit,
    issue_commitment,
    toy_group,
)


def naive_commit(p: int, gens, exps) -> int:
    """Brute-force product of repeated multiplications over the integers mod p."""
    acc = 1
    for g, x in zip(gens, exps):
        term = 1
        for _ in range(x):
            term = term * g % p
        acc = acc * term % p
    return acc


def toy_gens(generators, labels=None):
    g = toy_group()
    labels = labels or ("",) + tuple(f"f{i}" for i in range(1, len(generators)))
    return GeneratorSet(g, tuple(generators), tuple(labels), issuer="t")


class TestCommit:
    def test_all_zero_exponents_give_identity(self):
        gens = toy_gens((4, 9))
        attrs = AttributeVector(toy_group(), (0, 0))
        assert commit(attrs, gens).element == 1

    def test_single_generator_unit_exponent(self):
        gens = toy_gens((4,), labels=("",))
        attrs = AttributeVector(toy_group(), (1,))
        assert commit(attrs, gens).element == 4

    def test_toy_vector_matches_hand_computation(self):
        # 4**3 * 9**5 mod 23
        gens = toy_gens((4, 9))
        attrs = AttributeVector(toy_group(), (3, 5))
        assert commit(attrs, gens).element == naive_commit(23, (4, 9), (3, 5)) == 6

    def test_oracle_equivalence_full_enumeration(self):
        # every attribute vector in Z_11^3 over three fixed generators
        gens = toy_gens((4, 9, 13))
        for exps in itertools.product(range(11), repeat=3):
            attrs = AttributeVector(toy_group(), exps)
            assert commit(attrs, gens).element == naive_commit(23, (4, 9, 13), exps)

    def test_length_mismatch_rejected(self):
        gens = toy_gens((4, 9))
        with pytest.raises(LengthMismatchError):
            commit(AttributeVector(toy_group(), (1, 2, 3)), gens)

    def test_deterministic(self):
        gens = GeneratorSet.derive(SECP256K1, "iss", ("name", "status"))
        attrs = AttributeVector(SECP256K1, (5, 6, 7))
        assert commit(attrs, gens) == commit(attrs, gens)


class TestBlindContribution:
    def test_zero_and_one(self):
        gens = toy_gens((4, 9))
        assert blind_contribution(0, gens) == 1
        assert blind_contribution(1, gens) == 4

    def test_toy_value(self):
        gens = toy_gens((4, 9))
        assert blind_contribution(3, gens) == 64 % 23 == 18


class TestIssueCommitment:
    def test_identity_blinded_all_zero(self):
        gens = toy_gens((4, 9))
        assert issue_commitment(1, (0,), gens).element == 1

    def test_toy_value_matches_commit(self):
        gens = toy_gens((4, 9))
        assert issue_commitment(18, (5,), gens).element == 6

    def test_homomorphic_split(self):
        rng = random.Random(3)
        gens = GeneratorSet.derive(SECP256K1, "iss", ("a", "b"))
        for _ in range(10):
            x0 = rng.randrange(SECP256K1.order)
            fields = (rng.randrange(SECP256K1.order), rng.randrange(SECP256K1.order))
            via_issue = issue_commitment(blind_contribution(x0, gens), fields, gens)
            direct = commit(AttributeVector(SECP256K1, (x0,) + fields), gens)
            assert via_issue == direct

    def test_invalid_blinded_element_rejected(self):
        gens = toy_gens((4, 9))
        with pytest.raises(Exception):
            issue_commitment(5, (1,), gens)  # 5 is outside the subgroup
        with pytest.raises(LengthMismatchError):
            issue_commitment(1, (1, 2, 3), gens)


class TestCombine:
    def test_identity_commitment_is_neutral(self):
        c1 = commit(AttributeVector(toy_group(), (3, 5)), toy_gens((4, 9)))
        c2 = commit(AttributeVector(toy_group(), (0,)), toy_gens((13,), labels=("",)))
        combined = combine(c1, c2)
        assert combined.element == c1.element
        assert len(combined.gens) == 3

    def test_toy_union_matches_oracle(self):
        c1 = commit(AttributeVector(toy_group(), (3, 5)), toy_gens((4, 9)))
        c2 = commit(AttributeVector(toy_group(), (2,)), toy_gens((13,), labels=("",)))
        combined = combine(c1, c2)
        assert combined.element == naive_commit(23, (4, 9, 13), (3, 5, 2))

    def test_union_equals_commit_of_concatenation(self):
        rng = random.Random(9)
        g1 = GeneratorSet.derive(SECP256K1, "iss1", ("name",))
        g2 = GeneratorSet.derive(SECP256K1, "iss2", ("grade", "year"))
        for _ in range(10):
            a1 = AttributeVector.with_blinding(
                SECP256K1, [rng.randrange(SECP256K1.order)], rng
            )
            a2 = AttributeVector.with_blinding(
                SECP256K1, [rng.randrange(SECP256K1.order) for _ in range(2)], rng
            )
            assert combine(commit(a1, g1), commit(a2, g2)) == commit(
                a1.concat(a2), g1.concat(g2)
            )

    def test_commutes_up_to_generator_order(self):
        c1 = commit(AttributeVector(toy_group(), (3, 5)), toy_gens((4, 9)))
        c2 = commit(AttributeVector(toy_group(), (2,)), toy_gens((13,), labels=("",)))
        assert combine(c1, c2).element == combine(c2, c1).element

    def test_overlapping_sets_refused(self):
        c1 = commit(AttributeVector(toy_group(), (3, 5)), toy_gens((4, 9)))
        c2 = commit(AttributeVector(toy_group(), (2,)), toy_gens((9,), labels=("",)))
        with pytest.raises(OverlappingGeneratorsError):
            combine(c1, c2)

    def test_combined_set_tracks_both_blinding_slots(self):
        g1 = toy_gens((4, 9))
        g2 = toy_gens((13, 2), labels=("", "x"))
        merged = g1.concat(g2)
        assert merged.blinding_indices == frozenset({0, 2})


class TestGeneratorSet:
    def test_rejects_identity_generator(self):
        with pytest.raises(Exception):
            toy_gens((1, 4))

    def test_rejects_duplicates(self):
        with pytest.raises(Exception):
            toy_gens((4, 4))

    def test_label_lookup(self):
        gens = GeneratorSet.derive(toy_group(), "iss", ("status", "tier"))
        assert gens.index_of("status") == 1
        assert gens.index_of("tier") == 2
        with pytest.raises(KeyError):
            gens.index_of("")

    def test_derive_handles_tiny_group_collisions(self):
        # only ten usable elements exist mod 23; a six-slot set must still be distinct
        gens = GeneratorSet.derive(toy_group(), "iss", ("a", "b", "c", "d", "e"))
        assert len({gens.group.encode_element(g) for g in gens.generators}) == 6
