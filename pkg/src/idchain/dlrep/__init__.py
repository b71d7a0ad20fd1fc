"""Commitments and selective-disclosure proofs over prime-order groups."""

from .commitment import (
    AttributeVector,
    BLINDING_LABEL,
    DlrepCommitment,
    GeneratorSet,
    LengthMismatchError,
    OverlappingGeneratorsError,
    blind_contribution,
    combine,
    commit,
    issue_commitment,
)
from .group import (
    Group,
    GroupError,
    InvalidEncodingError,
    SECP256K1,
    SubgroupModP,
    toy_group,
)
from .proof import (
    DisclosureStatement,
    DlrepProof,
    EqualityLink,
    MalformedProofError,
    Revelation,
    StatementError,
    prove,
    verify,
)

__all__ = [
    "AttributeVector",
    "BLINDING_LABEL",
    "DisclosureStatement",
    "DlrepCommitment",
    "DlrepProof",
    "EqualityLink",
    "GeneratorSet",
    "Group",
    "GroupError",
    "InvalidEncodingError",
    "LengthMismatchError",
    "MalformedProofError",
    "OverlappingGeneratorsError",
    "Revelation",
    "SECP256K1",
    "StatementError",
    "SubgroupModP",
    "blind_contribution",
    "combine",
    "commit",
    "issue_commitment",
    "prove",
    "toy_group",
    "verify",
]
