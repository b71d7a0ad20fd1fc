"""Identity lifecycle on top of the ledger: enroll, authenticate, revoke."""

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
from .lifecycle import (
    TokenState,
    accept,
    accept_double,
    build_request,
    build_request_double,
    current_token,
    enroll,
    ensure_exact_utxo,
    read_generators,
    revoke,
    setup,
    verify_request,
)
from .proofstore import ProofStore
from .records import (
    ALL_REASONS,
    IdentityRecord,
    IssuerProfile,
    ProofRef,
    SpendKind,
    TokenChain,
    VerifyResult,
    classify_spend,
    classify_script_spend,
    publish_payload,
    request_token_slots,
)
from .reputation import (
    LightweightClaim,
    LightweightResult,
    ReputationRow,
    challenge_digest,
    lightweight_verify,
    reputation_report,
)
from .sources import (
    ExplorerSource,
    FullLedgerSource,
    HeaderOnlySource,
    LedgerInclusionProvider,
    make_source,
)

__all__ = [
    "ALL_REASONS",
    "ExplorerSource",
    "FullLedgerSource",
    "HeaderOnlySource",
    "IdentityRecord",
    "InsufficientFundsError",
    "InvalidBlindedElementError",
    "IssuerProfile",
    "LedgerInclusionProvider",
    "LightweightClaim",
    "LightweightResult",
    "NotAKeyholderError",
    "OutputSpentError",
    "PayloadError",
    "ProofRef",
    "ProofStore",
    "ProtocolError",
    "ReputationRow",
    "SpendKind",
    "TokenChain",
    "TokenSpentError",
    "TokenState",
    "UseLimitExhaustedError",
    "VerifyResult",
    "accept",
    "accept_double",
    "build_request",
    "build_request_double",
    "challenge_digest",
    "classify_script_spend",
    "classify_spend",
    "current_token",
    "enroll",
    "ensure_exact_utxo",
    "lightweight_verify",
    "make_source",
    "publish_payload",
    "read_generators",
    "reputation_report",
    "revoke",
    "setup",
    "verify_request",
]
