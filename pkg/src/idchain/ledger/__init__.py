"""Deterministic UTXO ledger: scripts, transactions, blocks, forks."""

from .chain import Block, BlockHeader, Branch, UtxoLedger, replay_utxo
from .errors import (
    BadSignatureError,
    DoubleSpendError,
    DustOutputError,
    LedgerError,
    MissingInputsError,
    MultipleDataCarriersError,
    NegativeFeeError,
    NonzeroDataCarrierValueError,
    OversizedDataCarrierError,
    TxRejected,
    UnknownBranchError,
    UnknownHeightError,
    UnknownOutpointError,
    UnknownTxError,
)
from .keys import KeyPair, address_of, verify_signature
from .merkle import PathNode, inclusion_path, merkle_root, verify_path
from .scripts import (
    DataCarrier,
    MAX_CARRIER_PAYLOAD,
    Multisig1of2,
    PayToAddress,
    Script,
)
from .tx import (
    Outpoint,
    Transaction,
    TxInput,
    TxOutput,
    build_signed,
    input_address,
    input_authorizes,
)

__all__ = [
    "BadSignatureError",
    "Block",
    "BlockHeader",
    "Branch",
    "DataCarrier",
    "DoubleSpendError",
    "DustOutputError",
    "KeyPair",
    "LedgerError",
    "MAX_CARRIER_PAYLOAD",
    "MissingInputsError",
    "MultipleDataCarriersError",
    "Multisig1of2",
    "NegativeFeeError",
    "NonzeroDataCarrierValueError",
    "Outpoint",
    "OversizedDataCarrierError",
    "PathNode",
    "PayToAddress",
    "Script",
    "Transaction",
    "TxInput",
    "TxOutput",
    "TxRejected",
    "UnknownBranchError",
    "UnknownHeightError",
    "UnknownOutpointError",
    "UnknownTxError",
    "UtxoLedger",
    "address_of",
    "build_signed",
    "inclusion_path",
    "input_address",
    "input_authorizes",
    "merkle_root",
    "replay_utxo",
    "verify_path",
    "verify_signature",
]
