"""Rejection taxonomy for transaction and ledger validation."""

from __future__ import annotations


class LedgerError(Exception):
    """Base class for all ledger failures."""


class TxRejected(LedgerError):
    """A submitted transaction violated a validity or standardness rule."""

    rule = "rejected"

    def __init__(self, detail: str = ""):
        super().__init__(f"{self.rule}: {detail}" if detail else self.rule)
        self.detail = detail


class UnknownOutpointError(TxRejected):
    rule = "unknown-outpoint"


class DoubleSpendError(TxRejected):
    rule = "double-spend"


class BadSignatureError(TxRejected):
    rule = "bad-signature"


class NegativeFeeError(TxRejected):
    rule = "negative-fee"


class DustOutputError(TxRejected):
    rule = "dust-output"


class OversizedDataCarrierError(TxRejected):
    rule = "oversized-data-carrier"


class NonzeroDataCarrierValueError(TxRejected):
    rule = "nonzero-data-carrier-value"


class MultipleDataCarriersError(TxRejected):
    rule = "multiple-data-carriers"


class MissingInputsError(TxRejected):
    rule = "missing-inputs"


class UnknownBranchError(LedgerError):
    pass


class UnknownHeightError(LedgerError):
    pass


class UnknownTxError(LedgerError):
    pass
