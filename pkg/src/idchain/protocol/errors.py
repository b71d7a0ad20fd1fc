"""Protocol-level failures (distinct from ledger rejections)."""


class ProtocolError(Exception):
    pass


class InsufficientFundsError(ProtocolError):
    pass


class InvalidBlindedElementError(ProtocolError):
    pass


class TokenSpentError(ProtocolError):
    """The identity's current token outpoint has already been consumed."""


class UseLimitExhaustedError(ProtocolError):
    """Another use would push the returned token below the dust floor."""


class OutputSpentError(ProtocolError):
    """The acknowledgment output for this request was already spent."""


class NotAKeyholderError(ProtocolError):
    pass


class PayloadError(ProtocolError):
    """A data-carrier payload does not parse under its declared layout."""
