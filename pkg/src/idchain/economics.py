"""Transaction sizing, fees, token-value calibration, and USD conversion.

All money is integer satoshi (1 BTC = 10**8 satoshi).  Template byte counts
are authoritative constants; the per-component estimator underneath them
(overhead, per-input and per-output constants) is fitted so the six identity
templates reproduce those counts exactly, and exists so that auxiliary
transactions (funding splits, parameter publications) can be priced on the
same scale.  The component values are a modeling fit, not wire-accurate
sizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from fractions import Fraction

SATS_PER_BTC = 10**8


class TxTemplate(str, Enum):
    PUBLISH = "publish"
    REVOKE = "revoke"
    REQUEST = "request"
    ACCEPT = "accept"
    REQUEST_DOUBLE = "request_double"
    ACCEPT_DOUBLE = "accept_double"


class UnknownTemplateError(KeyError):
    pass


@dataclass(frozen=True)
class FeeSchedule:
    """Miner fee rate, dust floor, and the USD quote used for display."""

    sat_per_byte: int = 360
    dust: int = 546
    usd_per_btc: Fraction = Fraction(2720)

    def __post_init__(self) -> None:
        if self.sat_per_byte < 0 or self.dust < 0:
            raise ValueError("rate and dust must be non-negative")
        if self.usd_per_btc <= 0:
            raise ValueError("USD quote must be positive")
        if not isinstance(self.usd_per_btc, Fraction):
            object.__setattr__(self, "usd_per_btc", Fraction(self.usd_per_btc))


# Fitted component constants: the unique-up-to-overhead linear solution that
# reproduces every template byte count below.  The publish carrier is priced
# at the 33-byte commitment alone; the two-byte use-limit field it also
# carries is absorbed into the fitted overhead.
OVERHEAD_BYTES = 84
INPUT_BYTES = {"p2pkh": 73, "multisig": 111}
OUTPUT_BYTES = {"p2pkh": 34, "multisig": 34}
CARRIER_BASE_BYTES = 9

PROOF_REF_PAYLOAD_BYTES = 62  # 32-byte hash + 30-byte locator

_TEMPLATE_SHAPES: dict[TxTemplate, tuple[list[str], list[str], int | None]] = {
    TxTemplate.PUBLISH: (["p2pkh"], ["p2pkh", "multisig"], 33),
    TxTemplate.REVOKE: (["multisig"], ["p2pkh"], None),
    TxTemplate.REQUEST: (["multisig"], ["p2pkh", "multisig"], PROOF_REF_PAYLOAD_BYTES),
    TxTemplate.ACCEPT: (["p2pkh"], ["p2pkh"], None),
    TxTemplate.REQUEST_DOUBLE: (
        ["multisig", "multisig"],
        ["p2pkh", "multisig", "multisig"],
        PROOF_REF_PAYLOAD_BYTES,
    ),
    TxTemplate.ACCEPT_DOUBLE: (["p2pkh"], ["p2pkh", "p2pkh"], None),
}


@dataclass(frozen=True)
class SizeModel:
    """Byte counts per transaction template, plus an open-shape estimator."""

    overhead: int = OVERHEAD_BYTES
    input_bytes: dict = field(default_factory=lambda: dict(INPUT_BYTES))
    output_bytes: dict = field(default_factory=lambda: dict(OUTPUT_BYTES))
    carrier_base: int = CARRIER_BASE_BYTES

    def estimate(
        self,
        inputs: list[str] | tuple[str, ...] = (),
        outputs: list[str] | tuple[str, ...] = (),
        carrier_payload: int | None = None,
    ) -> int:
        size = self.overhead
        size += sum(self.input_bytes[k] for k in inputs)
        size += sum(self.output_bytes[k] for k in outputs)
        if carrier_payload is not None:
            size += self.carrier_base + carrier_payload
        return size

    def bytes_of(self, template: TxTemplate | str) -> int:
        try:
            template = TxTemplate(template)
        except ValueError as exc:
            raise UnknownTemplateError(str(template)) from exc
        return self.estimate(*_TEMPLATE_SHAPES[template])

    @property
    def templates(self) -> dict[TxTemplate, int]:
        return {t: self.bytes_of(t) for t in TxTemplate}


def fee_of(
    template: TxTemplate | str, schedule: FeeSchedule, model: SizeModel
) -> int:
    """Fee in satoshi for one template: byte count times the rate."""
    return model.bytes_of(template) * schedule.sat_per_byte


def usd_of(satoshi: int, schedule: FeeSchedule) -> Decimal:
    """Display value in USD, rounded half-up to cents."""
    exact = Fraction(satoshi) * schedule.usd_per_btc / SATS_PER_BTC
    return (Decimal(exact.numerator) / Decimal(exact.denominator)).quantize(
        Decimal("0.01"), rounding=ROUND_HALF_UP
    )


def calibrate_v(n: int, schedule: FeeSchedule, model: SizeModel) -> int:
    """Satoshi to fund an authentication token good for exactly ``n`` uses.

    Each use burns one request fee, one accept fee, and one dust payment
    before the token returns to its holder, and the token left after the
    final use must itself still clear the dust floor.  ``n == 0`` funds a
    single dust-valued token that can never be spent as a use.
    """
    if n < 0:
        raise ValueError("use limit must be non-negative")
    if n == 0:
        return schedule.dust
    per_use = (
        fee_of(TxTemplate.REQUEST, schedule, model)
        + fee_of(TxTemplate.ACCEPT, schedule, model)
        + schedule.dust
    )
    return n * per_use + schedule.dust


def identity_cost(
    n: int, schedule: FeeSchedule, model: SizeModel
) -> tuple[int, Decimal]:
    """Total issuer outlay for an n-use identity, in satoshi and USD.

    The issuer funds the token value, the dust paid to the user's address,
    and the publication fee.
    """
    sats = (
        calibrate_v(n, schedule, model)
        + schedule.dust
        + fee_of(TxTemplate.PUBLISH, schedule, model)
    )
    return sats, usd_of(sats, schedule)


@dataclass(frozen=True)
class TokenPolicy:
    """Issuer-side pairing of a use limit with the token value that funds it."""

    use_limit: int
    token_value: int

    @classmethod
    def for_uses(
        cls, n: int, schedule: FeeSchedule, model: SizeModel, margin: int = 0
    ) -> "TokenPolicy":
        """Exact calibration plus an optional safety margin for rate drift."""
        if margin < 0:
            raise ValueError("margin must be non-negative")
        return cls(n, calibrate_v(n, schedule, model) + margin)

    def check(self, schedule: FeeSchedule, model: SizeModel) -> None:
        floor = calibrate_v(self.use_limit, schedule, model)
        if self.token_value < floor:
            raise ValueError(
                f"token value {self.token_value} cannot fund "
                f"{self.use_limit} uses (needs {floor})"
            )


# USD figures this fee table is calibrated against.  Five of the six follow
# from bytes x rate x quote to the cent; the request_double quote of 5.41
# does not follow from its own 479-byte size (which prices at 4.69) and is
# kept here only so reports can flag the mismatch.
QUOTED_USD = {
    TxTemplate.PUBLISH: Decimal("2.61"),
    TxTemplate.REVOKE: Decimal("2.24"),
    TxTemplate.REQUEST: Decimal("3.28"),
    TxTemplate.ACCEPT: Decimal("1.87"),
    TxTemplate.REQUEST_DOUBLE: Decimal("5.41"),
    TxTemplate.ACCEPT_DOUBLE: Decimal("2.20"),
}

REQUEST_DOUBLE_USD_NOTE = (
    "byte-derived cost is 4.69 USD; the quoted 5.41 USD does not follow "
    "from 479 bytes at this rate and quote"
)


def cost_table(schedule: FeeSchedule, model: SizeModel) -> list[dict]:
    """One row per template: bytes, satoshi fee, USD cost, optional note."""
    rows = []
    for template in TxTemplate:
        fee = fee_of(template, schedule, model)
        row = {
            "template": template.value,
            "bytes": model.bytes_of(template),
            "fee_satoshi": fee,
            "usd": usd_of(fee, schedule),
        }
        if template is TxTemplate.REQUEST_DOUBLE:
            row["note"] = REQUEST_DOUBLE_USD_NOTE
        rows.append(row)
    return rows
