"""Command-line entry point.

Subcommands:

* ``run`` -- execute a built-in scenario or a JSON config; emits a human
  summary or, with ``--json``, the machine transcript.
* ``costs`` -- the per-template byte/fee/USD table plus issuance costs.
* ``inspect`` -- queries against a ledger export produced by ``run``.

Exit codes: 0 success, 1 scenario step failure, 2 config or usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from .builtins import BUILTIN_NAMES, builtin_config
from .economics import (
    FeeSchedule,
    SizeModel,
    TxTemplate,
    cost_table,
    identity_cost,
    usd_of,
)
from .ledger import DataCarrier, Multisig1of2, PayToAddress, UtxoLedger
from .ledger.tx import input_address
from .scenarios import ConfigError, ScenarioConfig, StepError, run_scenario

EXIT_OK = 0
EXIT_STEP_FAILURE = 1
EXIT_CONFIG_ERROR = 2


def _schedule_from_args(args, base: FeeSchedule | None = None) -> FeeSchedule:
    base = base or FeeSchedule()
    rate = args.fee_rate if args.fee_rate is not None else base.sat_per_byte
    quote = Fraction(args.usd) if args.usd is not None else base.usd_per_btc
    return FeeSchedule(rate, base.dust, quote)


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def _cmd_run(args) -> int:
    if bool(args.scenario) == bool(args.config):
        print("run: give a built-in scenario name or --config PATH, not both",
              file=sys.stderr)
        return EXIT_CONFIG_ERROR
    try:
        if args.config:
            config = ScenarioConfig.from_json(Path(args.config).read_text())
        else:
            config = builtin_config(args.scenario)
    except (ConfigError, KeyError, OSError) as exc:
        print(f"run: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    if args.seed is not None:
        config.seed = args.seed
    if args.fee_rate is not None or args.usd is not None:
        config.fee = _schedule_from_args(args, config.fee)

    if args.proof_dir:
        proof_dir = Path(args.proof_dir)
        transcript = _run_with_dir(config, proof_dir)
    else:
        with tempfile.TemporaryDirectory(prefix="idchain-proofs-") as tmp:
            transcript = _run_with_dir(config, Path(tmp))
    if isinstance(transcript, int):
        return transcript

    if args.export_ledger:
        Path(args.export_ledger).write_text(transcript.ledger.export_json())
    if args.json:
        sys.stdout.write(transcript.to_json())
    else:
        sys.stdout.write(transcript.human_summary())
    return EXIT_OK


def _run_with_dir(config, proof_dir):
    try:
        return run_scenario(config, proof_dir)
    except StepError as exc:
        print(f"run: {exc}", file=sys.stderr)
        return EXIT_STEP_FAILURE


# ---------------------------------------------------------------------------
# costs
# ---------------------------------------------------------------------------


def _cmd_costs(args) -> int:
    schedule = _schedule_from_args(args)
    model = SizeModel()
    rows = cost_table(schedule, model)
    issuance = [
        {"uses": n, **dict(zip(("satoshi", "usd"), identity_cost(n, schedule, model)))}
        for n in (1, 5, 10)
    ]
    if args.json:
        payload = {
            "schema_version": 1,
            "sat_per_byte": schedule.sat_per_byte,
            "dust": schedule.dust,
            "usd_per_btc": str(schedule.usd_per_btc),
            "templates": [
                {**row, "usd": str(row["usd"])} for row in rows
            ],
            "identity_costs": [
                {"uses": e["uses"], "satoshi": e["satoshi"], "usd": str(e["usd"])}
                for e in issuance
            ],
        }
        json.dump(payload, sys.stdout, sort_keys=True)
        sys.stdout.write("\n")
        return EXIT_OK

    print(f"fee rate {schedule.sat_per_byte} sat/byte, dust {schedule.dust} sat, "
          f"1 BTC = {schedule.usd_per_btc} USD")
    print(f"{'template':<16}{'bytes':>7}{'fee (sat)':>12}{'cost (USD)':>12}")
    for row in rows:
        print(f"{row['template']:<16}{row['bytes']:>7}{row['fee_satoshi']:>12}"
              f"{str(row['usd']):>12}")
        if "note" in row:
            print(f"{'':<16}note: {row['note']}")
    print()
    print(f"{'issuance':<16}{'uses':>7}{'satoshi':>12}{'cost (USD)':>12}")
    for entry in issuance:
        print(f"{'identity':<16}{entry['uses']:>7}{entry['satoshi']:>12}"
              f"{str(entry['usd']):>12}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# inspect
# ---------------------------------------------------------------------------


def _script_repr(script) -> dict:
    if isinstance(script, PayToAddress):
        return {"kind": "p2pkh", "address": script.address.hex()}
    if isinstance(script, Multisig1of2):
        return {
            "kind": "multisig",
            "address_a": script.address_a.hex(),
            "address_b": script.address_b.hex(),
        }
    return {"kind": "carrier", "payload": script.payload.hex()}


def _decode_carrier(ledger, payload: bytes) -> dict | None:
    from .protocol.payloads import (
        GENERATOR_TAG,
        PROOF_REF_TAG,
        PUBLISH_TAG,
        parse_proof_ref,
        parse_publish,
    )
    from .protocol.errors import PayloadError

    try:
        if payload[:1] == bytes([PUBLISH_TAG]):
            element, limit = parse_publish(ledger.group, payload)
            return {
                "layout": "publish",
                "commitment": ledger.group.encode_element(element).hex(),
                "limit": limit,
            }
        if payload[:1] == bytes([PROOF_REF_TAG]):
            digest, locator = parse_proof_ref(payload)
            return {"layout": "proof-ref", "digest": digest.hex(), "locator": locator}
        if payload[:1] == bytes([GENERATOR_TAG]):
            return {"layout": "params-chunk", "index": payload[2], "total": payload[1]}
    except (PayloadError, IndexError):
        pass
    return None


def _tx_report(ledger: UtxoLedger, txid_hex: str) -> dict:
    from .ledger.errors import UnknownTxError
    from .protocol import publish_payload, request_token_slots

    txid = bytes.fromhex(txid_hex)
    tx = ledger.get_tx(txid)  # raises UnknownTxError
    slots = request_token_slots(tx)
    if publish_payload(tx, ledger.group) is not None:
        template = "publish"
    elif slots is not None:
        template = "request" if len(slots) == 1 else "request_double"
    else:
        template = "other"
    report = {
        "txid": txid_hex,
        "template": template,
        "height": ledger.tx_height(txid),
        "inputs": [
            {
                "outpoint": str(i.outpoint),
                "address": input_address(i).hex(),
                "signer_index": i.signer_index,
            }
            for i in tx.inputs
        ],
        "outputs": [],
    }
    for out in tx.outputs:
        entry = {"value": out.value, "script": _script_repr(out.script)}
        if isinstance(out.script, DataCarrier):
            decoded = _decode_carrier(ledger, out.script.payload)
            if decoded:
                entry["decoded"] = decoded
        report["outputs"].append(entry)
    return report


def _chain_report(ledger: UtxoLedger, publish_hex: str) -> dict:
    from .dlrep.commitment import DlrepCommitment
    from .economics import TxTemplate, fee_of
    from .protocol import SpendKind, current_token, publish_payload
    from .protocol.records import IdentityRecord
    from .protocol.sources import FullLedgerSource

    txid = bytes.fromhex(publish_hex)
    tx = ledger.get_tx(txid)
    payload = publish_payload(tx, ledger.group)
    if payload is None:
        raise ValueError("transaction is not an identity publication")
    element, limit = payload
    record = IdentityRecord(
        txid,
        input_address(tx.inputs[0]),
        tx.outputs[0].script.address,
        DlrepCommitment(element, None),
        limit,
        tx.outputs[1].script,
        tx.outputs[1].value,
    )
    source = FullLedgerSource(ledger)
    state = current_token(record, source)

    hops = []
    outpoint = None
    from .ledger.tx import Outpoint
    from .protocol.records import classify_script_spend, request_token_slots as slots_of

    outpoint = Outpoint(txid, 1)
    while True:
        spender = ledger.find_spender(outpoint)
        if spender is None:
            break
        spend_tx = ledger.get_tx(spender)
        kind = classify_script_spend(spend_tx, record.token_script)
        hops.append({"txid": spender.hex(), "kind": kind.value})
        if kind is SpendKind.REVOKE:
            break
        out_idx = next(
            i
            for _, i in slots_of(spend_tx)
            if spend_tx.outputs[i].script == record.token_script
        )
        outpoint = Outpoint(spender, out_idx)

    model = SizeModel()
    per_use = (
        fee_of(TxTemplate.REQUEST, ledger.schedule, model)
        + fee_of(TxTemplate.ACCEPT, ledger.schedule, model)
        + ledger.schedule.dust
    )
    if state.spent_kind is not None:
        status = "revoked"
        revoking = ledger.get_tx(state.spender_txid)
        signer = revoking.inputs[0].signer_index
        extra = {"revoked_by": state.spender_txid.hex(), "signer_index": signer}
    elif state.value - per_use < ledger.schedule.dust:
        status = "exhausted"
        extra = {}
    else:
        status = "active"
        extra = {}
    return {
        "publish": publish_hex,
        "issuer": record.issuer_address.hex(),
        "user": record.user_address.hex(),
        "commitment": ledger.group.encode_element(element).hex(),
        "limit": limit,
        "uses": state.uses,
        "token_value": state.value,
        "status": status,
        "hops": hops,
        **extra,
    }


def _reputation_rows(ledger: UtxoLedger, address_hex: str) -> list[dict]:
    from .protocol import reputation_report
    from .protocol.sources import FullLedgerSource

    rows = reputation_report(bytes.fromhex(address_hex), FullLedgerSource(ledger))
    return [
        {
            "request": r.request_txid.hex(),
            "accept": r.accept_txid.hex() if r.accept_txid else None,
            "sp": r.sp_address.hex(),
            "issuer": r.issuer_address.hex(),
        }
        for r in rows
    ]


def _utxo_dump(ledger: UtxoLedger) -> list[dict]:
    branch = ledger.active
    return [
        {
            "outpoint": str(op),
            "value": out.value,
            "script": _script_repr(out.script),
        }
        for op, out in sorted(branch.utxo.items())
    ]


def _cmd_inspect(args) -> int:
    from .ledger.errors import LedgerError

    try:
        ledger = UtxoLedger.from_export_json(Path(args.ledger).read_text())
    except (OSError, ValueError, KeyError) as exc:
        print(f"inspect: cannot load ledger export: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    try:
        if args.query == "tx":
            result = _tx_report(ledger, args.argument)
        elif args.query == "chain":
            result = _chain_report(ledger, args.argument)
        elif args.query == "reputation":
            result = _reputation_rows(ledger, args.argument)
        elif args.query == "utxo":
            result = _utxo_dump(ledger)
        else:
            print(f"inspect: unknown query {args.query!r}", file=sys.stderr)
            return EXIT_CONFIG_ERROR
    except (LedgerError, ValueError) as exc:
        print(f"inspect: not found: {exc}", file=sys.stderr)
        return EXIT_STEP_FAILURE
    if args.json:
        json.dump(result, sys.stdout, sort_keys=True)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(json.dumps(result, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="idchain",
        description="Identity lifecycle simulator on a deterministic ledger",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario")
    run.add_argument("scenario", nargs="?", choices=BUILTIN_NAMES,
                     help="built-in scenario name")
    run.add_argument("--config", help="path to a scenario config (JSON)")
    run.add_argument("--seed", type=int, help="override the scenario seed")
    run.add_argument("--fee-rate", type=int, help="satoshi per byte")
    run.add_argument("--usd", help="USD per BTC quote")
    run.add_argument("--json", action="store_true", help="emit the JSON transcript")
    run.add_argument("--export-ledger", metavar="PATH",
                     help="write the final ledger state for `inspect`")
    run.add_argument("--proof-dir", metavar="PATH",
                     help="persist proof documents here (default: temp dir)")
    run.set_defaults(func=_cmd_run)

    costs = sub.add_parser("costs", help="print the transaction cost table")
    costs.add_argument("--fee-rate", type=int, help="satoshi per byte")
    costs.add_argument("--usd", help="USD per BTC quote")
    costs.add_argument("--json", action="store_true")
    costs.set_defaults(func=_cmd_costs)

    inspect = sub.add_parser("inspect", help="query a ledger export")
    inspect.add_argument("ledger", help="path of a ledger export (JSON)")
    inspect.add_argument("query", choices=("tx", "chain", "reputation", "utxo"))
    inspect.add_argument("argument", nargs="?", default="",
                         help="txid or address, depending on the query")
    inspect.add_argument("--json", action="store_true")
    inspect.set_defaults(func=_cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
