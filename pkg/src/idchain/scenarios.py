"""Scenario orchestration: declarative configs driven into transcripts.

A scenario declares actors (issuers with field labels, users, service
providers), identities (issuer, user, attribute values, use limit), a
faucet, and a step list.  The runner derives every key and blinding scalar
from the scenario seed, executes the steps against a fresh ledger, and logs
every ledger mutation and verification decision into a transcript whose
JSON form is byte-stable for a fixed config and seed.

Steps reference earlier results by the optional ``id`` field ("last" refers
to the most recent request).  A step with ``expect_error`` must fail with a
matching error, which is recorded and not fatal; any other failure aborts
the run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .dlrep import (
    AttributeVector,
    DisclosureStatement,
    EqualityLink,
    Revelation,
    SECP256K1,
    StatementError,
    blind_contribution,
)
from .dlrep.group import Group
from .economics import FeeSchedule, SizeModel, usd_of
from .ledger import (
    DataCarrier,
    KeyPair,
    LedgerError,
    Transaction,
    TxRejected,
    UtxoLedger,
)
from .protocol import (
    IssuerProfile,
    ProofStore,
    ProtocolError,
    accept,
    accept_double,
    build_request,
    build_request_double,
    challenge_digest,
    enroll,
    lightweight_verify,
    make_source,
    publish_payload,
    reputation_report,
    request_token_slots,
    revoke,
    setup,
    verify_request,
)
from .protocol.payloads import GENERATOR_TAG
from .protocol.reputation import LightweightClaim

SCHEMA_VERSION = 1

BTC = 10**8


class ConfigError(Exception):
    """Names the config field that failed validation."""

    def __init__(self, fieldname: str, message: str):
        super().__init__(f"{fieldname}: {message}")
        self.fieldname = fieldname


class StepError(Exception):
    def __init__(self, index: int, op: str, cause: Exception):
        super().__init__(f"step {index} ({op}): {cause}")
        self.index = index
        self.cause = cause


@dataclass(frozen=True)
class ActorSpec:
    role: str  # issuer | user | sp
    labels: tuple[str, ...] = ()


@dataclass(frozen=True)
class IdentitySpec:
    issuer: str
    user: str
    attrs: dict[str, Any]
    limit: int
    margin: int = 0


@dataclass
class ScenarioConfig:
    name: str
    seed: int
    fee: FeeSchedule
    actors: dict[str, ActorSpec]
    identities: dict[str, IdentitySpec]
    faucet: dict[str, int]
    steps: list[dict]

    @classmethod
    def from_dict(cls, obj: dict) -> "ScenarioConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config", "top level must be an object")
        name = obj.get("name")
        if not isinstance(name, str) or not name:
            raise ConfigError("name", "required string")
        seed = obj.get("seed", 0)
        if not isinstance(seed, int) or seed < 0:
            raise ConfigError("seed", "must be a non-negative integer")
        fee_obj = obj.get("fee", {})
        try:
            fee = FeeSchedule(
                fee_obj.get("sat_per_byte", 360),
                fee_obj.get("dust", 546),
                Fraction(str(fee_obj.get("usd_per_btc", 2720))),
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError("fee", str(exc)) from exc

        actors = {}
        for actor_name, spec in obj.get("actors", {}).items():
            role = spec.get("role")
            if role not in ("issuer", "user", "sp"):
                raise ConfigError(f"actors.{actor_name}.role", f"unknown role {role!r}")
            labels = tuple(spec.get("labels", ()))
            if role != "issuer" and labels:
                raise ConfigError(f"actors.{actor_name}.labels", "only issuers carry labels")
            actors[actor_name] = ActorSpec(role, labels)
        if not actors:
            raise ConfigError("actors", "at least one actor required")

        identities = {}
        for ident_name, spec in obj.get("identities", {}).items():
            prefix = f"identities.{ident_name}"
            issuer = spec.get("issuer")
            user = spec.get("user")
            if issuer not in actors or actors[issuer].role != "issuer":
                raise ConfigError(f"{prefix}.issuer", f"unknown issuer {issuer!r}")
            if user not in actors or actors[user].role != "user":
                raise ConfigError(f"{prefix}.user", f"unknown user {user!r}")
            attrs = spec.get("attrs", {})
            unknown = set(attrs) - set(actors[issuer].labels)
            if unknown:
                raise ConfigError(f"{prefix}.attrs", f"labels not published by issuer: {sorted(unknown)}")
            missing = set(actors[issuer].labels) - set(attrs)
            if missing:
                raise ConfigError(f"{prefix}.attrs", f"missing values for: {sorted(missing)}")
            limit = spec.get("limit")
            if not isinstance(limit, int) or limit < 0:
                raise ConfigError(f"{prefix}.limit", "must be a non-negative integer")
            margin = spec.get("margin", 0)
            if not isinstance(margin, int) or margin < 0:
                raise ConfigError(f"{prefix}.margin", "must be a non-negative integer")
            identities[ident_name] = IdentitySpec(issuer, user, dict(attrs), limit, margin)

        faucet = {}
        for actor_name, amount in obj.get("faucet", {}).items():
            if actor_name not in actors:
                raise ConfigError(f"faucet.{actor_name}", "unknown actor")
            if not isinstance(amount, int) or amount <= 0:
                raise ConfigError(f"faucet.{actor_name}", "must be a positive satoshi amount")
            faucet[actor_name] = amount

        steps = obj.get("steps", [])
        if not isinstance(steps, list):
            raise ConfigError("steps", "must be a list")
        for i, step in enumerate(steps):
            if not isinstance(step, dict) or "op" not in step:
                raise ConfigError(f"steps[{i}]", "every step needs an 'op'")
            for key in ("identity", "identities"):
                if key in step:
                    names = step[key] if isinstance(step[key], list) else [step[key]]
                    for n in names:
                        if n not in identities:
                            raise ConfigError(f"steps[{i}].{key}", f"unknown identity {n!r}")
            for key in ("issuer", "sp", "actor", "user", "verifier", "destination"):
                if key in step and step[key] not in actors:
                    raise ConfigError(f"steps[{i}].{key}", f"unknown actor {step[key]!r}")
        return cls(name, seed, fee, actors, identities, faucet, list(steps))

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"not valid JSON: {exc}") from exc


def attribute_scalar(group: Group, value: Any) -> int:
    """Map a config attribute value to a scalar; equal values collide by design."""
    if isinstance(value, int):
        return value % group.order
    return group.hash_to_scalar(b"idchain.attr.value.v1", str(value).encode())


# ---------------------------------------------------------------------------
# recording ledger
# ---------------------------------------------------------------------------


class _RecordingLedger(UtxoLedger):
    """Ledger that reports every submission, block, and reorg to the runner."""

    def __init__(self, *args, **kwargs):
        self.recorder = None
        super().__init__(*args, **kwargs)

    def submit(self, tx: Transaction, branch_id: int | None = None) -> bytes:
        txid = super().submit(tx, branch_id)
        if self.recorder:
            self.recorder.on_tx(tx, self.branch(branch_id).id)
        return txid

    def mine(self, branch_id: int | None = None):
        resolved = self.branch(branch_id).id
        before = self.active_id
        block = super().mine(branch_id)
        if self.recorder:
            self.recorder.on_block(block, resolved, before, self.active_id)
        return block


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------

_EXPECTED_ERRORS = (ProtocolError, TxRejected, LedgerError, StatementError)


@dataclass
class _IdentityState:
    spec: IdentitySpec
    record: object = None
    attrs: AttributeVector | None = None


class ScenarioRunner:
    def __init__(self, config: ScenarioConfig, proof_dir, group: Group = SECP256K1):
        self.config = config
        self.group = group
        self.model = SizeModel()
        self.events: list[dict] = []
        self._step_label = "init"
        self._refs: dict[str, bytes] = {}
        self._last_request: bytes | None = None
        self._branches: dict[str, int] = {"main": 0}

        self.keys: dict[str, KeyPair] = {
            name: self._derive_key(name) for name in config.actors
        }
        self.issuers: dict[str, IssuerProfile] = {
            name: IssuerProfile.create(name, self.keys[name], spec.labels)
            for name, spec in config.actors.items()
            if spec.role == "issuer"
        }
        self.store = ProofStore(proof_dir)
        faucet = [
            (self.keys[name].address, amount)
            for name, amount in config.faucet.items()
        ]
        self.ledger = _RecordingLedger(faucet, config.fee, group)
        self.ledger.recorder = self
        self.identities = {
            name: _IdentityState(spec) for name, spec in config.identities.items()
        }

    # -- key and attribute derivation ------------------------------------

    def _derive_key(self, name: str) -> KeyPair:
        seed = b"idchain.actor.%d.%s" % (self.config.seed, name.encode())
        return KeyPair.from_seed(seed, self.group)

    def _blinding_scalar(self, identity_name: str) -> int:
        return self.group.hash_to_scalar(
            b"idchain.blind.v1",
            self.config.seed.to_bytes(8, "big"),
            identity_name.encode(),
        )

    def _attr_vector(self, name: str) -> AttributeVector:
        spec = self.config.identities[name]
        issuer = self.issuers[spec.issuer]
        values = tuple(
            attribute_scalar(self.group, spec.attrs[label])
            for label in issuer.gens.labels[1:]
        )
        return AttributeVector(self.group, (self._blinding_scalar(name),) + values)

    # -- recorder hooks ----------------------------------------------------

    def _template_of(self, tx: Transaction) -> str:
        if publish_payload(tx, self.group) is not None:
            return "publish"
        slots = request_token_slots(tx)
        if slots is not None:
            return "request" if len(slots) == 1 else "request_double"
        for out in tx.outputs:
            if isinstance(out.script, DataCarrier) and out.script.payload[:1] == bytes(
                [GENERATOR_TAG]
            ):
                return "params"
        return self._step_label

    def on_tx(self, tx: Transaction, branch_id: int) -> None:
        branch = self.ledger.branch(branch_id)
        total_in = sum(
            branch.utxo[txin.outpoint].value
            for txin in tx.inputs
            if txin.outpoint in branch.utxo
        )
        self.events.append(
            {
                "event": "tx",
                "template": self._template_of(tx),
                "txid": tx.txid.hex(),
                "branch": branch_id,
                "total_in": total_in,
                "total_out": tx.total_output,
                "fee": total_in - tx.total_output,
                "outputs": [out.value for out in tx.outputs],
            }
        )

    def on_block(self, block, branch_id: int, active_before: int, active_after: int) -> None:
        self.events.append(
            {
                "event": "block",
                "branch": branch_id,
                "height": block.header.height,
                "hash": block.hash.hex(),
                "txids": [t.txid.hex() for t in block.transactions],
            }
        )
        if active_after != active_before:
            self.events.append({"event": "reorg", "active": active_after})

    # -- reference resolution ---------------------------------------------

    def _branch_of(self, step: dict) -> int | None:
        ref = step.get("branch")
        if ref is None:
            return None
        if ref not in self._branches:
            raise KeyError(f"unknown branch reference {ref!r}")
        return self._branches[ref]

    def _request_ref(self, step: dict) -> bytes:
        ref = step.get("request", "last")
        if ref == "last":
            if self._last_request is None:
                raise KeyError("no request issued yet")
            return self._last_request
        if ref not in self._refs:
            raise KeyError(f"unknown request reference {ref!r}")
        return self._refs[ref]

    def _trusted(self, step: dict) -> dict:
        names = step.get("trust", list(self.issuers))
        return {
            self.issuers[n].address: self.issuers[n].gens for n in names
        }

    def _statement_single(self, state: _IdentityState, reveal) -> DisclosureStatement:
        gens = self.issuers[state.spec.issuer].gens
        reveals = tuple(
            Revelation(0, gens.index_of(label), state.attrs.scalars[gens.index_of(label)])
            for label in reveal
        )
        return DisclosureStatement(reveals=reveals)

    # -- step execution ------------------------------------------------------

    def run(self) -> "Transcript":
        for index, step in enumerate(self.config.steps):
            op = step["op"]
            # shape-based template detection falls back to this label; the
            # only unshaped txs are funding splits and acknowledgments
            self._step_label = {"enroll": "fund", "setup": "fund"}.get(op, op)
            expected = step.get("expect_error")
            try:
                self._execute(step)
            except _EXPECTED_ERRORS as exc:
                label = f"{type(exc).__name__}: {exc}"
                if expected and expected in label:
                    self.events.append(
                        {"event": "expected-failure", "step": index, "op": op, "error": label}
                    )
                    continue
                raise StepError(index, op, exc) from exc
            except KeyError as exc:
                raise StepError(index, op, exc) from exc
            else:
                if expected:
                    raise StepError(
                        index, op, RuntimeError(f"expected a {expected!r} failure")
                    )
        return self._transcript()

    def _execute(self, step: dict) -> None:
        op = step["op"]
        if op == "setup":
            setup(self.issuers[step["issuer"]], self.ledger, self.model)
        elif op == "enroll":
            self._do_enroll(step)
        elif op == "mine":
            for _ in range(step.get("count", 1)):
                self.ledger.mine(self._branch_of(step))
        elif op == "fork":
            self._do_fork(step)
        elif op == "request":
            self._do_request(step)
        elif op == "request_double":
            self._do_request_double(step)
        elif op == "accept":
            txid = accept(
                self.keys[step["sp"]],
                self._request_ref(step),
                self.ledger,
                branch_id=self._branch_of(step),
                model=self.model,
            )
            self._remember(step, txid)
        elif op == "accept_double":
            txid = accept_double(
                self.keys[step["sp"]],
                self._request_ref(step),
                self.ledger,
                branch_id=self._branch_of(step),
                model=self.model,
            )
            self._remember(step, txid)
        elif op == "revoke":
            self._do_revoke(step)
        elif op == "verify":
            self._do_verify(step)
        elif op == "report":
            self._do_report(step)
        elif op == "lightweight":
            self._do_lightweight(step)
        else:
            raise KeyError(f"unknown op {op!r}")

    def _remember(self, step: dict, txid: bytes) -> None:
        if "id" in step:
            self._refs[step["id"]] = txid

    def _do_enroll(self, step: dict) -> None:
        name = step["identity"]
        state = self.identities[name]
        issuer = self.issuers[state.spec.issuer]
        attrs = self._attr_vector(name)
        blinded = self.group.encode_element(
            blind_contribution(attrs.blinding, issuer.gens)
        )
        record = enroll(
            issuer,
            self.keys[state.spec.user].address,
            blinded,
            attrs.scalars[1:],
            state.spec.limit,
            self.ledger,
            model=self.model,
            value_margin=state.spec.margin,
        )
        state.record = record
        state.attrs = attrs
        self._remember(step, record.publish_txid)

    def _do_fork(self, step: dict) -> None:
        if "at_height" in step:
            height = step["at_height"]
        else:
            height = self.ledger.active.height - step.get("back", 0)
        branch_id = self.ledger.fork(height)
        label = step.get("id", f"branch{branch_id}")
        self._branches[label] = branch_id
        self.events.append(
            {"event": "fork", "branch": branch_id, "label": label, "at_height": height}
        )

    def _do_request(self, step: dict) -> None:
        name = step["identity"]
        state = self.identities[name]
        txid = build_request(
            self.keys[state.spec.user],
            state.record,
            state.attrs,
            self.keys[step["sp"]].address,
            self._statement_single(state, step.get("reveal", ())),
            self.store,
            self.ledger,
            branch_id=self._branch_of(step),
            model=self.model,
        )
        self._last_request = txid
        self._remember(step, txid)

    def _merged_index(self, names: list[str], ident: str, label: str) -> int:
        offset = 0
        for n in names:
            gens = self.issuers[self.identities[n].spec.issuer].gens
            if n == ident:
                return offset + gens.index_of(label)
            offset += len(gens)
        raise KeyError(f"identity {ident!r} not part of this request")

    def _do_request_double(self, step: dict) -> None:
        names = step["identities"]
        states = [self.identities[n] for n in names]
        reveals = tuple(
            Revelation(
                0,
                self._merged_index(names, ident, label),
                self._merged_value(names, ident, label),
            )
            for ident, label in step.get("reveal", ())
        )
        raw_links = list(step.get("links", []))
        if "link" in step:
            raw_links.append(step["link"])
        links = tuple(
            EqualityLink(
                (0, self._merged_index(names, a[0], a[1])),
                (0, self._merged_index(names, b[0], b[1])),
            )
            for a, b in raw_links
        )
        statement = DisclosureStatement(reveals=reveals, links=links)
        txid = build_request_double(
            (self.keys[states[0].spec.user], self.keys[states[1].spec.user]),
            (states[0].record, states[1].record),
            (states[0].attrs, states[1].attrs),
            self.keys[step["sp"]].address,
            statement,
            self.store,
            self.ledger,
            branch_id=self._branch_of(step),
            model=self.model,
        )
        self._last_request = txid
        self._remember(step, txid)

    def _merged_value(self, names: list[str], ident: str, label: str) -> int:
        state = self.identities[ident]
        gens = self.issuers[state.spec.issuer].gens
        return state.attrs.scalars[gens.index_of(label)]

    def _do_revoke(self, step: dict) -> None:
        state = self.identities[step["identity"]]
        actor = self.keys[step["actor"]]
        destination = self.keys[step.get("destination", step["actor"])].address
        txid = revoke(
            actor,
            state.record,
            destination,
            self.ledger,
            branch_id=self._branch_of(step),
            model=self.model,
        )
        self._remember(step, txid)
        self.events.append(
            {
                "event": "revoke",
                "identity": step["identity"],
                "actor": step["actor"],
                "txid": txid.hex(),
            }
        )

    def _do_verify(self, step: dict) -> None:
        txid = self._request_ref(step)
        branch_id = self._branch_of(step)
        mode = step.get("source", "full")
        source = make_source(mode, self.ledger, branch_id)
        result = verify_request(txid, self._trusted(step), source, self.store)
        self.events.append(
            {
                "event": "verify",
                "request": txid.hex(),
                "source": mode,
                "branch": self.ledger.branch(branch_id).id,
                "accepted": result.accepted,
                "reason": result.reason,
                "uses": result.uses,
            }
        )

    def _do_report(self, step: dict) -> None:
        address = self.keys[step["user"]].address
        rows = reputation_report(address, make_source("full", self.ledger))
        self.events.append(
            {
                "event": "report",
                "user": step["user"],
                "rows": [
                    {
                        "request": r.request_txid.hex(),
                        "accept": r.accept_txid.hex() if r.accept_txid else None,
                        "sp": r.sp_address.hex(),
                        "issuer": r.issuer_address.hex(),
                    }
                    for r in rows
                ],
            }
        )

    def _do_lightweight(self, step: dict) -> None:
        user = self.keys[step["user"]]
        challenge = step.get("challenge", "").encode()
        refs = [self._refs[r] for r in step.get("requests", [])] or (
            [self._last_request] if self._last_request else []
        )
        claims = [
            LightweightClaim(txid, user.pubkey, user.sign(challenge_digest(challenge)))
            for txid in refs
        ]
        result = lightweight_verify(challenge, claims, make_source("full", self.ledger))
        self.events.append(
            {
                "event": "lightweight",
                "user": step["user"],
                "accepted": result.accepted,
                "reason": result.reason,
                "annotations": list(result.annotations),
            }
        )

    # -- transcript -----------------------------------------------------------

    def _identity_summary(self, name: str) -> dict:
        from .protocol import current_token

        state = self.identities[name]
        if state.record is None:
            return {"status": "not-enrolled"}
        token = current_token(state.record, make_source("full", self.ledger))
        status = "active"
        if token.spent_kind is not None:
            status = "revoked"
        return {
            "status": status,
            "uses": token.uses,
            "token_value": token.value,
            "limit": state.spec.limit,
        }

    def _transcript(self) -> "Transcript":
        final = {
            "active_branch": self.ledger.active_id,
            "height": self.ledger.active.height,
            "balances": {
                name: self.ledger.balance(keys.address)
                for name, keys in sorted(self.keys.items())
            },
            "identities": {
                name: self._identity_summary(name)
                for name in sorted(self.identities)
            },
        }
        return Transcript(
            {
                "schema_version": SCHEMA_VERSION,
                "scenario": self.config.name,
                "seed": self.config.seed,
                "events": self.events,
                "final": final,
            },
            self.ledger,
        )


@dataclass
class Transcript:
    data: dict
    ledger: UtxoLedger = field(repr=False, compare=False, default=None)

    def to_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, separators=(",", ":")) + "\n"

    def human_summary(self) -> str:
        lines = [f"scenario {self.data['scenario']} (seed {self.data['seed']})"]
        for ev in self.data["events"]:
            kind = ev["event"]
            if kind == "tx":
                lines.append(
                    f"  tx      {ev['template']:<15} {ev['txid'][:16]} fee={ev['fee']}"
                )
            elif kind == "block":
                lines.append(
                    f"  block   branch={ev['branch']} height={ev['height']} txs={len(ev['txids'])}"
                )
            elif kind == "reorg":
                lines.append(f"  reorg   active branch -> {ev['active']}")
            elif kind == "fork":
                lines.append(
                    f"  fork    {ev['label']} (branch {ev['branch']}) at height {ev['at_height']}"
                )
            elif kind == "verify":
                verdict = "ACCEPT" if ev["accepted"] else f"REJECT ({ev['reason']})"
                lines.append(
                    f"  verify  {ev['request'][:16]} via {ev['source']}: {verdict} uses={ev['uses']}"
                )
            elif kind == "revoke":
                lines.append(f"  revoke  {ev['identity']} by {ev['actor']}")
            elif kind == "report":
                lines.append(f"  report  {ev['user']}: {len(ev['rows'])} rows")
            elif kind == "lightweight":
                verdict = "ACCEPT" if ev["accepted"] else f"REJECT ({ev['reason']})"
                lines.append(f"  light   {ev['user']}: {verdict}")
            elif kind == "expected-failure":
                lines.append(f"  refused step {ev['step']} ({ev['op']}): {ev['error']}")
        final = self.data["final"]
        lines.append(
            f"final: branch={final['active_branch']} height={final['height']}"
        )
        for name, summary in final["identities"].items():
            if summary.get("status") == "not-enrolled":
                continue
            lines.append(
                f"  identity {name}: {summary['status']}, uses {summary['uses']}/{summary['limit']},"
                f" token {summary['token_value']}"
            )
        return "\n".join(lines) + "\n"


def run_scenario(config: ScenarioConfig, proof_dir, group: Group = SECP256K1) -> Transcript:
    return ScenarioRunner(config, proof_dir, group).run()
