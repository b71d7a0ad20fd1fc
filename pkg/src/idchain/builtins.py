"""Built-in scenario configs.

* ``museum``: a membership network; limited visits, outsourced (explorer)
  verification, a signature-only check by a tiny venue, and the refusal
  once the use limit is spent.
* ``university``: coordinating credentials from two issuers in a single
  authentication with an equality link on the shared name field.
* ``fork-attack``: reusing an authentication token on a competing branch
  and what survives the reorg.
* ``revocation``: user- and issuer-initiated revocation and their effect on
  later verification.
"""

from __future__ import annotations

from .scenarios import BTC, ScenarioConfig


def _museum() -> dict:
    rounds = []
    for n, venue in enumerate(("aquarium", "gallery", "aquarium"), start=1):
        rounds += [
            {"op": "request", "identity": "alice_pass", "sp": venue,
             "reveal": ["membership"], "id": f"visit{n}"},
            {"op": "mine"},
            {"op": "verify", "request": f"visit{n}", "source": "explorer"},
            {"op": "accept", "request": f"visit{n}", "sp": venue},
            {"op": "mine"},
        ]
    return {
        "name": "museum",
        "seed": 2017,
        "actors": {
            "maritime_museum": {"role": "issuer", "labels": ["membership", "tier"]},
            "alice": {"role": "user"},
            "aquarium": {"role": "sp"},
            "gallery": {"role": "sp"},
        },
        "identities": {
            "alice_pass": {
                "issuer": "maritime_museum",
                "user": "alice",
                "attrs": {"membership": "member", "tier": "standard"},
                "limit": 3,
            }
        },
        "faucet": {"maritime_museum": 2 * BTC},
        "steps": [
            {"op": "setup", "issuer": "maritime_museum"},
            {"op": "enroll", "identity": "alice_pass"},
            {"op": "mine"},
            *rounds,
            {"op": "request", "identity": "alice_pass", "sp": "gallery",
             "expect_error": "UseLimitExhausted"},
            {"op": "lightweight", "user": "alice", "requests": ["visit3"],
             "challenge": "pool-desk-417"},
            {"op": "report", "user": "alice"},
        ],
    }


def _university() -> dict:
    return {
        "name": "university",
        "seed": 4401,
        "actors": {
            "university": {"role": "issuer", "labels": ["name", "status", "gpa_band"]},
            "licence_office": {"role": "issuer", "labels": ["name", "licence_class"]},
            "carol": {"role": "user"},
            "insurer": {"role": "sp"},
        },
        "identities": {
            "carol_student": {
                "issuer": "university",
                "user": "carol",
                "attrs": {"name": "carol mills", "status": "student", "gpa_band": "high"},
                "limit": 2,
            },
            "carol_licence": {
                "issuer": "licence_office",
                "user": "carol",
                "attrs": {"name": "carol mills", "licence_class": "B"},
                "limit": 2,
            },
        },
        "faucet": {"university": 2 * BTC, "licence_office": 2 * BTC},
        "steps": [
            {"op": "setup", "issuer": "university"},
            {"op": "setup", "issuer": "licence_office"},
            {"op": "enroll", "identity": "carol_student"},
            {"op": "mine"},
            {"op": "enroll", "identity": "carol_licence"},
            {"op": "mine"},
            {"op": "request_double",
             "identities": ["carol_student", "carol_licence"],
             "sp": "insurer",
             "reveal": [["carol_student", "status"], ["carol_student", "gpa_band"]],
             "link": [["carol_student", "name"], ["carol_licence", "name"]],
             "id": "discount"},
            {"op": "mine"},
            {"op": "verify", "request": "discount", "source": "full"},
            {"op": "accept_double", "request": "discount", "sp": "insurer"},
            {"op": "mine"},
            {"op": "report", "user": "carol"},
        ],
    }


def _fork_attack() -> dict:
    return {
        "name": "fork-attack",
        "seed": 39,
        "actors": {
            "registrar": {"role": "issuer", "labels": ["membership"]},
            "mallory": {"role": "user"},
            "honest_shop": {"role": "sp"},
            "far_shop": {"role": "sp"},
        },
        "identities": {
            "mallory_id": {
                "issuer": "registrar",
                "user": "mallory",
                "attrs": {"membership": "member"},
                "limit": 1,
            }
        },
        "faucet": {"registrar": 2 * BTC},
        "steps": [
            {"op": "enroll", "identity": "mallory_id"},
            {"op": "mine"},
            {"op": "request", "identity": "mallory_id", "sp": "honest_shop", "id": "spend_a"},
            {"op": "mine"},
            {"op": "verify", "request": "spend_a", "source": "full"},
            # reuse the same token on a competing branch
            {"op": "fork", "back": 1, "id": "attack"},
            {"op": "request", "identity": "mallory_id", "sp": "far_shop",
             "branch": "attack", "id": "spend_b"},
            {"op": "mine", "branch": "attack"},
            {"op": "verify", "request": "spend_b", "source": "full", "branch": "attack"},
            {"op": "verify", "request": "spend_a", "source": "full", "branch": "main"},
            # the attacker's branch takes the lead; a reorg follows
            {"op": "mine", "branch": "attack"},
            {"op": "verify", "request": "spend_b", "source": "full"},
            {"op": "verify", "request": "spend_a", "source": "full"},
        ],
    }


def _revocation() -> dict:
    return {
        "name": "revocation",
        "seed": 91,
        "actors": {
            "clinic": {"role": "issuer", "labels": ["patient_tier"]},
            "dana": {"role": "user"},
            "pharmacy": {"role": "sp"},
        },
        "identities": {
            "dana_self": {
                "issuer": "clinic",
                "user": "dana",
                "attrs": {"patient_tier": "full"},
                "limit": 3,
            },
            "dana_issuer_side": {
                "issuer": "clinic",
                "user": "dana",
                "attrs": {"patient_tier": "trial"},
                "limit": 3,
            },
        },
        "faucet": {"clinic": 3 * BTC},
        "steps": [
            {"op": "enroll", "identity": "dana_self"},
            {"op": "mine"},
            {"op": "enroll", "identity": "dana_issuer_side"},
            {"op": "mine"},
            {"op": "request", "identity": "dana_self", "sp": "pharmacy", "id": "r_self"},
            {"op": "mine"},
            {"op": "verify", "request": "r_self", "source": "full"},
            # the user destroys her own identity
            {"op": "revoke", "identity": "dana_self", "actor": "dana"},
            {"op": "mine"},
            {"op": "verify", "request": "r_self", "source": "full"},
            {"op": "request", "identity": "dana_self", "sp": "pharmacy",
             "expect_error": "TokenSpent"},
            # the issuer pulls the second identity back
            {"op": "request", "identity": "dana_issuer_side", "sp": "pharmacy", "id": "r_iss"},
            {"op": "mine"},
            {"op": "verify", "request": "r_iss", "source": "full"},
            {"op": "revoke", "identity": "dana_issuer_side", "actor": "clinic",
             "destination": "clinic"},
            {"op": "mine"},
            {"op": "verify", "request": "r_iss", "source": "full"},
            {"op": "report", "user": "dana"},
        ],
    }


_BUILTIN_FACTORIES = {
    "museum": _museum,
    "university": _university,
    "fork-attack": _fork_attack,
    "revocation": _revocation,
}

BUILTIN_NAMES = tuple(sorted(_BUILTIN_FACTORIES))


def builtin_config(name: str) -> ScenarioConfig:
    try:
        factory = _BUILTIN_FACTORIES[name]
    except KeyError:
        raise KeyError(
            f"unknown scenario {name!r}; built-ins: {', '.join(BUILTIN_NAMES)}"
        ) from None
    return ScenarioConfig.from_dict(factory())
