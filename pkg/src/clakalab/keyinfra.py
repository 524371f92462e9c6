"""KGC setup and the two certificateless key pipelines.

A key generation centre (KGC) holds a master scalar x and publishes
P0 = x*P.  Users combine a KGC-issued partial private key with a
self-chosen secret value, so neither the KGC nor a certificate authority
ever holds a complete user key.

Two pipelines are implemented:

* inverse-point style: the partial key is the point s_U = (x + q_U)^-1 * P
  with q_U = H1(ID_U).  The user picks x_U, publishes upk_U = x_U * Q_U
  (where Q_U = P0 + q_U * P), and folds both into the full private key
  S_U = (x_U + H2(upk_U))^-1 * s_U.

* inverse-scalar style: the KGC picks r_U, publishes R_U = r_U * P, and
  issues the scalar s_U = (r_U + h*x)^-1 with h = H1(ID_U || R_U).  The
  user key is simply upk_U = x_U * P; the full private key is the triple
  (s_U, R_U, x_U).

Degenerate denominators are resampled where a random input exists and
reported as ``DegenerateScalarError`` where the input is fixed (an identity
whose hash collides with -x).  On the small-prime transparent profile such
collisions are actually reachable, so the guards are tested, not decorative.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

from .errors import DegenerateScalarError, EncodingError, ScenarioError
from .pairing import (
    DEFAULT_KEY_BITS,
    G1Point,
    PairingBackend,
    Scalar,
    encode_parts,
    get_backend,
)

# domain tags for the protocol hash functions
XCQ11_H1 = b"XCQ11-H1"
XCQ11_H2 = b"XCQ11-H2"
XCQ11_H3 = b"XCQ11-H3"
XCL12_H1 = b"XCL12-H1"
XCL12_H2 = b"XCL12-H2"

KEYRING_SCHEMA = "clakalab-keys/1"


@dataclass(frozen=True)
class SystemParams:
    """Public system parameters: the backend (q, P, e, g) plus P0 = x*P."""

    backend: PairingBackend
    p0: G1Point
    key_bits: int = DEFAULT_KEY_BITS


@dataclass(frozen=True)
class MasterKey:
    """KGC master scalar.  Never appears in transcripts or reports."""

    x: Scalar


def setup(backend: PairingBackend, rng, key_bits: int = DEFAULT_KEY_BITS):
    """Pick a master key and publish the matching system parameters."""
    x = backend.random_scalar(rng)
    return SystemParams(backend, x * backend.P, key_bits), MasterKey(x)


# -- hash shorthands ---------------------------------------------------------


def identity_hash(params: SystemParams, identity: bytes) -> Scalar:
    """q_U = H1(ID_U) for the inverse-point pipeline."""
    return params.backend.hash_to_scalar(XCQ11_H1, identity)


def public_key_hash(params: SystemParams, upk: G1Point) -> Scalar:
    """H2(upk_U), the secret-value companion hash."""
    return params.backend.hash_to_scalar(XCQ11_H2, upk.to_bytes())


def identity_point(params: SystemParams, identity: bytes) -> G1Point:
    """Q_U = P0 + q_U * P."""
    return params.p0 + identity_hash(params, identity) * params.backend.P


def combined_public(params: SystemParams, identity: bytes, upk: G1Point) -> G1Point:
    """upk_U + H2(upk_U) * Q_U, the public point matching the full key S_U."""
    return upk + public_key_hash(params, upk) * identity_point(params, identity)


def binding_hash(params: SystemParams, identity: bytes, r_point: G1Point) -> Scalar:
    """h = H1(ID_U || R_U) for the inverse-scalar pipeline."""
    return params.backend.hash_to_scalar(XCL12_H1, encode_parts([identity, r_point.to_bytes()]))


def masked_base(params: SystemParams, identity: bytes, r_point: G1Point) -> G1Point:
    """R_U + H1(ID_U || R_U) * P0; equals s_U^-1 * P for a valid partial key."""
    return r_point + binding_hash(params, identity, r_point) * params.p0


# -- inverse-point pipeline ----------------------------------------------------


@dataclass(frozen=True)
class Xcq11PartialKey:
    s_u: G1Point


@dataclass(frozen=True)
class Xcq11UserKeys:
    identity: bytes
    partial: Xcq11PartialKey
    secret_value: Scalar  # x_U
    upk: G1Point
    full_key: G1Point  # S_U


def xcq11_extract_partial(params: SystemParams, msk: MasterKey, identity: bytes) -> Xcq11PartialKey:
    """s_U = (x + q_U)^-1 * P.  Deterministic given the master key."""
    denom = msk.x + identity_hash(params, identity)
    if denom.is_zero():
        raise DegenerateScalarError("identity hash collides with the negated master key")
    return Xcq11PartialKey(denom.inverse() * params.backend.P)


def xcq11_verify_partial(params: SystemParams, identity: bytes, partial: Xcq11PartialKey) -> bool:
    """Check e(s_U, P0 + q_U * P) == e(P, P)."""
    backend = params.backend
    return backend.pair(partial.s_u, identity_point(params, identity)) == backend.g


def xcq11_user_keygen(params: SystemParams, identity: bytes, partial: Xcq11PartialKey, rng) -> Xcq11UserKeys:
    """Pick the secret value and fold it into the full private key.

    Resamples x_U whenever x_U + H2(upk_U) lands on zero, so the combined
    public point upk_U + H2(upk_U) * Q_U is never the identity.
    """
    q_point = identity_point(params, identity)
    while True:
        x_u = params.backend.random_scalar(rng)
        upk = x_u * q_point
        shift = x_u + public_key_hash(params, upk)
        if not shift.is_zero():
            break
    return Xcq11UserKeys(identity, partial, x_u, upk, shift.inverse() * partial.s_u)


# -- inverse-scalar pipeline ------------------------------------------------------


@dataclass(frozen=True)
class Xcl12PartialKey:
    s_u: Scalar
    r_u: G1Point


@dataclass(frozen=True)
class Xcl12UserKeys:
    identity: bytes
    partial: Xcl12PartialKey
    secret_value: Scalar  # x_U
    upk: G1Point


def xcl12_extract_partial(params: SystemParams, msk: MasterKey, identity: bytes, rng) -> Xcl12PartialKey:
    """Pick r_U, publish R_U = r_U * P, issue s_U = (r_U + h*x)^-1."""
    backend = params.backend
    while True:
        r = backend.random_scalar(rng)
        r_point = r * backend.P
        denom = r + binding_hash(params, identity, r_point) * msk.x
        if not denom.is_zero():
            return Xcl12PartialKey(denom.inverse(), r_point)


def xcl12_verify_partial(params: SystemParams, identity: bytes, partial: Xcl12PartialKey) -> bool:
    """Check s_U * (R_U + H1(ID_U || R_U) * P0) == P."""
    return partial.s_u * masked_base(params, identity, partial.r_u) == params.backend.P


def xcl12_user_keygen(params: SystemParams, identity: bytes, partial: Xcl12PartialKey, rng) -> Xcl12UserKeys:
    x_u = params.backend.random_scalar(rng)
    return Xcl12UserKeys(identity, partial, x_u, x_u * params.backend.P)


def make_user(family: str, params: SystemParams, msk: MasterKey, identity: bytes, rng):
    """Run one pipeline end to end, checking the partial key on receipt."""
    if family == "xcq11":
        partial = xcq11_extract_partial(params, msk, identity)
        if not xcq11_verify_partial(params, identity, partial):
            raise DegenerateScalarError("freshly extracted partial key failed verification")
        return xcq11_user_keygen(params, identity, partial, rng)
    if family == "xcl12":
        partial = xcl12_extract_partial(params, msk, identity, rng)
        if not xcl12_verify_partial(params, identity, partial):
            raise DegenerateScalarError("freshly extracted partial key failed verification")
        return xcl12_user_keygen(params, identity, partial, rng)
    raise ScenarioError(f"unknown key pipeline {family!r}")


# -- key material import/export ------------------------------------------------


def _id_str(identity: bytes) -> str:
    return identity.decode("utf-8")


def keyring_to_json(family: str, params: SystemParams, msk: MasterKey, users) -> dict:
    """Serialize KGC and user key material as a JSON-ready record."""
    backend = params.backend
    records = []
    for user in users:
        rec = {
            "id": _id_str(user.identity),
            "x": user.secret_value.to_bytes().hex(),
            "upk": user.upk.to_bytes().hex(),
        }
        if family == "xcq11":
            rec["partial"] = user.partial.s_u.to_bytes().hex()
            rec["full"] = user.full_key.to_bytes().hex()
        else:
            rec["partial_s"] = user.partial.s_u.to_bytes().hex()
            rec["partial_r"] = user.partial.r_u.to_bytes().hex()
        records.append(rec)
    return {
        "schema": KEYRING_SCHEMA,
        "protocol": family,
        "backend": backend.backend_id,
        "profile": backend.profile,
        "key_bits": params.key_bits,
        "params": {"p0": params.p0.to_bytes().hex()},
        "kgc": {"x": msk.x.to_bytes().hex()},
        "users": records,
    }


def keyring_from_json(record: Mapping) -> tuple[str, SystemParams, MasterKey, dict]:
    """Rebuild key material from a keyring record, verifying partial keys."""
    try:
        if record["schema"] != KEYRING_SCHEMA:
            raise EncodingError(f"unsupported keyring schema {record.get('schema')!r}")
        fam = record["protocol"]
        backend = get_backend(record["profile"])
        params = SystemParams(
            backend,
            backend.g1_from_bytes(bytes.fromhex(record["params"]["p0"]), strict=True),
            int(record.get("key_bits", DEFAULT_KEY_BITS)),
        )
        msk = MasterKey(backend.scalar_from_bytes(bytes.fromhex(record["kgc"]["x"])))
        users = {}
        for rec in record["users"]:
            identity = rec["id"].encode("utf-8")
            x_u = backend.scalar_from_bytes(bytes.fromhex(rec["x"]))
            upk = backend.g1_from_bytes(bytes.fromhex(rec["upk"]), strict=True)
            if fam == "xcq11":
                partial = Xcq11PartialKey(backend.g1_from_bytes(bytes.fromhex(rec["partial"]), strict=True))
                full = backend.g1_from_bytes(bytes.fromhex(rec["full"]), strict=True)
                user = Xcq11UserKeys(identity, partial, x_u, upk, full)
                ok = xcq11_verify_partial(params, identity, partial)
            elif fam == "xcl12":
                partial = Xcl12PartialKey(
                    backend.scalar_from_bytes(bytes.fromhex(rec["partial_s"])),
                    backend.g1_from_bytes(bytes.fromhex(rec["partial_r"]), strict=True),
                )
                user = Xcl12UserKeys(identity, partial, x_u, upk)
                ok = xcl12_verify_partial(params, identity, partial)
            else:
                raise EncodingError(f"unknown keyring protocol {fam!r}")
            if not ok:
                raise EncodingError(f"partial key of {rec['id']!r} fails verification")
            users[identity] = user
        return fam, params, msk, users
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise EncodingError(f"malformed keyring record: {exc}") from exc
