"""Tripartite key agreement from masked ephemeral points, and its repair.

Original protocol: party U picks an ephemeral u and sends each peer V the
masked point T_{U->V} = u * (upk_V + H2(upk_V) * Q_V).  Pairing a received
T-value with the receiver's full private key strips the mask, so each party
reaches the shared value e(P, P)^(a+b+c) from its own ephemeral plus the two
T-values addressed to it.  All round-one messages are broadcast: the session
key hashes all six T-values, so every party needs the full set.

Repaired variant: party U broadcasts the bare point T_U = u * P together
with a signature over (T_U, upk_U) under its full private key.  Peers verify
both signatures before deriving; the shared value becomes
e(T_V, T_W)^u = e(P, P)^(abc), which no longer involves long-term keys.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from . import clsig
from .errors import MissingTranscriptFieldError, SignatureInvalidError
from .keyinfra import XCQ11_H3, SystemParams, Xcq11UserKeys, combined_public
from .pairing import G1Point, G2Elem, Scalar, encode_parts
from .session import PartyPublic, SessionKey, canonical_parties


@dataclass(frozen=True)
class Xcq11Outgoing:
    """Round-one state: the retained ephemeral and the per-peer T-values."""

    ephemeral: Scalar
    t_out: Mapping[bytes, G1Point]  # receiver identity -> T value


@dataclass(frozen=True)
class Xcq11View:
    """Everything public in one completed session: parties and T matrix."""

    parties: tuple[PartyPublic, ...]
    t: Mapping[tuple[bytes, bytes], G1Point]  # (sender, receiver) -> T

    @property
    def ordered(self) -> tuple[PartyPublic, ...]:
        return canonical_parties(self.parties)

    def require_complete(self) -> None:
        if len(self.parties) != 3:
            raise MissingTranscriptFieldError("a session view needs exactly three parties")
        ids = [p.identity for p in self.ordered]
        for sender in ids:
            for receiver in ids:
                if sender != receiver and (sender, receiver) not in self.t:
                    raise MissingTranscriptFieldError(
                        f"missing T-value {sender!r} -> {receiver!r}"
                    )


def round1(params: SystemParams, peers: Sequence[PartyPublic], rng) -> Xcq11Outgoing:
    """Pick one ephemeral and mask it toward each peer.

    Needs no keys of the sender at all, only the peers' public data; the
    repaired variant exists because of exactly this gap.
    """
    u = params.backend.random_scalar(rng)
    t_out = {p.identity: u * combined_public(params, p.identity, p.upk) for p in peers}
    return Xcq11Outgoing(u, t_out)


def session_key(params: SystemParams, view: Xcq11View, shared: G2Elem) -> bytes:
    """KDF over identities, public keys, all six T-values, and the shared value."""
    ordered = view.ordered
    ids = [p.identity for p in ordered]
    parts = list(ids)
    parts += [p.upk.to_bytes() for p in ordered]
    parts += [
        view.t[(s, r)].to_bytes() for s in ids for r in ids if s != r
    ]  # sender-major order: T_AB, T_AC, T_BA, T_BC, T_CA, T_CB
    parts.append(shared.to_bytes())
    return params.backend.kdf(XCQ11_H3, parts, params.key_bits)


def derive(params: SystemParams, own: Xcq11UserKeys, state: Xcq11Outgoing, view: Xcq11View) -> SessionKey:
    """Unmask the two incoming T-values with the full key and derive K."""
    view.require_complete()
    backend = params.backend
    shared = backend.g ** state.ephemeral
    for peer in view.ordered:
        if peer.identity != own.identity:
            shared = shared * backend.pair(view.t[(peer.identity, own.identity)], own.full_key)
    return SessionKey(session_key(params, view, shared), shared)


# -- repaired variant ---------------------------------------------------------


@dataclass(frozen=True)
class Xcq11SignedOutgoing:
    """Round-one state of the repaired variant: bare point plus signature."""

    ephemeral: Scalar
    t_point: G1Point
    signature: clsig.ClSignature


@dataclass(frozen=True)
class Xcq11ImprovedView:
    parties: tuple[PartyPublic, ...]
    t_points: Mapping[bytes, G1Point]
    signatures: Mapping[bytes, clsig.ClSignature]

    @property
    def ordered(self) -> tuple[PartyPublic, ...]:
        return canonical_parties(self.parties)

    def require_complete(self) -> None:
        if len(self.parties) != 3:
            raise MissingTranscriptFieldError("a session view needs exactly three parties")
        for p in self.parties:
            if p.identity not in self.t_points:
                raise MissingTranscriptFieldError(f"missing T point of {p.identity!r}")
            if p.identity not in self.signatures:
                raise MissingTranscriptFieldError(f"missing signature of {p.identity!r}")


def signed_payload(t_point: G1Point, upk: G1Point) -> bytes:
    """Bytes covered by the round-one signature: the T point and the upk."""
    return encode_parts([t_point.to_bytes(), upk.to_bytes()])


def improved_round1(params: SystemParams, own: Xcq11UserKeys, rng) -> Xcq11SignedOutgoing:
    u = params.backend.random_scalar(rng)
    t_point = u * params.backend.P
    sig = clsig.sign(
        params,
        own.full_key,
        combined_public(params, own.identity, own.upk),
        signed_payload(t_point, own.upk),
        rng,
    )
    return Xcq11SignedOutgoing(u, t_point, sig)


def improved_session_key(params: SystemParams, view: Xcq11ImprovedView, shared: G2Elem) -> bytes:
    ordered = view.ordered
    parts = [p.identity for p in ordered]
    parts += [p.upk.to_bytes() for p in ordered]
    parts += [view.t_points[p.identity].to_bytes() for p in ordered]
    parts.append(shared.to_bytes())
    return params.backend.kdf(XCQ11_H3, parts, params.key_bits)


def improved_derive(
    params: SystemParams,
    own: Xcq11UserKeys,
    state: Xcq11SignedOutgoing,
    view: Xcq11ImprovedView,
) -> SessionKey:
    """Verify both peers' signatures, then derive e(T_V, T_W)^u.

    Raises ``SignatureInvalidError`` naming the offending peer; no key is
    produced in that case.
    """
    view.require_complete()
    backend = params.backend
    peers = [p for p in view.ordered if p.identity != own.identity]
    for peer in peers:
        message = signed_payload(view.t_points[peer.identity], peer.upk)
        if not clsig.verify(params, peer.identity, peer.upk, message, view.signatures[peer.identity]):
            raise SignatureInvalidError(peer.identity)
    shared = backend.pair(view.t_points[peers[0].identity], view.t_points[peers[1].identity]) ** state.ephemeral
    return SessionKey(improved_session_key(params, view, shared), shared)
