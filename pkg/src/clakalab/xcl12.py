"""Tripartite key agreement with three shared values, and its repair.

Original protocol: party U announces {ID_U, upk_U, R_U} and sends each peer
V the point T_{U->V} = u * (R_V + H1(ID_V || R_V) * P0).  Multiplying an
incoming T-value by the receiver's partial scalar s_V unmasks the sender's
bare ephemeral point (s_V * T_{U->V} = u * P).  Each party then computes

    k1 = u*P + unmasked_V + unmasked_W            = (a + b + c) * P
    k2 = e(unmasked_V, unmasked_W)^u              = e(P, P)^(abc)
    k3 = e(upk_V, upk_W)^(x_U)                    = e(P, P)^(x_A * x_B * x_C)

and the session key hashes the transcript together with (k1, k2, k3).

Repaired variant: k1 is unchanged while k2 and k3 shift every factor by a
long-term secret, so each shared value depends on all three parties'
ephemerals and long-term scalars at once:

    k2 = e(unmasked_V + base_V, unmasked_W + base_W)^(u + s_U^-1)
       = e(P, P)^((a + s_A^-1)(b + s_B^-1)(c + s_C^-1))
    k3 = e(unmasked_V + upk_V, unmasked_W + upk_W)^(u + x_U)
       = e(P, P)^((a + x_A)(b + x_B)(c + x_C))

where base_V = R_V + H1(ID_V || R_V) * P0 = s_V^-1 * P is already in hand
from round one.  Group operations are counted at this layer (never inside
the pairing backend) so the cost of the repair is directly measurable: it
is four extra point additions per party and nothing else.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import MissingTranscriptFieldError
from .keyinfra import XCL12_H2, SystemParams, Xcl12UserKeys, masked_base
from .pairing import G1Point, G2Elem, Scalar
from .session import SessionKey, canonical_parties


@dataclass(frozen=True)
class Announcement:
    """Public announcement of one participant: identity, upk, and R_U."""

    identity: bytes
    upk: G1Point
    r_point: G1Point


@dataclass(frozen=True)
class SharedValues:
    k1: G1Point
    k2: G2Elem
    k3: G2Elem


@dataclass
class OpCounter:
    """Per-party group-operation counts at the protocol layer."""

    point_adds: int = 0
    scalar_muls: int = 0
    pairings: int = 0
    g2_exps: int = 0

    def as_dict(self) -> dict:
        return {
            "point_adds": self.point_adds,
            "scalar_muls": self.scalar_muls,
            "pairings": self.pairings,
            "g2_exps": self.g2_exps,
        }

    def delta(self, other: "OpCounter") -> dict:
        return {k: other.as_dict()[k] - v for k, v in self.as_dict().items()}


def _bump(counter, adds=0, muls=0, pairs=0, exps=0):
    if counter is not None:
        counter.point_adds += adds
        counter.scalar_muls += muls
        counter.pairings += pairs
        counter.g2_exps += exps


@dataclass(frozen=True)
class Xcl12Flow:
    """Round-one state: ephemeral, per-peer T-values, and the peer base points.

    ``peer_bases`` caches R_V + H1(ID_V || R_V) * P0, computed anyway while
    building the T-values; the repaired derivation reuses it, which is what
    keeps the repair at four extra additions.
    """

    ephemeral: Scalar
    t_out: Mapping[bytes, G1Point]
    peer_bases: Mapping[bytes, G1Point]


@dataclass(frozen=True)
class Xcl12View:
    parties: tuple[Announcement, ...]
    t: Mapping[tuple[bytes, bytes], G1Point]

    @property
    def ordered(self) -> tuple[Announcement, ...]:
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


def round1(params: SystemParams, peers: Sequence[Announcement], rng, counter: OpCounter | None = None) -> Xcl12Flow:
    """Mask one fresh ephemeral toward each peer's base point."""
    u = params.backend.random_scalar(rng)
    t_out = {}
    bases = {}
    for peer in peers:
        base = masked_base(params, peer.identity, peer.r_point)
        _bump(counter, adds=1, muls=1)
        t_out[peer.identity] = u * base
        _bump(counter, muls=1)
        bases[peer.identity] = base
    return Xcl12Flow(u, t_out, bases)


def session_key(params: SystemParams, view: Xcl12View, shared: SharedValues) -> bytes:
    """KDF over identities, upks, all six T-values, and (k1, k2, k3).

    The announcement points R_U are deliberately not part of the list; they
    enter only through the T-values they mask.
    """
    ordered = view.ordered
    ids = [p.identity for p in ordered]
    parts = list(ids)
    parts += [p.upk.to_bytes() for p in ordered]
    parts += [view.t[(s, r)].to_bytes() for s in ids for r in ids if s != r]
    parts += [shared.k1.to_bytes(), shared.k2.to_bytes(), shared.k3.to_bytes()]
    return params.backend.kdf(XCL12_H2, parts, params.key_bits)


def _session_inputs(params, own, flow, view, counter):
    """Common prefix of both derivations: unmask peers and build k1."""
    view.require_complete()
    backend = params.backend
    peers = [p for p in view.ordered if p.identity != own.identity]
    if len(peers) != 2:
        raise MissingTranscriptFieldError(f"own identity {own.identity!r} not in the session view")
    own_point = flow.ephemeral * backend.P
    _bump(counter, muls=1)
    unmasked = {}
    for peer in peers:
        unmasked[peer.identity] = own.partial.s_u * view.t[(peer.identity, own.identity)]
        _bump(counter, muls=1)
    k1 = own_point + unmasked[peers[0].identity] + unmasked[peers[1].identity]
    _bump(counter, adds=2)
    return backend, peers, unmasked, k1


def derive(
    params: SystemParams,
    own: Xcl12UserKeys,
    flow: Xcl12Flow,
    view: Xcl12View,
    counter: OpCounter | None = None,
) -> tuple[SharedValues, SessionKey]:
    backend, peers, unmasked, k1 = _session_inputs(params, own, flow, view, counter)
    v, w = peers
    k2 = backend.pair(unmasked[v.identity], unmasked[w.identity]) ** flow.ephemeral
    _bump(counter, pairs=1, exps=1)
    k3 = backend.pair(v.upk, w.upk) ** own.secret_value
    _bump(counter, pairs=1, exps=1)
    shared = SharedValues(k1, k2, k3)
    return shared, SessionKey(session_key(params, view, shared), shared)


def improved_derive(
    params: SystemParams,
    own: Xcl12UserKeys,
    flow: Xcl12Flow,
    view: Xcl12View,
    counter: OpCounter | None = None,
) -> tuple[SharedValues, SessionKey]:
    backend, peers, unmasked, k1 = _session_inputs(params, own, flow, view, counter)
    v, w = peers
    arg_v = unmasked[v.identity] + flow.peer_bases[v.identity]
    arg_w = unmasked[w.identity] + flow.peer_bases[w.identity]
    _bump(counter, adds=2)
    k2 = backend.pair(arg_v, arg_w) ** (flow.ephemeral + own.partial.s_u.inverse())
    _bump(counter, pairs=1, exps=1)
    arg_v = unmasked[v.identity] + v.upk
    arg_w = unmasked[w.identity] + w.upk
    _bump(counter, adds=2)
    k3 = backend.pair(arg_v, arg_w) ** (flow.ephemeral + own.secret_value)
    _bump(counter, pairs=1, exps=1)
    shared = SharedValues(k1, k2, k3)
    return shared, SessionKey(session_key(params, view, shared), shared)
