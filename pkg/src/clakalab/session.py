"""Session-level types shared by the protocols, attacks, and harness."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ScenarioError
from .pairing import G1Point

#: protocol variant tags; the trailing "i" marks the repaired variant
PROTOCOL_VARIANTS = ("xcq11", "xcq11i", "xcl12", "xcl12i")


def family(protocol: str) -> str:
    """Collapse a protocol variant to its key-infrastructure family."""
    if protocol in ("xcq11", "xcq11i"):
        return "xcq11"
    if protocol in ("xcl12", "xcl12i"):
        return "xcl12"
    raise ScenarioError(f"unknown protocol {protocol!r}")


def is_improved(protocol: str) -> bool:
    family(protocol)
    return protocol.endswith("i")


@dataclass(frozen=True)
class PartyPublic:
    """Public announcement of one participant: identity and user public key."""

    identity: bytes
    upk: G1Point


@dataclass(frozen=True)
class SessionKey:
    """Derived k-bit session key.

    ``shared`` keeps the group value(s) that went into the KDF.  It is a
    debugging aid for the transparent oracles and never leaves the process;
    transcripts and reports carry key digests only.
    """

    key: bytes
    shared: object = field(default=None, compare=False)


def canonical_identities(identities: Iterable[bytes]) -> tuple[bytes, ...]:
    """Fix the (A, B, C) role slots by sorting identity bytes."""
    ordered = tuple(sorted(identities))
    if len(set(ordered)) != len(ordered):
        raise ScenarioError("participant identities must be distinct")
    return ordered


def canonical_parties(parties: Sequence) -> tuple:
    """Sort announcement records (anything with ``.identity``) into role order."""
    ordered = tuple(sorted(parties, key=lambda p: p.identity))
    ids = [p.identity for p in ordered]
    if len(set(ids)) != len(ids):
        raise ScenarioError("participant identities must be distinct")
    return ordered
