"""Signature scheme for the authenticated protocol variant.

Schnorr-style proof of knowledge of the full private key S_U, carried out
in the pairing groups so that it reuses the key pair the inverse-point
pipeline already provides: the signer holds S_U with
e(S_U, P_U) = e(P, P), where P_U = upk_U + H2(upk_U) * Q_U is computable
from public data alone.

    sign:    k <- Z_q^*,  R = e(k*P, P_U),  c = H("CLSIG", R || m || P_U),
             z = k*P + c*S_U,  signature = (R, z)
    verify:  recompute P_U and c, accept iff e(z, P_U) == R * e(P, P)^c

Completeness: e(k*P + c*S_U, P_U) = e(k*P, P_U) * e(S_U, P_U)^c = R * g^c.
"""

from __future__ import annotations

from dataclasses import dataclass

from .keyinfra import SystemParams, combined_public
from .pairing import G1Point, G2Elem, Scalar, encode_parts

CHALLENGE_TAG = b"CLSIG"


@dataclass(frozen=True)
class ClSignature:
    commitment: G2Elem  # R
    response: G1Point  # z


def _challenge(params: SystemParams, commitment: G2Elem, message: bytes, public_point: G1Point) -> Scalar:
    data = encode_parts([commitment.to_bytes(), message, public_point.to_bytes()])
    return params.backend.hash_to_scalar(CHALLENGE_TAG, data)


def sign(params: SystemParams, full_key: G1Point, public_point: G1Point, message: bytes, rng) -> ClSignature:
    """Sign ``message`` under ``full_key``; ``public_point`` is the matching P_U."""
    backend = params.backend
    k = backend.random_scalar(rng)
    k_point = k * backend.P
    commitment = backend.pair(k_point, public_point)
    c = _challenge(params, commitment, message, public_point)
    return ClSignature(commitment, k_point + c * full_key)


def verify(params: SystemParams, identity: bytes, upk: G1Point, message: bytes, sig: ClSignature) -> bool:
    """Check a signature against the signer's public data only."""
    backend = params.backend
    public_point = combined_public(params, identity, upk)
    c = _challenge(params, sig.commitment, message, public_point)
    return backend.pair(sig.response, public_point) == sig.commitment * backend.g**c


def signature_to_bytes(sig: ClSignature) -> bytes:
    return encode_parts([sig.commitment.to_bytes(), sig.response.to_bytes()])
