"""Symmetric bilinear pairing with a transparent and a cryptographic backend.

Everything in this package is written against an abstract symmetric pairing
e: G1 x G1 -> G2 over groups of prime order q, with G1 additive (generated
by P) and G2 multiplicative (generated by g = e(P, P)).  Two interchangeable
backends provide it:

* ``TransparentBackend`` represents a G1 element by its discrete logarithm
  and a G2 element by its exponent relative to g; the pairing is residue
  multiplication mod q.  Every element's discrete log is exposed, so any
  protocol equation can be checked exactly by residue arithmetic.  This is
  a test and oracle device, not a cryptographic group.

* ``SupersingularBackend`` uses the curve y^2 = x^3 + x over F_p with
  p = h*q - 1 prime and p = 3 (mod 4).  The curve is supersingular with
  #E(F_p) = p + 1, embedding degree 2, and carries the distortion map
  psi(x, y) = (-x, i*y) into E(F_p^2).  e(U, V) is the reduced Tate pairing
  of U with psi(V).  Since psi is a group homomorphism, psi(V) has the same
  discrete log as V, which makes the abstract pairing symmetric and
  bilinear exactly as the protocols assume.

Hashing to scalars and the session KDF also live here because both are
defined in terms of the group order and the canonical encodings.  Every
multi-part hash input is length-prefixed (4-byte big-endian length before
each part) so that part boundaries are unambiguous.

None of this is constant-time and the parameter sizes are laboratory
choices; the point is exact, reproducible protocol algebra.
"""

from __future__ import annotations

import functools
import hashlib
import struct
from typing import Iterable, Optional, Union

from .errors import (
    BackendMismatchError,
    ClakaError,
    DegenerateScalarError,
    EncodingError,
)

DEFAULT_KEY_BITS = 256

# Small prime for eyeball-checkable transparent runs.
_Q_SMALL = 1009

# Group order of the secp256k1 curve: a well-known 256-bit prime, shared by
# the 256-bit transparent and cryptographic profiles.
_Q_256 = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141

# 160-bit subgroup order for the default cryptographic profile.  The
# cofactors below were chosen so that p = h*q - 1 is prime with p = 3 mod 4,
# which makes y^2 = x^3 + x over F_p supersingular with #E(F_p) = h*q.
_Q_160 = 0x8000000000000000000000000000000080000039
_COFACTOR_160 = 216
_COFACTOR_256 = 800

_H2S_PREFIX = b"CLAKA/H2S"
_KDF_PREFIX = b"CLAKA/KDF"


def encode_parts(parts: Iterable[bytes]) -> bytes:
    """Join byte strings with a 4-byte big-endian length before each part."""
    out = bytearray()
    for part in parts:
        out += struct.pack(">I", len(part))
        out += part
    return bytes(out)


class Scalar:
    """Residue mod the group order q, tied to the backend that created it."""

    __slots__ = ("backend", "value")

    def __init__(self, backend: "PairingBackend", value: int):
        self.backend = backend
        self.value = value % backend.q

    def _operand(self, other) -> Optional[int]:
        if isinstance(other, Scalar):
            if other.backend is not self.backend:
                raise BackendMismatchError("scalars belong to different backends")
            return other.value
        if isinstance(other, int):
            return other
        return None

    def __add__(self, other):
        v = self._operand(other)
        if v is None:
            return NotImplemented
        return Scalar(self.backend, self.value + v)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._operand(other)
        if v is None:
            return NotImplemented
        return Scalar(self.backend, self.value - v)

    def __rsub__(self, other):
        v = self._operand(other)
        if v is None:
            return NotImplemented
        return Scalar(self.backend, v - self.value)

    def __mul__(self, other):
        v = self._operand(other)
        if v is None:
            return NotImplemented
        return Scalar(self.backend, self.value * v)

    __rmul__ = __mul__

    def __neg__(self):
        return Scalar(self.backend, -self.value)

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.backend is other.backend and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.backend.q
        return NotImplemented

    def __hash__(self):
        return hash((id(self.backend), self.value))

    def __repr__(self):
        return f"Scalar({self.value})"

    def is_zero(self) -> bool:
        return self.value == 0

    def inverse(self) -> "Scalar":
        if self.value == 0:
            raise DegenerateScalarError("scalar 0 has no inverse")
        return Scalar(self.backend, pow(self.value, -1, self.backend.q))

    def to_bytes(self) -> bytes:
        return self.backend.scalar_to_bytes(self)


ScalarLike = Union[Scalar, int]


class G1Point:
    """Element of the additive source group G1."""

    __slots__ = ("backend", "data")

    def __init__(self, backend: "PairingBackend", data):
        self.backend = backend
        self.data = data

    def _peer(self, other) -> "G1Point":
        if not isinstance(other, G1Point):
            raise BackendMismatchError(f"cannot combine G1 point with {type(other).__name__}")
        if other.backend is not self.backend:
            raise BackendMismatchError("G1 points belong to different backends")
        return other

    def __add__(self, other):
        return self.backend._g1_add(self, self._peer(other))

    def __sub__(self, other):
        return self.backend._g1_add(self, self.backend._g1_neg(self._peer(other)))

    def __neg__(self):
        return self.backend._g1_neg(self)

    def _scale(self, k) -> "G1Point":
        if isinstance(k, Scalar):
            if k.backend is not self.backend:
                raise BackendMismatchError("scalar and point belong to different backends")
            k = k.value
        elif isinstance(k, int):
            k %= self.backend.q
        else:
            return NotImplemented
        return self.backend._g1_mul(k, self)

    __mul__ = _scale
    __rmul__ = _scale

    def __eq__(self, other):
        if isinstance(other, G1Point):
            return self.backend is other.backend and self.data == other.data
        return NotImplemented

    def __hash__(self):
        return hash((id(self.backend), self.data))

    def __repr__(self):
        return f"G1Point({self.to_bytes().hex()[:16]}...)"

    def is_identity(self) -> bool:
        return self.backend._g1_is_identity(self)

    def to_bytes(self) -> bytes:
        return self.backend.g1_to_bytes(self)


class G2Elem:
    """Element of the multiplicative target group G2."""

    __slots__ = ("backend", "data")

    def __init__(self, backend: "PairingBackend", data):
        self.backend = backend
        self.data = data

    def __mul__(self, other):
        if not isinstance(other, G2Elem):
            return NotImplemented
        if other.backend is not self.backend:
            raise BackendMismatchError("G2 elements belong to different backends")
        return self.backend._g2_mul(self, other)

    def __pow__(self, k):
        if isinstance(k, Scalar):
            if k.backend is not self.backend:
                raise BackendMismatchError("scalar and G2 element belong to different backends")
            k = k.value
        elif isinstance(k, int):
            k %= self.backend.q
        else:
            return NotImplemented
        return self.backend._g2_pow(self, k)

    def __eq__(self, other):
        if isinstance(other, G2Elem):
            return self.backend is other.backend and self.data == other.data
        return NotImplemented

    def __hash__(self):
        return hash((id(self.backend), self.data))

    def __repr__(self):
        return f"G2Elem({self.to_bytes().hex()[:16]}...)"

    def is_identity(self) -> bool:
        return self.backend._g2_is_identity(self)

    def to_bytes(self) -> bytes:
        return self.backend.g2_to_bytes(self)


class PairingBackend:
    """Common interface of both pairing backends.

    Concrete attributes set by subclasses: ``q`` (group order), ``P``
    (generator of G1), ``g`` (= e(P, P), generator of G2), ``backend_id``,
    ``profile``, ``supports_dlog``.
    """

    backend_id = "abstract"
    supports_dlog = False

    def __init__(self, q: int, profile: str):
        self.q = q
        self.profile = profile
        self.scalar_width = (q.bit_length() + 7) // 8

    # -- scalars ----------------------------------------------------------

    def scalar(self, value: int) -> Scalar:
        return Scalar(self, value)

    def random_scalar(self, rng, nonzero: bool = True) -> Scalar:
        return Scalar(self, rng.randrange(1 if nonzero else 0, self.q))

    def scalar_to_bytes(self, s: Scalar) -> bytes:
        return s.value.to_bytes(self.scalar_width, "big")

    def scalar_from_bytes(self, raw: bytes) -> Scalar:
        if len(raw) != self.scalar_width:
            raise EncodingError(f"scalar encoding must be {self.scalar_width} bytes")
        value = int.from_bytes(raw, "big")
        if value >= self.q:
            raise EncodingError("scalar encoding out of range")
        return Scalar(self, value)

    # -- hashing ------------------------------------------------------------

    def hash_to_scalar(self, tag: bytes, data: bytes) -> Scalar:
        """Hash arbitrary bytes into Z_q^* (never zero).

        The digest is reduced mod q-1 and shifted by one, so the output is
        uniform enough for protocol work over [1, q-1]; the small bias is
        irrelevant here.  Distinct tags give independent functions.
        """
        width = self.scalar_width + 16
        digest = hashlib.shake_256(_H2S_PREFIX + encode_parts([tag, data])).digest(width)
        return Scalar(self, int.from_bytes(digest, "big") % (self.q - 1) + 1)

    def kdf(self, tag: bytes, parts: Iterable[bytes], out_bits: int = DEFAULT_KEY_BITS) -> bytes:
        """Derive ``out_bits`` of key material from an ordered part list."""
        if out_bits % 8:
            raise ClakaError("KDF output length must be a whole number of bytes")
        material = _KDF_PREFIX + encode_parts([tag, *parts])
        return hashlib.shake_256(material).digest(out_bits // 8)

    # -- group API (implemented by subclasses) ------------------------------

    def g1_identity(self) -> G1Point:
        raise NotImplementedError

    def g2_identity(self) -> G2Elem:
        raise NotImplementedError

    def pair(self, u: G1Point, v: G1Point) -> G2Elem:
        raise NotImplementedError

    def g1_to_bytes(self, u: G1Point) -> bytes:
        raise NotImplementedError

    def g1_from_bytes(self, raw: bytes, strict: bool = False) -> G1Point:
        raise NotImplementedError

    def g2_to_bytes(self, z: G2Elem) -> bytes:
        raise NotImplementedError

    def g2_from_bytes(self, raw: bytes) -> G2Elem:
        raise NotImplementedError

    def dlog_g1(self, u: G1Point) -> int:
        raise ClakaError("discrete logs are exposed by the transparent backend only")

    def dlog_g2(self, z: G2Elem) -> int:
        raise ClakaError("discrete logs are exposed by the transparent backend only")

    def _check_pair_args(self, u: G1Point, v: G1Point) -> None:
        if not (isinstance(u, G1Point) and isinstance(v, G1Point)):
            raise BackendMismatchError("pairing arguments must be G1 points")
        if u.backend is not self or v.backend is not self:
            raise BackendMismatchError("pairing arguments belong to a different backend")


class TransparentBackend(PairingBackend):
    """Discrete-log-exposed backend: G1 = (Z_q, +), G2 = (Z_q, +) as exponents.

    A G1 point stores its log relative to P; a G2 element stores its
    exponent relative to g = e(P, P).  The pairing multiplies logs mod q.
    """

    backend_id = "transparent"
    supports_dlog = True

    def __init__(self, q: int, profile: str):
        super().__init__(q, profile)
        self.P = G1Point(self, 1 % q)
        self.g = G2Elem(self, 1 % q)

    def g1_identity(self) -> G1Point:
        return G1Point(self, 0)

    def g2_identity(self) -> G2Elem:
        return G2Elem(self, 0)

    def _g1_add(self, u, v):
        return G1Point(self, (u.data + v.data) % self.q)

    def _g1_neg(self, u):
        return G1Point(self, -u.data % self.q)

    def _g1_mul(self, k, u):
        return G1Point(self, k * u.data % self.q)

    def _g1_is_identity(self, u):
        return u.data == 0

    def _g2_mul(self, a, b):
        return G2Elem(self, (a.data + b.data) % self.q)

    def _g2_pow(self, a, k):
        return G2Elem(self, k * a.data % self.q)

    def _g2_is_identity(self, z):
        return z.data == 0

    def pair(self, u, v):
        self._check_pair_args(u, v)
        return G2Elem(self, u.data * v.data % self.q)

    def g1_to_bytes(self, u):
        return u.data.to_bytes(self.scalar_width, "big")

    def g1_from_bytes(self, raw, strict=False):
        if len(raw) != self.scalar_width:
            raise EncodingError(f"G1 encoding must be {self.scalar_width} bytes")
        value = int.from_bytes(raw, "big")
        if value >= self.q:
            raise EncodingError("G1 encoding out of range")
        return G1Point(self, value)

    def g2_to_bytes(self, z):
        return z.data.to_bytes(self.scalar_width, "big")

    def g2_from_bytes(self, raw):
        if len(raw) != self.scalar_width:
            raise EncodingError(f"G2 encoding must be {self.scalar_width} bytes")
        value = int.from_bytes(raw, "big")
        if value >= self.q:
            raise EncodingError("G2 encoding out of range")
        return G2Elem(self, value)

    def dlog_g1(self, u):
        return u.data

    def dlog_g2(self, z):
        return z.data


class SupersingularBackend(PairingBackend):
    """Tate pairing on the supersingular curve y^2 = x^3 + x over F_p.

    G1 points are affine pairs (x, y) with ``None`` for the identity.  G2
    elements live in the order-q subgroup of F_p^2 = F_p[i] (i^2 = -1) and
    are stored as coefficient pairs (c0, c1).  The second pairing argument
    is passed through the distortion map psi(x, y) = (-x, i*y); because the
    x-coordinate of a distorted point stays in F_p, all vertical-line
    factors of the Miller loop land in F_p^* and are erased by the final
    exponentiation (p - 1)*h, so they are skipped.
    """

    backend_id = "crypto"

    def __init__(self, q: int, cofactor: int, profile: str):
        super().__init__(q, profile)
        self.cofactor = cofactor
        self.p = cofactor * q - 1
        if self.p % 4 != 3:
            raise ClakaError("field prime must be 3 mod 4")
        self.point_width = (self.p.bit_length() + 7) // 8
        self._miller_bits = [int(b) for b in bin(q)[3:]]
        self.P = G1Point(self, self._find_generator())
        self.g = self.pair(self.P, self.P)
        if self.g.is_identity():
            raise ClakaError("pairing parameters are degenerate")

    # -- curve arithmetic ---------------------------------------------------

    def _find_generator(self):
        # deterministic: smallest x >= 1 giving a curve point that clears
        # the cofactor into a point of exact order q
        p = self.p
        x = 0
        while True:
            x += 1
            t = (x * x * x + x) % p
            if not t or pow(t, (p - 1) // 2, p) != 1:
                continue
            candidate = self._ec_mul(self.cofactor, (x, pow(t, (p + 1) // 4, p)))
            if candidate is not None and self._ec_mul(self.q, candidate) is None:
                return candidate

    def _ec_add(self, a, b):
        if a is None:
            return b
        if b is None:
            return a
        p = self.p
        x1, y1 = a
        x2, y2 = b
        if x1 == x2:
            if (y1 + y2) % p == 0:
                return None
            lam = (3 * x1 * x1 + 1) * pow(2 * y1, -1, p) % p
        else:
            lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
        x3 = (lam * lam - x1 - x2) % p
        y3 = (lam * (x1 - x3) - y1) % p
        return (x3, y3)

    def _ec_neg(self, a):
        if a is None:
            return None
        return (a[0], -a[1] % self.p)

    def _ec_mul(self, k, a):
        result = None
        addend = a
        while k:
            if k & 1:
                result = self._ec_add(result, addend)
            addend = self._ec_add(addend, addend)
            k >>= 1
        return result

    def _on_curve(self, a) -> bool:
        if a is None:
            return True
        x, y = a
        return (y * y - (x * x * x + x)) % self.p == 0

    # -- F_p^2 arithmetic -----------------------------------------------------

    def _f2_mul(self, u, v):
        p = self.p
        a, b = u
        c, d = v
        ac = a * c
        bd = b * d
        return ((ac - bd) % p, ((a + b) * (c + d) - ac - bd) % p)

    def _f2_sqr(self, u):
        p = self.p
        a, b = u
        return ((a - b) * (a + b) % p, 2 * a * b % p)

    def _f2_inv(self, u):
        p = self.p
        a, b = u
        norm_inv = pow(a * a + b * b, -1, p)
        return (a * norm_inv % p, -b * norm_inv % p)

    def _f2_pow(self, u, e):
        result = (1, 0)
        while e:
            if e & 1:
                result = self._f2_mul(result, u)
            u = self._f2_sqr(u)
            e >>= 1
        return result

    # -- group API ------------------------------------------------------------

    def g1_identity(self):
        return G1Point(self, None)

    def g2_identity(self):
        return G2Elem(self, (1, 0))

    def _g1_add(self, u, v):
        return G1Point(self, self._ec_add(u.data, v.data))

    def _g1_neg(self, u):
        return G1Point(self, self._ec_neg(u.data))

    def _g1_mul(self, k, u):
        return G1Point(self, self._ec_mul(k, u.data))

    def _g1_is_identity(self, u):
        return u.data is None

    def _g2_mul(self, a, b):
        return G2Elem(self, self._f2_mul(a.data, b.data))

    def _g2_pow(self, a, k):
        return G2Elem(self, self._f2_pow(a.data, k))

    def _g2_is_identity(self, z):
        return z.data == (1, 0)

    def pair(self, u, v):
        """Reduced Tate pairing e(U, psi(V)) with denominator elimination."""
        self._check_pair_args(u, v)
        if u.data is None or v.data is None:
            return self.g2_identity()
        p = self.p
        xq, yq = v.data
        xe = -xq % p  # x-coordinate of psi(V); stays in F_p
        xu, yu = u.data
        f = (1, 0)
        t = u.data
        for bit in self._miller_bits:
            xt, yt = t
            lam = (3 * xt * xt + 1) * pow(2 * yt, -1, p) % p
            line = (-(yt + lam * (xe - xt)) % p, yq)
            f = self._f2_mul(self._f2_sqr(f), line)
            t = self._ec_add(t, t)
            if bit:
                xt, yt = t
                if xt == xu and (yt + yu) % p == 0:
                    # final addition reaches q*U = identity through -U; the
                    # connecting line is vertical, an F_p^* factor that the
                    # final exponentiation erases
                    t = None
                    continue
                lam = (yt - yu) * pow(xt - xu, -1, p) % p
                line = (-(yu + lam * (xe - xu)) % p, yq)
                f = self._f2_mul(f, line)
                t = self._ec_add(t, u.data)
        # final exponentiation: (p^2 - 1)/q = (p - 1) * cofactor, and
        # f^(p-1) = conj(f) / f via the Frobenius map
        frob = (f[0], -f[1] % p)
        reduced = self._f2_mul(frob, self._f2_inv(f))
        return G2Elem(self, self._f2_pow(reduced, self.cofactor))

    # -- serialization ----------------------------------------------------------

    def g1_to_bytes(self, u):
        w = self.point_width
        if u.data is None:
            return b"\x00" * (1 + 2 * w)
        x, y = u.data
        return b"\x04" + x.to_bytes(w, "big") + y.to_bytes(w, "big")

    def g1_from_bytes(self, raw, strict=False):
        w = self.point_width
        if len(raw) != 1 + 2 * w:
            raise EncodingError(f"G1 encoding must be {1 + 2 * w} bytes")
        if raw[0] == 0:
            if any(raw[1:]):
                raise EncodingError("identity encoding must be all zero")
            return G1Point(self, None)
        if raw[0] != 4:
            raise EncodingError("unknown G1 encoding tag")
        x = int.from_bytes(raw[1 : 1 + w], "big")
        y = int.from_bytes(raw[1 + w :], "big")
        if x >= self.p or y >= self.p:
            raise EncodingError("G1 coordinate out of range")
        if not self._on_curve((x, y)):
            raise EncodingError("point is not on the curve")
        if strict and self._ec_mul(self.q, (x, y)) is not None:
            raise EncodingError("point is not in the order-q subgroup")
        return G1Point(self, (x, y))

    def g2_to_bytes(self, z):
        w = self.point_width
        c0, c1 = z.data
        return c0.to_bytes(w, "big") + c1.to_bytes(w, "big")

    def g2_from_bytes(self, raw):
        w = self.point_width
        if len(raw) != 2 * w:
            raise EncodingError(f"G2 encoding must be {2 * w} bytes")
        c0 = int.from_bytes(raw[:w], "big")
        c1 = int.from_bytes(raw[w:], "big")
        if c0 >= self.p or c1 >= self.p:
            raise EncodingError("G2 coefficient out of range")
        if (c0 * c0 + c1 * c1) % self.p != 1:
            raise EncodingError("G2 element is not unitary")
        if self._f2_pow((c0, c1), self.q) != (1, 0):
            raise EncodingError("G2 element is not in the order-q subgroup")
        return G2Elem(self, (c0, c1))


_PROFILE_BUILDERS = {
    "t1009": lambda: TransparentBackend(_Q_SMALL, "t1009"),
    "t256": lambda: TransparentBackend(_Q_256, "t256"),
    "c160": lambda: SupersingularBackend(_Q_160, _COFACTOR_160, "c160"),
    "c256": lambda: SupersingularBackend(_Q_256, _COFACTOR_256, "c256"),
}

#: default profile for each backend kind
DEFAULT_PROFILES = {"transparent": "t256", "crypto": "c160"}

PROFILE_NAMES = tuple(_PROFILE_BUILDERS)


@functools.lru_cache(maxsize=None)
def get_backend(profile: str) -> PairingBackend:
    """Return the shared backend instance for a named parameter profile."""
    try:
        builder = _PROFILE_BUILDERS[profile]
    except KeyError:
        raise ClakaError(f"unknown backend profile {profile!r}") from None
    return builder()


def default_profile(backend_kind: str) -> str:
    try:
        return DEFAULT_PROFILES[backend_kind]
    except KeyError:
        raise ClakaError(f"unknown backend kind {backend_kind!r}") from None
