"""Prime-order group arithmetic for the credential and signature layers.

Two instantiations are provided:

* ``SECP256K1`` -- the curve used for everything production-shaped.  Points
  are encoded as 33-byte compressed SEC strings; the identity encodes as 33
  zero bytes.
* ``toy_group()`` -- the order-q subgroup of quadratic residues mod p with
  p = 2q + 1 and q small (11 by default).  Small enough that every statement
  the library proves can be cross-checked by brute force in tests.

Scalars are plain Python ints reduced mod the group order; elements are
opaque values that only the owning :class:`Group` knows how to combine,
encode, and validate.
"""

from __future__ import annotations

import hashlib
from typing import Iterable, Sequence

Element = object
Scalar = int


class GroupError(ValueError):
    """Bad scalar or element handed to a group operation."""


class InvalidEncodingError(GroupError):
    """Byte string does not decode to a valid scalar or element."""


def _sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


class Group:
    """A cyclic group of prime order with canonical byte encodings."""

    name: str
    order: int
    element_size: int

    @property
    def scalar_size(self) -> int:
        return (self.order.bit_length() + 7) // 8

    # -- subclass surface ---------------------------------------------------

    def identity(self) -> Element:
        raise NotImplementedError

    def op(self, a: Element, b: Element) -> Element:
        raise NotImplementedError

    def power(self, g: Element, k: Scalar) -> Element:
        raise NotImplementedError

    def is_valid(self, el: Element) -> bool:
        raise NotImplementedError

    def encode_element(self, el: Element) -> bytes:
        raise NotImplementedError

    def decode_element(self, data: bytes) -> Element:
        raise NotImplementedError

    def derive_generator(self, tag: bytes) -> Element:
        """Derive a generator from a public tag with no known discrete log."""
        raise NotImplementedError

    @property
    def base(self) -> Element:
        """The distinguished generator used by the signature scheme."""
        raise NotImplementedError

    # -- shared helpers -----------------------------------------------------

    def multi_power(self, pairs: Iterable[tuple[Element, Scalar]]) -> Element:
        acc = self.identity()
        for g, k in pairs:
            acc = self.op(acc, self.power(g, k))
        return acc

    def encode_scalar(self, k: Scalar) -> bytes:
        return (k % self.order).to_bytes(self.scalar_size, "big")

    def decode_scalar(self, data: bytes) -> Scalar:
        if len(data) != self.scalar_size:
            raise InvalidEncodingError(
                f"scalar must be {self.scalar_size} bytes, got {len(data)}"
            )
        value = int.from_bytes(data, "big")
        if value >= self.order:
            raise InvalidEncodingError("scalar not reduced mod the group order")
        return value

    def hash_to_scalar(self, *parts: bytes) -> Scalar:
        """SHA-256 over the concatenated canonical encodings, reduced mod q."""
        return int.from_bytes(_sha256(b"".join(parts)), "big") % self.order

    def random_scalar(self, rng) -> Scalar:
        return rng.randrange(self.order)


# ---------------------------------------------------------------------------
# secp256k1
# ---------------------------------------------------------------------------

_P = 2**256 - 2**32 - 977
_Q = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
_GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
_GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8

# Jacobian triples (X, Y, Z); Z == 0 is the point at infinity.
_INF = (0, 0, 0)


def _jac_double(pt):
    X1, Y1, Z1 = pt
    if not Y1 or not Z1:
        return _INF
    A = X1 * X1 % _P
    B = Y1 * Y1 % _P
    C = B * B % _P
    D = 2 * ((X1 + B) * (X1 + B) - A - C) % _P
    E = 3 * A % _P
    F = E * E % _P
    X3 = (F - 2 * D) % _P
    Y3 = (E * (D - X3) - 8 * C) % _P
    Z3 = 2 * Y1 * Z1 % _P
    return (X3, Y3, Z3)


def _jac_add(p1, p2):
    X1, Y1, Z1 = p1
    X2, Y2, Z2 = p2
    if not Z1:
        return p2
    if not Z2:
        return p1
    Z1Z1 = Z1 * Z1 % _P
    Z2Z2 = Z2 * Z2 % _P
    U1 = X1 * Z2Z2 % _P
    U2 = X2 * Z1Z1 % _P
    S1 = Y1 * Z2 * Z2Z2 % _P
    S2 = Y2 * Z1 * Z1Z1 % _P
    H = (U2 - U1) % _P
    R = (S2 - S1) % _P
    if not H:
        if not R:
            return _jac_double(p1)
        return _INF
    HH = H * H % _P
    HHH = H * HH % _P
    V = U1 * HH % _P
    X3 = (R * R - HHH - 2 * V) % _P
    Y3 = (R * (V - X3) - S1 * HHH) % _P
    Z3 = Z1 * Z2 * H % _P
    return (X3, Y3, Z3)


def _jac_to_affine(pt):
    X, Y, Z = pt
    if not Z:
        return None
    zi = pow(Z, _P - 2, _P)
    zi2 = zi * zi % _P
    return (X * zi2 % _P, Y * zi2 * zi % _P)


_WINDOW_BITS = 4
_WINDOW_COUNT = 64  # ceil(256 / 4)


class Secp256k1(Group):
    """secp256k1 with multiplicative notation and compressed point encoding.

    Affine points are ``(x, y)`` tuples; the identity is ``None``.  Scalar
    multiplication uses plain double-and-add, upgraded to a cached 4-bit
    fixed-window ladder for bases registered via :meth:`warm` (the standard
    base and every credential generator).
    """

    name = "secp256k1"
    order = _Q
    element_size = 33

    def __init__(self) -> None:
        self._tables: dict[tuple[int, int], list[list[tuple]]] = {}
        self.warm((_GX, _GY))

    @property
    def base(self) -> Element:
        return (_GX, _GY)

    def identity(self) -> Element:
        return None

    def is_valid(self, el: Element) -> bool:
        if el is None:
            return True
        if not (isinstance(el, tuple) and len(el) == 2):
            return False
        x, y = el
        return 0 <= x < _P and 0 < y < _P and (y * y - (x * x * x + 7)) % _P == 0

    def op(self, a: Element, b: Element) -> Element:
        if a is None:
            return b
        if b is None:
            return a
        return _jac_to_affine(_jac_add((*a, 1), (*b, 1)))

    def warm(self, el: Element) -> None:
        """Precompute the fixed-window table for a frequently used base."""
        if el is None or el in self._tables:
            return
        table = []
        base = (*el, 1)
        for _ in range(_WINDOW_COUNT):
            row = [_INF]
            acc = _INF
            for _ in range((1 << _WINDOW_BITS) - 1):
                acc = _jac_add(acc, base)
                row.append(acc)
            table.append(row)
            for _ in range(_WINDOW_BITS):
                base = _jac_double(base)
        self._tables[el] = table

    def power(self, g: Element, k: Scalar) -> Element:
        k %= _Q
        if g is None or k == 0:
            return None
        table = self._tables.get(g)
        if table is not None:
            acc = _INF
            w = 0
            while k:
                digit = k & ((1 << _WINDOW_BITS) - 1)
                if digit:
                    acc = _jac_add(acc, table[w][digit])
                k >>= _WINDOW_BITS
                w += 1
            return _jac_to_affine(acc)
        acc = _INF
        pt = (*g, 1)
        for bit in bin(k)[2:]:
            acc = _jac_double(acc)
            if bit == "1":
                acc = _jac_add(acc, pt)
        return _jac_to_affine(acc)

    def encode_element(self, el: Element) -> bytes:
        if el is None:
            return b"\x00" * 33
        x, y = el
        return bytes([2 + (y & 1)]) + x.to_bytes(32, "big")

    def decode_element(self, data: bytes) -> Element:
        if len(data) != 33:
            raise InvalidEncodingError(f"point must be 33 bytes, got {len(data)}")
        if data == b"\x00" * 33:
            return None
        prefix = data[0]
        if prefix not in (2, 3):
            raise InvalidEncodingError(f"bad point prefix 0x{prefix:02x}")
        x = int.from_bytes(data[1:], "big")
        if x >= _P:
            raise InvalidEncodingError("x coordinate out of range")
        y_sq = (x * x * x + 7) % _P
        y = pow(y_sq, (_P + 1) // 4, _P)
        if y * y % _P != y_sq:
            raise InvalidEncodingError("x coordinate not on the curve")
        if y & 1 != prefix & 1:
            y = _P - y
        return (x, y)

    def derive_generator(self, tag: bytes) -> Element:
        # Try-and-increment on the x coordinate of H(tag); nobody learns a
        # discrete log this way.
        x = int.from_bytes(_sha256(b"idchain.gen." + tag), "big") % _P
        while True:
            y_sq = (x * x * x + 7) % _P
            y = pow(y_sq, (_P + 1) // 4, _P)
            if y * y % _P == y_sq and y != 0:
                return (x, min(y, _P - y))
            x = (x + 1) % _P


# ---------------------------------------------------------------------------
# Schnorr subgroup of Z_p*, p = 2q + 1
# ---------------------------------------------------------------------------


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class SubgroupModP(Group):
    """Order-q subgroup of integers mod p = 2q + 1 (the quadratic residues).

    Elements are plain ints.  With q = 11 the whole group has 11 elements, so
    tests can enumerate every attribute vector and check commitments against
    a repeated-multiplication oracle.
    """

    def __init__(self, q: int = 11) -> None:
        p = 2 * q + 1
        if not (_is_prime(q) and _is_prime(p)):
            raise GroupError(f"need q and 2q+1 both prime, got q={q}")
        self.order = q
        self.modulus = p
        self.name = f"mod{p}"
        self.element_size = (p.bit_length() + 7) // 8

    @property
    def base(self) -> Element:
        return self.derive_generator(b"base")

    def identity(self) -> Element:
        return 1

    def is_valid(self, el: Element) -> bool:
        return (
            isinstance(el, int)
            and 1 <= el < self.modulus
            and pow(el, self.order, self.modulus) == 1
        )

    def op(self, a: Element, b: Element) -> Element:
        return a * b % self.modulus

    def power(self, g: Element, k: Scalar) -> Element:
        return pow(g, k % self.order, self.modulus)

    def encode_element(self, el: Element) -> bytes:
        return el.to_bytes(self.element_size, "big")

    def decode_element(self, data: bytes) -> Element:
        if len(data) != self.element_size:
            raise InvalidEncodingError(
                f"element must be {self.element_size} bytes, got {len(data)}"
            )
        el = int.from_bytes(data, "big")
        if not self.is_valid(el):
            raise InvalidEncodingError(f"{el} is not in the subgroup")
        return el

    def derive_generator(self, tag: bytes) -> Element:
        counter = 0
        while True:
            x = (
                int.from_bytes(_sha256(b"idchain.gen." + tag + bytes([counter])), "big")
                % self.modulus
            )
            g = x * x % self.modulus  # squaring lands in the residue subgroup
            if g != 1:
                return g
            counter += 1


SECP256K1 = Secp256k1()

_toy_cache: dict[int, SubgroupModP] = {}


def toy_group(q: int = 11) -> SubgroupModP:
    """The shared small-group instance used by oracle-backed tests."""
    if q not in _toy_cache:
        _toy_cache[q] = SubgroupModP(q)
    return _toy_cache[q]
