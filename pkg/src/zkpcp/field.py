"""Exact arithmetic in prime fields GF(p) and binary extension fields GF(2^e).

Elements are canonical non-negative integers: residues in [0, p) for prime
fields, and e-bit vectors (bit i is the coefficient of x^i) for binary fields.
Arithmetic is computed rather than looked up, so memory stays flat even for
GF(2^16).  Every scalar operation has a numpy counterpart (prefix ``v``) that
works elementwise on int64 arrays.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class FieldError(ValueError):
    pass


class CompositeModulus(FieldError):
    pass


class ReducibleModulusPolynomial(FieldError):
    pass


class BadSubfieldDegree(FieldError):
    pass


class NoSubfieldConfigured(FieldError):
    pass


class DivisionByZero(FieldError, ZeroDivisionError):
    pass


class NotInField(FieldError):
    pass


# Published reduction polynomials, one per extension degree.  Bit i is the
# coefficient of x^i; the leading x^e bit is included.
IRREDUCIBLE = {
    1: 0b11,            # x + 1
    2: 0b111,           # x^2 + x + 1
    3: 0b1011,          # x^3 + x + 1
    4: 0b10011,         # x^4 + x + 1
    5: 0b100101,        # x^5 + x^2 + 1
    6: 0b1000011,       # x^6 + x + 1
    7: 0b10000011,      # x^7 + x + 1
    8: 0b100011011,     # x^8 + x^4 + x^3 + x + 1
    9: 0b1000010001,    # x^9 + x^4 + 1
    10: 0b10000001001,  # x^10 + x^3 + 1
    11: 0b100000000101,  # x^11 + x^2 + 1
    12: 0b1000001010011,  # x^12 + x^6 + x^4 + x + 1
    13: 0b10000000011011,  # x^13 + x^4 + x^3 + x + 1
    14: 0b100010001000011,  # x^14 + x^10 + x^6 + x + 1
    15: 0b1000000000000011,  # x^15 + x + 1
    16: 0b10000000000101011,  # x^16 + x^5 + x^3 + x + 1
}

MAX_ORDER = 1 << 16
TABLE_ORDER = 1 << 8  # binary fields up to this order multiply by table lookup


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # deterministic Miller-Rabin for n < 3.3e24
    for a in small:
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


# --- GF(2)[x] helpers on python ints -------------------------------------

def gf2_mod(a: int, m: int) -> int:
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


def gf2_mulmod(a: int, b: int, m: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
    return gf2_mod(r, m)


def gf2_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, gf2_mod(a, b)
    return a


def _prime_factors(n: int) -> list[int]:
    out, q = [], 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def gf2_is_irreducible(poly: int) -> bool:
    """Rabin's test: x^(2^e) = x mod f and gcd(x^(2^(e/r)) - x, f) = 1."""
    e = poly.bit_length() - 1
    if e < 1:
        return False
    if e == 1:
        return True

    def frob(k: int) -> int:
        y = 0b10
        for _ in range(k):
            y = gf2_mulmod(y, y, poly)
        return y

    if frob(e) != 0b10:
        return False
    for r in _prime_factors(e):
        if gf2_gcd(poly, frob(e // r) ^ 0b10) != 1:
            return False
    return True


# --- specs and subsets ----------------------------------------------------

@dataclass(frozen=True)
class FieldSpec:
    kind: str  # "prime" or "binary"
    p: int | None = None
    e: int | None = None
    irreducible: int | None = None
    subfield_f: int | None = None

    @classmethod
    def prime(cls, p: int) -> "FieldSpec":
        return cls("prime", p=p)

    @classmethod
    def binary(cls, e: int, irreducible: int | None = None, subfield_f: int | None = None) -> "FieldSpec":
        if irreducible is None:
            if e not in IRREDUCIBLE:
                raise FieldError(f"no published reduction polynomial for e={e}")
            irreducible = IRREDUCIBLE[e]
        return cls("binary", e=e, irreducible=irreducible, subfield_f=subfield_f)

    def to_json(self) -> dict:
        if self.kind == "prime":
            return {"kind": "prime", "p": self.p}
        return {"kind": "binary", "e": self.e, "irreducible_bits": self.irreducible,
                "subfield_f": self.subfield_f}

    @classmethod
    def from_json(cls, obj: dict) -> "FieldSpec":
        if obj["kind"] == "prime":
            return cls.prime(int(obj["p"]))
        if obj["kind"] in ("binary", "binary-extension"):
            irr = obj.get("irreducible_bits")
            if isinstance(irr, str):
                irr = int(irr, 0)
            return cls.binary(int(obj["e"]), irr, obj.get("subfield_f"))
        raise FieldError(f"unknown field kind {obj['kind']!r}")


@dataclass(frozen=True)
class SubsetH:
    """Ordered subset of field elements; ``is_subfield`` marks closure."""
    elems: tuple[int, ...]
    is_subfield: bool = False

    def __len__(self) -> int:
        return len(self.elems)

    def __iter__(self):
        return iter(self.elems)

    def __getitem__(self, i):
        return self.elems[i]

    def __contains__(self, x) -> bool:
        return int(x) in self.elems

    def index(self, x: int) -> int:
        return self.elems.index(int(x))

    def array(self) -> np.ndarray:
        return np.array(self.elems, dtype=np.int64)


# --- the field context ----------------------------------------------------

class FieldCtx:
    """Immutable field context.  Create through :func:`field_create`."""

    def __init__(self, spec: FieldSpec):
        self.spec = spec
        if spec.kind == "prime":
            if spec.p is None or not is_prime(spec.p):
                raise CompositeModulus(f"{spec.p} is not prime")
            if spec.subfield_f not in (None, 1):
                raise BadSubfieldDegree("prime fields have no proper subfields")
            self.binary = False
            self.order = spec.p
            self.char = spec.p
            self.degree = 1
        elif spec.kind == "binary":
            e, poly = spec.e, spec.irreducible
            if e is None or e < 1 or poly is None or poly.bit_length() - 1 != e:
                raise ReducibleModulusPolynomial(f"reduction polynomial {poly!r} does not have degree {e}")
            if not gf2_is_irreducible(poly):
                raise ReducibleModulusPolynomial(f"{bin(poly)} is reducible over GF(2)")
            if spec.subfield_f is not None and (spec.subfield_f < 1 or e % spec.subfield_f):
                raise BadSubfieldDegree(f"subfield degree {spec.subfield_f} does not divide {e}")
            self.binary = True
            self.order = 1 << e
            self.char = 2
            self.degree = e
            self._poly = poly
        else:
            raise FieldError(f"unknown field kind {spec.kind!r}")
        if self.order > MAX_ORDER:
            raise FieldError(f"field order {self.order} above the supported cap {MAX_ORDER}")
        self._mtab = None
        if self.binary and self.order <= TABLE_ORDER:
            x = np.arange(self.order, dtype=np.int64)
            self._mtab = self.vmul(x[:, None], x[None, :])
            self._mrows = self._mtab.tolist()
        self._subfield: SubsetH | None = None
        if spec.subfield_f is not None and self.binary:
            self._subfield = self._enumerate_subfield(spec.subfield_f)

    # identity / display
    def __repr__(self) -> str:
        if self.binary:
            return f"GF(2^{self.degree})"
        return f"GF({self.order})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FieldCtx) and other.spec == self.spec

    def __hash__(self) -> int:
        return hash(self.spec)

    @property
    def q(self) -> int:
        return self.order

    # scalar arithmetic
    def check(self, a) -> int:
        a = int(a)
        if not 0 <= a < self.order:
            raise NotInField(f"{a} is not an element of {self}")
        return a

    def add(self, a: int, b: int) -> int:
        return a ^ b if self.binary else (a + b) % self.order

    def sub(self, a: int, b: int) -> int:
        return a ^ b if self.binary else (a - b) % self.order

    def neg(self, a: int) -> int:
        return a if self.binary else (-a) % self.order

    def mul(self, a: int, b: int) -> int:
        if not self.binary:
            return a * b % self.order
        if self._mtab is not None:
            return self._mrows[a][b]
        r, e, poly = 0, self.degree, self._poly
        top = 1 << e
        while b:
            if b & 1:
                r ^= a
            b >>= 1
            a <<= 1
            if a & top:
                a ^= poly
        return r

    def pow(self, a: int, n: int) -> int:
        if n < 0:
            return self.pow(self.inv(a), -n)
        r = 1
        while n:
            if n & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            n >>= 1
        return r

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("zero has no multiplicative inverse")
        if not self.binary:
            return pow(a, -1, self.order)
        return self.pow(a, self.order - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def arith(self, op: str, a: int, b: int = 0) -> int:
        return {"add": self.add, "sub": self.sub, "mul": self.mul,
                "neg": lambda x, _: self.neg(x)}[op](a, b)

    def from_int(self, n: int) -> int:
        """Image of the integer n under the ring map Z -> F."""
        if self.binary:
            return n & 1
        return n % self.order

    def sum(self, xs: Iterable[int]) -> int:
        acc = 0
        for x in xs:
            acc = self.add(acc, x)
        return acc

    # vectorised arithmetic on int64 arrays
    def asarray(self, a) -> np.ndarray:
        return np.asarray(a, dtype=np.int64)

    def vadd(self, a, b) -> np.ndarray:
        a, b = self.asarray(a), self.asarray(b)
        return a ^ b if self.binary else (a + b) % self.order

    def vsub(self, a, b) -> np.ndarray:
        a, b = self.asarray(a), self.asarray(b)
        return a ^ b if self.binary else (a - b) % self.order

    def vneg(self, a) -> np.ndarray:
        a = self.asarray(a)
        return a.copy() if self.binary else (-a) % self.order

    def vmul(self, a, b) -> np.ndarray:
        a, b = self.asarray(a), self.asarray(b)
        if not self.binary:
            return a * b % self.order
        if self._mtab is not None:
            return self._mtab[a, b]
        a, b = np.broadcast_arrays(a, b)
        a = a.copy()
        r = np.zeros(a.shape, dtype=np.int64)
        e, poly = self.degree, self._poly
        for i in range(e):
            r ^= a * ((b >> i) & 1)
            a <<= 1
            a ^= ((a >> e) & 1) * poly
        return r

    def vpow(self, a, n: int) -> np.ndarray:
        a = self.asarray(a)
        r = np.ones(a.shape, dtype=np.int64)
        base = a.copy()
        while n:
            if n & 1:
                r = self.vmul(r, base)
            base = self.vmul(base, base)
            n >>= 1
        return r

    def vinv(self, a) -> np.ndarray:
        a = self.asarray(a)
        if np.any(a == 0):
            raise DivisionByZero("zero has no multiplicative inverse")
        return self.vpow(a, self.order - 2)

    def vsum(self, a, axis=None) -> np.ndarray:
        a = self.asarray(a)
        if self.binary:
            if axis is None:
                return np.bitwise_xor.reduce(a.ravel())
            return np.bitwise_xor.reduce(a, axis=axis)
        return np.sum(a, axis=axis) % self.order

    def vdot(self, A, B) -> np.ndarray:
        """Matrix product over the field (2-d by 2-d, or 2-d by 1-d)."""
        A, B = self.asarray(A), self.asarray(B)
        vec = B.ndim == 1
        if vec:
            B = B[:, None]
        if not self.binary:
            if self.order < (1 << 16):
                out = (A @ B) % self.order
            else:
                out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
                for k in range(A.shape[1]):
                    out = (out + A[:, k:k + 1] * B[k:k + 1, :]) % self.order
        elif self._mtab is not None:
            out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
            step = max(1, (1 << 22) // max(1, A.shape[1] * B.shape[1]))
            for r in range(0, A.shape[0], step):
                prod = self._mtab[A[r:r + step, :, None], B[None, :, :]]
                out[r:r + step] = np.bitwise_xor.reduce(prod, axis=1)
        else:
            out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
            for k in range(A.shape[1]):
                out ^= self.vmul(A[:, k:k + 1], B[k:k + 1, :])
        return out[:, 0] if vec else out

    def vfrom_int(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=np.int64)
        return n & 1 if self.binary else n % self.order

    # sampling and enumeration
    def elements(self) -> np.ndarray:
        return np.arange(self.order, dtype=np.int64)

    def random(self, rng: np.random.Generator, size=None):
        out = rng.integers(0, self.order, size=size, dtype=np.int64)
        return int(out) if size is None else out

    def random_nonzero(self, rng: np.random.Generator, size=None):
        out = rng.integers(1, self.order, size=size, dtype=np.int64)
        return int(out) if size is None else out

    # subsets
    def subset(self, elems: Sequence[int], is_subfield: bool = False) -> SubsetH:
        vals = tuple(self.check(x) for x in elems)
        if len(set(vals)) != len(vals):
            raise FieldError("subset elements must be distinct")
        if not vals:
            raise FieldError("subset must be nonempty")
        if is_subfield:
            s = set(vals)
            if 0 not in s or 1 not in s or any(
                    self.add(a, b) not in s or self.mul(a, b) not in s for a in vals for b in vals):
                raise FieldError("subset is not closed under + and x")
        return SubsetH(vals, is_subfield)

    def _enumerate_subfield(self, f: int) -> SubsetH:
        k = 1 << f
        elems = self.elements()
        fixed = elems[self.vpow(elems, k) == elems]
        return SubsetH(tuple(int(x) for x in fixed), True)

    def subfield_elements(self) -> SubsetH:
        if self._subfield is None:
            raise NoSubfieldConfigured(f"{self} was created without a subfield degree")
        return self._subfield

    # serialisation
    @property
    def byte_width(self) -> int:
        return (self.order - 1).bit_length() + 7 >> 3

    def encode(self, a: int) -> bytes:
        return int(self.check(a)).to_bytes(self.byte_width, "little")

    def decode(self, data: bytes) -> int:
        return self.check(int.from_bytes(data, "little"))

    def to_json(self) -> dict:
        return self.spec.to_json()


def field_create(spec: FieldSpec) -> FieldCtx:
    return FieldCtx(spec)


def gf(p_or_spec, *, e: int | None = None, subfield_f: int | None = None) -> FieldCtx:
    """Shorthand: ``gf(17)`` or ``gf(2, e=4, subfield_f=2)``."""
    if isinstance(p_or_spec, FieldSpec):
        return FieldCtx(p_or_spec)
    if e is not None:
        if p_or_spec != 2:
            raise FieldError("extension fields are supported in characteristic 2 only")
        return FieldCtx(FieldSpec.binary(e, subfield_f=subfield_f))
    return FieldCtx(FieldSpec.prime(p_or_spec))
