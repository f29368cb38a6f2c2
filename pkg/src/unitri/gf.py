"""Finite fields GF(p^k) with elements encoded as integers 0..q-1.

An element's base-p digits are the coefficients of its polynomial
representative, constant term least significant.  So in GF(4) with modulus
t^2 + t + 1 the element ``t`` is 2 and ``t + 1`` is 3.
"""

from __future__ import annotations

import functools
import math

from .errors import DegreeOutOfRange, DivisionByZero, FieldMismatch, NonPrime, ParseError

MAX_DEGREE = 4
MAX_ORDER = 81


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % f for f in range(2, int(n**0.5) + 1))


# -- polynomials over Z_p as coefficient lists, constant term first --------


def _trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_mod(a, m, p):
    """Remainder of a modulo the monic polynomial m."""
    a = _trim(a)
    dm = len(m) - 1
    while len(a) - 1 >= dm:
        lead = a[-1]
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - lead * mi) % p
        a = _trim(a)
    return a


def _monic_polys(p, n):
    """All monic polynomials of degree n, by increasing integer encoding."""
    for low in range(p**n):
        yield [(low // p**i) % p for i in range(n)] + [1]


def is_irreducible(poly, p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..deg/2."""
    n = len(poly) - 1
    if n < 1:
        return False
    for deg in range(1, n // 2 + 1):
        for f in _monic_polys(p, deg):
            if not _poly_mod(poly, f, p):
                return False
    return True


class Field:
    """GF(p^k).  Construct through :func:`field_make` so instances are shared.

    Arithmetic works on integer encodings and is backed by addition and
    multiplication tables filled in once by schoolbook multiplication.
    """

    __slots__ = ("p", "k", "q", "modulus", "add_table", "mul_table", "neg_table",
                 "inv_table", "_frob", "_np")

    def __init__(self, p: int, k: int = 1, modulus=None):
        if not is_prime(p):
            raise NonPrime(f"{p} is not prime")
        if not 1 <= k <= MAX_DEGREE:
            raise DegreeOutOfRange(f"extension degree must be in 1..{MAX_DEGREE}, got {k}")
        if p**k > MAX_ORDER:
            raise DegreeOutOfRange(f"field order {p**k} exceeds {MAX_ORDER}")
        if k == 1:
            modulus = ()
        else:
            modulus = tuple(int(c) % p for c in modulus)
            if len(modulus) != k + 1 or modulus[-1] != 1:
                raise ValueError("modulus must be monic of degree k")
            if not is_irreducible(modulus, p):
                raise ValueError(f"modulus {modulus} is reducible over Z_{p}")
        self.p = p
        self.k = k
        self.q = p**k
        self.modulus = modulus
        q = self.q
        digits = [self._digits(a) for a in range(q)]
        self.add_table = tuple(
            tuple(self._undigits([(x + y) % p for x, y in zip(digits[a], digits[b])])
                  for b in range(q))
            for a in range(q))
        self.neg_table = tuple(self._undigits([(-x) % p for x in digits[a]]) for a in range(q))
        self.mul_table = tuple(
            tuple(self._schoolbook(digits[a], digits[b]) for b in range(q)) for a in range(q))
        inv = [0] * q
        for a in range(1, q):
            row = self.mul_table[a]
            inv[a] = next(b for b in range(1, q) if row[b] == 1)
        self.inv_table = tuple(inv)
        self._frob = {}
        self._np = None

    def _digits(self, a):
        p = self.p
        return [(a // p**i) % p for i in range(self.k)]

    def _undigits(self, c):
        p = self.p
        return sum(int(x) * p**i for i, x in enumerate(c))

    def _schoolbook(self, a, b):
        p = self.p
        prod = [0] * (2 * self.k - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] = (prod[i + j] + x * y) % p
        if self.k > 1:
            prod = _poly_mod(prod, self.modulus, p)
        return self._undigits(prod[: self.k])

    # -- identity -----------------------------------------------------------

    def _key(self):
        return (self.p, self.k, self.modulus)

    def __eq__(self, other):
        return isinstance(other, Field) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"GF({self.q})" if self.k == 1 else f"GF({self.p}^{self.k})"

    def header(self) -> str:
        """Textual encoding ``p=<p> k=<k> [poly=c0,...,ck]``."""
        s = f"p={self.p} k={self.k}"
        if self.k > 1:
            s += " poly=" + ",".join(str(c) for c in self.modulus)
        return s

    # -- integer-level arithmetic ---------------------------------------------

    def add(self, a: int, b: int) -> int:
        return self.add_table[a][b]

    def sub(self, a: int, b: int) -> int:
        return self.add_table[a][self.neg_table[b]]

    def neg(self, a: int) -> int:
        return self.neg_table[a]

    def mul(self, a: int, b: int) -> int:
        return self.mul_table[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("inverse of zero")
        return self.inv_table[a]

    def div(self, a: int, b: int) -> int:
        return self.mul_table[a][self.inv(b)]

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        r = 1
        while e:
            if e & 1:
                r = self.mul_table[r][a]
            a = self.mul_table[a][a]
            e >>= 1
        return r

    def scalar(self, n: int) -> int:
        """Image of the integer n in the prime subfield."""
        return n % self.p

    def digits(self, a: int) -> tuple:
        """Coordinates of a in the prime-field basis 1, t, t^2, ..."""
        return tuple(self._digits(a))

    def from_digits(self, c) -> int:
        return self._undigits([int(x) % self.p for x in c])

    def basis(self) -> tuple:
        """Encodings of the prime-field basis 1, t, ..., t^(k-1)."""
        return tuple(self.p**i for i in range(self.k))

    def frobenius_map(self, j: int) -> tuple:
        """The automorphism x -> x^(p^j) as a lookup tuple."""
        j %= self.k
        if j not in self._frob:
            e = self.p**j
            self._frob[j] = tuple(self.pow(a, e) for a in range(self.q))
        return self._frob[j]

    def elem(self, idx: int) -> "FieldElem":
        return FieldElem(self, idx)

    def elements(self):
        return [FieldElem(self, a) for a in range(self.q)]

    def tables(self):
        """numpy copies of the add/mul/neg tables, for batch kernels."""
        if self._np is None:
            import numpy as np

            dt = np.int16
            self._np = (np.array(self.add_table, dtype=dt), np.array(self.mul_table, dtype=dt),
                        np.array(self.neg_table, dtype=dt))
        return self._np

    def check(self, a) -> int:
        """Coerce a FieldElem or int to an encoding of this field."""
        if isinstance(a, FieldElem):
            if a.field != self:
                raise FieldMismatch(f"element of {a.field} used in {self}")
            return a.idx
        a = int(a)
        if not 0 <= a < self.q:
            raise ValueError(f"{a} is not an element encoding of {self}")
        return a


class FieldElem:
    """A field element carrying its field; supports the usual operators."""

    __slots__ = ("field", "idx")

    def __init__(self, field: Field, idx: int):
        self.field = field
        self.idx = field.check(idx)

    def _other(self, other):
        if isinstance(other, FieldElem):
            if other.field != self.field:
                raise FieldMismatch(f"{self.field} vs {other.field}")
            return other.idx
        if isinstance(other, int):
            return self.field.scalar(other)
        return NotImplemented

    def __add__(self, other):
        b = self._other(other)
        return NotImplemented if b is NotImplemented else FieldElem(self.field, self.field.add(self.idx, b))

    __radd__ = __add__

    def __sub__(self, other):
        b = self._other(other)
        return NotImplemented if b is NotImplemented else FieldElem(self.field, self.field.sub(self.idx, b))

    def __rsub__(self, other):
        b = self._other(other)
        return NotImplemented if b is NotImplemented else FieldElem(self.field, self.field.sub(b, self.idx))

    def __mul__(self, other):
        b = self._other(other)
        return NotImplemented if b is NotImplemented else FieldElem(self.field, self.field.mul(self.idx, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._other(other)
        return NotImplemented if b is NotImplemented else FieldElem(self.field, self.field.div(self.idx, b))

    def __neg__(self):
        return FieldElem(self.field, self.field.neg(self.idx))

    def __pow__(self, e: int):
        return FieldElem(self.field, self.field.pow(self.idx, e))

    def inverse(self):
        return FieldElem(self.field, self.field.inv(self.idx))

    def __eq__(self, other):
        if isinstance(other, FieldElem):
            return self.field == other.field and self.idx == other.idx
        if isinstance(other, int):
            return self.idx == other
        return NotImplemented

    def __hash__(self):
        return hash((self.field, self.idx))

    def __int__(self):
        return self.idx

    __index__ = __int__

    def __bool__(self):
        return self.idx != 0

    def __repr__(self):
        return f"{self.idx}@{self.field!r}"


@functools.lru_cache(maxsize=None)
def field_make(p: int, k: int = 1) -> Field:
    """GF(p^k) with the least monic irreducible modulus of degree k.

    Candidates are ordered by the integer c0 + c1*p + ... + c_{k-1}*p^(k-1),
    i.e. the coefficient list compared from the highest degree down.
    """
    if not is_prime(p):
        raise NonPrime(f"{p} is not prime")
    if not 1 <= k <= MAX_DEGREE:
        raise DegreeOutOfRange(f"extension degree must be in 1..{MAX_DEGREE}, got {k}")
    if p**k > MAX_ORDER:
        raise DegreeOutOfRange(f"field order {p**k} exceeds {MAX_ORDER}")
    if k == 1:
        return Field(p, 1)
    for poly in _monic_polys(p, k):
        if is_irreducible(poly, p):
            return Field(p, k, poly)
    raise AssertionError(f"no irreducible polynomial of degree {k} over Z_{p}")


def field_from_order(q: int) -> Field:
    for p in range(2, q + 1):
        if q % p == 0:
            break
    k = round(math.log(q, p))
    if p**k != q:
        raise NonPrime(f"{q} is not a prime power")
    return field_make(p, k)


def _bin(op):
    def f(a: FieldElem, b: FieldElem) -> FieldElem:
        if a.field != b.field:
            raise FieldMismatch(f"{a.field} vs {b.field}")
        return FieldElem(a.field, op(a.field, a.idx, b.idx))
    return f


f_add = _bin(Field.add)
f_sub = _bin(Field.sub)
f_mul = _bin(Field.mul)


def f_neg(a: FieldElem) -> FieldElem:
    return -a


def f_inv(a: FieldElem) -> FieldElem:
    return a.inverse()


def frobenius(a: FieldElem, j: int) -> FieldElem:
    """a^(p^j) for 0 <= j < k."""
    if not 0 <= j < a.field.k:
        raise ValueError(f"Frobenius exponent {j} outside 0..{a.field.k - 1}")
    return FieldElem(a.field, a.field.frobenius_map(j)[a.idx])


def automorphisms(f: Field) -> list:
    """All k field automorphisms, as lookup tuples (index j -> x^(p^j))."""
    return [f.frobenius_map(j) for j in range(f.k)]


def parse_field(text: str) -> Field:
    """Inverse of :meth:`Field.header`."""
    kv = {}
    for tok in text.split():
        if "=" not in tok:
            raise ParseError(f"bad field token {tok!r}")
        key, val = tok.split("=", 1)
        kv[key] = val
    try:
        p, k = int(kv["p"]), int(kv.get("k", 1))
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad field header {text!r}") from exc
    if "poly" in kv:
        poly = tuple(int(c) for c in kv["poly"].split(","))
        f = Field(p, k, poly)
        return field_make(p, k) if f == field_make(p, k) else f
    if k > 1:
        raise ParseError("extension field header needs poly=")
    return field_make(p, k)
