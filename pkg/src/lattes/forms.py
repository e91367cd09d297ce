"""Exact binary forms over Q.

A form of degree d is stored as integer numerators over one positive common
denominator; ``coeffs[i]`` multiplies ``t1**(d - i) * t2**i``.  Large products
go through Kronecker substitution on GMP integers, resultants through
fraction-free (Bareiss) elimination of the Sylvester matrix.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

import gmpy2
import numpy as np

_KRONECKER_CUTOFF = 24


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, type(gmpy2.mpz(0))):
        return Fraction(int(x))
    raise TypeError(f"not an exact rational: {x!r}")


def fraction_str(x: Fraction | int) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# -- integer polynomial multiplication ---------------------------------------

def _school_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _pack(cs: Sequence[int], nbytes: int) -> gmpy2.mpz:
    raw = b"".join(c.to_bytes(nbytes, "little") for c in cs)
    return gmpy2.mpz(int.from_bytes(raw, "little"))


def _unpack(x, nbytes: int, n: int) -> list[int]:
    raw = int(x).to_bytes(nbytes * n, "little")
    return [int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") for i in range(n)]


def mul_int_lists(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Product of two integer coefficient lists (index = exponent offset)."""
    if not a or not b:
        return []
    if min(len(a), len(b)) < _KRONECKER_CUTOFF:
        return _school_mul(a, b)
    bits = max(abs(c) for c in a).bit_length() + max(abs(c) for c in b).bit_length()
    bits += min(len(a), len(b)).bit_length() + 2
    nbytes = bits // 8 + 1
    ap = _pack([c if c > 0 else 0 for c in a], nbytes)
    an = _pack([-c if c < 0 else 0 for c in a], nbytes)
    if a is b:
        bp, bn = ap, an
    else:
        bp = _pack([c if c > 0 else 0 for c in b], nbytes)
        bn = _pack([-c if c < 0 else 0 for c in b], nbytes)
    n = len(a) + len(b) - 1
    pos = _unpack(ap * bp + an * bn, nbytes, n)
    neg = _unpack(ap * bn + an * bp, nbytes, n)
    return [x - y for x, y in zip(pos, neg)]


def _int_content(cs: Iterable[int]) -> int:
    g = 0
    for c in cs:
        g = gcd(g, c)
        if g == 1:
            break
    return g


# -- binary forms -------------------------------------------------------------

class BinaryForm:
    """Homogeneous polynomial in (t1, t2) with rational coefficients.

    Immutable.  The zero form keeps its degree and is flagged via ``is_zero``.
    """

    __slots__ = ("_num", "_den", "_zero")

    def __init__(self, coeffs: Iterable):
        fr = [as_fraction(c) for c in coeffs]
        if not fr:
            raise ValueError("a form needs at least one coefficient")
        den = 1
        for c in fr:
            den = lcm(den, c.denominator)
        self._set([c.numerator * (den // c.denominator) for c in fr], den)

    def _set(self, nums: list[int], den: int) -> None:
        g = gcd(_int_content(nums), den)
        if g > 1:
            nums = [c // g for c in nums]
            den //= g
        self._zero = not any(nums)
        if self._zero:
            den = 1
        self._num = tuple(nums)
        self._den = den

    @classmethod
    def from_ints(cls, nums: Sequence[int], den: int = 1) -> "BinaryForm":
        if den <= 0:
            raise ValueError("denominator must be positive")
        obj = cls.__new__(cls)
        obj._set(list(nums), den)
        return obj

    @classmethod
    def zero(cls, degree: int) -> "BinaryForm":
        return cls.from_ints([0] * (degree + 1))

    @classmethod
    def t1(cls) -> "BinaryForm":
        return cls.from_ints([1, 0])

    @classmethod
    def t2(cls) -> "BinaryForm":
        return cls.from_ints([0, 1])

    @classmethod
    def constant(cls, c) -> "BinaryForm":
        return cls([c])

    # -- accessors
    @property
    def degree(self) -> int:
        return len(self._num) - 1

    @property
    def is_zero(self) -> bool:
        return self._zero

    @property
    def numerators(self) -> tuple[int, ...]:
        return self._num

    @property
    def denominator(self) -> int:
        return self._den

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(c, self._den) for c in self._num)

    @property
    def is_integral(self) -> bool:
        return self._den == 1

    def t2_order(self) -> int:
        """Largest k with t2**k dividing the form."""
        if self._zero:
            raise ValueError("zero form has no t2-order")
        k = 0
        while self._num[k] == 0:
            k += 1
        return k

    def t1_order(self) -> int:
        if self._zero:
            raise ValueError("zero form has no t1-order")
        k = 0
        while self._num[-1 - k] == 0:
            k += 1
        return k

    # -- arithmetic
    def _check_deg(self, other: "BinaryForm") -> None:
        if self.degree != other.degree:
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other: "BinaryForm") -> "BinaryForm":
        self._check_deg(other)
        den = lcm(self._den, other._den)
        fa, fb = den // self._den, den // other._den
        return BinaryForm.from_ints([x * fa + y * fb for x, y in zip(self._num, other._num)], den)

    def __neg__(self) -> "BinaryForm":
        return BinaryForm.from_ints([-c for c in self._num], self._den)

    def __sub__(self, other: "BinaryForm") -> "BinaryForm":
        return self + (-other)

    def __mul__(self, other) -> "BinaryForm":
        if isinstance(other, BinaryForm):
            return BinaryForm.from_ints(mul_int_lists(self._num, other._num), self._den * other._den)
        c = as_fraction(other)
        return BinaryForm.from_ints([x * c.numerator for x in self._num], self._den * c.denominator)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "BinaryForm":
        if k < 0:
            raise ValueError("negative power")
        result = BinaryForm.from_ints([1])
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def mul_t1(self, k: int = 1) -> "BinaryForm":
        return BinaryForm.from_ints(list(self._num) + [0] * k, self._den)

    def mul_t2(self, k: int = 1) -> "BinaryForm":
        return BinaryForm.from_ints([0] * k + list(self._num), self._den)

    def div_t2(self, k: int = 1) -> "BinaryForm":
        if k > self.degree + 1 or any(self._num[:k]):
            raise ArithmeticError(f"form is not divisible by t2^{k}")
        return BinaryForm.from_ints(list(self._num[k:]), self._den)

    def div_t1(self, k: int = 1) -> "BinaryForm":
        if k == 0:
            return self
        if k > self.degree + 1 or any(self._num[-k:]):
            raise ArithmeticError(f"form is not divisible by t1^{k}")
        return BinaryForm.from_ints(list(self._num[:-k]), self._den)

    # -- evaluation
    def __call__(self, t1, t2):
        return form_eval(self, t1, t2)

    def content(self) -> Fraction:
        """Positive rational c with self / c primitive integral."""
        if self._zero:
            raise ValueError("zero form has no content")
        return Fraction(_int_content(self._num), self._den)

    def primitive(self) -> "BinaryForm":
        """Primitive integral multiple with positive leading nonzero coefficient."""
        g = _int_content(self._num)
        nums = [c // g for c in self._num]
        lead = next(c for c in nums if c)
        if lead < 0:
            nums = [-c for c in nums]
        return BinaryForm.from_ints(nums)

    def dehomogenize(self) -> list[Fraction]:
        """Coefficients of f(t, 1), lowest power first."""
        return [Fraction(c, self._den) for c in reversed(self._num)]

    def to_json(self) -> list[str]:
        return [fraction_str(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence[str]) -> "BinaryForm":
        return cls([Fraction(s) for s in data])

    def __eq__(self, other) -> bool:
        return isinstance(other, BinaryForm) and self._num == other._num and self._den == other._den

    def __hash__(self) -> int:
        return hash((self._num, self._den))

    def __repr__(self) -> str:
        if self._zero:
            return f"BinaryForm(0, degree={self.degree})"
        d = self.degree
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "*".join(
                s for s in (_power("t1", d - i), _power("t2", i)) if s
            )
            cs = fraction_str(c)
            if mono:
                cs = "" if c == 1 else "-" if c == -1 else cs + "*"
            terms.append(cs + mono)
        return "BinaryForm(" + " + ".join(terms).replace("+ -", "- ") + ")"


def _power(var: str, k: int) -> str:
    return "" if k == 0 else var if k == 1 else f"{var}^{k}"


def form_eval(f: BinaryForm, t1, t2):
    """Sum of coeffs[i] * t1**(d-i) * t2**i in the scalar domain of the inputs.

    Exact when t1, t2 are ints or Fractions; works elementwise on numpy arrays.
    """
    exact = isinstance(t1, (int, Fraction)) and isinstance(t2, (int, Fraction))
    if exact:
        nums = f.numerators
        acc = nums[0]
        p2 = 1
        for c in nums[1:]:
            p2 *= t2
            acc = acc * t1 + c * p2
        return Fraction(acc) / f.denominator
    coeffs = [c / f.denominator for c in f.numerators] if f.degree < 64 else [
        float(Fraction(c, f.denominator)) for c in f.numerators
    ]
    acc = coeffs[0] * (t1 * 0 + 1)
    p2 = 1
    for c in coeffs[1:]:
        p2 = p2 * t2
        acc = acc * t1 + c * p2
    return acc


# -- univariate integer helpers (high-to-low lists) ---------------------------

def _strip(a: list[int]) -> list[int]:
    i = 0
    while i < len(a) - 1 and a[i] == 0:
        i += 1
    return a[i:]


def _primitive_list(a: list[int]) -> list[int]:
    g = _int_content(a)
    if g == 0:
        return a
    out = [c // g for c in a]
    if out[0] < 0:
        out = [-c for c in out]
    return out


def _prem(a: list[int], b: list[int]) -> list[int]:
    """Pseudo-remainder of a by b (both high-to-low, b nonzero leading)."""
    a = list(a)
    lb = b[0]
    db = len(b) - 1
    while len(a) - 1 >= db and any(a):
        if a[0] == 0:
            a = a[1:]
            continue
        la = a[0]
        a = [c * lb for c in a]
        for j in range(len(b)):
            a[j] -= la * b[j]
        a = a[1:]
    return _strip(a) if a else [0]


def _zpoly_gcd(a: list[int], b: list[int]) -> list[int]:
    a, b = _primitive_list(_strip(a)), _primitive_list(_strip(b))
    if len(a) < len(b):
        a, b = b, a
    while any(b):
        r = _prem(a, b)
        a, b = b, _primitive_list(r)
        if not any(b):
            break
        if len(b) == 1:
            return [1]
    return _primitive_list(a)


def _zpoly_divexact(a: list[int], b: list[int]) -> list[int]:
    """Exact quotient a / b over Q for high-to-low lists, as Fractions."""
    a = [Fraction(c) for c in a]
    q = []
    lb = b[0]
    while len(a) >= len(b):
        c = a[0] / lb
        q.append(c)
        for j in range(len(b)):
            a[j] -= c * b[j]
        a = a[1:]
    if any(a):
        raise ArithmeticError("inexact division")
    return q


def form_divexact(p: BinaryForm, g: BinaryForm) -> BinaryForm:
    """p / g, raising ArithmeticError when g does not divide p."""
    if g.is_zero:
        raise ZeroDivisionError("division by the zero form")
    if p.is_zero:
        return BinaryForm.zero(p.degree - g.degree)
    k = g.t2_order()
    p2, g2 = p.div_t2(k), g.div_t2(k)
    q = _zpoly_divexact(list(p2.numerators), list(g2.numerators))
    return BinaryForm(q) * Fraction(g2.denominator, p2.denominator)


def form_gcd(p: BinaryForm, q: BinaryForm) -> BinaryForm:
    """Gcd of two forms: primitive, positive leading nonzero coefficient."""
    if p.is_zero and q.is_zero:
        raise ValueError("zero pair")
    if p.is_zero:
        return q.primitive()
    if q.is_zero:
        return p.primitive()
    k = min(p.t2_order(), q.t2_order())
    # after removing the common t2 power one input has no root at (1:0), so the
    # univariate gcd of the t2 = 1 restrictions homogenizes to the rest
    g = _zpoly_gcd(_strip(list(p.div_t2(k).numerators)), _strip(list(q.div_t2(k).numerators)))
    return BinaryForm.from_ints(g).mul_t2(k).primitive()


# -- modular coprimality (fast path for large iterates) ----------------------

_CHECK_PRIMES = (2147483629, 2147483587, 2147483579, 2147483563)


def _gcd_degree_mod(a: np.ndarray, b: np.ndarray, p: int) -> int:
    def strip(x):
        nz = np.flatnonzero(x)
        return x[nz[0]:] if nz.size else x[:0]

    a, b = strip(a % p), strip(b % p)
    if a.size < b.size:
        a, b = b, a
    while b.size:
        inv = pow(int(b[0]), p - 2, p)
        a = a.copy()
        nb = b.size
        while a.size >= nb:
            c = int(a[0]) * inv % p
            if c:
                a[:nb] = (a[:nb] - c * b) % p
            a = strip(a[1:])
        a, b = b, a
    return a.size - 1


def coprime_dehomogenized(p: BinaryForm, q: BinaryForm) -> bool:
    """True when p(t,1), q(t,1) are certified coprime by a reduction mod a prime.

    A prime that keeps both leading coefficients and finds a constant gcd
    certifies coprimality over Q.  Falls back to the exact gcd if every prime
    is unlucky.
    """
    pa = _strip(list(p.numerators))
    qa = _strip(list(q.numerators))
    for prime in _CHECK_PRIMES:
        if pa[0] % prime == 0 or qa[0] % prime == 0:
            continue
        av = np.array([c % prime for c in pa], dtype=np.int64)
        bv = np.array([c % prime for c in qa], dtype=np.int64)
        if _gcd_degree_mod(av, bv, prime) == 0:
            return True
    return len(_zpoly_gcd(pa, qa)) == 1


# -- resultants ---------------------------------------------------------------

def sylvester_matrix(p: BinaryForm, q: BinaryForm) -> list[list[int]]:
    """(2d)x(2d) Sylvester matrix of the integer numerators of p and q."""
    d = p.degree
    n = 2 * d
    rows = []
    for src in (p.numerators, q.numerators):
        for shift in range(d):
            row = [0] * n
            row[shift:shift + d + 1] = src
            rows.append(row)
    return rows


def bareiss_det(rows: Sequence[Sequence[int]]) -> int:
    """Determinant of an integer matrix by fraction-free elimination."""
    n = len(rows)
    if n == 0:
        return 1
    m = np.empty((n, n), dtype=object)
    for i, row in enumerate(rows):
        for j, c in enumerate(row):
            m[i, j] = gmpy2.mpz(c)
    sign = 1
    prev = gmpy2.mpz(1)
    for k in range(n - 1):
        if m[k, k] == 0:
            nz = [i for i in range(k + 1, n) if m[i, k] != 0]
            if not nz:
                return 0
            i = nz[0]
            m[[k, i]] = m[[i, k]]
            sign = -sign
        piv = m[k, k]
        col = m[k + 1:, k]
        row = m[k, k + 1:]
        m[k + 1:, k + 1:] = (m[k + 1:, k + 1:] * piv - np.outer(col, row)) // prev
        prev = piv
    return sign * int(m[n - 1, n - 1])


def form_resultant(p: BinaryForm, q: BinaryForm) -> Fraction:
    """Sylvester resultant of two forms of equal degree d >= 1 (exact)."""
    if p.degree != q.degree:
        raise ValueError(f"degree mismatch: {p.degree} vs {q.degree}")
    d = p.degree
    if d < 1:
        raise ValueError("resultant needs degree >= 1")
    det = bareiss_det(sylvester_matrix(p, q))
    return Fraction(det, (p.denominator * q.denominator) ** d)


def content_strip(v: Sequence) -> tuple[tuple[int, ...], Fraction]:
    """Split a nonzero rational vector as lam * X with X coprime integral, lam > 0."""
    if all(isinstance(x, int) for x in v):
        if not any(v):
            raise ValueError("zero vector")
        # gmpy2's subquadratic gcd matters for the multi-megabit orbit points
        g = 0
        for x in v:
            g = gmpy2.gcd(g, x)
        g = int(g)
        return tuple(int(gmpy2.mpz(x) // g) for x in v), Fraction(g)
    fr = [as_fraction(x) for x in v]
    if not any(fr):
        raise ValueError("zero vector")
    den = 1
    for c in fr:
        den = lcm(den, c.denominator)
    nums = [c.numerator * (den // c.denominator) for c in fr]
    g = _int_content(nums)
    return tuple(c // g for c in nums), Fraction(g, den)
