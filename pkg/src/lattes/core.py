"""The Lattès family and the exact orbit of a marked point in parameter space."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Sequence

from sympy import factorint

from .forms import (
    BinaryForm,
    _strip,
    _zpoly_divexact,
    _zpoly_gcd,
    as_fraction,
    coprime_dehomogenized,
    form_divexact,
    form_gcd,
    form_resultant,
    fraction_str,
)

LEVEL_CAP = 6


class InvariantViolation(AssertionError):
    """An identity guaranteed by the theory failed: this is a bug, not bad input."""

    def __init__(self, what: str):
        super().__init__(f"invariant violated: {what}")


class DegenerateParameter(ValueError):
    def __init__(self, t):
        super().__init__(f"degenerate parameter t={t}")


# -- the family on P^1 --------------------------------------------------------

INF = "inf"


def lattes_eval(t, z):
    """f_t(z) = (z^2 - t)^2 / (4 z (z - 1)(z - t)), with 0, 1, t, inf all sent to inf.

    Exact for Fractions/ints, otherwise complex.  ``INF`` stands for infinity.
    """
    if t == 0 or t == 1:
        raise DegenerateParameter(t)
    if isinstance(z, str):
        if z != INF:
            raise ValueError(f"unknown point {z!r}")
        return INF
    den = 4 * z * (z - 1) * (z - t)
    if den == 0:
        return INF
    num = (z * z - t) ** 2
    if isinstance(num, int) and isinstance(den, int):
        return Fraction(num, den)
    return num / den


def lattes_pair(t1, t2, z, w):
    """The homogeneous map F_{t1,t2}(z, w) on any ring of scalars."""
    a = t1 * w * w - t2 * z * z
    return a * a, 4 * t2 * z * w * (w - z) * (t1 * w - t2 * z)


# -- marked points ------------------------------------------------------------

def _poly_str(cs: Sequence[int]) -> str:
    """Render a low-to-high integer coefficient list in the variable t."""
    terms = []
    for k in range(len(cs) - 1, -1, -1):
        c = cs[k]
        if c == 0:
            continue
        mono = "" if k == 0 else "t" if k == 1 else f"t^{k}"
        if mono:
            coef = "" if c == 1 else "-" if c == -1 else f"{c}*"
        else:
            coef = str(c)
        terms.append(coef + mono)
    if not terms:
        return "0"
    return " + ".join(terms).replace("+ -", "- ")


@dataclass(frozen=True)
class MarkedPoint:
    """c(t) = num(t) / den(t) with integer coefficient lists, lowest degree first.

    Normalized: num and den coprime, joint content 1, den has positive leading
    coefficient.  Construction rejects the persistently preperiodic points.
    """

    num: tuple[int, ...]
    den: tuple[int, ...]

    @classmethod
    def from_rational_lists(cls, num: Sequence, den: Sequence = (1,)) -> "MarkedPoint":
        nf = [as_fraction(c) for c in num] or [Fraction(0)]
        df = [as_fraction(c) for c in den] or [Fraction(0)]
        if not any(df):
            raise InadmissiblePoint("infinity")
        scale = 1
        for c in nf + df:
            scale = scale * c.denominator // gcd(scale, c.denominator)
        ni = [int(c * scale) for c in nf]
        di = [int(c * scale) for c in df]
        if not any(ni):
            raise InadmissiblePoint("0")
        # coprime reduction over Q, done on high-to-low lists
        nh, dh = _strip(ni[::-1]), _strip(di[::-1])
        g = _zpoly_gcd(nh, dh)
        if len(g) > 1:
            nh = _to_ints(_zpoly_divexact(nh, g))
            dh = _to_ints(_zpoly_divexact(dh, g))
        sign = 1 if dh[0] > 0 else -1
        content = _content(nh + dh)
        nh = [sign * c // content for c in nh]
        dh = [sign * c // content for c in dh]
        obj = cls(tuple(nh[::-1]), tuple(dh[::-1]))
        obj._check()
        return obj

    @classmethod
    def constant(cls, a) -> "MarkedPoint":
        return cls.from_rational_lists([as_fraction(a)])

    def _check(self) -> None:
        if not any(self.num):
            raise InadmissiblePoint("0")
        if self.num == self.den:
            raise InadmissiblePoint("1")
        if (0,) + self.den == self.num:
            raise InadmissiblePoint("t")

    @property
    def degree(self) -> int:
        return max(len(self.num), len(self.den)) - 1

    @property
    def is_constant(self) -> bool:
        return self.degree == 0

    def value(self, t):
        """c(t) for exact or complex t (INF at poles)."""
        n = sum(c * t ** k for k, c in enumerate(self.num))
        d = sum(c * t ** k for k, c in enumerate(self.den))
        if d == 0:
            return INF
        if isinstance(n, int) and isinstance(d, int):
            return Fraction(n, d)
        return n / d

    def __str__(self) -> str:
        n, d = _poly_str(self.num), _poly_str(self.den)
        if d == "1":
            return n
        wrap = lambda s, cs: s if sum(1 for c in cs if c) == 1 and not s.startswith("-") and "*" not in s else f"({s})"
        return f"{wrap(n, self.num)}/{wrap(d, self.den)}"


def _content(cs: Sequence[int]) -> int:
    g = 0
    for c in cs:
        g = gcd(g, c)
    return g or 1


def _to_ints(fs: Sequence[Fraction]) -> list[int]:
    den = 1
    for c in fs:
        den = den * c.denominator // gcd(den, c.denominator)
    return [int(c * den) for c in fs]


class InadmissiblePoint(ValueError):
    _why = {
        "0": "marked point equals 0 (persistently preperiodic)",
        "1": "marked point equals 1 (persistently preperiodic)",
        "t": "marked point equals t (persistently preperiodic)",
        "infinity": "marked point equals infinity (persistently preperiodic)",
    }

    def __init__(self, which: str):
        self.which = which
        super().__init__(self._why[which])


@dataclass(frozen=True)
class HomLift:
    c1: BinaryForm
    c2: BinaryForm

    @property
    def degree(self) -> int:
        return self.c1.degree


def lift(c: MarkedPoint) -> HomLift:
    """Homogenize numerator and denominator to the common degree of c."""
    c._check()
    D = c.degree

    def hom(cs):
        padded = list(cs) + [0] * (D + 1 - len(cs))
        return BinaryForm.from_ints(padded[::-1])

    return HomLift(hom(c.num), hom(c.den))


# -- orbit states -------------------------------------------------------------

@dataclass(frozen=True)
class Scalars:
    """P1(1,0), P1(0,1), P1(1,1), Q1(1,1) with Q1 the full second coordinate."""

    p10: Fraction
    p01: Fraction
    p11: Fraction
    q11: Fraction

    @property
    def diff11(self) -> Fraction:
        """P1(1,1) - Q1(1,1)."""
        return self.p11 - self.q11


@dataclass(frozen=True)
class OrbitState:
    """F_n = (P_n, Q_n) with Q_n the full (t2-divisible) second coordinate."""

    n: int
    P: BinaryForm
    Q: BinaryForm
    d: int
    scalars: Scalars
    lift: HomLift | None = field(default=None, compare=False)

    @property
    def degree(self) -> int:
        return self.P.degree

    @cached_property
    def Qr(self) -> BinaryForm:
        """Reduced second coordinate Q_n / t2."""
        return self.Q.div_t2()

    @cached_property
    def halves(self) -> tuple[BinaryForm, BinaryForm, BinaryForm]:
        """(R0, R1, Rt) whose squares are P, P - Q and t2 P - t1 Q one level up."""
        P, Qr = self.P, self.Qr
        P2 = P * P
        Q2t = (Qr * Qr).mul_t1().mul_t2()
        PQ = (P * Qr).mul_t2()
        R0 = P2 - Q2t
        R1 = P2 - PQ * 2 + Q2t
        Rt = P2 - PQ.div_t2().mul_t1() * 2 + Q2t
        return R0, R1, Rt

    def to_json(self) -> dict:
        s = self.scalars
        return {
            "level": self.n,
            "degree": self.degree,
            "d": self.d,
            "P": self.P.to_json(),
            "Q": self.Q.to_json(),
            "scalars": {
                "P1(1,0)": fraction_str(s.p10),
                "P1(0,1)": fraction_str(s.p01),
                "P1(1,1)": fraction_str(s.p11),
                "Q1(1,1)": fraction_str(s.q11),
            },
        }


def _apply_F(P: BinaryForm, Q: BinaryForm) -> tuple[BinaryForm, BinaryForm]:
    """F_{t1,t2}(P, Q) as forms of degree 4 deg + 2."""
    t1P2 = (Q * Q).mul_t1()
    a = t1P2 - (P * P).mul_t2()
    first = a * a
    second = P * Q * (Q - P) * (Q.mul_t1() - P.mul_t2())
    return first, second.mul_t2() * 4


def first_iterate(C: HomLift) -> OrbitState:
    """F_1 = F(C) / gcd(F(C)) with the nondegeneracy flags checked."""
    A, B = _apply_F(C.c1, C.c2)
    g = form_gcd(A, B)
    P, Q = form_divexact(A, g), form_divexact(B, g)
    d = P.degree
    s = Scalars(P(1, 0), P(0, 1), P(1, 1), Q(1, 1))
    if d < 2:
        raise InvariantViolation("deg F1 >= 2")
    if s.p10 == 0 or s.p01 == 0:
        raise InvariantViolation("P1(1,0), P1(0,1) nonzero")
    if s.diff11 == 0:
        raise InvariantViolation("P1(1,1) != Q1(1,1)")
    if Q(1, 0) != 0:
        raise InvariantViolation("Q1(1,0) = 0")
    return OrbitState(1, P, Q, d, s, C)


def iterate(s: OrbitState, cap: int = LEVEL_CAP) -> OrbitState:
    """F_{n+1} = F(F_n) / t2^2, checked to be a coprime pair of degree 4 deg F_n."""
    if s.n + 1 > cap:
        raise LevelCapExceeded(s.n + 1, cap)
    A, B = _apply_F(s.P, s.Q)
    try:
        P, Q = A.div_t2(2), B.div_t2(2)
    except ArithmeticError:
        raise InvariantViolation("t2^2 divides F(F_n)") from None
    if P.degree != 4 * s.degree:
        raise InvariantViolation("deg F_{n+1} = 4 deg F_n")
    if P(1, 0) == 0 or not coprime_dehomogenized(P, Q):
        raise InvariantViolation("gcd(F_{n+1}) constant")
    return OrbitState(s.n + 1, P, Q, s.d, s.scalars, s.lift)


class LevelCapExceeded(ValueError):
    def __init__(self, level: int, cap: int):
        super().__init__(f"level {level} exceeds the exact-iteration cap {cap}")


def orbit(C: HomLift, n: int, cap: int = LEVEL_CAP) -> list[OrbitState]:
    """[F_1, ..., F_n]."""
    if n < 1:
        raise ValueError("level must be >= 1")
    if n > cap:
        raise LevelCapExceeded(n, cap)
    states = [first_iterate(C)]
    while len(states) < n:
        states.append(iterate(states[-1], cap))
    return states


# -- closed forms -------------------------------------------------------------

def A_exponent(n: int) -> int:
    return (16 ** (n - 1) - 4 ** (n - 1)) // 3


def closed_resultant(s1: OrbitState, n: int, res1: Fraction | None = None) -> Fraction:
    """Res(F_n) from F_1 data alone (up to the sign convention)."""
    if n < 1:
        raise ValueError("level must be >= 1")
    sc = s1.scalars
    if res1 is None:
        res1 = form_resultant(s1.P, s1.Q)
    A = A_exponent(n)
    base = sc.diff11 * sc.p01 / (sc.p10 * sc.p10)
    return Fraction(4) ** (A * s1.d) * base ** A * res1 ** (16 ** (n - 1))


# -- places -------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Place:
    """p = 0 marks the archimedean place; otherwise a prime."""

    p: int
    weight: int = 1

    @property
    def archimedean(self) -> bool:
        return self.p == 0

    def __str__(self) -> str:
        return "inf" if self.p == 0 else str(self.p)

    @classmethod
    def parse(cls, s: str) -> "Place":
        return ARCH if s in ("inf", "arch", "0") else cls(int(s))


ARCH = Place(0)


def primes_of(x: Fraction | int) -> set[int]:
    x = Fraction(x)
    if x == 0:
        raise ValueError("zero has no prime support")
    out = set()
    for part in (abs(x.numerator), x.denominator):
        if part > 1:
            out |= set(factorint(part))
    return out


def valuation(x: Fraction | int, p: int) -> int:
    """v_p(x) for nonzero rational x."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of zero")
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def bad_places(s1: OrbitState, res1: Fraction | None = None) -> list[Place]:
    """Primes where the good-reduction description of G_{C,p} may fail."""
    sc = s1.scalars
    if res1 is None:
        res1 = form_resultant(s1.P, s1.Q)
    primes = {2}
    for x in (res1, sc.p01, sc.p10, sc.diff11):
        primes |= primes_of(x)
    for form in (s1.P, s1.Q):
        if form.denominator > 1:
            primes |= primes_of(form.denominator)
    return [Place(p) for p in sorted(primes)]
