"""Néron–Tate heights of rational parameters as sums of local escape rates."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Sequence

from .core import ARCH, INF, DegenerateParameter, HomLift, Place, bad_places, lattes_pair, primes_of
from .escape import (
    ExactLog,
    LedgerValue,
    _first,
    capacity_closed,
    escape_at,
    first_resultant,
    green_function,
)
from .forms import content_strip, fraction_str

HEIGHT_TOL = 1e-12
MAX_STEPS = 64
MAX_BITS = 1 << 16


@dataclass(frozen=True)
class HeightResult:
    """value = (d/8) sum_v G_v; certificate is exact-zero, positive or tolerance."""

    t: Fraction
    value: float
    decomposition: tuple[tuple[Place, LedgerValue], ...]
    certificate: str
    error: float
    exact: ExactLog | None = None
    lower_bound: float | None = None

    def to_json(self) -> dict:
        out = {
            "t": fraction_str(self.t),
            "value": f"{self.value:.15g}",
            "decomposition": [
                {"place": str(p), "contribution": f"{v.value:.15g}", **({"exact": v.exact.to_json()} if v.exact is not None else {})}
                for p, v in self.decomposition
            ],
            "certificate": self.certificate,
            "error": f"{self.error:.3e}",
        }
        if self.lower_bound is not None:
            out["lower_bound"] = f"{self.lower_bound:.15g}"
        return out


def _check_t(t) -> Fraction:
    t = Fraction(t)
    if t in (0, 1):
        raise DegenerateParameter(t)
    return t


def local_terms(C: HomLift, t) -> list[tuple[Place, LedgerValue]]:
    """G_{C,v}(p, q) at the archimedean place and every bad prime."""
    t = _check_t(t)
    p, q = t.numerator, t.denominator
    places = [ARCH] + bad_places(_first(C), first_resultant(C))
    return [(v, escape_at(C, p, q, v, tol=HEIGHT_TOL)) for v in places]


def neron_tate(C: HomLift, t) -> HeightResult:
    t = _check_t(t)
    d = _first(C).d
    terms = local_terms(C, t)
    factor = Fraction(d, 8)
    value = float(factor) * math.fsum(v.value for _, v in terms)
    error = float(factor) * sum(v.certificate.bound for _, v in terms)
    if all(v.exact is not None for _, v in terms):
        total = ExactLog()
        for _, v in terms:
            total = total + v.exact
        total = total.scale(factor)
        value = float(total)
        cert = "exact-zero" if total.is_zero else "positive"
        return HeightResult(t, value, tuple(terms), cert, 0.0, total, value if not total.is_zero else None)
    if value - error > 0:
        return HeightResult(t, value, tuple(terms), "positive", error, lower_bound=value - error)
    return HeightResult(t, value, tuple(terms), "tolerance", error)


def _start(C: HomLift, t: Fraction) -> tuple[int, int]:
    """c(t) as a coprime integer pair, (1, 0) at a pole."""
    p, q = t.numerator, t.denominator
    x = (C.c1(p, q), C.c2(p, q))
    if x == (0, 0):
        raise ValueError("lift vanishes at t")
    X, _ = content_strip(x)
    return X


def _point_height(X: tuple[int, int]) -> float:
    return math.log(max(abs(X[0]), abs(X[1])))


def weil_orbit(C: HomLift, t, n: int) -> list[tuple[int, int]]:
    """[c(t), f_t(c(t)), ..., f_t^n(c(t))] as coprime integer pairs."""
    t = _check_t(t)
    p, q = t.numerator, t.denominator
    X = _start(C, t)
    out = [X]
    for _ in range(n):
        X, _ = content_strip(lattes_pair(p, q, *X))
        out.append(X)
    return out


def weil_limit(C: HomLift, t, n: int = 7) -> float:
    """h(f_t^n(c(t))) / (2 4^n)."""
    X = weil_orbit(C, t, n)[-1]
    return _point_height(X) / (2 * 4 ** n)


def set_height(C: HomLift, S: Iterable) -> float:
    S = [Fraction(s) for s in S]
    if not S:
        raise ValueError("empty set")
    return math.fsum(neron_tate(C, s).value for s in S) / len(S)


def pairing_height(C: HomLift, S: Sequence) -> float:
    """|S|/(|S|-1) sum_v (1/2|S|^2) sum_{x != y} g_v(x, y) over all places that matter.

    Places: archimedean, the bad primes, and every prime dividing some x ^ y
    (at the remaining primes each Green-function term vanishes).
    """
    S = [Fraction(s) for s in S]
    if len(S) < 2:
        raise ValueError("pairing height needs at least two points")
    if len(set(S)) != len(S):
        raise ValueError("diagonal")
    lifts = [(s.numerator, s.denominator) for s in S]
    places = {ARCH, *bad_places(_first(C), first_resultant(C))}
    for x, y in permutations(lifts, 2):
        places |= {Place(p) for p in primes_of(x[0] * y[1] - x[1] * y[0])}
    n = len(S)
    total = []
    for v in sorted(places):
        pair_sum = math.fsum(green_function(x, y, C, v, tol=HEIGHT_TOL) for x, y in permutations(lifts, 2))
        total.append(pair_sum / (2 * n * n))
    return n / (n - 1) * math.fsum(total)


@dataclass(frozen=True)
class TorsionVerdict:
    verdict: str  # torsion | not-torsion | unknown
    tail: int | None = None
    period: int | None = None
    orbit: tuple = ()
    height: HeightResult | None = None

    def to_json(self) -> dict:
        out = {"verdict": self.verdict}
        if self.verdict == "torsion":
            out.update(tail=self.tail, period=self.period, orbit=[_fmt(x) for x in self.orbit])
        if self.height is not None:
            out["height"] = self.height.to_json()
        return out


def _fmt(X) -> str:
    return INF if X[1] == 0 else fraction_str(Fraction(X[0], X[1]))


def is_torsion(C: HomLift, t, max_steps: int = MAX_STEPS) -> TorsionVerdict:
    """Exact orbit repetition certifies torsion; positive height certifies the converse."""
    t = _check_t(t)
    p, q = t.numerator, t.denominator
    X = _start(C, t)
    X = (-X[0], -X[1]) if X[1] < 0 or (X[1] == 0 and X[0] < 0) else X
    seen = {X: 0}
    orbit = [X]
    for k in range(1, max_steps + 1):
        X, _ = content_strip(lattes_pair(p, q, *X))
        X = (-X[0], -X[1]) if X[1] < 0 or (X[1] == 0 and X[0] < 0) else X
        if X in seen:
            j = seen[X]
            return TorsionVerdict("torsion", j, k - j, tuple(orbit))
        seen[X] = k
        orbit.append(X)
        if max(abs(X[0]), abs(X[1])).bit_length() > MAX_BITS:
            break
    h = neron_tate(C, t)
    if h.certificate == "positive" and h.value > 10 * max(h.error, HEIGHT_TOL):
        return TorsionVerdict("not-torsion", height=h)
    return TorsionVerdict("unknown", height=h)


def capacity_product(C: HomLift) -> float:
    """prod_v Cap(K_v) over the archimedean and bad places (all others are 1)."""
    places = [ARCH] + bad_places(_first(C), first_resultant(C))
    return math.exp(math.fsum(float(capacity_closed(C, v).log_value) for v in places))
