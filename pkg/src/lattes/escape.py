"""Escape rates G_{C,v}, capacities and the Green function.

Archimedean values come from a renormalized floating iteration.  At a prime
the orbit of a coprime integer pair is followed exactly: content is stripped
into a rational ledger, so every value is a rational multiple of log p up to
a rigorous tail interval (or exactly, once the projective orbit repeats).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

import numpy as np

from .core import (
    ARCH,
    HomLift,
    OrbitState,
    Place,
    A_exponent,
    bad_places,
    first_iterate,
    lattes_pair,
    primes_of,
    valuation,
)
from .forms import BinaryForm, content_strip, form_resultant, fraction_str

ARCH_TOL = 1e-9
ARCH_NMAX = 60
PADIC_NMAX = 8


# -- exact logarithms ---------------------------------------------------------

class ExactLog(dict):
    """sum_p c_p log p with rational c_p; the zero value is the empty dict."""

    @classmethod
    def of_abs(cls, x, place: Place = ARCH) -> "ExactLog":
        """log|x|_v for a nonzero rational x."""
        x = Fraction(x)
        if x == 0:
            raise ValueError("log of zero")
        if place.archimedean:
            return cls({p: Fraction(valuation(x, p)) for p in primes_of(x)}) if x not in (1, -1) else cls()
        v = valuation(x, place.p)
        return cls({place.p: Fraction(-v)}) if v else cls()

    def __add__(self, other: Mapping[int, Fraction]) -> "ExactLog":
        out = dict(self)
        for p, c in other.items():
            out[p] = out.get(p, 0) + c
        return ExactLog({p: c for p, c in out.items() if c != 0})

    def __neg__(self) -> "ExactLog":
        return ExactLog({p: -c for p, c in self.items()})

    def __sub__(self, other) -> "ExactLog":
        return self + (-ExactLog(other))

    def scale(self, k) -> "ExactLog":
        k = Fraction(k)
        return ExactLog({p: c * k for p, c in self.items() if c * k != 0})

    def __float__(self) -> float:
        return math.fsum(float(c) * math.log(p) for p, c in self.items())

    @property
    def is_zero(self) -> bool:
        return not self

    def to_json(self) -> dict[str, str]:
        return {str(p): fraction_str(c) for p, c in sorted(self.items())}

    def __str__(self) -> str:
        if not self:
            return "0"
        return " + ".join(f"({fraction_str(c)})*log({p})" for p, c in sorted(self.items()))


# -- ledger values ------------------------------------------------------------

@dataclass(frozen=True)
class Certificate:
    """kind is 'exact', 'tolerance' or 'level-capped'; bound is the achieved error."""

    kind: str
    bound: float = 0.0

    def to_json(self) -> dict:
        return {"kind": self.kind, "bound": f"{self.bound:.3e}"}


EXACT = Certificate("exact")


@dataclass(frozen=True)
class LedgerValue:
    arch: float | None = None
    padic: dict[int, Fraction] = field(default_factory=dict)
    certificate: Certificate = EXACT
    levels_used: int = 0
    arch_exact: ExactLog | None = None

    @property
    def value(self) -> float:
        total = [self.arch] if self.arch is not None else []
        total += [float(c) * math.log(p) for p, c in self.padic.items()]
        return math.fsum(total)

    @property
    def exact(self) -> ExactLog | None:
        """The value as an exact log-combination, when one is available."""
        if self.certificate.kind != "exact":
            return None
        if self.arch is not None:
            return self.arch_exact
        return ExactLog({p: c for p, c in self.padic.items() if c})

    def to_json(self) -> dict:
        out = {
            "value": f"{self.value:.15g}",
            "certificate": self.certificate.to_json(),
            "levels_used": self.levels_used,
        }
        if self.exact is not None:
            out["exact"] = self.exact.to_json()
        return out


# -- archimedean --------------------------------------------------------------

def _coeff_array(f: BinaryForm, dtype) -> np.ndarray:
    if np.dtype(dtype) == np.clongdouble:
        # exact up to 64 bits, which covers first-iterate coefficients
        return np.array([np.longdouble(c) / np.longdouble(f.denominator) if abs(c) < 2**63
                         else np.longdouble(float(Fraction(c, f.denominator))) for c in f.numerators])
    return np.array([float(c) for c in f.coeffs])


def _horner(coeffs: np.ndarray, u1, u2):
    acc = coeffs[0] * np.ones_like(u1)
    p2 = np.ones_like(u2)
    for c in coeffs[1:]:
        p2 = p2 * u2
        acc = acc * u1 + c * p2
    return acc


def _lognorm(z, w):
    return np.log(np.maximum(np.abs(z), np.abs(w)))


@dataclass(frozen=True)
class ComplexConstant:
    """First iterate of a constant marked point a in C minus {0, 1}, numerically.

    F_1 = ((t1 - a^2 t2)^2, 4 a (1 - a) t2 (t1 - a t2)) and d = 2.
    """

    a: complex
    d: int = 2

    def __post_init__(self):
        if self.a in (0, 1):
            raise ValueError(f"marked point {self.a} is persistently preperiodic")

    @property
    def p10(self) -> complex:
        return 1

    def coeff_arrays(self, dtype):
        a = np.asarray(self.a, dtype=dtype)
        P = np.array([1, -2 * a * a, a ** 4], dtype=dtype)
        Q = np.array([0, 4 * a * (1 - a), -4 * a * a * (1 - a)], dtype=dtype)
        return P, Q


def _coeffs_of(s1, dtype):
    if isinstance(s1, ComplexConstant):
        return s1.coeff_arrays(dtype)
    return _coeff_array(s1.P, dtype), _coeff_array(s1.Q, dtype)


def _p10(s1) -> float:
    return abs(s1.p10) if isinstance(s1, ComplexConstant) else abs(float(s1.scalars.p10))


def arch_iteration(s1: OrbitState, t1, t2, tol: float = ARCH_TOL, nmax: int = ARCH_NMAX,
                   dtype=np.complex128, fixed_steps: int | None = None):
    """Vectorized G_C(t1, t2) at the archimedean place.

    Returns (values, last_increment, steps).  With ``fixed_steps`` the loop
    runs exactly that many renormalized steps (useful inside finite differences,
    where a data-dependent stopping rule would add noise).
    """
    t1 = np.asarray(t1, dtype=dtype)
    t2 = np.asarray(t2, dtype=dtype)
    t1, t2 = np.broadcast_arrays(t1, t2)
    scale = np.maximum(np.abs(t1), np.abs(t2))
    if np.any(scale == 0):
        raise ValueError("(t1, t2) = (0, 0) has no escape rate")
    u1, u2 = t1 / scale, t2 / scale
    d = s1.d
    on_axis = u2 == 0
    u2s = np.where(on_axis, 1, u2)
    cP, cQ = _coeffs_of(s1, dtype)
    z = _horner(cP, u1, u2)
    w = _horner(cQ, u1, u2)
    ln = _lognorm(z, w)
    G = np.log(scale) + ln / d
    z, w = z / np.exp(ln), w / np.exp(ln)
    log_u2 = np.log(np.abs(u2s))
    inc = np.full(G.shape, np.inf)
    steps = 0
    limit = fixed_steps if fixed_steps is not None else nmax
    weight = 1.0 / d
    for k in range(1, limit + 1):
        steps = k
        z, w = lattes_pair(u1, u2s, z, w)
        ln = _lognorm(z, w)
        weight /= 4
        inc = (ln - 2 * log_u2) * weight
        G = G + inc
        z, w = z / np.exp(ln), w / np.exp(ln)
        if fixed_steps is None and np.all(np.abs(inc[~on_axis]) < tol):
            break
    # t2 = 0: G(t1, 0) = log|t1| + (1/d) log|P1(1,0)| by homogeneity
    if np.any(on_axis):
        G = np.where(on_axis, np.log(np.abs(t1)) + math.log(_p10(s1)) / d, G)
        inc = np.where(on_axis, 0, inc)
    return G, np.abs(inc), steps


def escape_arch(C: HomLift | OrbitState, t1, t2=1, tol: float = ARCH_TOL, nmax: int = ARCH_NMAX,
                extended: bool = False) -> LedgerValue:
    """G_C(t1, t2) at the archimedean place for a single complex point."""
    s1 = _state(C)
    if t1 == 0 and t2 == 0:
        raise ValueError("(t1, t2) = (0, 0) has no escape rate")
    dtype = np.clongdouble if extended else np.complex128
    G, inc, steps = arch_iteration(s1, t1, t2, tol, nmax, dtype)
    err = float(inc)
    cert = Certificate("tolerance", err) if err < tol else Certificate("level-capped", err)
    return LedgerValue(arch=float(G), certificate=cert, levels_used=steps + 1)


def _state(C) -> OrbitState:
    return C if isinstance(C, (OrbitState, ComplexConstant)) else _first(C)


@lru_cache(maxsize=256)
def _first(C: HomLift) -> OrbitState:
    return first_iterate(C)


@lru_cache(maxsize=256)
def first_resultant(C: HomLift) -> Fraction:
    s1 = _first(C)
    return form_resultant(s1.P, s1.Q)


# -- exact integer ledger -----------------------------------------------------

@dataclass(frozen=True)
class ExactOrbit:
    """Content-stripped orbit of a coprime pair: F_n(t) = lam_n X_n.

    lam_1 and mus[n-1] (content of F(X_n)) are positive rationals.  When the
    projective orbit repeats, X_{start + period} = +-X_start.
    """

    t1: int
    t2: int
    d: int
    lam1: Fraction
    mus: tuple[Fraction, ...]
    points: tuple[tuple[int, int], ...]
    start: int | None = None
    period: int | None = None

    @property
    def periodic(self) -> bool:
        return self.period is not None


def _canon(X):
    a, b = X
    return (-a, -b) if (a < 0 or (a == 0 and b < 0)) else (a, b)


@lru_cache(maxsize=4096)
def exact_orbit(C: HomLift, t1: int, t2: int, nmax: int = PADIC_NMAX) -> ExactOrbit:
    if math.gcd(t1, t2) != 1:
        raise ValueError(f"({t1}, {t2}) is not a coprime integer pair; reduce first")
    s1 = _first(C)
    X, lam1 = content_strip((s1.P(t1, t2), s1.Q(t1, t2)))
    X = _canon(X)
    seen = {X: 1}
    points, mus = [X], []
    for n in range(1, nmax):
        Y = lattes_pair(t1, t2, *X)
        X, mu = content_strip(Y)
        X = _canon(X)
        mus.append(mu)
        points.append(X)
        if X in seen:
            j = seen[X]
            return ExactOrbit(t1, t2, s1.d, lam1, tuple(mus), tuple(points), j, n + 1 - j)
        seen[X] = n + 1
    return ExactOrbit(t1, t2, s1.d, lam1, tuple(mus), tuple(points))


def map_resultant(t1: int, t2: int) -> int:
    """Res of F_{t1,t2} as a pair of quartic forms in (z, w)."""
    first = BinaryForm.from_ints([t2 * t2, 0, -2 * t1 * t2, 0, t1 * t1])
    second = BinaryForm.from_ints([0, 4 * t2 * t2, -4 * t2 * (t1 + t2), 4 * t1 * t2, 0])
    return int(form_resultant(first, second))


def _ledger_sum(orb: ExactOrbit, logf):
    """sum of log lam_1/d + sum_n (log mu_n - 2 log t2)/(4^n d), with logf an additive log."""
    d = orb.d
    lt2 = logf(orb.t2) if orb.t2 else None
    total = logf(orb.lam1).scale(Fraction(1, d))
    terms = []
    for n, mu in enumerate(orb.mus, start=1):
        term = logf(mu) - lt2.scale(2)
        terms.append(term.scale(Fraction(1, 4 ** n * d)))
    if orb.periodic:
        j, q = orb.start, orb.period
        # mus[n-1] is periodic for n >= j; the recorded terms cover n < j + q
        head = terms[: j - 1]
        cycle = terms[j - 1: j - 1 + q]
        factor = Fraction(4 ** q, 4 ** q - 1)
        for t in head:
            total = total + t
        for t in cycle:
            total = total + t.scale(factor)
        return total
    for t in terms:
        total = total + t
    return total


def escape_padic(C: HomLift, t1: int, t2: int, p: int, nmax: int = PADIC_NMAX) -> LedgerValue:
    """G_{C,p}(t1, t2) for coprime integers, as an exact multiple of log p."""
    if t1 == 0 and t2 == 0:
        raise ValueError("(t1, t2) = (0, 0) has no escape rate")
    if t2 == 0:
        # G(t1, 0) = log|t1|_p + (1/d) log|P1(1,0)|_p, and t1 = +-1 by coprimality
        s1 = _first(C)
        e = ExactLog.of_abs(s1.scalars.p10, Place(p)).scale(Fraction(1, s1.d))
        return LedgerValue(padic={p: e.get(p, Fraction(0))}, levels_used=1)
    orb = exact_orbit(C, t1, t2, nmax)
    e = _ledger_sum(orb, lambda x: ExactLog.of_abs(x, Place(p)))
    coef = e.get(p, Fraction(0))
    levels = len(orb.points)
    if orb.periodic:
        return LedgerValue(padic={p: coef}, certificate=EXACT, levels_used=levels)
    # tail: 0 <= v_p(mu_n) <= v_p(Res F_{t1,t2}); -log|mu|_p = v log p
    vres = valuation(map_resultant(t1, t2), p)
    vt2 = valuation(t2, p)
    S = Fraction(1, 3 * 4 ** (levels - 1) * orb.d)
    lo = coef - (vres - 2 * vt2) * S
    hi = coef + 2 * vt2 * S
    mid = (lo + hi) / 2
    half = float((hi - lo) / 2) * math.log(p)
    return LedgerValue(padic={p: mid}, certificate=Certificate("tolerance", half), levels_used=levels)


def escape_exact_arch(C: HomLift, t1: int, t2: int, nmax: int = PADIC_NMAX) -> LedgerValue | None:
    """Exact archimedean value when the projective orbit of (t1, t2) repeats."""
    if t2 == 0:
        s1 = _first(C)
        e = ExactLog.of_abs(s1.scalars.p10).scale(Fraction(1, s1.d)) + ExactLog.of_abs(t1)
        return LedgerValue(arch=float(e), arch_exact=e, levels_used=1)
    orb = exact_orbit(C, t1, t2, nmax)
    if not orb.periodic:
        return None
    e = _ledger_sum(orb, ExactLog.of_abs)
    return LedgerValue(arch=float(e), arch_exact=e, levels_used=len(orb.points))


def escape_at(C: HomLift, t1: int, t2: int, place: Place, tol: float = ARCH_TOL) -> LedgerValue:
    """G_{C,v} at a coprime integer pair, exact whenever the orbit allows it."""
    if place.archimedean:
        exact = escape_exact_arch(C, t1, t2)
        return exact if exact is not None else escape_arch(C, t1, t2, tol)
    return escape_padic(C, t1, t2, place.p)


# -- degenerate parameters ----------------------------------------------------

DEGENERATE = {"t=0": (0, 1), "t=1": (1, 1), "t=inf": (1, 0)}


def degenerate_G(C: HomLift | OrbitState, which: str, place: Place = ARCH) -> ExactLog:
    """G_{C,v} at (0,1), (1,1), (1,0) from the first-iterate scalars."""
    s1 = _state(C)
    sc = s1.scalars
    x = {"t=0": sc.p01, "t=1": sc.diff11, "t=inf": sc.p10}[which]
    return ExactLog.of_abs(x, place).scale(Fraction(1, s1.d))


# -- capacities ---------------------------------------------------------------

@dataclass(frozen=True)
class CapacityValue:
    place: Place
    log_value: ExactLog

    @property
    def value(self) -> float:
        return math.exp(float(self.log_value))

    def to_json(self) -> dict:
        return {"place": str(self.place), "value": f"{self.value:.15g}", "log": self.log_value.to_json()}


def capacity_closed(C: HomLift | OrbitState, place: Place = ARCH) -> CapacityValue:
    """|4|^{-1/3d} |(Q-P)(1,1) P(0,1)/P(1,0)^2|^{-1/3d^2} |Res F_1|^{-1/d^2} at v."""
    s1 = _state(C)
    sc = s1.scalars
    d = s1.d
    res1 = form_resultant(s1.P, s1.Q) if isinstance(C, OrbitState) else first_resultant(C)
    base = -sc.diff11 * sc.p01 / (sc.p10 * sc.p10)
    log = (
        ExactLog.of_abs(4, place).scale(Fraction(-1, 3 * d))
        + ExactLog.of_abs(base, place).scale(Fraction(-1, 3 * d * d))
        + ExactLog.of_abs(res1, place).scale(Fraction(-1, d * d))
    )
    return CapacityValue(place, log)


def _log_abs(x: Fraction) -> float:
    return math.log(abs(x.numerator)) - math.log(x.denominator)


@dataclass(frozen=True)
class CapacityLimit:
    estimates: tuple[float, ...]

    @property
    def value(self) -> float:
        return self.estimates[-1]

    @property
    def ratios(self) -> tuple[float, ...]:
        """Successive error ratios (e_{n+1} - e_n)/(e_n - e_{n-1})."""
        e = self.estimates
        diffs = [e[i + 1] - e[i] for i in range(len(e) - 1)]
        return tuple(diffs[i + 1] / diffs[i] for i in range(len(diffs) - 1) if diffs[i] != 0)


def capacity_limit(C: HomLift | OrbitState, nmax: int = 6) -> CapacityLimit:
    """|Res F_n|^{-1/deg(F_n)^2} for n = 1..nmax via the closed resultant."""
    s1 = _state(C)
    res1 = form_resultant(s1.P, s1.Q) if isinstance(C, OrbitState) else first_resultant(C)
    d = s1.d
    sc = s1.scalars
    base = sc.diff11 * sc.p01 / (sc.p10 * sc.p10)
    out = []
    for n in range(1, nmax + 1):
        A = A_exponent(n)
        deg = 4 ** (n - 1) * d
        # log|Res F_n| without materializing the huge rational
        log_res = A * d * math.log(4) + A * _log_abs(base) + 16 ** (n - 1) * _log_abs(res1)
        out.append(math.exp(-log_res / deg ** 2))
    return CapacityLimit(tuple(out))


# -- Green function -----------------------------------------------------------

def local_G(C: HomLift, x, place: Place, tol: float = ARCH_TOL) -> float:
    """G_{C,v}(x) for any lift x.

    Rational lifts are reduced to coprime integers, so the good-reduction formula
    gives exactly 0 at primes outside bad_places; complex lifts are archimedean only.
    """
    exact = all(isinstance(c, (int, Fraction)) for c in x)
    if not exact:
        if not place.archimedean:
            raise ValueError("p-adic escape rates need rational lifts")
        return escape_arch(C, x[0], x[1], tol).value
    X, lam = content_strip(x)
    shift = float(ExactLog.of_abs(lam, place))
    if not place.archimedean and place not in bad_places(_first(C), first_resultant(C)):
        return shift
    return escape_at(C, X[0], X[1], place, tol).value + shift


def green_function(x, y, C: HomLift, place: Place = ARCH, tol: float = ARCH_TOL) -> float:
    """-log|x^y|_v + G_v(x) + G_v(y) + log Cap_v for lifts x, y of P^1 points."""
    x1, x2 = x
    y1, y2 = y
    wedge = x1 * y2 - x2 * y1
    if wedge == 0:
        raise ValueError("diagonal")
    cap = float(capacity_closed(C, place).log_value)
    if isinstance(wedge, (int, Fraction)):
        lw = float(ExactLog.of_abs(Fraction(wedge), place))
    elif place.archimedean:
        lw = math.log(abs(wedge))
    else:
        raise ValueError("p-adic Green function needs rational lifts")
    return -lw + local_G(C, x, place, tol) + local_G(C, y, place, tol) + cap
