"""Torsion parameters of 2-power order and their root sets.

At level n the x-coordinate of 2^n P is P_n/Q_n, so 2^{n+1} P = O exactly
when that ratio is one of 0, inf, 1, t.  Writing Qr = Q_n/t2, the next level
factors as

    P_{n+1}        = (P^2 - t1 t2 Qr^2)^2                 = R0^2
    P_{n+1}-Q_{n+1} = (P^2 - 2 t2 P Qr + t1 t2 Qr^2)^2      = R1^2
    t2 P_{n+1} - t1 Q_{n+1} = t2 (P^2 - 2 t1 P Qr + t1 t2 Qr^2)^2 = t2 Rt^2
    Q_{n+1}        = 4 t2 P Qr (t2 Qr - P)(t1 Qr - P)

so the new parameters at level n+1 are the roots of R0, R1 and Rt.  Those are
found through an evaluator that runs the orbit recursion at each trial t.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import gmpy2
import numpy as np
from gmpy2 import mpc

from .core import LEVEL_CAP, HomLift, LevelCapExceeded, OrbitState, orbit
from .forms import BinaryForm, _int_content, fraction_str
from .roots import CLD, LD, MP_PREC, CoeffPoly, Root, complex_roots

LABELS = ("x=0", "x=inf", "x=1", "x=t")
HALF_LABELS = {"R0": "x=0", "R1": "x=1", "Rt": "x=t"}


@lru_cache(maxsize=32)
def cached_orbit(C: HomLift, n: int) -> tuple[OrbitState, ...]:
    return tuple(orbit(C, n))


def _dehom(f: BinaryForm) -> list[int]:
    """Integer coefficients of f(t, 1) up to a positive factor, lowest first."""
    return [c for c in reversed(f.numerators)]


def _strip_trivial(cs: list[int]) -> tuple[list[int], int, int, int]:
    """Remove factors t and (t - 1); return (rest, content, mult_0, mult_1)."""
    while len(cs) > 1 and cs[-1] == 0:
        cs = cs[:-1]
    m0 = 0
    while len(cs) > 1 and cs[0] == 0:
        cs = cs[1:]
        m0 += 1
    m1 = 0
    while len(cs) > 1 and sum(cs) == 0:
        # synthetic division by (t - 1), high to low
        hi = cs[::-1]
        q = [hi[0]]
        for c in hi[1:-1]:
            q.append(c + q[-1])
        cs = q[::-1]
        m1 += 1
    g = _int_content(cs) or 1
    if cs[-1] < 0:
        g = -g
    return [c // g for c in cs], g, m0, m1


@dataclass(frozen=True)
class TorsionCondition:
    """original(t) = content * t^mult_0 * (t-1)^mult_1 * poly(t)."""

    label: str
    level: int
    poly: tuple[int, ...]
    content: Fraction
    mult_0: int
    mult_1: int

    @property
    def degree(self) -> int:
        return len(self.poly) - 1

    def __call__(self, t):
        return sum(c * t ** k for k, c in enumerate(self.poly))

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "level": self.level,
            "poly": [str(c) for c in self.poly],
            "content": fraction_str(self.content),
            "trivial": {"t": self.mult_0, "t-1": self.mult_1},
        }


def _condition(label: str, level: int, f: BinaryForm) -> TorsionCondition:
    rest, g, m0, m1 = _strip_trivial(_dehom(f))
    return TorsionCondition(label, level, tuple(rest), Fraction(g, f.denominator), m0, m1)


def torsion_conditions(C: HomLift, n: int) -> tuple[TorsionCondition, ...]:
    """The four level-n conditions x(2^n P) in {0, inf, 1, t}, exactly."""
    if n < 1:
        raise ValueError("level must be >= 1")
    if n > LEVEL_CAP:
        raise LevelCapExceeded(n, LEVEL_CAP)
    s = cached_orbit(C, n)[-1]
    P, Q = s.P, s.Q
    return (
        _condition("x=0", n, P),
        _condition("x=inf", n, Q),
        _condition("x=1", n, P - Q),
        _condition("x=t", n, P.mul_t2() - Q.mul_t1()),
    )


# -- orbit evaluator ----------------------------------------------------------

class OrbitPoly:
    """R0, R1 or Rt built on F_level, evaluated through the orbit recursion.

    Known factors t^m0 (t-1)^m1 are divided out of the Newton correction.
    """

    def __init__(self, C: HomLift, level: int, kind: str):
        if kind not in HALF_LABELS:
            raise ValueError(kind)
        self.level = level
        self.kind = kind
        states = cached_orbit(C, level)
        s1, sk = states[0], states[-1]
        self._P1 = [int(c) for c in _dehom(s1.P)]
        self._Q1 = [int(c) for c in _dehom(s1.Q)]
        R = dict(zip(("R0", "R1", "Rt"), sk.halves))[kind]
        cs = _dehom(R)
        rest, _, self.m0, self.m1 = _strip_trivial(cs)
        self._coeffs = rest
        self.degree = len(rest) - 1
        self._P1ld = np.array([LD(c) for c in self._P1])
        self._Q1ld = np.array([LD(c) for c in self._Q1])

    def coefficients(self) -> list[int]:
        return list(self._coeffs)

    # the recursion is written once and run on numpy arrays or mpc scalars
    def _run(self, t, P1, Q1, one, norm):
        z = P1[-1] * one
        dz = 0 * one
        for c in P1[-2::-1]:
            dz = dz * t + z
            z = z * t + c
        w = Q1[-1] * one
        dw = 0 * one
        for c in Q1[-2::-1]:
            dw = dw * t + w
            w = w * t + c
        for _ in range(self.level - 1):
            s = norm(z, w)
            z, w, dz, dw = z / s, w / s, dz / s, dw / s
            a = t * w * w - z * z
            da = w * w + 2 * t * w * dw - 2 * z * dz
            g1 = w * (w - z) * (t * w - z)
            dg1 = dw * (w - z) * (t * w - z) + w * (dw - dz) * (t * w - z) + w * (w - z) * (w + t * dw - dz)
            z, dz, w, dw = a * a, 2 * a * da, 4 * z * g1, 4 * (dz * g1 + z * dg1)
        s = norm(z, w)
        P, Q, dP, dQ = z / s, w / s, dz / s, dw / s
        if self.kind == "R0":
            return P * P - t * Q * Q, 2 * P * dP - Q * Q - 2 * t * Q * dQ
        if self.kind == "R1":
            return (P * P - 2 * P * Q + t * Q * Q,
                    2 * P * dP - 2 * (dP * Q + P * dQ) + Q * Q + 2 * t * Q * dQ)
        return (P * P - 2 * t * P * Q + t * Q * Q,
                2 * P * dP - 2 * P * Q - 2 * t * (dP * Q + P * dQ) + Q * Q + 2 * t * Q * dQ)

    def _deflate(self, p, dp, t):
        # (p / (t^m0 (t-1)^m1))' / (...) = p'/p - m0/t - m1/(t-1)
        if not (self.m0 or self.m1):
            return p, dp
        return p, dp - p * (self.m0 / t + self.m1 / (t - 1))

    def newton(self, z: np.ndarray) -> np.ndarray:
        t = np.asarray(z, dtype=CLD)
        one = np.ones(t.shape, dtype=CLD)
        norm = lambda a, b: np.maximum(np.maximum(np.abs(a), np.abs(b)), LD(1e-4000))
        p, dp = self._run(t, self._P1ld, self._Q1ld, one, norm)
        p, dp = self._deflate(p, dp, t)
        return p / dp

    def newton_mp(self, z: mpc) -> tuple[mpc, mpc]:
        with gmpy2.context(gmpy2.get_context(), precision=MP_PREC):
            norm = lambda a, b: max(abs(a), abs(b))
            p, dp = self._run(z, self._P1, self._Q1, mpc(1), norm)
            return self._deflate(p, dp, z)


# -- torsion sets -------------------------------------------------------------

@dataclass(frozen=True)
class TorsionPoint:
    value: complex
    multiplicity: int
    residual: float
    label: str
    level: int
    rational: Fraction | None = None

    def to_row(self) -> dict:
        return {
            "re": f"{self.value.real:.17g}",
            "im": f"{self.value.imag:.17g}",
            "multiplicity": self.multiplicity,
            "condition": self.label,
            "level": self.level,
            "residual": f"{self.residual:.3e}",
        }


@dataclass(frozen=True)
class TorsionSet:
    level: int
    points: tuple[TorsionPoint, ...]
    excluded: tuple[TorsionPoint, ...] = field(default=())

    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points])

    def __len__(self) -> int:
        return len(self.points)


def _exact_root(cs, z: complex, max_den: int = 10 ** 6) -> Fraction | None:
    """A rational root of the integer polynomial cs near z, verified exactly."""
    if abs(z.imag) > 1e-8 * max(1, abs(z)):
        return None
    r = Fraction(z.real).limit_denominator(max_den)
    return r if sum(c * r ** k for k, c in enumerate(cs)) == 0 else None


def _near(z: complex, w: complex, tol: float) -> bool:
    return abs(z - w) <= tol * max(1, abs(z))


def _collect(roots: list[Root], label: str, level: int, cs, tol: float, pts: list, excluded: list):
    for r in roots:
        q = _exact_root(cs, r.value)
        tp = TorsionPoint(complex(q) if q is not None else r.value, r.multiplicity, r.residual, label, level, q)
        if _near(tp.value, 0, tol) or _near(tp.value, 1, tol):
            excluded.append(tp)
        else:
            pts.append(tp)


def new_roots(C: HomLift, level: int, kind: str, precision: float = 1e-14) -> list[Root]:
    """Roots of R0/R1/Rt built on F_level (new torsion parameters at level + 1)."""
    ev = OrbitPoly(C, level, kind)
    if ev.degree < 1:
        return []
    return complex_roots(ev, precision)


def torsion_set(C: HomLift, n: int, precision: float = 1e-14, dedupe_tol: float = 1e-8) -> TorsionSet:
    """Parameters t != 0, 1 with 2^{n+1} P_c(t) = O, i.e. the union over the four level-n conditions."""
    if n > LEVEL_CAP:
        raise LevelCapExceeded(n, LEVEL_CAP)
    pts: list[TorsionPoint] = []
    excluded: list[TorsionPoint] = []
    for cond in torsion_conditions(C, 1):
        if cond.degree >= 1:
            _collect(complex_roots(CoeffPoly(cond.poly), precision), cond.label, 1, cond.poly, dedupe_tol, pts, excluded)
    for k in range(1, n):
        states = cached_orbit(C, k)
        for kind, R in zip(("R0", "R1", "Rt"), states[-1].halves):
            cs = _dehom(R)
            _collect(new_roots(C, k, kind, precision), HALF_LABELS[kind], k + 1, cs, dedupe_tol, pts, excluded)
    merged: list[TorsionPoint] = []
    for p in sorted(pts, key=lambda p: (p.value.real, p.value.imag)):
        if merged and _near(merged[-1].value, p.value, dedupe_tol) and merged[-1].rational == p.rational:
            continue
        merged.append(p)
    return TorsionSet(n, tuple(_canonical(merged)), tuple(excluded))


def _canonical(points: list[TorsionPoint]) -> list[TorsionPoint]:
    return sorted(points, key=lambda p: (round(p.value.real, 12), round(p.value.imag, 12)))


def intersect_torsion(Ca: HomLift, Cb: HomLift, n: int, match_tol: float = 1e-8,
                      precision: float = 1e-14) -> list[tuple[TorsionPoint, TorsionPoint]]:
    """Pairs (s, s') from the two torsion sets with |s - s'| < match_tol.

    match_tol = 0 compares the exactly verified rational elements only.
    """
    A = torsion_set(Ca, n, precision)
    B = torsion_set(Cb, n, precision)
    out = []
    if match_tol == 0:
        rb = {p.rational: p for p in B.points if p.rational is not None}
        return [(p, rb[p.rational]) for p in A.points if p.rational is not None and p.rational in rb]
    vb = B.values()
    for p in A.points:
        if vb.size == 0:
            break
        close = np.flatnonzero(np.abs(vb - p.value) < match_tol)
        out.extend((p, B.points[j]) for j in close)
    return out
