"""Simultaneous polynomial root finding (Aberth–Ehrlich) with high-precision polish.

A polynomial is seen through an evaluator that returns Newton corrections
p/p'.  Two evaluators exist: one for explicit integer coefficients and one
that evaluates the torsion factors through the orbit recursion, which stays
well conditioned at degrees where the monomial basis is hopeless.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc

CLD = np.clongdouble
LD = np.longdouble
MP_PREC = 160
ABERTH_MAXIT = 800


class RootFindingError(RuntimeError):
    def __init__(self, msg: str, partial=None):
        super().__init__(msg)
        self.partial = partial


class Evaluator(Protocol):
    degree: int

    def coefficients(self) -> Sequence[int]:
        """Exact integer coefficients, lowest degree first (for bounds only)."""

    def newton(self, z: np.ndarray) -> np.ndarray:
        """p(z)/p'(z) in extended precision."""

    def newton_mp(self, z: mpc) -> tuple[mpc, mpc]:
        """(p(z), p'(z)) up to a common nonzero factor, in MP_PREC bits."""


# -- coefficient evaluator ----------------------------------------------------

class CoeffPoly:
    """Integer polynomial sum c_k t^k with c_n != 0."""

    def __init__(self, coeffs: Sequence[int]):
        cs = [int(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if len(cs) < 2:
            raise ValueError("root finding needs degree >= 1")
        self._c = cs
        self.degree = len(cs) - 1
        # scale by a power of two so extended-precision values stay in range
        e = max(abs(c).bit_length() for c in cs)
        self._ld = np.array([_ld_scaled(c, e) for c in cs], dtype=LD)
        self._rev = self._ld[::-1].copy()

    def coefficients(self) -> list[int]:
        return list(self._c)

    def _eval(self, cs: np.ndarray, z: np.ndarray):
        p = np.full(z.shape, cs[-1], dtype=CLD)
        dp = np.zeros(z.shape, dtype=CLD)
        for c in cs[-2::-1]:
            dp = dp * z + p
            p = p * z + c
        return p, dp

    def newton(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=CLD)
        out = np.empty(z.shape, dtype=CLD)
        inner = np.abs(z) <= 1
        if inner.any():
            p, dp = self._eval(self._ld, z[inner])
            out[inner] = p / dp
        if (~inner).any():
            # p(z) = z^n q(1/z) with q the reversed polynomial
            zo = z[~inner]
            y = 1 / zo
            q, dq = self._eval(self._rev, y)
            n = self.degree
            # p' = n z^{n-1} q(y) - z^{n-2} q'(y)
            out[~inner] = zo * q / (n * q - y * dq)
        return out

    def newton_mp(self, z: mpc) -> tuple[mpc, mpc]:
        with gmpy2.context(gmpy2.get_context(), precision=MP_PREC):
            p = mpc(self._c[-1])
            dp = mpc(0)
            for c in self._c[-2::-1]:
                dp = dp * z + p
                p = p * z + c
            return p, dp


def _ld_scaled(c: int, e: int):
    if c == 0:
        return LD(0)
    # keep the top 63 bits, the long double mantissa width
    shift = abs(c).bit_length() - 63
    if shift > 0:
        return np.ldexp(LD(c >> shift), shift - e)
    return np.ldexp(LD(c), -e)


# -- Aberth iteration ---------------------------------------------------------

def newton_polygon_start(coeffs: Sequence[int], offset: float = 0.7) -> np.ndarray:
    """Bini's initial approximations: circles from the upper convex hull of log|c_k|."""
    n = len(coeffs) - 1
    pts = [(k, math.log(abs(c)) if abs(c) < 2 ** 1000 else abs(c).bit_length() * math.log(2))
           for k, c in enumerate(coeffs) if c != 0]
    hull: list[tuple[int, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    z = []
    if hull[0][0] > 0:
        z.extend([0.0] * hull[0][0])
    for (k1, y1), (k2, y2) in zip(hull, hull[1:]):
        m = k2 - k1
        r = math.exp((y1 - y2) / m)
        for j in range(m):
            theta = 2 * math.pi * j / m + 2 * math.pi * k1 / n + offset
            z.append(r * complex(math.cos(theta), math.sin(theta)))
    return np.array(z, dtype=CLD)


def aberth(ev: Evaluator, z0: np.ndarray | None = None, maxit: int = ABERTH_MAXIT,
           eps: float = 1e-17, active: np.ndarray | None = None) -> tuple[np.ndarray, int]:
    """All roots of ev by Aberth–Ehrlich in complex long double.

    ``active`` marks the approximations that move; the others stay fixed and
    only repel (known roots, repeated by multiplicity).
    """
    z = newton_polygon_start(ev.coefficients()) if z0 is None else np.array(z0, dtype=CLD)
    n = z.size
    active = np.ones(n, dtype=bool) if active is None else np.array(active, dtype=bool)
    prev = np.full(n, np.inf)
    for it in range(1, maxit + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            return z, it
        N = ev.newton(z[idx])
        diff = z[idx, None] - z[None, :]
        diff[np.arange(idx.size), idx] = 1
        inv = 1 / diff
        inv[np.arange(idx.size), idx] = 0
        S = inv.sum(axis=1)
        w = N / (1 - N * S)
        w = np.where(np.isfinite(w), w, 0)
        z[idx] -= w
        scale = np.maximum(np.abs(z[idx]), 1)
        size = np.abs(w)
        done = size <= eps * scale
        # near a multiple root (or at the noise floor) progress is linear at best;
        # stop there and leave the rest to the high-precision polish
        done |= (size <= 1e-7 * scale) & (size >= 0.5 * prev[idx])
        done |= ~np.isfinite(N)
        prev[idx] = size
        active[idx[done]] = False
    # leftovers jittering at the noise floor of a high-multiplicity root are
    # handed to the polish and the cluster count
    if np.all(prev[active] <= 1e-3 * np.maximum(np.abs(z[active]), 1)):
        return z, maxit
    raise RootFindingError(f"Aberth did not converge in {maxit} iterations ({int(active.sum())} roots left)", z)


# -- polishing and clustering -------------------------------------------------

@dataclass(frozen=True)
class Root:
    value: complex
    multiplicity: int
    residual: float


def _polish(ev: Evaluator, z0: complex, steps: int = 80, m: int = 1) -> tuple[mpc, float]:
    with gmpy2.context(gmpy2.get_context(), precision=MP_PREC):
        z = mpc(complex(z0))
        tiny = gmpy2.mpfr(2) ** (-MP_PREC + 20)
        step = mpc(0)
        for _ in range(steps):
            p, dp = ev.newton_mp(z)
            if p == 0:
                return z, 0.0
            if dp == 0:
                break
            step = m * p / dp
            z -= step
            if abs(step) <= tiny * max(abs(z), 1):
                break
        p, dp = ev.newton_mp(z)
        res = float(abs(p / dp) / max(abs(z), 1)) if dp != 0 else (0.0 if p == 0 else math.inf)
        return z, res


def _winding(ev: Evaluator, centre: complex, radius: float, samples: int) -> complex:
    with gmpy2.context(gmpy2.get_context(), precision=MP_PREC):
        c = mpc(centre)
        total = mpc(0)
        for k in range(samples):
            e = gmpy2.exp(mpc(0, 2 * gmpy2.const_pi() * k / samples))
            p, dp = ev.newton_mp(c + radius * e)
            # trapezoid for (1/2 pi i) oint p'/p dz with dz = i r e dtheta
            total += dp / p * radius * e
        return complex(total / samples)


def winding_count(ev: Evaluator, centre: complex, radius: float, samples: int = 96) -> int | None:
    """Number of roots inside |z - centre| < radius, by the argument principle on p'/p.

    Only the Newton ratio is used, so evaluators that return p and p' up to
    a common z-dependent factor are fine.  Returns None unless two sample
    counts agree on a near-integer (the circle must keep clear of roots).
    """
    a = _winding(ev, centre, radius, samples)
    b = _winding(ev, centre, radius, 2 * samples)
    k = round(b.real)
    if abs(a - b) > 0.05 or abs(b - k) > 0.05:
        return None
    return int(k)


def _cluster(pts: list[tuple[mpc, float]], radius: float) -> list[list[int]]:
    used = [False] * len(pts)
    order = sorted(range(len(pts)), key=lambda i: (float(pts[i][0].real), float(pts[i][0].imag)))
    groups = []
    for a in order:
        if used[a]:
            continue
        za = complex(pts[a][0])
        members = [b for b in order if not used[b] and abs(complex(pts[b][0]) - za) <= radius * max(1, abs(za))]
        for b in members:
            used[b] = True
        groups.append(members)
    return groups


def _superclusters(vals: np.ndarray, link: float) -> list[list[int]]:
    """Single-linkage components at relative distance ``link``."""
    n = len(vals)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    order = np.argsort(vals.real)
    for a_pos, a in enumerate(order):
        for b in order[a_pos + 1:]:
            if vals[b].real - vals[a].real > link * max(1, abs(vals[a])):
                break
            if abs(vals[b] - vals[a]) <= link * max(1, abs(vals[a])):
                parent[find(a)] = find(b)
    comps: dict[int, list[int]] = {}
    for i in range(n):
        comps.setdefault(find(i), []).append(i)
    return list(comps.values())


def _excess(ev: Evaluator, vals: np.ndarray, fine: list[list[int]], link: float = 1e-6) -> list[int]:
    """Approximations in multi-member clusters that the argument principle does not back."""
    owner = {i: g for g in fine for i in g}
    out = []
    for comp in _superclusters(vals, link):
        multi = {id(owner[i]): owner[i] for i in comp if len(owner[i]) > 1}
        if not multi:
            continue
        centre = complex(np.mean(vals[comp]))
        spread = float(np.max(np.abs(vals[comp] - centre)))
        mask = np.ones(len(vals), dtype=bool)
        mask[comp] = False
        gap = float(np.min(np.abs(vals[mask] - centre))) if mask.any() else math.inf
        # widest admissible circle: values of p on it stay far above the noise floor
        rho = max(2 * spread, min(gap / 4, 1e-2 * max(1, abs(centre))))
        if not 3 * rho < gap:
            continue
        k = winding_count(ev, centre, rho)
        if k is None:
            continue
        surplus = len(comp) - k
        for g in sorted(multi.values(), key=len, reverse=True):
            while surplus > 0 and len(g) > 1:
                out.append(g.pop())
                surplus -= 1
    return out


def complex_roots(ev: Evaluator | Sequence[int], target_precision: float = 1e-14,
                  polish: bool = True) -> list[Root]:
    """Roots with multiplicities; residual is the relative Newton step |p/p'|/max(1,|z|).

    A cluster of m approximations within 1e3 * target_precision (relative) is
    reported once, refined by m-fold modified Newton.  Each cluster's size is
    checked by an argument-principle count: an approximation that collapsed
    onto a neighbour's root is released and sent after the missing root by
    Aberth steps against the fixed remaining roots.
    """
    if not hasattr(ev, "newton"):
        ev = CoeffPoly(ev)
    z, _ = aberth(ev)
    radius = 1e3 * target_precision

    def refine(zs):
        out = []
        for zi in zs:
            if polish:
                out.append(_polish(ev, complex(zi)))
            else:
                out.append((mpc(complex(zi)), float(abs(ev.newton(np.array([zi]))[0]) / max(abs(zi), 1))))
        return out

    pts = refine(z)
    for attempt in range(4):
        vals = np.array([complex(p[0]) for p in pts])
        excess = _excess(ev, vals, _cluster(pts, radius))
        if not excess:
            break
        keep = [i for i in range(len(pts)) if i not in set(excess)]
        known = vals[keep]
        r = float(np.exp(np.mean(np.log(np.maximum(np.abs(known), 1e-300))))) if known.size else 1.0
        ang = 2 * math.pi * (np.arange(len(excess)) + 0.5 + 0.37 * attempt) / len(excess) + 0.25
        starts = r * np.exp(1j * ang) * (1.5 + attempt)
        zz = np.concatenate([known, starts]).astype(CLD)
        act = np.concatenate([np.zeros(known.size, dtype=bool), np.ones(len(excess), dtype=bool)])
        zz, _ = aberth(ev, zz, active=act)
        pts = [pts[i] for i in keep] + refine(zz[known.size:])
    roots = []
    for g in _cluster(pts, radius):
        m = len(g)
        if m == 1:
            zc, res = pts[g[0]]
        else:
            with gmpy2.context(gmpy2.get_context(), precision=MP_PREC):
                centre = sum((pts[b][0] for b in g), mpc(0)) / m
            zc, res = _polish(ev, complex(centre), steps=20, m=m)
            # at the noise floor of a multiple root Newton can jump away; the
            # cluster centre is then the better estimate
            if abs(complex(zc) - complex(centre)) > 10 * radius * max(1, abs(complex(centre))):
                zc = centre
                p, dp = ev.newton_mp(centre)
                res = float(m * abs(p / dp) / max(abs(centre), 1)) if dp != 0 else 0.0
        roots.append(Root(complex(zc), m, res))
    roots.sort(key=lambda r: (r.value.real, r.value.imag))
    return roots
