"""Maximal-entropy densities, the explicit potential, bifurcation-measure masses
and the equidistribution / distinctness experiments."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import HomLift, MarkedPoint, _apply_F, lift
from .escape import (
    ComplexConstant,
    ExactLog,
    _state,
    arch_iteration,
    degenerate_G,
    escape_arch,
)
from .forms import form_gcd
from .quadrature import QuadratureSpec, QuadResult, p1_integral
from .torsion import cached_orbit, new_roots
from .roots import CoeffPoly, complex_roots

DEFAULT_SPEC = QuadratureSpec()


# -- densities ----------------------------------------------------------------

@dataclass(frozen=True)
class DensityValue:
    t: complex
    rho: float
    D: float
    error: float


_rho_cache: dict[tuple[complex, QuadratureSpec], DensityValue] = {}
_rho_lock = threading.Lock()


def _one(z):
    return np.ones(z.shape)


def rho_lambda(t: complex, spec: QuadratureSpec = DEFAULT_SPEC) -> DensityValue:
    """Hyperbolic density of C minus {0,1} at t, from 1/rho = 2|t(t-1)| integral of 1/|z(z-1)(z-t)|."""
    t = complex(t)
    key = (t, spec)
    hit = _rho_cache.get(key)
    if hit is not None:
        return hit
    J = p1_integral(_one, t, spec=spec)
    k = abs(t * (t - 1))
    val = DensityValue(t, 1.0 / (2 * k * J.value), 2.0 / J.value, 2.0 * J.error / J.value ** 2)
    with _rho_lock:
        _rho_cache.setdefault(key, val)
    return val


def total_mass(t: complex, spec: QuadratureSpec = QuadratureSpec(m=3, base_u=40, base_theta=20)) -> float:
    """(D/2) * integral of 1/|z(z-1)(z-t)|, with D from the default decomposition.

    The default spec here uses a different partition exponent and grid, so
    the product is a genuine consistency check on the quadrature.
    """
    D = rho_lambda(t).D
    return D / 2 * p1_integral(_one, t, spec=spec).value


def _log_dist(z0: complex):
    return lambda z: np.log(np.abs(z - z0))


def potential_I(z: complex, t: complex, spec: QuadratureSpec = DEFAULT_SPEC) -> QuadResult:
    """I(z, t) = D(t) * integral of log|z - zeta| / |zeta(zeta-1)(zeta-t)|."""
    z = complex(z)
    dens = rho_lambda(t, spec)
    r = p1_integral(_log_dist(z), t, singular=(z,), spec=spec)
    return QuadResult(dens.D * r.value, dens.D * r.error + abs(r.value) * dens.error, r.levels)


def _gcd_form(C: HomLift):
    return form_gcd(*_apply_F(C.c1, C.c2))


def bifurcation_potential(C: HomLift | complex, t: complex, spec: QuadratureSpec = DEFAULT_SPEC) -> QuadResult:
    """(2/d) D(t) int log|c1 - c2 zeta| / |...| - (1/d) log|gcd(F(C))(t, 1)|.

    C may also be a complex constant.
    """
    t = complex(t)
    if isinstance(C, HomLift):
        d = _state(C).d
        c1 = complex(C.c1(t, 1))
        c2 = complex(C.c2(t, 1))
        g = complex(_gcd_form(C)(t, 1))
    else:
        d, c1, c2, g = 2, complex(C), 1.0, 1.0
    if c2 == 0:
        # log|c1| integrates against D * (unit mass integral) = 2
        core, err = 2 * math.log(abs(c1)), 0.0
    else:
        I = potential_I(c1 / c2, t, spec)
        core, err = I.value + 2 * math.log(abs(c2)), I.error
    value = 2 / d * core - math.log(abs(g)) / d
    return QuadResult(value, 2 / d * err, 0)


# -- bifurcation-measure masses -----------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)
_SPECIAL = (0j, 1 + 0j)


def _G_grid(s1, t: np.ndarray, steps: int = 40) -> np.ndarray:
    G, _, _ = arch_iteration(s1, t, np.ones_like(t), fixed_steps=steps)
    return G


def _flux_piece(s1, gamma, dgamma, a: float, b: float, panels: int, step: float) -> float:
    """integral over s in [a, b] of dG/dn |gamma'(s)| ds with n the right-hand normal.

    For counterclockwise boundaries the right-hand normal points outward.
    """
    edges = np.linspace(a, b, panels + 1)
    mid = (edges[:-1] + edges[1:]) / 2
    half = (edges[1:] - edges[:-1]) / 2
    s = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    wts = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    z = gamma(s)
    tang = dgamma(s)
    speed = np.abs(tang)
    n = -1j * tang / speed
    def D(h):
        return (_G_grid(s1, z + h * n) - _G_grid(s1, z - h * n)) / (2 * h)
    dGdn = (4 * D(step / 2) - D(step)) / 3
    return float(np.sum(wts * dGdn * speed))


def _segment_pieces(A: complex, B: complex, indent: float | None, side: int = 1):
    """Split segment A -> B around 0 and 1 with semicircular detours.

    Detours bulge towards larger imaginary part (larger real part on vertical
    edges) for side=+1 and the other way for side=-1, so neighbouring boxes
    share the same curve.
    """
    direction = (B - A) / abs(B - A)
    hits = []
    for p in _SPECIAL:
        rel = (p - A) / direction
        if abs(rel.imag) < 1e-12 and -1e-12 <= rel.real <= abs(B - A) + 1e-12:
            hits.append((rel.real, p))
    if hits and indent is None:
        raise ValueError("box boundary passes through 0 or 1")
    pieces = []
    start = 0.0
    L = abs(B - A)
    for pos, p in sorted(hits):
        lo, hi = max(pos - indent, 0.0), min(pos + indent, L)
        if lo > start:
            pieces.append(("seg", A + direction * start, A + direction * lo))
        bulge = side * (1j if abs(direction.imag) < 0.5 else 1)
        pieces.append(("arc", p, indent, direction, bulge))
        start = hi
    if start < L:
        pieces.append(("seg", A + direction * start, B))
    return pieces


def _piece_flux(s1, piece, step: float, density: float) -> float:
    if piece[0] == "seg":
        _, A, B = piece
        L = abs(B - A)
        panels = max(2, int(math.ceil(L / density)))
        return _flux_piece(s1, lambda s: A + (B - A) * s, lambda s: (B - A) * np.ones_like(s), 0.0, 1.0, panels, step)
    _, p, rho, direction, bulge = piece
    # semicircle from p - rho*direction to p + rho*direction through p + rho*bulge
    a0 = np.angle(-direction)
    sweep = np.pi if (np.angle(bulge / -direction) > 0) else -np.pi
    gamma = lambda s: p + rho * np.exp(1j * (a0 + sweep * s))
    dgamma = lambda s: 1j * sweep * rho * np.exp(1j * (a0 + sweep * s))
    return _flux_piece(s1, gamma, dgamma, 0.0, 1.0, 16, step)


def box_mass(C, box: tuple[float, float, float, float], step: float = 1e-4,
             indent: float | None = None, density: float = 0.02) -> float:
    """mu_c mass of [x0, x1] x [y0, y1] as (1/2 pi) times the flux of grad G through the boundary.

    A boundary through 0 or 1 is an error unless ``indent`` gives the radius
    of semicircular detours around those points.  The half-disc cut off by a
    detour is shared equally between the two neighbouring boxes by averaging
    both detour directions; mu_c puts non-negligible mass in every
    neighbourhood of t = 1, so a one-sided choice would bias the split.
    """
    x0, x1, y0, y1 = box
    s1 = _state(C) if isinstance(C, HomLift) else ComplexConstant(complex(C))
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    fluxes = []
    for side in (1, -1):
        total = 0.0
        detoured = False
        for A, B in zip(corners, corners[1:] + corners[:1]):
            pieces = _segment_pieces(A, B, indent, side)
            detoured |= any(pc[0] == "arc" for pc in pieces)
            for piece in pieces:
                total += _piece_flux(s1, piece, step, density)
        fluxes.append(total)
        if not detoured:
            break
    mass = sum(fluxes) / len(fluxes) / (2 * math.pi)
    if mass < -1e-6:
        raise ValueError(f"negative box mass {mass:.3e}")
    return max(mass, 0.0)


# -- equidistribution ---------------------------------------------------------

def level_roots(C: HomLift, n: int, precision: float = 1e-14) -> tuple[np.ndarray, np.ndarray]:
    """Roots of the x=0 condition P_n(t, 1), with multiplicities."""
    if n == 1:
        P1 = cached_orbit(C, 1)[0].P
        roots = complex_roots(CoeffPoly(list(reversed(P1.numerators))), precision)
        return np.array([r.value for r in roots]), np.array([r.multiplicity for r in roots])
    roots = new_roots(C, n - 1, "R0", precision)
    return np.array([r.value for r in roots]), 2 * np.array([r.multiplicity for r in roots])


def empirical_potential(roots: np.ndarray, mult: np.ndarray, s: complex) -> float:
    """(1/deg) sum over roots (with multiplicity) of log|s - r|."""
    return float(np.sum(mult * np.log(np.abs(s - roots))) / np.sum(mult))


def _edge_weight(x, lo, hi, tol=1e-12):
    inside = (x > lo + tol) & (x < hi - tol)
    edge = (np.abs(x - lo) <= tol) | (np.abs(x - hi) <= tol)
    return inside * 1.0 + edge * 0.5


def box_fraction(roots: np.ndarray, mult: np.ndarray, box) -> float:
    """Share of roots in the box; boundary points count half per side."""
    x0, x1, y0, y1 = box
    w = _edge_weight(roots.real, x0, x1) * _edge_weight(roots.imag, y0, y1)
    return float(np.sum(w * mult) / np.sum(mult))


def grid_boxes(x0, x1, y0, y1, nx: int, ny: int) -> list[tuple[float, float, float, float]]:
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    return [(float(xs[i]), float(xs[i + 1]), float(ys[j]), float(ys[j + 1])) for j in range(ny) for i in range(nx)]


@dataclass(frozen=True)
class EquidistReport:
    levels: tuple[int, ...]
    probes: tuple[complex, ...]
    errors: dict  # probe -> tuple of e_n over levels
    boxes: tuple = ()
    fractions: tuple = ()
    masses: tuple = ()

    def to_json(self) -> dict:
        return {
            "levels": list(self.levels),
            "e_n": [{"s": f"{s.real:.17g}{s.imag:+.17g}j", "values": [f"{e:.6e}" for e in self.errors[s]]} for s in self.probes],
            "boxes": [
                {"box": [f"{c:.6g}" for c in b], "fraction": f"{f:.6f}", "mass": f"{m:.6f}"}
                for b, f, m in zip(self.boxes, self.fractions, self.masses)
            ],
        }


def equidist_report(C: HomLift, levels, probes, boxes=(), box_level: int | None = None,
                    indent: float | None = 0.05) -> EquidistReport:
    """e_n(s) = |u_n(s) - (G(s,1) - G(1,0))| per level, plus box fractions against box masses."""
    s1 = _state(C)
    G10 = float(degenerate_G(C, "t=inf"))
    probes = tuple(complex(s) for s in probes)
    cache = {}
    for n in levels:
        cache[n] = level_roots(C, n)
    errors = {}
    for s in probes:
        target = escape_arch(s1, s, 1).value - G10
        errors[s] = tuple(abs(empirical_potential(*cache[n], s) - target) for n in levels)
    fractions, masses = (), ()
    if boxes:
        n = box_level if box_level is not None else max(levels)
        if n not in cache:
            cache[n] = level_roots(C, n)
        fractions = tuple(box_fraction(*cache[n], b) for b in boxes)
        masses = tuple(box_mass(C, b, indent=indent) for b in boxes)
    return EquidistReport(tuple(levels), probes, errors, tuple(boxes), fractions, masses)


# -- distinct measures --------------------------------------------------------

@dataclass(frozen=True)
class DistinctReport:
    a: complex
    b: complex
    closed: dict  # name -> (value_a, value_b)
    distinguished: bool
    grid_sup: float

    def to_json(self) -> dict:
        return {
            "a": str(self.a),
            "b": str(self.b),
            "closed": {k: [f"{x:.15g}", f"{y:.15g}"] for k, (x, y) in self.closed.items()},
            "distinguished": self.distinguished,
            "grid_sup": f"{self.grid_sup:.6e}",
        }


def _closed_values(a) -> dict:
    """G_a at (0,1), (1,1), (1,0); exact log-expressions for rational a."""
    if isinstance(a, (int, Fraction)):
        C = lift(MarkedPoint.constant(a))
        return {w: degenerate_G(C, w) for w in ("t=0", "t=1", "t=inf")}
    a = complex(a)
    return {"t=0": 2 * math.log(abs(a)), "t=1": 2 * math.log(abs(1 - a)), "t=inf": 0.0}


def distinct_check(a, b, grid: int = 9, extent: float = 3.0, tol: float = 1e-12) -> DistinctReport:
    """Compare mu_a and mu_b through the exact degenerate values and a grid of G values."""
    va, vb = _closed_values(a), _closed_values(b)
    distinguished = False
    closed = {}
    for k in va:
        x, y = va[k], vb[k]
        if isinstance(x, ExactLog) and isinstance(y, ExactLog):
            differ = (x - y) != ExactLog()
        else:
            differ = abs(float(x) - float(y)) > tol
        distinguished |= differ
        closed[k] = (float(x), float(y))
    xs = np.linspace(-extent, extent, grid)
    T = (xs[:, None] + 1j * xs[None, :] + 0.5).ravel()
    T = T[(np.abs(T) > 1e-9) & (np.abs(T - 1) > 1e-9)]
    sa = _state(lift(MarkedPoint.constant(a))) if isinstance(a, (int, Fraction)) else ComplexConstant(complex(a))
    sb = _state(lift(MarkedPoint.constant(b))) if isinstance(b, (int, Fraction)) else ComplexConstant(complex(b))
    Ga, _, _ = arch_iteration(sa, T, np.ones_like(T))
    Gb, _, _ = arch_iteration(sb, T, np.ones_like(T))
    return DistinctReport(a, b, closed, bool(distinguished), float(np.max(np.abs(Ga - Gb))))
