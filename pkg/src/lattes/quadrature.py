"""Integrals over the Riemann sphere of phi(zeta) / |zeta (zeta - 1)(zeta - t)| dA.

The plane is split by a smooth partition of unity

    w_k(zeta) = |zeta - s_k|^{-2m} / sum_i |zeta - s_i|^{-2m}

centred on the singular points s_k (0, 1, t and the log-singularity of phi,
if any).  Each piece is integrated in polar coordinates about its centre with
r = ell * exp(u): the area element r dr dtheta = r^2 du dtheta cancels the 1/r
singularity and turns both the centre and infinity into exponentially
decaying tails, where the trapezoid rule in (u, theta) converges fast.
Resolution doubles until two successive values agree to the tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

U_MIN, U_MAX = -30.0, 36.0


class QuadratureError(RuntimeError):
    def __init__(self, msg: str, value: float, error: float):
        super().__init__(f"{msg} (value {value:.12g}, achieved error {error:.3e})")
        self.value = value
        self.error = error


@dataclass(frozen=True)
class QuadratureSpec:
    tol: float = 1e-8
    m: int = 2
    min_level: int = 2
    max_level: int = 7
    base_u: int = 48
    base_theta: int = 16


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    levels: int


def _centres(t: complex, extra: tuple[complex, ...]) -> list[complex]:
    pts = [0j, 1 + 0j, complex(t)]
    for z in extra:
        z = complex(z)
        if all(abs(z - p) > 1e-14 * max(1, abs(z)) for p in pts):
            pts.append(z)
    return pts


def _length_scales(pts: list[complex]) -> list[float]:
    out = []
    for i, p in enumerate(pts):
        dist = min(abs(p - q) for j, q in enumerate(pts) if j != i)
        out.append(min(1.0, dist))
    return out


def _piece(f: Callable, pts, k: int, ell: float, m: int, nu: int, nth: int) -> float:
    h = (U_MAX - U_MIN) / nu
    u = U_MIN + h * np.arange(nu + 1)
    th = (2 * math.pi / nth) * (np.arange(nth) + 0.5)
    r = ell * np.exp(u)
    zeta = pts[k] + r[:, None] * np.exp(1j * th)[None, :]
    # log-space weights: avoid overflow of |zeta - s|^{-2m} near the centres
    logd = np.stack([np.log(np.abs(zeta - s)) for s in pts])
    own = logd[k]
    others = np.delete(logd, k, axis=0)
    # w_k = 1 / (1 + sum_{i != k} (|zeta - s_k| / |zeta - s_i|)^{2m})
    w = 1.0 / (1.0 + np.exp(2 * m * (own[None] - others)).sum(axis=0))
    vals = f(zeta) * w * (r * r)[:, None]
    trap = np.ones(nu + 1)
    trap[0] = trap[-1] = 0.5
    return float(h * (2 * math.pi / nth) * np.sum(trap[:, None] * vals))


def p1_integral(phi: Callable[[np.ndarray], np.ndarray], t: complex, singular: tuple[complex, ...] = (),
                spec: QuadratureSpec = QuadratureSpec()) -> QuadResult:
    """integral of phi(zeta) / |zeta (zeta-1)(zeta-t)| over the plane, with an error estimate.

    ``singular`` lists extra points where phi has a logarithmic singularity.
    """
    t = complex(t)
    if t == 0 or t == 1:
        raise ValueError(f"degenerate parameter t={t}")
    pts = _centres(t, singular)
    scales = _length_scales(pts)
    f = lambda z: phi(z) / np.abs(z * (z - 1) * (z - t))
    prev = None
    err = math.inf
    for level in range(spec.max_level + 1):
        nu = spec.base_u * 2 ** level
        nth = spec.base_theta * 2 ** level
        val = math.fsum(_piece(f, pts, k, scales[k], spec.m, nu, nth) for k in range(len(pts)))
        if prev is not None:
            err = abs(val - prev)
            if level >= spec.min_level and err <= spec.tol * max(1.0, abs(val)):
                return QuadResult(val, err, level)
        prev = val
    raise QuadratureError("quadrature tolerance not reached", prev, err)
