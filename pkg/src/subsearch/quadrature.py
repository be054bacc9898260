"""Deterministic composite Gauss-Legendre quadrature.

All product-path integrals use fixed-order panels (no adaptive subdivision),
so repeated runs produce bit-identical floats. A rule of order ``m`` is exact
for polynomials of degree 2m - 1; the smooth integrands here (powers of partial
moments) converge spectrally, so modest orders with a few hundred panels reach
machine precision.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np


@lru_cache(maxsize=32)
def _gl_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def panel_points(a: float, b: float, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """All nodes and weights for ``panels`` equal panels on [a, b]."""
    x, w = _gl_nodes(order)
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return pts, wts


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    *,
    panels: int = 64,
    order: int = 12,
) -> float:
    """Integral of a vectorized ``f`` over [a, b]."""
    if b == a:
        return 0.0
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0
    pts, wts = panel_points(a, b, panels, order)
    return sign * float(np.dot(np.asarray(f(pts), dtype=float), wts))


def integrate_segmented(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    breakpoints: Iterable[float] = (),
    *,
    panels: int = 64,
    order: int = 12,
) -> float:
    """Like :func:`integrate` but splits at interior breakpoints (density kinks)."""
    if b == a:
        return 0.0
    if b < a:
        return -integrate_segmented(f, b, a, breakpoints, panels=panels, order=order)
    cuts = sorted({float(x) for x in breakpoints if a < x < b})
    edges = [a, *cuts, b]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += integrate(f, lo, hi, panels=panels, order=order)
    return total


def cumulative_on_grid(
    f: Callable[[np.ndarray], np.ndarray],
    grid: Sequence[float] | np.ndarray,
    *,
    order: int = 12,
) -> np.ndarray:
    """Cumulative integral of ``f`` from grid[0] at every grid point.

    One Gauss-Legendre panel per grid cell; cells may be nonuniform.
    """
    g = np.asarray(grid, dtype=float)
    x, w = _gl_nodes(order)
    lo, hi = g[:-1], g[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(f(pts.ravel()), dtype=float).reshape(pts.shape)
    cell = (vals * w[None, :]).sum(axis=1) * half
    out = np.empty_like(g)
    out[0] = 0.0
    np.cumsum(cell, out=out[1:])
    return out


def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    xtol: float = 1e-10,
    f_lo: float | None = None,
    f_hi: float | None = None,
    max_iter: int = 200,
) -> float:
    """Bracketed bisection root of a scalar function; unconditionally convergent.

    Raises ValueError if [lo, hi] is not a sign-change bracket.
    """
    a, b = float(lo), float(hi)
    fa = f(a) if f_lo is None else f_lo
    fb = f(b) if f_hi is None else f_hi
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise ValueError(f"no sign change on bracket [{a}, {b}]: f={fa:.3e}, {fb:.3e}")
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        if b - a <= xtol:
            return m
        fm = f(m)
        if fm == 0.0:
            return m
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b, fb = m, fm
    return 0.5 * (a + b)


_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    xtol: float = 1e-6,
    max_iter: int = 200,
) -> tuple[float, float]:
    """Maximize a unimodal scalar function on [lo, hi]; returns (argmax, value).

    Derivative-free, so kinks (e.g. a regime boundary) are harmless.
    """
    a, b = float(lo), float(hi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    if fc > fd:
        return c, fc
    return d, fd
