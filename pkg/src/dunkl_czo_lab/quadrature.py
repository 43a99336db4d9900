"""Gauss-Legendre building blocks shared by the integrators."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a, b, n: int):
    """Nodes and weights of the n-point rule on [a, b] (a, b may be arrays)."""
    x, w = _gl(n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite(breaks, order: int = 8):
    """Composite rule over consecutive panels [breaks[k], breaks[k+1]]."""
    breaks = np.asarray(breaks, dtype=float)
    if breaks.size < 2:
        return np.empty(0), np.empty(0)
    x, w = gauss_legendre(breaks[:-1], breaks[1:], order)
    return x.ravel(), w.ravel()


def uniform_breaks(a: float, b: float, width: float):
    n = max(1, int(np.ceil((b - a) / width - 1e-12)))
    return np.linspace(a, b, n + 1)


def graded_breaks(a: float, b: float, scale: float, ratio: float = 2.0, toward: str = "a"):
    """Panels of size scale, scale*ratio, ... growing away from one endpoint.

    Used to resolve layers of width ~scale at a wall sitting at an endpoint.
    """
    length = b - a
    if length <= 0:
        return np.array([a, b])
    if scale >= length:
        return np.array([a, b])
    edges = [0.0]
    h = scale
    while edges[-1] + h < length:
        edges.append(edges[-1] + h)
        h *= ratio
    if length - edges[-1] < 0.25 * (h / ratio) and len(edges) > 1:
        edges[-1] = length
    else:
        edges.append(length)
    edges = np.array(edges)
    if toward == "a":
        return a + edges
    return b - edges[::-1]


def merge_intervals(intervals):
    """Union of closed intervals as a sorted list of disjoint (lo, hi)."""
    out = []
    for lo, hi in sorted(intervals):
        if hi <= lo:
            continue
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out
