"""Chamber lifting U f(x) = (f(sigma_1 x), ..., f(sigma_M x)) and lifted kernels.

A function on R^N becomes an M-vector of functions on the fundamental
chamber C.  Orbit singularities of the kernels turn into the ordinary
diagonal x = y of C, because d(sigma_rho x, sigma_tau y) = |x - y| there.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OrbitDiagonal
from .geometry import ChamberAtlas, orbit_distance, wall_distance
from .kernels import TimeQuadrature, integrated_value, theta_value
from .lab import Lab
from .measure import chamber_volume_max, coordinate_interval_mass, weight

WALL_MARGIN = 1e-3
CHECK_CHAMBER_IDENTITY = False  # debug mode: re-verify the chamber identity at every call


@dataclass(frozen=True, eq=False)
class ChamberGrid:
    nodes: np.ndarray    # (n, N), interior of C
    weights: np.ndarray  # omega-mass attached to each node
    spacing: float


@dataclass(frozen=True, eq=False)
class FullGrid:
    """The orbit of a chamber grid: node rho * n + a is sigma_rho applied to chamber node a."""

    nodes: np.ndarray
    weights: np.ndarray
    chamber: ChamberGrid
    order: int


@dataclass(frozen=True, eq=False)
class LiftedFunction:
    grid: ChamberGrid
    values: np.ndarray  # (n, M)

    def norm(self, p: float) -> float:
        a = np.abs(self.values)
        if np.isinf(p):
            return float(a.max()) if a.size else 0.0
        return float(np.sum(self.grid.weights[:, None] * a**p) ** (1.0 / p))


def chamber_grid(lab: Lab, n_per_axis: int, box: float, margin: float = WALL_MARGIN) -> ChamberGrid:
    """Cell-centred grid on C cap [0, box]^N (Z_2^N) or on C cap the box (dihedral).

    Weights are exact cell masses for Z_2^N and midpoint masses otherwise.
    Nodes closer than `margin` to a wall are dropped.
    """
    spec = lab.spec
    n_dim = spec.dimension
    h = box / n_per_axis
    if spec.is_product:
        edges = np.linspace(0.0, box, n_per_axis + 1)
        centers = 0.5 * (edges[:-1] + edges[1:])
        kap = spec.coordinate_kappa()
        axes_w = [coordinate_interval_mass(k, edges[:-1], edges[1:]) for k in kap]
        mesh = np.stack(np.meshgrid(*([centers] * n_dim), indexing="ij"), axis=-1).reshape(-1, n_dim)
        wmesh = np.ones(len(mesh))
        idx = np.stack(np.meshgrid(*([np.arange(n_per_axis)] * n_dim), indexing="ij"), axis=-1).reshape(-1, n_dim)
        for i in range(n_dim):
            wmesh = wmesh * axes_w[i][idx[:, i]]
    else:
        edges = np.linspace(-box, box, 2 * n_per_axis + 1)
        centers = 0.5 * (edges[:-1] + edges[1:])
        mesh = np.stack(np.meshgrid(centers, centers, indexing="ij"), axis=-1).reshape(-1, 2)
        mesh = mesh[lab.atlas.in_chamber(mesh) & (np.linalg.norm(mesh, axis=1) <= box)]
        wmesh = weight(lab.measure, mesh) * h * h
    keep = wall_distance(spec, mesh) > margin
    return ChamberGrid(mesh[keep], wmesh[keep], h)


def full_grid(atlas: ChamberAtlas, grid: ChamberGrid) -> FullGrid:
    imgs = atlas.group.act(grid.nodes)  # (n, M, N)
    nodes = np.transpose(imgs, (1, 0, 2)).reshape(-1, grid.nodes.shape[1])
    weights = np.tile(grid.weights, atlas.order)
    return FullGrid(nodes, weights, grid, atlas.order)


def lift(atlas: ChamberAtlas, f, grid: ChamberGrid) -> LiftedFunction:
    """Component rho at node x is f(sigma_rho x)."""
    imgs = atlas.group.act(grid.nodes)
    return LiftedFunction(grid, np.asarray(f(imgs), dtype=float))


def lift_values(full: FullGrid, values) -> LiftedFunction:
    """Lift a function already sampled on the full grid."""
    v = np.asarray(values, dtype=float).reshape(full.order, -1)
    return LiftedFunction(full.chamber, v.T.copy())


def unlift(full: FullGrid, lifted: LiftedFunction) -> np.ndarray:
    """Values on the full grid (inverse of lift_values)."""
    return lifted.values.T.reshape(-1).copy()


def grid_norm(weights, values, p: float) -> float:
    a = np.abs(np.asarray(values, dtype=float))
    if np.isinf(p):
        return float(a.max()) if a.size else 0.0
    return float(np.sum(np.asarray(weights) * a**p) ** (1.0 / p))


def _reflected(lab: Lab, rho, tau, x, y):
    g = lab.group.elements
    xr = np.einsum("ij,...j->...i", g[rho], np.asarray(x, dtype=float))
    yr = np.einsum("ij,...j->...i", g[tau], np.asarray(y, dtype=float))
    if CHECK_CHAMBER_IDENTITY:
        gap = np.abs(orbit_distance(lab.group, xr, yr) - np.linalg.norm(np.asarray(x) - np.asarray(y), axis=-1))
        if np.any(gap > 1e-10):
            raise AssertionError(f"chamber identity violated by {gap.max():.3g}")
    return xr, yr


def lifted_theta(lab: Lab, b, s: float, i: int, j: int, rho: int, tau: int, x, y):
    """theta_s(sigma_rho x, sigma_tau y) for x, y in C."""
    xr, yr = _reflected(lab, rho, tau, x, y)
    return theta_value(lab, b, s, i, j, xr, yr)


def lifted_theta_ratio(lab: Lab, b, s, i, j, rho, tau, x, y, lip: float):
    """|theta^{rho tau}_s| V_C(x, y, s) exp(c |x-y|^2 / s^2) / lip."""
    v = lifted_theta(lab, b, s, i, j, rho, tau, x, y)
    dist = np.linalg.norm(np.asarray(x) - np.asarray(y), axis=-1)
    vc = chamber_volume_max(lab.measure, lab.atlas, x, y, s)
    return np.abs(v) * vc * np.exp(lab.gauss_c * dist**2 / s**2) / lip


def lifted_K(lab: Lab, b, i: int, j: int, rho: int, tau: int, x, y, quad: TimeQuadrature = TimeQuadrature()):
    """K_b(sigma_rho x, sigma_tau y) for x != y in C."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if np.any(np.linalg.norm(x - y, axis=-1) <= 1e-6):
        raise OrbitDiagonal("lifted kernel is singular on the chamber diagonal")
    xr, yr = _reflected(lab, rho, tau, x, y)
    return integrated_value(lab, b, i, j, xr, yr, quad)


def lifted_K_ratio(lab: Lab, b, i, j, rho, tau, x, y, lip: float, quad=TimeQuadrature()):
    """|K^{rho tau}| V_C(x, y, |x-y|) / lip."""
    v = lifted_K(lab, b, i, j, rho, tau, x, y, quad)
    dist = np.linalg.norm(np.atleast_2d(x) - np.atleast_2d(y), axis=-1)
    return np.abs(v) * chamber_volume_max(lab.measure, lab.atlas, np.atleast_2d(x), np.atleast_2d(y), dist) / lip


def lifted_slice(lab: Lab, b, i, j, x, y, quad=TimeQuadrature()) -> np.ndarray:
    """The M x M matrix of lifted kernel entries at a fixed pair (x, y) in C."""
    m = lab.group.order
    out = np.empty((m, m))
    for rho in range(m):
        for tau in range(m):
            out[rho, tau] = lifted_K(lab, b, i, j, rho, tau, x, y, quad)[0]
    return out
