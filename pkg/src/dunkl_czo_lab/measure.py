"""Dunkl weight and volumes of balls, chamber balls and orbit balls.

The weight is homogeneous of degree gamma = sum kappa, so in polar
coordinates about the origin it factors as rho**gamma * Theta(phi).  Balls in
dimension one are integrated exactly; in dimension two the radial integral
is done in closed form and the angular integral by Gauss-Legendre, split at
every wall ray so the kinks of Theta sit on panel edges.  Dimensions three and
four fall back to stratified Monte Carlo with a seeded counter-based stream.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureFailure
from .geometry import ChamberAtlas, RootSystemSpec
from .quadrature import gauss_legendre

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class MeasureContext:
    spec: RootSystemSpec
    angular_nodes: int = 48
    radial_nodes: int = 24
    mc_samples: int = 200_000
    mc_strata: int = 8
    seed: int = 0
    mc_rel_tol: float = 1e-2

    @property
    def dimension(self) -> int:
        return self.spec.dimension

    @property
    def gamma(self) -> float:
        return float(self.spec.kappa.sum())

    @property
    def homogeneous_dimension(self) -> float:
        return self.dimension + self.gamma

    @property
    def estimator(self) -> str:
        return {1: "exact-1d", 2: "polar-gauss"}.get(self.dimension, "stratified-mc")


def weight(ctx: MeasureContext, x):
    """w(x) = prod over all roots of |<x, alpha>|^kappa(alpha)."""
    x = np.asarray(x, dtype=float)
    dots = np.abs(x @ ctx.spec.roots.T)
    return np.prod(dots ** ctx.spec.kappa, axis=-1)


def ball_volume_model(ctx: MeasureContext, x, r):
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    dots = np.abs(x @ ctx.spec.roots.T)
    return r ** ctx.dimension * np.prod((dots + r[..., None]) ** ctx.spec.kappa, axis=-1)


# ---------------------------------------------------------------- dimension 1

def _weight_const_1d(spec: RootSystemSpec) -> float:
    return float(np.prod(np.abs(spec.roots[:, 0]) ** spec.kappa))


def _primitive_1d(x, gamma):
    return np.sign(x) * np.abs(x) ** (gamma + 1.0) / (gamma + 1.0)


def interval_mass(ctx: MeasureContext, a, b):
    """omega([a, b]) on the line (exact)."""
    g = ctx.gamma
    return _weight_const_1d(ctx.spec) * (_primitive_1d(np.asarray(b, float), g) - _primitive_1d(np.asarray(a, float), g))


def coordinate_interval_mass(k: float, a, b):
    """Mass of [a, b] under one Z_2 factor 2^k |x|^(2k) of a product weight."""
    return 2.0**k * (_primitive_1d(np.asarray(b, float), 2 * k) - _primitive_1d(np.asarray(a, float), 2 * k))


# ---------------------------------------------------------------- dimension 2

def _wall_rays(spec: RootSystemSpec):
    """Angles in [0, 2 pi) of the rays making up the reflecting lines."""
    out = set()
    for alpha in spec.roots:
        th = math.atan2(alpha[1], alpha[0]) + 0.5 * math.pi
        for k in (0, 1):
            out.add(round((th + k * math.pi) % TWO_PI, 14))
    return sorted(out)


def angular_weight(spec: RootSystemSpec, phi):
    """Theta(phi) = prod |<e_phi, alpha>|^kappa."""
    phi = np.asarray(phi, dtype=float)
    e = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    return np.prod(np.abs(e @ spec.roots.T) ** spec.kappa, axis=-1)


def _wrap(a):
    return (a + math.pi) % TWO_PI - math.pi


def polar_nodes(spec: RootSystemSpec, center, r: float, n: int, window=None, breaks=()):
    """Angular quadrature for B(center, r), optionally cut to an angular window.

    Returns (phi, wphi, rho1, rho2): for direction phi the ray from the origin
    meets the ball in [rho1, rho2], and sum wphi * F(phi) approximates the
    angular integral of F.  `breaks` are extra panel edges (angles).
    """
    c = np.asarray(center, dtype=float)
    rc = float(math.hypot(c[0], c[1]))
    pc = math.atan2(c[1], c[0]) if rc > 0 else 0.0
    rays = _wall_rays(spec)
    chunks = []
    if rc < r:
        lo, hi = (0.0, TWO_PI) if window is None else window
        cand = [lo, hi]
        for base in rays + [(pc + math.pi) % TWO_PI] + [b % TWO_PI for b in breaks]:
            for k in range(-2, 3):
                v = base + k * TWO_PI
                if lo < v < hi:
                    cand.append(v)
        cand = np.unique(np.array(cand))
        phi, w = gauss_legendre(cand[:-1], cand[1:], n)
        phi, w = phi.ravel(), w.ravel()
        d = phi - pc
        rho2 = rc * np.cos(d) + np.sqrt(np.maximum(r * r - (rc * np.sin(d)) ** 2, 0.0))
        chunks.append((phi, w, np.zeros_like(phi), rho2))
    else:
        beta = math.asin(min(1.0, r / rc))
        q = r / rc
        if window is None:
            spans = [(-beta, beta)]
        else:
            spans = []
            a0 = _wrap(window[0] - pc)
            width = window[1] - window[0]
            for shift in (-TWO_PI, 0.0, TWO_PI):
                lo, hi = max(a0 + shift, -beta), min(a0 + shift + width, beta)
                if hi > lo:
                    spans.append((lo, hi))
        for lo, hi in spans:
            def to_u(dphi):
                return math.asin(max(-1.0, min(1.0, math.sin(dphi) / q)))

            cand = [to_u(lo), to_u(hi)]
            for ray in list(rays) + list(breaks):
                dv = _wrap(ray - pc)
                if lo < dv < hi:
                    cand.append(to_u(dv))
            cand = np.unique(np.array(cand))
            if len(cand) < 2:
                continue
            u, wu = gauss_legendre(cand[:-1], cand[1:], n)
            u, wu = u.ravel(), wu.ravel()
            su = q * np.sin(u)
            cosd = np.sqrt(np.maximum(1.0 - su * su, 0.0))
            dphi = np.arcsin(su)
            jac = q * np.cos(u) / np.where(cosd > 0, cosd, 1.0)
            half = r * np.cos(u)
            chunks.append((pc + dphi, wu * jac, rc * cosd - half, rc * cosd + half))
    if not chunks:
        z = np.empty(0)
        return z, z, z, z
    return tuple(np.concatenate(parts) for parts in zip(*chunks))


def _chamber_window(atlas: ChamberAtlas):
    """Angular interval [a, b] (b - a < 2 pi) of the fundamental chamber."""
    rays = np.array(_wall_rays(atlas.spec))
    mids = (rays + np.diff(np.append(rays, rays[0] + TWO_PI)) / 2.0)
    for k, m in enumerate(mids):
        if atlas.in_chamber(np.array([math.cos(m), math.sin(m)])):
            hi = rays[k + 1] if k + 1 < len(rays) else rays[0] + TWO_PI
            return float(rays[k]), float(hi)
    raise QuadratureFailure("chamber window not found")


def _ball_volume_2d(ctx, c, r, window=None):
    phi, w, r1, r2 = polar_nodes(ctx.spec, c, r, ctx.angular_nodes, window)
    if phi.size == 0:
        return 0.0
    p = ctx.gamma + 2.0
    return float(np.sum(w * angular_weight(ctx.spec, phi) * (r2**p - r1**p)) / p)


# ------------------------------------------------------------ dimension >= 3

def _stream(ctx: MeasureContext, *key):
    tag = zlib.crc32(np.asarray(key, dtype=float).tobytes())
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([ctx.seed, tag])))


def _mc_ball(ctx: MeasureContext, c, r, f=None, region=None):
    """Stratified MC estimate (and standard error) of int_B f d omega."""
    n_dim = ctx.dimension
    k = ctx.mc_strata if n_dim <= 3 else max(2, ctx.mc_strata // 2)
    cells = k**n_dim
    per = max(2, ctx.mc_samples // cells)
    rng = _stream(ctx, *c, r)
    idx = np.indices((k,) * n_dim).reshape(n_dim, -1).T  # (cells, N)
    u = rng.random((cells, per, n_dim))
    pts = c - r + (2.0 * r / k) * (idx[:, None, :] + u)
    vals = weight(ctx, pts) * (np.sum((pts - c) ** 2, axis=-1) < r * r)
    if f is not None:
        vals = vals * f(pts)
    if region is not None:
        vals = vals * region(pts)
    vol_cell = (2.0 * r / k) ** n_dim
    means = vals.mean(axis=1)
    var = vals.var(axis=1, ddof=1) / per
    est = vol_cell * means.sum()
    err = vol_cell * math.sqrt(var.sum())
    return float(est), float(err)


# ------------------------------------------------------------------ public

def ball_volume(ctx: MeasureContext, x, r, atlas: ChamberAtlas | None = None):
    """omega(B(x, r)), or omega(B(x, r) cap C) when `atlas` is given.

    Accepts a batch of centres (..., N) with r broadcastable to (...).
    """
    x = np.asarray(x, dtype=float)
    r = np.broadcast_to(np.asarray(r, dtype=float), x.shape[:-1])
    if np.any(r <= 0):
        raise ValueError("radius must be positive")
    if ctx.dimension == 1:
        a, b = x[..., 0] - r, x[..., 0] + r
        if atlas is not None:
            # the fundamental chamber on the line is [0, inf)
            a = np.maximum(a, 0.0)
            b = np.maximum(b, 0.0)
        return interval_mass(ctx, a, b)
    flat_x = x.reshape(-1, ctx.dimension)
    flat_r = r.reshape(-1)
    out = np.empty(len(flat_x))
    if ctx.dimension == 2:
        window = _chamber_window(atlas) if atlas is not None else None
        for k, (c, rr) in enumerate(zip(flat_x, flat_r)):
            out[k] = _ball_volume_2d(ctx, c, float(rr), window)
    else:
        region = (lambda p: atlas.in_chamber(p).astype(float)) if atlas is not None else None
        for k, (c, rr) in enumerate(zip(flat_x, flat_r)):
            est, err = _mc_ball(ctx, c, float(rr), region=region)
            if est <= 0 or err > ctx.mc_rel_tol * est:
                raise QuadratureFailure(f"MC volume at {c.tolist()}, r={rr}: rel. error {err / max(est, 1e-300):.3g}")
            out[k] = est
    return out.reshape(x.shape[:-1])


def ball_volume_ci(ctx: MeasureContext, x, r):
    """(estimate, half-width of a 95% interval); the interval is 0 for N <= 2."""
    x = np.asarray(x, dtype=float)
    if ctx.dimension <= 2:
        return float(ball_volume(ctx, x, r)), 0.0
    est, err = _mc_ball(ctx, x, float(r))
    return est, 1.96 * err


def volume_max(ctx: MeasureContext, x, y, r):
    """V(x, y, r) = max(omega(B(x, r)), omega(B(y, r)))."""
    return np.maximum(ball_volume(ctx, x, r), ball_volume(ctx, y, r))


def chamber_volume_max(ctx: MeasureContext, atlas: ChamberAtlas, x, y, r):
    return np.maximum(ball_volume(ctx, x, r, atlas), ball_volume(ctx, y, r, atlas))


def orbit_ball_volume(ctx: MeasureContext, group, x, r):
    """omega of the union of B(sigma x, r) over the group (single centre)."""
    x = np.asarray(x, dtype=float)
    imgs = group.act(x)
    if ctx.dimension == 1:
        from .quadrature import merge_intervals
        ivs = merge_intervals([(float(p[0] - r), float(p[0] + r)) for p in imgs])
        return float(sum(interval_mass(ctx, lo, hi) for lo, hi in ivs))

    # integrate over B(x, r) the weight divided by the number of orbit balls
    # covering each point; the union is the orbit of that ball
    def inv_mult(p):
        return 1.0 / np.sum(np.sum((p[..., None, :] - imgs) ** 2, axis=-1) < r * r, axis=-1)

    # the union's mass is |orbit| * int_{B(x,r)} 1/mult, with |orbit| = # distinct images
    distinct = np.unique(np.round(imgs, 12), axis=0)
    return len(distinct) * integrate_ball(ctx, inv_mult, x, r)


def integrate_ball(ctx: MeasureContext, f, center, r: float, atlas: ChamberAtlas | None = None,
                   radial_breaks=None, n_rad: int | None = None):
    """int_{B(center, r) [cap C]} f d omega for a vectorised callable f.

    In dimension two `radial_breaks(phi)` may return extra radii (per angle)
    at which the integrand has a kink.
    """
    c = np.asarray(center, dtype=float)
    n_rad = n_rad or ctx.radial_nodes
    if ctx.dimension == 1:
        a, b = c[0] - r, c[0] + r
        if atlas is not None:
            a = max(a, 0.0)
        brk = sorted({a, b} | ({0.0} if a < 0 < b else set()) | set(radial_breaks or ()))
        brk = [v for v in brk if a <= v <= b]
        xs, ws = gauss_legendre(np.array(brk[:-1]), np.array(brk[1:]), n_rad)
        pts = xs.reshape(-1, 1)
        return float(np.sum(ws.ravel() * weight(ctx, pts) * f(pts)))
    if ctx.dimension == 2:
        window = _chamber_window(atlas) if atlas is not None else None
        phi, w, r1, r2 = polar_nodes(ctx.spec, c, r, ctx.angular_nodes, window)
        theta = angular_weight(ctx.spec, phi)
        if radial_breaks is None:
            rho, wr = gauss_legendre(r1, r2, n_rad)
        else:
            extra = np.atleast_2d(radial_breaks(phi))
            if extra.shape[0] != phi.size:
                extra = extra.T
            edges = np.sort(np.concatenate([r1[:, None], np.clip(extra, r1[:, None], r2[:, None]), r2[:, None]], axis=1), axis=1)
            rho, wr = gauss_legendre(edges[:, :-1], edges[:, 1:], n_rad)
            rho = rho.reshape(phi.size, -1)
            wr = wr.reshape(phi.size, -1)
        pts = np.stack([rho * np.cos(phi)[:, None], rho * np.sin(phi)[:, None]], axis=-1)
        radial = wr * rho ** (ctx.gamma + 1.0) * f(pts)
        return float(np.sum(w * theta * radial.sum(axis=1)))
    region = (lambda p: atlas.in_chamber(p).astype(float)) if atlas is not None else None
    est, _ = _mc_ball(ctx, c, r, f=f, region=region)
    return est


def volume_rows(ctx: MeasureContext, xs, rs):
    """CSV-ready rows comparing the estimator with the closed-form comparand."""
    rows = []
    tol = 1e-4 if ctx.dimension <= 2 else ctx.mc_rel_tol
    for x, r in zip(np.asarray(xs, dtype=float), np.asarray(rs, dtype=float)):
        est = float(ball_volume(ctx, x, r))
        model = float(ball_volume_model(ctx, x, r))
        rows.append({"x": " ".join(f"{v:.12g}" for v in x), "r": float(r), "estimate": est,
                     "model": model, "ratio": est / model, "estimator": ctx.estimator,
                     "tolerance": tol})
    return rows
