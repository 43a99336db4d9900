"""Carleson testing: wall layers, Gaussian averages, component testing, square functions.

Every Carleson quantity has the shape

    (1 / omega(B)) int_{s_min}^{r} int_B |F_s(x)|^2 d omega(x) ds / s

for a ball B = B(c, r).  The scale integral uses a geometric grid with the
trapezoid rule in log s; the spatial integral over B is exact in dimension
one up to Gauss-Legendre error, polar in dimension two and Monte Carlo
beyond.  Spatial integrals in the *inner* variable y (for Theta_s chi_tau,
Gaussian averages and heat extensions) are taken over orbit windows: for
Z_2^N the set {y in Omega_tau : d(x, y) <= R} sits inside one box per
chamber, whose edges in coordinate i are |x_i| -+ R.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .calculus import DunklOracleConfig, dunkl_apply
from .errors import ConfigError, PreconditionViolated
from .geometry import orbit_distance, wall_distance, wall_layer, z2n
from .heat import heat_eval, heat_Tj, make_heat_context
from .kernels import theta_value
from .lab import Lab
from .measure import (
    _chamber_window,
    _mc_ball,
    _wall_rays,
    ball_volume,
    integrate_ball,
    interval_mass,
    polar_nodes,
    angular_weight,
)
from .quadrature import composite, gauss_legendre
from .symbols import SymbolB

THETA_WINDOW = 12.0     # inner windows reach 12 s in orbit distance
GAUSS_WINDOW = 24.0     # exp(-c u^2) with c = 1/16 is 2e-16 at u = 24
RADII = (0.1, 0.3, 1.0, 3.0, 10.0)
BALL_KINDS = ("deep", "adjacent", "wall")


@dataclass
class CarlesonReport:
    balls: list
    values: list
    sup: float
    settings: dict = field(default_factory=dict)
    refined_sup: float | None = None

    @property
    def drift(self) -> float | None:
        if self.refined_sup is None:
            return None
        if self.sup == 0:
            return 0.0 if self.refined_sup == 0 else math.inf
        return abs(self.refined_sup / self.sup - 1.0)

    def to_dict(self) -> dict:
        d = {"balls": self.balls, "values": [float(v) for v in self.values], "sup": float(self.sup),
             "settings": self.settings}
        if self.refined_sup is not None:
            d["refined_sup"] = float(self.refined_sup)
            d["drift"] = float(self.drift)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


# ------------------------------------------------------------------ grids

def log_scale_grid(lo: float, hi: float, per_decade: int = 16):
    """Geometric nodes on [lo, hi] with trapezoid weights for ds / s."""
    n = max(2, int(math.ceil(per_decade * math.log10(hi / lo))) + 1)
    u = np.linspace(math.log(lo), math.log(hi), n)
    w = np.full(n, u[1] - u[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return np.exp(u), w


def _power_graded(panels: int, power: float = 3.0):
    return np.linspace(0.0, 1.0, panels + 1) ** power


@lru_cache(maxsize=None)
def _unit_breaks(panels: int):
    uni = np.linspace(0.0, 1.0, panels + 1)
    gra = _power_graded(panels)
    uni.setflags(write=False)
    gra.setflags(write=False)
    return uni, gra


def half_line_rule(k: float, lo, hi, panels: int = 24, order: int = 8):
    """Composite rule on [lo, hi] subset of [0, inf), one interval per row.

    Rows whose interval starts at 0 get power-graded panels (the weight
    |y|^(2k) is not smooth there).  Weights include 2^k |y|^(2k).
    Returns nodes and weights of shape (n, panels * order).
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    hi = np.maximum(hi, lo)
    uni, gra = _unit_breaks(panels)
    q = np.where((lo <= 0.0)[:, None], gra[None, :], uni[None, :])
    brk = lo[:, None] + (hi - lo)[:, None] * q
    y, w = gauss_legendre(brk[:, :-1], brk[:, 1:], order)
    y = y.reshape(len(lo), -1)
    w = w.reshape(len(lo), -1)
    if k != 0:
        w = w * 2.0**k * y ** (2.0 * k)
    return y, w


def _signs(lab: Lab, tau: int) -> np.ndarray:
    if not lab.spec.is_product:
        raise ConfigError("orbit windows are implemented for Z_2^N")
    return np.diag(lab.group.elements[tau]).copy()


def _split_rule(k: float, lo, hi, splits, panels: int, order: int):
    """half_line_rule on [lo, hi] with extra panel edges at the per-row points `splits`."""
    edges = np.sort(np.column_stack([lo, np.clip(splits, lo[:, None], hi[:, None]), hi]), axis=1)
    parts = [half_line_rule(k, edges[:, m], edges[:, m + 1], panels, order) for m in range(edges.shape[1] - 1)]
    return np.concatenate([p[0] for p in parts], axis=1), np.concatenate([p[1] for p in parts], axis=1)


def chamber_window_rule(lab: Lab, x, tau: int, radius, panels: int = 24, order: int = 8,
                        clip=None, gap: float = 0.0, splits=None):
    """Nodes and omega-weights covering Omega_tau cap {y : |(|y_i| - |x_i|)| <= radius, all i}.

    x has shape (n, N); the result has shape (n, K^N, N) and (n, K^N) with
    K = panels * order (times the number of pieces when `splits` is given).
    `clip` bounds |y_i| from above.  With gap > 0 the rule covers only the
    part of the window with ||y| - |x|| >= gap (1D).  `splits` (n, m) adds
    panel edges at |y_i| = splits in every coordinate, for integrands with
    kinks there.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n, dim = x.shape
    signs = _signs(lab, tau)
    kap = lab.spec.coordinate_kappa()
    radius = np.broadcast_to(np.asarray(radius, dtype=float), (n,))
    per_y, per_w = [], []
    for i in range(dim):
        a = np.abs(x[:, i])
        lo = np.maximum(a - radius, 0.0)
        hi = a + radius
        if clip is not None:
            hi = np.minimum(hi, clip)
            lo = np.minimum(lo, hi)
        if gap > 0:
            if dim != 1:
                raise ConfigError("gap windows are one-dimensional")
            y1, w1 = half_line_rule(kap[i], lo, np.clip(a - gap, lo, hi), panels, order)
            y2, w2 = half_line_rule(kap[i], np.clip(a + gap, lo, hi), hi, panels, order)
            yy, ww = np.concatenate([y1, y2], axis=1), np.concatenate([w1, w2], axis=1)
        elif splits is not None:
            yy, ww = _split_rule(kap[i], lo, hi, np.atleast_2d(splits), panels, order)
        else:
            yy, ww = half_line_rule(kap[i], lo, hi, panels, order)
        per_y.append(signs[i] * yy)
        per_w.append(ww)
    if dim == 1:
        return per_y[0][:, :, None], per_w[0]
    grids = np.meshgrid(*[np.arange(p.shape[1]) for p in per_y], indexing="ij")
    idx = [g.ravel() for g in grids]
    nodes = np.stack([per_y[i][:, idx[i]] for i in range(dim)], axis=-1)
    weights = np.ones((n, len(idx[0])))
    for i in range(dim):
        weights = weights * per_w[i][:, idx[i]]
    return nodes, weights


def orbit_window_rule(lab: Lab, x, radius, panels: int = 24, order: int = 8, clip=None, splits=None):
    """The chamber rules of every chamber, concatenated along the node axis."""
    parts = [chamber_window_rule(lab, x, tau, radius, panels, order, clip, splits=splits)
             for tau in range(lab.group.order)]
    return np.concatenate([p[0] for p in parts], axis=1), np.concatenate([p[1] for p in parts], axis=1)


def ball_rule_1d(lab: Lab, center: float, r: float, panels: int = 16, order: int = 8, breaks=()):
    """Nodes and omega-weights on [c - r, c + r], power-graded toward the wall at 0."""
    a, b = center - r, center + r
    pieces = sorted({a, b} | {v for v in (0.0, *breaks) if a < v < b})
    xs, ws = [], []
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        q = _power_graded(panels)
        if lo == 0.0:
            brk = lo + (hi - lo) * q
        elif hi == 0.0:
            brk = hi - (hi - lo) * q[::-1]
        else:
            brk = np.linspace(lo, hi, panels + 1)
        x, w = composite(brk, order)
        xs.append(x)
        ws.append(w)
    x = np.concatenate(xs)
    w = np.concatenate(ws) * _line_weight(lab, x)
    return x[:, None], w


def _line_weight(lab: Lab, x):
    return np.prod(np.abs(np.asarray(x)[..., None] * lab.spec.roots[:, 0]) ** lab.spec.kappa, axis=-1)


# ------------------------------------------------------------------ balls

def _interior_direction(lab: Lab):
    """(unit vector into C, unit vector along a wall of C, sin of C's half-opening)."""
    n = lab.dimension
    if lab.spec.is_product:
        u = np.ones(n) / math.sqrt(n)
        wall = np.zeros(n)
        if n > 1:
            wall[1:] = 1.0 / math.sqrt(n - 1)
        return u, wall, 1.0 / math.sqrt(n)
    a, b = _chamber_window(lab.atlas)
    mid = 0.5 * (a + b)
    return np.array([math.cos(mid), math.sin(mid)]), np.array([math.cos(a), math.sin(a)]), math.sin(0.5 * (b - a))


def ball_family(lab: Lab, radii=RADII, kinds=BALL_KINDS):
    """Deep-chamber (wall distance 3r), wall-adjacent (r/2) and wall-centred balls."""
    u, wall, sin_half = _interior_direction(lab)
    out = []
    for kind in kinds:
        for r in radii:
            if kind == "deep":
                c = 3.0 * r / sin_half * u
            elif kind == "adjacent":
                c = 0.5 * r / sin_half * u
            elif kind == "wall":
                c = 3.0 * r * wall
            else:
                raise ValueError(f"unknown ball kind {kind!r}")
            out.append({"kind": kind, "center": [float(v) for v in c], "radius": float(r)})
    return out


# ------------------------------------------------------------------ wall layers

def _wall_sine(spec, phi):
    """min over walls of |sin(phi - wall angle)|, i.e. delta_W(e_phi)."""
    e = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    return wall_distance(spec, e)


def _layer_breaks(lab: Lab, c, r: float, width: float) -> list:
    """Angles at which the radial limits of the layer change form, plus grading.

    Along the ray at angle phi the layer is rho <= width / delta_W(e_phi),
    which crosses the ball's entry and exit radii at isolated angles close to
    each wall ray.  Those crossings are located by root finding; geometric
    panels toward each ray resolve the power-law angular weight.
    """
    rc = float(np.hypot(c[0], c[1]))
    pc = math.atan2(c[1], c[0]) if rc > 0 else 0.0

    def radii(phi):
        d = phi - pc
        root = math.sqrt(max(r * r - (rc * math.sin(d)) ** 2, 0.0))
        return rc * math.cos(d) - root, rc * math.cos(d) + root

    out = []
    reach = rc + r
    steps = width / (4.0 * reach) * 2.0 ** np.arange(0, 60)
    steps = steps[steps < 0.5]
    for ray in _wall_rays(lab.spec):
        for side in (-1.0, 1.0):
            angles = ray + side * steps
            out.extend(angles.tolist())
            for which in (0, 1):
                def g(delta):
                    return radii(ray + side * delta)[which] * math.sin(delta) - width
                vals = [g(v) for v in steps]
                for a, b, ga, gb in zip(steps[:-1], steps[1:], vals[:-1], vals[1:]):
                    if ga * gb < 0:
                        out.append(ray + side * brentq(g, a, b, xtol=1e-15))
    return out


def layer_mass(lab: Lab, center, r: float, width: float) -> float:
    """omega(B(center, r) cap {delta_W <= width})."""
    c = np.asarray(center, dtype=float)
    ctx = lab.measure
    if lab.dimension == 1:
        a, b = c[0] - r, c[0] + r
        lo, hi = max(a, -width), min(b, width)
        return float(interval_mass(ctx, lo, hi)) if hi > lo else 0.0
    if lab.dimension == 2:
        phi, w, r1, r2 = polar_nodes(lab.spec, c, r, ctx.angular_nodes, breaks=_layer_breaks(lab, c, r, width))
        sn = _wall_sine(lab.spec, phi)
        cap = np.where(sn > 0, width / np.where(sn > 0, sn, 1.0), np.inf)
        top = np.minimum(r2, cap)
        p = ctx.gamma + 2.0
        return float(np.sum(w * angular_weight(lab.spec, phi) * np.maximum(top**p - r1**p, 0.0)) / p)
    est, _ = _mc_ball(ctx, c, r, f=lambda p: (wall_distance(lab.spec, p) <= width).astype(float))
    return est


def wall_layer_measure_check(lab: Lab, center, r: float, lambdas=None) -> dict:
    """omega(B cap {delta_W <= lambda r}) / omega(B) on a lambda grid, with a log-log slope."""
    lambdas = np.geomspace(1e-3, 1e-1, 9) if lambdas is None else np.asarray(lambdas, dtype=float)
    if np.any((lambdas <= 0) | (lambdas > 1)):
        raise PreconditionViolated("lambda must lie in (0, 1]")
    vol = float(ball_volume(lab.measure, np.asarray(center, dtype=float), r))
    ratios = np.array([layer_mass(lab, center, r, lam * r) / vol for lam in lambdas])
    live = ratios > 0
    slope = float(np.polyfit(np.log(lambdas[live]), np.log(ratios[live]), 1)[0]) if live.sum() >= 2 else math.nan
    return {"center": [float(v) for v in np.atleast_1d(center)], "radius": float(r),
            "lambdas": lambdas.tolist(), "ratios": ratios.tolist(), "slope": slope,
            "estimator": lab.measure.estimator}


def _layer_profile(delta, r):
    """int_0^r m_s(x)^2 ds / s as a function of delta = delta_W(x)."""
    delta = np.asarray(delta, dtype=float)
    with np.errstate(divide="ignore"):
        inner = 0.5 + np.log(r / np.maximum(delta, 1e-300))
        outer = 0.5 * (r / np.where(delta > 0, delta, 1.0)) ** 2
    return np.where(delta >= r, outer, inner)


def wall_layer_carleson(lab: Lab, center, r: float, per_decade: int = 16, decades: float = 4.0,
                        method: str = "grid", panels: int = 16) -> float:
    """(1/omega(B)) int_0^r int_B m_s^2 d omega ds/s.

    method="grid" integrates over the geometric s-grid on [r 10^-decades, r];
    method="exact" uses the closed form of the s-integral (from 0) per point.
    """
    c = np.asarray(center, dtype=float)
    vol = float(ball_volume(lab.measure, c, r))
    if method == "exact":
        f = lambda p: _layer_profile(wall_distance(lab.spec, p), r)  # noqa: E731
        if lab.dimension == 1:
            x, w = ball_rule_1d(lab, float(c[0]), r, panels, breaks=(-r, r))
            return float(np.sum(w * f(x))) / vol
        return _integrate_over_ball(lab, f, c, r, panels) / vol
    if method != "grid":
        raise ValueError(f"unknown method {method!r}")
    s, ws = log_scale_grid(r * 10.0**-decades, r, per_decade)
    total = 0.0
    for sk, wk in zip(s, ws):
        f = lambda p, sk=sk: wall_layer(lab.spec, sk, p) ** 2  # noqa: E731
        if lab.dimension == 1:
            x, w = ball_rule_1d(lab, float(c[0]), r, panels, breaks=(-sk, sk))
            val = float(np.sum(w * f(x)))
        elif lab.dimension == 2:
            val = integrate_ball(lab.measure, f, c, r,
                                 radial_breaks=lambda phi, sk=sk: sk / np.maximum(_wall_sine(lab.spec, phi), 1e-300))
        else:
            val = integrate_ball(lab.measure, f, c, r)
        total += wk * val
    return total / vol


def _integrate_over_ball(lab: Lab, f, c, r, panels=16):
    if lab.dimension == 1:
        x, w = ball_rule_1d(lab, float(c[0]), r, panels)
        return float(np.sum(w * f(x)))
    return integrate_ball(lab.measure, f, c, r)


def wall_layer_majorant(lab: Lab, center, r: float) -> float:
    """1/2 (r / (delta - r))^2 for a ball whose centre has delta_W(center) = delta > r."""
    delta = float(wall_distance(lab.spec, np.asarray(center, dtype=float)))
    if delta <= r:
        raise PreconditionViolated("the ball must stay away from the walls")
    return 0.5 * (r / (delta - r)) ** 2


# ------------------------------------------------------------------ Gaussian averages

def gaussian_average(lab: Lab, s: float, F, x, panels: int = 24, order: int = 8) -> np.ndarray:
    """G_s F(x) = int V(x, y, s)^-1 exp(-c d(x, y)^2 / s^2) F(y) d omega(y), batched over x."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    # V(x, y, s) switches branch where omega(B(y, s)) = omega(B(x, s)), which on
    # the line is |y| = |x|; omega(B(y, s)) itself kinks where the ball meets
    # the wall, |y| = s.  Both become panel edges.
    if lab.dimension == 1:
        splits = np.column_stack([np.abs(x[:, 0]), np.full(len(x), s)])
    else:
        splits = np.full((len(x), 1), s)
    y, w = orbit_window_rule(lab, x, GAUSS_WINDOW * s, panels, order, splits=splits)
    d = orbit_distance(lab.group, x[:, None, :], y)
    vx = ball_volume(lab.measure, x, s)[:, None]
    vy = ball_volume(lab.measure, y, s)
    ker = np.exp(-lab.gauss_c * d * d / (s * s)) / np.maximum(vx, vy)
    return np.sum(w * ker * F(y), axis=1)


# ------------------------------------------------------------------ generic Carleson integral

def carleson_integral(lab: Lab, field_fn, center, r: float, per_decade: int = 16, decades: float = 4.0,
                      panels: int = 16) -> float:
    """(1/omega(B)) int_{r 10^-decades}^r int_B |field_fn(s, x)|^2 d omega ds/s."""
    c = np.asarray(center, dtype=float)
    vol = float(ball_volume(lab.measure, c, r))
    s, ws = log_scale_grid(r * 10.0**-decades, r, per_decade)
    total = 0.0
    for sk, wk in zip(s, ws):
        val = _integrate_over_ball(lab, lambda p, sk=sk: np.abs(field_fn(sk, p)) ** 2, c, r, panels)
        total += wk * val
    return total / vol


def _flat_apply(fn, p):
    p = np.asarray(p, dtype=float)
    shape = p.shape[:-1]
    return np.asarray(fn(p.reshape(-1, p.shape[-1]))).reshape(shape)


def theta_chi(lab: Lab, b: SymbolB, s: float, tau: int, i: int, j: int, x, panels: int = 12,
              order: int = 8, transpose: bool = False) -> np.ndarray:
    """Theta_s chi_tau(x) = int_{Omega_tau} theta_s(x, y) d omega(y) (batched).

    With transpose=True the kernel is used as theta_s(y, x), i.e. the adjoint
    applied to chi_tau.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y, w = chamber_window_rule(lab, x, tau, THETA_WINDOW * s, panels, order)
    xb = np.broadcast_to(x[:, None, :], y.shape)
    vals = theta_value(lab, b, s, i, j, y, xb) if transpose else theta_value(lab, b, s, i, j, xb, y)
    return np.sum(w * vals, axis=1)


def _balls_or_default(lab, balls):
    return ball_family(lab) if balls is None else balls


def component_testing(lab: Lab, b: SymbolB, tau: int, balls=None, i: int = 0, j: int = 0,
                      per_decade: int = 16, decades: float = 4.0, panels: int = 8, x_panels: int = 8,
                      refine: bool = False, lip: float | None = None) -> CarlesonReport:
    """Normalised Carleson integrals of |Theta_s chi_tau|^2 over a ball family, divided by lip^2."""
    lab.require_heat()
    balls = _balls_or_default(lab, balls)
    lip = float(b.declared_lipd if lip is None else lip)

    def run(pd, pn, xp):
        vals = []
        for ball in balls:
            fld = lambda s, p: _flat_apply(lambda q: theta_chi(lab, b, s, tau, i, j, q, pn), p)  # noqa: E731
            v = carleson_integral(lab, fld, ball["center"], ball["radius"], pd, decades, xp)
            vals.append(v / lip**2 if lip > 0 else (0.0 if v == 0 else math.inf))
        return vals

    values = run(per_decade, panels, x_panels)
    report = CarlesonReport(balls, values, float(max(values)),
                            {"tau": tau, "i": i, "j": j, "per_decade": per_decade, "decades": decades,
                             "panels": panels, "x_panels": x_panels, "symbol": b.name, "lip": lip})
    if refine:
        report.refined_sup = float(max(run(2 * per_decade, 2 * panels, 2 * x_panels)))
    return report


def adjoint_check(lab: Lab, b: SymbolB, tau: int, s: float, x, i: int = 0, j: int = 0, panels: int = 12) -> float:
    """max |Theta*_{s,b} chi_tau + Theta_{s,conj b} chi_tau| / max |Theta chi_tau| at probes x.

    b is real, so conj b = b; the adjoint is evaluated from the transposed kernel.
    """
    adj = theta_chi(lab, b, s, tau, i, j, x, panels, transpose=True)
    direct = theta_chi(lab, b, s, tau, i, j, x, panels)
    scale = max(float(np.max(np.abs(direct))), 1e-300)
    return float(np.max(np.abs(adj + direct))) / scale


# ------------------------------------------------------------------ heat extensions

def heat_gradient(lab: Lab, g, s: float, ell: int, x, panels: int = 12, order: int = 8,
                  far: float = 0.0) -> np.ndarray:
    """s T_ell H_{s^2} g(x) by orbit-window quadrature (batched over x).

    With far > 0 only the part of g at orbit distance >= far from x
    contributes (one-dimensional only).
    """
    heat = lab.require_heat()
    x = np.atleast_2d(np.asarray(x, dtype=float))
    t = s * s
    parts = []
    for tau in range(lab.group.order):
        y, w = chamber_window_rule(lab, x, tau, far + THETA_WINDOW * s, panels, order, gap=far)
        xb = np.broadcast_to(x[:, None, :], y.shape)
        parts.append(np.sum(w * heat_Tj(heat, t, xb, y, ell) * g(y), axis=1))
    return s * np.sum(parts, axis=0)


def gradient_carleson(lab: Lab, g, g_sup: float, balls=None, ell: int = 0, per_decade: int = 16,
                      decades: float = 4.0, panels: int = 8, x_panels: int = 8,
                      refine: bool = False) -> CarlesonReport:
    """Normalised Carleson integrals of |s T_ell H_{s^2} g|^2, divided by ||g||_inf^2."""
    balls = _balls_or_default(lab, balls)

    def run(pd, pn, xp):
        vals = []
        for ball in balls:
            fld = lambda s, p: _flat_apply(lambda q: heat_gradient(lab, g, s, ell, q, pn), p)  # noqa: E731
            v = carleson_integral(lab, fld, ball["center"], ball["radius"], pd, decades, xp)
            vals.append(v / g_sup**2 if g_sup > 0 else (0.0 if v == 0 else math.inf))
        return vals

    values = run(per_decade, panels, x_panels)
    report = CarlesonReport(balls, values, float(max(values)),
                            {"ell": ell, "per_decade": per_decade, "decades": decades, "panels": panels,
                             "x_panels": x_panels, "g_sup": g_sup})
    if refine:
        report.refined_sup = float(max(run(2 * per_decade, 2 * panels, 2 * x_panels)))
    return report


def gaussian_layer_carleson(lab: Lab, center, r: float, per_decade: int = 16, decades: float = 4.0,
                            panels: int = 16) -> float:
    """(1/omega(B)) int_0^r int_B |G_s m_s|^2 d omega ds/s over the truncated s-grid."""
    def fld(s, p):
        return _flat_apply(lambda q: gaussian_average(lab, s, lambda y: wall_layer(lab.spec, s, y), q), p)

    return carleson_integral(lab, fld, center, r, per_decade, decades, panels)


# ------------------------------------------------------------------ vertical square function

@lru_cache(maxsize=None)
def _line_heat(k: float):
    return make_heat_context(z2n(1, k), validate=False)


def _line_norms(k: float, f, support: float, s: float, derivative: bool, resolution: float,
                order: int = 8) -> float:
    """||s T H_{s^2} f||^2 (derivative=True) or ||H_{s^2} f||^2 on the line with multiplicity k."""
    heat = _line_heat(k)
    reach = support + THETA_WINDOW * s
    wx = max(resolution, 0.5 * s)
    n_side = max(4, int(math.ceil(reach / wx)))
    q = _power_graded(n_side, 2.0)
    xs, wxs = composite(reach * q, order)
    x = np.concatenate([-xs[::-1], xs])
    wts = np.concatenate([wxs[::-1], wxs]) * 2.0**k * np.abs(x) ** (2 * k)
    wy = min(resolution, s)
    length = min(2.0 * THETA_WINDOW * s, support)
    py = max(4, int(math.ceil(length / wy)))
    t = s * s
    u = np.zeros(len(x))
    a = np.abs(x)
    lo = np.minimum(np.maximum(a - THETA_WINDOW * s, 0.0), support)
    hi = np.minimum(a + THETA_WINDOW * s, support)
    yy, ww = half_line_rule(k, lo, hi, py, order)
    for sign in (1.0, -1.0):
        y = sign * yy
        ker = heat_Tj(heat, t, x[:, None, None], y[..., None], 0) * s if derivative else \
            heat_eval(heat, t, x[:, None, None], y[..., None])
        u += np.sum(ww * ker * f(y), axis=1)
    return float(np.sum(wts * u * u))


def vertical_square_function(lab: Lab, factors, supports, ell: int = 0, s_range=(1e-3, 1e3),
                             per_decade: int = 8, resolution: float = 0.1) -> float:
    """int ||s T_ell H_{s^2} f||^2 ds/s / ||f||^2 for a separable f = prod_i factors[i](x_i).

    Each factor is a callable on the line supported in [-supports[i], supports[i]].
    On Z_2^N the heat semigroup factorises, so the squared norm at each scale is
    the derivative factor in coordinate ell times the plain heat factors.
    """
    if not lab.spec.is_product:
        raise ConfigError("the square function check needs Z_2^N")
    kap = lab.spec.coordinate_kappa()
    n = lab.dimension
    factors = list(factors) if isinstance(factors, (list, tuple)) else [factors] * n
    supports = np.broadcast_to(np.asarray(supports, dtype=float), (n,))
    if len(factors) != n:
        raise ConfigError("one factor per coordinate is required")
    norm2 = 1.0
    for i in range(n):
        ys, ws = composite(supports[i] * np.linspace(-1.0, 1.0, 2 * max(8, int(supports[i] / resolution)) + 1))
        norm2 *= float(np.sum(ws * 2.0 ** kap[i] * np.abs(ys) ** (2 * kap[i]) * factors[i](ys) ** 2))
    if norm2 == 0:
        return 0.0
    s, ws = log_scale_grid(s_range[0], s_range[1], per_decade)
    total = 0.0
    for sk, wk in zip(s, ws):
        q = 1.0
        for i in range(n):
            q *= _line_norms(float(kap[i]), factors[i], float(supports[i]), float(sk), i == ell, resolution)
        total += wk * q
    return total / norm2


# ------------------------------------------------------------------ commutator identity

def commutator_identity_residual(lab: Lab, b: SymbolB, s: float, i: int, j: int, phi, box, x,
                                 panels: int = 24, order: int = 8,
                                 oracle: DunklOracleConfig = DunklOracleConfig()):
    """Residual of Theta_s phi = s[M_b, T_i H_{s^2}](T_j phi) - s T_i H_{s^2}((d_j b) phi).

    `phi` is smooth and supported in `box` (a list of (lo, hi) per coordinate,
    away from every wall); T_j phi then lives on the orbit of the box.  All
    three pieces are computed by quadrature over the orbit of the box; T_j phi
    comes from the finite-difference oracle.  Returns (residual, scale) arrays.
    """
    heat = lab.require_heat()
    if b.gradient is None:
        raise PreconditionViolated("the identity needs a differentiable symbol")
    box = np.asarray(box, dtype=float).reshape(lab.dimension, 2)
    axes = [composite(np.linspace(lo, hi, panels + 1), order) for lo, hi in box]
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    wgrid = np.ones_like(grids[0])
    for k, (_, w) in enumerate(axes):
        shape = [1] * lab.dimension
        shape[k] = -1
        wgrid = wgrid * w.reshape(shape)
    base = np.stack([g.ravel() for g in grids], axis=-1)
    base_w = wgrid.ravel()
    if np.any(wall_distance(lab.spec, base) <= 0):
        raise PreconditionViolated("the support box must avoid the walls")
    y = lab.group.act(base).reshape(-1, lab.dimension)
    wy = np.repeat(base_w, lab.group.order)  # act() is point-major
    wy = wy * np.prod(np.abs(y @ lab.spec.roots.T) ** lab.spec.kappa, axis=-1)
    ej = np.eye(lab.dimension)[j]
    tj_phi = dunkl_apply(oracle, lab.spec, phi, ej, y)
    phi_y = phi(y)
    djb = b.gradient(y)[..., j]
    x = np.atleast_2d(np.asarray(x, dtype=float))
    t = s * s
    xb = x[:, None, :]
    bdiff = b(x)[:, None] - b(y)[None, :]
    a_ij = theta_value(lab, b, s, i, j, np.broadcast_to(xb, (len(x),) + y.shape), y)
    term1 = np.sum(wy * a_ij * phi_y, axis=1)
    ti = heat_Tj(heat, t, xb, y[None], i)
    term2 = s * np.sum(wy * bdiff * ti * tj_phi, axis=1)
    term3 = s * np.sum(wy * ti * djb * phi_y, axis=1)
    scale = np.maximum.reduce([np.abs(term1), np.abs(term2), np.abs(term3)])
    return term1 - term2 + term3, scale
