"""Dunkl heat kernel of Z_2^N and its first and second Dunkl derivatives.

The kernel factors over coordinates.  In one variable with multiplicity k
(weight 2^k |x|^(2k)) it is

    h_t(x, y) = exp(-(x^2 + y^2) / 4t) E_k(xy / 2t) / (c_k (2t)^(k + 1/2)),

where E_k is the rank-one Dunkl kernel,

    E_k(z) = Gamma(k + 1/2) (|z|/2)^(1/2 - k) [I_(k-1/2)(|z|) + sgn(z) I_(k+1/2)(|z|)]
           = exp(-|z|) M(k + [z > 0], 2k + 1, 2|z|),

and c_k = 2^(2k + 1/2) Gamma(k + 1/2).  The second (Kummer) form has only
positive terms, so it stays accurate where the Bessel difference cancels.
Everything is evaluated in the log domain with the exp(|z|) growth peeled
off analytically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, hyp1f1

from .errors import ConfigError, DomainError, QuadratureFailure
from .geometry import RootSystemSpec

SERIES_SWITCH = 30.0  # |z| at which the large-argument expansion takes over
_ASYMPTOTIC_TERMS = 40
KERNEL_DIMENSION_CAP = 4


def scaled_log_dunkl_kernel(k: float, z):
    """log E_k(z) - |z| for the rank-one Dunkl kernel (vectorised in z)."""
    z = np.asarray(z, dtype=float)
    az = np.abs(z)
    if k == 0:
        return np.where(z >= 0, 0.0, -2.0 * az)
    w = 2.0 * az
    a = k + (z > 0)
    b = 2.0 * k + 1.0
    out = np.empty(np.broadcast(z).shape)
    small = az <= SERIES_SWITCH
    if np.any(small):
        ws, as_ = w[small], np.broadcast_to(a, z.shape)[small]
        out[small] = np.log(hyp1f1(as_, b, ws)) - ws
    big = ~small
    if np.any(big):
        wb = w[big]
        ab = np.broadcast_to(a, z.shape)[big]
        # M(a, b, w) ~ Gamma(b)/Gamma(a) e^w w^(a-b) sum (1-a)_s (b-a)_s / (s! w^s)
        term = np.ones_like(wb)
        total = np.ones_like(wb)
        live = np.ones(wb.shape, dtype=bool)
        prev = np.abs(term)
        for s in range(_ASYMPTOTIC_TERMS):
            nxt = term * (1.0 - ab + s) * (b - ab + s) / ((s + 1.0) * wb)
            grow = np.abs(nxt) >= prev
            live &= ~grow
            total = total + np.where(live, nxt, 0.0)
            term, prev = nxt, np.abs(nxt)
            if not live.any():
                break
        out[big] = gammaln(b) - gammaln(ab) + (ab - b) * np.log(wb) + np.log(total)
    return out


def log_dunkl_kernel(k: float, z):
    return scaled_log_dunkl_kernel(k, z) + np.abs(np.asarray(z, dtype=float))


def log_normalizer(k: float) -> float:
    """log c_k with c_k = int exp(-x^2/2) 2^k |x|^(2k) dx."""
    return (2.0 * k + 0.5) * math.log(2.0) + float(gammaln(k + 0.5))


def log_heat_1d(k: float, t, x, y):
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gap = np.abs(x) - np.abs(y)
    return (-log_normalizer(k) - (k + 0.5) * np.log(2.0 * t) - gap * gap / (4.0 * t)
            + scaled_log_dunkl_kernel(k, x * y / (2.0 * t)))


@dataclass(frozen=True, eq=False)
class HeatContext:
    """Heat kernel data for a Z_2^N root system."""

    spec: RootSystemSpec
    kappa: np.ndarray = field(init=False)
    log_norms: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.spec.is_product:
            raise ConfigError("exact heat kernels are implemented for Z_2^N only")
        if self.spec.dimension > KERNEL_DIMENSION_CAP:
            raise ConfigError(f"kernel modules support N <= {KERNEL_DIMENSION_CAP}")
        kap = self.spec.coordinate_kappa()
        kap.setflags(write=False)
        object.__setattr__(self, "kappa", kap)
        object.__setattr__(self, "log_norms", np.array([log_normalizer(k) for k in kap]))

    @property
    def dimension(self) -> int:
        return self.spec.dimension

    @property
    def homogeneous_dimension(self) -> float:
        return self.spec.homogeneous_dimension

    def log_heat(self, t, x, y):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise DomainError("heat time must be positive")
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        total = 0.0
        for i, k in enumerate(self.kappa):
            total = total + log_heat_1d(k, t, x[..., i], y[..., i])
        return total


def make_heat_context(spec: RootSystemSpec, validate: bool = True) -> HeatContext:
    """Build a context; with `validate` the mass and derivative identities are checked."""
    ctx = HeatContext(spec)
    if validate:
        validate_heat_context(ctx)
    return ctx


def heat_eval(ctx: HeatContext, t, x, y):
    """h_t(x, y); broadcasts t (...), x (..., N), y (..., N)."""
    return np.exp(ctx.log_heat(t, x, y))


def heat_Tj(ctx: HeatContext, t, x, y, j: int):
    """T_{j,x} h_t(x, y) = (y_j - x_j) / (2t) h_t(x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    return (y[..., j] - x[..., j]) / (2.0 * t) * heat_eval(ctx, t, x, y)


def reflected_coefficients(spec: RootSystemSpec, i: int, j: int):
    """(kappa/2) alpha_i alpha_j / |alpha|^2 for each root (zeros dropped)."""
    roots = spec.roots
    coef = 0.5 * spec.kappa * roots[:, i] * roots[:, j] / np.sum(roots**2, axis=1)
    keep = np.flatnonzero(coef != 0)
    return keep, coef[keep]


def heat_Aij(ctx: HeatContext, t, x, y, i: int, j: int):
    """A_t^{ij}(x, y) = T_{i,x} T_{j,x} h_t(x, y) from the structure formula:

    (y_i - x_i)(y_j - x_j)/(4t^2) h - delta_ij/(2t) h
        - (1/t) sum_alpha (kappa/2) alpha_i alpha_j/|alpha|^2 h_t(sigma_alpha x, y).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    h = heat_eval(ctx, t, x, y)
    out = ((y[..., i] - x[..., i]) * (y[..., j] - x[..., j]) / (4.0 * t * t) - (i == j) / (2.0 * t)) * h
    keep, coef = reflected_coefficients(ctx.spec, i, j)
    for a, cf in zip(keep, coef):
        out = out - cf / t * heat_eval(ctx, t, ctx.spec.reflect(x, a), y)
    return out


def heat_Aij_parts(ctx: HeatContext, t, x, y, i: int, j: int):
    """The three pieces of the structure formula, for diagnostics."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    h = heat_eval(ctx, t, x, y)
    principal = (y[..., i] - x[..., i]) * (y[..., j] - x[..., j]) / (4.0 * t * t) * h
    diagonal = -(i == j) / (2.0 * t) * h
    reflected = np.zeros_like(principal)
    keep, coef = reflected_coefficients(ctx.spec, i, j)
    for a, cf in zip(keep, coef):
        reflected = reflected - cf / t * heat_eval(ctx, t, ctx.spec.reflect(x, a), y)
    return principal, diagonal, reflected


def heat_mass_1d(k: float, t: float, x: float, panels: int = 400, order: int = 8):
    """int h^(1)_t(x, y) 2^k |y|^(2k) dy by composite Gauss on the support window."""
    from .quadrature import composite
    reach = 14.0 * math.sqrt(t)
    ivs = [(x - reach, x + reach), (-x - reach, -x + reach)] if k > 0 else [(x - reach, x + reach)]
    from .quadrature import merge_intervals
    total = 0.0
    for lo, hi in merge_intervals(ivs):
        brk = np.linspace(lo, hi, panels + 1)
        if lo < 0 < hi:
            brk = np.unique(np.append(brk, 0.0))
        ys, ws = composite(brk, order)
        wt = 2.0**k * np.abs(ys) ** (2 * k)
        total += float(np.sum(ws * wt * np.exp(log_heat_1d(k, t, x, ys))))
    return total


def validate_heat_context(ctx: HeatContext, mass_tol: float = 1e-6, deriv_tol: float = 1e-5):
    """Check mass normalisation and the first-derivative identity at fixed probes."""
    from .calculus import DunklOracleConfig, dunkl_apply
    for k in np.unique(ctx.kappa):
        for t in (0.1, 1.0, 10.0):
            for x0 in (0.0, 0.7, -2.0):
                m = heat_mass_1d(float(k), t, x0)
                if abs(m - 1.0) > mass_tol:
                    raise QuadratureFailure(f"heat mass {m!r} at k={k}, t={t}, x={x0}")
    cfg = DunklOracleConfig()
    n = ctx.dimension
    x = 0.4 + 0.3 * np.arange(n)
    y = -0.5 + 0.45 * np.arange(n)
    t = 0.8
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        fd = dunkl_apply(cfg, ctx.spec, lambda p: heat_eval(ctx, t, p, y), e, x)
        ex = float(heat_Tj(ctx, t, x, y, j))
        scale = float(heat_eval(ctx, t, x, y)) / math.sqrt(t)
        if abs(fd - ex) > deriv_tol * max(abs(ex), scale):
            raise QuadratureFailure(f"first-derivative identity failed for j={j}: {fd} vs {ex}")
    return True


def semigroup_residual(ctx: HeatContext, t: float, s: float, x, y, panels: int = 400, order: int = 8) -> float:
    """Relative error of int h_t(x, z) h_s(z, y) d omega(z) = h_{t+s}(x, y).

    The kernel factors over coordinates, so the z-integral is a product of
    one-dimensional integrals, each done by composite Gauss on [-L, L].
    """
    from .quadrature import composite
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    log_lhs = 0.0
    for i, k in enumerate(ctx.kappa):
        reach = max(abs(x[i]), abs(y[i])) + 14.0 * math.sqrt(t + s)
        brk = np.linspace(-reach, reach, panels + 1)
        z, w = composite(np.unique(np.append(brk, 0.0)), order)
        wt = 2.0**k * np.abs(z) ** (2 * k)
        integrand = np.exp(log_heat_1d(k, t, x[i], z) + log_heat_1d(k, s, z, y[i]))
        log_lhs += math.log(float(np.sum(w * wt * integrand)))
    log_rhs = float(ctx.log_heat(t + s, x, y))
    return abs(math.expm1(log_lhs - log_rhs))
