"""Scale kernels theta_s, the integrated commutator kernel K_b and their bound ratios.

Normalising constants in front of K_b are set to 1.  Every ratio divides the
kernel by the right-hand side of the corresponding size or regularity
estimate, with the Gaussian exponent fixed at `Lab.gauss_c`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OrbitDiagonal, PreconditionViolated, QuadratureFailure
from .geometry import orbit_distance
from .heat import heat_Aij
from .lab import Lab
from .measure import volume_max
from .quadrature import composite, uniform_breaks
from .symbols import SymbolB

ORBIT_DIAGONAL_EPS = 1e-6


@dataclass(frozen=True)
class TimeQuadrature:
    """Settings for int_0^inf ... dt / sqrt(t) with t = d^2 e^u."""

    half_width: float = 30.0
    panels: int = 512
    order: int = 8
    rtol: float = 1e-7
    max_half_width: float = 240.0

    def refined(self) -> "TimeQuadrature":
        return TimeQuadrature(self.half_width, 2 * self.panels, self.order, self.rtol, self.max_half_width)


@dataclass
class KernelProbe:
    x: np.ndarray
    y: np.ndarray
    scale: float | str
    value: float
    volume: float
    gaussian_factor: float
    lip: float
    ratio: float
    extra: dict = field(default_factory=dict)

    def row(self) -> dict:
        return {"x": " ".join(f"{v:.12g}" for v in np.atleast_1d(self.x)),
                "y": " ".join(f"{v:.12g}" for v in np.atleast_1d(self.y)),
                "scale": self.scale, "value": self.value, "ratio": self.ratio}


def _b_diff(b: SymbolB, x, y):
    return b(x) - b(y)


def theta_value(lab: Lab, b: SymbolB, s, i: int, j: int, x, y):
    """theta_s(x, y) = s (b(x) - b(y)) A_{s^2}^{ij}(x, y), vectorised."""
    heat = lab.require_heat()
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return s * _b_diff(b, x, y) * heat_Aij(heat, s * s, x, y, i, j)


def theta_ratio(lab: Lab, b: SymbolB, s, i, j, x, y, lip: float, value=None):
    """|theta_s| V(x, y, s) exp(c d^2 / s^2) / lip (vectorised)."""
    if value is None:
        value = theta_value(lab, b, s, i, j, x, y)
    d = orbit_distance(lab.group, x, y)
    vol = volume_max(lab.measure, x, y, s)
    return np.abs(value) * vol * np.exp(lab.gauss_c * d * d / (np.asarray(s) ** 2)) / lip


def theta(lab: Lab, b: SymbolB, s: float, i: int, j: int, x, y, lip: float | None = None) -> KernelProbe:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lip = float(b.declared_lipd if lip is None else lip)
    value = float(theta_value(lab, b, s, i, j, x, y))
    d = float(orbit_distance(lab.group, x, y))
    vol = float(volume_max(lab.measure, x, y, s))
    gf = math.exp(-lab.gauss_c * d * d / (s * s))
    ratio = abs(value) * vol / gf / lip if lip > 0 else (0.0 if value == 0 else math.inf)
    return KernelProbe(x, y, float(s), value, vol, gf, lip, ratio)


def _decay_rate(lab: Lab) -> float:
    # for large t the integrand in u = log(t / d^2) decays like exp(-u (1 + N_hom) / 2)
    return 0.5 * (1.0 + lab.spec.homogeneous_dimension)


def heat_time_integral(lab: Lab, i: int, j: int, x, y, quad: TimeQuadrature = TimeQuadrature(),
                       t_range: tuple[float, float] | None = None, chunk: int = 128):
    """int A_t^{ij}(x, y) dt / sqrt(t) over (0, inf) or over `t_range`.

    Batched over pairs.  With t = d^2 e^u the Gaussian shoulder sits at u = 0.
    For the infinite range the upper limit is extended until the power-law
    tail bound drops below rtol of the absolute integral.
    """
    heat = lab.require_heat()
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    x, y = np.broadcast_arrays(x, y)
    d = orbit_distance(lab.group, x, y)
    if t_range is None and np.any(d <= ORBIT_DIAGONAL_EPS):
        raise OrbitDiagonal("integrated kernel needs d(x, y) > 1e-6")
    out = np.empty(len(x))
    width = 2.0 * quad.half_width / quad.panels
    rate = _decay_rate(lab)
    for lo in range(0, len(x), chunk):
        xs, ys, ds = x[lo:lo + chunk], y[lo:lo + chunk], d[lo:lo + chunk]
        if t_range is not None:
            # integrate in log t directly; d only fixes nothing here
            a, bnd = math.log(t_range[0]), math.log(t_range[1])
            u, w = composite(uniform_breaks(a, bnd, width), quad.order)
            t = np.exp(u)[None, :]
            f = heat_Aij(heat, t, xs[:, None, :], ys[:, None, :], i, j) * np.sqrt(t)
            out[lo:lo + chunk] = f @ w
            continue
        upper = quad.half_width
        while True:
            u, w = composite(uniform_breaks(-quad.half_width, upper, width), quad.order)
            t = ds[:, None] ** 2 * np.exp(u)[None, :]
            f = heat_Aij(heat, t, xs[:, None, :], ys[:, None, :], i, j) * np.sqrt(t)
            total = f @ w
            mass = np.abs(f) @ w
            tail = np.abs(f[:, -1]) / rate
            if np.all(tail <= 0.1 * quad.rtol * np.maximum(mass, 1e-300)):
                break
            upper += quad.half_width
            if upper > quad.max_half_width:
                raise QuadratureFailure("heat-time tail bound above tolerance")
        if np.any(np.abs(f[:, 0]) > 1e-3 * quad.rtol * np.maximum(mass, 1e-300)):
            raise QuadratureFailure("integrand not negligible at the small-time end")
        out[lo:lo + chunk] = total
    return out


def integrated_value(lab: Lab, b: SymbolB, i: int, j: int, x, y, quad: TimeQuadrature = TimeQuadrature()):
    """K_b^{ij}(x, y) (normalising constant 1), batched over pairs."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    diff = _b_diff(b, x, y)
    out = np.zeros(np.broadcast(diff).shape)
    live = diff != 0
    if np.any(live):
        xb, yb = np.broadcast_arrays(x, y)
        out[live] = diff[live] * heat_time_integral(lab, i, j, xb[live], yb[live], quad)
    else:
        d = orbit_distance(lab.group, x, y)
        if np.any(d <= ORBIT_DIAGONAL_EPS):
            raise OrbitDiagonal("integrated kernel needs d(x, y) > 1e-6")
    return out


def integrated_kernel(lab: Lab, b: SymbolB, i: int, j: int, x, y, quad: TimeQuadrature = TimeQuadrature(),
                      lip: float | None = None) -> KernelProbe:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lip = float(b.declared_lipd if lip is None else lip)
    value = float(integrated_value(lab, b, i, j, x, y, quad)[0])
    d = float(orbit_distance(lab.group, x, y))
    vol = float(volume_max(lab.measure, x, y, d))
    ratio = abs(value) * vol / lip if lip > 0 else (0.0 if value == 0 else math.inf)
    return KernelProbe(x, y, "integrated", value, vol, 1.0 / vol, lip, ratio, {"d": d})


def integrated_ratio(lab: Lab, b: SymbolB, i, j, x, y, lip: float, quad=TimeQuadrature(), value=None,
                     distance=None):
    """|K_b| V(x, y, d) / lip (vectorised). `distance` may replace d (lifted use)."""
    if value is None:
        value = integrated_value(lab, b, i, j, x, y, quad)
    d = orbit_distance(lab.group, x, y) if distance is None else distance
    return np.abs(value) * volume_max(lab.measure, x, y, d) / lip


def regularity_probe(lab: Lab, b: SymbolB, i: int, j: int, x, xp, y, mode="scale", s: float | None = None,
                     variable: str = "x", lip: float | None = None, quad: TimeQuadrature = TimeQuadrature()):
    """Kernel difference under a perturbation of one variable, over the bound's right side.

    mode="scale": |theta_s(x,y) - theta_s(x',y)| / (lip |x-x'|/s V(x,y,s)^-1 e^{-c d^2/s^2}),
    requires |x - x'| <= s.  mode="integrated": |K(x,y) - K(x',y)| /
    (lip |x-x'|/d V(x,y,d)^-1), requires |x - x'| <= d(x,y)/4.  With
    variable="y" the second argument is perturbed instead (x' plays y').
    Batched over leading axes.
    """
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    y = np.asarray(y, dtype=float)
    lip = float(b.declared_lipd if lip is None else lip)
    step = np.linalg.norm(x - xp, axis=-1) if variable == "x" else np.linalg.norm(y - xp, axis=-1)
    d = orbit_distance(lab.group, x, y)
    if variable == "x":
        pairs = ((x, y), (xp, y))
    else:
        pairs = ((x, y), (x, xp))
    if mode == "scale":
        if s is None:
            raise PreconditionViolated("scale mode needs s")
        if np.any(step > s * (1 + 1e-12)):
            raise PreconditionViolated("perturbation larger than the scale")
        v0 = theta_value(lab, b, s, i, j, *pairs[0])
        v1 = theta_value(lab, b, s, i, j, *pairs[1])
        rhs = lip * step / s / volume_max(lab.measure, x, y, s) * np.exp(-lab.gauss_c * d * d / (s * s))
    elif mode == "integrated":
        if np.any(step > d / 4 * (1 + 1e-12)):
            raise PreconditionViolated("perturbation larger than d(x, y) / 4")
        v0 = integrated_value(lab, b, i, j, *pairs[0], quad)
        v1 = integrated_value(lab, b, i, j, *pairs[1], quad)
        rhs = lip * step / d / volume_max(lab.measure, x, y, d)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    diff = np.abs(v0 - v1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(step > 0, diff / np.where(rhs > 0, rhs, 1.0), 0.0)


def heat_parameter_integral_check(lab: Lab, x, y, delta: float, c: float | None = None,
                                  panels: int = 256, order: int = 8, half_width: float = 40.0):
    """Both sides of the global and perturbative heat-parameter integral bounds.

    global:       r int_0^inf t^-3/2 V(x,y,sqrt t)^-1 e^{-c r^2/t} dt   vs  V(x,y,r)^-1
    perturbative: int_0^{delta^2} t^-3/2 V^-1 e^{-c r^2/t} dt
                  + delta int_{delta^2}^inf t^-2 V^-1 e^{-c r^2/t} dt    vs  delta / (r^2 V(x,y,r))
    """
    c = lab.gauss_c if c is None else c
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = float(orbit_distance(lab.group, x, y))
    if r <= 0:
        raise OrbitDiagonal("need d(x, y) > 0")
    if not 0 < delta <= r / 4 * (1 + 1e-12):
        raise PreconditionViolated("need 0 < delta <= r / 4")

    def vol(sq):
        sq = np.asarray(sq, dtype=float)
        return volume_max(lab.measure, np.broadcast_to(x, sq.shape + x.shape), np.broadcast_to(y, sq.shape + y.shape), sq)

    # t = r^2 e^u; dt = t du
    width = 2 * half_width / panels
    u, w = composite(uniform_breaks(-half_width, half_width, width), order)
    t = r * r * np.exp(u)
    gauss = np.exp(-c * r * r / t)
    v = vol(np.sqrt(t))
    glob = r * float(np.sum(w * t**-1.5 * gauss / v * t))

    u_split = math.log(delta * delta / (r * r))
    u1, w1 = composite(uniform_breaks(-half_width, u_split, width), order)
    t1 = r * r * np.exp(u1)
    part1 = float(np.sum(w1 * t1**-1.5 * np.exp(-c * r * r / t1) / vol(np.sqrt(t1)) * t1))
    u2, w2 = composite(uniform_breaks(u_split, half_width, width), order)
    t2 = r * r * np.exp(u2)
    part2 = delta * float(np.sum(w2 * t2**-2.0 * np.exp(-c * r * r / t2) / vol(np.sqrt(t2)) * t2))
    vr = float(volume_max(lab.measure, x, y, r))
    return {
        "r": r, "delta": delta, "c": c,
        "global_lhs": glob, "global_rhs": 1.0 / vr, "global_ratio": glob * vr,
        "perturbative_lhs": part1 + part2, "perturbative_small_t": part1, "perturbative_large_t": part2,
        "perturbative_rhs": delta / (r * r * vr), "perturbative_ratio": (part1 + part2) * r * r * vr / delta,
    }
