"""Orbit-Lipschitz symbols b: a small builtin corpus, seminorm sampling, mollification."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import UnknownSymbol
from .geometry import ReflectionGroup, orbit_distance
from .quadrature import gauss_legendre

BUILTIN_SYMBOLS = ("smooth_invariant", "orbit_dist", "coordinate_noninvariant", "constant")
ORBIT_VIOLATION = 1e-8


@dataclass(frozen=True, eq=False)
class SymbolB:
    name: str
    evaluator: Callable
    gradient: Callable | None = None
    declared_lipd: float | None = None  # None means "estimate it"
    invariant: bool = True
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=float))

    def scaled(self, lam: float) -> "SymbolB":
        """The symbol lam * b."""
        ev, gr = self.evaluator, self.gradient
        return replace(
            self,
            name=f"{lam!r}*{self.name}",
            evaluator=lambda x: lam * ev(x),
            gradient=None if gr is None else (lambda x: lam * gr(x)),
            declared_lipd=None if self.declared_lipd is None else abs(lam) * self.declared_lipd,
        )

    def describe(self) -> dict:
        return {"name": self.name, "params": {k: np.asarray(v).tolist() for k, v in self.params.items()}}


def builtin_symbol(name: str, params: dict | None = None, *, dimension: int = 1,
                   group: ReflectionGroup | None = None) -> SymbolB:
    params = dict(params or {})
    if name == "smooth_invariant":
        c = np.broadcast_to(np.asarray(params.get("c", 1.0), dtype=float), (dimension,)).copy()
        params["c"] = c

        def ev(x):
            return np.sqrt(1.0 + x * x) @ c

        def grad(x):
            return c * x / np.sqrt(1.0 + x * x)

        return SymbolB(name, ev, grad, float(np.sum(np.abs(c))), True, params)
    if name == "orbit_dist":
        if group is None:
            raise ValueError("orbit_dist needs the reflection group")
        x0 = np.broadcast_to(np.asarray(params.get("x0", 0.0), dtype=float), (dimension,)).copy()
        params["x0"] = x0
        return SymbolB(name, lambda x: orbit_distance(group, x, x0), None, 1.0, True, params)
    if name == "coordinate_noninvariant":
        return SymbolB(name, lambda x: x[..., 0] * 1.0, lambda x: np.eye(x.shape[-1])[0] + 0.0 * x,
                       None, False, params)
    if name == "constant":
        c = float(params.get("c", 1.0))
        params["c"] = c
        return SymbolB(name, lambda x: np.full(x.shape[:-1], c), lambda x: np.zeros_like(x), 0.0, True, params)
    raise UnknownSymbol(name)


@dataclass
class LipdEstimate:
    value: float  # math.inf when the same-orbit scan fails
    flagged: bool
    pairs: int
    max_orbit_violation: float


def lipd_estimate(b: SymbolB, group: ReflectionGroup, n_pairs: int = 100_000, box: float = 5.0,
                  seed: int = 0, sampler=None) -> LipdEstimate:
    """Empirical sup of |b(x) - b(y)| / d(x, y) plus a same-orbit violation scan.

    Half the pairs are uniform in [-box, box]^N, half are near-orbit pairs
    y = sigma x + noise with log-uniform noise size, which stresses the
    orbit diagonal where the sup is approached.
    """
    rng = np.random.default_rng(seed)
    n = group.dimension
    if sampler is not None:
        x, y = sampler(rng, n_pairs)
    else:
        half = n_pairs // 2
        x1 = rng.uniform(-box, box, (half, n))
        y1 = rng.uniform(-box, box, (half, n))
        x2 = rng.uniform(-box, box, (n_pairs - half, n))
        g = rng.integers(0, group.order, n_pairs - half)
        scale = 10.0 ** rng.uniform(-6, -1, n_pairs - half)
        noise = rng.normal(size=x2.shape)
        noise *= (scale / np.linalg.norm(noise, axis=1))[:, None]
        y2 = np.einsum("kij,kj->ki", group.elements[g], x2) + noise
        x, y = np.vstack([x1, x2]), np.vstack([y1, y2])
    d = orbit_distance(group, x, y)
    keep = d > 1e-8
    ratio = np.abs(b(x[keep]) - b(y[keep])) / d[keep]
    sup = float(ratio.max()) if ratio.size else 0.0

    probe = x[: min(len(x), 2000)]
    imgs = group.act(probe)  # (n, M, N)
    viol = float(np.max(np.abs(b(imgs) - b(probe)[:, None])))
    flagged = viol > ORBIT_VIOLATION
    return LipdEstimate(math.inf if flagged else sup, flagged, int(keep.sum()), viol)


def lipd_seminorm(b: SymbolB, group: ReflectionGroup, sampler=None, n_pairs: int = 100_000,
                  box: float = 5.0, seed: int = 0) -> float:
    return lipd_estimate(b, group, n_pairs=n_pairs, box=box, seed=seed, sampler=sampler).value


def lipd_norm(b: SymbolB, group: ReflectionGroup, **kw) -> float:
    """Declared seminorm when available, else the sampled one."""
    if b.declared_lipd is not None:
        return float(b.declared_lipd)
    return lipd_seminorm(b, group, **kw)


def shell_directions(n: int) -> np.ndarray:
    """Unit directions of the spherical shell rule, closed under coordinate sign flips."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        th = np.arange(16) * (math.pi / 8)
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    base = [np.array([1.0, 2.0, 3.0]), np.array([3.0, 1.0, 2.0])] if n == 3 else [np.arange(1.0, n + 1)]
    out = []
    for v in base:
        v = v / np.linalg.norm(v)
        for signs in itertools.product((1.0, -1.0), repeat=n):
            out.append(v * np.array(signs))
    return np.array(out)


def _bump(u):
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(np.abs(u) < 1, np.exp(-1.0 / (1.0 - u * u)), 0.0)


def mollifier_rule(n: int, eps: float, n_radii: int = 8):
    """Offsets and weights (summing to 1) of the radial mollifier at scale eps."""
    dirs = shell_directions(n)
    rho, wr = gauss_legendre(0.0, eps, n_radii)
    rho, wr = rho.ravel(), wr.ravel()
    wr = wr * rho ** (n - 1) * _bump(rho / eps)
    offsets = (rho[:, None, None] * dirs[None, :, :]).reshape(-1, n)
    weights = np.repeat(wr, len(dirs))
    return offsets, weights / weights.sum()


def mollify(b: SymbolB, eps: float, dimension: int | None = None) -> SymbolB:
    if eps <= 0:
        raise ValueError("mollification scale must be positive")
    n = dimension or int(np.size(b.params.get("c", b.params.get("x0", [0.0])))) or 1
    offsets, weights = mollifier_rule(n, eps)
    ev, gr = b.evaluator, b.gradient

    def ev_eps(x):
        return np.tensordot(ev(x[..., None, :] + offsets), weights, axes=([-1], [0]))

    def grad_eps(x):
        return np.einsum("...kn,k->...n", gr(x[..., None, :] + offsets), weights)

    return replace(b, name=f"mollified[{eps:g}]({b.name})", evaluator=ev_eps, gradient=None if gr is None else grad_eps,
                   params={**b.params, "eps": eps})
