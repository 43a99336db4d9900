"""Finite-difference oracle for Dunkl operators applied to arbitrary callables.

Only the directional derivative is discretised (central differences); the
reflection part is evaluated exactly from function values.  This oracle
shares no code with the closed-form kernel identities it is used to check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, TooCloseToWall
from .geometry import RootSystemSpec, wall_distance


@dataclass(frozen=True)
class DunklOracleConfig:
    h_rel: float = 1e-5
    guard: float = 10.0
    # nested differencing amplifies rounding by 1/h^2, so T_i T_j uses a wider step
    h_rel_second: float = 3e-5

    def __post_init__(self):
        if not (self.h_rel > 0 and self.h_rel_second > 0):
            raise ConfigError("step must be positive")
        if self.guard < 4:
            raise ConfigError("wall guard factor must be at least 4")

    def step(self, x, second: bool = False):
        x = np.asarray(x, dtype=float)
        rel = self.h_rel_second if second else self.h_rel
        return rel * np.maximum(1.0, np.linalg.norm(x, axis=-1))


def _check_guard(cfg, spec, x, factor, second=False):
    h = cfg.step(x, second)
    if np.any(wall_distance(spec, x) < factor * cfg.guard * h):
        raise TooCloseToWall("probe point too close to a reflecting hyperplane for the oracle")
    return h


def _apply(cfg, spec, f, xi, x, h):
    xi = np.asarray(xi, dtype=float)
    fx = f(x)
    step = h[..., None] * xi
    out = (f(x + step) - f(x - step)) / (2.0 * h)
    for a, alpha in enumerate(spec.roots):
        k = spec.kappa[a]
        c = alpha @ xi
        if k == 0 or c == 0:
            continue
        out = out + 0.5 * k * c * (fx - f(spec.reflect(x, a))) / (x @ alpha)
    return out


def dunkl_apply(cfg: DunklOracleConfig, spec: RootSystemSpec, f, xi, x):
    """T_xi f(x); x may be a single point or a batch (..., N)."""
    x = np.asarray(x, dtype=float)
    h = _check_guard(cfg, spec, x, 1.0)
    return _apply(cfg, spec, f, xi, x, h)


def dunkl_apply_second(cfg: DunklOracleConfig, spec: RootSystemSpec, f, i: int, j: int, x):
    """T_i T_j f(x), the inner application materialised as a callable."""
    x = np.asarray(x, dtype=float)
    n = spec.dimension
    ei, ej = np.eye(n)[i], np.eye(n)[j]
    h = _check_guard(cfg, spec, x, 2.0, second=True)

    def inner(p):
        # keep the outer step on the inner stencil so nested points stay guarded
        hp = np.broadcast_to(h, np.asarray(p).shape[:-1]) if np.ndim(h) else np.full(np.asarray(p).shape[:-1], float(h))
        return _apply(cfg, spec, f, ej, p, hp)

    return _apply(cfg, spec, inner, ei, x, h)
