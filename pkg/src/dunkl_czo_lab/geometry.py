"""Finite reflection groups, orbit distance and Weyl chamber bookkeeping.

Roots are stored with squared length 2 and both signs are kept, so sums
"over R" run over every root.  Supported families are the sign groups
Z_2^N and the dihedral groups I_2(m).  Group elements are indexed from 0,
with index 0 always the identity.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, GroupTooLarge, OnWall

ROOT_NORM2 = 2.0
DEFAULT_GROUP_CAP = 1024

PRESETS = ("z2", "z2xz2", "b2", "i2_6")


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RootSystemSpec:
    """Roots (rows, |alpha|^2 = 2, closed under negation) and multiplicities."""

    dimension: int
    roots: np.ndarray
    kappa: np.ndarray
    family: str = "custom"
    coxeter_m: int | None = None

    def __post_init__(self):
        roots = _readonly(self.roots).reshape(-1, self.dimension)
        kappa = _readonly(self.kappa).reshape(-1)
        object.__setattr__(self, "roots", roots)
        object.__setattr__(self, "kappa", kappa)
        if len(roots) != len(kappa):
            raise ConfigError("one multiplicity per root is required")
        if np.any(kappa < 0):
            raise ConfigError("multiplicities must be nonnegative")
        if np.any(np.abs(np.sum(roots**2, axis=1) - ROOT_NORM2) > 1e-12):
            raise ConfigError("every root must have squared length 2")
        for a in range(len(roots)):
            for b in range(len(roots)):
                img = self.reflect(roots[b], a)
                k = self._root_index(img)
                if k is None:
                    raise ConfigError("root set is not stable under its reflections")
                if abs(kappa[k] - kappa[b]) > 1e-12:
                    raise ConfigError("multiplicity is not G-invariant")

    def _root_index(self, v):
        d = np.max(np.abs(self.roots - v), axis=1)
        k = int(np.argmin(d))
        return k if d[k] < 1e-9 else None

    @property
    def n_roots(self) -> int:
        return len(self.roots)

    @property
    def homogeneous_dimension(self) -> float:
        return float(self.dimension + self.kappa.sum())

    @property
    def is_product(self) -> bool:
        """True for Z_2^N, where every root is a multiple of a basis vector."""
        return bool(np.all(np.count_nonzero(np.abs(self.roots) > 1e-12, axis=1) == 1))

    def coordinate_kappa(self) -> np.ndarray:
        """Per-coordinate multiplicities of a Z_2^N system."""
        if not self.is_product:
            raise ConfigError("coordinate multiplicities exist only for Z_2^N")
        out = np.zeros(self.dimension)
        for alpha, k in zip(self.roots, self.kappa):
            out[int(np.argmax(np.abs(alpha)))] = k
        return out

    def reflection_matrix(self, a: int) -> np.ndarray:
        alpha = self.roots[a]
        return np.eye(self.dimension) - np.outer(alpha, alpha) * (2.0 / (alpha @ alpha))

    def reflect(self, x, a: int):
        x = np.asarray(x, dtype=float)
        alpha = self.roots[a]
        return x - (2.0 / (alpha @ alpha)) * (x @ alpha)[..., None] * alpha

    def to_dict(self) -> dict:
        if self.family == "Z2^N":
            kappa = self.coordinate_kappa().tolist()
        elif self.family == "I2(m)":
            m = self.coxeter_m
            kappa = [float(self.kappa[0])] if m % 2 else [float(self.kappa[0]), float(self.kappa[1])]
        else:
            kappa = self.kappa.tolist()
        d = {"dimension": self.dimension, "type": self.family, "kappa": kappa}
        if self.family == "I2(m)":
            d["m"] = self.coxeter_m
        return d


def z2n(dimension: int, kappa) -> RootSystemSpec:
    """Z_2^N with one multiplicity per coordinate (roots +-sqrt2 e_i)."""
    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), (dimension,))
    roots, kap = [], []
    for i in range(dimension):
        e = np.zeros(dimension)
        e[i] = math.sqrt(2.0)
        roots += [e, -e]
        kap += [kappa[i], kappa[i]]
    return RootSystemSpec(dimension, np.array(roots), np.array(kap), family="Z2^N")


def dihedral(m: int, kappa) -> RootSystemSpec:
    """I_2(m); for even m `kappa` may give two values (even/odd root orbits)."""
    if m < 2:
        raise ConfigError("I2(m) needs m >= 2")
    kappa = np.atleast_1d(np.asarray(kappa, dtype=float))
    if m % 2 and len(kappa) == 2 and kappa[0] != kappa[1]:
        raise ConfigError("I2(m) with odd m has a single root orbit")
    if len(kappa) == 1:
        kappa = np.array([kappa[0], kappa[0]])
    roots, kap = [], []
    for k in range(2 * m):
        th = math.pi * k / m
        roots.append(math.sqrt(2.0) * np.array([math.cos(th), math.sin(th)]))
        kap.append(kappa[k % 2])
    roots = np.array(roots)
    roots[np.abs(roots) < 1e-15] = 0.0
    return RootSystemSpec(2, roots, np.array(kap), family="I2(m)", coxeter_m=m)


def preset(name: str, kappa=None) -> RootSystemSpec:
    name = name.lower()
    if name == "z2":
        return z2n(1, 1.0 if kappa is None else kappa)
    if name == "z2xz2":
        return z2n(2, 1.0 if kappa is None else kappa)
    if name == "b2":
        return dihedral(4, 1.0 if kappa is None else kappa)
    if name == "i2_6":
        return dihedral(6, 1.0 if kappa is None else kappa)
    if name.startswith("z2^"):
        n = int(name[3:])
        return z2n(n, 1.0 if kappa is None else kappa)
    raise ConfigError(f"unknown root-system preset {name!r}")


def root_system_from_dict(d: dict) -> RootSystemSpec:
    try:
        kind = d["type"]
        kappa = d.get("kappa", [1.0])
        if kind in ("Z2^N", "z2^n"):
            return z2n(int(d["dimension"]), kappa)
        if kind.startswith("I2("):
            m = int(d.get("m", kind[3:-1]))
            if int(d.get("dimension", 2)) != 2:
                raise ConfigError("dihedral systems live in dimension 2")
            return dihedral(m, kappa)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad root-system description: {exc}") from exc
    raise ConfigError(f"unsupported root-system type {d.get('type')!r}")


def load_root_system(path) -> RootSystemSpec:
    with open(Path(path), encoding="utf-8") as fh:
        return root_system_from_dict(json.load(fh))


@dataclass(frozen=True, eq=False)
class ReflectionGroup:
    elements: np.ndarray  # (M, N, N), identity first

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def dimension(self) -> int:
        return self.elements.shape[1]

    def act(self, x):
        """All images sigma x, stacked on a new axis -2: shape (..., M, N)."""
        x = np.asarray(x, dtype=float)
        return np.einsum("gij,...j->...gi", self.elements, x)

    def index_of(self, mat) -> int:
        d = np.max(np.abs(self.elements - mat), axis=(1, 2))
        k = int(np.argmin(d))
        if d[k] > 1e-9:
            raise KeyError("matrix is not a group element")
        return k

    def inverse_index(self, g: int) -> int:
        return self.index_of(self.elements[g].T)


def _key(mat):
    return tuple(np.round(mat, 9).ravel() + 0.0)


def build_group(spec: RootSystemSpec, cap: int = DEFAULT_GROUP_CAP) -> ReflectionGroup:
    gens = []
    seen_gen = set()
    for a in range(spec.n_roots):
        s = spec.reflection_matrix(a)
        k = _key(s)
        if k not in seen_gen:
            seen_gen.add(k)
            gens.append(s)
    ident = np.eye(spec.dimension)
    found = {_key(ident): ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = s @ g
                k = _key(h)
                if k not in found:
                    found[k] = h
                    nxt.append(h)
                    if len(found) > cap:
                        raise GroupTooLarge(f"group closure exceeded {cap} elements")
        frontier = nxt
    ident_key = _key(ident)
    keys = sorted(k for k in found if k != ident_key)
    mats = [ident] + [found[k] for k in keys]
    elements = np.array(mats)
    elements[np.abs(elements) < 1e-15] = 0.0
    elements.setflags(write=False)
    return ReflectionGroup(elements)


def orbit_distance(group: ReflectionGroup, x, y):
    """d(x, y) = min over sigma of |x - sigma y|; broadcasts over leading axes."""
    x = np.asarray(x, dtype=float)
    imgs = group.act(y)
    return np.sqrt(np.min(np.sum((x[..., None, :] - imgs) ** 2, axis=-1), axis=-1))


def wall_distance(spec: RootSystemSpec, x):
    x = np.asarray(x, dtype=float)
    norms = np.sqrt(np.sum(spec.roots**2, axis=1))
    return np.min(np.abs(x @ spec.roots.T) / norms, axis=-1)


def wall_layer(spec: RootSystemSpec, s: float, x):
    """m_s(x) = min(1, s / dist(x, walls)), equal to 1 on the walls."""
    delta = wall_distance(spec, x)
    with np.errstate(divide="ignore"):
        out = np.where(delta > 0, np.minimum(1.0, s / np.where(delta > 0, delta, 1.0)), 1.0)
    return out


def smoothstep(u):
    """theta: 0 on (-inf, 1], 1 on [2, inf), quintic 6v^5 - 15v^4 + 10v^3 between."""
    v = np.clip(np.asarray(u, dtype=float) - 1.0, 0.0, 1.0)
    return v**3 * (v * (6.0 * v - 15.0) + 10.0)


@dataclass(frozen=True, eq=False)
class ChamberAtlas:
    spec: RootSystemSpec
    group: ReflectionGroup
    positive: np.ndarray = field(repr=False)  # indices into spec.roots

    @property
    def order(self) -> int:
        return self.group.order

    @property
    def positive_roots(self) -> np.ndarray:
        return self.spec.roots[self.positive]

    def positive_system(self, tau: int) -> np.ndarray:
        """Roots positive on the interior of Omega_tau = sigma_tau C."""
        return self.positive_roots @ self.group.elements[tau].T

    def in_chamber(self, x, tol: float = 0.0):
        x = np.asarray(x, dtype=float)
        return np.all(x @ self.positive_roots.T >= -tol, axis=-1)

    def chamber_index(self, x, tol: float = 1e-12):
        """Smallest rho with sigma_rho^{-1} x in the closed chamber (vectorised)."""
        x = np.asarray(x, dtype=float)
        pre = np.einsum("gji,...j->...gi", self.group.elements, x)  # sigma^T x
        ok = np.all(pre @ self.positive_roots.T >= -tol, axis=-1)
        return np.argmax(ok, axis=-1)

    def chamber_of(self, x, strict: bool = False, tol: float = 1e-12):
        """Return (rho, x_star) with x = sigma_rho x_star and x_star in C."""
        x = np.asarray(x, dtype=float)
        if strict and np.any(wall_distance(self.spec, x) <= tol):
            raise OnWall(f"point {x.tolist()} lies on a reflecting hyperplane")
        rho = self.chamber_index(x, tol)
        xstar = np.einsum("...ji,...j->...i", self.group.elements[rho], x)
        return rho, xstar

    def chamber_indicator(self, tau: int, x):
        return (self.chamber_index(x) == tau).astype(float)

    def cutoff(self, tau: int, s: float, x):
        """eta_{tau,s}(x) = prod over the positive system of Omega_tau of theta(l/s)."""
        x = np.asarray(x, dtype=float)
        roots = self.positive_system(tau)
        ell = (x @ roots.T) / np.sqrt(np.sum(roots**2, axis=1))
        return np.prod(smoothstep(ell / s), axis=-1)


def build_atlas(spec: RootSystemSpec, group: ReflectionGroup | None = None) -> ChamberAtlas:
    if group is None:
        group = build_group(spec)
    # a regular direction; for Z_2^N this picks the positive orthant, for
    # I_2(m) the cone bisected by it (walls sit at pi/2 + k pi/m)
    if spec.family == "I2(m)":
        m = spec.coxeter_m
        th = math.pi / (2 * m) + (0.0 if m % 2 == 0 else math.pi / 2)
        v = np.array([math.cos(th), math.sin(th)])
    else:
        v = 1.0 + np.arange(spec.dimension) * 1e-3 * math.pi
    vals = spec.roots @ v
    if np.any(np.abs(vals) < 1e-12):
        raise ConfigError("could not find a regular direction for the chamber")
    return ChamberAtlas(spec, group, np.flatnonzero(vals > 0))


def chamber_cutoff(atlas: ChamberAtlas, tau: int, s: float, x):
    return atlas.cutoff(tau, s, x)


def chamber_of(atlas: ChamberAtlas, x, strict: bool = False, tol: float = 1e-12):
    return atlas.chamber_of(x, strict=strict, tol=tol)
