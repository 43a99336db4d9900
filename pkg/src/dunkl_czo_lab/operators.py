"""Dense discretisations of the truncated commutators C_{eps,R} and experiments on them.

A grid carries nodes and omega-masses.  The operator acts on nodal values by

    (C f)_a = sum_c w_c (b(x_a) - b(x_c)) I_{eps,R}(x_a, x_c) f_c,
    I_{eps,R}(x, y) = int_eps^R A_t^{ij}(x, y) dt / sqrt(t),

so with W = diag(w) the matrix S = W^(1/2) M W^(-1/2) is skew-symmetric
(I is symmetric, the b-difference antisymmetric).  The time integral uses
Gauss panels in log t with breakpoints at every decade, so a whole ladder of
(eps, R) truncations comes out of one pass over the heat kernel.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import ndtr

from .errors import GridNotSymmetric, GridTooLarge, NoConvergence, SupportsNotSeparated
from .geometry import orbit_distance, wall_distance
from .heat import heat_Aij
from .kernels import TimeQuadrature, integrated_ratio, integrated_value
from .lab import Lab
from .measure import coordinate_interval_mass, weight
from .quadrature import composite, gauss_legendre
from .symbols import SymbolB, builtin_symbol, lipd_estimate

MAX_NODES = 4000
WALL_MARGIN = 1e-3
EPS_LADDER = (1e-1, 1e-2, 1e-3, 1e-4)
R_LADDER = (1e1, 1e2, 1e3, 1e4)


@dataclass(frozen=True, eq=False)
class OperatorGrid:
    nodes: np.ndarray
    weights: np.ndarray
    box: float
    n_per_axis: int

    def __len__(self):
        return len(self.nodes)

    def norm(self, values, p: float) -> float:
        a = np.abs(np.asarray(values, dtype=float))
        if np.isinf(p):
            return float(a.max(axis=-1).max()) if a.size else 0.0
        return float(np.sum(self.weights * a**p) ** (1.0 / p))


def operator_grid(lab: Lab, n_per_axis: int | None = None, box: float = 4.0,
                  margin: float = WALL_MARGIN) -> OperatorGrid:
    """Cell-centred tensor grid on [-box, box]^N with exact omega cell masses.

    Default resolution is 64 nodes (N = 1) or 48 per axis (N = 2); an even
    count keeps the grid closed under every coordinate sign flip.
    """
    n_dim = lab.dimension
    if n_per_axis is None:
        n_per_axis = 64 if n_dim == 1 else 48
    if n_per_axis**n_dim > MAX_NODES:
        raise GridTooLarge(f"{n_per_axis}^{n_dim} nodes exceed the cap of {MAX_NODES}")
    edges = np.linspace(-box, box, n_per_axis + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    mesh = np.stack(np.meshgrid(*([centers] * n_dim), indexing="ij"), axis=-1).reshape(-1, n_dim)
    if lab.spec.is_product:
        kap = lab.spec.coordinate_kappa()
        idx = np.stack(np.meshgrid(*([np.arange(n_per_axis)] * n_dim), indexing="ij"), axis=-1).reshape(-1, n_dim)
        w = np.ones(len(mesh))
        for i, k in enumerate(kap):
            w = w * coordinate_interval_mass(k, edges[:-1], edges[1:])[idx[:, i]]
    else:
        w = weight(lab.measure, mesh) * (edges[1] - edges[0]) ** n_dim
    keep = wall_distance(lab.spec, mesh) > margin
    return OperatorGrid(mesh[keep], w[keep], box, n_per_axis)


@dataclass(frozen=True)
class LadderQuadrature:
    """Gauss panels in log t, `panels` per decade, `order` nodes per panel."""

    panels: int = 3
    order: int = 8

    def rule(self, lo: float, hi: float):
        """Nodes and weights (for dt / sqrt t, in log t) plus the decade index of each node."""
        k0, k1 = round(math.log10(lo)), round(math.log10(hi))
        brk = np.log(10.0) * np.linspace(k0, k1, (k1 - k0) * self.panels + 1)
        u, w = composite(brk, self.order)
        t = np.exp(u)
        decade = np.repeat(np.arange(k1 - k0), self.panels * self.order)
        return t, w * np.sqrt(t), decade, k0


@dataclass(eq=False)
class GridOperator:
    nodes: np.ndarray
    weights: np.ndarray
    matrix: np.ndarray
    metadata: dict = field(default_factory=dict)

    def apply(self, f):
        return np.asarray(f, dtype=float) @ self.matrix.T

    def symmetrized(self) -> np.ndarray:
        """S = W^(1/2) M W^(-1/2); its spectral norm is the L^2(omega) operator norm."""
        r = np.sqrt(self.weights)
        return self.matrix * r[:, None] / r[None, :]

    def scaled(self, lam: float) -> "GridOperator":
        return GridOperator(self.nodes, self.weights, lam * self.matrix, dict(self.metadata))

    # ---------------------------------------------------------- persistence

    def header(self) -> dict:
        return {"metadata": self.metadata, "n": int(len(self.nodes)),
                "dimension": int(self.nodes.shape[1]),
                "nodes": [[float(v) for v in row] for row in self.nodes],
                "weights": [float(v) for v in self.weights]}

    def save(self, stem) -> tuple[Path, Path]:
        """Write <stem>.json (header) and <stem>.csv (matrix rows)."""
        stem = Path(stem)
        js, cs = stem.with_suffix(".json"), stem.with_suffix(".csv")
        js.write_text(json.dumps(self.header(), sort_keys=True, indent=1), encoding="utf-8")
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow([f"c{k}" for k in range(len(self.nodes))])
        for row in self.matrix:
            wr.writerow([repr(float(v)) for v in row])
        cs.write_text(buf.getvalue(), encoding="utf-8")
        return js, cs

    @classmethod
    def load(cls, stem) -> "GridOperator":
        stem = Path(stem)
        head = json.loads(stem.with_suffix(".json").read_text(encoding="utf-8"))
        with open(stem.with_suffix(".csv"), encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))[1:]
        mat = np.array([[float(v) for v in row] for row in rows]).reshape(head["n"], head["n"])
        return cls(np.array(head["nodes"]).reshape(head["n"], head["dimension"]),
                   np.array(head["weights"]), mat, head["metadata"])


def _b_values(b: SymbolB, nodes):
    return np.asarray(b(nodes), dtype=float)


def decade_integrals(lab: Lab, i: int, j: int, xa, yc, eps_min: float, r_max: float,
                     quad: LadderQuadrature = LadderQuadrature(), chunk: int = 32):
    """int over each decade [10^k, 10^(k+1)] in [eps_min, r_max] of A_t(x, y) dt/sqrt t.

    xa (n, N), yc (m, N) -> (n, m, n_decades).
    """
    heat = lab.require_heat()
    t, w, decade, _ = quad.rule(eps_min, r_max)
    n_dec = int(decade.max()) + 1
    onehot = np.zeros((len(t), n_dec))
    onehot[np.arange(len(t)), decade] = w
    out = np.empty((len(xa), len(yc), n_dec))
    for lo in range(0, len(xa), chunk):
        xs = xa[lo:lo + chunk]
        vals = heat_Aij(heat, t[None, None, :], xs[:, None, None, :], yc[None, :, None, :], i, j)
        out[lo:lo + chunk] = vals @ onehot
    return out


def assemble_ladder(lab: Lab, b: SymbolB, i: int, j: int, grid: OperatorGrid,
                    eps_list=EPS_LADDER, r_list=R_LADDER,
                    quad: LadderQuadrature = LadderQuadrature()) -> dict:
    """{(eps, R): GridOperator} for every crossed rung, from a single kernel pass."""
    n = len(grid.nodes)
    if n > MAX_NODES:
        raise GridTooLarge(f"{n} nodes exceed the cap of {MAX_NODES}")
    for v in (*eps_list, *r_list):
        if abs(math.log10(v) - round(math.log10(v))) > 1e-9:
            raise ValueError("ladder truncations must be powers of ten")
    lo, hi = min(eps_list), max(r_list)
    bv = _b_values(b, grid.nodes)
    diff = bv[:, None] - bv[None, :]
    live_rows = np.flatnonzero(np.any(diff != 0, axis=1))
    k0 = round(math.log10(lo))
    n_dec = round(math.log10(hi)) - k0
    dec = np.zeros((n, n, n_dec))
    if live_rows.size:
        # I is symmetric: fill the upper triangle block-row by block-row
        for a in live_rows:
            cols = np.arange(a + 1, n)
            cols = cols[diff[a, cols] != 0]
            if cols.size == 0:
                continue
            vals = decade_integrals(lab, i, j, grid.nodes[a:a + 1], grid.nodes[cols], lo, hi, quad)[0]
            dec[a, cols] = vals
            dec[cols, a] = vals
    cum = np.concatenate([np.zeros((n, n, 1)), np.cumsum(dec, axis=2)], axis=2)
    out = {}
    for eps in eps_list:
        for r in r_list:
            a_idx = round(math.log10(eps)) - k0
            b_idx = round(math.log10(r)) - k0
            integral = cum[:, :, b_idx] - cum[:, :, a_idx]
            mat = diff * integral * grid.weights[None, :]
            np.fill_diagonal(mat, 0.0)
            meta = {"eps": eps, "R": r, "i": i, "j": j, "symbol": b.name,
                    "symbol_params": b.describe()["params"]}
            out[(eps, r)] = GridOperator(grid.nodes, grid.weights, mat, meta)
    return out


def assemble(lab: Lab, b: SymbolB, i: int, j: int, eps: float, r: float, grid: OperatorGrid,
             quad: LadderQuadrature = LadderQuadrature()) -> GridOperator:
    """The single truncation C_{eps,R}; eps and R need not be powers of ten."""
    if not 0 < eps < r:
        raise ValueError("need 0 < eps < R")
    n = len(grid.nodes)
    if n > MAX_NODES:
        raise GridTooLarge(f"{n} nodes exceed the cap of {MAX_NODES}")
    heat = lab.require_heat()
    n_dec = max(1, math.ceil(math.log10(r / eps) - 1e-9))
    brk = np.linspace(math.log(eps), math.log(r), n_dec * quad.panels + 1)
    u, w = composite(brk, quad.order)
    t = np.exp(u)
    w = w * np.sqrt(t)
    bv = _b_values(b, grid.nodes)
    diff = bv[:, None] - bv[None, :]
    integral = np.zeros((n, n))
    for a in range(n):
        cols = np.arange(a + 1, n)
        cols = cols[diff[a, cols] != 0]
        if cols.size == 0:
            continue
        vals = heat_Aij(heat, t[None, :], grid.nodes[a][None, None, :], grid.nodes[cols][:, None, :], i, j) @ w
        integral[a, cols] = vals
        integral[cols, a] = vals
    mat = diff * integral * grid.weights[None, :]
    np.fill_diagonal(mat, 0.0)
    meta = {"eps": eps, "R": r, "i": i, "j": j, "symbol": b.name, "symbol_params": b.describe()["params"]}
    return GridOperator(grid.nodes, grid.weights, mat, meta)


# ------------------------------------------------------------------ norms

def l2_norm(op: GridOperator, tol: float = 1e-8, max_iter: int = 10_000, seed: int = 0) -> float:
    """Largest singular value of S by power iteration on S^T S."""
    s = op.symmetrized()
    if not np.any(s):
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.normal(size=s.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        z = s.T @ (s @ v)
        new = float(np.linalg.norm(z))
        if new == 0:
            return 0.0
        v = z / new
        if abs(new - lam) <= tol * new:
            return math.sqrt(new)
        lam = new
    raise NoConvergence(f"power iteration did not settle in {max_iter} steps")


def skew_defect(op: GridOperator) -> float:
    """max |S + S^T| / max |S|."""
    s = op.symmetrized()
    top = float(np.max(np.abs(s)))
    return float(np.max(np.abs(s + s.T))) / top if top > 0 else 0.0


# ------------------------------------------------------------------ trials

def trial_functions(lab: Lab, nodes, n_trials: int = 200, seed: int = 0, box: float = 4.0,
                    mollify: float = 0.05) -> np.ndarray:
    """A seeded corpus (n_trials, n_nodes): Gaussian bumps, modulated bumps, smoothed chamber indicators.

    Chamber indicators of Z_2^N are smoothed with a Gaussian of width
    `mollify`, which turns each half-space indicator into a normal CDF.
    """
    rng = np.random.default_rng(seed)
    nodes = np.asarray(nodes, dtype=float)
    n_dim = nodes.shape[1]
    out = []
    kinds = ("bump", "modulated", "chamber")
    for k in range(n_trials):
        kind = kinds[k % 3]
        c = rng.uniform(-0.8 * box, 0.8 * box, n_dim)
        width = rng.uniform(0.1, 1.0)
        env = np.exp(-np.sum((nodes - c) ** 2, axis=1) / (2 * width**2))
        if kind == "bump":
            out.append(env)
        elif kind == "modulated":
            freq = rng.uniform(0.0, 8.0, n_dim)
            out.append(env * np.cos(nodes @ freq + rng.uniform(0, 2 * math.pi)))
        else:
            tau = int(rng.integers(lab.group.order))
            if lab.spec.is_product:
                signs = np.diag(lab.group.elements[tau])
                ind = np.prod(ndtr(signs * nodes / mollify), axis=1)
            else:
                ind = lab.atlas.chamber_indicator(tau, nodes)
            out.append(ind * np.exp(-np.sum((nodes - c) ** 2, axis=1) / (2 * (4 * width) ** 2)))
    return np.array(out)


def lp_ratio(op: GridOperator, p: float, trials, lip: float = 1.0) -> float:
    """max over trials of ||C f||_p / ||f||_p (omega-weighted), divided by lip."""
    trials = np.atleast_2d(np.asarray(trials, dtype=float))
    image = op.apply(trials)
    w = op.weights
    if np.isinf(p):
        num = np.max(np.abs(image), axis=1)
        den = np.max(np.abs(trials), axis=1)
    else:
        num = np.sum(w * np.abs(image) ** p, axis=1) ** (1 / p)
        den = np.sum(w * np.abs(trials) ** p, axis=1) ** (1 / p)
    live = den > 0
    if not np.any(live):
        return 0.0
    best = float(np.max(num[live] / den[live]))
    return best / lip if lip > 0 else (0.0 if best == 0 else math.inf)


def ladder_summary(lab: Lab, ops: dict, lip: float, ps=(1.5, 2.0, 3.0), trials=None,
                   spacing: float | None = None) -> dict:
    """Norms and L^p ratios over the crossed ladder plus gaps along the diagonal rungs.

    With `spacing` (the node spacing h) the L^p spreads are also reported over
    the resolved rungs, those whose inner scale sqrt(eps) is at most h/2.  A
    coarser truncation removes the whole near-diagonal part of the grid
    operator, so its L^p ratios measure a different operator.
    """
    rows = []
    for (eps, r), op in sorted(ops.items(), key=lambda kv: (-kv[0][0], kv[0][1])):
        row = {"eps": eps, "R": r, "l2": l2_norm(op) / lip if lip > 0 else 0.0}
        if trials is not None:
            for p in ps:
                row[f"lp_{p:g}"] = lp_ratio(op, p, trials, lip)
        rows.append(row)
    diag = [row for row in rows if abs(math.log10(row["eps"]) + math.log10(row["R"])) < 1e-9]
    diag.sort(key=lambda row: -row["eps"])
    gaps = [abs(b["l2"] - a["l2"]) for a, b in zip(diag[:-1], diag[1:])]
    out = {"rungs": rows, "diagonal": [(row["eps"], row["R"]) for row in diag], "gaps": gaps,
           "sup_l2": max(row["l2"] for row in rows)}
    if trials is not None:
        for p in ps:
            vals = [row[f"lp_{p:g}"] for row in rows]
            out[f"lp_{p:g}_spread"] = _spread(vals)
        if spacing is not None:
            resolved = [row for row in rows if math.sqrt(row["eps"]) <= spacing / 2]
            out["resolved_eps"] = sorted({row["eps"] for row in resolved}, reverse=True)
            for p in ps:
                out[f"lp_{p:g}_resolved_spread"] = _spread([row[f"lp_{p:g}"] for row in resolved])
    return out


def _spread(vals) -> float:
    if not vals or max(vals) <= 0:
        return 0.0
    return (max(vals) - min(vals)) / max(vals)


# ------------------------------------------------------------------ separated pairings

@dataclass(frozen=True)
class Bump:
    """A smooth bump prod_i exp(-1/(1 - u_i^2)), u_i = (x_i - center_i) / half_width."""

    center: tuple
    half_width: float
    amplitude: float = 1.0

    def __call__(self, x):
        u = (np.asarray(x, dtype=float) - np.asarray(self.center)) / self.half_width
        inside = np.all(np.abs(u) < 1, axis=-1)
        with np.errstate(divide="ignore", over="ignore"):
            val = np.exp(-np.sum(1.0 / np.maximum(1.0 - u * u, 1e-300), axis=-1) + u.shape[-1])
        return np.where(inside, self.amplitude * val, 0.0)

    def rule(self, lab: Lab, nodes_per_axis: int = 24):
        """Tensor Gauss rule on the support box with omega weights."""
        axes = []
        for c in self.center:
            x, w = gauss_legendre(c - self.half_width, c + self.half_width, nodes_per_axis)
            axes.append((x.ravel(), w.ravel()))
        grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
        wts = np.meshgrid(*[a[1] for a in axes], indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        w = np.prod(np.stack([g.ravel() for g in wts], axis=-1), axis=-1)
        return pts, w * weight(lab.measure, pts) * self(pts)

    def box_corners(self):
        n_dim = len(self.center)
        signs = np.array(np.meshgrid(*([[-1.0, 1.0]] * n_dim), indexing="ij")).reshape(n_dim, -1).T
        return np.asarray(self.center) + self.half_width * signs


def support_separation(lab: Lab, f: Bump, g: Bump, samples: int = 16) -> float:
    """Orbit distance between the two support boxes (sampled on a fine tensor grid)."""
    def pts(bump):
        axes = [np.linspace(c - bump.half_width, c + bump.half_width, samples) for c in bump.center]
        return np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=-1)

    pf, pg = pts(f), pts(g)
    d = orbit_distance(lab.group, pf[:, None, :], pg[None, :, :])
    return float(d.min())


def pairing_convergence(lab: Lab, b: SymbolB, i: int, j: int, f: Bump, g: Bump,
                        ladder=tuple(zip(EPS_LADDER, R_LADDER)), min_separation: float = 0.5,
                        nodes_per_axis: int = 16, quad: LadderQuadrature = LadderQuadrature(),
                        kernel_quad: TimeQuadrature = TimeQuadrature(panels=256)) -> dict:
    """<C_{eps,R} f, g> along a ladder against the kernel pairing int int K_b f g.

    Both pairings share the spatial rule, so the gap isolates the truncation
    in t.  The kernel side is computed independently with the integrated
    kernel's own time quadrature.
    """
    sep = support_separation(lab, f, g)
    if sep < min_separation:
        raise SupportsNotSeparated(f"support orbit distance {sep:.3g} below {min_separation}")
    yf, wf = f.rule(lab, nodes_per_axis)
    xg, wg = g.rule(lab, nodes_per_axis)
    lo = min(e for e, _ in ladder)
    hi = max(r for _, r in ladder)
    dec = decade_integrals(lab, i, j, xg, yf, lo, hi, quad)
    k0 = round(math.log10(lo))
    cum = np.concatenate([np.zeros(dec.shape[:2] + (1,)), np.cumsum(dec, axis=2)], axis=2)
    diff = _b_values(b, xg)[:, None] - _b_values(b, yf)[None, :]
    xx = np.repeat(xg, len(yf), axis=0)
    yy = np.tile(yf, (len(xg), 1))
    kvals = integrated_value(lab, b, i, j, xx, yy, kernel_quad).reshape(len(xg), len(yf))
    kernel_pairing = float(wg @ kvals @ wf)
    rows = []
    for eps, r in ladder:
        a_idx = round(math.log10(eps)) - k0
        b_idx = round(math.log10(r)) - k0
        integral = cum[:, :, b_idx] - cum[:, :, a_idx]
        pair = float(wg @ (diff * integral) @ wf)
        gap = abs(pair - kernel_pairing)
        rows.append({"eps": eps, "R": r, "pairing": pair, "gap": gap,
                     "relative_gap": gap / (abs(kernel_pairing) + 1e-12)})
    swapped = float(wf @ (-diff.T * (cum[:, :, -1] - cum[:, :, 0]).T) @ wg)
    return {"separation": sep, "kernel_pairing": kernel_pairing, "ladder": rows,
            "swapped_pairing": swapped, "final_pairing": rows[-1]["pairing"]}


# ------------------------------------------------------------------ lifted blocks

@dataclass(eq=False)
class LiftedOperator:
    """Blocks (M, M, n, n): block (rho, tau) maps component tau to component rho."""

    blocks: np.ndarray
    chamber_nodes: np.ndarray
    chamber_weights: np.ndarray
    index: np.ndarray  # (M, n) position of sigma_rho x_a in the full grid

    def apply(self, values):
        """values (n, M) -> (n, M)."""
        return np.einsum("rtab,bt->ar", self.blocks, np.asarray(values, dtype=float))

    def lift(self, full_values):
        return np.asarray(full_values, dtype=float)[self.index].T

    def norm(self, values, p: float) -> float:
        a = np.abs(np.asarray(values, dtype=float))
        if np.isinf(p):
            return float(a.max()) if a.size else 0.0
        return float(np.sum(self.chamber_weights[:, None] * a**p) ** (1.0 / p))

    def block_ratio(self, rho: int, tau: int, p: float, trials) -> float:
        trials = np.atleast_2d(trials)
        img = trials @ self.blocks[rho, tau].T
        w = self.chamber_weights
        if np.isinf(p):
            num, den = np.max(np.abs(img), axis=1), np.max(np.abs(trials), axis=1)
        else:
            num = np.sum(w * np.abs(img) ** p, axis=1) ** (1 / p)
            den = np.sum(w * np.abs(trials) ** p, axis=1) ** (1 / p)
        live = den > 0
        return float(np.max(num[live] / den[live])) if np.any(live) else 0.0


def lifted_operator(op: GridOperator, lab: Lab) -> LiftedOperator:
    nodes = op.nodes
    atlas = lab.atlas
    keys = {tuple(np.round(p, 10)): k for k, p in enumerate(nodes)}
    chamber = np.flatnonzero(np.all(nodes @ atlas.positive_roots.T > 0, axis=1))
    m = atlas.order
    index = np.empty((m, len(chamber)), dtype=int)
    imgs = atlas.group.act(nodes[chamber])  # (n, M, N)
    for a in range(len(chamber)):
        for rho in range(m):
            k = keys.get(tuple(np.round(imgs[a, rho], 10)))
            if k is None:
                raise GridNotSymmetric("grid is not closed under the reflection group")
            index[rho, a] = k
    if index.size != len(nodes) or len(np.unique(index)) != len(nodes):
        raise GridNotSymmetric("grid nodes do not split into full chamber stacks")
    blocks = op.matrix[index[:, None, :, None], index[None, :, None, :]]
    return LiftedOperator(blocks, nodes[chamber], op.weights[chamber], index)


def lifted_block(lab: Lab, b: SymbolB, i: int, j: int, rho: int, tau: int, lifted: LiftedOperator,
                 eps: float, r: float, quad: LadderQuadrature = LadderQuadrature()) -> np.ndarray:
    """Block (rho, tau) assembled directly from the reflected kernel on chamber nodes.

    Entry (a, c) is w_c (b(sigma_rho x_a) - b(sigma_tau x_c)) int_eps^R A_t dt/sqrt t at the
    reflected pair.  On diagonal blocks the entries a = c sit on the full diagonal and are 0.
    """
    x = lifted.chamber_nodes
    g = lab.group.elements
    xr = x @ g[rho].T
    yr = x @ g[tau].T
    vals = decade_integrals(lab, i, j, xr, yr, eps, r, quad).sum(axis=2)
    diff = _b_values(b, xr)[:, None] - _b_values(b, yr)[None, :]
    out = diff * vals * lifted.chamber_weights[None, :]
    if rho == tau:
        np.fill_diagonal(out, 0.0)
    return out


# ------------------------------------------------------------------ negative control

def negative_control(lab: Lab, i: int = 0, j: int = 0, n_per_axis: int | None = None,
                     eps: float = 1e-4, r: float = 1e4, offsets=(1e-1, 1e-2, 1e-3, 1e-4),
                     quad: LadderQuadrature = LadderQuadrature()) -> dict:
    """Compare b(x) = x_1 with the invariant symbol on the three diagnostics.

    * the Lip_d scan must flag x_1 (b(x) != b(sigma_1 x) on a single orbit);
    * K-ratio growth: the largest |K| V / Lip along y = sigma_1 x + u e, u -> 0,
      over the same quantity for the invariant symbol along y = x + u e;
    * l2 drift: the norm ratio between the refined (half spacing) and the base grid.

    Euclidean Lipschitz constants normalise x_1 (its Lip_d is infinite).
    """
    n_dim = lab.dimension
    if n_per_axis is None:
        n_per_axis = 64 if n_dim == 1 else 12
    inv = builtin_symbol("smooth_invariant", dimension=n_dim)
    non = builtin_symbol("coordinate_noninvariant", dimension=n_dim)
    flag = lipd_estimate(non, lab.group, n_pairs=20_000).flagged

    x = np.full((1, n_dim), 1.0)
    e = np.full((1, n_dim), 1.0 / math.sqrt(n_dim))
    refl = x.copy()
    refl[0, 0] = -refl[0, 0]
    ratios_non, ratios_inv = [], []
    for u in offsets:
        ratios_non.append(float(integrated_ratio(lab, non, i, j, x, refl + u * e, 1.0)[0]))
        ratios_inv.append(float(integrated_ratio(lab, inv, i, j, x, x + u * e, inv.declared_lipd)[0]))
    growth = max(ratios_non) / max(ratios_inv)

    norms = {}
    for name, b, lip in (("invariant", inv, inv.declared_lipd), ("noninvariant", non, 1.0)):
        vals = []
        for n in (n_per_axis, 2 * n_per_axis):
            grid = operator_grid(lab, n)
            vals.append(l2_norm(assemble(lab, b, i, j, eps, r, grid, quad)) / lip)
        norms[name] = vals
    inv_drift = abs(norms["invariant"][1] - norms["invariant"][0]) / norms["invariant"][0]
    non_drift = norms["noninvariant"][1] / norms["noninvariant"][0]
    return {"lipd_flagged": bool(flag), "offsets": list(offsets),
            "k_ratio_noninvariant": ratios_non, "k_ratio_invariant": ratios_inv,
            "k_ratio_growth": growth, "l2_invariant": norms["invariant"],
            "l2_noninvariant": norms["noninvariant"], "invariant_drift": inv_drift,
            "noninvariant_drift": non_drift, "n_per_axis": n_per_axis, "eps": eps, "R": r}
