import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dunkl_czo_lab.errors import ConfigError, GroupTooLarge, OnWall
from dunkl_czo_lab.geometry import (
    PRESETS, build_atlas, build_group, dihedral, load_root_system, orbit_distance, preset,
    root_system_from_dict, smoothstep, wall_distance, wall_layer, z2n,
)

ORDERS = {"z2": 2, "z2xz2": 4, "b2": 8, "i2_6": 12}
coord = st.floats(-5, 5, allow_nan=False)


@pytest.mark.parametrize("name", PRESETS)
def test_group_orders_and_closure(name):
    g = build_group(preset(name))
    assert g.order == ORDERS[name]
    np.testing.assert_allclose(g.elements[0], np.eye(g.dimension))
    for a in g.elements:
        np.testing.assert_allclose(a @ a.T, np.eye(g.dimension), atol=1e-12)
        for b in g.elements:
            g.index_of(a @ b)  # raises if the product left the group


@pytest.mark.parametrize("name", PRESETS)
def test_chambers_tile_the_orbit(name, rng):
    atlas = build_atlas(preset(name))
    x = rng.normal(size=(500, atlas.spec.dimension)) * 3
    rho, xs = atlas.chamber_of(x)
    assert np.all(atlas.in_chamber(xs, tol=1e-12))
    back = np.einsum("nij,nj->ni", atlas.group.elements[rho], xs)
    np.testing.assert_allclose(back, x, atol=1e-12)
    # exactly one chamber for points off the walls
    pre = np.einsum("gji,nj->ngi", atlas.group.elements, x)
    counts = np.sum(np.all(pre @ atlas.positive_roots.T > 0, axis=-1), axis=1)
    assert np.all(counts == 1)


def test_positive_system_of_image_chamber():
    atlas = build_atlas(preset("b2"))
    for tau in range(atlas.order):
        x = atlas.group.elements[tau] @ np.array([2.0, 0.3])  # interior of C, mapped
        assert np.all(x @ atlas.positive_system(tau).T > 0)


def test_b2_wall_distance_example():
    spec = preset("b2")
    # walls of B2: x=0, y=0, y=x, y=-x
    x = np.array([3.0, 1.0])
    assert wall_distance(spec, x) == pytest.approx(1.0)
    assert wall_distance(spec, np.array([2.0, 1.5])) == pytest.approx(0.5 / math.sqrt(2))


@settings(max_examples=60, deadline=None)
@given(st.lists(coord, min_size=4, max_size=4), st.integers(0, 7), st.integers(0, 7))
def test_orbit_distance_invariance(v, a, c):
    g = build_group(preset("b2"))
    x, y = np.array(v[:2]), np.array(v[2:])
    d = orbit_distance(g, x, y)
    assert d == pytest.approx(orbit_distance(g, y, x), abs=1e-12)
    assert d == pytest.approx(orbit_distance(g, g.elements[a] @ x, g.elements[c] @ y), abs=1e-12)
    assert d <= np.linalg.norm(x - y) + 1e-12


def test_orbit_distance_z2_closed_form(rng):
    g = build_group(z2n(1, 1.0))
    x, y = rng.normal(size=(2, 100, 1))
    np.testing.assert_allclose(orbit_distance(g, x, y), np.abs(np.abs(x[:, 0]) - np.abs(y[:, 0])))


def test_wall_layer_and_smoothstep():
    spec = z2n(1, 1.0)
    np.testing.assert_allclose(wall_layer(spec, 0.5, np.array([[0.0], [0.25], [2.0]])), [1.0, 1.0, 0.25])
    np.testing.assert_allclose(smoothstep([0.5, 1.0, 1.5, 2.0, 3.0]), [0, 0, 0.5, 1, 1])


def test_cutoff_vanishes_near_walls_and_outside():
    atlas = build_atlas(z2n(2, 1.0))
    s = 0.1
    assert atlas.cutoff(0, s, np.array([0.05, 1.0])) == 0.0
    assert atlas.cutoff(0, s, np.array([1.0, 1.0])) == 1.0
    assert atlas.cutoff(0, s, np.array([-1.0, 1.0])) == 0.0


def test_strict_chamber_rejects_wall_points():
    atlas = build_atlas(preset("z2xz2"))
    with pytest.raises(OnWall):
        atlas.chamber_of(np.array([0.0, 1.0]), strict=True)


def test_invalid_root_systems():
    with pytest.raises(ConfigError):
        dihedral(3, [1.0, 2.0])
    with pytest.raises(ConfigError):
        z2n(2, [-1.0, 1.0])
    with pytest.raises(ConfigError):
        preset("e8")
    with pytest.raises(ConfigError):
        root_system_from_dict({"type": "A2"})


def test_group_cap():
    with pytest.raises(GroupTooLarge):
        build_group(dihedral(12, 1.0), cap=10)


def test_json_round_trip(tmp_path):
    spec = dihedral(4, [1.0, 0.5])
    p = tmp_path / "g.json"
    p.write_text(json.dumps(spec.to_dict()))
    back = load_root_system(p)
    np.testing.assert_allclose(back.roots, spec.roots)
    np.testing.assert_allclose(back.kappa, spec.kappa)
    assert back.homogeneous_dimension == pytest.approx(2 + 4 * 1.0 + 4 * 0.5)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(PRESETS), st.lists(coord, min_size=6, max_size=6))
def test_orbit_distance_triangle_inequality(name, v):
    g = build_group(preset(name))
    x, y, z = np.array(v).reshape(3, 2)[:, : g.dimension]
    assert orbit_distance(g, x, y) <= orbit_distance(g, x, z) + orbit_distance(g, z, y) + 1e-10


def test_cutoff_sandwich_against_exact_profile():
    # on the line, |chi - eta| / m_s at distance u s from the wall is (1 - theta(u)) max(1, u)
    atlas = build_atlas(z2n(1, 1.0))
    s = 0.03
    u = np.linspace(0.01, 3, 3001)
    x = (u * s)[:, None]
    got = np.abs(atlas.chamber_indicator(0, x) - atlas.cutoff(0, s, x)) / wall_layer(atlas.spec, s, x)
    np.testing.assert_allclose(got, (1 - smoothstep(u)) * np.maximum(1, u), atol=1e-12)
    assert got.max() <= 2.0


def test_cutoff_derivative_scale_invariant():
    from dunkl_czo_lab.calculus import DunklOracleConfig, dunkl_apply

    spec = preset("b2")
    atlas = build_atlas(spec)
    x = np.array([[0.3, 0.1], [0.05, 0.02], [0.4, -0.35]])
    vals = []
    for s in (0.1, 0.2):
        xs = x * s / 0.1
        t = dunkl_apply(DunklOracleConfig(), spec, lambda p: atlas.cutoff(0, s, p), [1.0, 0.0], xs)
        vals.append(s * t / wall_layer(spec, s, xs))
    np.testing.assert_allclose(vals[0], vals[1], rtol=1e-6, atol=1e-9)
