import numpy as np
import pytest

from dunkl_czo_lab.errors import GridNotSymmetric, GridTooLarge, SupportsNotSeparated
from dunkl_czo_lab.geometry import z2n
from dunkl_czo_lab.kernels import TimeQuadrature
from dunkl_czo_lab.lab import make_lab
from dunkl_czo_lab.operators import (
    Bump, GridOperator, assemble, assemble_ladder, l2_norm, ladder_summary, lifted_block, lifted_operator,
    lp_ratio, negative_control, operator_grid, pairing_convergence, skew_defect, trial_functions,
)
from dunkl_czo_lab.symbols import builtin_symbol


@pytest.fixture(scope="module")
def small(lab1):
    b = builtin_symbol("smooth_invariant", dimension=1)
    grid = operator_grid(lab1, 24)
    ops = assemble_ladder(lab1, b, 0, 0, grid, eps_list=(1e-2, 1e-3), r_list=(1e2, 1e3))
    return b, grid, ops


def test_grid_masses_and_symmetry(lab2):
    grid = operator_grid(lab2, 10, box=2.0, margin=0.0)
    # the grid is closed under coordinate sign flips
    keys = {tuple(np.round(p, 12)) for p in grid.nodes}
    assert all(tuple(np.round(-p, 12)) in keys for p in grid.nodes)
    assert len(grid) == 100
    with pytest.raises(GridTooLarge):
        operator_grid(lab2, 80)


def test_ladder_rung_equals_direct_assembly(lab1, small):
    b, grid, ops = small
    direct = assemble(lab1, b, 0, 0, 1e-3, 1e2, grid)
    np.testing.assert_allclose(ops[(1e-3, 1e2)].matrix, direct.matrix, rtol=1e-12, atol=1e-15)


def test_skew_and_power_iteration(small):
    _, _, ops = small
    op = ops[(1e-3, 1e3)]
    assert skew_defect(op) < 1e-12
    svd = np.linalg.norm(op.symmetrized(), 2)
    assert l2_norm(op) == pytest.approx(svd, rel=1e-6)
    assert l2_norm(op.scaled(-2.0)) == pytest.approx(2 * svd, rel=1e-6)


def test_constant_symbol_gives_zero_operator(lab1):
    grid = operator_grid(lab1, 16)
    op = assemble(lab1, builtin_symbol("constant", dimension=1), 0, 0, 1e-2, 1e2, grid)
    assert not np.any(op.matrix) and l2_norm(op) == 0.0


def test_lp_ratio_and_trials(lab1, small):
    _, grid, ops = small
    trials = trial_functions(lab1, grid.nodes, 30, seed=3)
    np.testing.assert_array_equal(trials, trial_functions(lab1, grid.nodes, 30, seed=3))
    op = ops[(1e-3, 1e3)]
    r2 = lp_ratio(op, 2.0, trials)
    assert 0 < r2 <= l2_norm(op) * (1 + 1e-9)
    assert lp_ratio(op.scaled(3.0), 1.5, trials) == pytest.approx(3 * lp_ratio(op, 1.5, trials))


def test_ladder_summary_fields(lab1, small):
    _, grid, ops = small
    trials = trial_functions(lab1, grid.nodes, 12)
    out = ladder_summary(lab1, ops, 1.0, trials=trials, spacing=8.0 / 24)
    assert out["diagonal"] == [(1e-2, 1e2), (1e-3, 1e3)]
    assert len(out["gaps"]) == 1
    assert out["resolved_eps"] == [1e-2, 1e-3]
    assert 0 <= out["lp_2_resolved_spread"] <= 1


def test_save_and_load_round_trip(tmp_path, small):
    _, _, ops = small
    op = ops[(1e-2, 1e2)]
    op.save(tmp_path / "op")
    back = GridOperator.load(tmp_path / "op")
    np.testing.assert_array_equal(back.matrix, op.matrix)
    np.testing.assert_array_equal(back.weights, op.weights)
    assert back.metadata["eps"] == 1e-2


def test_lifted_blocks_match_direct_assembly(lab2):
    b = builtin_symbol("smooth_invariant", dimension=2)
    grid = operator_grid(lab2, 8)
    op = assemble(lab2, b, 0, 1, 1e-2, 1e2, grid)
    lifted = lifted_operator(op, lab2)
    for rho, tau in ((0, 0), (1, 2), (3, 3)):
        direct = lifted_block(lab2, b, 0, 1, rho, tau, lifted, 1e-2, 1e2)
        np.testing.assert_allclose(lifted.blocks[rho, tau], direct, atol=1e-12 * np.abs(direct).max())
    f = np.cos(grid.nodes[:, 0]) + grid.nodes[:, 1]
    np.testing.assert_allclose(lifted.apply(lifted.lift(f)), lifted.lift(op.apply(f)), atol=1e-13)
    assert lifted.norm(lifted.lift(f), 2.0) == pytest.approx(grid.norm(f, 2.0), rel=1e-13)


def test_asymmetric_grid_is_rejected(lab1):
    nodes = np.linspace(-1.0, 2.0, 6)[:, None] + 0.05
    op = GridOperator(nodes, np.ones(6), np.zeros((6, 6)))
    with pytest.raises(GridNotSymmetric):
        lifted_operator(op, lab1)


def test_pairing_converges_to_kernel_pairing(lab1):
    b = builtin_symbol("smooth_invariant", dimension=1)
    f, g = Bump((0.8,), 0.3), Bump((2.5,), 0.4)
    out = pairing_convergence(lab1, b, 0, 0, f, g, kernel_quad=TimeQuadrature(panels=256))
    gaps = [row["gap"] for row in out["ladder"]]
    assert gaps[-1] < 1e-4 * abs(out["kernel_pairing"])
    assert all(b2 <= a2 * (1 + 1e-9) + 1e-12 for a2, b2 in zip(gaps[:-1], gaps[1:]))
    assert out["swapped_pairing"] == pytest.approx(-out["final_pairing"], rel=1e-10)
    with pytest.raises(SupportsNotSeparated):
        pairing_convergence(lab1, b, 0, 0, Bump((0.8,), 0.3), Bump((-1.0,), 0.3))


@pytest.mark.slow
def test_negative_control_flags_the_coordinate_symbol():
    lab = make_lab(z2n(1, 1.0))
    out = negative_control(lab, n_per_axis=32)
    assert out["lipd_flagged"]
    # near y = sigma x the kernel of x_1 stays O(log 1/u) after the V normalisation,
    # so the ratio against the invariant symbol shrinks instead of growing
    assert out["k_ratio_noninvariant"][-1] < out["k_ratio_noninvariant"][0]
