import numpy as np
import pytest

from conftest import tiny_instance
from src.api_types import DimensionError, EnumerationLimitError, NoUncertaintyError
from src.elm import ElmConfig, init_random, point_features, train_least_squares
from src.interval_core import IntervalMatrix
from src.reach import UncertainDataset, hidden_interval_matrix
from src.robust import (
    DeviationDecomposition,
    RobustTrainConfig,
    assemble_lmi,
    center_residual,
    decompose,
    deviation_columns,
    initial_dual,
    lmi_layout,
    train_robust,
    warm_start,
    worst_case_residual_bruteforce,
    worst_case_residual_sampled,
)
from src.sdp import check_feasibility


def test_decompose_point_matrix_has_no_deviations():
    dec = decompose(IntervalMatrix([[1.0, 2.0]], [[1.0, 2.0]]))
    assert dec.m == 0
    np.testing.assert_array_equal(dec.H0, [[1.0, 2.0]])


def test_decompose_single_entry():
    dec = decompose(IntervalMatrix([[-1.0]], [[3.0]]))
    assert dec.H0[0, 0] == 1.0
    assert dec.devs == [(0, 0, 2.0)]


def test_decompose_reconstructs_bounds(rng):
    lo = rng.normal(size=(3, 4))
    hi = lo + rng.uniform(0, 1, size=(3, 4))
    hi[1, 2] = lo[1, 2]
    dec = decompose(IntervalMatrix(lo, hi))
    assert dec.m == 11
    low, high = dec.bounds()
    np.testing.assert_allclose(low, lo, atol=1e-14)
    np.testing.assert_allclose(high, hi, atol=1e-14)
    # sample-major ordering
    order = dec.sample * 3 + dec.hidden
    assert np.all(np.diff(order) > 0)


def test_assemble_lmi_by_hand():
    dec = DeviationDecomposition(
        H0=np.array([[0.5]]), sample=np.array([0]), hidden=np.array([0]), halfwidth=np.array([0.25])
    )
    p = assemble_lmi(dec, [[2.0]], 1, RobustTrainConfig(lambda_floor=0.1))
    assert p.dim == 4 and p.nvars == 3
    assert p.block_structure == (3, -1)

    gamma, lam, w = 5.0, 0.7, 3.0
    F = p.evaluate([gamma, lam, w])
    r = w * 0.5 - 2.0
    expected = np.array(
        [
            [gamma - lam, 0.0, r, 0.0],
            [0.0, lam, w * 0.25, 0.0],
            [r, w * 0.25, 1.0, 0.0],
            [0.0, 0.0, 0.0, lam - 0.1],
        ]
    )
    np.testing.assert_allclose(F, expected, atol=1e-15)
    np.testing.assert_array_equal(p.cost, [1.0, 0.0, 0.0])


def test_assemble_lmi_is_affine(rng):
    net, data = tiny_instance(3, N=3, n1=2, n2=2)
    dec = decompose(hidden_interval_matrix(net, data))
    p = assemble_lmi(dec, data.targets, 2, RobustTrainConfig())
    base_a = rng.normal(size=p.nvars)
    base_b = rng.normal(size=p.nvars)
    for k in range(p.nvars):
        e = np.zeros(p.nvars)
        e[k] = 1.0
        diff_a = p.evaluate(base_a + e) - p.evaluate(base_a)
        diff_b = p.evaluate(base_b + e) - p.evaluate(base_b)
        np.testing.assert_allclose(diff_a, diff_b, atol=1e-10)
        np.testing.assert_allclose(diff_a, diff_a.T, atol=1e-12)


def test_shared_lambda_layout():
    net, data = tiny_instance(0, N=5, n1=2)
    dec = decompose(hidden_interval_matrix(net, data))
    layout = lmi_layout(dec, 1, RobustTrainConfig(shared_lambda=True))
    assert layout.n_lambda == 2
    expanded = layout.expand(np.array([1.0, 2.0]))
    np.testing.assert_array_equal(expanded, np.where(dec.hidden == 0, 1.0, 2.0))


def test_residual_rows_follow_output_major_order():
    net, data = tiny_instance(0, N=5, n1=2, n2=2)
    dec = decompose(hidden_interval_matrix(net, data))
    layout = lmi_layout(dec, 2, RobustTrainConfig())
    assert layout.residual_row(0, 0) == 1 + dec.m
    assert layout.residual_row(1, 2) == 1 + dec.m + 5 + 2
    rows = layout.residual_row(1, np.arange(5))
    np.testing.assert_array_equal(rows, 1 + dec.m + 5 + np.arange(5))
    assert rows[-1] == layout.main_dim - 1


def test_assemble_rejects_empty_and_bad_shapes():
    dec = decompose(IntervalMatrix([[1.0, 2.0]], [[1.0, 2.0]]))
    with pytest.raises(NoUncertaintyError):
        assemble_lmi(dec, [[0.0], [0.0]], 1, RobustTrainConfig())
    dec = decompose(IntervalMatrix([[1.0, 2.0]], [[1.5, 2.0]]))
    with pytest.raises(DimensionError):
        assemble_lmi(dec, [[0.0], [0.0], [0.0]], 1, RobustTrainConfig())


def test_bruteforce_scalar_case():
    dec = DeviationDecomposition(
        H0=np.array([[1.0]]), sample=np.array([0]), hidden=np.array([0]), halfwidth=np.array([1.0])
    )
    assert worst_case_residual_bruteforce([[1.0]], dec, [[0.0]]) == pytest.approx(4.0)


def test_bruteforce_without_deviations_is_center_residual():
    dec = decompose(IntervalMatrix([[1.0, 2.0]], [[1.0, 2.0]]))
    assert worst_case_residual_bruteforce([[2.0]], dec, [[1.0], [1.0]]) == pytest.approx(1.0 + 9.0)


def test_bruteforce_refuses_large_enumeration(rng):
    lo = rng.normal(size=(3, 7))
    dec = decompose(IntervalMatrix(lo, lo + 1.0))
    with pytest.raises(EnumerationLimitError):
        worst_case_residual_bruteforce(np.ones((1, 3)), dec, np.zeros((7, 1)))


def test_sampled_is_a_lower_bound_of_exact(rng):
    lo = rng.normal(size=(3, 3))
    dec = decompose(IntervalMatrix(lo, lo + rng.uniform(0.1, 1, size=(3, 3))))
    W2 = rng.normal(size=(2, 3))
    Y = rng.normal(size=(3, 2))
    exact = worst_case_residual_bruteforce(W2, dec, Y)
    sampled = worst_case_residual_sampled(W2, dec, Y, n_samples=20_000, seed=1)
    assert sampled <= exact + 1e-12
    # 2^9 vertices, so 20000 draws hit the maximizer
    assert sampled == pytest.approx(exact, rel=1e-12)


def test_deviation_columns_match_matrix_expansion(rng):
    lo = rng.normal(size=(2, 3))
    dec = decompose(IntervalMatrix(lo, lo + 0.5))
    W2 = rng.normal(size=(2, 2))
    Y = rng.normal(size=(3, 2))
    tau = rng.uniform(-1, 1, size=dec.m)
    direct = (W2 @ dec.matrix(tau) - Y.T).ravel()
    via_columns = center_residual(W2, dec, Y) + deviation_columns(W2, dec) @ tau
    np.testing.assert_allclose(direct, via_columns, atol=1e-12)


def test_warm_start_is_strictly_feasible():
    net, data = tiny_instance(5, N=4, n1=3, n2=2)
    dec = decompose(hidden_interval_matrix(net, data))
    for shared in (False, True):
        cfg = RobustTrainConfig(shared_lambda=shared)
        p = assemble_lmi(dec, data.targets, 2, cfg)
        feasible, low = check_feasibility(p, warm_start(dec, data.targets, lmi_layout(dec, 2, cfg), cfg))
        assert feasible and low > 0


def test_initial_dual_satisfies_dual_constraints():
    net, data = tiny_instance(5, N=4, n1=3, n2=2)
    dec = decompose(hidden_interval_matrix(net, data))
    for shared in (False, True):
        cfg = RobustTrainConfig(shared_lambda=shared)
        p = assemble_lmi(dec, data.targets, 2, cfg)
        Z = initial_dual(lmi_layout(dec, 2, cfg), 0.3)
        assert Z.shape == (p.dim, p.dim)
        assert Z.diagonal().min() > 0
        traces = [f.multiply(Z).sum() for f in p.Fi]
        np.testing.assert_allclose(traces, p.cost, atol=1e-12)


def test_zero_delta_reduces_to_least_squares(arm_data):
    net = init_random(ElmConfig(n_hidden=8, seed=0), 2, 2)
    data = UncertainDataset.uniform(arm_data.U, arm_data.Y, 0.0)
    result = train_robust(net, data, RobustTrainConfig())
    H = point_features(net, arm_data.U)
    W_ls = train_least_squares(H, arm_data.Y, 0.0)
    ls2 = float(np.sum((W_ls @ H - arm_data.Y.T) ** 2))
    robust2 = float(np.sum((result.W2 @ H - arm_data.Y.T) ** 2))
    assert robust2 == pytest.approx(ls2, rel=1e-3)
    assert abs(result.gamma - ls2) <= 1e-3 * (1 + ls2)


@pytest.mark.parametrize("seed", range(10))
def test_certificate_bounds_bruteforce(seed):
    N, n1 = (2, 3) if seed % 2 else (3, 4)
    net, data = tiny_instance(seed, N=N, n1=n1, n2=1 + seed % 2, delta=0.2)
    result = train_robust(net, data, RobustTrainConfig())
    worst = worst_case_residual_bruteforce(result.W2, result.decomposition, data.targets)
    assert result.decomposition.m <= 12
    assert result.gamma + 1e-6 * (1 + result.gamma) >= worst
    assert result.gamma >= result.center_residual - 1e-6 * (1 + result.gamma)
    assert np.all(result.lambdas >= 0)


@pytest.mark.parametrize("seed", range(5))
def test_shared_lambda_is_no_less_conservative(seed):
    net, data = tiny_instance(seed, N=3, n1=2, delta=0.3)
    full = train_robust(net, data, RobustTrainConfig())
    shared = train_robust(net, data, RobustTrainConfig(shared_lambda=True))
    assert shared.lambdas.shape == (2,)
    assert shared.gamma >= full.gamma - 1e-6 * (1 + full.gamma)


def test_gamma_scales_quadratically_with_targets():
    net, data = tiny_instance(7, N=4, n1=3, n2=2, delta=0.2)
    scaled = UncertainDataset(data.centers, data.deltas, 3.0 * data.targets)
    base = train_robust(net, data).gamma
    assert train_robust(net, scaled).gamma == pytest.approx(9.0 * base, rel=1e-5)


def test_gamma_approaches_least_squares_as_delta_shrinks():
    net, data = tiny_instance(11, N=10, n1=4, n2=1)
    H = point_features(net, data.centers)
    W_ls = train_least_squares(H, data.targets, 0.0)
    ls2 = float(np.sum((W_ls @ H - data.targets.T) ** 2))
    gaps = []
    for delta in (1e-1, 1e-2, 1e-3):
        shrunk = UncertainDataset.uniform(data.centers, data.targets, delta)
        gamma = train_robust(net, shrunk).gamma
        gaps.append((gamma - ls2, 1e-6 * (1 + gamma)))
    assert gaps[0][0] >= gaps[1][0] - gaps[1][1]
    assert gaps[1][0] >= gaps[2][0] - gaps[2][1]
    assert gaps[2][0] >= -gaps[2][1]
