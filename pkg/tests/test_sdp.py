import io
import math

import numpy as np
import pytest
import scipy.sparse as sp

from src.api_types import DataError, DimensionError, SolverError
from src.sdp import (
    LmiProblem,
    SolverOptions,
    SolverStatus,
    check_feasibility,
    dump_triplets,
    load_triplets,
    solve,
    solve_or_raise,
)


def problem(cost, F0, Fi, blocks=None):
    return LmiProblem(
        cost=np.asarray(cost, dtype=float),
        F0=sp.csr_matrix(np.asarray(F0, dtype=float)),
        Fi=tuple(sp.csr_matrix(np.asarray(f, dtype=float)) for f in Fi),
        block_structure=blocks,
    )


A3 = np.array([[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]])

# (problem, optimal objective)
ANALYTIC = {
    "scalar_cone": (problem([1.0], [[0.0]], [[[1.0]]]), 0.0),
    "two_by_two": (problem([1.0], [[0.0, 1.0], [1.0, 0.0]], [np.eye(2)]), 1.0),
    "decoupled_bounds": (
        problem([1.0, 1.0], np.diag([-1.0, -2.0]), [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]),
        3.0,
    ),
    "schur_square": (problem([1.0], [[0.0, 3.0], [3.0, 1.0]], [[[1.0, 0.0], [0.0, 0.0]]]), 9.0),
    "max_eigenvalue": (problem([1.0], -A3, [np.eye(3)]), 2.0 + math.sqrt(2.0)),
    "correlation_bound": (problem([-1.0], np.eye(2), [[[0.0, 1.0], [1.0, 0.0]]]), -1.0),
}


@pytest.mark.parametrize("name", sorted(ANALYTIC))
def test_analytic_optimum(name):
    p, expected = ANALYTIC[name]
    solution = solve(p)
    assert solution.status is SolverStatus.OPTIMAL
    assert abs(solution.objective - expected) <= 1e-6 * (1 + abs(expected))
    feasible, low = check_feasibility(p, solution.x, slack=1e-8 * (1 + np.linalg.norm(p.evaluate(solution.x))))
    assert feasible
    assert low == pytest.approx(solution.min_eig)
    assert abs(solution.duality_gap) <= 1e-7 * (1 + abs(solution.objective))


def test_two_by_two_optimum_point():
    p, _ = ANALYTIC["two_by_two"]
    assert solve(p).x[0] == pytest.approx(1.0, abs=1e-6)


def test_decoupled_bounds_point():
    p, _ = ANALYTIC["decoupled_bounds"]
    np.testing.assert_allclose(solve(p).x, [1.0, 2.0], atol=1e-6)


def test_block_structure_matches_unstructured():
    F0 = np.zeros((3, 3))
    F0[0, 1] = F0[1, 0] = 1.0
    F0[2, 2] = -2.0
    F1 = np.diag([1.0, 1.0, 0.0])
    F2 = np.diag([0.0, 0.0, 1.0])
    opts = SolverOptions(tol_gap=1e-10, tol_feas=1e-10)
    dense = solve(problem([1.0, 1.0], F0, [F1, F2]), opts)
    blocked = solve(problem([1.0, 1.0], F0, [F1, F2], blocks=(2, -1)), opts)
    assert dense.ok and blocked.ok
    assert abs(dense.objective - blocked.objective) <= 1e-9 * (1 + abs(dense.objective))
    assert blocked.objective == pytest.approx(3.0, abs=1e-8)


def test_warm_start_is_used():
    p, expected = ANALYTIC["max_eigenvalue"]
    solution = solve(p, warm_start=[10.0])
    assert solution.ok
    assert solution.objective == pytest.approx(expected, abs=1e-6)


def test_infeasible_warm_start_is_shifted():
    p, expected = ANALYTIC["two_by_two"]
    solution = solve(p, warm_start=[-5.0])
    assert solution.ok
    assert solution.objective == pytest.approx(expected, abs=1e-6)


def test_solver_is_deterministic():
    p, _ = ANALYTIC["max_eigenvalue"]
    a, b = solve(p), solve(p)
    assert np.array_equal(a.x, b.x)
    assert a.iterations == b.iterations


def test_iteration_limit_is_reported():
    p, _ = ANALYTIC["max_eigenvalue"]
    solution = solve(p, SolverOptions(max_iters=1))
    assert solution.status is SolverStatus.MAX_ITERS
    with pytest.raises(SolverError) as excinfo:
        solve_or_raise(p, SolverOptions(max_iters=1))
    assert excinfo.value.status == 3


def test_dual_feasible_start_stays_feasible():
    p, expected = ANALYTIC["decoupled_bounds"]
    # tr(Fᵢ·I) = cᵢ for both variables
    solution = solve(p, dual_start=np.eye(2))
    assert solution.ok
    assert solution.objective == pytest.approx(expected, abs=1e-6)
    assert solution.dual_infeasibility <= 1e-8


def test_dual_start_is_checked():
    p, expected = ANALYTIC["two_by_two"]
    fallback = solve(p, dual_start=-np.eye(2))
    assert fallback.ok
    assert fallback.objective == pytest.approx(expected, abs=1e-6)
    with pytest.raises(DimensionError):
        solve(p, dual_start=np.eye(3))
    with pytest.raises(DataError):
        solve(p, dual_start=[[1.0, 0.5], [0.0, 1.0]])


def test_check_feasibility_without_variables():
    assert check_feasibility(problem([], np.eye(2), []), []) == (True, 1.0)
    assert check_feasibility(problem([], -np.eye(2), []), []) == (False, -1.0)


def test_problem_validation():
    with pytest.raises(DataError):
        problem([1.0], [[0.0, 1.0], [0.0, 0.0]], [np.eye(2)])
    with pytest.raises(DimensionError):
        problem([1.0, 2.0], np.eye(2), [np.eye(2)])
    with pytest.raises(DimensionError):
        problem([1.0], np.eye(2), [np.eye(3)])
    with pytest.raises(DimensionError):
        problem([1.0], np.eye(3), [np.eye(3)], blocks=(2, 2))
    with pytest.raises(DataError):
        problem([1.0], np.ones((2, 2)), [np.eye(2)], blocks=(1, 1))
    with pytest.raises(DataError):
        problem([1.0], np.ones((2, 2)), [np.eye(2)], blocks=(-2,))
    with pytest.raises(DimensionError):
        check_feasibility(problem([1.0], np.eye(2), [np.eye(2)]), [1.0, 2.0])


def test_triplet_dump_preserves_problem():
    F0 = -A3
    F1 = np.eye(3)
    p = problem([1.0], F0, [F1], blocks=(3,))
    buf = io.StringIO()
    dump_triplets(p, buf)
    text = buf.getvalue()
    assert text.splitlines()[1] == "3 1"
    loaded = load_triplets(io.StringIO(text))
    assert loaded.block_structure == (3,)
    np.testing.assert_array_equal(loaded.F0.toarray(), F0)
    np.testing.assert_array_equal(loaded.Fi[0].toarray(), F1)
    np.testing.assert_array_equal(loaded.cost, [1.0])


def test_triplet_load_rejects_garbage():
    with pytest.raises(DataError):
        load_triplets(io.StringIO(""))
    with pytest.raises(DataError):
        load_triplets(io.StringIO("2 1\n0 0 0 1\n"))
