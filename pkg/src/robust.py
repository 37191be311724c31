"""
Robust output-layer training against interval-bounded inputs.

The hidden interval matrix H(𝒰) is split into a center H0 plus one
single-entry deviation term per nonzero halfwidth. The worst case of the
squared residual ‖vec(W2·H − Yᵀ)‖² over that box is bounded by γ through an
S-procedure / Schur complement LMI in (γ, λ, vec(W2)), which the SDP solver
minimizes.

Vectorization is row-major throughout: residual index t = p·N + i for output
p and sample i; W2 coordinate p·n1 + q; deviations are ordered sample-major,
k ↔ (i, j) with flat position i·n1 + j.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field

from src.api_types import DimensionError, EnumerationLimitError, NoUncertaintyError, SolverError
from src.debug_log import print_to_debug_log
from src.elm import DEFAULT_RIDGE, make_generator, train_least_squares
from src.interval_core import IntervalMatrix
from src.reach import ShallowNet, UncertainDataset, hidden_interval_matrix
from src.sdp import LmiProblem, SolverOptions, check_feasibility, solve

ZERO_HALFWIDTH = 1e-14
ENUMERATION_LIMIT = 20
ENUMERATION_CHUNK = 1 << 14
WARM_START_LAMBDA = 1e-3


@dataclass(frozen=True, eq=False)
class DeviationDecomposition:
    """H = H0 + Σₖ τₖ·halfwidthₖ·E(hiddenₖ, sampleₖ), τ ∈ [−1, 1]^m."""

    H0: np.ndarray
    sample: np.ndarray
    hidden: np.ndarray
    halfwidth: np.ndarray

    @property
    def m(self) -> int:
        return self.halfwidth.shape[0]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.H0.shape

    @property
    def devs(self) -> List[Tuple[int, int, float]]:
        return [(int(i), int(j), float(h)) for i, j, h in zip(self.sample, self.hidden, self.halfwidth)]

    def matrix(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float).ravel()
        if tau.shape[0] != self.m:
            raise DimensionError("deviation coefficients", self.m, tau.shape[0])
        H = self.H0.copy()
        np.add.at(H, (self.hidden, self.sample), tau * self.halfwidth)
        return H

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.matrix(-np.ones(self.m)), self.matrix(np.ones(self.m))


def decompose(H: IntervalMatrix) -> DeviationDecomposition:
    H0 = H.center
    half = H.radius
    # sample-major: transpose so that ravel() walks i·n1 + j
    flat = half.T.ravel()
    keep = np.flatnonzero(flat >= ZERO_HALFWIDTH)
    n1 = H.rows
    return DeviationDecomposition(
        H0=np.array(H0),
        sample=keep // n1,
        hidden=keep % n1,
        halfwidth=flat[keep],
    )


class RobustTrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    shared_lambda: bool = False
    lambda_floor: float = Field(0.0, ge=0.0)
    solver: SolverOptions = Field(default_factory=SolverOptions)


@dataclass(frozen=True)
class LmiLayout:
    """Index map of the robust LMI: variable positions and matrix offsets."""

    m: int
    N: int
    n1: int
    n2: int
    groups: Tuple[np.ndarray, ...]
    group_hidden: Optional[Tuple[int, ...]]

    @property
    def n_lambda(self) -> int:
        return len(self.groups)

    @property
    def r(self) -> int:
        return self.N * self.n2

    @property
    def main_dim(self) -> int:
        return 1 + self.m + self.r

    @property
    def dim(self) -> int:
        return self.main_dim + self.n_lambda

    @property
    def nvars(self) -> int:
        return 1 + self.n_lambda + self.n2 * self.n1

    def lambda_index(self, g: int) -> int:
        return 1 + g

    def w2_index(self, p: int, q: int) -> int:
        return 1 + self.n_lambda + p * self.n1 + q

    def residual_row(self, p: int, i: Union[int, np.ndarray]) -> Union[int, np.ndarray]:
        return 1 + self.m + p * self.N + i

    def split(self, x) -> Tuple[float, np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        gamma = float(x[0])
        lambdas = x[1:1 + self.n_lambda]
        W2 = x[1 + self.n_lambda:].reshape(self.n2, self.n1)
        return gamma, lambdas, W2

    def pack(self, gamma: float, lambdas, W2) -> np.ndarray:
        return np.concatenate([[gamma], np.asarray(lambdas, dtype=float), np.asarray(W2, dtype=float).ravel()])

    def expand(self, lambdas) -> np.ndarray:
        """Per-deviation multipliers from per-variable ones."""
        out = np.zeros(self.m)
        for g, members in enumerate(self.groups):
            out[members] = lambdas[g]
        return out


def lmi_layout(dec: DeviationDecomposition, n2: int, cfg: RobustTrainConfig) -> LmiLayout:
    n1, N = dec.shape
    if cfg.shared_lambda:
        units = [j for j in range(n1) if np.any(dec.hidden == j)]
        groups = tuple(np.flatnonzero(dec.hidden == j) for j in units)
        return LmiLayout(dec.m, N, n1, n2, groups, tuple(units))
    return LmiLayout(dec.m, N, n1, n2, tuple(np.array([k]) for k in range(dec.m)), None)


def _symmetric(rows, cols, vals, d: int) -> sp.csr_matrix:
    rows = np.asarray(rows, dtype=int)
    cols = np.asarray(cols, dtype=int)
    vals = np.asarray(vals, dtype=float)
    off = rows != cols
    return sp.csr_matrix(
        (np.concatenate([vals, vals[off]]), (np.concatenate([rows, cols[off]]), np.concatenate([cols, rows[off]]))),
        shape=(d, d),
    )


def _check_targets(dec: DeviationDecomposition, Y, n2: int) -> np.ndarray:
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    N = dec.shape[1]
    if Y.shape != (N, n2):
        raise DimensionError("robust targets", (N, n2), Y.shape)
    return Y


def assemble_lmi(dec: DeviationDecomposition, Y, n2: int, cfg: RobustTrainConfig) -> LmiProblem:
    """
    Constraint
        [[γ − Σλ,   0,        rᵀ ],
         [0,        diag(λ),  Zᵀ ],
         [r,        Z,        I  ]] ⪰ 0,   λ ≥ lambda_floor
    with r = vec(W2·H0 − Yᵀ) and column k of Z equal to vec(W2·H_k). The bound
    constraints form a trailing diagonal block.
    """
    if n2 < 1:
        raise DimensionError("assemble_lmi n2", ">= 1", n2)
    Y = _check_targets(dec, Y, n2)
    if dec.m == 0:
        raise NoUncertaintyError()
    L = lmi_layout(dec, n2, cfg)
    d, D = L.dim, L.main_dim
    N, n1 = L.N, L.n1

    samples = np.arange(N)
    res_rows = [L.residual_row(p, samples) for p in range(n2)]
    bound = D + np.arange(L.n_lambda)

    F0 = _symmetric(
        np.concatenate([np.zeros(L.r, dtype=int), np.arange(1 + L.m, D), bound]),
        np.concatenate([np.concatenate(res_rows), np.arange(1 + L.m, D), bound]),
        np.concatenate([-Y.T.ravel(), np.ones(L.r), np.full(L.n_lambda, -cfg.lambda_floor)]),
        d,
    )

    Fi = [_symmetric([0], [0], [1.0], d)]
    for g, members in enumerate(L.groups):
        Fi.append(
            _symmetric(
                np.concatenate([[0], 1 + members, [D + g]]),
                np.concatenate([[0], 1 + members, [D + g]]),
                np.concatenate([[-float(len(members))], np.ones(len(members)), [1.0]]),
                d,
            )
        )
    for p in range(n2):
        for q in range(n1):
            ks = np.flatnonzero(dec.hidden == q)
            Fi.append(
                _symmetric(
                    np.concatenate([np.zeros(N, dtype=int), 1 + ks]),
                    np.concatenate([res_rows[p], L.residual_row(p, dec.sample[ks])]),
                    np.concatenate([dec.H0[q], dec.halfwidth[ks]]),
                    d,
                )
            )

    cost = np.zeros(L.nvars)
    cost[0] = 1.0
    return LmiProblem(cost=cost, F0=F0, Fi=tuple(Fi), block_structure=(D, -L.n_lambda))


def center_residual(W2, dec: DeviationDecomposition, Y) -> np.ndarray:
    """vec(W2·H0 − Yᵀ), row-major."""
    W2 = np.atleast_2d(np.asarray(W2, dtype=float))
    Y = _check_targets(dec, Y, W2.shape[0])
    if W2.shape[1] != dec.shape[0]:
        raise DimensionError("W2 columns", dec.shape[0], W2.shape[1])
    return (W2 @ dec.H0 - Y.T).ravel()


def deviation_columns(W2, dec: DeviationDecomposition) -> np.ndarray:
    """Z (N·n2 × m): column k is vec(W2·H_k)."""
    W2 = np.atleast_2d(np.asarray(W2, dtype=float))
    n2 = W2.shape[0]
    N = dec.shape[1]
    Z = np.zeros((n2 * N, dec.m))
    cols = np.arange(dec.m)
    for p in range(n2):
        Z[p * N + dec.sample, cols] = dec.halfwidth * W2[p, dec.hidden]
    return Z


def _max_over_vertices(r0: np.ndarray, Z: np.ndarray, taus: np.ndarray) -> float:
    residuals = r0[None, :] + taus @ Z.T
    return float(np.max(np.sum(residuals**2, axis=1)))


def worst_case_residual_bruteforce(W2, dec: DeviationDecomposition, Y) -> float:
    """
    max over τ ∈ {−1, +1}^m of ‖vec(W2·H(τ) − Yᵀ)‖². The residual is affine in
    τ, so the maximum over the box is attained at a vertex.
    """
    r0 = center_residual(W2, dec, Y)
    m = dec.m
    if m == 0:
        return float(r0 @ r0)
    if m > ENUMERATION_LIMIT:
        raise EnumerationLimitError(m, ENUMERATION_LIMIT)
    Z = deviation_columns(W2, dec)
    bits = np.arange(m)
    best = -np.inf
    for start in range(0, 1 << m, ENUMERATION_CHUNK):
        codes = np.arange(start, min(start + ENUMERATION_CHUNK, 1 << m))
        taus = ((codes[:, None] >> bits) & 1) * 2.0 - 1.0
        best = max(best, _max_over_vertices(r0, Z, taus))
    return best


def worst_case_residual_sampled(W2, dec: DeviationDecomposition, Y, n_samples: int = 100_000, seed: int = 0) -> float:
    """Monte-Carlo lower bound on the worst case, τ drawn uniformly from the vertices."""
    r0 = center_residual(W2, dec, Y)
    if dec.m == 0 or n_samples < 1:
        return float(r0 @ r0)
    Z = deviation_columns(W2, dec)
    rng = make_generator(seed)
    best = float(r0 @ r0)
    remaining = n_samples
    while remaining > 0:
        batch = min(remaining, ENUMERATION_CHUNK)
        taus = rng.choice(np.array([-1.0, 1.0]), size=(batch, dec.m))
        best = max(best, _max_over_vertices(r0, Z, taus))
        remaining -= batch
    return best


@dataclass(eq=False)
class RobustResult:
    W2: np.ndarray
    gamma: float
    lambdas: np.ndarray
    solver_report: dict
    center_residual: float
    lmi_dimension: int
    net: Optional[ShallowNet] = None
    decomposition: Optional[DeviationDecomposition] = field(default=None, repr=False)


def warm_start(dec: DeviationDecomposition, Y, layout: LmiLayout, cfg: RobustTrainConfig) -> np.ndarray:
    """
    ELM weights with multipliers large enough to dominate ZᵀZ and γ large
    enough to dominate the residual, which is strictly feasible.
    """
    W2 = train_least_squares(dec.H0, Y, DEFAULT_RIDGE)
    r0 = center_residual(W2, dec, Y)
    Z = deviation_columns(W2, dec)
    z_norm = float(scipy.linalg.svdvals(Z)[0]) if Z.size else 0.0
    lam = max(cfg.lambda_floor, WARM_START_LAMBDA) + 2.0 * z_norm**2
    lambdas = np.full(layout.n_lambda, lam)
    gamma = 2.0 * (float(r0 @ r0) + float(np.sum(layout.expand(lambdas)))) + 1.0
    return layout.pack(gamma, lambdas, W2)


def initial_dual(layout: LmiLayout, residual_scale: float) -> sp.csr_matrix:
    """
    Diagonal dual point with tr(Fᵢ·Z) = cᵢ for every variable: Z₀₀ = 1, each
    λ group of size g puts g/(g+1) on its member rows and on its bound row,
    and the residual rows carry `residual_scale`.
    """
    diag = np.empty(layout.dim)
    diag[0] = 1.0
    for g, members in enumerate(layout.groups):
        w = len(members) / (len(members) + 1.0)
        diag[1 + members] = w
        diag[layout.main_dim + g] = w
    diag[1 + layout.m:layout.main_dim] = residual_scale
    return sp.diags(diag).tocsr()


def _least_squares_fallback(net: ShallowNet, dec: DeviationDecomposition, Y) -> RobustResult:
    print_to_debug_log("robust -- no deviation terms, solving plain least squares", color="yellow")
    W2 = train_least_squares(dec.H0, Y, 0.0)
    r0 = center_residual(W2, dec, Y)
    residual = float(r0 @ r0)
    return RobustResult(
        W2=W2,
        gamma=residual,
        lambdas=np.zeros(0),
        solver_report={"status": "least_squares"},
        center_residual=residual,
        lmi_dimension=0,
        net=net.with_output_weights(W2),
        decomposition=dec,
    )


def train_robust(net: ShallowNet, data: UncertainDataset, cfg: Optional[RobustTrainConfig] = None) -> RobustResult:
    cfg = cfg or RobustTrainConfig()
    n2 = net.dims[2]
    H = hidden_interval_matrix(net, data)
    dec = decompose(H)
    Y = _check_targets(dec, data.targets, n2)

    try:
        problem = assemble_lmi(dec, Y, n2, cfg)
    except NoUncertaintyError:
        return _least_squares_fallback(net, dec, Y)

    layout = lmi_layout(dec, n2, cfg)
    print_to_debug_log(
        f"robust -- training: m={dec.m} deviation terms, lmi dimension={layout.dim}, "
        f"variables={layout.nvars}, shared_lambda={cfg.shared_lambda}",
        color="blue",
    )

    x0 = warm_start(dec, Y, layout, cfg)
    # residual rows of F(x₀) are I, so this balances them against diag(λ₀)
    residual_scale = 0.5 * float(np.mean(layout.split(x0)[1]))
    feasible, low = check_feasibility(problem, x0)
    if not feasible or low <= 0:
        print_to_debug_log(f"robust -- warm start rejected (min eig {low:.3e})", color="yellow")
        x0 = None
        residual_scale = 1.0

    solution = solve(problem, cfg.solver, warm_start=x0, dual_start=initial_dual(layout, residual_scale))
    if not solution.ok:
        print_to_debug_log(f"robust -- solver failed: {solution.summary()}", color="red")
        raise SolverError(f"Robust training SDP stopped with status '{solution.status.value}'", solution.summary())

    gamma, lambdas, W2 = layout.split(solution.x)
    if layout.group_hidden is not None:
        per_unit = np.full(layout.n1, cfg.lambda_floor)
        per_unit[list(layout.group_hidden)] = lambdas
        lambdas = per_unit
    r0 = center_residual(W2, dec, Y)
    result = RobustResult(
        W2=W2.copy(),
        gamma=max(gamma, 0.0),
        lambdas=np.maximum(lambdas, cfg.lambda_floor),
        solver_report=solution.summary(),
        center_residual=float(r0 @ r0),
        lmi_dimension=layout.dim,
        net=net.with_output_weights(W2),
        decomposition=dec,
    )
    print_to_debug_log(
        f"robust -- done: gamma={result.gamma:.9e} center residual={result.center_residual:.9e} "
        f"iterations={solution.iterations}",
        color="green",
    )
    return result
