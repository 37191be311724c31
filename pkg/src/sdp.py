"""
Dense primal-dual interior-point solver for

    minimize cᵀx  subject to  F(x) = F0 + Σ xᵢFᵢ ⪰ 0

with dual  maximize −tr(F0·Z)  subject to  tr(Fᵢ·Z) = cᵢ, Z ⪰ 0.

The iteration keeps a slack S ⪰ 0 with residual F(x) − S driven to zero, so a
strictly feasible warm start is optional: without one the initial slack is F(x₀)
shifted by (|λmin|+1)·I. The dual iterate starts at a scaled identity unless a
positive definite dual start is given; small dual residuals are projected out
along span{Fᵢ} between iterations. Search directions are HKM with Mehrotra
predictor-corrector. Block-diagonal problems are handled block by block; a
negative block size (SDPA convention) marks a diagonal block of 1×1 cones.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import IO, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field

from src.api_types import DataError, DimensionError, SolverError
from src.debug_log import print_to_debug_log

SYMMETRY_TOL = 1e-12
STALL_STEP = 1e-10
MAX_STALLS = 3
# iterations without a 10% improvement of the worst convergence measure
STALL_WINDOW = 25
REFINEMENT_STEPS = 2
# dual residuals at or below this are projected away between iterations
PROJECTION_THRESHOLD = 1e-4


class SolverOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    tol_gap: float = Field(1e-7, gt=0)
    tol_feas: float = Field(1e-8, gt=0)
    max_iters: int = Field(200, ge=1)
    step_fraction: float = Field(0.98, gt=0, lt=1)
    predictor_corrector: bool = True


class SolverStatus(str, Enum):
    OPTIMAL = "optimal"
    MAX_ITERS = "max_iters"
    NUMERICAL_FAILURE = "numerical_failure"


Matrix = Union[np.ndarray, sp.spmatrix]


def _as_sparse(a: Matrix, d: int, what: str) -> sp.csr_matrix:
    m = sp.csr_matrix(a, dtype=float)
    if m.shape != (d, d):
        raise DimensionError(what, (d, d), m.shape)
    m.sum_duplicates()
    m.eliminate_zeros()
    return m


def _check_symmetric(m: sp.csr_matrix, what: str) -> None:
    if m.nnz == 0:
        return
    scale = max(1.0, float(np.max(np.abs(m.data))))
    diff = m - m.T
    if diff.nnz and float(np.max(np.abs(diff.data))) > SYMMETRY_TOL * scale:
        raise DataError(f"{what} is not symmetric")


@dataclass(frozen=True, eq=False)
class LmiProblem:
    """
    Affine matrix inequality problem. `Fi` holds one full (both triangles)
    symmetric d×d matrix per decision variable.
    """

    cost: np.ndarray
    F0: sp.csr_matrix
    Fi: Tuple[sp.csr_matrix, ...]
    block_structure: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        cost = np.array(self.cost, dtype=float).ravel()
        F0 = sp.csr_matrix(self.F0, dtype=float)
        d = F0.shape[0]
        if F0.shape[0] != F0.shape[1] or d < 1:
            raise DimensionError("LmiProblem F0", "square, d >= 1", F0.shape)
        F0 = _as_sparse(F0, d, "LmiProblem F0")
        Fi = tuple(_as_sparse(f, d, f"LmiProblem F{i + 1}") for i, f in enumerate(self.Fi))
        if cost.shape[0] != len(Fi):
            raise DimensionError("LmiProblem cost vs Fi", len(Fi), cost.shape[0])
        if not np.all(np.isfinite(cost)):
            raise DataError("LmiProblem cost has non-finite entries")
        for i, f in enumerate((F0,) + Fi):
            if f.nnz and not np.all(np.isfinite(f.data)):
                raise DataError(f"LmiProblem F{i} has non-finite entries")
            _check_symmetric(f, f"LmiProblem F{i}")

        blocks = self.block_structure
        if blocks is not None:
            blocks = tuple(int(b) for b in blocks)
            if any(b == 0 for b in blocks) or sum(abs(b) for b in blocks) != d:
                raise DimensionError("LmiProblem block_structure", f"sizes summing to {d}", blocks)
            _check_block_pattern(blocks, (F0,) + Fi)

        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "F0", F0)
        object.__setattr__(self, "Fi", Fi)
        object.__setattr__(self, "block_structure", blocks)

    @property
    def nvars(self) -> int:
        return len(self.Fi)

    @property
    def dim(self) -> int:
        return self.F0.shape[0]

    def blocks(self) -> Tuple[int, ...]:
        return self.block_structure if self.block_structure is not None else (self.dim,)

    def evaluate(self, x) -> np.ndarray:
        x = self._check_x(x)
        F = self.F0.copy()
        for xi, fi in zip(x, self.Fi):
            if xi != 0.0:
                F = F + xi * fi
        return F.toarray()

    def _check_x(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != self.nvars:
            raise DimensionError("LMI decision vector", self.nvars, x.shape[0])
        return x


def _block_slices(blocks: Sequence[int]) -> List[Tuple[int, int, bool]]:
    out, start = [], 0
    for b in blocks:
        out.append((start, abs(b), b < 0))
        start += abs(b)
    return out


def _check_block_pattern(blocks: Sequence[int], mats: Sequence[sp.csr_matrix]) -> None:
    d = sum(abs(b) for b in blocks)
    owner = np.empty(d, dtype=int)
    diagonal = np.zeros(d, dtype=bool)
    for k, (start, n, diag) in enumerate(_block_slices(blocks)):
        owner[start:start + n] = k
        diagonal[start:start + n] = diag
    for i, m in enumerate(mats):
        coo = m.tocoo()
        if coo.nnz == 0:
            continue
        if np.any(owner[coo.row] != owner[coo.col]):
            raise DataError(f"LmiProblem F{i} has entries outside the block structure")
        if np.any(diagonal[coo.row] & (coo.row != coo.col)):
            raise DataError(f"LmiProblem F{i} has off-diagonal entries in a diagonal block")


@dataclass(eq=False)
class SdpSolution:
    x: np.ndarray
    objective: float
    status: SolverStatus
    iterations: int
    min_eig: float
    duality_gap: float
    dual_objective: float = float("nan")
    primal_infeasibility: float = float("nan")
    dual_infeasibility: float = float("nan")
    Z: List[np.ndarray] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status is SolverStatus.OPTIMAL

    def summary(self) -> dict:
        return {
            "status": self.status.value,
            "objective": self.objective,
            "dual_objective": self.dual_objective,
            "iterations": self.iterations,
            "min_eig": self.min_eig,
            "duality_gap": self.duality_gap,
            "primal_infeasibility": self.primal_infeasibility,
            "dual_infeasibility": self.dual_infeasibility,
        }


def check_feasibility(p: LmiProblem, x, slack: float = 0.0) -> Tuple[bool, float]:
    """(min_eig(F(x)) ≥ −slack, min_eig), one symmetric eigensolve per block."""
    F = p.evaluate(x)
    min_eig = np.inf
    for start, n, diag in _block_slices(p.blocks()):
        block = F[start:start + n, start:start + n]
        if diag:
            low = float(np.min(np.diag(block)))
        else:
            low = float(scipy.linalg.eigvalsh(block)[0])
        min_eig = min(min_eig, low)
    return bool(min_eig >= -slack), float(min_eig)


# ---------------------------------------------------------------------------
# Block-wise kernels. Every blocked quantity is a list aligned with the block
# structure: dense blocks are 2-D arrays, diagonal blocks are 1-D arrays.
# ---------------------------------------------------------------------------


class _DenseBlock:
    diagonal = False

    def __init__(self, start: int, n: int, F0: sp.csr_matrix, Fi: Sequence[sp.csr_matrix]):
        self.start, self.n = start, n
        sl = slice(start, start + n)
        self.F0 = F0[sl, sl].toarray()
        nvars = len(Fi)
        var, row, col, val = [], [], [], []
        self.coupling = []
        for j, f in enumerate(Fi):
            sub = f[sl, sl].tocoo()
            if sub.nnz == 0:
                continue
            var.append(np.full(sub.nnz, j))
            row.append(sub.row)
            col.append(sub.col)
            val.append(sub.data)
            rows = np.unique(sub.row)
            self.coupling.append((j, rows, f[sl, sl].tocsr()[rows, :]))
        if var:
            self.var = np.concatenate(var)
            self.row = np.concatenate(row)
            self.col = np.concatenate(col)
            self.val = np.concatenate(val)
        else:
            self.var = self.row = self.col = np.zeros(0, dtype=int)
            self.val = np.zeros(0)
        # vec(F(x) − F0) = A·x, row-major vec
        self.A = sp.csr_matrix((self.val, (self.row * n + self.col, self.var)), shape=(n * n, nvars))

    def evaluate(self, x):
        return self.F0 + (self.A @ x).reshape(self.n, self.n)

    def apply(self, dx):
        return (self.A @ dx).reshape(self.n, self.n)

    def adjoint(self, C):
        # ⟨Fᵢ, C⟩ for every i; equals tr(Fᵢ·C) since Fᵢ is symmetric
        return self.A.T @ np.ascontiguousarray(C).ravel()

    def schur(self, G, Z, nvars):
        """M[i, j] = tr(Fᵢ·G·Fⱼ·Z) accumulated over this block."""
        M = np.zeros((nvars, nvars))
        for j, rows, sub in self.coupling:
            R = sub @ Z
            vals = np.einsum("er,re->e", G[np.ix_(self.col, rows)], R[:, self.row])
            M[:, j] += np.bincount(self.var, weights=self.val * vals, minlength=nvars)
        return M

    @staticmethod
    def inverse(S):
        factor = scipy.linalg.cho_factor(S, lower=True)
        return scipy.linalg.cho_solve(factor, np.eye(S.shape[0]))

    @staticmethod
    def max_step(S, dS):
        L = scipy.linalg.cholesky(S, lower=True)
        X = scipy.linalg.solve_triangular(L, dS, lower=True)
        T = scipy.linalg.solve_triangular(L, X.T, lower=True)
        low = scipy.linalg.eigvalsh((T + T.T) / 2)[0]
        return np.inf if low >= 0 else -1.0 / low

    @staticmethod
    def min_eig(S):
        return float(scipy.linalg.eigvalsh(S)[0])

    @staticmethod
    def identity(n):
        return np.eye(n)

    @staticmethod
    def product(A, B):
        return A @ B

    @staticmethod
    def sym(X):
        return (X + X.T) / 2


class _DiagBlock:
    diagonal = True

    def __init__(self, start: int, n: int, F0: sp.csr_matrix, Fi: Sequence[sp.csr_matrix]):
        self.start, self.n = start, n
        sl = slice(start, start + n)
        self.F0 = np.asarray(F0[sl, sl].diagonal(), dtype=float)
        rows = [np.asarray(f[sl, sl].diagonal(), dtype=float) for f in Fi]
        self.D = sp.csr_matrix(np.vstack(rows)) if rows else sp.csr_matrix((0, n))

    def evaluate(self, x):
        return self.F0 + self.D.T @ x

    def apply(self, dx):
        return self.D.T @ dx

    def adjoint(self, C):
        return self.D @ (np.diag(C) if C.ndim == 2 else C)

    def schur(self, G, Z, nvars):
        weighted = self.D.multiply((G * Z)[None, :])
        return np.asarray((weighted @ self.D.T).todense())

    @staticmethod
    def inverse(S):
        if np.any(S <= 0):
            raise np.linalg.LinAlgError("diagonal block is not positive definite")
        return 1.0 / S

    @staticmethod
    def max_step(S, dS):
        neg = dS < 0
        if not np.any(neg):
            return np.inf
        return float(np.min(-S[neg] / dS[neg]))

    @staticmethod
    def min_eig(S):
        return float(np.min(S))

    @staticmethod
    def identity(n):
        return np.ones(n)

    @staticmethod
    def product(A, B):
        return A * B

    @staticmethod
    def sym(X):
        return X


def _build_blocks(p: LmiProblem):
    blocks = []
    for start, n, diag in _block_slices(p.blocks()):
        cls = _DiagBlock if diag else _DenseBlock
        blocks.append(cls(start, n, p.F0, p.Fi))
    return blocks


def _inner(A: Sequence[np.ndarray], B: Sequence[np.ndarray]) -> float:
    return float(sum(np.sum(a * b) for a, b in zip(A, B)))


def _norm(A: Sequence[np.ndarray]) -> float:
    return float(np.sqrt(_inner(A, A)))


def _solve_schur(M: np.ndarray, rhs: np.ndarray, factor):
    if factor is None:
        return scipy.linalg.lstsq(M, rhs, lapack_driver="gelsd")[0]
    dx = scipy.linalg.cho_solve(factor, rhs)
    # refine against the unshifted M, keeping a step only if the residual shrinks
    residual = rhs - M @ dx
    for _ in range(REFINEMENT_STEPS):
        candidate = dx + scipy.linalg.cho_solve(factor, residual)
        candidate_residual = rhs - M @ candidate
        if np.linalg.norm(candidate_residual) >= np.linalg.norm(residual):
            break
        dx, residual = candidate, candidate_residual
    return dx


def _factor_schur(M: np.ndarray):
    M = (M + M.T) / 2
    try:
        return M, scipy.linalg.cho_factor(M, lower=True)
    except np.linalg.LinAlgError:
        pass
    scale = max(1.0, float(np.max(np.abs(np.diag(M)))))
    for shift in (1e-14, 1e-12, 1e-10):
        try:
            shifted = M + shift * scale * np.eye(M.shape[0])
            return M, scipy.linalg.cho_factor(shifted, lower=True)
        except np.linalg.LinAlgError:
            continue
    return M, None


class _DualProjector:
    """
    Moves Z onto {Z : tr(Fᵢ·Z) = cᵢ} along span{Fᵢ}, using the constant Gram
    matrix K[i, j] = ⟨Fᵢ, Fⱼ⟩. Disabled when the Fᵢ are linearly dependent.
    """

    def __init__(self, p: LmiProblem, blocks):
        self.blocks = blocks
        V = sp.hstack([f.reshape((p.dim * p.dim, 1)) for f in p.Fi]).tocsc()
        K = np.asarray((V.T @ V).todense())
        try:
            self.factor = scipy.linalg.cho_factor(K, lower=True)
        except np.linalg.LinAlgError:
            self.factor = None

    def correction(self, rd: np.ndarray):
        if self.factor is None:
            return None
        y = scipy.linalg.cho_solve(self.factor, rd)
        return [b.apply(y) for b in self.blocks]


def _is_positive_definite(blocks, mats) -> bool:
    try:
        for b, m in zip(blocks, mats):
            if b.diagonal:
                b.inverse(m)
            else:
                scipy.linalg.cholesky(m, lower=True)
    except np.linalg.LinAlgError:
        return False
    return True


def _project_dual(Z, rd: np.ndarray, c_norm: float, projector: _DualProjector, blocks):
    """Removes a small dual residual when Z + 2·correction stays positive definite."""
    dinf = float(np.linalg.norm(rd)) / (1.0 + c_norm)
    if dinf == 0.0 or dinf > PROJECTION_THRESHOLD:
        return Z
    corr = projector.correction(rd)
    if corr is None:
        return Z
    if not _is_positive_definite(blocks, [b.sym(z + 2.0 * d) for b, z, d in zip(blocks, Z, corr)]):
        return Z
    return [b.sym(z + d) for b, z, d in zip(blocks, Z, corr)]


def _initial_dual(p: LmiProblem, blocks, dual_start) -> Optional[List[np.ndarray]]:
    D = sp.csr_matrix(dual_start, dtype=float)
    if D.shape != (p.dim, p.dim):
        raise DimensionError("solve dual_start", (p.dim, p.dim), D.shape)
    _check_symmetric(D, "solve dual_start")
    Z = []
    for b in blocks:
        sl = slice(b.start, b.start + b.n)
        Z.append(np.asarray(D[sl, sl].diagonal(), dtype=float) if b.diagonal else D[sl, sl].toarray())
    if not _is_positive_definite(blocks, Z):
        print_to_debug_log("sdp -- dual start is not positive definite, using scaled identity", color="yellow")
        return None
    return Z


def solve(p: LmiProblem, opts: Optional[SolverOptions] = None, warm_start=None, dual_start=None) -> SdpSolution:
    """
    `warm_start` is a primal point x₀; `dual_start` an optional positive
    definite d×d matrix for the dual iterate (block structure respected,
    off-block entries ignored). A dual start satisfying tr(Fᵢ·Z) = cᵢ keeps
    the whole path dual feasible.
    """
    opts = opts or SolverOptions()
    if p.nvars < 1:
        raise DimensionError("solve decision variables", ">= 1", p.nvars)
    blocks = _build_blocks(p)
    nvars = p.nvars
    c = p.cost
    n_total = sum(b.n for b in blocks)
    c_norm = float(np.linalg.norm(c))

    x = np.zeros(nvars) if warm_start is None else p._check_x(warm_start).copy()
    S = [b.evaluate(x) for b in blocks]
    low = min(b.min_eig(s) for b, s in zip(blocks, S))
    if low <= 0:
        if warm_start is not None:
            print_to_debug_log(f"sdp -- warm start not strictly feasible (min eig {low:.3e}), shifting slack", color="yellow")
        shift = abs(low) + 1.0
        S = [s + shift * b.identity(b.n) for b, s in zip(blocks, S)]

    Z = None if dual_start is None else _initial_dual(p, blocks, dual_start)
    if Z is None:
        f_norms = np.sqrt(np.asarray([f.multiply(f).sum() for f in p.Fi], dtype=float))
        xi = max(10.0, np.sqrt(n_total), n_total * float(np.max((1.0 + np.abs(c)) / (1.0 + f_norms))))
        Z = [xi * b.identity(b.n) for b in blocks]
    projector = _DualProjector(p, blocks)

    def adjoint(mats):
        return sum(b.adjoint(m) for b, m in zip(blocks, mats))

    status = SolverStatus.MAX_ITERS
    stalls = 0
    last_pobj = None
    best_merit, best_iteration = np.inf, 0
    iteration = 0
    F0_blocks = [b.F0 for b in blocks]
    for iteration in range(opts.max_iters + 1):
        Fx = [b.evaluate(x) for b in blocks]
        Rp = [f - s for f, s in zip(Fx, S)]
        rd = c - adjoint(Z)
        pobj = float(c @ x)
        dobj = -_inner(F0_blocks, Z)
        complementarity = _inner(S, Z)
        pinf = _norm(Rp) / (1.0 + _norm(Fx))
        dinf = float(np.linalg.norm(rd)) / (1.0 + c_norm)
        gap = pobj - dobj
        gap_tol = opts.tol_gap * (1.0 + abs(pobj))

        print_to_debug_log(
            f"sdp -- it={iteration:3d} pobj={pobj:+.9e} dobj={dobj:+.9e} "
            f"gap={gap:.3e} pinf={pinf:.2e} dinf={dinf:.2e}"
        )
        if last_pobj is not None and pinf <= opts.tol_feas and pobj > last_pobj + gap_tol:
            print_to_debug_log(f"sdp -- primal objective increased at it={iteration}", color="yellow")
        last_pobj = pobj if pinf <= opts.tol_feas else None

        if abs(gap) <= gap_tol and complementarity <= gap_tol and pinf <= opts.tol_feas and dinf <= opts.tol_feas:
            status = SolverStatus.OPTIMAL
            break
        if iteration == opts.max_iters:
            break
        merit = max(abs(gap) / gap_tol, complementarity / gap_tol, pinf / opts.tol_feas, dinf / opts.tol_feas)
        if merit < 0.9 * best_merit:
            best_merit, best_iteration = merit, iteration
        elif iteration - best_iteration >= STALL_WINDOW:
            print_to_debug_log(f"sdp -- no progress for {STALL_WINDOW} iterations", color="yellow")
            status = SolverStatus.NUMERICAL_FAILURE
            break

        mu = complementarity / n_total
        try:
            G = [b.inverse(s) for b, s in zip(blocks, S)]
        except np.linalg.LinAlgError:
            status = SolverStatus.NUMERICAL_FAILURE
            break
        M = sum(b.schur(g, z, nvars) for b, g, z in zip(blocks, G, Z))
        M, factor = _factor_schur(M)

        ZRpG = [b.product(b.product(z, r), g) for b, z, r, g in zip(blocks, Z, Rp, G)]

        def direction(sigma_mu, corrector):
            C = [
                sigma_mu * g - z - zr - (cor if cor is not None else 0.0)
                for g, z, zr, cor in zip(G, Z, ZRpG, corrector)
            ]
            dx = _solve_schur(M, adjoint(C) - rd, factor)
            dS = [r + b.apply(dx) for b, r in zip(blocks, Rp)]
            dZ = [
                b.sym(sigma_mu * g - z - b.product(b.product(z, ds), g) - (cor if cor is not None else 0.0))
                for b, g, z, ds, cor in zip(blocks, G, Z, dS, corrector)
            ]
            return dx, dS, dZ

        def steps(dS, dZ):
            try:
                a = min(b.max_step(s, d) for b, s, d in zip(blocks, S, dS))
                z = min(b.max_step(s, d) for b, s, d in zip(blocks, Z, dZ))
            except np.linalg.LinAlgError:
                return None
            return min(1.0, opts.step_fraction * a), min(1.0, opts.step_fraction * z)

        none = [None] * len(blocks)
        if opts.predictor_corrector:
            dx, dS, dZ = direction(0.0, none)
            st = steps(dS, dZ)
            if st is None:
                status = SolverStatus.NUMERICAL_FAILURE
                break
            alpha, beta = st
            mu_aff = _inner(
                [s + alpha * d for s, d in zip(S, dS)],
                [z + beta * d for z, d in zip(Z, dZ)],
            ) / n_total
            sigma = min(1.0, max(0.0, mu_aff / mu) ** 3)
            corr = [b.product(b.product(dz, ds), g) for b, dz, ds, g in zip(blocks, dZ, dS, G)]
            dx, dS, dZ = direction(sigma * mu, corr)
        else:
            dx, dS, dZ = direction(0.1 * mu, none)

        st = steps(dS, dZ)
        if st is None or not np.all(np.isfinite(dx)):
            status = SolverStatus.NUMERICAL_FAILURE
            break
        alpha, beta = st
        x = x + alpha * dx
        S = [b.sym(s + alpha * d) for b, s, d in zip(blocks, S, dS)]
        Z = [b.sym(z + beta * d) for b, z, d in zip(blocks, Z, dZ)]

        stalls = stalls + 1 if max(alpha, beta) < STALL_STEP else 0
        if stalls >= MAX_STALLS:
            status = SolverStatus.NUMERICAL_FAILURE
            break

        Z = _project_dual(Z, c - adjoint(Z), c_norm, projector, blocks)

    _, min_eig = check_feasibility(p, x)
    pobj = float(c @ x)
    dobj = -_inner([b.F0 for b in blocks], Z)
    Fx = [b.evaluate(x) for b in blocks]
    solution = SdpSolution(
        x=x,
        objective=pobj,
        status=status,
        iterations=iteration,
        min_eig=min_eig,
        duality_gap=pobj - dobj,
        dual_objective=dobj,
        primal_infeasibility=_norm([f - s for f, s in zip(Fx, S)]) / (1.0 + _norm(Fx)),
        dual_infeasibility=float(np.linalg.norm(c - adjoint(Z))) / (1.0 + c_norm),
        Z=Z,
    )
    color = "green" if solution.ok else "red"
    print_to_debug_log(
        f"sdp -- finished status={status.value} iterations={iteration} objective={pobj:.9e} min_eig={min_eig:.3e}",
        color=color,
    )
    return solution


def solve_or_raise(p: LmiProblem, opts: Optional[SolverOptions] = None, warm_start=None, dual_start=None) -> SdpSolution:
    solution = solve(p, opts, warm_start, dual_start)
    if not solution.ok:
        raise SolverError(f"SDP solver stopped with status '{solution.status.value}'", solution.summary())
    return solution


# ---------------------------------------------------------------------------
# Sparse triplet text format
#
#   # comment lines
#   <d> <nvars>
#   blocks <size> <size> ...        (optional; negative = diagonal block)
#   cost <c_1> ... <c_nvars>
#   <matrix-index> <row> <col> <value>
#
# matrix-index 0 is F0, i is Fᵢ; indices are 0-based and only the upper
# triangle (row <= col) is listed.
# ---------------------------------------------------------------------------


def dump_triplets(p: LmiProblem, stream: IO[str]) -> None:
    stream.write("# lmi triplets: matrix 0 is F0, matrix i is F_i; 0-based upper triangle\n")
    stream.write(f"{p.dim} {p.nvars}\n")
    if p.block_structure is not None:
        stream.write("blocks " + " ".join(str(b) for b in p.block_structure) + "\n")
    stream.write("cost" + "".join(f" {v:.17g}" for v in p.cost) + "\n")
    for k, m in enumerate((p.F0,) + p.Fi):
        upper = sp.triu(m).tocoo()
        order = np.lexsort((upper.col, upper.row))
        for r, col, v in zip(upper.row[order], upper.col[order], upper.data[order]):
            stream.write(f"{k} {r} {col} {v:.17g}\n")


def load_triplets(stream: IO[str]) -> LmiProblem:
    lines = [ln.strip() for ln in stream if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise DataError("Empty LMI triplet file")
    try:
        d, nvars = (int(v) for v in lines[0].split())
        rest = lines[1:]
        blocks = None
        if rest and rest[0].startswith("blocks"):
            blocks = tuple(int(v) for v in rest[0].split()[1:])
            rest = rest[1:]
        if not rest or not rest[0].startswith("cost"):
            raise DataError("LMI triplet file is missing the cost line")
        cost = np.array([float(v) for v in rest[0].split()[1:]])
        entries = [[] for _ in range(nvars + 1)]
        for ln in rest[1:]:
            k, r, col, v = ln.split()
            entries[int(k)].append((int(r), int(col), float(v)))
    except ValueError as exc:
        raise DataError(f"Malformed LMI triplet file: {exc}")

    mats = []
    for triples in entries:
        rows, cols, vals = [], [], []
        for r, col, v in triples:
            rows.append(r)
            cols.append(col)
            vals.append(v)
            if r != col:
                rows.append(col)
                cols.append(r)
                vals.append(v)
        mats.append(sp.csr_matrix((vals, (rows, cols)), shape=(d, d)))
    return LmiProblem(cost=cost, F0=mats[0], Fi=tuple(mats[1:]), block_structure=blocks)
