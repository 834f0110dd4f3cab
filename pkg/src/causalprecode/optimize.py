"""Linear programs over the associated channel and a capacity oracle.

Two LPs share one engine: minimize sum h_{i_1...i_Q} p_{i_1...i_Q} subject to
fixed per-state marginals (the general problem), and the same with all
marginals uniform 1/M (uniform transmission). The constraint system has
MQ rows of which MQ - Q + 1 are independent; solving on a basis of that
size yields optima with support at most MQ - Q + 1.

The capacity oracle is Blahut-Arimoto on an output-discretized copy of the
channel; its result is labeled as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import entropy as _entropy
from .model import SUPPORT_THRESHOLD, ChannelSpec, JointPmf, MarginalSet, marginals_of
from .entropy import LN2, CostTensor, QuadratureGrid

# Reduced-cost / pivot tolerances for the dense simplex.
_RC_TOL = 1e-10
_PIVOT_TOL = 1e-11
_RATIO_TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class LpSolution:
    """A basic optimal solution of the marginal-constrained minimization."""

    pmf: JointPmf
    objective: float  # minimized sum h*p, nats
    iterations: int
    basis_size: int
    rate_bits: float | None = None  # uniform-transmission rate, when computed


@dataclass(frozen=True, eq=False)
class CapacityResult:
    """Blahut-Arimoto output for the discretized associated channel."""

    pmf: JointPmf
    capacity_bits: float
    converged: bool
    iterations: int
    lower_bounds: tuple[float, ...] | None = None


class SimplexError(RuntimeError):
    """Internal simplex failure (should not occur on transportation instances)."""


def _state_digits(m: int, q: int) -> np.ndarray:
    """digits[s, k] = 0-based letter of state s in the k-th lexicographic symbol."""
    digits = np.empty((q, m**q), dtype=np.int64)
    rem = np.arange(m**q, dtype=np.int64)
    for j in range(q - 1, -1, -1):
        digits[j] = rem % m
        rem //= m
    return digits


def _constraint_rows(m: int, q: int) -> np.ndarray:
    """Independent marginal-constraint matrix, shape (MQ - Q + 1, M^Q).

    Row (state s, letter i) selects the symbols with i_s = i. All M rows of
    state 1 are kept; for every later state the last letter's row is dropped
    (it is implied by the others, since every state's rows sum to the total
    mass).
    """
    digits = _state_digits(m, q)
    rows = []
    for s in range(q):
        keep = m if s == 0 else m - 1
        for i in range(keep):
            rows.append((digits[s] == i).astype(float))
    return np.asarray(rows)


def _full_constraints(m: int, q: int, targets: MarginalSet) -> tuple[np.ndarray, np.ndarray]:
    """All MQ rows and right-hand sides, for post-solve verification."""
    digits = _state_digits(m, q)
    a = np.asarray([(digits[s] == i).astype(float) for s in range(q) for i in range(m)])
    return a, targets.per_state.reshape(-1)


def _iterate_simplex(
    a: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    basis: list[int],
    bland_after: int,
) -> tuple[list[int], np.ndarray, int]:
    """Revised simplex loop; returns (basis, basic values, pivot count).

    Dantzig pricing until `bland_after` consecutive degenerate pivots have
    occurred, then Bland's rule (guarantees termination on these highly
    degenerate transportation polytopes).
    """
    n_rows, n_cols = a.shape
    bland = False
    degenerate_run = 0
    iterations = 0
    max_iterations = 200 * (n_rows + n_cols) + 1000
    while True:
        basis_mat = a[:, basis]
        x_basic = np.linalg.solve(basis_mat, b)
        duals = np.linalg.solve(basis_mat.T, c[basis])
        reduced = c - duals @ a
        reduced[basis] = 0.0
        if bland:
            candidates = np.nonzero(reduced < -_RC_TOL)[0]
            if candidates.size == 0:
                return basis, x_basic, iterations
            entering = int(candidates[0])
        else:
            entering = int(np.argmin(reduced))
            if reduced[entering] >= -_RC_TOL:
                return basis, x_basic, iterations
        direction = np.linalg.solve(basis_mat, a[:, entering])
        positive = direction > _PIVOT_TOL
        if not np.any(positive):
            raise SimplexError("unbounded direction on a bounded polytope")
        ratios = np.full(n_rows, np.inf)
        ratios[positive] = np.maximum(x_basic[positive], 0.0) / direction[positive]
        theta = float(ratios.min())
        ties = np.nonzero(ratios <= theta + _RATIO_TIE_TOL)[0]
        # Among tied rows leave the smallest variable index (Bland-safe).
        leaving_row = int(min(ties, key=lambda i: basis[i]))
        basis[leaving_row] = entering
        iterations += 1
        if theta <= _RATIO_TIE_TOL:
            degenerate_run += 1
            if degenerate_run > bland_after:
                bland = True
        else:
            degenerate_run = 0
        if iterations > max_iterations:
            raise SimplexError("simplex failed to terminate")


def _simplex_min(
    a: np.ndarray, b: np.ndarray, c: np.ndarray, bland_after: int
) -> tuple[np.ndarray, float, int, list[int]]:
    """Two-phase dense simplex for min c.x s.t. a x = b, x >= 0 (b >= 0)."""
    n_rows, n_cols = a.shape
    # Phase 1: artificial identity basis.
    a1 = np.hstack([a, np.eye(n_rows)])
    c1 = np.concatenate([np.zeros(n_cols), np.ones(n_rows)])
    basis = list(range(n_cols, n_cols + n_rows))
    basis, x_basic, it1 = _iterate_simplex(a1, b, c1, basis, bland_after)
    infeasibility = float(np.dot(c1[basis], x_basic))
    if infeasibility > 1e-8:
        raise SimplexError("infeasible marginal targets")
    # Drive leftover zero-level artificials out of the basis.
    for pos in range(n_rows):
        if basis[pos] < n_cols:
            continue
        inv_row = np.linalg.solve(a1[:, basis].T, np.eye(n_rows)[pos])
        pivots = np.abs(inv_row @ a)
        pivots[[j for j in basis if j < n_cols]] = 0.0
        j = int(np.argmax(pivots))
        if pivots[j] <= 1e-9:
            raise SimplexError("constraint rows are rank deficient")
        basis[pos] = j
    # Phase 2 on the real objective.
    basis, x_basic, it2 = _iterate_simplex(a, b, c, basis, bland_after)
    x = np.zeros(n_cols)
    x[basis] = np.maximum(x_basic, 0.0)
    return x, float(np.dot(c, x)), it1 + it2, basis


def solve_marginal_lp(costs: CostTensor, targets: MarginalSet) -> LpSolution:
    """Minimize sum h*p over joint pmfs with the given per-state marginals.

    Returns a basic optimal solution, so the support never exceeds
    MQ - Q + 1.
    """
    m, q = costs.m, costs.q
    if (targets.q, targets.m) != (q, m):
        raise ValueError("targets shape does not match the cost tensor")
    a = _constraint_rows(m, q)
    b = np.concatenate(
        [targets.per_state[0], targets.per_state[1:, : m - 1].reshape(-1)]
    )
    c = costs.values.reshape(-1)
    x, objective, iterations, basis = _simplex_min(a, b, c, bland_after=10 * m * q)
    a_full, b_full = _full_constraints(m, q, targets)
    residual = np.abs(a_full @ x - b_full).max()
    if residual > 1e-8:
        raise SimplexError(f"constraint residual {residual:.3e} exceeds 1e-8")
    total = x.sum()
    if abs(total - 1.0) > 1e-9:  # guard against accumulated round-off
        x = x / total
    return LpSolution(
        pmf=JointPmf(m, q, x),
        objective=objective,
        iterations=iterations,
        basis_size=len(basis),
    )


def solve_uniform_lp(
    costs: CostTensor,
    spec: ChannelSpec | None = None,
    grid: QuadratureGrid | None = None,
) -> LpSolution:
    """Uniform transmission: solve_marginal_lp with every marginal = 1/M.

    When `spec` is given, the achieved rate h(Y) - objective is reported in
    bits via `rate_bits`.
    """
    sol = solve_marginal_lp(costs, MarginalSet.uniform(costs.m, costs.q))
    if spec is None:
        return sol
    if grid is None:
        grid = _entropy.quadrature_grid(spec)
    nodes, weights = _entropy._grid_nodes(grid)
    marg = MarginalSet.uniform(spec.m, spec.q)
    h_y = _entropy._entropy_from_samples(
        np.asarray(_entropy.output_pdf(marg, nodes, spec)), weights
    )
    return replace(sol, rate_bits=(h_y - sol.objective) / LN2)


def support_reduce(
    spec: ChannelSpec,
    p: JointPmf,
    costs: CostTensor | None = None,
    grid: QuadratureGrid | None = None,
) -> LpSolution:
    """Shrink the support of p to at most MQ - Q + 1 without losing rate.

    Re-solves the marginal LP with targets = marginals of p; the optimum has
    the same h(Y) and no larger h(Y|T), hence mutual information at least
    that of p.
    """
    if costs is None:
        costs = _entropy.cost_tensor(spec, grid)
    return solve_marginal_lp(costs, marginals_of(p))


def _discretized_channel(
    spec: ChannelSpec, step: float | None
) -> tuple[np.ndarray, float]:
    """Row-stochastic transition matrix onto a midpoint output grid."""
    sigma = math.sqrt(spec.noise_power)
    if step is None:
        step = sigma / 20.0
    lo = min(spec.constellation) + min(spec.interference_levels) - 10.0 * sigma
    hi = max(spec.constellation) + max(spec.interference_levels) + 10.0 * sigma
    n_cells = max(2, math.ceil((hi - lo) / step))
    centers = lo + (np.arange(n_cells) + 0.5) * step
    dens = _entropy._mixture_matrix(spec, centers, np.arange(spec.num_symbols))
    w = dens.T * step
    w /= w.sum(axis=1, keepdims=True)
    return w, step


def blahut_arimoto(
    spec: ChannelSpec,
    step: float | None = None,
    tol: float = 1e-7,
    max_iter: int = 10000,
    track_lower_bounds: bool = False,
) -> CapacityResult:
    """Capacity of the output-discretized associated channel, in bits.

    Alternating maximization over the input pmf; stops when the per-symbol
    Kuhn-Tucker divergences agree within `tol` nats (max over all symbols
    minus min over the support). The log(step) discretization offset cancels
    inside the divergences, so the result approximates the continuous-output
    capacity with O(step^2) error.
    """
    if spec.noise_power <= 0.0:
        raise ValueError("degenerate noise; use the noisefree module")
    w, _ = _discretized_channel(spec, step)
    n = w.shape[0]
    w_log_w = np.where(w > 0.0, w * np.log(np.where(w > 0.0, w, 1.0)), 0.0).sum(axis=1)
    p = np.full(n, 1.0 / n)
    bounds: list[float] = []
    info = 0.0
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        p_y = p @ w
        log_p_y = np.log(np.where(p_y > 0.0, p_y, 1.0))
        div = w_log_w - w @ log_p_y  # KL(row_t || output), nats
        info = float(np.dot(p, div))
        if track_lower_bounds:
            bounds.append(info / LN2)
        gap = float(div.max() - div[p > SUPPORT_THRESHOLD].min())
        if gap < tol:
            converged = True
            break
        scaled = p * np.exp(div - div.max())
        p = scaled / scaled.sum()
    return CapacityResult(
        pmf=JointPmf(spec.m, spec.q, p / p.sum()),
        capacity_bits=info / LN2,
        converged=converged,
        iterations=iterations,
        lower_bounds=tuple(bounds) if track_lower_bounds else None,
    )
