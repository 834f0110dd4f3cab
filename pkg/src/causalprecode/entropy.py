"""Differential entropies and mutual information for the associated channel.

Given an associated symbol t = (i_1, ..., i_Q), the channel output density is
the Gaussian mixture sum_j r_j phi(y - x_{i_j} - s_j; P_N). This module
evaluates that likelihood, the output density induced by per-state marginals,
the tensor of conditional differential entropies h_{i_1...i_Q}, and
I(T;Y) = h(Y) - sum_t p(t) h_t.

All internal entropies are in nats; conversion to bits happens only at API
boundaries.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .model import AssociatedSymbol, ChannelSpec, JointPmf, MarginalSet, marginals_of

LN2 = math.log(2.0)

# Density values below this contribute 0 to the entropy integrand (0 ln 0 = 0).
_PDF_FLOOR = 1e-300

# Integration window extends this many noise sigmas beyond the extreme means.
_WINDOW_SIGMAS = 10.0


def gaussian_entropy(variance: float) -> float:
    """Differential entropy of a Gaussian, (1/2) ln(2 pi e variance), in nats."""
    if variance <= 0.0:
        raise ValueError("variance must be positive")
    return 0.5 * math.log(2.0 * math.pi * math.e * variance)


@dataclass(frozen=True)
class QuadratureGrid:
    """Composite Gauss-Legendre grid: `panels` equal panels over [lo, hi]."""

    lo: float
    hi: float
    panels: int
    nodes_per_panel: int = 32

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError("grid needs lo < hi")
        if self.panels < 1 or self.nodes_per_panel < 1:
            raise ValueError("grid needs panels >= 1 and nodes_per_panel >= 1")


@functools.lru_cache(maxsize=64)
def _grid_nodes(grid: QuadratureGrid) -> tuple[np.ndarray, np.ndarray]:
    """Flat (nodes, weights) arrays for a composite grid, fixed panel order."""
    ref_x, ref_w = leggauss(grid.nodes_per_panel)
    edges = np.linspace(grid.lo, grid.hi, grid.panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * ref_x[None, :]).reshape(-1)
    weights = (half[:, None] * ref_w[None, :]).reshape(-1)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def quadrature_grid(spec: ChannelSpec, nodes_per_panel: int = 32) -> QuadratureGrid:
    """Default grid for a spec: panel width sigma/2 over the means +- 10 sigma."""
    sigma = _sigma(spec)
    lo = min(spec.constellation) + min(spec.interference_levels) - _WINDOW_SIGMAS * sigma
    hi = max(spec.constellation) + max(spec.interference_levels) + _WINDOW_SIGMAS * sigma
    panels = max(1, math.ceil((hi - lo) / (sigma / 2.0)))
    return QuadratureGrid(lo, hi, panels, nodes_per_panel)


def _sigma(spec: ChannelSpec) -> float:
    if spec.noise_power <= 0.0:
        raise ValueError("degenerate noise; use the noisefree module")
    return math.sqrt(spec.noise_power)


def _check_symbol(t: AssociatedSymbol, spec: ChannelSpec) -> tuple[int, ...]:
    t = tuple(int(i) for i in t)
    if len(t) != spec.q:
        raise ValueError(f"symbol has {len(t)} components, expected {spec.q}")
    if any(not 1 <= i <= spec.m for i in t):
        raise ValueError(f"symbol indices {t} out of range 1..{spec.m}")
    return t


def symbol_means(t: AssociatedSymbol, spec: ChannelSpec) -> np.ndarray:
    """Mixture component means x_{i_j} + s_j for symbol t."""
    t = _check_symbol(t, spec)
    x = np.asarray(spec.constellation)
    s = np.asarray(spec.interference_levels)
    return x[np.array(t) - 1] + s


def mixture_pdf(t: AssociatedSymbol, y, spec: ChannelSpec):
    """Likelihood of output y given associated symbol t.

    `y` may be a scalar or ndarray; returns the same shape.
    """
    sigma = _sigma(spec)
    means = symbol_means(t, spec)
    r = np.asarray(spec.interference_probs)
    y = np.asarray(y, dtype=float)
    z = (y[..., None] - means) / sigma
    dens = (r * np.exp(-0.5 * z * z)).sum(axis=-1) / (sigma * math.sqrt(2.0 * math.pi))
    return dens if dens.shape else float(dens)


def output_pdf(marginals: MarginalSet, y, spec: ChannelSpec):
    """Output density sum_q r_q sum_i marginals[q][i] phi(y - x_i - s_q)."""
    sigma = _sigma(spec)
    if marginals.m != spec.m or marginals.q != spec.q:
        raise ValueError("marginal shape does not match the channel spec")
    x = np.asarray(spec.constellation)
    s = np.asarray(spec.interference_levels)
    r = np.asarray(spec.interference_probs)
    w = (r[:, None] * marginals.per_state).reshape(-1)  # weight of mean x_i + s_q
    means = (s[:, None] + x[None, :]).reshape(-1)
    y = np.asarray(y, dtype=float)
    z = (y[..., None] - means) / sigma
    dens = (w * np.exp(-0.5 * z * z)).sum(axis=-1) / (sigma * math.sqrt(2.0 * math.pi))
    return dens if dens.shape else float(dens)


def _entropy_from_samples(p: np.ndarray, weights: np.ndarray) -> float:
    """-integral p ln p from density samples on the grid, 0 ln 0 taken as 0."""
    if not np.all(np.isfinite(p)):
        raise ValueError("pdf produced non-finite values on the grid")
    safe = np.where(p > _PDF_FLOOR, p, 1.0)
    integrand = np.where(p > _PDF_FLOOR, -p * np.log(safe), 0.0)
    return float(np.dot(weights, integrand))


def integrate(pdf, grid: QuadratureGrid) -> float:
    """Plain integral of `pdf` over the grid (normalization checks)."""
    nodes, weights = _grid_nodes(grid)
    p = np.asarray(pdf(nodes), dtype=float)
    return float(np.dot(weights, p))


def differential_entropy(pdf, grid: QuadratureGrid) -> float:
    """Composite Gauss-Legendre estimate of -integral p ln p, in nats.

    `pdf` must accept an ndarray of evaluation points and be nonnegative.
    """
    nodes, weights = _grid_nodes(grid)
    p = np.asarray(pdf(nodes), dtype=float)
    return _entropy_from_samples(p, weights)


@dataclass(frozen=True, eq=False)
class CostTensor:
    """Conditional differential entropies h_{i_1...i_Q}, shape (M,)*Q, in nats."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.ndim < 1 or len(set(v.shape)) != 1:
            raise ValueError("cost tensor must be (M,)*Q shaped")
        if not np.all(np.isfinite(v)):
            raise ValueError("cost tensor entries must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def q(self) -> int:
        return self.values.ndim

    def entry(self, symbol: AssociatedSymbol) -> float:
        return float(self.values[tuple(i - 1 for i in symbol)])


def _mixture_matrix(
    spec: ChannelSpec, nodes: np.ndarray, ranks: np.ndarray
) -> np.ndarray:
    """Densities of the mixtures for the symbols with the given flat ranks.

    Returns shape (len(nodes), len(ranks)). Column order follows `ranks`.
    """
    sigma = _sigma(spec)
    x = np.asarray(spec.constellation)
    s = np.asarray(spec.interference_levels)
    r = np.asarray(spec.interference_probs)
    # digits[k, j] = i_j - 1 for the k-th requested symbol
    digits = np.empty((len(ranks), spec.q), dtype=np.int64)
    rem = np.asarray(ranks, dtype=np.int64).copy()
    for j in range(spec.q - 1, -1, -1):
        digits[:, j] = rem % spec.m
        rem //= spec.m
    norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi))
    # gauss[n, i, j] = phi(node_n - x_i - s_j)
    z = (nodes[:, None, None] - (x[None, :, None] + s[None, None, :])) / sigma
    gauss = norm * np.exp(-0.5 * z * z)
    dens = np.zeros((len(nodes), len(ranks)))
    for j in range(spec.q):
        dens += r[j] * gauss[:, digits[:, j], j]
    return dens


def cost_tensor(spec: ChannelSpec, grid: QuadratureGrid | None = None) -> CostTensor:
    """Differential entropy of the output for every associated symbol."""
    if grid is None:
        grid = quadrature_grid(spec)
    nodes, weights = _grid_nodes(grid)
    n = spec.num_symbols
    values = np.empty(n)
    floor = gaussian_entropy(spec.noise_power) - 1e-9
    for start in range(0, n, 4096):
        ranks = np.arange(start, min(start + 4096, n))
        dens = _mixture_matrix(spec, nodes, ranks)
        for k, rank in enumerate(ranks):
            values[rank] = _entropy_from_samples(dens[:, k], weights)
    # A mixture's entropy is at least its component entropy.
    assert values.min() >= floor, "cost tensor below the Gaussian floor"
    return CostTensor(values.reshape((spec.m,) * spec.q))


def conditional_output_entropy(
    p: JointPmf,
    spec: ChannelSpec,
    grid: QuadratureGrid | None = None,
    costs: CostTensor | None = None,
) -> float:
    """h(Y|T) = sum_t p(t) h_t in nats, over the support of p."""
    if costs is not None:
        return float(np.dot(p.probs, costs.values.reshape(-1)))
    if grid is None:
        grid = quadrature_grid(spec)
    nodes, weights = _grid_nodes(grid)
    ranks = np.nonzero(p.probs > 0.0)[0]
    dens = _mixture_matrix(spec, nodes, ranks)
    total = 0.0
    for k, rank in enumerate(ranks):
        total += float(p.probs[rank]) * _entropy_from_samples(dens[:, k], weights)
    return total


def mutual_information(
    p: JointPmf,
    spec: ChannelSpec,
    grid: QuadratureGrid | None = None,
    costs: CostTensor | None = None,
) -> float:
    """I(T;Y) = h(Y) - h(Y|T) in bits, for input distribution p.

    h(Y) is computed from the per-state marginals of p; a precomputed
    CostTensor may be passed to skip re-integrating h(Y|T).
    """
    if p.m != spec.m or p.q != spec.q:
        raise ValueError("pmf shape does not match the channel spec")
    if grid is None:
        grid = quadrature_grid(spec)
    marg = marginals_of(p)
    nodes, weights = _grid_nodes(grid)
    h_y = _entropy_from_samples(np.asarray(output_pdf(marg, nodes, spec)), weights)
    h_y_t = conditional_output_entropy(p, spec, grid=grid, costs=costs)
    return (h_y - h_y_t) / LN2


