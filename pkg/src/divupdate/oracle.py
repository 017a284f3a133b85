"""Brute-force minimizers used to certify the closed-form updates.

The search space is every ``sigma = sum_i p^emp_i sigma_i`` with ``sigma_i``
a distribution on block ``i``.  Internally a candidate is stored as the
concatenation ``z`` of the block-local vectors (``z[x] = sigma_i(x)`` for
``x`` in block ``i``), so the feasible set is a product of simplices.

Nothing here calls the solvers in :mod:`divupdate.update`.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .divergence import hellinger_sq, quadratic_bregman
from .exceptions import BlockTooLarge, DimensionMismatch, NonConvergence
from .space import EmpiricalEvidence, PartitionedPrior

GRID_MAX_BLOCK = 4
GRID_MAX_RESOLUTION = 60
ARMIJO = 1e-4


class Objective(str, enum.Enum):
    HELLINGER_SQ = "hellinger"
    QUADRATIC_BREGMAN = "bregman"


class OracleMethod(str, enum.Enum):
    GRID = "grid"
    DESCENT = "descent"


@dataclass(frozen=True)
class OracleConfig:
    method: OracleMethod = OracleMethod.DESCENT
    grid_resolution: int = 50
    max_iterations: int = 20000
    step_size: float = 1.0
    convergence_tol: float = 1e-10
    seed: int = 0
    random_starts: int = 4
    gradient_cap: float = 1e8
    refine: bool = True

    def __post_init__(self):
        object.__setattr__(self, "method", OracleMethod(self.method))
        if int(self.grid_resolution) < 2:
            raise ValueError("grid_resolution must be at least 2")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")
        if int(self.max_iterations) < 1 or not self.step_size > 0:
            raise ValueError("max_iterations and step_size must be positive")
        if int(self.seed) < 0:
            raise ValueError("seed must be nonnegative")


@dataclass(frozen=True)
class OracleResult:
    point: np.ndarray
    value: float
    objective: Objective
    iterations: int
    converged: bool
    residual: float
    history: tuple = field(default=(), repr=False)


@dataclass(frozen=True)
class Certificate:
    objective: Objective
    oracle: OracleResult
    closed_form_value: float
    gap: float
    distance: float
    passed: bool

    @property
    def oracle_value(self) -> float:
        return self.oracle.value


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort and threshold)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    active = u - css / k > 0
    r = k[active][-1]
    theta = css[active][-1] / r
    return np.maximum(v - theta, 0.0)


class _Problem:
    """Objective, gradient and exact increments in the block-local coordinates."""

    def __init__(self, prior: PartitionedPrior, evidence: EmpiricalEvidence, objective, cap):
        self.objective = Objective(objective)
        self.mu = np.asarray(prior.weights, dtype=float)
        self.n = prior.n
        pe = np.asarray(evidence.block_probs, dtype=float)
        if pe.size != self.n:
            raise DimensionMismatch(f"{pe.size} empirical probabilities for {self.n} blocks")
        self.blocks = [np.flatnonzero(prior.block_of == i) for i in range(1, self.n + 1)]
        self.w = pe[prior.block_of - 1]
        self.sqrt_mu = np.sqrt(self.mu)
        self.cap = cap

    def sigma(self, z):
        return self.w * z

    def value(self, z) -> float:
        if self.objective is Objective.HELLINGER_SQ:
            return hellinger_sq(self.sigma(z), self.mu)
        return quadratic_bregman(self.sigma(z), self.mu)

    def grad(self, z):
        if self.objective is Objective.HELLINGER_SQ:
            root = np.sqrt(z)
            with np.errstate(divide="ignore"):
                g = -np.sqrt(self.w) * self.sqrt_mu / (2.0 * root)
            return np.maximum(g, -self.cap)
        return self.w * (self.sigma(z) - self.mu)

    def increment(self, z, step) -> float:
        """``F(z + step) - F(z)`` without cancellation against the constant part."""
        s0 = self.sigma(z)
        ds = self.w * step
        if self.objective is Objective.HELLINGER_SQ:
            s1 = np.maximum(s0 + ds, 0.0)
            den = np.sqrt(s0) + np.sqrt(s1)
            with np.errstate(invalid="ignore", divide="ignore"):
                terms = np.where(den > 0, -self.sqrt_mu * ds / den, 0.0)
            return float(np.sum(terms))
        return float(np.dot(ds, s0 - self.mu) + 0.5 * np.dot(ds, ds))

    def block_multipliers(self, z, g):
        """Mean gradient over the free coordinates of each block."""
        out = np.empty_like(g)
        for idx in self.blocks:
            free = idx[z[idx] > 0]
            out[idx] = g[free if free.size else idx].mean()
        return out

    def project(self, z):
        out = np.empty_like(z)
        for idx in self.blocks:
            out[idx] = project_simplex(z[idx])
        return out

    def block_terms(self, i, grid):
        """Objective contribution of block ``i`` (up to a constant) for each grid row."""
        idx = self.blocks[i]
        w = self.w[idx[0]]
        if self.objective is Objective.HELLINGER_SQ:
            return -np.sqrt(w * grid * self.mu[idx]).sum(axis=1)
        return 0.5 * ((w * grid - self.mu[idx]) ** 2).sum(axis=1)


def simplex_grid(k: int, resolution: int) -> np.ndarray:
    """All points of the k-simplex with coordinates in multiples of 1/resolution, lex order."""
    rows = []
    for bars in itertools.combinations(range(resolution + k - 1), k - 1):
        edges = (-1,) + bars + (resolution + k - 1,)
        rows.append([edges[j + 1] - edges[j] - 1 for j in range(k)])
    grid = np.array(rows, dtype=float) / resolution
    order = np.lexsort(grid.T[::-1])
    return grid[order]


def _grid_point(problem: _Problem, resolution: int) -> np.ndarray:
    z = np.zeros(problem.mu.size)
    for i, idx in enumerate(problem.blocks):
        if idx.size > GRID_MAX_BLOCK:
            raise BlockTooLarge(i + 1, idx.size, GRID_MAX_BLOCK)
        grid = simplex_grid(idx.size, resolution)
        # argmin returns the first, hence lexicographically smallest, minimizer
        z[idx] = grid[int(np.argmin(problem.block_terms(i, grid)))]
    return z


def _descend(problem: _Problem, z0: np.ndarray, config: OracleConfig) -> OracleResult:
    """Spectral projected gradient with a monotone Armijo backtracking search."""
    z = problem.project(z0)
    g = problem.grad(z)
    # A per-block constant in the gradient acts only along the block sums,
    # which feasible steps keep fixed; rounding drift in those sums, weighted
    # by the block multiplier, would otherwise swamp the decrease near the
    # optimum.
    gbar = problem.block_multipliers(z, g)
    alpha = config.step_size
    history = [problem.value(z)]
    residual = float(np.max(np.abs(z - problem.project(z - g))))
    it = 0
    while residual > config.convergence_tol and it < config.max_iterations:
        it += 1
        d = problem.project(z - alpha * (g - gbar)) - z
        slope = float(np.dot(g - gbar, d))
        t = 1.0
        delta = problem.increment(z, d) - float(np.dot(gbar, d))
        while delta > ARMIJO * t * slope and t > 1e-30:
            t *= 0.5
            delta = problem.increment(z, t * d) - t * float(np.dot(gbar, d))
        if delta > 0:
            break
        z_new = np.maximum(z + t * d, 0.0)
        g_new = problem.grad(z_new)
        s, y = z_new - z, g_new - g
        sy = float(np.dot(s, y))
        alpha = min(max(float(np.dot(s, s)) / sy, 1e-12), 1e12) if sy > 0 else 1e12
        z, g = z_new, g_new
        gbar = problem.block_multipliers(z, g)
        history.append(problem.value(z))
        residual = float(np.max(np.abs(z - problem.project(z - g))))
    return OracleResult(
        point=problem.sigma(z),
        value=problem.value(z),
        objective=problem.objective,
        iterations=it,
        converged=residual <= config.convergence_tol,
        residual=residual,
        history=tuple(history),
    )


def _starts(problem: _Problem, config: OracleConfig):
    rng = np.random.default_rng(config.seed)
    uniform = np.empty(problem.mu.size)
    for idx in problem.blocks:
        uniform[idx] = 1.0 / idx.size
    yield uniform
    for _ in range(config.random_starts):
        z = np.empty(problem.mu.size)
        for idx in problem.blocks:
            z[idx] = rng.dirichlet(np.ones(idx.size))
        yield z


def _best(results):
    """Smallest objective; exact ties go to the lexicographically smallest point."""
    return min(results, key=lambda r: (r.value, tuple(r.point)))


def oracle_minimize(prior: PartitionedPrior, evidence: EmpiricalEvidence, objective,
                    config: OracleConfig | None = None) -> OracleResult:
    """Minimize the divergence from the prior over the constraint family numerically.

    Grid search scans each block simplex exhaustively; since both objectives
    are sums of per-block terms, the per-block optima together are optimal
    over the full product grid.  The grid optimum is then polished by
    projected descent unless ``config.refine`` is false.  Descent mode runs
    from the block-uniform start plus ``random_starts`` seeded random starts.

    Raises
    ------
    BlockTooLarge
        Grid search on a block with more than four points.
    NonConvergence
        The selected descent run did not reach ``convergence_tol``.
    """
    config = config or OracleConfig()
    problem = _Problem(prior, evidence, objective, config.gradient_cap)

    if config.method is OracleMethod.GRID:
        if config.grid_resolution > GRID_MAX_RESOLUTION:
            raise ValueError(f"grid_resolution is limited to {GRID_MAX_RESOLUTION}")
        z = _grid_point(problem, int(config.grid_resolution))
        if not config.refine:
            return OracleResult(problem.sigma(z), problem.value(z), problem.objective, 0, True, 0.0,
                                (problem.value(z),))
        best = _descend(problem, z, config)
    else:
        best = _best([_descend(problem, z0, config) for z0 in _starts(problem, config)])

    if not best.converged:
        raise NonConvergence(best)
    return best


def objective_value(prior: PartitionedPrior, objective, sigma) -> float:
    sigma = np.asarray(sigma, dtype=float)
    if Objective(objective) is Objective.HELLINGER_SQ:
        return hellinger_sq(sigma, prior.weights)
    return quadratic_bregman(sigma, prior.weights)


def oracle_certify(prior: PartitionedPrior, evidence: EmpiricalEvidence, objective, closed_form,
                   config: OracleConfig | None = None) -> Certificate:
    """Compare a claimed minimizer with the oracle optimum.

    PASS requires the objective gap to be at most ``10 * convergence_tol`` and
    the sup-norm distance between the two minimizers to be at most 1e-3.
    """
    config = config or OracleConfig()
    closed_form = np.asarray(closed_form, dtype=float)
    if closed_form.shape != prior.weights.shape:
        raise DimensionMismatch("closed-form posterior does not match the prior's points")
    result = oracle_minimize(prior, evidence, objective, config)
    claimed = objective_value(prior, objective, closed_form)
    gap = claimed - result.value
    distance = float(np.max(np.abs(closed_form - result.point)))
    passed = gap <= 10 * config.convergence_tol and distance <= 1e-3
    return Certificate(Objective(objective), result, claimed, gap, distance, passed)
