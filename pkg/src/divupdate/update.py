"""Closed-form optimal updates of a partitioned prior and their Pythagorean identities.

Two objectives are covered.  Minimizing the squared Hellinger distance keeps
the prior conditionals inside each block (Jeffrey-style reweighting).
Minimizing the quadratic Bregman divergence shifts each block by a constant
instead, which is only a valid distribution when the evidence is close
enough to the prior (see :func:`bregman_feasibility`).

Every solver returns an :class:`UpdateResult`.  Its ``posterior`` is always
``sum_i block_weights[i] * block_components[i]``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .divergence import hellinger_sq, quadratic_bregman, shannon_entropy
from .exceptions import (
    DegenerateConditional,
    DegeneratePriorConditional,
    DivUpdateError,
    InfeasibleEvidence,
    InvalidProblem,
    SupportViolation,
)
from .space import (
    EmpiricalEvidence,
    Event,
    PartitionedPrior,
    block_stats,
    refine_by_event,
    refine_evidence,
    validate,
)

FEASIBILITY_TOL = 1e-12
RENORMALIZATION_DRIFT = 1e-10
COINCIDENCE_TOL = 1e-12


class Method(str, enum.Enum):
    HELLINGER = "HellingerT1"
    BREGMAN = "BregmanT2"
    HELLINGER_CONDITIONAL = "HellingerConditional"
    BREGMAN_CONDITIONAL = "BregmanConditional"
    EXISTENCE = "ExistenceConstruction"


class ExistenceMode(str, enum.Enum):
    CONSISTENT = "consistent"
    PAPER_LITERAL = "paper-literal"


@dataclass(frozen=True)
class UpdateResult:
    method: Method
    posterior: np.ndarray
    block_components: tuple
    block_weights: np.ndarray
    objective_value: float
    feasibility_margins: np.ndarray
    prior_entropy: float
    posterior_entropy: float
    q_blocks: np.ndarray
    q_cond: Optional[np.ndarray] = None
    extras: dict = field(default_factory=dict)


def _require_valid(prior, evidence):
    problems = validate(prior, evidence)
    if problems:
        raise InvalidProblem(problems)


def _readonly(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _mixture(weights, components) -> np.ndarray:
    return np.sum([w * c for w, c in zip(weights, components)], axis=0)


def _block_min(prior: PartitionedPrior, values: np.ndarray) -> np.ndarray:
    return np.array([values[prior.block_mask(i)].min() for i in range(1, prior.n + 1)])


def _finish(method, prior, weights, components, margins, event=None, extras=None) -> UpdateResult:
    """Assemble the result; ``prior`` carries the original (unrefined) blocks."""
    posterior = _mixture(weights, components)
    mu = prior.weights
    if method in (Method.BREGMAN, Method.BREGMAN_CONDITIONAL):
        objective = quadratic_bregman(posterior, mu)
    else:
        objective = hellinger_sq(posterior, mu)
    q_blocks = np.array([posterior[prior.block_mask(i)].sum() for i in range(1, prior.n + 1)])
    q_cond = None
    if event is not None:
        q_cond = np.array(
            [
                posterior[prior.block_mask(i) & event.member].sum() / q_blocks[i - 1]
                for i in range(1, prior.n + 1)
            ]
        )
    return UpdateResult(
        method=method,
        posterior=_readonly(posterior),
        block_components=tuple(_readonly(c) for c in components),
        block_weights=_readonly(weights),
        objective_value=objective,
        feasibility_margins=_readonly(margins),
        prior_entropy=shannon_entropy(mu),
        posterior_entropy=shannon_entropy(posterior),
        q_blocks=_readonly(q_blocks),
        q_cond=None if q_cond is None else _readonly(q_cond),
        extras=dict(extras or {}),
    )


def _event_of(evidence):
    return evidence.event if evidence.has_event else None


# -- unconditional updates ----------------------------------------------------


def hellinger_update(prior: PartitionedPrior, evidence: EmpiricalEvidence) -> UpdateResult:
    """Hellinger-optimal posterior ``sum_i p^emp_i mu_i``.

    The prior conditional inside every block is kept; only the block masses
    move to their empirical values.  For any event ``B`` the posterior
    probability is ``sum_i p^emp_i p(B | O_i)``.
    """
    _require_valid(prior, evidence)
    stats = block_stats(prior)
    components = [s.mu for s in stats]
    margins = _block_min(prior, np.sum(components, axis=0))
    return _finish(
        Method.HELLINGER, prior, evidence.block_probs, components, margins, _event_of(evidence)
    )


def _point_margins(prior, evidence, stats) -> np.ndarray:
    """``p^emp_i - p_i (1 - |O_i| mu_i(x))`` evaluated at every point ``x``."""
    margins = np.empty(prior.size)
    for s, pe in zip(stats, evidence.block_probs):
        m = s.mask
        margins[m] = pe - s.p * (1.0 - s.size * s.mu[m])
    return margins


def bregman_point_margins(prior: PartitionedPrior, evidence: EmpiricalEvidence) -> np.ndarray:
    _require_valid(prior, evidence)
    return _point_margins(prior, evidence, block_stats(prior))


def bregman_feasibility(prior: PartitionedPrior, evidence: EmpiricalEvidence) -> np.ndarray:
    """Per-block minimum of the feasibility margin of the quadratic-Bregman update.

    The closed form of :func:`bregman_update` is a distribution exactly when
    every entry is nonnegative.  Each margin equals
    ``p^emp_i * |O_i| * min_x nu_i(x)``.
    """
    return _block_min(prior, bregman_point_margins(prior, evidence))


def bregman_closed_form(prior: PartitionedPrior, evidence: EmpiricalEvidence):
    """Raw block components ``(1 - r_i) rho_i + r_i mu_i`` with ``r_i = p_i / p^emp_i``.

    No feasibility check and no clamping: components may be negative when the
    evidence is infeasible.  Returns ``(posterior, components)``.
    """
    _require_valid(prior, evidence)
    stats = block_stats(prior)
    components = []
    for s, pe in zip(stats, evidence.block_probs):
        r = s.p / pe
        components.append((1.0 - r) * s.rho + r * s.mu)
    return _mixture(evidence.block_probs, components), components


def _infeasible(prior, margins, labeler=None):
    bad = np.flatnonzero(margins < -FEASIBILITY_TOL)
    violations = [(int(prior.block_of[k]), int(k), float(margins[k])) for k in bad]
    k = int(bad[np.argmin(margins[bad])])
    block = int(prior.block_of[k])
    label = labeler(block) if labeler else None
    return InfeasibleEvidence(
        block, k, float(margins[k]), point_id=prior.point_ids[k], label=label,
        violations=violations,
    )


def bregman_update(prior: PartitionedPrior, evidence: EmpiricalEvidence,
                   _labeler=None) -> UpdateResult:
    """Quadratic-Bregman-optimal posterior ``mu + sum_i (p^emp_i - p_i) rho_i``.

    Raises
    ------
    InfeasibleEvidence
        If some feasibility margin is below ``-1e-12``; the error names the
        most negative (block, point).
    """
    _require_valid(prior, evidence)
    stats = block_stats(prior)
    point_margins = _point_margins(prior, evidence, stats)
    if np.any(point_margins < -FEASIBILITY_TOL):
        raise _infeasible(prior, point_margins, _labeler)

    _, raw = bregman_closed_form(prior, evidence)
    components = []
    for s, c in zip(stats, raw):
        clamped = np.maximum(c, 0.0)
        total = clamped.sum()
        if abs(total - 1.0) > RENORMALIZATION_DRIFT:
            raise FloatingPointError(f"block {s.index}: renormalization drift {total - 1.0:.3g}")
        components.append(clamped / total)
    margins = _block_min(prior, point_margins)
    ratios = np.array([s.p / pe for s, pe in zip(stats, evidence.block_probs)])
    return _finish(
        Method.BREGMAN, prior, evidence.block_probs, components, margins, _event_of(evidence),
        extras={"ratios": ratios},
    )


# -- Pythagorean identities ---------------------------------------------------


def _block_supported(prior, i, sigma_i):
    sigma_i = np.asarray(sigma_i, dtype=float)
    outside = float(np.abs(sigma_i[~prior.block_mask(i)]).sum())
    if outside > FEASIBILITY_TOL:
        raise SupportViolation(i, outside)
    return sigma_i


def hellinger_pythagoras(prior: PartitionedPrior, i: int, sigma_i):
    """``(D2(mu||sigma_i), D2(mu||mu_i), sqrt(p_i) D2(mu_i||sigma_i))``; first = second + third."""
    sigma_i = _block_supported(prior, i, sigma_i)
    s = block_stats(prior)[i - 1]
    mu = prior.weights
    return (
        hellinger_sq(mu, sigma_i),
        hellinger_sq(mu, s.mu),
        np.sqrt(s.p) * hellinger_sq(s.mu, sigma_i),
    )


def bregman_pythagoras(prior: PartitionedPrior, i: int, sigma_i):
    """Quadratic-Bregman split of ``D(mu||sigma_i)`` through ``p_i mu_i + (1 - p_i) rho_i``."""
    sigma_i = _block_supported(prior, i, sigma_i)
    s = block_stats(prior)[i - 1]
    mu = prior.weights
    nu_i = s.p * s.mu + (1.0 - s.p) * s.rho
    return (
        quadratic_bregman(mu, sigma_i),
        quadratic_bregman(mu, nu_i),
        quadratic_bregman(nu_i, sigma_i),
    )


def bregman_global_pythagoras(prior: PartitionedPrior, evidence: EmpiricalEvidence, sigma_blocks):
    """Split ``D(sigma||mu)`` for ``sigma = sum_i p^emp_i sigma_i``.

    Returns ``(D(sigma||mu), D(nu||mu), sum_i (p^emp_i)^2 D(sigma_i||nu_i))``
    with ``nu`` the unclamped quadratic-Bregman closed form.
    """
    pe = evidence.block_probs
    sigma_blocks = [_block_supported(prior, i, s) for i, s in enumerate(sigma_blocks, start=1)]
    nu, nu_blocks = bregman_closed_form(prior, evidence)
    sigma = _mixture(pe, sigma_blocks)
    mu = prior.weights
    rest = sum(w * w * quadratic_bregman(s, v) for w, s, v in zip(pe, sigma_blocks, nu_blocks))
    return quadratic_bregman(sigma, mu), quadratic_bregman(nu, mu), float(rest)


# -- updates with an observed event -------------------------------------------


def _conditional_inputs(prior, evidence):
    if not evidence.has_event:
        raise InvalidProblem(["conditional update needs an event and cond_probs"])
    _require_valid(prior, evidence)
    for i, c in enumerate(evidence.cond_probs, start=1):
        if not 0.0 < c < 1.0:
            raise DegenerateConditional(i, float(c))
    refined = refine_by_event(prior, evidence.event)
    return refined, refine_evidence(evidence)


def _refined_label(j: int) -> str:
    return f"{(j + 1) // 2}{'+' if j % 2 else '-'}"


def conditional_hellinger_update(prior: PartitionedPrior, evidence: EmpiricalEvidence) -> UpdateResult:
    """Hellinger update on the partition doubled by the event.

    Refined block ``i+`` receives mass ``p^emp_i c_i`` and ``i-`` receives
    ``p^emp_i (1 - c_i)``, where ``c_i`` is the empirical conditional.
    """
    refined, refined_ev = _conditional_inputs(prior, evidence)
    inner = hellinger_update(refined, refined_ev)
    return _finish(
        Method.HELLINGER_CONDITIONAL, prior, inner.block_weights, inner.block_components,
        inner.feasibility_margins, evidence.event,
        extras={"refined_weights": inner.block_weights},
    )


def conditional_bregman_update(prior: PartitionedPrior, evidence: EmpiricalEvidence) -> UpdateResult:
    """Quadratic-Bregman update on the doubled partition.

    Feasibility margins are reported per refined block, in the order
    (1+, 1-, 2+, 2-, ...); ``extras`` holds the ratios ``r_i^+`` and ``r_i^-``.
    """
    refined, refined_ev = _conditional_inputs(prior, evidence)
    inner = bregman_update(refined, refined_ev, _labeler=_refined_label)
    ratios = inner.extras["ratios"]
    return _finish(
        Method.BREGMAN_CONDITIONAL, prior, inner.block_weights, inner.block_components,
        inner.feasibility_margins, evidence.event,
        extras={
            "refined_weights": inner.block_weights,
            "r_plus": _readonly(ratios[0::2]),
            "r_minus": _readonly(ratios[1::2]),
        },
    )


def existence_update(prior: PartitionedPrior, evidence: EmpiricalEvidence,
                     mode: ExistenceMode = ExistenceMode.CONSISTENT) -> UpdateResult:
    """Posterior built from per-block densities ``a_i`` on ``B`` and ``b_i`` off ``B``.

    In consistent mode the densities reproduce both the block masses and the
    empirical conditionals.  ``paper-literal`` mode keeps the extra factor
    ``p^emp_i`` in ``a_i``; the result then has ``q(B | O_i) = p^emp_i c_i``.
    """
    mode = ExistenceMode(mode)
    if not evidence.has_event:
        raise InvalidProblem(["existence construction needs an event and cond_probs"])
    _require_valid(prior, evidence)
    stats = block_stats(prior)
    inside = evidence.event.member
    mu = prior.weights
    a = np.empty(prior.n)
    b = np.empty(prior.n)
    components = []
    for s, pe, c in zip(stats, evidence.block_probs, evidence.cond_probs):
        p_in = float(mu[s.mask & inside].sum())
        p_out = float(mu[s.mask & ~inside].sum())
        prior_cond = p_in / s.p
        if not 0.0 < prior_cond < 1.0 or not (p_in > 0 and p_out > 0):
            raise DegeneratePriorConditional(s.index, prior_cond)
        k = s.index - 1
        if mode is ExistenceMode.CONSISTENT:
            a[k] = c / p_in
            b[k] = (1.0 - c) / p_out
        else:
            a[k] = (pe / s.p) * (c / prior_cond)
            b[k] = (1.0 - pe * c) / p_out
        nu_i = np.where(s.mask & inside, a[k] * mu, 0.0) + np.where(s.mask & ~inside, b[k] * mu, 0.0)
        if a[k] < 0 or b[k] < 0 or abs(nu_i.sum() - 1.0) > FEASIBILITY_TOL:
            raise FloatingPointError(f"block {s.index}: densities do not normalize")
        components.append(nu_i)
    margins = _block_min(prior, np.sum(components, axis=0))
    return _finish(
        Method.EXISTENCE, prior, evidence.block_probs, components, margins, evidence.event,
        extras={"mode": mode.value, "a": _readonly(a), "b": _readonly(b)},
    )


# -- side-by-side comparison --------------------------------------------------


@dataclass(frozen=True)
class Comparison:
    results: dict
    errors: dict
    objectives: dict
    entropies: dict
    max_difference: Optional[float]
    conditional_max_difference: Optional[float]
    evidence_matches_prior: bool
    blockwise_uniform: bool


def compare_updates(prior: PartitionedPrior, evidence: EmpiricalEvidence,
                    conditional: Optional[bool] = None) -> Comparison:
    """Run the Hellinger and quadratic-Bregman solvers side by side.

    Conditional variants run as well when the evidence carries an event
    (or when ``conditional`` is forced true).  A failure of one solver is
    recorded in ``errors`` and never stops the others.
    """
    if conditional is None:
        conditional = evidence.has_event
    solvers = {Method.HELLINGER: hellinger_update, Method.BREGMAN: bregman_update}
    if conditional:
        solvers[Method.HELLINGER_CONDITIONAL] = conditional_hellinger_update
        solvers[Method.BREGMAN_CONDITIONAL] = conditional_bregman_update

    results, errors = {}, {}
    for method, solve in solvers.items():
        try:
            results[method] = solve(prior, evidence)
        except DivUpdateError as exc:
            errors[method] = exc

    mu = prior.weights
    objectives = {
        m: {"hellinger_sq": hellinger_sq(r.posterior, mu),
            "quadratic_bregman": quadratic_bregman(r.posterior, mu)}
        for m, r in results.items()
    }
    entropies = {m: r.posterior_entropy for m, r in results.items()}

    def gap(a, b):
        if a in results and b in results:
            return float(np.max(np.abs(results[a].posterior - results[b].posterior)))
        return None

    matches = uniform = False
    try:
        stats = block_stats(prior)
        matches = bool(
            np.max(np.abs(np.array([s.p for s in stats]) - evidence.block_probs)) <= COINCIDENCE_TOL
        )
        uniform = all(np.max(np.abs(s.mu - s.rho)) <= COINCIDENCE_TOL for s in stats)
    except (DivUpdateError, ValueError):
        pass

    return Comparison(
        results=results,
        errors=errors,
        objectives=objectives,
        entropies=entropies,
        max_difference=gap(Method.HELLINGER, Method.BREGMAN),
        conditional_max_difference=gap(Method.HELLINGER_CONDITIONAL, Method.BREGMAN_CONDITIONAL),
        evidence_matches_prior=matches,
        blockwise_uniform=uniform,
    )
