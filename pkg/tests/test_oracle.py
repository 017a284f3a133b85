import itertools

import numpy as np
import pytest

from divupdate import (
    BlockTooLarge,
    EmpiricalEvidence,
    NonConvergence,
    Objective,
    OracleConfig,
    PartitionedPrior,
    bregman_feasibility,
    bregman_update,
    hellinger_sq,
    hellinger_update,
    oracle_certify,
    oracle_minimize,
    quadratic_bregman,
)
from divupdate.oracle import project_simplex, simplex_grid
from divupdate.update import bregman_closed_form

from _instances import WORKED_EMP, random_evidence, random_prior, worked_prior

GRID = OracleConfig(method="grid", grid_resolution=50)


def bisection_projection(v, iters=200):
    """Independent simplex projection: bisection on the threshold."""
    lo, hi = v.min() - 1.0, v.max()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.maximum(v - mid, 0).sum() > 1:
            lo = mid
        else:
            hi = mid
    return np.maximum(v - 0.5 * (lo + hi), 0)


def test_projection_matches_bisection():
    rng = np.random.default_rng(0)
    for _ in range(200):
        v = rng.normal(scale=rng.choice([0.1, 1, 10]), size=rng.integers(1, 9))
        np.testing.assert_allclose(project_simplex(v), bisection_projection(v), atol=1e-12)


def test_simplex_grid_is_complete_and_lexicographic():
    grid = simplex_grid(3, 4)
    assert len(grid) == 15
    np.testing.assert_allclose(grid.sum(axis=1), 1.0)
    rows = [tuple(r) for r in grid]
    assert rows == sorted(rows)


@pytest.mark.parametrize("config", [GRID, OracleConfig()], ids=["grid", "descent"])
@pytest.mark.parametrize("objective, expected", [
    ("hellinger", [0.48, 0.12, 0.24, 0.16]),
    ("bregman", [0.45, 0.15, 0.25, 0.15]),
])
def test_worked_argmin(config, objective, expected):
    r = oracle_minimize(worked_prior(), EmpiricalEvidence(WORKED_EMP), objective, config)
    assert np.max(np.abs(r.point - expected)) < 1e-4
    assert r.converged


def test_single_block_returns_prior():
    prior = PartitionedPrior.from_lists([0.1, 0.3, 0.6], [1, 1, 1])
    r = oracle_minimize(prior, EmpiricalEvidence([1.0]), "hellinger")
    np.testing.assert_allclose(r.point, prior.weights, atol=1e-8)


def test_grid_without_refinement_is_exhaustive():
    prior = PartitionedPrior.from_lists([0.3, 0.1, 0.2, 0.4], [1, 2, 1, 2])
    ev = EmpiricalEvidence([0.35, 0.65])
    res = 20
    for objective, f in (("hellinger", hellinger_sq), ("bregman", quadratic_bregman)):
        coarse = oracle_minimize(prior, ev, objective, OracleConfig(method="grid", grid_resolution=res, refine=False))
        refined = oracle_minimize(prior, ev, objective, OracleConfig(method="grid", grid_resolution=res))
        # full product grid, enumerated directly
        values = []
        for a, b in itertools.product(range(res + 1), repeat=2):
            sigma = np.array([0.35 * a, 0.65 * b, 0.35 * (res - a), 0.65 * (res - b)]) / res
            values.append(f(sigma, prior.weights))
        assert coarse.value <= min(values) + 1e-15
        assert refined.value <= min(values) + 1e-15


def test_descent_history_is_monotone():
    rng = np.random.default_rng(4)
    for _ in range(20):
        prior = random_prior(rng)
        ev = random_evidence(rng, prior.n)
        for objective in Objective:
            r = oracle_minimize(prior, ev, objective)
            assert np.all(np.diff(r.history) <= 1e-14)


def test_relabeling_equivariance():
    rng = np.random.default_rng(5)
    for _ in range(20):
        prior = random_prior(rng)
        ev = random_evidence(rng, prior.n)
        order = rng.permutation(prior.size)
        for objective in Objective:
            a = oracle_minimize(prior, ev, objective)
            b = oracle_minimize(prior.permuted(order), ev, objective)
            np.testing.assert_allclose(a.point[order], b.point, atol=1e-9)


def test_deterministic_given_seed():
    prior = random_prior(np.random.default_rng(6), sizes=(8,))
    ev = random_evidence(np.random.default_rng(7), prior.n)
    a = oracle_minimize(prior, ev, "hellinger", OracleConfig(seed=3))
    b = oracle_minimize(prior, ev, "hellinger", OracleConfig(seed=3))
    assert a.value == b.value and np.array_equal(a.point, b.point)


def test_block_too_large_for_grid():
    prior = PartitionedPrior.from_lists([0.1] * 5 + [0.5], [1] * 5 + [2])
    with pytest.raises(BlockTooLarge):
        oracle_minimize(prior, EmpiricalEvidence([0.5, 0.5]), "hellinger", GRID)
    # descent has no block-size limit
    oracle_minimize(prior, EmpiricalEvidence([0.5, 0.5]), "hellinger")


def test_nonconvergence_reports_best_iterate():
    prior = random_prior(np.random.default_rng(8), sizes=(8,))
    ev = random_evidence(np.random.default_rng(9), prior.n)
    with pytest.raises(NonConvergence) as info:
        oracle_minimize(prior, ev, "hellinger", OracleConfig(max_iterations=1))
    assert info.value.result.point.sum() == pytest.approx(1.0)


@pytest.mark.parametrize("kwargs", [
    {"grid_resolution": 1}, {"convergence_tol": 0.0}, {"max_iterations": 0}, {"method": "simplex"},
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        OracleConfig(**kwargs)


class TestCertify:
    def test_closed_forms_pass(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            prior = random_prior(rng)
            ev = random_evidence(rng, prior.n)
            cert = oracle_certify(prior, ev, "hellinger", hellinger_update(prior, ev).posterior)
            assert cert.passed, (cert.gap, cert.distance)

    def test_swapped_posterior_fails(self):
        prior, ev = worked_prior(), EmpiricalEvidence(WORKED_EMP)
        wrong = bregman_update(prior, ev).posterior[[1, 0, 2, 3]]
        cert = oracle_certify(prior, ev, "bregman", wrong)
        assert not cert.passed
        assert cert.gap > 0

    def test_infeasible_closed_form_is_rejected(self):
        prior = PartitionedPrior.from_lists([0.45, 0.05, 0.25, 0.25], [1, 1, 2, 2])
        ev = EmpiricalEvidence([0.2, 0.8])
        assert bregman_feasibility(prior, ev).min() < 0
        raw, _ = bregman_closed_form(prior, ev)
        assert raw.min() < 0
        cert = oracle_certify(prior, ev, "bregman", raw)
        assert not cert.passed
        assert cert.oracle.point.min() == pytest.approx(0.0, abs=1e-12)
        assert cert.distance > 1e-3


def test_conditional_bregman_matches_oracle_on_refined_problem():
    from divupdate import Event, conditional_bregman_update, refine_by_event, refine_evidence

    prior = PartitionedPrior.from_lists([0.2, 0.1, 0.15, 0.2, 0.15, 0.2], [1, 1, 1, 2, 2, 2])
    ev = EmpiricalEvidence([0.45, 0.55], Event.from_indices(6, [0, 1, 3]), [0.6, 0.3])
    r = conditional_bregman_update(prior, ev)
    refined, refined_ev = refine_by_event(prior, ev.event), refine_evidence(ev)
    for config in (OracleConfig(), GRID):
        cert = oracle_certify(refined, refined_ev, "bregman", r.posterior, config)
        assert cert.passed
