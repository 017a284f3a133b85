import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from divupdate import (
    EmpiricalEvidence,
    EmptyRefinedBlock,
    Event,
    PartitionedPrior,
    ZeroProbabilityBlock,
    ZeroProbabilityEvent,
    block_stats,
    conditional_expectation,
    empirical_expectation,
    event_probability,
    refine_by_event,
    validate,
)
from divupdate.space import (
    block_conditional_expectations,
    partition_expectation,
    refine_evidence,
)

from _instances import random_prior, worked_prior


def test_validate_accepts_valid_prior():
    assert validate(worked_prior(), EmpiricalEvidence([0.6, 0.4])) == []


def test_validate_reports_bad_sum():
    prior = PartitionedPrior.from_lists([0.5, 0.6], [1, 2])
    assert validate(prior) == ["weights sum 1.1 ≠ 1"]


def test_validate_reports_nonpositive_empirical_probability():
    problems = validate(PartitionedPrior.from_lists([0.5, 0.5], [1, 2]), EmpiricalEvidence([1.0, 0.0]))
    assert problems == ["block 2: empirical probability not strictly positive"]


@pytest.mark.parametrize(
    "weights, blocks, evidence, fragment",
    [
        ([0.5, 0.5], [0, 1], None, "1-based"),
        ([0.5, 0.5], [1, 3], None, "block 2: no point"),
        ([1.5, -0.5], [1, 2], None, "negative weight"),
        ([0.5, 0.5], [1, 2], EmpiricalEvidence([0.5, 0.25]), "block_probs sum"),
        ([0.5, 0.5], [1, 2], EmpiricalEvidence([1.0]), "1 entries for 2 blocks"),
        ([0.5, 0.5], [1, 2], EmpiricalEvidence([0.5, 0.5], Event([True, False])), "given together"),
        ([0.5, 0.5], [1, 2], EmpiricalEvidence([0.5, 0.5], Event([True, False]), [0.5, 1.5]), "outside [0, 1]"),
    ],
)
def test_validate_names_each_violation(weights, blocks, evidence, fragment):
    problems = validate(PartitionedPrior.from_lists(weights, blocks), evidence)
    assert any(fragment in p for p in problems), problems


def test_block_stats_worked_example():
    stats = block_stats(worked_prior())
    np.testing.assert_allclose([s.p for s in stats], [0.5, 0.5], atol=1e-15)
    np.testing.assert_allclose(stats[0].mu, [0.8, 0.2, 0, 0], atol=1e-15)
    np.testing.assert_allclose(stats[0].rho, [0.5, 0.5, 0, 0], atol=1e-15)
    assert [s.size for s in stats] == [2, 2]
    mixture = sum(s.p * s.mu for s in stats)
    np.testing.assert_allclose(mixture, worked_prior().weights, atol=1e-15)


def test_block_stats_uniform_prior_gives_uniform_conditionals():
    for s in block_stats(PartitionedPrior.from_lists([0.25] * 4, [1, 1, 2, 2])):
        np.testing.assert_allclose(s.mu, s.rho, atol=1e-15)


def test_block_stats_zero_block():
    with pytest.raises(ZeroProbabilityBlock) as info:
        block_stats(PartitionedPrior.from_lists([1.0, 0.0], [1, 2]))
    assert info.value.block == 2


def test_event_probability():
    prior = worked_prior()
    assert event_probability(prior, Event(np.ones(4, bool))) == pytest.approx(1.0, abs=1e-15)
    assert event_probability(prior, Event(np.zeros(4, bool))) == 0.0
    assert event_probability(prior, Event.from_indices(4, [0, 2])) == pytest.approx(0.7, abs=1e-15)


def test_conditional_expectation():
    prior = worked_prior()
    f = [1.0, 2.0, 3.0, 4.0]
    assert conditional_expectation(prior, f, Event.from_indices(4, [0, 1])) == pytest.approx(1.2, abs=1e-15)
    assert conditional_expectation(prior, [7.0] * 4, Event.from_indices(4, [2, 3])) == pytest.approx(7.0)
    full = Event(np.ones(4, bool))
    assert conditional_expectation(prior, f, full) == np.dot(f, prior.weights)
    with pytest.raises(ZeroProbabilityEvent):
        conditional_expectation(prior, f, Event(np.zeros(4, bool)))


def test_refine_by_event_singletons():
    refined = refine_by_event(worked_prior(), Event.from_indices(4, [0, 2]))
    assert list(refined.block_of) == [1, 2, 3, 4]
    np.testing.assert_array_equal(refined.weights, worked_prior().weights)


def test_refine_by_event_full_space_fails():
    with pytest.raises(EmptyRefinedBlock) as info:
        refine_by_event(worked_prior(), Event(np.ones(4, bool)))
    assert (info.value.block, info.value.sign) == (1, "minus")


def test_refine_by_event_six_points():
    prior = PartitionedPrior.from_lists([1 / 6] * 6, [1, 1, 1, 2, 2, 2])
    refined = refine_by_event(prior, Event.from_indices(6, [0, 1, 3]))
    assert [s.size for s in block_stats(refined)] == [2, 1, 1, 2]


def test_refine_evidence_interleaves():
    ev = EmpiricalEvidence([0.6, 0.4], Event.from_indices(4, [0, 2]), [0.25, 0.5])
    np.testing.assert_allclose(refine_evidence(ev).block_probs, [0.15, 0.45, 0.2, 0.2])


@pytest.mark.parametrize("pe, f, expected", [
    ([0.6, 0.4], [1.0, 1.0], 1.0),
    ([0.6, 0.4], [0.0, 1.0], 0.4),
    ([0.25, 0.75], [2.0, -2.0], -1.0),
])
def test_empirical_expectation(pe, f, expected):
    assert empirical_expectation(EmpiricalEvidence(pe), f) == pytest.approx(expected, abs=1e-15)


@settings(max_examples=60, deadline=None, derandomize=True)
@given(st.integers(0, 2**32 - 1))
def test_mixture_reconstruction_and_tower(seed):
    rng = np.random.default_rng(seed)
    prior = random_prior(rng, sizes=(3, 5, 9, 16), ns=(1, 2, 3))
    stats = block_stats(prior)
    np.testing.assert_allclose(sum(s.p * s.mu for s in stats), prior.weights, atol=1e-12)
    f = rng.normal(size=prior.size)
    plain = float(np.dot(f, prior.weights))
    assert partition_expectation(prior, f) == pytest.approx(plain, abs=1e-12)
    cond = block_conditional_expectations(prior, f)
    assert cond.shape == (prior.n,)


@settings(max_examples=60, deadline=None, derandomize=True)
@given(st.integers(0, 2**32 - 1))
def test_refinement_preserves_weights_and_splits_masses(seed):
    from _instances import random_event

    rng = np.random.default_rng(seed)
    prior = random_prior(rng, min_block=2)
    refined = refine_by_event(prior, random_event(rng, prior))
    assert refined.point_ids == prior.point_ids
    np.testing.assert_array_equal(refined.weights, prior.weights)
    p = [s.p for s in block_stats(prior)]
    q = [s.p for s in block_stats(refined)]
    np.testing.assert_allclose(np.add(q[0::2], q[1::2]), p, atol=1e-15)


def test_values_are_immutable():
    prior = worked_prior()
    with pytest.raises(ValueError):
        prior.weights[0] = 0.5
