"""Finite partitioned probability spaces, events and empirical evidence.

Points are kept in a fixed canonical order.  Probability vectors over the
space are plain 1-D ``numpy`` arrays in that order; block-local measures
(``mu_i``, ``rho_i``, ...) are full-length arrays that vanish off their block.
Blocks carry 1-based labels.  After refinement by an event, block ``i``
splits into ``2i - 1`` (inside the event) and ``2i`` (outside).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exceptions import (
    DimensionMismatch,
    EmptyRefinedBlock,
    ZeroProbabilityBlock,
    ZeroProbabilityEvent,
)

INPUT_TOL = 1e-12
DERIVED_TOL = 1e-9


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def as_distribution(weights, size: Optional[int] = None, tol: float = INPUT_TOL) -> np.ndarray:
    """Return ``weights`` as a read-only float array after checking it is a distribution."""
    arr = np.asarray(weights, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"distribution must be 1-D, got shape {arr.shape}")
    if size is not None and arr.size != size:
        raise DimensionMismatch(f"distribution has {arr.size} entries, expected {size}")
    if np.any(arr < 0):
        raise ValueError("distribution has negative entries")
    total = arr.sum()
    if abs(total - 1.0) > tol:
        raise ValueError(f"distribution sums to {total!r}, not 1")
    return _frozen(arr)


@dataclass(frozen=True)
class Event:
    """Indicator of a subset of the points."""

    member: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "member", _frozen(self.member, dtype=bool))

    @classmethod
    def from_ids(cls, point_ids: Sequence[str], ids) -> "Event":
        wanted = set(ids)
        unknown = wanted.difference(point_ids)
        if unknown:
            raise KeyError(f"unknown point ids: {sorted(unknown)}")
        return cls(np.array([p in wanted for p in point_ids], dtype=bool))

    @classmethod
    def from_indices(cls, size: int, indices) -> "Event":
        member = np.zeros(size, dtype=bool)
        member[list(indices)] = True
        return cls(member)

    def complement(self) -> "Event":
        return Event(~self.member)

    def __len__(self):
        return self.member.size


@dataclass(frozen=True)
class PartitionedPrior:
    """Prior weights on an enumerated finite space, together with a partition.

    Construction only normalizes types; call :func:`validate` to check the
    probabilistic invariants.
    """

    point_ids: tuple
    weights: np.ndarray
    block_of: np.ndarray

    def __post_init__(self):
        ids = tuple(str(p) for p in self.point_ids)
        weights = _frozen(self.weights)
        blocks = _frozen(self.block_of, dtype=int)
        if not (len(ids) == weights.size == blocks.size):
            raise DimensionMismatch(
                f"{len(ids)} point ids, {weights.size} weights, {blocks.size} block labels"
            )
        object.__setattr__(self, "point_ids", ids)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "block_of", blocks)

    @classmethod
    def from_lists(cls, weights, block_of, point_ids=None) -> "PartitionedPrior":
        if point_ids is None:
            point_ids = [f"x{k + 1}" for k in range(len(weights))]
        return cls(tuple(point_ids), weights, block_of)

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def n(self) -> int:
        return int(self.block_of.max()) if self.block_of.size else 0

    def block_mask(self, i: int) -> np.ndarray:
        return self.block_of == i

    def permuted(self, order) -> "PartitionedPrior":
        """Same prior with points listed in ``order`` (a permutation of indices)."""
        order = np.asarray(order)
        return PartitionedPrior(
            tuple(self.point_ids[k] for k in order), self.weights[order], self.block_of[order]
        )


@dataclass(frozen=True)
class EmpiricalEvidence:
    """Observed block frequencies, optionally with conditionals of one event per block."""

    block_probs: np.ndarray
    event: Optional[Event] = None
    cond_probs: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "block_probs", _frozen(self.block_probs))
        if self.cond_probs is not None:
            object.__setattr__(self, "cond_probs", _frozen(self.cond_probs))

    @property
    def has_event(self) -> bool:
        return self.event is not None and self.cond_probs is not None


@dataclass(frozen=True)
class BlockStats:
    index: int
    p: float
    mu: np.ndarray
    rho: np.ndarray
    size: int
    mask: np.ndarray = field(repr=False)


def validate(prior: PartitionedPrior, evidence: Optional[EmpiricalEvidence] = None) -> list:
    """Collect every invariant violation of ``prior`` and ``evidence``.

    Returns an empty list when everything holds.  Never raises on bad data.
    """
    problems = []
    w = prior.weights
    if not np.all(np.isfinite(w)):
        problems.append("weights contain non-finite values")
    for k in np.flatnonzero(w < 0):
        problems.append(f"point {prior.point_ids[k]}: negative weight {w[k]!r}")
    total = float(np.sum(w))
    if abs(total - 1.0) > INPUT_TOL:
        problems.append(f"weights sum {total:.12g} ≠ 1")
    if len(set(prior.point_ids)) != len(prior.point_ids):
        problems.append("point ids are not distinct")

    blocks = prior.block_of
    if np.any(blocks < 1):
        problems.append("partition indices are 1-based")
    n = prior.n
    for i in range(1, n + 1):
        if not np.any(blocks == i):
            problems.append(f"block {i}: no point carries this label")

    if evidence is None:
        return problems

    pe = evidence.block_probs
    if pe.size != n:
        problems.append(f"block_probs has {pe.size} entries for {n} blocks")
    for i, v in enumerate(pe, start=1):
        if not v > 0:
            problems.append(f"block {i}: empirical probability not strictly positive")
    if pe.size and abs(float(np.sum(pe)) - 1.0) > INPUT_TOL:
        problems.append(f"block_probs sum {float(np.sum(pe)):.12g} ≠ 1")

    if (evidence.event is None) != (evidence.cond_probs is None):
        problems.append("event and cond_probs must be given together")
    if evidence.event is not None and len(evidence.event) != prior.size:
        problems.append(f"event has {len(evidence.event)} flags for {prior.size} points")
    if evidence.cond_probs is not None:
        cp = evidence.cond_probs
        if cp.size != n:
            problems.append(f"cond_probs has {cp.size} entries for {n} blocks")
        for i, v in enumerate(cp, start=1):
            if not 0.0 <= v <= 1.0:
                problems.append(f"block {i}: conditional probability {v!r} outside [0, 1]")
    return problems


def block_stats(prior: PartitionedPrior) -> list:
    """Per-block prior mass ``p_i``, conditional prior ``mu_i`` and uniform ``rho_i``.

    Raises
    ------
    ZeroProbabilityBlock
        If some block has zero prior mass.
    """
    stats = []
    for i in range(1, prior.n + 1):
        mask = prior.block_mask(i)
        size = int(mask.sum())
        p = float(prior.weights[mask].sum())
        if size == 0 or not p > 0:
            raise ZeroProbabilityBlock(i)
        mu = np.where(mask, prior.weights / p, 0.0)
        rho = np.where(mask, 1.0 / size, 0.0)
        stats.append(BlockStats(i, p, _frozen(mu), _frozen(rho), size, _frozen(mask, dtype=bool)))
    return stats


def event_probability(prior: PartitionedPrior, event: Event) -> float:
    if len(event) != prior.size:
        raise DimensionMismatch("event and prior have different point counts")
    return float(prior.weights[event.member].sum())


def conditional_expectation(prior: PartitionedPrior, f, event: Event) -> float:
    """Expectation of ``f`` under the prior conditioned on ``event``."""
    f = np.asarray(f, dtype=float)
    if f.size != prior.size:
        raise DimensionMismatch("f and prior have different point counts")
    pa = event_probability(prior, event)
    if not pa > 0:
        raise ZeroProbabilityEvent()
    m = event.member
    return float(np.dot(f[m], prior.weights[m]) / pa)


def block_conditional_expectations(prior: PartitionedPrior, f) -> np.ndarray:
    """The random variable ``E[f | block]`` as one value per block."""
    return np.array(
        [
            conditional_expectation(prior, f, Event(prior.block_mask(i)))
            for i in range(1, prior.n + 1)
        ]
    )


def partition_expectation(prior: PartitionedPrior, f) -> float:
    """``sum_i p_i E[f | O_i]``; by the tower property this is the plain expectation."""
    p = np.array([s.p for s in block_stats(prior)])
    return float(np.dot(p, block_conditional_expectations(prior, f)))


def empirical_expectation(evidence: EmpiricalEvidence, f) -> float:
    f = np.asarray(f, dtype=float)
    if f.size != evidence.block_probs.size:
        raise DimensionMismatch("f must have one value per block")
    return float(np.dot(evidence.block_probs, f))


def refine_by_event(prior: PartitionedPrior, event: Event) -> PartitionedPrior:
    """Split every block into its part inside and outside ``event``.

    Block ``i`` becomes ``2i - 1`` (inside) and ``2i`` (outside); points and
    weights are unchanged.

    Raises
    ------
    EmptyRefinedBlock
        If either half of some block is empty or has zero prior mass.
    """
    if len(event) != prior.size:
        raise DimensionMismatch("event and prior have different point counts")
    inside = event.member
    for i in range(1, prior.n + 1):
        mask = prior.block_mask(i)
        for sign, part in (("plus", mask & inside), ("minus", mask & ~inside)):
            if not part.any() or not prior.weights[part].sum() > 0:
                raise EmptyRefinedBlock(i, sign)
    refined = np.where(inside, 2 * prior.block_of - 1, 2 * prior.block_of)
    return PartitionedPrior(prior.point_ids, prior.weights, refined)


def refine_evidence(evidence: EmpiricalEvidence) -> EmpiricalEvidence:
    """Empirical weights of the doubled partition, ordered (1+, 1-, 2+, 2-, ...)."""
    if not evidence.has_event:
        raise ValueError("evidence carries no event / conditional probabilities")
    pe = evidence.block_probs
    c = evidence.cond_probs
    refined = np.empty(2 * pe.size)
    refined[0::2] = pe * c
    refined[1::2] = pe * (1.0 - c)
    return EmpiricalEvidence(refined)
