"""Exception types raised by the solvers and the document layer."""


class DivUpdateError(ValueError):
    """Base class for every error raised by this package."""


class DimensionMismatch(DivUpdateError):
    pass


class ZeroProbabilityBlock(DivUpdateError):
    def __init__(self, block):
        self.block = block
        super().__init__(f"block {block}: prior probability is zero")


class ZeroProbabilityEvent(DivUpdateError):
    def __init__(self):
        super().__init__("conditioning event has zero prior probability")


class EmptyRefinedBlock(DivUpdateError):
    """A block of the doubled partition (B and O_i, or not-B and O_i) is empty or null."""

    def __init__(self, block, sign):
        self.block = block
        self.sign = sign
        super().__init__(
            f"block {block}: refined block {block}{'+' if sign == 'plus' else '-'} "
            f"({sign}) is empty or has zero prior probability"
        )


class SupportViolation(DivUpdateError):
    def __init__(self, block, mass):
        self.block = block
        self.mass = mass
        super().__init__(f"distribution puts mass {mass:.3g} outside block {block}")


class InfeasibleEvidence(DivUpdateError):
    """The quadratic-Bregman closed form would produce a negative probability.

    ``block`` is the 1-based block index of the problem that was solved (for the
    conditional solver this is the refined block, see ``label``), ``point`` the
    0-based point index and ``point_id`` its label.  ``violations`` lists every
    (block, point index, margin) triple with a negative margin.
    """

    def __init__(self, block, point, margin, point_id=None, label=None, violations=()):
        self.block = block
        self.point = point
        self.margin = margin
        self.point_id = point_id
        self.label = label if label is not None else str(block)
        self.violations = tuple(violations)
        who = point_id if point_id is not None else point
        super().__init__(
            f"block {self.label}, point {who}: feasibility margin {margin:.6g} < 0"
        )


class DegenerateConditional(DivUpdateError):
    def __init__(self, block, value):
        self.block = block
        self.value = value
        super().__init__(
            f"block {block}: empirical conditional probability {value!r} must lie strictly in (0, 1)"
        )


class DegeneratePriorConditional(DivUpdateError):
    def __init__(self, block, value):
        self.block = block
        self.value = value
        super().__init__(
            f"block {block}: prior conditional probability {value!r} must lie strictly in (0, 1)"
        )


class BlockTooLarge(DivUpdateError):
    def __init__(self, block, size, limit):
        self.block = block
        self.size = size
        self.limit = limit
        super().__init__(
            f"block {block} has {size} points; grid search supports at most {limit} "
            "(use the projected-descent oracle instead)"
        )


class NonConvergence(DivUpdateError):
    """Projected descent ran out of iterations; ``result`` holds the best iterate."""

    def __init__(self, result):
        self.result = result
        super().__init__(
            f"projected descent did not converge in {result.iterations} iterations "
            f"(residual {result.residual:.3g})"
        )


class InvalidProblem(DivUpdateError):
    """Prior or evidence fails validation; ``problems`` lists each violation."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
