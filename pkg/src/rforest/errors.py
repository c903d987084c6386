"""Exception types shared across the package."""


class RForestError(Exception):
    """Base class for every error raised by this package."""


class StructuralError(RForestError):
    """Input is malformed (wrong shape, negative entry, bad value)."""


class UnknownPoint(RForestError, KeyError):
    pass


class NotTreeEmbeddable(RForestError):
    def __init__(self, quadruple):
        super().__init__(f"metric violates the 4-point condition on {quadruple}")
        self.quadruple = quadruple


class Unreachable(RForestError):
    """Every candidate point is at infinite distance."""


class InconsistentAnchors(RForestError):
    def __init__(self, i, j, slack):
        super().__init__(f"anchors {i} and {j} violate the 1-1-Lipschitz bound by {slack}")
        self.pair = (i, j)
        self.slack = slack


class PreconditionError(RForestError):
    """An operation was called outside its documented domain."""


class SizeLimitError(RForestError):
    def __init__(self, needed, limit):
        super().__init__(f"search size {needed} exceeds the configured limit {limit}")
        self.needed = needed
        self.limit = limit
