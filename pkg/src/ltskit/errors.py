"""Exception hierarchy shared by all ltskit modules."""


class LtsError(Exception):
    """Base class for every error raised by ltskit."""


class BudgetExhausted(LtsError):
    """An exploration visited more states (or pairs) than its budget allows.

    This is not a verdict: it signals that the explored system may be
    infinite along the direction being searched.
    """

    def __init__(self, what, budget):
        super().__init__(f"{what}: budget of {budget} exhausted")
        self.budget = budget


class RefusedOperation(LtsError):
    """The operation is not supported on this kind of LTS."""


class CcsSyntaxError(LtsError):
    def __init__(self, message, text, pos, expected=()):
        self.text = text
        self.pos = pos
        self.expected = tuple(expected)
        detail = message
        if self.expected:
            detail += " (expected " + ", ".join(self.expected) + ")"
        super().__init__(f"at position {pos}: {detail}")


class ClosednessError(LtsError):
    """A free recursion variable reached the semantics."""


class UnguardedRecursion(LtsError):
    pass


class DomainError(LtsError, LookupError):
    """A state lies outside the range of an isomorphic relabelling."""
