"""Exception types shared across the library."""


class PocfError(Exception):
    """Base class for all library errors."""


class InvalidActionError(PocfError):
    """A joint action or single action is not admissible for the game."""

    def __init__(self, agent: int, message: str):
        self.agent = agent
        super().__init__(f"agent {agent + 1}: {message}")


class EnumerationBudgetError(PocfError):
    """Exact enumeration was requested but the joint-action space is too large."""

    def __init__(self, space_size: int, budget: int):
        self.space_size = space_size
        self.budget = budget
        super().__init__(
            f"joint-action space has {space_size} elements, exceeding the "
            f"enumeration budget of {budget}; use Monte Carlo mode instead"
        )


class DatasetFormatError(PocfError):
    """A dataset file could not be parsed."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class UnknownBuiltinError(PocfError):
    """No builtin game is registered under the requested name."""


class FeedbackKindError(PocfError):
    """An estimator was fitted on a dataset with the wrong feedback kind."""
