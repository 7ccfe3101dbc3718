"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid game, strategy, or experiment specification."""


class SolverFailure(RuntimeError):
    """The LP solver gave up before reaching optimality.

    Carries the best feasible incumbent found so far, and the match round
    that triggered the solve when raised from inside a learner.
    """

    def __init__(self, message, incumbent=None, objective=None, round_index=None):
        super().__init__(message)
        self.incumbent = incumbent
        self.objective = objective
        self.round_index = round_index
