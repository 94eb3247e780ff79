"""Exception types shared across the solver."""


class SolverError(Exception):
    """Base class for all solver failures."""


class InadmissibleState(SolverError):
    """Density or pressure lost positivity somewhere in the field."""


class InadmissibleLowOrder(SolverError):
    """The low-order update itself violates positivity; the timestep is too large."""


class InfeasibleInstance(SolverError):
    """Knapsack constraint cannot be met even at full limiting."""


class VacuumState(SolverError):
    """Riemann data would produce a vacuum region."""


class MaxStepsExceeded(SolverError):
    """Adaptive integration exceeded the step budget."""


class ConfigError(SolverError):
    """Invalid run configuration."""
