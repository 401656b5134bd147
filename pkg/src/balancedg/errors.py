"""Exception types shared across the solver."""


class DomainError(ValueError):
    """Input lies outside the domain where an operation is defined."""


class NumericError(ArithmeticError):
    """An iterative numerical procedure failed to converge."""


class ContractError(ValueError):
    """A caller-side precondition (e.g. a viscosity bound) was violated."""


class PositivityFault(RuntimeError):
    """A cell average or point value left the admissible set.

    Raised inside a time step; the stepper reacts by halving the step.
    """

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class RunError(RuntimeError):
    """A run could not be completed (e.g. restart budget exhausted)."""

    def __init__(self, message, report=None, state=None):
        super().__init__(message)
        self.report = report
        self.state = state
