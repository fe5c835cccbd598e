"""Exception hierarchy shared by every module of the package."""


class QReductionsError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(QReductionsError, ValueError):
    pass


class NotHermitian(QReductionsError, ValueError):
    pass


class NotPsd(QReductionsError, ValueError):
    pass


class InvalidState(QReductionsError, ValueError):
    pass


class InvalidPrior(QReductionsError, ValueError):
    pass


class EmptyClass(QReductionsError, ValueError):
    pass


class AllZeroWeights(QReductionsError, ValueError):
    pass


class LabelMismatch(QReductionsError, ValueError):
    pass


class InvalidRange(QReductionsError, ValueError):
    pass


class InvalidConstant(QReductionsError, ValueError):
    pass


class DuplicateStates(QReductionsError, ValueError):
    pass


class DegenerateDataset(QReductionsError, RuntimeError):
    pass


class NumericalBreakdown(QReductionsError, ArithmeticError):
    pass


class InvalidConfig(QReductionsError, ValueError):
    pass


class BudgetExhausted(QReductionsError):
    """Raised when a procedure needs more copies of a training state than remain.

    ``state_index`` identifies the offending training state.
    """

    def __init__(self, state_index, requested, remaining):
        self.state_index = state_index
        self.requested = requested
        self.remaining = remaining
        super().__init__(
            f"copy budget exhausted for training state {state_index}: "
            f"requested {requested}, remaining {remaining}"
        )
