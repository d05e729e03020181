"""Exception hierarchy shared by all modules."""


class ProfreeError(Exception):
    """Base class for every error raised by the toolkit."""


class InputError(ProfreeError, ValueError):
    """Malformed or out-of-contract input."""


class BudgetExceeded(ProfreeError, RuntimeError):
    """An enumeration or search hit its configured resource cap.

    This is never a mathematical verdict; the computation simply stopped.
    """


class MalnormalityError(InputError):
    def __init__(self, message, report):
        super().__init__(message)
        self.report = report
