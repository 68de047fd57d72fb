"""Exception hierarchy shared by all modules."""


class SymcamelError(Exception):
    """Base class for every error raised by this package."""


class InvalidDimension(SymcamelError, ValueError):
    pass


class InvalidInput(SymcamelError, ValueError):
    pass


class DegenerateMatrix(SymcamelError, ValueError):
    pass


class SingularTime(SymcamelError, ValueError):
    """Kernel requested at a time where it is a distribution, not a function."""


class UnderResolvedGrid(SymcamelError, ValueError):
    def __init__(self, message, min_points=None):
        super().__init__(message)
        self.min_points = min_points


class GridMisalignment(SymcamelError, ValueError):
    pass


class InvalidGrid(SymcamelError, ValueError):
    pass


class BlowUp(SymcamelError, ArithmeticError):
    def __init__(self, message, last_time):
        super().__init__(message)
        self.last_time = last_time


class CausticCrossing(SymcamelError, ArithmeticError):
    pass


class DegenerateState(SymcamelError, ValueError):
    pass


class DegenerateHull(SymcamelError, ValueError):
    pass


class UnboundedRegion(SymcamelError, ValueError):
    pass


class DegenerateRegion(SymcamelError, ValueError):
    pass
