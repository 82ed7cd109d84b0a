"""Exception hierarchy shared by the package."""


class CashFitError(Exception):
    """Base class for all errors raised by cashfit."""


class DatasetError(CashFitError, ValueError):
    """Invalid binned dataset. ``index`` names the offending bin or gap."""

    def __init__(self, message: str, index: int | None = None):
        self.index = index
        if index is not None:
            message = f"{message} (index {index})"
        super().__init__(message)


class OverlappingBins(DatasetError):
    pass


class NegativeWidth(DatasetError):
    pass


class GapBinOverlap(DatasetError):
    pass


class NonIntegerCount(DatasetError):
    pass


class TilingError(DatasetError):
    """Bins and gaps do not exactly tile the declared range."""


class LengthMismatch(CashFitError, ValueError):
    pass


class EvaluationAtSingularity(CashFitError, ArithmeticError):
    pass


class SingularDenominator(CashFitError, ArithmeticError):
    pass


class EmptyData(CashFitError, ValueError):
    pass


class InsufficientData(CashFitError, ValueError):
    pass


class DegenerateAsymptote(CashFitError, ArithmeticError):
    """The asymptotic value of F vanishes, so no external zero exists."""


class BracketFailure(CashFitError, RuntimeError):
    """A root bracket could not be established. Indicates a numerical defect."""


class PositionOutOfRange(CashFitError, ValueError):
    pass
