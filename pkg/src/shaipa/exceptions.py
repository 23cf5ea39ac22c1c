"""Exception hierarchy shared by the simulator, IPA engine and CLI."""


class ShaipaError(Exception):
    """Base class for all package errors."""


class ConfigError(ShaipaError, ValueError):
    """Malformed scenario configuration or invalid user parameters."""


class AssumptionViolation(ShaipaError):
    """A sample path broke one of the modeling assumptions.

    Parameters
    ----------
    assumption : int
        Number of the violated assumption (1 bounded flow, 2 no
        simultaneous independent events, 3 finite transition chains,
        4 non-tangential guard crossing, 5 no persistent rate balance).
    detail : str
        What was observed.
    """

    def __init__(self, assumption, detail):
        self.assumption = int(assumption)
        self.detail = detail
        super().__init__(f"Assumption {self.assumption} violation: {detail}")


class UnboundedFlowError(AssumptionViolation):
    def __init__(self, detail):
        super().__init__(1, detail)


class SimultaneousEventsError(AssumptionViolation):
    def __init__(self, detail):
        super().__init__(2, detail)


class ChainLengthError(AssumptionViolation):
    def __init__(self, detail):
        super().__init__(3, detail)


class TangentialContactError(AssumptionViolation):
    def __init__(self, detail):
        super().__init__(4, detail)


class RateBalanceError(AssumptionViolation):
    def __init__(self, detail):
        super().__init__(5, detail)


class NumericalError(ShaipaError, ArithmeticError):
    """Non-finite derivatives, failed root bracketing and similar."""
