"""
Lab Errors
Exception hierarchy shared by every pipeline, mapped to CLI exit codes
"""

from typing import Optional, Tuple


class LabError(Exception):
    """Base class for every error raised by the lab"""

    exit_code = 1


class LabValidationError(LabError):
    """Inputs rejected before or during a computation"""

    exit_code = 2


class InvalidParameterError(LabValidationError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"invalid parameter '{field}': {message}")


class InfiniteMomentError(LabValidationError):
    pass


class InfiniteFisherInformationError(LabValidationError):
    pass


class NonzeroMeanError(LabValidationError):
    pass


class NotMinorizableError(LabValidationError):
    pass


class UnsupportedOrderError(LabValidationError):
    pass


class StepMismatchError(LabValidationError):
    pass


class DomainTooSmallError(LabValidationError):
    def __init__(self, captured_mass: float, lo: float, hi: float):
        self.captured_mass = captured_mass
        super().__init__(
            f"domain [{lo}, {hi}] captures mass {captured_mass:.12f}, need at least 1 - 1e-9"
        )


class OverflowDomainError(LabValidationError):
    pass


class SampleSizeTooSmallError(LabValidationError):
    pass


class InsufficientDataError(LabValidationError):
    pass


class ConfigError(LabValidationError):
    pass


class UnboundedDerivativeError(LabValidationError):
    pass


class SupportViolationError(LabValidationError):
    pass


class StableRangeError(LabValidationError):
    pass


class AbsoluteContinuityError(LabValidationError):
    def __init__(self, x_range: Tuple[float, float], message: Optional[str] = None):
        self.x_range = x_range
        super().__init__(
            message
            or f"absolute continuity violated on x in [{x_range[0]:.6g}, {x_range[1]:.6g}]"
        )


class ContractViolation(LabError):
    """A computed quantity broke one of the numerical contracts"""

    exit_code = 3

    def __init__(self, invariant: str, slack: float, detail: str = ""):
        self.invariant = invariant
        self.slack = slack
        text = f"contract '{invariant}' violated (slack {slack:.3e})"
        if detail:
            text = f"{text}: {detail}"
        super().__init__(text)
