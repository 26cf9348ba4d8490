"""
Error types for the DDWPR library
Every failure raised by the distribution, analytics and oracle modules derives from DdwprError
"""
from typing import Optional


class DdwprError(Exception):
    """Base class for all library errors"""
    pass


class DomainError(DdwprError, ValueError):
    """Raised when an argument lies outside the domain of an operation"""
    pass


class SeriesConvergenceError(DdwprError):
    """Raised when a truncated series hits its term cap before reaching tolerance"""

    def __init__(self, message: str, partial_sum: float, bound: float):
        super().__init__(f"{message} (partial sum {partial_sum!r}, tail bound {bound!r})")
        self.partial_sum = partial_sum
        self.bound = bound


class UndefinedMeasureError(DdwprError):
    """Raised when a hazard-type ratio has a vanishing denominator"""
    pass


class ResourceCapError(DdwprError):
    """Raised when a simulation request exceeds the work cap"""
    pass


class GoldenDataError(DdwprError):
    """Raised when the golden-value file is missing or malformed"""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(f"{message}: {path}" if path else message)
        self.path = path
