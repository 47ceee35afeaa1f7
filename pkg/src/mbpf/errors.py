"""Exception types raised across the package."""


class MBPFError(Exception):
    """Base class for all package errors."""


class InvalidElementError(MBPFError, ValueError):
    pass


class EmptyCascadeError(MBPFError, ValueError):
    pass


class SingularConversionError(MBPFError, ArithmeticError):
    def __init__(self, frequency_hz=None, message="ABCD to S conversion is singular"):
        self.frequency_hz = frequency_hz
        if frequency_hz is not None:
            message = f"{message} at {frequency_hz:.9g} Hz"
        super().__init__(message)


class NonTransmissiveError(MBPFError, ValueError):
    pass


class InsufficientGridError(MBPFError, ValueError):
    pass


class DomainError(MBPFError, ValueError):
    pass


class SingularPointError(MBPFError, ArithmeticError):
    def __init__(self, frequency_hz, what="immittance"):
        self.frequency_hz = frequency_hz
        super().__init__(f"singular {what} at {frequency_hz:.12g} Hz")


class NotFoundError(MBPFError, LookupError):
    pass


class BandNotBracketedError(MBPFError, ValueError):
    def __init__(self, side, message=None):
        self.side = side
        super().__init__(message or f"no 3-dB crossing on the {side} side of the peak inside the grid")


class CoverageError(MBPFError, ValueError):
    pass


class NoOverlapError(MBPFError, ValueError):
    pass


class TouchstoneError(MBPFError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedError(TouchstoneError):
    pass


class ConfigError(MBPFError, ValueError):
    pass
