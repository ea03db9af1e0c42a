"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class DigitLawError(Exception):
    exit_code = 2


class UsageError(DigitLawError, ValueError):
    exit_code = 1


class DomainError(UsageError):
    """Argument outside the mathematical domain of a function."""


class ParseError(DigitLawError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class PrecisionError(DigitLawError, ArithmeticError):
    pass


class ResourceError(DigitLawError, MemoryError):
    pass


class CheckpointError(DigitLawError):
    pass


class VerificationError(DigitLawError):
    exit_code = 3
