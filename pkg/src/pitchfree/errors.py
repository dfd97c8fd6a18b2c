"""Exception types raised across the package."""


class PitchfreeError(Exception):
    """Base class for all package errors."""


class EmptyInput(PitchfreeError, ValueError):
    pass


class InvalidConfig(PitchfreeError, ValueError):
    pass


class InvalidInput(PitchfreeError, ValueError):
    pass


class IoError(PitchfreeError, OSError):
    pass


class TooFewSpeakers(PitchfreeError, ValueError):
    pass


class ManifestError(PitchfreeError, ValueError):
    """A manifest line could not be parsed or validated.

    ``line`` is 1-based and refers to the physical line in the file.
    """

    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class DuplicateRecord(ManifestError):
    def __init__(self, line, key, first_line=None):
        self.key = key
        self.first_line = first_line
        reason = f"duplicate record {key!r}"
        if first_line is not None:
            reason += f" (first seen on line {first_line})"
        super().__init__(line, reason)
