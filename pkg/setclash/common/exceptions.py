"""Exception hierarchy shared by the setclash apps.

Malformed descriptions (bad radii, empty polytopes, non-monotone gauges)
raise ``django.core.exceptions.ValidationError`` instead; the classes here
cover failures that depend on the numbers being evaluated.
"""


class SetclashError(Exception):
    """Base class for numerical failures raised by setclash."""


class DimensionMismatch(SetclashError, ValueError):
    """Vectors or tuples whose sizes disagree."""


class DomainError(SetclashError, ValueError):
    """Argument outside the domain of a function (e.g. t < 0 for a gauge)."""


class UnsupportedMethodError(SetclashError):
    """A method was requested for inputs it cannot handle."""


class PreconditionError(SetclashError):
    """A hypothesis of a certified statement does not hold.

    ``tag`` names the violated condition so reports and the command line can
    point at it.
    """

    def __init__(self, message, tag=None):
        super().__init__(message)
        self.tag = tag

    def __str__(self):
        message = super().__str__()
        if self.tag:
            return f"{self.tag}: {message}"
        return message


class ReportError(SetclashError):
    """A report or trace file could not be written."""
