"""Exception hierarchy shared by the model, simulators and the CLI."""


class TreeschedError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(TreeschedError):
    """The callback graph violates a modeling constraint."""


class SchemaError(ValidationError):
    """A field is missing, malformed or references something undeclared."""

    def __init__(self, message, field=None, line=None, column=None):
        self.field = field
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}, column {column})"
        super().__init__(f"{message}{where}")


class CycleError(ValidationError):
    """Publish/subscribe edges form a loop."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("publish/subscribe cycle: " + " -> ".join(self.cycle + self.cycle[:1]))


class ParseError(TreeschedError):
    """The taskset document is not well-formed structured text."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class MissingAssignment(TreeschedError):
    """A FIXED priority policy has no priority for some task."""


class SporadicTask(TreeschedError):
    """An operation that needs strictly periodic tasks met a sporadic one."""


class NotPeriodic(SporadicTask):
    """The harmonic-condition check needs strictly periodic parents."""


class MissingBound(TreeschedError):
    """No response-time bound was supplied for a callback."""


class HorizonTooSmall(TreeschedError):
    """No job completed before the simulation horizon."""


class IncomparableTraces(TreeschedError):
    """Two traces were produced from different forests or horizons."""


class InvariantViolation(AssertionError):
    """A runtime scheduling invariant failed while running in strict mode."""
