"""Exception hierarchy shared by all isoguard modules."""

from __future__ import annotations


class IsoguardError(Exception):
    """Base class for every error raised by this package."""


class TemperatureOutOfRange(IsoguardError, ValueError):
    """Temperature outside the range where a material model is trusted."""


class CalibrationDiverged(IsoguardError, RuntimeError):
    """The optimizer ended with a larger residual than the initial guess."""


class ComponentDestroyed(IsoguardError):
    """Query made at a power/exposure beyond the recorded breakdown."""


class UndefinedPath(IsoguardError, KeyError):
    """Circulator port pair that was never characterised."""

    def __str__(self) -> str:  # KeyError would repr() the message
        return str(self.args[0]) if self.args else ""


class NonPositiveReading(IsoguardError, ValueError):
    """Power-meter reading that cannot be inverted (<= 0 W)."""


class MalformedFixture(IsoguardError, ValueError):
    """Fixture text that does not follow the fixture CSV schema."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip() if where else message)


class NonMonotonePower(MalformedFixture):
    pass


class MissingInitialRow(MalformedFixture):
    pass
