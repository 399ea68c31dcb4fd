"""Exception hierarchy shared by the library and the CLI."""


class SlowLightError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SlowLightError):
    """Parameters or configuration violate a physical or format rule (CLI exit 1)."""


class EitConditionViolated(ValidationError):
    pass


class AdiabaticityViolated(ValidationError):
    pass


class RfRegimeViolated(ValidationError):
    pass


class WeakProbeViolated(ValidationError):
    pass


class ZeroControlField(ValidationError):
    pass


class ComplexRates(ValidationError):
    pass


class GridError(ValidationError):
    pass


class ScheduleError(ValidationError):
    pass


class ConfigError(ValidationError):
    """Malformed scenario document."""


class ConfigSyntaxError(ConfigError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class UnknownKey(ConfigError):
    pass


class DuplicateKey(ConfigError):
    pass


class MissingRequired(ConfigError):
    pass


class RuntimeFailure(SlowLightError):
    """Numerical or I/O failure during a run (CLI exit 2)."""


class StepTooLarge(RuntimeFailure):
    pass


class UnstableMarch(RuntimeFailure):
    pass


class OutOfWindow(RuntimeFailure):
    pass


class NoPeak(RuntimeFailure):
    pass


class NotUnimodal(RuntimeFailure):
    pass


class EmptySignal(RuntimeFailure):
    pass


class SinkError(RuntimeFailure):
    pass
