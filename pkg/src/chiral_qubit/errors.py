"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where the operation is defined."""


class WindowOverflowError(RuntimeError):
    """A tracked level left the energy window during spectral flow."""

    def __init__(self, level, time, window):
        self.level = level
        self.time = time
        self.window = window
        super().__init__(
            f"level n={level.n} ({level.branch.name}) left the tracking window "
            f"[{window[0]:g}, {window[1]:g}] at t={time:g}"
        )


class AccuracyError(RuntimeError):
    """Time integration could not meet the requested tolerance."""

    def __init__(self, message, suggested_step=None):
        self.suggested_step = suggested_step
        if suggested_step is not None:
            message = f"{message}; try max_step <= {suggested_step:.3g}"
        super().__init__(message)


class ConfigError(ValueError):
    """One or more problems in a scenario configuration.

    ``problems`` is a list of ``(line, message)`` pairs; ``line`` is ``None``
    when the location cannot be determined.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        lines = []
        for line, msg in self.problems:
            lines.append(f"line {line}: {msg}" if line is not None else msg)
        super().__init__("\n".join(lines))
