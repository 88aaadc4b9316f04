"""Exception hierarchy shared by the library and the CLI."""


class SearelaxError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class InvalidStateError(SearelaxError, ValueError):
    pass


class DegenerateError(SearelaxError):
    """Energy variance vanishes; the reduced (degenerate) dynamics applies."""


class InfeasibleError(SearelaxError, ValueError):
    pass


class ConvergenceError(SearelaxError):
    pass


class ConfigError(Exception):
    """Malformed or incomplete run configuration (CLI exit code 2)."""
