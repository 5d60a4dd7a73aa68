"""Exception types shared across the package."""


class HacError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolation(HacError):
    """A caller broke a documented precondition (bad parameter, out-of-order
    timestamps, querying below the configured minimum frequency, ...)."""


class FormatError(HacError):
    """Malformed input data: bad JSONL line, unknown config key, snapshot
    version mismatch."""
