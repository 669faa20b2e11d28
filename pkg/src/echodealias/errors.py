"""Exception hierarchy shared across the toolkit.

The CLI maps each branch of the hierarchy to a distinct process exit code
(see ``echodealias.cli``); library code raises these directly.
"""


class DealiasError(Exception):
    """Base class for all toolkit errors."""


class InvalidArgumentError(DealiasError, ValueError):
    """A function received arguments violating its contract (bad shape,
    non-finite values, out-of-range parameters)."""


class ConfigError(DealiasError):
    """Invalid run configuration: unknown keys, contradictory settings,
    impossible constraints."""


class DataFormatError(DealiasError):
    """A container file (DFF, PDNW, manifest, report) is malformed."""


class NumericFailureError(DealiasError):
    """A numeric computation produced non-finite values."""


class OutOfRegimeError(DealiasError):
    """Requested operating point lies outside the single-aliasing regime."""


class UndefinedMetricError(DealiasError):
    """A metric is undefined for the given inputs (e.g. zero-norm reference)."""


# CLI exit codes, documented in `echodealias --help`.
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4
EXIT_REGIME = 5
