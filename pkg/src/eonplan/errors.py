"""Error taxonomy shared across the package.

ConfigError covers bad scenario/CLI input (exit code 2); DataError covers
malformed or inconsistent data files (exit code 3).  Everything else is a
plain bug and propagates as-is.
"""


class EonplanError(Exception):
    """Base class for all package errors."""


class ConfigError(EonplanError):
    """Invalid configuration: scenario file, CLI flags, weight vectors."""


class DataError(EonplanError):
    """Malformed input data: traces, prediction files, topology files."""
