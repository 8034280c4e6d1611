"""Exception bases shared across the package.

Concrete error classes live next to the code that raises them; the bases
here exist so the CLI can map failures onto exit codes (config error -> 2,
data error -> 3, numeric divergence -> 4).
"""


class SeisregError(Exception):
    """Base class for all seisreg errors."""


class ConfigError(SeisregError):
    """Bad parameters, bad configuration, preconditions violated by the caller."""


class DataError(SeisregError):
    """Malformed or inconsistent input data (files, series, volumes)."""


class DivergenceError(SeisregError):
    """A numeric procedure produced non-finite values and was aborted."""
