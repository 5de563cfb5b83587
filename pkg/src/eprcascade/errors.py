"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems (bad scenario
files, step-guard violations, parameter range errors) exit with 2,
numerical failures (NaN, truncation overflow) with 3, I/O failures with 4.
"""


class SimulationError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(SimulationError):
    """Invalid parameters, scenario fields or step sizes."""


class RangeError(ConfigurationError):
    """Requested evaluation outside the supported numerical range."""


class IntegrationError(SimulationError):
    """The integrator produced a non-finite state.

    Parameters
    ----------
    message : str
    t : float, optional
        Time at which the failure was first detected.
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class TruncationError(IntegrationError):
    """Fock-space truncation overflowed the configured cutoffs."""
