"""Exception types raised by the simulator."""


class MagnomechError(Exception):
    """Base class for all simulator errors."""


class InvalidInputError(MagnomechError, ValueError):
    """Malformed matrix, index or parameter."""


class InvalidStateError(MagnomechError, ValueError):
    """Covariance matrix that cannot describe a physical Gaussian state."""


class UnstableSystemError(MagnomechError):
    """Drift matrix is not Hurwitz, so no steady state exists."""

    def __init__(self, report):
        self.report = report
        super().__init__(
            f"drift matrix is not Hurwitz (max real part {report.max_real_part:.3e})"
        )


class ConvergenceError(MagnomechError, RuntimeError):
    """Iterative procedure ran out of budget."""


class ConfigError(MagnomechError, ValueError):
    """Invalid run configuration or result file."""
