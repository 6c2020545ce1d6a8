"""Exception types shared across the package.

The split matters for the command line tool: ``UsageError`` maps to exit
code 1 (bad input or configuration) and ``GuardError`` to exit code 2
(a runtime safety guard refused to continue).
"""


class UsageError(ValueError):
    """Invalid argument, configuration value, or malformed input file."""


class GuardError(RuntimeError):
    """A runtime guard tripped (overflow, CFL blowup, NaN state)."""


class OverflowGuardError(GuardError):
    """An analyticity weight would exponentiate past the configured cap."""


class CflGuardError(GuardError):
    """Advective CFL number exceeded the hard limit."""


class SymmetryError(UsageError):
    """Spectral data is not conjugate-symmetric, so no real field exists."""
