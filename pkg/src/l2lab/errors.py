"""Exception hierarchy shared by all engines.

The CLI maps these onto exit codes: validation problems exit 1,
verification failures exit 2 and resource caps exit 3.
"""


class L2LabError(Exception):
    """Base class for every error raised by the library."""

    exit_code = 1


class UsageError(L2LabError, TypeError):
    """Operands that cannot be combined, e.g. elements of different groups."""


class ValidationError(L2LabError, ValueError):
    """Malformed input: bad index set, bad pattern, bad parameters."""


class WindowError(L2LabError, KeyError):
    """A pattern was queried outside of its window."""

    def __str__(self):
        return Exception.__str__(self)


class DomainError(L2LabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ExtensionNotCertified(L2LabError):
    """The extension property could not be certified for a window."""


class ResourceError(L2LabError):
    """A configured size cap was exceeded."""

    exit_code = 3


class VerificationError(L2LabError):
    """An oracle disagreed with the engine it checks."""

    exit_code = 2
