"""Exception hierarchy shared by the library and the command line tool.

Each error class carries the process exit code the CLI maps it to:
2 for rejected input, 1 for a verification that ran and failed, 3 for
an internal consistency check that should never trip.
"""


class ToolError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class InputError(ToolError):
    """Malformed or inconsistent input (documents, shapes, parameters)."""

    exit_code = 2


class VerificationFailure(ToolError):
    """A requested check ran to completion and the property does not hold."""

    exit_code = 1


class InternalCheckError(ToolError):
    """A self-check failed; indicates a bug in this package, not in the input."""

    exit_code = 3
