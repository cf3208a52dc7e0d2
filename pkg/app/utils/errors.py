"""Exception hierarchy shared by services and the CLI."""


class InvariantViolation(ValueError):
    """A verification battery found a counterexample."""

    exit_code = 1


class UnsupportedInstanceError(ValueError):
    """No evaluation path covers the requested instance."""

    exit_code = 2


class InstanceTooLargeError(UnsupportedInstanceError):
    """The instance exceeds the configured oracle vertex cap."""


class NonConvergenceError(RuntimeError):
    """An iterative numeric procedure did not reach its tolerance."""

    exit_code = 3


def exit_code_for(exc: BaseException) -> int:
    """Map an exception raised by a service to a process exit code."""
    code = getattr(exc, "exit_code", None)
    if code is not None:
        return code
    if isinstance(exc, ValueError):
        return 2
    return 1
