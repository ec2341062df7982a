"""Exception types shared across the package."""


class NumericalError(ArithmeticError):
    """A computation is numerically degenerate (singular system, underflow, ...).

    Input validation problems raise ``ValueError`` instead; the CLI maps the
    two onto different exit codes.
    """
