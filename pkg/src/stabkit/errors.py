"""Exception types shared across the toolkit.

The CLI maps these onto distinct exit codes, so everything user-facing
raises one of the three classes below rather than bare ValueError.
"""


class ValidationError(ValueError):
    """Bad input: wrong dimensions, out-of-range parameters, parse failures."""


class CapExceededError(ValueError):
    """A request beyond an engine cap (dense-table sizes, oracle scale, ...)."""


class CertificateError(RuntimeError):
    """An internal identity or theorem-backed inequality failed numerically.

    These checks guard implementation bugs: the quantities compared are
    equal (or ordered) by theorem, so a failure is never a property of the
    input state.
    """
