"""Exception types shared across the package."""


class InvariantViolation(RuntimeError):
    """A structural invariant of the dynamics was broken at run time.

    Raised e.g. when the inter-particle gap drops below the analytic floor,
    which signals an integrator-tolerance problem rather than bad input.
    """


class ConfigError(ValueError):
    """A scenario configuration or CLI argument is malformed."""
