"""Exception types raised across the package."""


class ReactmixError(Exception):
    """Base class for all package errors."""


class ValidationError(ReactmixError, ValueError):
    """An argument or state violates a documented precondition."""


class CFLViolation(ReactmixError):
    """A time step exceeds the advective or reactive stability bound.

    Attributes
    ----------
    dt : float
        The offending step.
    bound : float
        Largest admissible step for the current state.
    which : str
        ``"advective"`` or ``"reactive"``.
    """

    def __init__(self, dt, bound, which):
        self.dt = dt
        self.bound = bound
        self.which = which
        super().__init__(f"{which} stability bound violated: dt={dt:.6g} exceeds bound {bound:.6g}")


class NegativityError(ReactmixError):
    """A density dropped below the negativity tolerance."""

    def __init__(self, t, minimum, tolerance, species):
        self.t = t
        self.minimum = minimum
        self.tolerance = tolerance
        self.species = species
        super().__init__(
            f"species {species} reached min {minimum:.3e} below -{tolerance:.3e} at t={t:.6g}"
        )


class NonFiniteError(ReactmixError):
    """The state became NaN or infinite."""

    def __init__(self, last_good_time):
        self.last_good_time = last_good_time
        super().__init__(f"non-finite state; last good time t={last_good_time:.6g}")


class DivergenceError(ValidationError):
    """A flow field is not divergence free to tolerance."""


class ConfigError(ReactmixError):
    """A configuration file or override could not be parsed or validated."""
