"""Exception types shared by the services and the CLI."""


class OptomechError(Exception):
    """Base error; ``exit_code`` is what the CLI returns for it."""

    exit_code: int = 4


class ConfigError(OptomechError):
    """Malformed or inconsistent run configuration."""

    exit_code = 2


class DomainError(OptomechError):
    """A closed form was evaluated outside the parameter domain it is defined on."""

    exit_code = 2


class InstabilityError(OptomechError):
    """The requested parameters lie in the unstable region."""

    exit_code = 3


class NumericalError(OptomechError):
    """A numerical stage could not produce a trustworthy value."""

    exit_code = 4


class NearSingular(NumericalError):
    """The frequency-domain linear system is ill-conditioned (operation at an instability)."""


class QuadratureFailure(NumericalError):
    """Adaptive quadrature ran out of panels before reaching tolerance."""


class Unphysical(NumericalError):
    """A covariance matrix violates the uncertainty principle beyond tolerance."""


class NoMaximum(NumericalError):
    """An objective is flat to tolerance, so it has no meaningful maximizer."""


class RegimeWarning(UserWarning):
    """A closed form was used outside the regime it was derived for."""
