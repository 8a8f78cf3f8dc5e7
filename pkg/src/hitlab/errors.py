"""Exception types raised across the package."""


class HitlabError(Exception):
    """Base class for all package-specific errors."""


class NonpositiveTau(HitlabError, ValueError):
    """Gaussian heat kernel requested at tau <= 0."""


class NonpositiveTime(HitlabError, ValueError):
    """Hitting density requested at t <= 0."""


class NegativeLevel(HitlabError, ValueError):
    """Hitting density requested at level x < 0."""


class HorizonViolation(HitlabError, ValueError):
    """Evaluation at or beyond the terminal horizon t >= s."""


class DegenerateInterval(HitlabError, ValueError):
    """Simulation interval s - t below the resolvable floor."""


class UnsortedGrid(HitlabError, ValueError):
    """A time grid that is not strictly increasing."""


class GridTooSmall(HitlabError, ValueError):
    """Fewer than 3 points per axis: no interior stencil exists."""


class QuadratureFailure(HitlabError, RuntimeError):
    """Adaptive quadrature did not reach tolerance within the subdivision budget."""


class NonpositiveField(HitlabError, ValueError):
    """log of a field that is not strictly positive."""


class ZeroDenominator(HitlabError, ZeroDivisionError):
    """Ratio v = w/h requested where h vanishes (x = 0 or t >= s)."""


class UnsupportedBoundary(HitlabError, ValueError):
    """Hitting target requested for an f outside the exactly solvable families."""


class ConfigError(HitlabError, ValueError):
    """Invalid or unknown keys in a run configuration document."""
