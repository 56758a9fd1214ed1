"""Exception types shared across the package."""


class HesslabError(Exception):
    """Base class for all package-specific errors."""


class DegenerateGradient(HesslabError):
    """Gradient magnitude below threshold; level-set curvature undefined."""


class AxisDivision(HesslabError):
    """u_rho / rho evaluated at rho = 0 without the regularity substitution."""


class StarShapeViolation(HesslabError):
    """<x, nu> <= 0 at a surface sample."""


class PoleSingularity(HesslabError):
    """Pole limit of the rotational curvature failed to converge."""


class NotConvex(HesslabError):
    """A convexity-requiring inequality was invoked on a non-convex body."""


class OutOfDomain(HesslabError):
    """Radius below the inner boundary of a radial solution."""


class NewtonStall(HesslabError):
    """No admissible residual-decreasing Newton step after maximal damping."""


class NonStarShaped(HesslabError):
    """Solver input body violates star-shapedness."""


class TruncationTooClose(HesslabError):
    """Fitted asymptotic constant oscillates; truncation radius too small."""


class PoorFit(HesslabError):
    """Far-field power-law fit has excessive shell variance."""


class LevelOutOfRange(HesslabError):
    """Requested level not strictly between boundary and far-field values."""


class CriticalPointOnLevel(HesslabError):
    """A level-set sample fell below the gradient threshold."""


class NotOverdetermined(HesslabError):
    """Boundary |grad u| is not constant to tolerance; identity not asserted."""


class ConfigError(HesslabError):
    """Invalid run configuration; message lists every violated constraint."""
