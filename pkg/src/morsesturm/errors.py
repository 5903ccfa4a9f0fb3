"""Exception types shared across the toolkit.

Every error raised deliberately by this package derives from MorseSturmError,
so callers (and the command line driver) can map failure modes to exit codes
without string matching.
"""


class MorseSturmError(Exception):
    """Base class for all toolkit errors."""


class DegenerateMetric(MorseSturmError):
    """A symmetric bilinear form required to be nondegenerate is singular."""


class ParseError(MorseSturmError):
    """A problem file is not syntactically valid."""


class SchemaError(MorseSturmError):
    """A problem file parses but violates the schema or its invariants."""


class PerturbationBrokeInvariant(MorseSturmError):
    """A random perturbation left the admissible problem class."""


class NotTimelike(MorseSturmError):
    """A candidate witness fails g(Y, Y) < 0 somewhere on [0, 1]."""


class MissingSeed(MorseSturmError):
    """A witness solve was requested but no seed data is available."""


class IntegrationFailure(MorseSturmError):
    """The fixed-grid integrator could not reach the requested tolerance."""


class UnresolvedRoot(MorseSturmError):
    """A focal-instant candidate could not be localized, or the focal set
    does not look discrete at the working tolerances."""

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class EndpointFocal(MorseSturmError):
    """t = 1 is focal, so a jump-sum index is not defined without an
    endpoint correction."""


class DegenerateFocalInstant(MorseSturmError):
    """The restriction of g to a focal complement space is singular."""


class NoAgreement(MorseSturmError):
    """Perturbation trials produced conflicting index values."""


class AllTrialsDegenerate(MorseSturmError):
    """Every perturbation trial was itself degenerate or endpoint focal."""


class EmptyKernel(MorseSturmError):
    """A constraint kernel came out zero dimensional."""


class NotStabilized(MorseSturmError):
    """Mesh refinement exhausted the schedule without two consecutive
    agreeing results."""


class LeftChart(MorseSturmError):
    """A geodesic left the domain where the chart metric is defined."""


class CurvatureAsymmetry(MorseSturmError):
    """A trivialized coefficient matrix failed the g-symmetry check."""


class ConditioningWarning(UserWarning):
    """A counted form has near-zero eigenvalues, typically because the
    evaluation parameter sits at or near a focal instant."""
