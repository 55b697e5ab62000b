"""Exception taxonomy for modlab.

Every failure mode that callers are expected to branch on gets its own
class; the CLI maps them onto exit codes (see cli.EXIT_CODES).
"""


class ModlabError(Exception):
    """Base class for all modlab errors."""


class ConfigError(ModlabError):
    """Invalid or unparsable run configuration."""


class DomainViolation(ModlabError):
    """Evaluation point outside the model's admissible interval."""


class NoPeriodicOrbit(ModlabError):
    """The energy level cuts no bounded well in the search window."""


class DegenerateOrbit(ModlabError):
    """Two turning points have collapsed (harmonic or soliton edge)."""


class MultipleWells(ModlabError):
    """More than one candidate well in the window; caller must narrow it."""


class QuadratureNotConverged(ModlabError):
    """Order-doubling error estimate above the requested tolerance."""


class IntegratorFailure(ModlabError):
    """Shooting integration failed or the return event never fired."""


class StencilLeftBranch(ModlabError):
    """A finite-difference stencil point crossed a distinguished limit."""


class SingularThetaHessian(ModlabError):
    """Action Hessian numerically singular where an inverse is needed."""


class SingularJacobian(ModlabError):
    """Newton Jacobian singular in the coordinate-change solve."""


class NoConvergence(ModlabError):
    """Iteration exhausted without meeting tolerance."""


class LeftBranch(ModlabError):
    """Parameter update left the wave branch during a solve."""


class EigenFailure(ModlabError):
    """Small dense eigensolver could not meet its residual tolerance."""


class NoWellMinimum(ModlabError):
    """No nondegenerate potential minimum in the window."""


class DegenerateWell(ModlabError):
    """Potential minimum with vanishing curvature."""


class NoSaddle(ModlabError):
    """No nondegenerate potential maximum with an adjacent well."""


class TailDivergence(ModlabError):
    """Homoclinic integral failed to converge at the saddle end."""


class GroupVelocityResonance(ModlabError):
    """Group velocity collides with a dispersionless characteristic."""


class SpeedResonance(ModlabError):
    """Solitary-wave speed collides with a dispersionless characteristic."""


class InadmissibleWavenumber(ModlabError):
    """Harmonic wavenumber below the admissibility threshold."""


class UncoveredClass(ModlabError):
    """Model outside the classes with a sign prediction."""


class UnsupportedConjugateFamily(ModlabError):
    """Conjugate model falls outside the supported function families."""


class FitRejected(ModlabError):
    """Asymptotic fit failed its R² or residual gate."""


class GridDegenerate(ModlabError):
    """Sweep grid empty, non-monotone, or collapsed."""


class IOFailure(ModlabError):
    """Report could not be written to its sink."""
