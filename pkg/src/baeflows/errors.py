"""Exception hierarchy shared by every module of the package."""


class BaeflowsError(Exception):
    """Base class for all domain errors raised by the package."""

    def __init__(self, message="", witness=None):
        super().__init__(message)
        self.witness = witness


class NoSolution(BaeflowsError):
    """A linear system is inconsistent."""


class NonGenericInput(BaeflowsError):
    """A tuple of polynomials violates the genericity conditions."""


class NotFertile(BaeflowsError):
    """The Wronskian generation equation has no polynomial solution."""


class DegreeNotIncreasing(BaeflowsError):
    """A generation step would not raise the degree of its slot."""

    def __init__(self, message="", witness=None, step=None):
        super().__init__(message, witness)
        self.step = step


class BAENotSatisfied(BaeflowsError):
    """The Bethe ansatz equations fail for the given tuple."""


class SingularLinearSystem(BaeflowsError):
    """The residue system of the linear problem is singular."""


class RootExtractionFailure(BaeflowsError):
    """Numeric roots are too ill-conditioned to be trusted."""


class DegenerateSpectrum(BaeflowsError):
    """The Lax matrix has a repeated eigenvalue."""


class NormalizationFailure(BaeflowsError):
    """An eigenvector cannot be normalized by its coordinate sum."""


class RootCollision(BaeflowsError):
    """Two roots of a reconstructed polynomial coincide."""


class RankDeficiency(BaeflowsError):
    """A nullspace has the wrong dimension."""


class SingularSystem(BaeflowsError):
    """A square system expected to be invertible is singular."""


class DegenerateA(BaeflowsError):
    """A coefficient matrix fails the row-rank condition."""


class SingularWronskian(BaeflowsError):
    """A discrete Wronskian vanishes identically."""


class NotNilpotent(BaeflowsError):
    """The corner block of a seed matrix is not nilpotent."""


class PeriodicityFailure(BaeflowsError):
    """A family of Baker-Akhiezer functions is not periodic."""


class TruncationExceeded(BaeflowsError):
    """A pseudo-difference computation needs more tail terms than are stored."""


class InconsistentWave(BaeflowsError):
    """A wave family does not determine a Lax operator."""


class PoleAtSample(BaeflowsError):
    """A rational function has a pole at the requested sample point."""


class NotKdV(BaeflowsError):
    """A subset or subspace is not stable under the period shift."""


class NotInLeadingTerm(BaeflowsError):
    """A mutation index does not belong to the leading term."""


class FlagInvalid(BaeflowsError):
    """Flag vectors do not define a complete flag."""


class LineCoincidesWithOld(BaeflowsError):
    """A generated flag line equals the line it replaces."""
