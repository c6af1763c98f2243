"""Exception types shared across the library.

Every error raised by isometrica derives from :class:`IsometricaError`,
so callers can catch the whole family at once.  Precondition violations
(bad inputs) and numerical findings (a computation that cannot certify
its own postcondition) use distinct subclasses; nothing here is ever
silently swallowed.
"""


class IsometricaError(Exception):
    """Base class for all library errors."""


class NotHermitian(IsometricaError):
    """Input matrix is not Hermitian within tolerance."""


class NoConvergence(IsometricaError):
    """Eigensolver failed to converge within the sweep budget."""


class ShapeMismatch(IsometricaError):
    """Block operators (or matrices) have incompatible shapes."""


class NotPartialIsometry(IsometricaError):
    """Operand fails the w·w*·w = w test beyond tolerance."""


class NotExtremal(IsometricaError):
    """Operand has a block with both defect ranks nonzero."""


class RankTooLarge(IsometricaError):
    """Requested rank exceeds min(out_dim, in_dim) for a block."""


class IllConditioned(IsometricaError):
    """Singular values cluster at the rank cutoff; the rank decision
    (and anything downstream of it) would be unreliable."""


class CornerSingular(IsometricaError):
    """Compressed corner p·a·q is not invertible between the two ranges."""


class NotNilpotent(IsometricaError):
    """The alignment factor p0·a·s failed its nilpotency certificate."""


class NotProjection(IsometricaError):
    """Matrix is not Hermitian idempotent within tolerance."""


class TooFar(IsometricaError):
    """Operands are farther apart than the construction's hypothesis allows."""


class StepTooLarge(IsometricaError):
    """A path could not be refined to the required step bound."""


class PatternConflict(IsometricaError):
    """Defect patterns of the endpoints are incompatible blockwise.

    Unreachable for valid extremal pairs at distance < 2; reaching it
    is a finding, not a routine failure.
    """


class BadWitness(IsometricaError):
    """Proposed discontinuity witness does not live in the defect corner."""


class OutOfRange(IsometricaError):
    """Numeric argument outside the domain of the requested bound."""


class PathInvariantViolated(IsometricaError):
    """A mid-path invariant that should hold by construction failed.

    Raised loudly instead of patching over the sample: it means the
    hypothesis of the construction was broken at runtime.
    """
