"""Exception hierarchy.

Everything raised for physical or numerical reasons derives from
:class:`PhysicsError`; the CLI maps those to exit code 3.
"""


class CvmdiError(Exception):
    pass


class PhysicsError(CvmdiError):
    pass


class CutoffError(PhysicsError):
    """Fock cutoff too small for the requested state, or the hard cap was hit."""

    def __init__(self, message, mode=None):
        super().__init__(message)
        self.mode = mode


class VanishingPostSelectionError(PhysicsError):
    def __init__(self, message, probability=0.0):
        super().__init__(message)
        self.probability = probability


class UnphysicalStateError(PhysicsError):
    pass


class BlockStructureError(PhysicsError):
    """Covariance mixes q and p quadratures, so the block-form formulas do not apply."""


class NumericalPathologyError(PhysicsError):
    pass


class ChannelError(PhysicsError):
    pass


class NoBracketError(PhysicsError):
    """The target key rate is not reached even at zero distance."""
