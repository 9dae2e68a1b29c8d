"""Exception hierarchy.

Every numerical failure raised by the library derives from
:class:`NumericalFailure`; configuration problems derive from
:class:`ConfigInvalid`.  The CLI maps these two families to exit codes
3 and 2 respectively.
"""


class PolylabError(Exception):
    """Base class for all library errors."""


class NumericalFailure(PolylabError):
    """A computation could not deliver a certified result."""


# polycore
class NonConvergence(NumericalFailure):
    """Iteration cap hit at the current precision; retry with more bits."""


class DegenerateInput(NumericalFailure):
    pass


class BasisMismatch(PolylabError):
    pass


# karp
class DegreeMismatch(NumericalFailure):
    pass


class TooLarge(PolylabError):
    pass


class NonPolynomialResidue(NumericalFailure):
    pass


# snake
class NoConvergence(NumericalFailure):
    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class InfeasibleMajorant(NumericalFailure):
    pass


class InteriorZeroUnsupported(NumericalFailure):
    pass


class LPInfeasible(NumericalFailure):
    pass


class BracketInverted(NumericalFailure):
    pass


# shadow
class ContainmentViolation(NumericalFailure):
    pass


# charges
class SingularPoint(NumericalFailure):
    pass


# planarortho / twop
class TruncationFailure(NumericalFailure):
    pass


class RankDeficiency(NumericalFailure):
    pass


class DiscretizationUnstable(NumericalFailure):
    pass


class RangeError(NumericalFailure, ValueError):
    pass


# riesz
class DivergentEnergy(NumericalFailure):
    pass


class KernelSingularity(NumericalFailure):
    pass


# expcli
class ConfigInvalid(PolylabError):
    pass


class ModuleError(NumericalFailure):
    def __init__(self, module, cause):
        super().__init__(f"{module}: {cause}")
        self.module = module
        self.cause = cause


class StoreCorrupt(PolylabError):
    pass
