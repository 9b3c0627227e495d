"""Exception types raised by the library."""


class JPairsError(Exception):
    """Base class for all library errors."""


class NoConvergence(JPairsError):
    pass


class RankDeficient(JPairsError):
    pass


class OddDimension(JPairsError):
    pass


class SingularConjugator(JPairsError):
    pass


class SamplingExhausted(JPairsError):
    pass


class NotOrthogonal(JPairsError):
    pass


class ClusterAmbiguity(JPairsError):
    pass


class InvalidSignature(JPairsError):
    pass


class EmptySubspace(JPairsError):
    pass


class NonGenericSpectrum(JPairsError):
    pass


class NotInvariant(JPairsError):
    pass


class NotTransverse(JPairsError):
    pass


class NotOrthonormal(JPairsError):
    pass


class NumericalAmbiguityWarning(UserWarning):
    """Singular values sit within a factor 10 of the rank threshold."""
