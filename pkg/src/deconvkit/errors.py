"""Exception types raised by deconvkit."""


class DeconvError(Exception):
    """Base class for all library errors."""


class ConfigInvalid(DeconvError, ValueError):
    pass


class UnsupportedKernel(DeconvError, ValueError):
    """The kernel family does not support the requested operation."""


class UndefinedMoment(DeconvError, ValueError):
    """The kernel has no finite second moment (sinc, or s = 0)."""


class VanishingCharacteristicFunction(DeconvError, ArithmeticError):
    pass


class InsufficientReplicates(DeconvError, ValueError):
    pass


class EmptySample(DeconvError, ValueError):
    pass


class ModelMismatch(DeconvError, ValueError):
    """Estimator applied to data from a measurement model it does not handle."""


class EmptyNeighborhood(DeconvError, ArithmeticError):
    pass


class SingularLocalFit(DeconvError, ArithmeticError):
    pass


class IndexOutOfRange(DeconvError, IndexError):
    pass


class GridMismatch(DeconvError, ValueError):
    pass
