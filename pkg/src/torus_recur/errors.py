"""Exception hierarchy shared by all modules."""


class TorusRecurError(Exception):
    """Base class for every domain error raised by the package."""

    exit_code = 2


class NotUnimodular(TorusRecurError):
    pass


class NotHyperbolic(TorusRecurError):
    pass


class CapExceeded(TorusRecurError):
    exit_code = 3


class DegenerateParallelogram(TorusRecurError):
    pass


class DegenerateLayer(TorusRecurError):
    pass


class ZeroB(TorusRecurError):
    pass


class EmptySlice(TorusRecurError):
    pass


class SelfEnergyDiverges(TorusRecurError):
    pass


class IllConditionedFit(TorusRecurError):
    pass
