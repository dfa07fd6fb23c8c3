class HopsimError(Exception):
    """Base class for recoverable domain failures."""


class NoSeparation(HopsimError):
    pass


class NoConvergence(HopsimError):
    pass


class DegenerateConfiguration(HopsimError):
    pass


class InsufficientSamples(HopsimError):
    pass


class NonmonotonicTime(HopsimError):
    pass


class UnknownActivity(HopsimError):
    pass


class InsufficientIllumination(HopsimError):
    pass


class ParallelObservations(HopsimError):
    pass


class PolarDegenerate(HopsimError):
    pass
