"""Exception hierarchy shared by every pathsim module."""


class PathsimError(Exception):
    """Base class for simulator errors."""


class InvalidArgument(PathsimError, ValueError):
    pass


class InvalidAddress(PathsimError, IndexError):
    pass


class AllocationFailure(PathsimError, MemoryError):
    pass


class UseAfterTermination(PathsimError, RuntimeError):
    pass


class ContextExhaustion(PathsimError, RuntimeError):
    """Raised when live threads would exceed the thread-context memory.

    ``njobs`` is set by the query engine to the size of the job set that
    could not be admitted.
    """

    def __init__(self, message, njobs=None, demanded=None, capacity=None):
        super().__init__(message)
        self.njobs = njobs
        self.demanded = demanded
        self.capacity = capacity
