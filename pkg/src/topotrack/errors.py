"""Exception hierarchy shared by the library and the command line."""


class TopoTrackError(Exception):
    """Base class for all errors raised by topotrack."""

    exit_code = 3


class InputError(TopoTrackError, ValueError):
    """Malformed or missing input data (point files, manifests, clouds)."""

    exit_code = 1


class ParameterError(TopoTrackError, ValueError):
    """A numeric parameter is outside its admissible range."""

    exit_code = 2


class StructuralError(TopoTrackError):
    """A filtration is not canonically ordered or not closed under faces."""


class ContractError(TopoTrackError):
    """An operation was called outside its documented preconditions."""


class InvariantError(TopoTrackError):
    """An internal invariant was violated; indicates a bug."""


class FrameError(TopoTrackError):
    """Wraps an error raised while processing one frame of a sequence."""

    def __init__(self, frame_index, cause):
        super().__init__(f"frame {frame_index}: {cause}")
        self.frame_index = frame_index
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3)
