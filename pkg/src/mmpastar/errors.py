"""Exception hierarchy shared across the package."""


class MMPError(Exception):
    """Base class for every error raised by mmpastar."""


class InvalidEnvironment(MMPError, ValueError):
    pass


class EmptyObstacle(MMPError, ValueError):
    pass


class StartBlocked(MMPError, ValueError):
    pass


class GoalBlocked(MMPError, ValueError):
    pass


class InvalidWaypoints(MMPError, ValueError):
    pass


class BoundViolated(MMPError, AssertionError):
    def __init__(self, node, value, bound):
        super().__init__(f"heuristic {value!r} exceeds bound {bound!r} at {node}")
        self.node = node
        self.value = value
        self.bound = bound


class ParseFailure(MMPError, ValueError):
    pass


class ValidationFailure(MMPError, ValueError):
    pass


class RenderFailure(MMPError, ValueError):
    pass


class TransportError(MMPError, RuntimeError):
    """Raised once a provider call has exhausted its retries."""

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = list(log or [])


class FileError(MMPError, OSError):
    pass


class Unsolvable(MMPError, ValueError):
    pass


class SchemaError(MMPError, ValueError):
    def __init__(self, field_path, message):
        super().__init__(f"{field_path}: {message}")
        self.field_path = field_path


class GenerationExhausted(MMPError, RuntimeError):
    pass


class DomainError(MMPError, ValueError):
    pass


class EmptyInput(MMPError, ValueError):
    pass
