"""Exception types shared across the package."""


class EpisynthError(Exception):
    """Base class for all package errors."""


class SpecSyntaxError(EpisynthError):
    """Raised when a specification string cannot be parsed.

    `position` is the 0-based character offset of the offending token.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class HorizonError(EpisynthError):
    """Raised when a trajectory is too short for the formula being evaluated."""


class ModelDomainError(EpisynthError):
    """Raised when the dynamics leave their valid domain (e.g. a vanishing
    transmission denominator) or a simulation produces non-finite state."""


class ScenarioError(EpisynthError):
    """Raised for malformed scenario files or inconsistent scenario fields."""
