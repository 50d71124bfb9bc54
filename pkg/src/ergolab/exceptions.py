"""Exception types raised across the package."""


class ErgolabError(Exception):
    """Base class for all package errors."""


class ConvergenceError(ErgolabError):
    """A branch inversion did not reach the requested tolerance."""


class NoConvergence(ErgolabError):
    """A fixed-point iteration exceeded its iteration cap."""


class NotExpanding(ErgolabError, ValueError):
    """Map parameters violate the expanding condition."""


class DimensionMismatch(ErgolabError, ValueError):
    """Two objects live on grids or resolutions of different sizes."""


class InvalidState(ErgolabError):
    """A scheme was stepped with a state of the wrong kind."""


class InvalidSpec(ErgolabError, ValueError):
    """An experiment specification or config file is malformed."""


class StoreCorruption(ErgolabError):
    """A stored result cell failed its checksum."""
