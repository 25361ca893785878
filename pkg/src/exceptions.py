class NumericalFailureError(Exception):
    """Base class for failures of a numerical procedure on otherwise valid input."""


class DomainViolationError(NumericalFailureError):
    """Raise this exception when a point leaves the domain of the map being applied."""


class PoleError(DomainViolationError):
    """Raise this exception when a map is evaluated at its pole."""


class SwallowedPointError(NumericalFailureError):
    """Raise this exception when a point needed downstream was swallowed by a hull."""


class HorizonExceededError(NumericalFailureError):
    """Raise this exception when integration is requested past the end of a driving path."""


class ZipperError(NumericalFailureError):
    """Raise this exception when a boundary arc cannot be encoded as a Loewner hull."""


class ResourceLimitError(NumericalFailureError):
    """Raise this exception when a request would exceed a configured resource guard."""


class InadmissibleLawError(ValueError):
    """Raise and handle this exception when a restriction law (alpha, beta) is not admissible."""
