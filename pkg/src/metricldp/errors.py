"""Exception hierarchy shared by all modules."""


class MetricLdpError(Exception):
    """Base class for all library errors."""


class DomainError(MetricLdpError):
    """A value, query, or parameter falls outside its declared domain."""


class ShapeError(MetricLdpError):
    """Vector/matrix dimensions do not line up."""


class CapacityError(MetricLdpError):
    """A dense structure would exceed the configured memory gate."""


class InfeasibleError(MetricLdpError):
    """An optimization problem has an empty feasible set."""
