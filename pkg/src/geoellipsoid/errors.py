"""Exception types raised across the package."""


class GeometryError(ValueError):
    """Invalid point, tangent vector, or a query outside a map's domain."""


class EllipsoidCollapse(ArithmeticError):
    """The ellipsoid can no longer be updated reliably.

    ``partial`` carries the run state reached before the collapse, when the
    error is raised from inside :func:`geoellipsoid.ellipsoid.run`.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DegenerateCutError(EllipsoidCollapse):
    pass


class ConditioningError(EllipsoidCollapse):
    pass


class NoFeasibleQueryError(RuntimeError):
    pass


class ReferenceDisagreementError(RuntimeError):
    pass


class InstanceError(ValueError):
    """Malformed problem-instance or suite file."""
