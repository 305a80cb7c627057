"""Exception hierarchy shared by every module."""


class QpvError(Exception):
    """Base class for library errors."""


class DomainError(QpvError, ValueError):
    """A numeric argument lies outside the region where the operation is defined."""


class StructuralError(QpvError, ValueError):
    """Shapes, tensor factorizations or protocol wiring are inconsistent."""
