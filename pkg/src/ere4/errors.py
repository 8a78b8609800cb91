"""Exception hierarchy shared by the pipeline stages."""


class ERE4Error(Exception):
    """Base class for all errors raised by :mod:`ere4`."""


class InvalidMass(ERE4Error, ValueError):
    pass


class DegenerateGeometry(ERE4Error, ValueError):
    pass


class NoConvergence(ERE4Error, RuntimeError):
    pass


class SingularJacobian(ERE4Error, RuntimeError):
    pass


class CollinearDegeneracy(ERE4Error, ValueError):
    """Raised when a collinear configuration reaches the basis construction."""


class FGIdentityViolation(ERE4Error, RuntimeError):
    """The eigen-relations of the third/fourth basis vectors do not hold."""


class Collision(ERE4Error, ValueError):
    pass


class IntegrationError(ERE4Error, RuntimeError):
    pass


class StepUnderflow(IntegrationError):
    pass


class CollisionDetected(IntegrationError):
    pass
