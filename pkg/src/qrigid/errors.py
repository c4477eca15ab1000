"""Exception and warning types shared across the package."""


class QRigidError(Exception):
    """Base class for all errors raised by qrigid."""


class DimensionMismatch(QRigidError, ValueError):
    pass


class BackendMismatch(QRigidError, TypeError):
    pass


class EmptyInput(QRigidError, ValueError):
    pass


class NotHermitian(QRigidError, ValueError):
    pass


class NotHermitianTuple(NotHermitian):
    pass


class NotTraceless(QRigidError, ValueError):
    pass


class ExactBackendUnsupported(QRigidError, TypeError):
    """The operation needs square roots or eigenvalues, which EXACT cannot provide."""


class GramSingular(QRigidError, ValueError):
    pass


class DegenerateSystem(QRigidError, ValueError):
    pass


class NormalizationViolated(QRigidError, ValueError):
    pass


class IndexOutOfRange(QRigidError, IndexError):
    pass


class DependentTuple(UserWarning):
    """Issued when a tuple spans fewer dimensions than it has entries."""
