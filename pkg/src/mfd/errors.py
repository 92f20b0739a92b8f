"""Exception hierarchy shared by every module."""


class MfdError(Exception):
    """Base class for all package errors."""


class NotHermitian(MfdError):
    pass


class NotUnitary(MfdError):
    pass


class NotNormal(MfdError):
    pass


class NotSpecialUnitary(MfdError):
    pass


class NoConvergence(MfdError):
    pass


class SpectrumStraddle(MfdError):
    pass


class Singular(MfdError):
    pass


class SizeMismatch(MfdError):
    pass


class DegenerateFrame(MfdError):
    pass


class FrameMismatch(MfdError):
    pass


class ShapeMismatch(MfdError):
    pass


class BadParam(MfdError):
    pass


class DomainMismatch(MfdError):
    pass


class FormatError(MfdError):
    pass


class IntegrityError(MfdError):
    pass


class SchemaError(MfdError):
    pass


class ValidationFailed(MfdError):
    pass


class GapCollapse(MfdError):
    pass


class FramesInvalid(MfdError):
    pass


class OscillationTooLarge(MfdError):
    pass


class MeshTooCoarse(MfdError):
    pass


class OverlapCollapse(MfdError):
    pass


class ToleranceNotMet(MfdError):
    """Raised when a construction finishes but misses the requested tolerance.

    ``report`` carries the achieved :class:`~mfd.field.ResidualReport` (or
    ``None`` when the failure happened before residuals could be measured).
    """

    def __init__(self, message, report=None, suggested_refine=None):
        super().__init__(message)
        self.report = report
        self.suggested_refine = suggested_refine


class Obstructed(MfdError):
    """Raised when diagonalization is topologically blocked.

    ``report`` is the :class:`~mfd.obstruction.ObstructionReport` certificate.
    """

    def __init__(self, report):
        super().__init__(report.verdict)
        self.report = report
