"""Error taxonomy shared by every module.

Each class carries a ``kind`` string; sweep reports key their skip counters
by it, so every skipped point maps to exactly one kind.
"""


class DriftLapError(Exception):
    kind = "DriftLapError"


class ZeroBase(DriftLapError):
    kind = "ZeroBase"


class BranchGuard(DriftLapError):
    kind = "BranchGuard"


class SingularPoint(DriftLapError):
    kind = "SingularPoint"


class ExcludedParameter(DriftLapError):
    kind = "ExcludedParameter"


class DegenerateGradient(DriftLapError):
    kind = "DegenerateGradient"


class DegenerateLine(DriftLapError):
    kind = "DegenerateLine"


class ConfigInvalid(DriftLapError):
    kind = "ConfigInvalid"


class ResolutionTooLow(ConfigInvalid):
    kind = "ResolutionTooLow"


POINT_ERROR_KINDS = (
    SingularPoint.kind,
    DegenerateLine.kind,
    BranchGuard.kind,
    DegenerateGradient.kind,
)
