"""driftlap: verification engine for drift p-Laplace fundamental solutions.

The Heisenberg group H^1 and the Grushin-type planes G_n each get a frame,
candidate solutions, and drift operators assembled from second-order jets.
The :mod:`driftlap.verify` subpackage holds the oracles and the checks built on them.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BranchGuard,
    ConfigInvalid,
    DegenerateGradient,
    DegenerateLine,
    DriftLapError,
    ExcludedParameter,
    ResolutionTooLow,
    SingularPoint,
    ZeroBase,
)
from .jets import BranchMode, BranchPolicy, Jet2, jet_log, jet_pow, jet_seed  # noqa: E402
from .params import CandidateKind, DriftParams  # noqa: E402

__all__ = [
    "BranchGuard",
    "BranchMode",
    "BranchPolicy",
    "CandidateKind",
    "ConfigInvalid",
    "DegenerateGradient",
    "DegenerateLine",
    "DriftLapError",
    "DriftParams",
    "ExcludedParameter",
    "Jet2",
    "ResolutionTooLow",
    "SingularPoint",
    "ZeroBase",
    "jet_log",
    "jet_pow",
    "jet_seed",
]
