"""Drift parameters (p, L) and their excluded loci."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ConfigInvalid

# half-width of the band around an excluded L value that is treated as excluded
EXCLUSION_RADIUS = 1e-9


@dataclass(frozen=True)
class DriftParams:
    p: float
    L: float

    def __post_init__(self):
        if not (math.isfinite(self.p) and math.isfinite(self.L)):
            raise ConfigInvalid(f"non-finite drift parameters p={self.p}, L={self.L}")
        if not self.p > 1.0:
            raise ConfigInvalid(f"p must satisfy 1 < p < inf, got {self.p}")

    def h_bound(self) -> float:
        """|L| value excluded on H^1: (4-p)/(2(1-p))."""
        return (4.0 - self.p) / (2.0 * (1.0 - self.p))

    def g_bound(self, n: int) -> float:
        """|L| value excluded on G_n: (n+2-p)/(n(1-p))."""
        return (n + 2.0 - self.p) / (n * (1.0 - self.p))

    def is_valid_h(self, radius: float = EXCLUSION_RADIUS) -> bool:
        b = self.h_bound()
        return abs(self.L - b) > radius and abs(self.L + b) > radius

    def is_valid_g(self, n: int, radius: float = EXCLUSION_RADIUS) -> bool:
        b = self.g_bound(n)
        return abs(self.L - b) > radius and abs(self.L + b) > radius


def parse_float_list(text: str) -> list[float]:
    try:
        out = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigInvalid(f"cannot parse number list {text!r}") from exc
    if not out:
        raise ConfigInvalid(f"empty number list {text!r}")
    return out


class CandidateKind(str, enum.Enum):
    POWER = "power"
    LEGACY = "legacy"
    BGG2 = "bgg2"
    INFINITY = "infinity"
    MOLLIFIED = "mollified"
