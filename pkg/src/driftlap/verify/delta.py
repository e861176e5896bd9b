"""delta-mass of the mollified residuals by tensor-grid quadrature.

The mollified residual is integrated against the constant test function 1
over the box |x1|, |x2| <= 3, |x3| <= 9 (Heisenberg) or |y1-a| <= 3,
|y2-b| <= 9 (Grushin). In rescaled variables

    Heisenberg  xi = x/eps,               zeta = x3/eps^2
    Grushin     T = (y1-a)/eps^{2/(n+1)},  S = (y2-b)/eps^2

the integrand is the same function for every eps; only the box grows. Each
axis uses a sinh-graded midpoint rule so the O(1) core and the algebraic
tails are both resolved on a fixed node count.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .. import _kernels
from .. import grushin as G
from .. import heisenberg as H
from ..errors import ConfigInvalid, ResolutionTooLow
from ..params import DriftParams

MIN_RESOLUTION = 32
BOX_HORIZONTAL = 3.0
BOX_VERTICAL = 9.0
DEFAULT_LADDER = (0.2, 0.1, 0.05)
DEFAULT_STABILITY = 0.02
DEFAULT_RESOLUTION = {"heisenberg": 64, "grushin": 256}


@dataclass
class DeltaMassEstimate:
    space: str
    p: float
    L: float
    shape: dict | None
    ladder: list[float]
    resolution: int
    masses: list[complex]
    masses_fine: list[complex]
    deviation: float  # max pairwise relative change across the ladder
    convergence: float  # max relative change on doubling the resolution
    stability: float
    degenerate: bool = False
    backend: str = ""
    notes: list[str] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.degenerate or self.convergence <= 0.5 * self.stability

    @property
    def stable(self) -> bool:
        return self.degenerate or self.deviation <= self.stability

    @property
    def passed(self) -> bool:
        return self.converged and self.stable

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("masses", "masses_fine"):
            d[key] = [[z.real, z.imag] for z in d[key]]
        d.update(converged=self.converged, stable=self.stable, passed=self.passed)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DeltaMassEstimate":
        d = {k: v for k, v in d.items() if k not in ("converged", "stable", "passed")}
        for key in ("masses", "masses_fine"):
            d[key] = [complex(re, im) for re, im in d[key]]
        return cls(**d)


def _check_ladder(ladder) -> list[float]:
    lad = [float(e) for e in ladder]
    if not lad:
        raise ConfigInvalid("empty epsilon ladder")
    if any(not (e > 0 and math.isfinite(e)) for e in lad):
        raise ConfigInvalid("epsilon values must be positive and finite")
    if any(b >= a for a, b in zip(lad, lad[1:])):
        raise ConfigInvalid("epsilon ladder must be strictly decreasing")
    return lad


def _max_pairwise(values: list[complex]) -> float:
    worst = 0.0
    for i, a in enumerate(values):
        for b in values[i + 1:]:
            worst = max(worst, abs(a - b) / max(abs(a), abs(b), 1e-300))
    return worst


def h_prefactor(params: DriftParams) -> tuple[float, float, float, float]:
    """(constant, q, a, b): mass = constant * integral of rho^q V^a conj(V)^b."""
    p, L = params.p, params.L
    ex = H.h_exponents_raw(p, L)
    e, t = ex.eta, ex.tau
    const = 2 ** ((3 * p - 2) / 2) * H.mollified_prefactor(p, L) * (e * e + t * t) ** ((p - 2) / 2)
    return const, (p - 2) / 2, (e * p + t * (p - 2) - p) / 2, (e * (p - 2) + t * p - p) / 2


def g_prefactor(shape: G.GrushinShape, params: DriftParams):
    """(constant, q, A, B): mass = constant * integral of |T|^q T^(n-1) G^A conj(G)^B."""
    p, L, n, c = params.p, params.L, shape.n, shape.c
    ex = G.g_exponents_raw(p, L, n)
    al, be = ex.alpha, ex.beta
    const = (
        -(2 ** ((p - 2) / 2)) * G.mollified_prefactor(p, L, n)
        * abs(c) ** (p - 2) * c * n * (n + 1) ** (p - 2) * (al * al + be * be) ** ((p - 2) / 2)
    )
    return const, n * (p - 2), (al * p + be * (p - 2) - p) / 2, (al * (p - 2) + be * p - p) / 2


def _h_mass(params, eps, res, which):
    const, q, a, b = h_prefactor(params)
    xi, wx = _kernels.sinh_axis(BOX_HORIZONTAL / eps, res)
    ze, wz = _kernels.sinh_axis(BOX_VERTICAL / eps**2, res)
    return const * _kernels.h_density_sum(q, a, b, xi, wx, ze, wz, which)


def _g_mass(shape, params, eps, res, which):
    const, q, A, B = g_prefactor(shape, params)
    T, wt = _kernels.sinh_axis(BOX_HORIZONTAL / eps ** (2.0 / (shape.n + 1)), res)
    S, ws = _kernels.sinh_axis(BOX_VERTICAL / eps**2, res)
    return const * _kernels.g_density_sum(shape.n, shape.c, q, A, B, T, wt, S, ws, which)


def delta_mass(
    space: str,
    params: DriftParams,
    ladder=DEFAULT_LADDER,
    resolution: int | None = None,
    shape: G.GrushinShape | None = None,
    stability: float = DEFAULT_STABILITY,
    backend: str | None = None,
) -> DeltaMassEstimate:
    """Masses per eps at ``resolution`` and at twice that resolution.

    Where the mollified residual's prefactor vanishes identically (p = 2,
    |L| = 1) the masses are reported as exact zeros and flagged degenerate,
    even though the same pair sits on the excluded locus of the exponents.
    """
    if space not in ("heisenberg", "grushin"):
        raise ConfigInvalid(f"unknown space {space!r}")
    lad = _check_ladder(ladder)
    res = DEFAULT_RESOLUTION[space] if resolution is None else int(resolution)
    if res < MIN_RESOLUTION:
        raise ResolutionTooLow(f"resolution {res} < {MIN_RESOLUTION} nodes per axis")
    if not stability > 0:
        raise ConfigInvalid("stability tolerance must be positive")
    which = backend or _kernels.backend()
    shape_d = None
    if space == "heisenberg":
        degenerate = H.mollified_prefactor(params.p, params.L) == 0.0
        if not degenerate:
            H.h_exponents(params)

        def mass(eps, r):
            return _h_mass(params, eps, r, which)

    else:
        shape = shape or G.DEFAULT_SHAPE
        shape_d = shape.as_dict()
        # even n or c < 0 puts zeros of g_eps inside the box
        if shape.n % 2 == 0 or shape.c < 0:
            raise ConfigInvalid(
                "delta mass needs odd n and c > 0 so that g_eps has no zeros in the box"
            )
        degenerate = G.mollified_prefactor(params.p, params.L, shape.n) == 0.0
        if not degenerate:
            G.g_exponents(params, shape.n)

        def mass(eps, r):
            return _g_mass(shape, params, eps, r, which)

    if degenerate:
        zeros = [0j] * len(lad)
        return DeltaMassEstimate(
            space, params.p, params.L, shape_d, lad, res, zeros, list(zeros), 0.0, 0.0,
            stability, degenerate=True, backend=which,
            notes=["prefactor vanishes identically; masses are exactly zero"],
        )
    masses = [mass(e, res) for e in lad]
    fine = [mass(e, 2 * res) for e in lad]
    conv = max(abs(a - b) / max(abs(b), 1e-300) for a, b in zip(masses, fine))
    return DeltaMassEstimate(
        space, params.p, params.L, shape_d, lad, res, masses, fine,
        _max_pairwise(fine), conv, stability, backend=which,
    )
