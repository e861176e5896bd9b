"""Grushin-type planes G_n with their candidates and drift operators.

Coordinates are ``(y1, y2)`` and the frame is

    Y1 = d/dy1,   Y2 = c (y1 - a)^n d/dy2,   [Y1, Y2] = c n (y1 - a)^{n-1} d/dy2,

degenerate on the line y1 = a. Candidates use the conjugate pair

    g = c (y1-a)^{n+1} + eps^2 + i (n+1)(y2-b),   h = conj(g).

For ``c (y1-a)^{n+1} < 0`` the bases live in the left half-plane, where the
principal branch is guarded against the negative real axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    BranchGuard,
    ConfigInvalid,
    DegenerateGradient,
    DegenerateLine,
    ExcludedParameter,
    SingularPoint,
)
from .frame import TINY, DriftTerms, Frame, drift_inf_terms, drift_p_terms, horizontal
from .jets import DEFAULT_POLICY, BranchPolicy, Jet2, jet_log, jet_pow, principal_pow, seed_all
from .params import EXCLUSION_RADIUS, CandidateKind, DriftParams

# hard floor on |y1 - a| for operator evaluation
LINE_FLOOR = 1e-6


class GPoint(NamedTuple):
    y1: float
    y2: float


@dataclass(frozen=True)
class GrushinShape:
    a: float = 0.0
    b: float = 0.0
    c: float = 1.0
    n: int = 1

    def __post_init__(self):
        if self.c == 0 or not math.isfinite(self.c):
            raise ConfigInvalid("Grushin shape needs a finite c != 0")
        if int(self.n) != self.n or self.n < 1:
            raise ConfigInvalid(f"Grushin shape needs an integer n >= 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "n": self.n}


DEFAULT_SHAPE = GrushinShape()


def _points(at) -> np.ndarray:
    pts = np.asarray(at, dtype=float)
    if pts.shape[-1] != 2:
        raise ValueError(f"G_n points need 2 coordinates, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("G_n points must be finite")
    return pts


def frame(at, shape: GrushinShape) -> Frame:
    pts = _points(at)
    t = pts[..., 0] - shape.a
    bshape = pts.shape[:-1]
    A = np.zeros(bshape + (2, 2))
    A[..., 0, 0] = 1.0
    A[..., 1, 1] = shape.c * t**shape.n
    dA = np.zeros(bshape + (2, 2, 2))
    dA[..., 0, 1, 1] = shape.c * shape.n * t ** (shape.n - 1)
    return Frame(A, dA)


def g_frame_apply(field_index: int, f, at, shape: GrushinShape):
    """Apply Y1 or Y2 to ``f`` (a map from seed jets to a Jet2)."""
    pts = _points(at)
    g = f(seed_all(pts)).grad
    if field_index == 1:
        out = g[..., 0]
    elif field_index == 2:
        out = shape.c * (pts[..., 0] - shape.a) ** shape.n * g[..., 1]
    else:
        raise ValueError(f"field index must be 1 or 2, got {field_index}")
    return out[()] if np.ndim(out) == 0 else out


def g_frame_second(i: int, j: int, f, at, shape: GrushinShape):
    pts = _points(at)
    h = horizontal(f(seed_all(pts)), frame(pts, shape))
    out = h.XXu[..., i - 1, j - 1]
    return out[()] if np.ndim(out) == 0 else out


# ---------------------------------------------------------------- exponents


@dataclass(frozen=True)
class GExponents:
    alpha: float
    beta: float


def g_exponents(params: DriftParams, n: int, radius: float = EXCLUSION_RADIUS) -> GExponents:
    if not params.is_valid_g(n, radius):
        raise ExcludedParameter(
            f"L={params.L} lies on the excluded locus ±{abs(params.g_bound(n)):.6g} "
            f"for p={params.p}, n={n}"
        )
    return g_exponents_raw(params.p, params.L, n)


def g_exponents_raw(p: float, L: float, n: int) -> GExponents:
    den = 2.0 * (n + 1) * (1.0 - p)
    return GExponents(
        (n + 2.0 - p - L * n * (1.0 - p)) / den, (n + 2.0 - p + L * n * (1.0 - p)) / den
    )


def g_infinity_exponents(L: float, n: int) -> GExponents:
    """(A, B) = ((1-nL), (1+nL)) / (2(n+1))."""
    return GExponents((1.0 - n * L) / (2.0 * (n + 1)), (1.0 + n * L) / (2.0 * (n + 1)))


def bgg2_exponents(L: float, n: int) -> GExponents:
    if abs(abs(L) - 1.0) <= EXCLUSION_RADIUS:
        raise ExcludedParameter("the p=2 drift solution needs |L| != 1")
    k = -n / (2.0 * n + 2.0)
    return GExponents(k * (1.0 + L), k * (1.0 - L))


def legacy_tau(p: float, n: int) -> float:
    return (n + 2.0 - p) / ((2.0 * n + 2.0) * (1.0 - p))


# ---------------------------------------------------------------- candidates


@dataclass(frozen=True)
class GCandidate:
    kind: CandidateKind
    shape: GrushinShape
    params: DriftParams
    epsilon: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", CandidateKind(self.kind))
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.kind is CandidateKind.MOLLIFIED and not self.epsilon > 0:
            raise ValueError("mollified candidate needs epsilon > 0")
        if self.kind is not CandidateKind.MOLLIFIED and self.epsilon != 0:
            raise ValueError("epsilon is only used by the mollified candidate")

    @property
    def is_log_branch(self) -> bool:
        return self.kind is CandidateKind.LEGACY and self.params.p == self.shape.n + 2

    def exponents(self) -> GExponents:
        k, n = self.kind, self.shape.n
        if k in (CandidateKind.POWER, CandidateKind.MOLLIFIED):
            return g_exponents(self.params, n)
        if k is CandidateKind.BGG2:
            if self.params.p != 2.0:
                raise ExcludedParameter("the BGG candidate is defined for p = 2 only")
            return bgg2_exponents(self.params.L, n)
        if k is CandidateKind.INFINITY:
            return g_infinity_exponents(self.params.L, n)
        if self.params.L != 0.0:
            raise ExcludedParameter("the legacy candidate solves the L = 0 equation only")
        t = legacy_tau(self.params.p, n)
        return GExponents(t, t)


def power(p: float, L: float, shape: GrushinShape = DEFAULT_SHAPE, epsilon: float = 0.0):
    kind = CandidateKind.MOLLIFIED if epsilon > 0 else CandidateKind.POWER
    return GCandidate(kind, shape, DriftParams(p, L), epsilon)


def _ipow(j: Jet2, k: int) -> Jet2:
    out = j
    for _ in range(k - 1):
        out = out * j
    return out


def gh_jets(pts: np.ndarray, shape: GrushinShape, epsilon: float = 0.0):
    y1, y2 = seed_all(pts)
    t = y1 - shape.a
    g = shape.c * _ipow(t, shape.n + 1) + epsilon**2 + 1j * (shape.n + 1) * (y2 - shape.b)
    return g, g.conj()


def gauge_jet(pts: np.ndarray, shape: GrushinShape) -> Jet2:
    y1, y2 = seed_all(pts)
    t = y1 - shape.a
    s = y2 - shape.b
    return shape.c**2 * _ipow(t, 2 * shape.n + 2) + (shape.n + 1) ** 2 * (s * s)


def gauge(at, shape: GrushinShape) -> np.ndarray:
    pts = _points(at)
    t = pts[..., 0] - shape.a
    s = pts[..., 1] - shape.b
    return shape.c**2 * t ** (2 * shape.n + 2) + (shape.n + 1) ** 2 * s**2


def _g_values(pts: np.ndarray, shape: GrushinShape, epsilon: float = 0.0) -> np.ndarray:
    t = pts[..., 0] - shape.a
    s = pts[..., 1] - shape.b
    return shape.c * t ** (shape.n + 1) + epsilon**2 + 1j * (shape.n + 1) * s


def f_eval(cand: GCandidate, at, policy: BranchPolicy = DEFAULT_POLICY) -> Jet2:
    pts = _points(at)
    ex = cand.exponents()
    shape = cand.shape
    if cand.kind is CandidateKind.LEGACY:
        if np.any(gauge(pts, shape) == 0):
            raise SingularPoint("evaluation at the singular point (a, b)")
        rho = gauge_jet(pts, shape)
        if cand.is_log_branch:
            return jet_log(rho, policy)
        return jet_pow(rho, ex.alpha, policy)
    if np.any(_g_values(pts, shape, cand.epsilon) == 0):
        raise SingularPoint("base g vanishes at the evaluation point")
    g, h = gh_jets(pts, shape, cand.epsilon)
    return jet_pow(g, ex.alpha, policy) * jet_pow(h, ex.beta, policy)


def point_errors(
    cand: GCandidate,
    pts: np.ndarray,
    policy: BranchPolicy = DEFAULT_POLICY,
    line_floor: float = LINE_FLOOR,
):
    """Per-point error kind ('' when evaluable), in taxonomy priority order."""
    pts = _points(pts)
    kinds = np.full(pts.shape[:-1], "", dtype=object)
    g = _g_values(pts, cand.shape, cand.epsilon)
    kinds[g == 0] = SingularPoint.kind
    line = (kinds == "") & (np.abs(pts[..., 0] - cand.shape.a) < line_floor)
    kinds[line] = DegenerateLine.kind
    if cand.kind is not CandidateKind.LEGACY:
        cut = (kinds == "") & (policy.violations(g) | policy.violations(np.conj(g)))
        kinds[cut] = BranchGuard.kind
    return kinds


# ---------------------------------------------------------------- operators


def _horizontal(cand: GCandidate, pts: np.ndarray, policy: BranchPolicy, line_floor: float):
    if np.any(np.abs(pts[..., 0] - cand.shape.a) < line_floor):
        raise DegenerateLine(f"|y1 - a| < {line_floor:g}: the frame degenerates")
    return horizontal(f_eval(cand, pts, policy), frame(pts, cand.shape))


def g_drift_terms(
    cand: GCandidate,
    params: DriftParams,
    at,
    policy: BranchPolicy = DEFAULT_POLICY,
    line_floor: float = LINE_FLOOR,
) -> DriftTerms:
    pts = _points(at)
    h = _horizontal(cand, pts, policy, line_floor)
    if np.any(~(h.norm_sq > TINY)):
        raise DegenerateGradient("|grad_0 f|^2 vanishes; the (p-4) power is undefined")
    return drift_p_terms(h, params.p, params.L)


def g_drift_op(cand: GCandidate, params: DriftParams, at, policy: BranchPolicy = DEFAULT_POLICY):
    """Complex residual Delta_p f + iL [Y1,Y2](|grad_0 f|^{p-2} f)."""
    out = g_drift_terms(cand, params, at, policy).residual
    return out[()] if np.ndim(out) == 0 else out


def g_infinity_terms(cand: GCandidate, L: float, at, policy: BranchPolicy = DEFAULT_POLICY):
    pts = _points(at)
    return drift_inf_terms(_horizontal(cand, pts, policy, LINE_FLOOR), L)


def g_infinity_op(cand: GCandidate, L: float, at, policy: BranchPolicy = DEFAULT_POLICY):
    out = g_infinity_terms(cand, L, at, policy).residual
    return out[()] if np.ndim(out) == 0 else out


# ---------------------------------------------------------------- closed forms


def _parts(at, shape: GrushinShape, epsilon: float = 0.0):
    pts = _points(at)
    t = pts[..., 0] - shape.a
    s = pts[..., 1] - shape.b
    g = _g_values(pts, shape, epsilon)
    return t, s, g, np.conj(g), shape.c, shape.n


_pw = principal_pow


def closed_y1_f(at, shape, al, be):
    t, s, g, h, c, n = _parts(at, shape)
    return c * (n + 1) * t**n * _pw(g, al - 1) * _pw(h, be - 1) * (al * h + be * g)


def closed_y2_f(at, shape, al, be):
    t, s, g, h, c, n = _parts(at, shape)
    return 1j * c * (n + 1) * t**n * _pw(g, al - 1) * _pw(h, be - 1) * (al * h - be * g)


def closed_norm_grad_sq(at, shape, al, be):
    t, s, g, h, c, n = _parts(at, shape)
    return (
        2 * c**2 * (n + 1) ** 2 * t ** (2 * n)
        * _pw(g, al + be - 1) * _pw(h, al + be - 1) * (al * al + be * be)
    )


def g_norm_grad_sq(cand: GCandidate, at):
    ex = cand.exponents()
    out = closed_norm_grad_sq(at, cand.shape, ex.alpha, ex.beta)
    return out[()] if np.ndim(out) == 0 else out


def closed_y1y1_f(at, shape, al, be):
    t, s, g, h, c, n = _parts(at, shape)
    P = al * h + be * g
    return (
        c * (n + 1) * t ** (n - 1) * _pw(g, al - 2) * _pw(h, be - 2)
        * (
            n * g * h * P
            + c * (n + 1) * t ** (n + 1)
            * (P * ((al - 1) * h + (be - 1) * g) + g * h * (al + be))
        )
    )


def closed_y2y2_f(at, shape, al, be):
    t, s, g, h, c, n = _parts(at, shape)
    Q = al * h - be * g
    return (
        -(c**2) * (n + 1) ** 2 * t ** (2 * n) * _pw(g, al - 2) * _pw(h, be - 2)
        * (Q * ((al - 1) * h - (be - 1) * g) - g * h * (al + be))
    )


def closed_y1_norm(at, shape, al, be):
    t, s, g, h, c, n = _parts(at, shape)
    k = al + be
    return (
        4 * c**2 * (n + 1) ** 2 * (al * al + be * be) * t ** (2 * n - 1)
        * _pw(g, k - 2) * _pw(h, k - 2)
        * (n * g * h + c**2 * (n + 1) * (k - 1) * t ** (2 * n + 2))
    )


def closed_y2_norm(at, shape, al, be):
    t, s, g, h, c, n = _parts(at, shape)
    k = al + be
    return (
        4 * c**3 * (n + 1) ** 4 * (al * al + be * be) * t ** (3 * n) * s
        * (k - 1) * _pw(g, k - 2) * _pw(h, k - 2)
    )


def closed_sum_ynorm_yf(at, shape, al, be):
    t, s, g, h, c, n = _parts(at, shape)
    k = al + be
    return (
        4 * c**3 * (n + 1) ** 3 * (al * al + be * be) * t ** (3 * n - 1)
        * _pw(g, 2 * al + be - 3) * _pw(h, al + 2 * be - 3)
        * (
            (al * h + be * g) * (n * g * h + c**2 * (n + 1) * (k - 1) * t ** (2 * n + 2))
            + 1j * c * (n + 1) ** 2 * t ** (n + 1) * s * (k - 1) * (al * h - be * g)
        )
    )


def closed_norm_sum_yyf(at, shape, al, be):
    t, s, g, h, c, n = _parts(at, shape)
    return (
        2 * c**3 * (n + 1) ** 3 * (al * al + be * be) * t ** (3 * n - 1)
        * _pw(g, 2 * al + be - 3) * _pw(h, al + 2 * be - 3)
        * (n * g * h * (al * h + be * g) + 4 * c * (n + 1) * t ** (n + 1) * g * h * (al * be))
    )


def _signed_powers(t, c, n, p):
    # real reading of c^{p-1} and (y1-a)^{n(p-1)-1} valid for either sign
    return abs(c) ** (p - 2) * c, np.abs(t) ** (n * (p - 2)) * t ** (n - 1)


def closed_plap(at, shape, p, L):
    """Delta_p f_{p,L} in closed form."""
    ex = g_exponents_raw(p, L, shape.n)
    al, be = ex.alpha, ex.beta
    t, s, g, h, c, n = _parts(at, shape)
    cp, tp = _signed_powers(t, c, n, p)
    return (
        -L * 2 ** ((p - 2) / 2) * cp * n**2 * (n + 1) ** (p - 2) * tp
        * (al * al + be * be) ** ((p - 2) / 2)
        * _pw(g, (al * p + be * (p - 2) - p) / 2) * _pw(h, (al * (p - 2) + be * p - p) / 2)
        * (L * c * t ** (n + 1) + 1j * (1 - p) * (n + 1) * s)
    )


def closed_drift(at, shape, p, L):
    return -closed_plap(at, shape, p, L)


def mollified_prefactor(p: float, L: float, n: int) -> float:
    return (n + 2 - p) - n * L * L


def g_mollified_residual_closed(shape: GrushinShape, params: DriftParams, epsilon: float, at):
    """Closed form of G_{p,L} applied to the mollified candidate."""
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    ex = g_exponents(params, shape.n)
    out = mollified_closed_raw(_points(at), shape, params.p, params.L, ex.alpha, ex.beta, epsilon)
    return out[()] if np.ndim(out) == 0 else out


def mollified_closed_raw(pts, shape, p, L, al, be, epsilon):
    t, s, g, h, c, n = _parts(pts, shape, epsilon)
    cp, tp = _signed_powers(t, c, n, p)
    return (
        -(2 ** ((p - 2) / 2)) * epsilon**2 * mollified_prefactor(p, L, n)
        * cp * n * (n + 1) ** (p - 2) * (al * al + be * be) ** ((p - 2) / 2) * tp
        * _pw(g, (al * p + be * (p - 2) - p) / 2) * _pw(h, (al * (p - 2) + be * p - p) / 2)
    )


def closed_inf_laplacian(at, shape, L):
    ex = g_infinity_exponents(L, shape.n)
    A, B = ex.alpha, ex.beta
    t, s, g, h, c, n = _parts(at, shape)
    return (
        4j * L * c**3 * (n + 1) ** 3 * n**2 * (A * A + B * B) * t ** (3 * n - 1) * s
        * _pw(g, 2 * A + B - 2) * _pw(h, A + 2 * B - 2)
    )


def closed_inf_drift(at, shape, L):
    return -closed_inf_laplacian(at, shape, L)


# ---------------------------------------------------------------- sampling


def sample_shell(
    count: int,
    shell: tuple[float, float],
    shape: GrushinShape,
    rng: np.random.Generator,
    line_margin: float = 0.1,
    positive_only: bool = True,
) -> np.ndarray:
    """Points with gauge c^2 t^{2n+2} + (n+1)^2 s^2 uniform in ``shell``.

    ``positive_only`` keeps c (y1-a)^{n+1} > 0 whenever some sign of y1 - a
    allows it; for even n+1 with c < 0 the left half-plane is the only option.
    """
    lo, hi = shell
    n, c = shape.n, shape.c
    out = np.empty((0, 2))
    while len(out) < count:
        m = 2 * (count - len(out)) + 8
        rho = rng.uniform(lo, hi, m)
        sign_t = rng.choice([-1.0, 1.0], m)
        if positive_only:
            if (n + 1) % 2 == 1:
                sign_t = np.full(m, math.copysign(1.0, c))
        half = np.abs(rng.uniform(0.0, 0.5 * math.pi, m)) * rng.choice([-1.0, 1.0], m)
        sign_g = math.copysign(1.0, c) * sign_t ** (n + 1)
        phi = np.where(sign_g > 0, half, math.pi + half)
        mod = np.sqrt(rho)
        tabs = (mod * np.abs(np.cos(phi)) / abs(c)) ** (1.0 / (n + 1))
        s = mod * np.sin(phi) / (n + 1)
        pts = np.stack([shape.a + sign_t * tabs, shape.b + s], axis=-1)
        keep = tabs >= line_margin
        out = np.concatenate([out, pts[keep]])
    return out[:count]
