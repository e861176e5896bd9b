"""The Heisenberg group H^1: frame, group law, candidates and drift operators.

Coordinates are ``(x1, x2, x3)``. The horizontal frame is

    X1 = d1 - (x2/2) d3,   X2 = d2 + (x1/2) d3,   X3 = d3,   [X1, X2] = X3.

Candidates are built from the conjugate pair

    v = (x1^2 + x2^2) + eps^2 - 4i x3,   w = conj(v)

and every public evaluation accepts one point (shape ``(3,)``) or a batch
(shape ``(..., 3)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import (
    BranchGuard,
    DegenerateGradient,
    ExcludedParameter,
    SingularPoint,
)
from .frame import (
    TINY,
    DriftTerms,
    Frame,
    drift_inf_terms,
    drift_p_terms,
    horizontal,
)
from .jets import DEFAULT_POLICY, BranchPolicy, Jet2, jet_log, jet_pow, principal_pow, seed_all
from .params import EXCLUSION_RADIUS, CandidateKind, DriftParams


class HPoint(NamedTuple):
    x1: float
    x2: float
    x3: float


def group_mul(p, q) -> HPoint:
    x1, x2, x3 = p
    y1, y2, y3 = q
    return HPoint(x1 + y1, x2 + y2, x3 + y3 + 0.5 * (x1 * y2 - x2 * y1))


def group_inv(p) -> HPoint:
    return HPoint(-p[0], -p[1], -p[2])


def _points(at) -> np.ndarray:
    pts = np.asarray(at, dtype=float)
    if pts.shape[-1] != 3:
        raise ValueError(f"H^1 points need 3 coordinates, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("H^1 points must be finite")
    return pts


def frame(at) -> Frame:
    pts = _points(at)
    shape = pts.shape[:-1]
    A = np.zeros(shape + (2, 3))
    A[..., 0, 0] = 1.0
    A[..., 0, 2] = -0.5 * pts[..., 1]
    A[..., 1, 1] = 1.0
    A[..., 1, 2] = 0.5 * pts[..., 0]
    dA = np.zeros(shape + (3, 2, 3))
    dA[..., 1, 0, 2] = -0.5  # d/dx2 of the x3-coefficient of X1
    dA[..., 0, 1, 2] = 0.5  # d/dx1 of the x3-coefficient of X2
    return Frame(A, dA)


def frame_apply(field_index: int, f: Callable[[tuple[Jet2, ...]], Jet2], at) -> complex:
    """Apply the frame field X_k (k = field_index) to the field ``f`` (a map from seed jets to a Jet2)."""
    pts = _points(at)
    jet = f(seed_all(pts))
    g = jet.grad
    if field_index == 1:
        out = g[..., 0] - 0.5 * pts[..., 1] * g[..., 2]
    elif field_index == 2:
        out = g[..., 1] + 0.5 * pts[..., 0] * g[..., 2]
    elif field_index == 3:
        out = g[..., 2]
    else:
        raise ValueError(f"field index must be 1, 2 or 3, got {field_index}")
    return out[()] if np.ndim(out) == 0 else out


def frame_second(i: int, j: int, f: Callable[[tuple[Jet2, ...]], Jet2], at):
    """X_i X_j f from the jet of f (indices 1 or 2)."""
    pts = _points(at)
    h = horizontal(f(seed_all(pts)), frame(pts))
    out = h.XXu[..., i - 1, j - 1]
    return out[()] if np.ndim(out) == 0 else out


# ---------------------------------------------------------------- exponents


@dataclass(frozen=True)
class HExponents:
    eta: float
    tau: float


def h_exponents(params: DriftParams, radius: float = EXCLUSION_RADIUS) -> HExponents:
    if not params.is_valid_h(radius):
        raise ExcludedParameter(
            f"L={params.L} lies on the excluded locus ±{abs(params.h_bound()):.6g} for p={params.p}"
        )
    return h_exponents_raw(params.p, params.L)


def h_exponents_raw(p: float, L: float) -> HExponents:
    """The exponent formulas with no validity check."""
    den = 4.0 * (1.0 - p)
    return HExponents((4.0 - p + 2.0 * L * (1.0 - p)) / den, (4.0 - p - 2.0 * L * (1.0 - p)) / den)


def h_infinity_exponents(L: float) -> HExponents:
    """(N, T) = ((1+2L)/4, (1-2L)/4), the formal p -> inf exponents."""
    return HExponents((1.0 + 2.0 * L) / 4.0, (1.0 - 2.0 * L) / 4.0)


def bgg2_exponents(L: float) -> HExponents:
    if abs(abs(L) - 1.0) <= EXCLUSION_RADIUS:
        raise ExcludedParameter("the p=2 drift solution needs |L| != 1")
    return HExponents((L - 1.0) / 2.0, -(L + 1.0) / 2.0)


def legacy_eta(p: float) -> float:
    return (4.0 - p) / (4.0 * (1.0 - p))


# ---------------------------------------------------------------- candidates


@dataclass(frozen=True)
class HCandidate:
    kind: CandidateKind
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
        return self.kind is CandidateKind.LEGACY and self.params.p == 4.0

    def exponents(self) -> HExponents:
        """(eta, tau) of v^eta w^tau; legacy returns (eta_p, eta_p)."""
        k = self.kind
        if k in (CandidateKind.POWER, CandidateKind.MOLLIFIED):
            return h_exponents(self.params)
        if k is CandidateKind.BGG2:
            if self.params.p != 2.0:
                raise ExcludedParameter("the BGG candidate is defined for p = 2 only")
            return bgg2_exponents(self.params.L)
        if k is CandidateKind.INFINITY:
            return h_infinity_exponents(self.params.L)
        if self.params.L != 0.0:
            raise ExcludedParameter("the legacy candidate solves the L = 0 equation only")
        e = legacy_eta(self.params.p)
        return HExponents(e, e)

    def operator_p(self) -> float:
        return 2.0 if self.kind is CandidateKind.BGG2 else self.params.p


def power(p: float, L: float, epsilon: float = 0.0) -> HCandidate:
    kind = CandidateKind.MOLLIFIED if epsilon > 0 else CandidateKind.POWER
    return HCandidate(kind, DriftParams(p, L), epsilon)


def vw_jets(pts: np.ndarray, epsilon: float = 0.0) -> tuple[Jet2, Jet2]:
    x1, x2, x3 = seed_all(pts)
    re = x1 * x1 + x2 * x2 + epsilon**2
    v = re - 4j * x3
    return v, v.conj()


def gauge_jet(pts: np.ndarray) -> Jet2:
    x1, x2, x3 = seed_all(pts)
    r = x1 * x1 + x2 * x2
    return r * r + 16.0 * (x3 * x3)


def gauge(at) -> np.ndarray:
    pts = _points(at)
    r = pts[..., 0] ** 2 + pts[..., 1] ** 2
    return r * r + 16.0 * pts[..., 2] ** 2


def _check_singular(cand: HCandidate, pts: np.ndarray) -> None:
    if cand.epsilon == 0 and np.any(np.all(pts == 0, axis=-1)):
        raise SingularPoint("evaluation at the origin of H^1")


def u_eval(cand: HCandidate, at, policy: BranchPolicy = DEFAULT_POLICY) -> Jet2:
    """Second-order jet of the candidate at ``at``."""
    pts = _points(at)
    exps = cand.exponents()
    _check_singular(cand, pts)
    if cand.kind is CandidateKind.LEGACY:
        rho = gauge_jet(pts)
        if cand.is_log_branch:
            return jet_log(rho, policy)
        return jet_pow(rho, exps.eta, policy)
    v, w = vw_jets(pts, cand.epsilon)
    return jet_pow(v, exps.eta, policy) * jet_pow(w, exps.tau, policy)


def point_errors(cand: HCandidate, pts: np.ndarray, policy: BranchPolicy = DEFAULT_POLICY):
    """Per-point error kind ('' when evaluable) for a batch of points."""
    pts = _points(pts)
    kinds = np.full(pts.shape[:-1], "", dtype=object)
    r = pts[..., 0] ** 2 + pts[..., 1] ** 2 + cand.epsilon**2
    v = r - 4j * pts[..., 2]
    kinds[v == 0] = SingularPoint.kind
    bad = (kinds == "") & (policy.violations(v) | policy.violations(np.conj(v)))
    kinds[bad] = BranchGuard.kind
    return kinds


# ---------------------------------------------------------------- operators


def _horizontal(cand: HCandidate, pts: np.ndarray, policy: BranchPolicy):
    return horizontal(u_eval(cand, pts, policy), frame(pts))


def h_drift_terms(
    cand: HCandidate, params: DriftParams, at, policy: BranchPolicy = DEFAULT_POLICY
) -> DriftTerms:
    """Summands of H_{p,L} applied to the candidate, from jet derivatives."""
    pts = _points(at)
    h = _horizontal(cand, pts, policy)
    if np.any(~(h.norm_sq > TINY)):
        raise DegenerateGradient("|grad_0 u|^2 vanishes; the (p-4) power is undefined")
    return drift_p_terms(h, params.p, params.L)


def h_drift_op(cand: HCandidate, params: DriftParams, at, policy: BranchPolicy = DEFAULT_POLICY):
    """Complex residual Delta_p u + iL X3(|grad_0 u|^{p-2} u)."""
    out = h_drift_terms(cand, params, at, policy).residual
    return out[()] if np.ndim(out) == 0 else out


def h_infinity_terms(cand: HCandidate, L: float, at, policy: BranchPolicy = DEFAULT_POLICY):
    pts = _points(at)
    return drift_inf_terms(_horizontal(cand, pts, policy), L)


def h_infinity_op(cand: HCandidate, L: float, at, policy: BranchPolicy = DEFAULT_POLICY):
    """Delta_inf u + iL X3(|grad_0 u|^2) u."""
    out = h_infinity_terms(cand, L, at, policy).residual
    return out[()] if np.ndim(out) == 0 else out


def norm_grad_sq_ad(cand: HCandidate, at, policy: BranchPolicy = DEFAULT_POLICY):
    out = _horizontal(cand, _points(at), policy).norm_sq
    return out[()] if np.ndim(out) == 0 else out


# ---------------------------------------------------------------- closed forms
#
# Direct transcriptions of the displayed derivative formulas.  Each takes the
# point batch and (eta, tau); ``epsilon`` shifts the real part of v and w.


def _vw(pts, epsilon=0.0):
    x1, x2, x3 = pts[..., 0], pts[..., 1], pts[..., 2]
    r = x1**2 + x2**2
    v = r + epsilon**2 - 4j * x3
    return x1, x2, x3, r, v, np.conj(v)


def _pw(z, s):
    return principal_pow(z, s)


def closed_x1_u(at, e, t, epsilon=0.0):
    x1, x2, x3, r, v, w = _vw(_points(at), epsilon)
    return 2 * _pw(v, e - 1) * _pw(w, t - 1) * ((e * w + t * v) * x1 + (e * w - t * v) * 1j * x2)


def closed_x2_u(at, e, t, epsilon=0.0):
    x1, x2, x3, r, v, w = _vw(_points(at), epsilon)
    return 2 * _pw(v, e - 1) * _pw(w, t - 1) * ((e * w + t * v) * x2 - (e * w - t * v) * 1j * x1)


def closed_norm_grad_sq(at, e, t):
    x1, x2, x3, r, v, w = _vw(_points(at))
    return 8 * (e * e + t * t) * _pw(v, e + t - 1) * _pw(w, e + t - 1) * r


def h_norm_grad_sq(cand: HCandidate, at):
    """|grad_0 u|^2 through the closed form 8(eta^2+tau^2)(vw)^{eta+tau-1}(x1^2+x2^2)."""
    pts = _points(at)
    _check_singular(cand, pts)
    ex = cand.exponents()
    out = closed_norm_grad_sq(pts, ex.eta, ex.tau)
    return out[()] if np.ndim(out) == 0 else out


def _x1x1_parts(at, e, t):
    x1, x2, x3, r, v, w = _vw(_points(at))
    A = e * w + t * v
    B = e * w - t * v
    C1 = (e - 1) * w + (t - 1) * v
    C2 = -(e - 1) * w + (t - 1) * v
    pre = 2 * _pw(v, e - 2) * _pw(w, t - 2)
    tail = v * w * (2 * r * (t + e) + A)
    return x1, x2, A, B, C1, C2, pre, tail


def closed_x1x1_u(at, e, t):
    x1, x2, A, B, C1, C2, pre, tail = _x1x1_parts(at, e, t)
    return pre * (
        2 * (A * x1**2 + B * 1j * x1 * x2) * C1 - 2j * (A * x1 * x2 + B * 1j * x2**2) * C2 + tail
    )


def printed_x1x1_u(at, e, t):
    """X1X1u exactly as typeset (contains sign and index slips)."""
    x1, x2, A, B, C1, C2, pre, tail = _x1x1_parts(at, e, t)
    return pre * (
        2 * (A * x1**2 + (-A) * 1j * x1 * x2) * C1 + 2j * (A * x2**2 + B * 1j * x2**2) * C2 + tail
    )


def closed_x2x2_u(at, e, t):
    x1, x2, A, B, C1, C2, pre, tail = _x1x1_parts(at, e, t)
    Bm = -B  # (-eta w + tau v)
    return pre * (
        2 * (A * x2**2 + Bm * 1j * x1 * x2) * C1 + 2j * (A * x1 * x2 + Bm * 1j * x1**2) * C2 + tail
    )


def _xnorm_pre(at, e, t):
    x1, x2, x3, r, v, w = _vw(_points(at))
    s = e + t
    return x1, x2, x3, r, v, w, s, 16 * (e * e + t * t) * _pw(v, s - 2) * _pw(w, s - 2)


def closed_x1_norm(at, e, t):
    x1, x2, x3, r, v, w, s, K = _xnorm_pre(at, e, t)
    return K * (v * w * x1 + 2 * (s - 1) * r * (r * x1 - 4 * x2 * x3))


def closed_x2_norm(at, e, t):
    x1, x2, x3, r, v, w, s, K = _xnorm_pre(at, e, t)
    return K * (v * w * x2 + 2 * (s - 1) * r * (r * x2 + 4 * x1 * x3))


def printed_x1_norm(at, e, t):
    x1, x2, x3, r, v, w, s, K = _xnorm_pre(at, e, t)
    return K * (v * w * x1 + 2 * (s - 1) * r**2 * (x1 - 4 * x2 * x3))


def printed_x2_norm(at, e, t):
    x1, x2, x3, r, v, w, s, K = _xnorm_pre(at, e, t)
    return K * (v * w * x2 + 2 * (s - 1) * r**2 * (x2 - 4 * x1 * x3))


def _sum_pre(at, e, t, coef):
    x1, x2, x3, r, v, w = _vw(_points(at))
    return x3, r, v, w, coef * (e * e + t * t) * _pw(v, 2 * e + t - 3) * _pw(w, e + 2 * t - 3)


def closed_sum_xnorm_xu(at, e, t):
    """sum_j X_j|grad_0 u|^2 X_j u."""
    x3, r, v, w, K = _sum_pre(at, e, t, 32)
    A, B, s = e * w + t * v, e * w - t * v, e + t
    return K * (A * v * w * r + 2 * (s - 1) * r**2 * (A * r - 4 * B * 1j * x3))


def printed_sum_xnorm_xu(at, e, t):
    x3, r, v, w, K = _sum_pre(at, e, t, 32)
    A, B, s = e * w + t * v, e * w - t * v, e + t
    return K * (A * v * w * r + 2 * (s - 1) * r**2 * (A * r**2 - 4 * B * 1j * x3))


def closed_norm_sum_xxu(at, e, t):
    """|grad_0 u|^2 (X1X1u + X2X2u)."""
    x3, r, v, w, K = _sum_pre(at, e, t, 16)
    A, B = e * w + t * v, e * w - t * v
    C1 = (e - 1) * w + (t - 1) * v
    C2 = -(e - 1) * w + (t - 1) * v
    return K * r * (2 * v * w * A + 4 * v * w * (e + t) * r + 2 * C1 * A * r + 2 * C2 * B * r)


def closed_plap(at, p, L):
    """Delta_p u_{p,L}; the real factor is (8(eta^2+tau^2))^{(p-2)/2}."""
    ex = h_exponents_raw(p, L)
    e, t = ex.eta, ex.tau
    x1, x2, x3, r, v, w = _vw(_points(at))
    K = (8 * (e * e + t * t)) ** ((p - 2) / 2)
    return (
        2 * L * K
        * _pw(v, (p * e + (p - 2) * t - p) / 2)
        * _pw(w, ((p - 2) * e + p * t - p) / 2)
        * r ** ((p - 2) / 2)
        * (-2 * L * r + p * 4j * x3)
    )


def closed_drift(at, p, L):
    """iL X3(|grad_0 u|^{p-2} u), equal to minus :func:`closed_plap`."""
    return -closed_plap(at, p, L)


def h_mollified_residual_closed(params: DriftParams, epsilon: float, at):
    """Closed form of H_{p,L} applied to the mollified candidate."""
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    ex = h_exponents(params)
    out = mollified_closed_raw(_points(at), params.p, params.L, ex.eta, ex.tau, epsilon)
    return out[()] if np.ndim(out) == 0 else out


def mollified_prefactor(p: float, L: float) -> float:
    return p * (4 - p) / (4 * (1 - p)) + L * L


def mollified_closed_raw(pts, p, L, e, t, epsilon):
    x1, x2, x3, r, v, w = _vw(pts, epsilon)
    return (
        2 ** ((3 * p - 2) / 2)
        * epsilon**2
        * mollified_prefactor(p, L)
        * (e * e + t * t) ** ((p - 2) / 2)
        * r ** ((p - 2) / 2)
        * _pw(v, (e * p + t * (p - 2) - p) / 2)
        * _pw(w, (e * (p - 2) + t * p - p) / 2)
    )


def closed_inf_laplacian(at, L):
    ex = h_infinity_exponents(L)
    N, T = ex.eta, ex.tau
    x1, x2, x3, r, v, w = _vw(_points(at))
    return 128j * L * (N * N + T * T) * r * x3 * _pw(v, 2 * N + T - 2) * _pw(w, N + 2 * T - 2)


def closed_inf_drift(at, L):
    return -closed_inf_laplacian(at, L)


# ---------------------------------------------------------------- sampling


def sample_shell(
    count: int,
    shell: tuple[float, float],
    rng: np.random.Generator,
    axis_margin: float = 1e-6,
) -> np.ndarray:
    """Points with gauge (x1^2+x2^2)^2 + 16 x3^2 uniform in ``shell``.

    Points inside the cylinder x1^2 + x2^2 < axis_margin are rejected.
    """
    lo, hi = shell
    out = np.empty((0, 3))
    while len(out) < count:
        m = 2 * (count - len(out)) + 8
        rho = rng.uniform(lo, hi, m)
        phi = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, m)
        psi = rng.uniform(0.0, 2 * math.pi, m)
        mod = np.sqrt(rho)
        r = mod * np.cos(phi)
        x3 = -mod * np.sin(phi) / 4.0
        sr = np.sqrt(np.maximum(r, 0.0))
        pts = np.stack([sr * np.cos(psi), sr * np.sin(psi), x3], axis=-1)
        keep = pts[:, 0] ** 2 + pts[:, 1] ** 2 >= axis_margin
        out = np.concatenate([out, pts[keep]])
    return out[:count]
