"""Numerical check of the p -> inf / L -> 0 commuting squares.

Corners of the square are u_{p,L}, u_{inf,L}, u_{p,0} and u_{inf,0} (or the
Grushin f's). Four edges are checked on a point cloud:

(i)   u_{p,L} -> u_{inf,L} as p climbs the ladder, monotonically, at rate 1/p
(ii)  u_{p,L} -> u_{p,0} as L descends its ladder, monotonically, at rate L
(iii) the operator residuals stay below ``tol`` at every ladder node
(iv)  the two iterated limits, each extrapolated from the (p, L) grid by
      Neville's scheme, agree with each other and with u_{inf,0}

plus the exponent limit at p = 1e6.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import grushin as G
from .. import heisenberg as H
from ..errors import ConfigInvalid, ExcludedParameter
from ..params import EXCLUSION_RADIUS, CandidateKind, DriftParams

DEFAULT_P_LADDER = (10.0, 100.0, 1e3, 1e4)
DEFAULT_L_LADDER = (0.16, 0.08, 0.04, 0.02, 0.01)
EXPONENT_P = 1e6
EXPONENT_TOL = 1e-5
CORNER_TOL = 1e-6
# observed convergence orders must land in this band around 1
ORDER_BAND = (0.8, 1.2)


@dataclass
class DiagramReport:
    space: str
    shape: dict | None
    p_ladder: list[float]
    L_ladder: list[float]
    points: int
    tol: float
    p_errors: list[float]  # edge (i): max_L max_x |u_{p,L} - u_{inf,L}| / |u_{inf,L}|
    p_orders: list[float]
    L_errors: list[float]  # edge (ii)
    L_orders: list[float]
    max_residual: float  # edge (iii)
    corner_gap: float  # edge (iv): |path A - path B| / |u_{inf,0}|
    corner_error: float  # max of both paths against u_{inf,0}
    exponent_error: float
    edges: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.edges.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = self.passed
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DiagramReport":
        return cls(**{k: v for k, v in d.items() if k != "pass"})


def neville(nodes, values, x: float = 0.0):
    """Value at ``x`` of the interpolating polynomial through (nodes, values).

    ``values`` may carry trailing axes; they are extrapolated elementwise.
    """
    h = [float(t) for t in nodes]
    P = [np.asarray(v, dtype=complex) for v in values]
    n = len(h)
    for m in range(1, n):
        P = [
            ((x - h[i + m]) * P[i] + (h[i] - x) * P[i + 1]) / (h[i] - h[i + m])
            for i in range(n - m)
        ]
    return P[0]


def _orders(errors, nodes) -> list[float]:
    out = []
    for (e0, e1), (h0, h1) in zip(zip(errors, errors[1:]), zip(nodes, nodes[1:])):
        if e0 > 0 and e1 > 0:
            out.append(math.log(e0 / e1) / math.log(h0 / h1))
        else:
            out.append(float("nan"))
    return out


def _monotone_order_ok(errors, orders) -> bool:
    lo, hi = ORDER_BAND
    return all(b < a for a, b in zip(errors, errors[1:])) and all(lo <= o <= hi for o in orders)


class _Ops:
    def __init__(self, space: str, shape: G.GrushinShape | None):
        self.space, self.shape = space, shape

    def bound(self, p: float) -> float:
        prm = DriftParams(p, 0.0)
        return abs(prm.h_bound() if self.space == "heisenberg" else prm.g_bound(self.shape.n))

    def candidate(self, kind, p, L):
        prm = DriftParams(p, L)
        if self.space == "heisenberg":
            return H.HCandidate(kind, prm), prm
        return G.GCandidate(kind, self.shape, prm), prm

    def values(self, kind, p, L, pts):
        cand, _ = self.candidate(kind, p, L)
        if self.space == "heisenberg":
            return H.u_eval(cand, pts).value
        return G.f_eval(cand, pts).value

    def residual(self, kind, p, L, pts) -> float:
        cand, prm = self.candidate(kind, p, L)
        if self.space == "heisenberg":
            t = (
                H.h_infinity_terms(cand, L, pts)
                if kind is CandidateKind.INFINITY
                else H.h_drift_terms(cand, prm, pts)
            )
        else:
            t = (
                G.g_infinity_terms(cand, L, pts)
                if kind is CandidateKind.INFINITY
                else G.g_drift_terms(cand, prm, pts)
            )
        return float(np.max(t.relative_residual()))

    def exponent_error(self, L) -> float:
        if self.space == "heisenberg":
            a = H.h_exponents_raw(EXPONENT_P, L)
            b = H.h_infinity_exponents(L)
            return max(abs(a.eta - b.eta), abs(a.tau - b.tau))
        a = G.g_exponents_raw(EXPONENT_P, L, self.shape.n)
        b = G.g_infinity_exponents(L, self.shape.n)
        return max(abs(a.alpha - b.alpha), abs(a.beta - b.beta))


def _check_ladders(ops: _Ops, p_ladder, L_ladder):
    ps = [float(p) for p in p_ladder]
    Ls = [float(L) for L in L_ladder]
    if len(ps) < 2 or len(Ls) < 2:
        raise ConfigInvalid("both ladders need at least two rungs")
    if any(not p > 1 for p in ps) or any(b <= a for a, b in zip(ps, ps[1:])):
        raise ConfigInvalid("p ladder must be strictly increasing with p > 1")
    if any(L == 0 for L in Ls) or any(abs(b) >= abs(a) for a, b in zip(Ls, Ls[1:])):
        raise ConfigInvalid("L ladder must be nonzero and strictly decreasing in |L|")
    if any((a > 0) != (b > 0) for a, b in zip(Ls, Ls[1:])):
        raise ConfigInvalid("L ladder must approach 0 from one side")
    top = max(abs(L) for L in Ls)
    for p in ps:
        # every rung and the path L -> 0 must stay clear of the excluded locus
        if ops.bound(p) <= top + EXCLUSION_RADIUS:
            raise ExcludedParameter(
                f"L ladder up to {top:g} crosses the excluded value ±{ops.bound(p):.6g} at p={p:g}"
            )
    return ps, Ls


def diagram_check(
    space: str,
    pts: np.ndarray,
    p_ladder=DEFAULT_P_LADDER,
    L_ladder=DEFAULT_L_LADDER,
    shape: G.GrushinShape | None = None,
    tol: float = 1e-8,
    corner_tol: float = CORNER_TOL,
) -> DiagramReport:
    if space not in ("heisenberg", "grushin"):
        raise ConfigInvalid(f"unknown space {space!r}")
    if space == "grushin":
        shape = shape or G.DEFAULT_SHAPE
    ops = _Ops(space, shape)
    ps, Ls = _check_ladders(ops, p_ladder, L_ladder)
    pts = np.asarray(pts, dtype=float)
    P, INF = CandidateKind.POWER, CandidateKind.INFINITY

    # values on the full grid including the L = 0 column and the p = inf row
    grid = np.array([[ops.values(P, p, L, pts) for L in Ls] for p in ps])  # (p, L, x)
    col0 = np.array([ops.values(P, p, 0.0, pts) for p in ps])
    row_inf = np.array([ops.values(INF, 2.0, L, pts) for L in Ls])
    corner = ops.values(INF, 2.0, 0.0, pts)

    def rel(a, b):
        return float(np.max(np.abs(a - b) / np.abs(b)))

    # (i) p -> inf at fixed L (including L = 0)
    p_err = [
        max([rel(grid[i, j], row_inf[j]) for j in range(len(Ls))] + [rel(col0[i], corner)])
        for i in range(len(ps))
    ]
    p_ord = _orders(p_err, [1.0 / p for p in ps])
    # (ii) L -> 0 at fixed p (including p = inf)
    L_err = [
        max([rel(grid[i, j], col0[i]) for i in range(len(ps))] + [rel(row_inf[j], corner)])
        for j in range(len(Ls))
    ]
    L_ord = _orders(L_err, [abs(L) for L in Ls])

    # (iii) residuals at every node of both paths
    resid = [ops.residual(P, p, L, pts) for p in ps for L in list(Ls) + [0.0]]
    resid += [ops.residual(INF, 2.0, L, pts) for L in list(Ls) + [0.0]]
    max_res = max(resid)

    # (iv) iterated limits from the grid alone
    hp = [1.0 / p for p in ps]
    path_a = neville(hp, [neville(Ls, grid[i]) for i in range(len(ps))])  # L first
    path_b = neville(Ls, [neville(hp, grid[:, j]) for j in range(len(Ls))])  # p first
    gap = rel(path_a, path_b)
    corner_err = max(rel(path_a, corner), rel(path_b, corner))

    exp_err = max(ops.exponent_error(L) for L in list(Ls) + [0.0])
    edges = {
        "p_limit": _monotone_order_ok(p_err, p_ord),
        "L_limit": _monotone_order_ok(L_err, L_ord),
        "residuals": max_res <= tol,
        "corner": gap <= corner_tol and corner_err <= corner_tol,
        "exponents": exp_err <= EXPONENT_TOL,
    }
    return DiagramReport(
        space, shape.as_dict() if shape else None, ps, Ls, int(len(pts)), tol,
        p_err, p_ord, L_err, L_ord, max_res, gap, corner_err, exp_err, edges,
    )
