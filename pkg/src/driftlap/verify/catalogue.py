"""Closed-form derivative catalogue checked against two independent oracles.

Every closed form is evaluated at random shell points with random valid
(p, L) and compared with the jet (AD) value and the finite-difference value.
AD and FD must agree before either is used to judge a closed form.

Entries flagged ``printed`` reproduce a displayed formula literally where it
disagrees with the operator; they are reported but never counted toward the
pass flag (see the README's errata table).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .. import grushin as G
from .. import heisenberg as H
from ..errors import ConfigInvalid
from ..frame import Horizontal, horizontal
from ..jets import principal_pow
from ..params import DriftParams
from . import fd

TOL_AD = 1e-10
TOL_FD = 1e-6
CUT_MARGIN = 0.2


@dataclass
class Sample:
    """One random configuration together with its evaluable field."""

    space: str
    at: np.ndarray
    params: DriftParams
    a1: float  # eta or alpha
    a2: float  # tau or beta
    shape: G.GrushinShape | None
    func: Callable[[np.ndarray], complex]
    fields: tuple
    hz: Horizontal


@dataclass(frozen=True)
class Entry:
    name: str
    space: str
    closed: Callable[[Sample], complex]
    ad: Callable[[Sample], complex]
    fd: Callable[[Sample], complex] | None
    printed: bool = False
    # magnitude floor for the relative error; sums that cancel need it
    scale: Callable[[Sample], float] | None = None


@dataclass
class EntryResult:
    name: str
    space: str
    printed: bool
    closed_vs_ad: float
    closed_vs_fd: float | None
    ad_vs_fd: float | None
    passed: bool


@dataclass
class CatalogueReport:
    space: str
    points: int
    seed: int
    entries: list[EntryResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries if not e.printed)

    def to_dict(self) -> dict:
        return {
            "space": self.space,
            "points": self.points,
            "seed": self.seed,
            "entries": [asdict(e) for e in self.entries],
            "pass": self.passed,
        }


def _rel(a: complex, b: complex, floor: float = 0.0) -> float:
    return abs(a - b) / max(abs(b), floor, 1e-300)


# ---------------------------------------------------------------- sampling


def _draw_params(rng, valid) -> DriftParams:
    while True:
        prm = DriftParams(float(rng.uniform(1.2, 8.0)), float(rng.uniform(-1.5, 1.5)))
        if valid(prm):
            return prm


def _h_sample(rng) -> Sample:
    prm = _draw_params(rng, lambda q: q.is_valid_h(1e-3))
    cand = H.HCandidate("power", prm)
    ex = cand.exponents()
    at = H.sample_shell(1, (0.5, 4.0), rng, axis_margin=1e-2)[0]

    def u(x):
        v = x[0] ** 2 + x[1] ** 2 - 4j * x[2]
        return principal_pow(v, ex.eta) * principal_pow(np.conj(v), ex.tau)

    hz = horizontal(H.u_eval(cand, at), H.frame(at))
    return Sample("heisenberg", at, prm, ex.eta, ex.tau, None, u, fd.heisenberg_fields(), hz)


def _g_sample(rng) -> Sample:
    while True:
        shape = G.GrushinShape(
            float(rng.uniform(-1, 1)),
            float(rng.uniform(-1, 1)),
            float(rng.choice([1.0, -1.0, 2.0])),
            int(rng.choice([1, 2, 3])),
        )
        prm = _draw_params(rng, lambda q: q.is_valid_g(shape.n, 1e-3))
        cand = G.GCandidate("power", shape, prm)
        at = G.sample_shell(1, (0.5, 4.0), shape, rng)
        g = G._g_values(at, shape)[0]
        # difference stencils must not straddle the cut of the principal branch
        if G.point_errors(cand, at)[0] == "" and abs(np.angle(g)) < np.pi - CUT_MARGIN:
            break
    at = at[0]
    ex = cand.exponents()

    def f(y):
        g = shape.c * (y[0] - shape.a) ** (shape.n + 1) + 1j * (shape.n + 1) * (y[1] - shape.b)
        return principal_pow(g, ex.alpha) * principal_pow(np.conj(g), ex.beta)

    hz = horizontal(G.f_eval(cand, at), G.frame(at, shape))
    fields = fd.grushin_fields(shape.a, shape.c, shape.n)
    return Sample("grushin", at, prm, ex.alpha, ex.beta, shape, f, fields, hz)


# ---------------------------------------------------------------- FD pieces


def _fd_x(i):
    return lambda s: fd.frame_derivative(s.func, s.fields[i], s.at)


def _fd_xx(i):
    return lambda s: fd.frame_second(s.func, s.fields[i], s.at)


def _fd_norm(s):
    return fd.horizontal_norm(s.func, s.fields, s.at)


def _fd_xnorm(i):
    return lambda s: fd.frame_of_norm(s.func, s.fields, i, s.at)


def _fd_sum_xnorm_xu(s):
    return sum(_fd_xnorm(i)(s) * _fd_x(i)(s) for i in range(2))


def _fd_norm_sum_xxu(s):
    return _fd_norm(s) * (_fd_xx(0)(s) + _fd_xx(1)(s))


def _fd_plap(s):
    p = s.params.p
    N = _fd_norm(s)
    return (p - 2) / 2 * N ** ((p - 4) / 2) * _fd_sum_xnorm_xu(s) + N ** ((p - 2) / 2) * (
        _fd_xx(0)(s) + _fd_xx(1)(s)
    )


def _plap_terms(s):
    p = s.params.p
    h = s.hz
    N = h.norm_sq
    return (
        (p - 2) / 2 * N ** ((p - 4) / 2) * np.sum(h.Xnorm * h.Xu),
        N ** ((p - 2) / 2) * (h.XXu[0, 0] + h.XXu[1, 1]),
    )


def _ad_plap(s):
    return sum(_plap_terms(s))


def _plap_scale(s):
    return max(abs(t) for t in _plap_terms(s))


_AD = {
    "X1u": lambda s: s.hz.Xu[0],
    "X2u": lambda s: s.hz.Xu[1],
    "norm": lambda s: s.hz.norm_sq,
    "X1X1u": lambda s: s.hz.XXu[0, 0],
    "X2X2u": lambda s: s.hz.XXu[1, 1],
    "X1N": lambda s: s.hz.Xnorm[0],
    "X2N": lambda s: s.hz.Xnorm[1],
    "sumXNXu": lambda s: np.sum(s.hz.Xnorm * s.hz.Xu),
    "NsumXXu": lambda s: s.hz.norm_sq * (s.hz.XXu[0, 0] + s.hz.XXu[1, 1]),
    "plap": _ad_plap,
}

_FD = {
    "X1u": _fd_x(0),
    "X2u": _fd_x(1),
    "norm": _fd_norm,
    "X1X1u": _fd_xx(0),
    "X2X2u": _fd_xx(1),
    "X1N": _fd_xnorm(0),
    "X2N": _fd_xnorm(1),
    "sumXNXu": _fd_sum_xnorm_xu,
    "NsumXXu": _fd_norm_sum_xxu,
    "plap": _fd_plap,
}


def _h(fn):
    return lambda s: fn(s.at, s.a1, s.a2)


def _g(fn):
    return lambda s: fn(s.at, s.shape, s.a1, s.a2)


def _entry(space, name, key, closed, printed=False):
    scale = _plap_scale if key == "plap" else None
    return Entry(name, space, closed, _AD[key], None if printed else _FD[key], printed, scale)


HEISENBERG_ENTRIES = (
    _entry("heisenberg", "X1u", "X1u", _h(H.closed_x1_u)),
    _entry("heisenberg", "X2u", "X2u", _h(H.closed_x2_u)),
    _entry("heisenberg", "norm_grad_sq", "norm", _h(H.closed_norm_grad_sq)),
    _entry("heisenberg", "X1X1u", "X1X1u", _h(H.closed_x1x1_u)),
    _entry("heisenberg", "X2X2u", "X2X2u", _h(H.closed_x2x2_u)),
    _entry("heisenberg", "X1_norm", "X1N", _h(H.closed_x1_norm)),
    _entry("heisenberg", "X2_norm", "X2N", _h(H.closed_x2_norm)),
    _entry("heisenberg", "sum_Xnorm_Xu", "sumXNXu", _h(H.closed_sum_xnorm_xu)),
    _entry("heisenberg", "norm_sum_XXu", "NsumXXu", _h(H.closed_norm_sum_xxu)),
    _entry("heisenberg", "p_laplacian", "plap", lambda s: H.closed_plap(s.at, s.params.p, s.params.L)),
    _entry("heisenberg", "X1X1u[printed]", "X1X1u", _h(H.printed_x1x1_u), printed=True),
    _entry("heisenberg", "X1_norm[printed]", "X1N", _h(H.printed_x1_norm), printed=True),
    _entry("heisenberg", "X2_norm[printed]", "X2N", _h(H.printed_x2_norm), printed=True),
    _entry("heisenberg", "sum_Xnorm_Xu[printed]", "sumXNXu", _h(H.printed_sum_xnorm_xu), printed=True),
)

GRUSHIN_ENTRIES = (
    _entry("grushin", "Y1f", "X1u", _g(G.closed_y1_f)),
    _entry("grushin", "Y2f", "X2u", _g(G.closed_y2_f)),
    _entry("grushin", "norm_grad_sq", "norm", _g(G.closed_norm_grad_sq)),
    _entry("grushin", "Y1Y1f", "X1X1u", _g(G.closed_y1y1_f)),
    _entry("grushin", "Y2Y2f", "X2X2u", _g(G.closed_y2y2_f)),
    _entry("grushin", "Y1_norm", "X1N", _g(G.closed_y1_norm)),
    _entry("grushin", "Y2_norm", "X2N", _g(G.closed_y2_norm)),
    _entry("grushin", "sum_Ynorm_Yf", "sumXNXu", _g(G.closed_sum_ynorm_yf)),
    _entry("grushin", "norm_sum_YYf", "NsumXXu", _g(G.closed_norm_sum_yyf)),
    _entry(
        "grushin", "p_laplacian", "plap",
        lambda s: G.closed_plap(s.at, s.shape, s.params.p, s.params.L),
    ),
)


def entries(space: str) -> tuple[Entry, ...]:
    if space == "heisenberg":
        return HEISENBERG_ENTRIES
    if space == "grushin":
        return GRUSHIN_ENTRIES
    raise ConfigInvalid(f"unknown space {space!r}")


def run_catalogue(space: str, points: int = 100, seed: int = 42) -> CatalogueReport:
    if points < 1:
        raise ConfigInvalid("points must be >= 1")
    rng = np.random.default_rng(seed)
    draw = _h_sample if space == "heisenberg" else _g_sample
    catalogue = entries(space)
    samples = [draw(rng) for _ in range(points)]
    report = CatalogueReport(space, points, seed)
    for e in catalogue:
        c_ad, c_fd, a_fd = 0.0, 0.0, 0.0
        for s in samples:
            closed, ad = complex(e.closed(s)), complex(e.ad(s))
            floor = e.scale(s) if e.scale else 0.0
            c_ad = max(c_ad, _rel(closed, ad, floor))
            if e.fd is not None:
                ref = e.fd(s)
                a_fd = max(a_fd, _rel(ad, ref, floor))
                c_fd = max(c_fd, _rel(closed, ref, floor))
        if e.fd is None:
            ok = c_ad <= TOL_AD
            report.entries.append(EntryResult(e.name, space, e.printed, c_ad, None, None, ok))
        else:
            ok = c_ad <= TOL_AD and c_fd <= TOL_FD and a_fd <= TOL_FD
            report.entries.append(EntryResult(e.name, space, e.printed, c_ad, c_fd, a_fd, ok))
    return report
