"""Seeded residual sweeps over (p, L) grids and point clouds.

A sweep samples one point cloud per space/shape from the seed, evaluates
the relevant operator on the candidate at every point, and aggregates
relative residuals into one record per (p, L[, shape]). Records are computed
independently and stored in grid order, so a thread pool changes nothing
but wall time.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import grushin as G
from .. import heisenberg as H
from ..errors import ConfigInvalid, DriftLapError, ExcludedParameter
from ..frame import TINY
from ..jets import DEFAULT_POLICY
from ..params import CandidateKind, DriftParams

SPACES = ("heisenberg", "grushin")


@dataclass(frozen=True)
class SweepConfig:
    space: str
    grid: tuple[tuple[float, float], ...]
    candidate: CandidateKind = CandidateKind.POWER
    points: int = 200
    shell: tuple[float, float] = (0.5, 4.0)
    seed: int = 42
    tol: float = 1e-8
    shapes: tuple[G.GrushinShape, ...] = (G.DEFAULT_SHAPE,)
    epsilon: float = 0.0
    line_margin: float = 0.1
    positive_only: bool = True
    threads: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "candidate", CandidateKind(self.candidate))
        object.__setattr__(self, "grid", tuple((float(p), float(L)) for p, L in self.grid))
        object.__setattr__(self, "shell", tuple(float(x) for x in self.shell))
        object.__setattr__(self, "shapes", tuple(self.shapes))
        self.validate()

    def validate(self) -> None:
        if self.space not in SPACES:
            raise ConfigInvalid(f"space must be one of {SPACES}, got {self.space!r}")
        if not self.grid:
            raise ConfigInvalid("empty (p, L) grid")
        for p, L in self.grid:
            DriftParams(p, L)  # raises ConfigInvalid on p <= 1 or non-finite values
        lo, hi = self.shell
        if not (lo > 0 and hi > lo and math.isfinite(hi)):
            raise ConfigInvalid(f"shell must satisfy 0 < min < max, got {lo}:{hi}")
        if self.points < 1:
            raise ConfigInvalid("point count must be >= 1")
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise ConfigInvalid("tolerance must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigInvalid("seed must be a 64-bit unsigned integer")
        if self.space == "grushin" and not self.shapes:
            raise ConfigInvalid("a Grushin sweep needs at least one shape")
        if self.candidate is CandidateKind.MOLLIFIED and not self.epsilon > 0:
            raise ConfigInvalid("the mollified candidate needs epsilon > 0")
        if self.candidate is not CandidateKind.MOLLIFIED and self.epsilon != 0:
            raise ConfigInvalid("epsilon applies to the mollified candidate only")
        if self.line_margin < G.LINE_FLOOR:
            raise ConfigInvalid(f"line margin must be >= {G.LINE_FLOOR:g}")
        if self.threads is not None and self.threads < 1:
            raise ConfigInvalid("threads must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["candidate"] = self.candidate.value
        d["grid"] = [list(x) for x in self.grid]
        d["shell"] = list(self.shell)
        d["shapes"] = [s.as_dict() for s in self.shapes] if self.space == "grushin" else None
        return d


@dataclass
class SweepRecord:
    p: float
    L: float
    shape: dict | None
    candidate: str
    epsilon: float
    requested: int
    evaluated: int
    max_rel_residual: float | None
    mean_rel_residual: float | None
    median_rel_residual: float | None
    skipped: dict[str, int] = field(default_factory=dict)
    excluded: bool = False
    note: str = ""
    passed: bool = False
    wall_ms: float = 0.0

    @classmethod
    def from_dict(cls, d: dict) -> "SweepRecord":
        return cls(**d)


@dataclass
class ResidualReport:
    tolerance: float
    records: list[SweepRecord]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records if not r.excluded)

    @property
    def vacuous(self) -> bool:
        return all(r.excluded for r in self.records)

    def to_dict(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "records": [asdict(r) for r in self.records],
            "pass": self.passed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ResidualReport":
        return cls(d["tolerance"], [SweepRecord.from_dict(r) for r in d["records"]])


# ---------------------------------------------------------------- evaluation


def _thread_count(cfg: SweepConfig) -> int:
    if cfg.threads is not None:
        return cfg.threads
    raw = os.environ.get("DRIFTLAP_THREADS")
    return max(1, int(raw)) if raw else 1


def _cloud(cfg: SweepConfig, shape_index: int) -> np.ndarray:
    if cfg.space == "heisenberg":
        return H.sample_shell(cfg.points, cfg.shell, np.random.default_rng(cfg.seed))
    rng = np.random.default_rng([cfg.seed, shape_index])
    return G.sample_shell(
        cfg.points, cfg.shell, cfg.shapes[shape_index], rng, cfg.line_margin, cfg.positive_only
    )


class _Space:
    """Uniform access to the two spaces for one (shape, params, candidate)."""

    def __init__(self, cfg: SweepConfig, shape: G.GrushinShape | None, prm: DriftParams):
        self.cfg, self.shape, self.prm = cfg, shape, prm
        if cfg.space == "heisenberg":
            self.cand = H.HCandidate(cfg.candidate, prm, cfg.epsilon)
        else:
            self.cand = G.GCandidate(cfg.candidate, shape, prm, cfg.epsilon)
        self.cand.exponents()  # raises ExcludedParameter up front

    def point_errors(self, pts):
        if self.cfg.space == "heisenberg":
            return H.point_errors(self.cand, pts, DEFAULT_POLICY)
        return G.point_errors(self.cand, pts, DEFAULT_POLICY, self.cfg.line_margin)

    def terms(self, pts):
        kind = self.cfg.candidate
        if self.cfg.space == "heisenberg":
            if kind is CandidateKind.INFINITY:
                return H.h_infinity_terms(self.cand, self.prm.L, pts)
            return H.h_drift_terms(self.cand, self.prm, pts)
        if kind is CandidateKind.INFINITY:
            return G.g_infinity_terms(self.cand, self.prm.L, pts)
        return G.g_drift_terms(self.cand, self.prm, pts, line_floor=self.cfg.line_margin)

    def closed_mollified(self, pts):
        if self.cfg.space == "heisenberg":
            return H.h_mollified_residual_closed(self.prm, self.cfg.epsilon, pts)
        return G.g_mollified_residual_closed(self.shape, self.prm, self.cfg.epsilon, pts)

    def residuals(self, pts) -> np.ndarray:
        t = self.terms(pts)
        if self.cfg.candidate is not CandidateKind.MOLLIFIED:
            return t.relative_residual()
        closed = np.atleast_1d(self.closed_mollified(pts))
        # where the closed form vanishes identically, judge against the term scale
        terms = np.concatenate([t.lap_terms, t.drift_terms], axis=-1)
        denom = np.where(closed != 0, np.abs(closed), t.scale * np.abs(terms).max(axis=-1))
        return np.abs(t.residual - closed) / np.maximum(denom, TINY)


def _evaluate(space: _Space, pts: np.ndarray):
    """Relative residuals at evaluable points and skip counts by error kind."""
    kinds = space.point_errors(pts)
    skipped: dict[str, int] = {}
    ok = kinds == ""
    for k in kinds[~ok]:
        skipped[k] = skipped.get(k, 0) + 1
    good = pts[ok]
    if len(good) == 0:
        return np.empty(0), skipped
    try:
        return space.residuals(good), skipped
    except DriftLapError:
        pass
    # classify point by point; slow path, only when a batch raised
    res = []
    for x in good:
        try:
            res.append(float(space.residuals(x[None, :])[0]))
        except DriftLapError as exc:
            skipped[exc.kind] = skipped.get(exc.kind, 0) + 1
    return np.asarray(res), skipped


def _record(cfg: SweepConfig, pts, shape: G.GrushinShape | None, p: float, L: float):
    t0 = time.perf_counter()
    prm = DriftParams(p, L)
    base = dict(
        p=p,
        L=L,
        shape=shape.as_dict() if shape is not None else None,
        candidate=cfg.candidate.value,
        epsilon=cfg.epsilon,
        requested=cfg.points,
    )
    try:
        space = _Space(cfg, shape, prm)
    except ExcludedParameter as exc:
        return SweepRecord(
            **base, evaluated=0, max_rel_residual=None, mean_rel_residual=None,
            median_rel_residual=None, excluded=True, note=str(exc), passed=False,
            wall_ms=(time.perf_counter() - t0) * 1e3,
        )
    res, skipped = _evaluate(space, pts)
    res = np.asarray(res, dtype=float)
    if len(res):
        mx, mean, med = float(np.max(res)), float(np.mean(res)), float(np.median(res))
        passed = bool(np.all(np.isfinite(res)) and mx <= cfg.tol)
    else:
        mx = mean = med = None
        passed = False
    return SweepRecord(
        **base, evaluated=int(len(res)), max_rel_residual=mx, mean_rel_residual=mean,
        median_rel_residual=med, skipped=dict(sorted(skipped.items())),
        note="" if len(res) else "no evaluable points", passed=passed,
        wall_ms=(time.perf_counter() - t0) * 1e3,
    )


def run_sweep(cfg: SweepConfig) -> ResidualReport:
    """Evaluate every grid entry; records come back in grid order."""
    if cfg.space == "heisenberg":
        jobs = [(0, None, p, L) for p, L in cfg.grid]
    else:
        jobs = [(k, s, p, L) for k, s in enumerate(cfg.shapes) for p, L in cfg.grid]
    clouds = {k: _cloud(cfg, k) for k in sorted({j[0] for j in jobs})}

    def work(job):
        k, shape, p, L = job
        return _record(cfg, clouds[k], shape, p, L)

    n = _thread_count(cfg)
    if n == 1:
        records = [work(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            records = list(pool.map(work, jobs))  # map preserves job order
    return ResidualReport(cfg.tol, records)
