import itertools

import numpy as np
import pytest

from driftlap import grushin as G
from driftlap.errors import ConfigInvalid, DegenerateLine, ExcludedParameter, SingularPoint
from driftlap.params import CandidateKind, DriftParams

P_GRID = (1.5, 2.0, 3.0, 5.0, 7.0)
L_GRID = (-1.2, -0.5, 0.0, 0.4, 1.0)
SHAPES = [G.GrushinShape(0.0, 0.0, c, n) for n in (1, 2, 3) for c in (1.0, -1.0, 2.0)]


def _cloud(shape, seed=0, count=120):
    return G.sample_shell(count, (0.5, 4.0), shape, np.random.default_rng(seed))


def test_shape_validation():
    with pytest.raises(ConfigInvalid):
        G.GrushinShape(c=0.0)
    with pytest.raises(ConfigInvalid):
        G.GrushinShape(n=0)
    with pytest.raises(ConfigInvalid):
        G.GrushinShape(n=1.5)


def test_frame_examples():
    shape = G.GrushinShape(a=0.5, b=0.0, c=2.0, n=3)
    y2 = lambda s: s[1]  # noqa: E731
    assert G.g_frame_apply(2, y2, (1.5, 0.3), shape) == 2.0
    assert G.g_frame_apply(2, lambda s: s[0] * s[1] * s[1], (0.5, 0.3), shape) == 0
    at = (1.2, -0.4)
    br = G.g_frame_second(1, 2, y2, at, shape) - G.g_frame_second(2, 1, y2, at, shape)
    assert br == pytest.approx(2.0 * 3 * 0.7**2, rel=1e-14)


def test_exponent_examples():
    for n in (1, 2, 3):
        for L in (-0.5, 0.0, 0.4):
            ex = G.g_exponents(DriftParams(2.0, L), n)
            assert ex.alpha == pytest.approx(-n * (1 + L) / (2 * n + 2), abs=1e-15)
            assert ex.beta == pytest.approx(-n * (1 - L) / (2 * n + 2), abs=1e-15)
        for p in (1.5, 3.0, 7.0):
            if p == n + 2:
                continue
            ex = G.g_exponents(DriftParams(p, 0.0), n)
            assert ex.alpha == ex.beta == pytest.approx(G.legacy_tau(p, n), rel=1e-15)
        with pytest.raises(ExcludedParameter):
            G.g_exponents(DriftParams(n + 2.0, 0.0), n)


@pytest.mark.parametrize("p,L,n", [(3.0, 0.4, 1), (1.5, -1.2, 2), (7.0, 1.0, 3)])
def test_exponent_invariants(p, L, n):
    ex = G.g_exponents(DriftParams(p, L), n)
    assert ex.alpha + ex.beta == pytest.approx((n + 2 - p) / ((n + 1) * (1 - p)), abs=1e-15)
    assert ex.beta - ex.alpha == pytest.approx(L * n / (n + 1), abs=1e-15)
    inf = G.g_infinity_exponents(L, n)
    assert inf.alpha + inf.beta == pytest.approx(1 / (n + 1))


def test_f_eval_examples():
    f = G.f_eval(G.power(2.0, 0.0), (1.0, 1.0)).value
    assert f == pytest.approx(5 ** -0.25, rel=1e-14)
    assert G.f_eval(G.power(3.0, 0.4), (1.0, 0.0)).value == pytest.approx(1.0)
    moll = G.GCandidate(CandidateKind.MOLLIFIED, G.DEFAULT_SHAPE, DriftParams(3.0, 0.4), 1.0)
    assert G.f_eval(moll, (0.0, 0.0)).value == pytest.approx(1.0)
    with pytest.raises(SingularPoint):
        G.f_eval(G.power(3.0, 0.4), (0.0, 0.0))


def test_degenerate_line():
    cand = G.power(3.0, 0.4)
    with pytest.raises(DegenerateLine):
        G.g_drift_op(cand, DriftParams(3.0, 0.4), (1e-8, 1.0))
    kinds = G.point_errors(cand, np.array([[0.0, 0.0], [1e-8, 1.0], [1.0, 1.0]]))
    assert list(kinds) == ["SingularPoint", "DegenerateLine", ""]


def test_conjugate_pair_and_real_at_l0():
    shape = G.GrushinShape(0.2, -0.3, 2.0, 2)
    pts = _cloud(shape)
    g, h = G.gh_jets(pts, shape)
    assert np.array_equal(h.value, np.conj(g.value))
    f = G.f_eval(G.power(3.0, 0.0, shape), pts).value
    assert np.max(np.abs(f.imag / f.real)) < 1e-14


@pytest.mark.parametrize("shape", SHAPES, ids=lambda s: f"n{s.n}c{s.c:g}")
def test_power_residual_and_cancellation(shape):
    pts = _cloud(shape, seed=shape.n)
    for p, L in itertools.product(P_GRID, L_GRID):
        prm = DriftParams(p, L)
        if not prm.is_valid_g(shape.n):
            continue
        t = G.g_drift_terms(G.power(p, L, shape), prm, pts, line_floor=0.1)
        assert t.relative_residual().max() <= 1e-8, (p, L)
        if L != 0:
            assert t.cancellation_residual().max() <= 1e-8, (p, L)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.0, 5.0, 7.0])
def test_legacy_reduction(n, p):
    shape = G.GrushinShape(0.0, 0.0, 1.0, n)
    pts = _cloud(shape, seed=7)
    prm = DriftParams(p, 0.0)
    legacy = G.GCandidate(CandidateKind.LEGACY, shape, prm)
    f_leg = G.f_eval(legacy, pts).value
    if p == n + 2:
        assert legacy.is_log_branch
        ref = np.log(G.gauge(pts, shape))
        assert np.max(np.abs(f_leg - ref) / np.abs(ref)) <= 1e-12
    else:
        f_pow = G.f_eval(G.power(p, 0.0, shape), pts).value
        assert np.max(np.abs(f_pow - f_leg) / np.abs(f_leg)) <= 1e-12
    assert G.g_drift_terms(legacy, prm, pts).relative_residual().max() <= 1e-8


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("L", [-0.5, 0.0, 0.4, 2.5])
def test_bgg2_reduction(n, L):
    shape = G.GrushinShape(0.0, 0.0, 1.0, n)
    prm = DriftParams(2.0, L)
    bgg = G.GCandidate(CandidateKind.BGG2, shape, prm)
    # two algebraically equal formulas; they agree to rounding
    ex, ref = bgg.exponents(), G.g_exponents(prm, n)
    assert abs(ex.alpha - ref.alpha) <= 4 * np.spacing(abs(ref.alpha))
    assert abs(ex.beta - ref.beta) <= 4 * np.spacing(abs(ref.beta))
    pts = _cloud(shape, seed=9)
    a = G.f_eval(bgg, pts).value
    b = G.f_eval(G.power(2.0, L, shape), pts).value
    assert np.max(np.abs(a - b) / np.abs(b)) <= 1e-12
    assert G.g_drift_terms(bgg, prm, pts).relative_residual().max() <= 1e-8


@pytest.mark.parametrize("shape", SHAPES[:6], ids=lambda s: f"n{s.n}c{s.c:g}")
@pytest.mark.parametrize("L", [-1.2, 0.0, 0.4])
def test_infinity_candidate(shape, L):
    cand = G.GCandidate(CandidateKind.INFINITY, shape, DriftParams(2.0, L))
    pts = _cloud(shape, seed=4)
    t = G.g_infinity_terms(cand, L, pts)
    assert t.relative_residual().max() <= 1e-8
    ref = G.closed_inf_laplacian(pts, shape, L)
    floor = np.abs(t.lap_terms).max(axis=-1)
    assert np.max(np.abs(t.laplacian - ref) / np.maximum(np.abs(ref), floor)) <= 1e-10


def test_mollified_example():
    shape = G.GrushinShape(0.0, 0.0, 1.0, 2)
    prm = DriftParams(3.0, 0.5)
    at = np.array([1.3, 0.7])
    ad = G.g_drift_op(G.power(3.0, 0.5, shape, epsilon=0.1), prm, at)
    closed = G.g_mollified_residual_closed(shape, prm, 0.1, at)
    assert abs(ad - closed) <= 1e-8 * abs(closed)


def test_mollified_degenerate_prefactor():
    for n in (1, 2, 3):
        assert G.mollified_prefactor(2.0, 1.0, n) == 0.0
        assert G.mollified_prefactor(2.0, -1.0, n) == 0.0
        assert G.mollified_prefactor(2.0, 0.0, n) == n


def test_translation_invariance():
    base = G.GrushinShape(0.0, 0.0, 2.0, 3)
    moved = G.GrushinShape(0.8, -1.7, 2.0, 3)
    pts = _cloud(base, seed=1)
    shifted = pts + np.array([0.8, -1.7])
    prm = DriftParams(3.0, 0.4)
    a = G.g_drift_terms(G.power(3.0, 0.4, base), prm, pts)
    b = G.g_drift_terms(G.power(3.0, 0.4, moved), prm, shifted)
    fa = G.f_eval(G.power(3.0, 0.4, base), pts).value
    fb = G.f_eval(G.power(3.0, 0.4, moved), shifted).value
    assert np.max(np.abs(fa - fb) / np.abs(fa)) <= 1e-12
    assert np.max(np.abs(a.lap_terms - b.lap_terms) / np.abs(a.lap_terms)) <= 1e-12


def test_exponent_limit():
    for n in (1, 2, 3):
        for L in (-1.2, 0.0, 0.4):
            a, b = G.g_exponents_raw(1e6, L, n), G.g_infinity_exponents(L, n)
            assert abs(a.alpha - b.alpha) <= 1e-5 and abs(a.beta - b.beta) <= 1e-5


@pytest.mark.parametrize("shape", SHAPES, ids=lambda s: f"n{s.n}c{s.c:g}")
def test_sample_shell(shape):
    pts = _cloud(shape, count=400)
    g = G.gauge(pts, shape)
    assert np.all((g >= 0.5 - 1e-12) & (g <= 4.0 + 1e-12))
    assert np.all(np.abs(pts[:, 0] - shape.a) >= 0.1)
    re = shape.c * (pts[:, 0] - shape.a) ** (shape.n + 1)
    if shape.c > 0 or shape.n % 2 == 0:
        assert np.all(re > 0)
