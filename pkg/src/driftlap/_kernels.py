"""Quadrature kernels for the rescaled delta-mass densities.

Two interchangeable backends compute the same tensor-grid sums:

* ``numba``: ``@njit(parallel=True)`` loops, one partial sum per outer slab
* ``numpy``: vectorized slabs, same per-slab layout

Slab partials are reduced serially in index order, so the result does not
depend on how many threads ran the slabs. Pick the backend with
``DRIFTLAP_BACKEND=numba|numpy`` (default: numba when importable) and cap
threads with ``DRIFTLAP_THREADS``.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba
    from numba import njit, prange

    # the bundled TBB is too old; skip the layer probe and its warning
    if "NUMBA_THREADING_LAYER" not in os.environ:
        numba.config.THREADING_LAYER = "omp"
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

BACKENDS = ("numba", "numpy")


def backend() -> str:
    name = os.environ.get("DRIFTLAP_BACKEND", "numba" if HAVE_NUMBA else "numpy").lower()
    if name not in BACKENDS:
        raise ValueError(f"DRIFTLAP_BACKEND must be one of {BACKENDS}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


def thread_cap() -> int | None:
    raw = os.environ.get("DRIFTLAP_THREADS")
    if not raw:
        return None
    n = int(raw)
    if n < 1:
        raise ValueError("DRIFTLAP_THREADS must be a positive integer")
    return n


def _apply_threads() -> None:
    cap = thread_cap()
    if cap is not None and HAVE_NUMBA:
        numba.set_num_threads(min(cap, numba.config.NUMBA_NUM_THREADS))


def sinh_axis(half_width: float, res: int) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint nodes and weights on [-U, U], graded toward 0 by a sinh map.

    x = U sinh(k t)/sinh(k) with k = asinh(U) and t on a uniform midpoint
    grid of [-1, 1]; the weights carry the Jacobian. Nodes are mirrored
    exactly (x[i] == -x[res-1-i]) so the kernels can fold the vertical axis.
    """
    U = float(half_width)
    k = math.asinh(U)
    t = 1.0 - (np.arange(res // 2) + 0.5) * (2.0 / res)  # positive half, outermost first
    x = U * np.sinh(k * t) / math.sinh(k)
    w = U * k * np.cosh(k * t) / math.sinh(k) * (2.0 / res)
    mid_x = np.zeros(res % 2)
    mid_w = np.full(res % 2, U * k / math.sinh(k) * (2.0 / res))
    return np.concatenate([-x, mid_x, x[::-1]]), np.concatenate([w, mid_w, w[::-1]])


def _fold(nodes: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nonnegative half of a mirrored axis with doubled weights off zero."""
    K = len(nodes)
    s = nodes[K // 2:]
    w = weights[K // 2:] * 2.0
    if K % 2:
        w[0] = weights[K // 2]
    return np.ascontiguousarray(s), np.ascontiguousarray(w)


# The integrands below satisfy F(-s) = conj(F(s)) in the vertical variable,
# so each vertical sum is real: sum of w |V|^(a+b) cos((a-b) arg V) over s >= 0.

# ---------------------------------------------------------------- numpy


def _h_slabs_numpy(q, a, b, xi, wx, ze, wz):
    # integrand rho^q V^a W^b with V = rho + 1 - 4i zeta, W = conj(V);
    # xi is the folded half axis and slab i covers j >= i (off-diagonal twice)
    out = np.empty(len(xi), dtype=np.float64)
    im = -4.0 * ze[None, :]
    for i in range(len(xi)):
        rho = xi[i] ** 2 + xi[i:] ** 2
        pos = rho > 0
        rq = np.zeros_like(rho)
        rq[pos] = rho[pos] ** q
        re = (rho + 1.0)[:, None]
        f = (re * re + im * im) ** (0.5 * (a + b)) * np.cos((a - b) * np.arctan2(im, re))
        wj = wx[i:] * 2.0
        wj[0] = wx[i]
        out[i] = wx[i] * np.sum(wj * rq * (f @ wz))
    return out


def _g_slabs_numpy(n, c, q, A, B, T, wt, S, ws):
    # integrand |T|^q T^(n-1) G^A H^B with G = c T^(n+1) + 1 + i(n+1) S
    out = np.empty(len(T), dtype=np.float64)
    im = (n + 1) * S
    for i in range(len(T)):
        t = T[i]
        if t == 0.0:
            out[i] = 0.0
            continue
        amp = abs(t) ** q * t ** (n - 1)
        re = c * t ** (n + 1) + 1.0
        f = (re * re + im * im) ** (0.5 * (A + B)) * np.cos((A - B) * np.arctan2(im, re))
        out[i] = wt[i] * amp * np.dot(f, ws)
    return out


# ---------------------------------------------------------------- numba

if HAVE_NUMBA:

    @njit(parallel=True, cache=True)
    def _h_slabs_numba(q, a, b, xi, wx, ze, wz):
        I = xi.shape[0]
        K = ze.shape[0]
        half, diff = 0.5 * (a + b), a - b
        out = np.empty(I, dtype=np.float64)
        for i in prange(I):
            acc = 0.0
            for j in range(i, I):
                rho = xi[i] * xi[i] + xi[j] * xi[j]
                if rho == 0.0:
                    continue
                re = rho + 1.0
                inner = 0.0
                for k in range(K):
                    im = -4.0 * ze[k]
                    inner += wz[k] * (re * re + im * im) ** half * math.cos(diff * math.atan2(im, re))
                acc += (wx[j] if j == i else 2.0 * wx[j]) * rho**q * inner
            out[i] = wx[i] * acc
        return out

    @njit(parallel=True, cache=True)
    def _g_slabs_numba(n, c, q, A, B, T, wt, S, ws):
        I = T.shape[0]
        K = S.shape[0]
        half, diff = 0.5 * (A + B), A - B
        out = np.empty(I, dtype=np.float64)
        for i in prange(I):
            t = T[i]
            if t == 0.0:
                out[i] = 0.0
                continue
            re = c * t ** (n + 1) + 1.0
            acc = 0.0
            for k in range(K):
                im = (n + 1) * S[k]
                acc += ws[k] * (re * re + im * im) ** half * math.cos(diff * math.atan2(im, re))
            out[i] = wt[i] * abs(t) ** q * t ** (n - 1) * acc
        return out


def _reduce(slabs: np.ndarray) -> complex:
    total = 0.0
    for z in slabs:  # fixed order
        total += z
    return complex(total)


def h_density_sum(q, a, b, xi, wx, ze, wz, which: str | None = None) -> complex:
    """Sum of w rho^q V^a conj(V)^b over the (xi, xi, zeta) tensor grid.

    Uses the symmetries xi1 <-> -xi1, xi2 <-> -xi2, xi1 <-> xi2 and
    zeta <-> -zeta, which leave the grid (mirrored nodes) invariant.
    """
    which = which or backend()
    xi, wx = _fold(xi, wx)
    ze, wz = _fold(ze, wz)
    args = (float(q), float(a), float(b), xi, wx, ze, wz)
    if which == "numba":
        _apply_threads()
        return _reduce(_h_slabs_numba(*args))
    return _reduce(_h_slabs_numpy(*args))


def g_density_sum(n, c, q, A, B, T, wt, S, ws, which: str | None = None) -> complex:
    """Sum of w |T|^q T^(n-1) G^A conj(G)^B over the (T, S) tensor grid."""
    which = which or backend()
    S, ws = _fold(S, ws)
    args = (int(n), float(c), float(q), float(A), float(B), T, wt, S, ws)
    if which == "numba":
        _apply_threads()
        return _reduce(_g_slabs_numba(*args))
    return _reduce(_g_slabs_numpy(*args))
