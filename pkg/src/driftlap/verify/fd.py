"""Finite-difference oracle, independent of the jet arithmetic.

Central differences with Richardson extrapolation: a symmetric rule D(h)
has an error series in h^2, so halving the step and combining
(4^k D(h/2) - D(h)) / (4^k - 1) removes one even power per level. The
default is one level; the second-order frame oracles use two.

Frame derivatives along a single field are taken on straight lines. This is
exact here, because along the flow of X1, X2 (Heisenberg) and Y1, Y2
(Grushin) the field's own coefficients stay constant.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

Field = Callable[[np.ndarray], complex]

STEP_FIRST = 1e-5
STEP_SECOND = 1e-3
# two-level extrapolation tolerates a much coarser step
STEP_SECOND_L2 = 1e-2
# nested differences: coarser inner step so its rounding is not amplified
STEP_INNER = 3e-4
STEP_OUTER = 3e-3


def _unit(d: int, which: int) -> np.ndarray:
    if not 0 <= which < d:
        raise IndexError(f"coordinate {which} out of range for dimension {d}")
    e = np.zeros(d)
    e[which] = 1.0
    return e


def richardson(rule: Callable[[float], complex], h: float, levels: int = 1) -> complex:
    """Extrapolate ``rule(h)`` (an even-power error series) toward h = 0."""
    row = [rule(h / 2**k) for k in range(levels + 1)]
    for lev in range(1, levels + 1):
        f = 4.0**lev
        row = [(f * row[k + 1] - row[k]) / (f - 1.0) for k in range(len(row) - 1)]
    return row[0]


def _scale(x: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(x))))


def directional(
    f: Field, at, direction, order: int = 1, step: float | None = None, levels: int = 1
) -> complex:
    """First or second derivative of t -> f(at + t direction) at t = 0."""
    x = np.asarray(at, dtype=float)
    e = np.asarray(direction, dtype=float)
    size = float(np.linalg.norm(e))
    if size == 0.0:
        return 0j
    # step along the unit direction; rescale by |e|^order at the end
    e = e / size
    if order == 1:
        h = (STEP_FIRST if step is None else step) * _scale(x)

        def rule(k):
            return (f(x + k * e) - f(x - k * e)) / (2.0 * k)

    elif order == 2:
        h = (STEP_SECOND if step is None else step) * _scale(x)
        f0 = f(x)

        def rule(k):
            return (f(x + k * e) - 2.0 * f0 + f(x - k * e)) / (k * k)

    else:
        raise ValueError(f"order must be 1 or 2, got {order}")
    return complex(richardson(rule, h, levels)) * size**order


def fd_derivative(
    f: Field, at, which: int, order: int = 1, step: float | None = None, levels: int = 1
) -> complex:
    """d/dx_which (order 1) or d^2/dx_which^2 (order 2) of ``f`` at ``at``.

    Default steps: 1e-5 max(1, |x|) for order 1, 1e-3 max(1, |x|) for
    order 2 (a smaller second-order step drowns in rounding).
    """
    x = np.asarray(at, dtype=float)
    return directional(f, x, _unit(x.shape[-1], which), order, step, levels)


def fd_mixed(
    f: Field, at, i: int, j: int, step: float | None = None, levels: int = 1
) -> complex:
    """d^2 f / dx_i dx_j by the four-point cross stencil with Richardson."""
    if i == j:
        return fd_derivative(f, at, i, 2, step, levels)
    x = np.asarray(at, dtype=float)
    d = x.shape[-1]
    ei, ej = _unit(d, i), _unit(d, j)
    h = (STEP_SECOND if step is None else step) * _scale(x)

    def rule(k):
        return (
            f(x + k * ei + k * ej) - f(x + k * ei - k * ej)
            - f(x - k * ei + k * ej) + f(x - k * ei - k * ej)
        ) / (4.0 * k * k)

    return complex(richardson(rule, h, levels))


def gradient(f: Field, at) -> np.ndarray:
    x = np.asarray(at, dtype=float)
    return np.array([fd_derivative(f, x, k) for k in range(x.shape[-1])])


def hessian(f: Field, at, step: float | None = None, levels: int = 2) -> np.ndarray:
    x = np.asarray(at, dtype=float)
    step = STEP_SECOND_L2 if step is None else step
    d = x.shape[-1]
    out = np.empty((d, d), dtype=complex)
    for i in range(d):
        for j in range(i, d):
            out[i, j] = out[j, i] = fd_mixed(f, x, i, j, step, levels)
    return out


# ---------------------------------------------------------------- frame oracles


def frame_derivative(f: Field, field: Callable[[np.ndarray], np.ndarray], at) -> complex:
    """F f at ``at`` where ``field(x)`` returns the coefficient vector of F."""
    x = np.asarray(at, dtype=float)
    return directional(f, x, field(x), 1)


def frame_second(f: Field, field: Callable[[np.ndarray], np.ndarray], at) -> complex:
    """F F f along the straight flow line of F (two Richardson levels)."""
    x = np.asarray(at, dtype=float)
    return directional(f, x, field(x), 2, STEP_SECOND_L2, 2)


def horizontal_norm(f: Field, fields, at, step: float | None = None) -> float:
    """sum_i |F_i f|^2 from first-order differences."""
    x = np.asarray(at, dtype=float)
    return float(sum(abs(directional(f, x, F(x), 1, step)) ** 2 for F in fields))


def frame_jet(f: Field, fields, at) -> tuple[np.ndarray, np.ndarray]:
    """(F_j f, F_i F_j f) from difference quotients of f and of the field coefficients.

    F_i F_j f = A_i^T Hess(f) A_j + sum_k A_ik (d_k A_j) . grad f.
    """
    x = np.asarray(at, dtype=float)
    d = x.shape[-1]
    g = gradient(f, x)
    Hf = hessian(f, x)
    A = np.array([F(x) for F in fields])
    # dA[j, k, m] = d_k of coefficient m of field j
    dA = np.array(
        [
            [[fd_derivative(lambda y, F=F, m=m: F(y)[m], x, k).real for m in range(d)]
             for k in range(d)]
            for F in fields
        ]
    )
    Xu = A @ g
    XXu = A @ Hf @ A.T + np.einsum("ik,jkm,m->ij", A, dA, g)
    return Xu, XXu


def frame_of_norm(f: Field, fields, index: int, at) -> complex:
    """F_index (sum_j |F_j f|^2) = 2 Re sum_j conj(F_j f) F_index F_j f.

    Built from one-level differences (gradient, Hessian, field Jacobians);
    nesting one difference inside another loses too many digits.
    """
    Xu, XXu = frame_jet(f, fields, at)
    return complex(2.0 * np.sum((np.conj(Xu) * XXu[index]).real))


def frame_of_norm_nested(f: Field, fields, index: int, at) -> complex:
    """Same quantity by an outer difference of the inner norm (coarser check)."""
    x = np.asarray(at, dtype=float)

    def norm(y):
        return horizontal_norm(f, fields, y, STEP_INNER)

    return directional(norm, x, fields[index](x), 1, STEP_OUTER)


# ---------------------------------------------------------------- frames


def heisenberg_fields():
    return (
        lambda x: np.array([1.0, 0.0, -0.5 * x[1]]),
        lambda x: np.array([0.0, 1.0, 0.5 * x[0]]),
    )


def grushin_fields(a: float, c: float, n: int):
    return (
        lambda y: np.array([1.0, 0.0]),
        lambda y: np.array([0.0, c * (y[0] - a) ** n]),
    )
