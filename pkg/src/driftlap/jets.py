"""Second-order truncated jets of complex functions of real variables.

A :class:`Jet2` holds the second-order Taylor data of a complex scalar
field with respect to ``d`` real coordinates, optionally batched over an
arbitrary leading shape ``S``::

    value: S          grad: S + (d,)          hess: S + (d, d)

Every operator in the package reads its first and second partials from a
Jet2, so the arithmetic here is the single source of derivatives.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchGuard, ConfigInvalid, ZeroBase


class BranchMode(enum.Enum):
    PRINCIPAL_STRICT = "PrincipalStrict"
    PRINCIPAL_WITH_GUARD = "PrincipalWithGuard"


@dataclass(frozen=True)
class BranchPolicy:
    mode: BranchMode = BranchMode.PRINCIPAL_WITH_GUARD
    guard_margin: float = 1e-3

    def __post_init__(self):
        if not 0.0 <= self.guard_margin < math.pi:
            raise ConfigInvalid(f"guard_margin must lie in [0, pi), got {self.guard_margin}")

    def check(self, z: np.ndarray) -> None:
        """Raise if any base value is zero or (when guarded) too close to the cut."""
        z = np.asarray(z)
        if np.any(z == 0):
            raise ZeroBase("principal power/log of a zero base")
        if self.mode is BranchMode.PRINCIPAL_WITH_GUARD and self.guard_margin > 0:
            if np.any(np.abs(np.angle(z)) > math.pi - self.guard_margin):
                raise BranchGuard(
                    f"base argument within {self.guard_margin:g} of the branch cut"
                )

    def violations(self, z: np.ndarray) -> np.ndarray:
        """Boolean mask of entries that :meth:`check` would reject for the cut."""
        z = np.asarray(z)
        if self.mode is BranchMode.PRINCIPAL_STRICT or self.guard_margin == 0:
            return np.zeros(z.shape, dtype=bool)
        return np.abs(np.angle(z)) > math.pi - self.guard_margin


DEFAULT_POLICY = BranchPolicy()
STRICT_POLICY = BranchPolicy(BranchMode.PRINCIPAL_STRICT, 0.0)


def _sym(h: np.ndarray) -> np.ndarray:
    return 0.5 * (h + np.swapaxes(h, -1, -2))


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., :, None] * b[..., None, :]


@dataclass(frozen=True, eq=False)
class Jet2:
    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray

    @property
    def dim(self) -> int:
        return self.grad.shape[-1]

    @property
    def shape(self) -> tuple:
        return np.shape(self.value)

    @classmethod
    def constant(cls, c, shape=(), dim: int = 3) -> "Jet2":
        value = np.broadcast_to(np.asarray(c, dtype=complex), shape).copy()
        return cls(
            value,
            np.zeros(tuple(shape) + (dim,), dtype=complex),
            np.zeros(tuple(shape) + (dim, dim), dtype=complex),
        )

    def _lift(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return other
        return Jet2.constant(np.broadcast_to(other, self.shape), self.shape, self.dim)

    def __add__(self, other):
        if not isinstance(other, Jet2):
            return Jet2(self.value + other, self.grad, self.hess)
        return Jet2(self.value + other.value, self.grad + other.grad, self.hess + other.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self.grad, -self.hess)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet2):
            c = np.asarray(other)
            return Jet2(self.value * c, self.grad * c[..., None], self.hess * c[..., None, None])
        a, b = self, other
        cross = _outer(a.grad, b.grad)
        hess = (
            a.hess * b.value[..., None, None]
            + a.value[..., None, None] * b.hess
            + cross
            + np.swapaxes(cross, -1, -2)
        )
        return Jet2(
            a.value * b.value,
            a.grad * b.value[..., None] + a.value[..., None] * b.grad,
            _sym(hess),
        )

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet2":
        if np.any(self.value == 0):
            raise ZeroBase("division by a jet with zero value")
        z = self.value
        return self.chain(1.0 / z, -1.0 / z**2, 2.0 / z**3)

    def __truediv__(self, other):
        if not isinstance(other, Jet2):
            return self * (1.0 / np.asarray(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def conj(self) -> "Jet2":
        """Complex conjugate; valid because the seeds are real coordinates."""
        return Jet2(np.conj(self.value), np.conj(self.grad), np.conj(self.hess))

    def chain(self, f0, f1, f2) -> "Jet2":
        """Compose with a univariate analytic map given its value and two derivatives."""
        f1 = np.asarray(f1)
        f2 = np.asarray(f2)
        g = self.grad
        return Jet2(
            np.asarray(f0),
            f1[..., None] * g,
            _sym(f2[..., None, None] * _outer(g, g) + f1[..., None, None] * self.hess),
        )

    def __getitem__(self, idx) -> "Jet2":
        return Jet2(self.value[idx], self.grad[idx], self.hess[idx])


def jet_seed(point, which: int) -> Jet2:
    """Jet of the coordinate function ``x[which]`` at ``point`` (shape S+(d,))."""
    point = np.asarray(point, dtype=float)
    d = point.shape[-1]
    if not 0 <= which < d:
        raise IndexError(f"seed index {which} out of range for dimension {d}")
    shape = point.shape[:-1]
    grad = np.zeros(shape + (d,), dtype=complex)
    grad[..., which] = 1.0
    return Jet2(point[..., which].astype(complex), grad, np.zeros(shape + (d, d), dtype=complex))


def seed_all(point) -> tuple[Jet2, ...]:
    point = np.asarray(point, dtype=float)
    return tuple(jet_seed(point, k) for k in range(point.shape[-1]))


def principal_pow(z, s):
    """exp(s * Log z) with the principal logarithm, elementwise."""
    return np.exp(s * np.log(np.asarray(z, dtype=complex)))


def jet_pow(base: Jet2, exponent, policy: BranchPolicy = DEFAULT_POLICY) -> Jet2:
    """Principal-branch complex power ``base**exponent``."""
    z = base.value
    policy.check(z)
    s = np.asarray(exponent, dtype=complex)
    val = principal_pow(z, s)
    d1 = s * val / z
    d2 = (s - 1.0) * d1 / z
    return base.chain(val, d1, d2)


def jet_log(base: Jet2, policy: BranchPolicy = DEFAULT_POLICY) -> Jet2:
    """Principal logarithm of a jet."""
    z = base.value
    policy.check(z)
    return base.chain(np.log(z.astype(complex)), 1.0 / z, -1.0 / z**2)


def jet_exp(base: Jet2) -> Jet2:
    e = np.exp(base.value)
    return base.chain(e, e, e)
