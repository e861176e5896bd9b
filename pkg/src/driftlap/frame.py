"""Horizontal calculus for a two-field frame, assembled from Jet2 partials.

A frame is described pointwise by

* ``coeffs``  ``A[..., j, k]``: field ``j`` is ``sum_k A[j, k] d/dx_k``
* ``dcoeffs`` ``dA[..., m, j, k] = d A[j, k] / d x_m``
* ``bracket`` ``B[..., k]``: ``[F_1, F_2] = sum_k B[k] d/dx_k``

Both the Heisenberg frame and the Grushin frame plug into the same
operator assembly, so ``Delta_p``, ``Delta_inf`` and the drift terms are
written once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jets import Jet2

TINY = 1e-300


@dataclass(frozen=True)
class Frame:
    coeffs: np.ndarray
    dcoeffs: np.ndarray

    @property
    def bracket(self) -> np.ndarray:
        A, dA = self.coeffs, self.dcoeffs
        # [F1, F2]_k = A_1m d_m A_2k - A_2m d_m A_1k
        return np.einsum("...m,...mk->...k", A[..., 0, :], dA[..., :, 1, :]) - np.einsum(
            "...m,...mk->...k", A[..., 1, :], dA[..., :, 0, :]
        )


@dataclass(frozen=True)
class Horizontal:
    """Horizontal derivatives of one function at a batch of points."""

    u: np.ndarray  # value
    Xu: np.ndarray  # S + (2,)          X_j u
    XXu: np.ndarray  # S + (2, 2)       X_i X_j u
    norm_sq: np.ndarray  # S            sum_j |X_j u|^2
    dnorm: np.ndarray  # S + (d,)       Euclidean gradient of norm_sq
    Xnorm: np.ndarray  # S + (2,)       X_i norm_sq
    bracket_u: np.ndarray  # S          [F1,F2] u
    bracket_norm: np.ndarray  # S       [F1,F2] norm_sq


def horizontal(jet: Jet2, frame: Frame) -> Horizontal:
    A, dA = frame.coeffs, frame.dcoeffs
    g, H = jet.grad, jet.hess
    Xu = np.einsum("...jk,...k->...j", A, g)
    # d_m (X_j u) = dA[m, j, k] u_k + A[j, k] u_km
    dXu = np.einsum("...mjk,...k->...mj", dA, g) + np.einsum("...jk,...km->...mj", A, H)
    XXu = np.einsum("...im,...mj->...ij", A, dXu)
    norm_sq = np.sum((Xu * np.conj(Xu)).real, axis=-1)
    dnorm = 2.0 * np.sum((np.conj(Xu)[..., None, :] * dXu).real, axis=-1)
    Xnorm = np.einsum("...im,...m->...i", A, dnorm)
    B = frame.bracket
    return Horizontal(
        u=jet.value,
        Xu=Xu,
        XXu=XXu,
        norm_sq=norm_sq,
        dnorm=dnorm,
        Xnorm=Xnorm,
        bracket_u=np.einsum("...k,...k->...", B, g),
        bracket_norm=np.einsum("...k,...k->...", B, dnorm),
    )


@dataclass(frozen=True)
class DriftTerms:
    """Summands of Delta_p u + iL [F1,F2](|grad u|^{p-2} u).

    ``scaled`` is every summand divided by ``|grad u|^{p-2}``; the relative
    residual is computed from it, which keeps large p free of overflow.
    """

    lap_terms: np.ndarray  # S + (4,): two (p-4)-power terms, two second-order terms
    drift_terms: np.ndarray  # S + (2,)
    scale: np.ndarray  # |grad u|^{p-2}

    @property
    def laplacian(self) -> np.ndarray:
        return self.scale * self.lap_terms.sum(axis=-1)

    @property
    def drift(self) -> np.ndarray:
        return self.scale * self.drift_terms.sum(axis=-1)

    @property
    def residual(self) -> np.ndarray:
        return self.laplacian + self.drift

    def relative_residual(self) -> np.ndarray:
        allterms = np.concatenate([self.lap_terms, self.drift_terms], axis=-1)
        num = np.abs(allterms.sum(axis=-1))
        den = np.maximum(np.abs(allterms).max(axis=-1), TINY)
        return num / den

    def cancellation_residual(self) -> np.ndarray:
        """|Delta_p u + drift| / max(|Delta_p u|, |drift|) with scaled terms."""
        lap = self.lap_terms.sum(axis=-1)
        dr = self.drift_terms.sum(axis=-1)
        return np.abs(lap + dr) / np.maximum(np.maximum(np.abs(lap), np.abs(dr)), TINY)


def drift_p_terms(h: Horizontal, p: float, L: float) -> DriftTerms:
    N = h.norm_sq
    half = 0.5 * (p - 2.0)
    # may overflow for very large p; the relative residuals use the scaled terms only
    with np.errstate(over="ignore"):
        scale = N**half
    lap = np.stack(
        [
            half * h.Xnorm[..., 0] * h.Xu[..., 0] / N,
            half * h.Xnorm[..., 1] * h.Xu[..., 1] / N,
            h.XXu[..., 0, 0] + 0j,
            h.XXu[..., 1, 1] + 0j,
        ],
        axis=-1,
    )
    drift = np.stack(
        [1j * L * half * h.bracket_norm * h.u / N, 1j * L * h.bracket_u],
        axis=-1,
    )
    return DriftTerms(lap, drift, scale)


def drift_inf_terms(h: Horizontal, L: float) -> DriftTerms:
    lap = np.stack(
        [h.Xnorm[..., 0] * h.Xu[..., 0], h.Xnorm[..., 1] * h.Xu[..., 1]], axis=-1
    ).astype(complex)
    drift = (1j * L * h.bracket_norm * h.u)[..., None]
    return DriftTerms(lap, drift, np.ones_like(h.norm_sq))
