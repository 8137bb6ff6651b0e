"""Fourier symbol of a constant-coin walk.

For a constant coin C the walk U = SC acts at quasi-momentum k as the 2x2 unitary
``diag(e^{ik}, e^{-ik}) C``. Everything here is closed form in the coin parameters;
functions accept scalar or array ``k`` and broadcast.

Array conventions: eigenvalues and velocities have a trailing axis of length 2
indexed by band j = 1, 2 (positions 0, 1); eigenvectors have shape ``(..., 2, 2)``
with the band on the second-to-last axis and the spinor component on the last.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coin import CoinParams, reconstruct

__all__ = [
    "AuxFunctions",
    "SymbolEigen",
    "aux",
    "symbol_at",
    "eigenvalues",
    "eigenvectors",
    "eigenvector_derivatives",
    "velocities",
    "velocity_derivatives",
    "eigenpairs",
    "velocity",
    "velocity_derivative",
    "V_hat",
    "H_hat",
]

_SIGNS = np.array([1.0, -1.0])  # (-1)^(j-1) for j = 1, 2


@dataclass(frozen=True)
class AuxFunctions:
    tau: np.ndarray
    eta: np.ndarray
    sigma_fn: np.ndarray
    theta_star: float


@dataclass(frozen=True)
class SymbolEigen:
    k: float
    lam: np.ndarray  # (2,) complex
    u: np.ndarray  # (2, 2): u[j] is the j-th eigenvector
    v: np.ndarray  # (2,) real


def aux(p: CoinParams, k) -> AuxFunctions:
    phase = np.asarray(k, dtype=float) + p.alpha - p.delta / 2.0
    tau = p.a * np.cos(phase)
    return AuxFunctions(
        tau=tau,
        eta=np.sqrt(1.0 - tau**2),
        sigma_fn=p.a * np.sin(phase),
        theta_star=p.theta,
    )


def symbol_at(p: CoinParams, k):
    """``diag(e^{ik}, e^{-ik}) C`` for scalar k (2x2) or an array of k (..., 2, 2)."""
    k = np.asarray(k, dtype=float)
    c = reconstruct(p).array
    d = np.stack([np.exp(1j * k), np.exp(-1j * k)], axis=-1)
    return d[..., :, None] * c


def eigenvalues(p: CoinParams, k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    case = p.case
    if case == "zero":
        lam = 1j * np.exp(1j * p.delta / 2) * _SIGNS
        return np.broadcast_to(lam, k.shape + (2,)).copy()
    if case == "one":
        return np.stack(
            [np.exp(1j * (k + p.alpha)), np.exp(-1j * (k + p.alpha - p.delta))], axis=-1
        )
    f = aux(p, k)
    return np.exp(1j * p.delta / 2) * (
        f.tau[..., None] + 1j * _SIGNS * f.eta[..., None]
    )


def _bk(p: CoinParams, k):
    return p.b * np.exp(1j * (k + p.beta - p.delta / 2))


def eigenvectors(p: CoinParams, k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if p.case == "one":
        return np.broadcast_to(np.eye(2, dtype=complex), k.shape + (2, 2)).copy()
    f = aux(p, k)
    eta, sig = f.eta[..., None], f.sigma_fn[..., None]
    norm = np.sqrt(eta + _SIGNS * sig) / (p.b * np.sqrt(2.0 * eta))
    out = np.empty(k.shape + (2, 2), dtype=complex)
    out[..., 0] = norm * 1j * _bk(p, k)[..., None]
    out[..., 1] = norm * (sig - _SIGNS * eta)
    return out


def eigenvector_derivatives(p: CoinParams, k) -> np.ndarray:
    """Analytic k-derivative of :func:`eigenvectors` (same layout)."""
    k = np.asarray(k, dtype=float)
    if p.case == "one":
        return np.zeros(k.shape + (2, 2), dtype=complex)
    f = aux(p, k)
    eta, sig, tau = f.eta[..., None], f.sigma_fn[..., None], f.tau[..., None]
    s = _SIGNS
    norm = np.sqrt(eta + s * sig) / (p.b * np.sqrt(2.0 * eta))
    # d/dk log(norm) = tau (s eta - sigma) / (2 eta^2)
    dnorm = norm * tau * (s * eta - sig) / (2.0 * eta**2)
    bk = _bk(p, k)[..., None]
    first, dfirst = 1j * bk, -bk
    second = sig - s * eta
    dsecond = tau * (eta - s * sig) / eta
    out = np.empty(k.shape + (2, 2), dtype=complex)
    out[..., 0] = dnorm * first + norm * dfirst
    out[..., 1] = dnorm * second + norm * dsecond
    return out


def velocities(p: CoinParams, k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    case = p.case
    if case == "zero":
        return np.zeros(k.shape + (2,))
    if case == "one":
        return np.broadcast_to(np.array([-1.0, 1.0]), k.shape + (2,)).copy()
    f = aux(p, k)
    return -_SIGNS * (f.sigma_fn / f.eta)[..., None]


def velocity_derivatives(p: CoinParams, k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if p.case != "mixed":
        return np.zeros(k.shape + (2,))
    f = aux(p, k)
    return -_SIGNS * (f.tau * p.b**2 / f.eta**3)[..., None]


def eigenpairs(p: CoinParams, k: float) -> SymbolEigen:
    k = float(k)
    return SymbolEigen(
        k=k, lam=eigenvalues(p, k), u=eigenvectors(p, k), v=velocities(p, k)
    )


def _band(j: int) -> int:
    if j not in (1, 2):
        raise ValueError(f"band index must be 1 or 2, got {j}")
    return j - 1


def velocity(p: CoinParams, k: float, j: int) -> float:
    """Group velocity ``i lambda_j'(k) / lambda_j(k)`` of band j."""
    return float(velocities(p, k)[_band(j)])


def velocity_derivative(p: CoinParams, k: float, j: int) -> float:
    return float(velocity_derivatives(p, k)[_band(j)])


def _projector_sum(weights: np.ndarray, u: np.ndarray) -> np.ndarray:
    # sum_j w_j |u_j><u_j|
    return np.einsum("...j,...ja,...jb->...ab", weights, u, u.conj())


def V_hat(p: CoinParams, k) -> np.ndarray:
    """Velocity operator at k: ``sum_j v_j(k) |u_j(k)><u_j(k)|``."""
    return _projector_sum(velocities(p, k), eigenvectors(p, k))


def H_hat(p: CoinParams, k) -> np.ndarray:
    """``-sum_j v_j'(k) |u_j(k)><u_j(k)|``."""
    return _projector_sum(-velocity_derivatives(p, k), eigenvectors(p, k))
