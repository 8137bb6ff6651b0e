"""Momentum-space operators on a periodic k-grid and their commutator identities.

Functions on [0, 2*pi) with values in C^2 are sampled at ``k_m = 2*pi*m/K``; a
vector of length 2K stores the value at k_m in entries ``2m, 2m + 1``.
Multiplication operators are block diagonal; P = -i d/dk is spectral
differentiation (diagonal in the Fourier modes n = -K/2 .. K/2 - 1).

Commutator identities hold on trigonometric polynomials, so their residuals are
measured on the band-limited subspace of modes ``|n| <= band`` (in operator norm).
Outside that subspace aliasing at the Nyquist frequency makes grid commutators
with P meaningless.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np
import scipy.linalg

from .coin import CoinParams, op_norm_2x2
from .errors import ValidationError
from .symbol import (
    eigenvector_derivatives,
    eigenvectors,
    symbol_at,
    velocities,
    velocity_derivatives,
)

__all__ = [
    "KGridOperator",
    "IdentityResiduals",
    "VirialReport",
    "grid",
    "default_band",
    "band_basis",
    "build_P",
    "multiplication",
    "build_U",
    "build_V",
    "build_H",
    "build_X",
    "build_A",
    "check_identities",
    "virial_check",
    "velocity_spectrum",
]


@dataclass(frozen=True, eq=False)
class KGridOperator:
    K: int
    matrix: np.ndarray

    def __matmul__(self, other):
        if isinstance(other, KGridOperator):
            return KGridOperator(self.K, self.matrix @ other.matrix)
        return self.matrix @ other

    def __add__(self, other):
        return KGridOperator(self.K, self.matrix + other.matrix)

    def __sub__(self, other):
        return KGridOperator(self.K, self.matrix - other.matrix)

    def __mul__(self, scalar):
        return KGridOperator(self.K, scalar * self.matrix)

    __rmul__ = __mul__

    @property
    def adjoint(self) -> "KGridOperator":
        return KGridOperator(self.K, self.matrix.conj().T)

    def hermiticity_error(self) -> float:
        return float(scipy.linalg.norm(self.matrix - self.matrix.conj().T, 2))


def _check_K(K: int, minimum: int = 32) -> int:
    if int(K) != K or K < minimum or (int(K) & (int(K) - 1)):
        raise ValidationError(f"grid size K must be a power of two >= {minimum}, got {K}")
    return int(K)


def grid(K: int) -> np.ndarray:
    return 2 * np.pi * np.arange(K) / K


def default_band(K: int) -> int:
    return min(K // 8, 32)


def build_P(K: int) -> KGridOperator:
    """Spectral derivative ``-i d/dk`` on the periodic grid (Hermitian).

    Closed-form entries of ``sum_n n |e_n><e_n|`` over modes n = -K/2 .. K/2 - 1:
    the symmetric differentiation matrix plus the Nyquist term.
    """
    K = _check_K(K)
    j = np.subtract.outer(np.arange(K), np.arange(K))
    sgn = np.where(j % 2 == 0, 1.0, -1.0)
    off = j != 0
    cot = np.zeros((K, K))
    cot[off] = 1.0 / np.tan(np.pi * j[off] / K)
    p = -0.5j * sgn * cot - 0.5 * sgn
    return KGridOperator(K, np.kron(p, np.eye(2)))


def multiplication(blocks: np.ndarray) -> KGridOperator:
    """Block-diagonal operator from a stack of ``(K, 2, 2)`` matrices."""
    K = len(blocks)
    return KGridOperator(K, scipy.linalg.block_diag(*blocks))


def _projectors(u: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return np.einsum("kj,kja,kjb->kab", weights, u, u.conj())


def build_U(p: CoinParams, K: int) -> KGridOperator:
    return multiplication(symbol_at(p, grid(_check_K(K))))


def build_V(p: CoinParams, K: int) -> KGridOperator:
    k = grid(_check_K(K))
    return multiplication(_projectors(eigenvectors(p, k), velocities(p, k)))


def build_H(p: CoinParams, K: int) -> KGridOperator:
    k = grid(_check_K(K))
    return multiplication(_projectors(eigenvectors(p, k), -velocity_derivatives(p, k)))


def build_X(p: CoinParams, K: int) -> KGridOperator:
    """``-sum_j (|u_j><u_j| P - i |u_j><u_j'|)`` with analytic u_j'."""
    K = _check_K(K)
    k = grid(K)
    u = eigenvectors(p, k)
    du = eigenvector_derivatives(p, k)
    proj = np.einsum("kja,kjb->kab", u, u.conj())
    cross = np.einsum("kja,kjb->kab", u, du.conj())
    P = build_P(K).matrix
    proj_P = np.einsum("kab,kbc->kac", proj, P.reshape(K, 2, 2 * K)).reshape(2 * K, 2 * K)
    x = -proj_P + 1j * scipy.linalg.block_diag(*cross)
    return KGridOperator(K, x)


def build_A(p: CoinParams, K: int) -> KGridOperator:
    """Conjugate operator ``(X V + V X) / 2``."""
    X = build_X(p, K)
    V = build_V(p, K)
    return (X @ V + V @ X) * 0.5


def band_basis(K: int, band: int) -> np.ndarray:
    """Orthonormal columns spanning C^2-valued trigonometric polynomials of degree <= band."""
    if not 0 <= band < K // 2:
        raise ValidationError(f"band must lie in [0, K/2), got {band}")
    k = grid(K)
    n = np.arange(-band, band + 1)
    f = np.exp(1j * np.outer(k, n)) / np.sqrt(K)
    return np.kron(f, np.eye(2))


@dataclass(frozen=True)
class IdentityResiduals:
    """Operator-norm residuals of the symbol-side identities.

    * ``r_XV_H``: ``[iX, V] - H``
    * ``r_XU_UV``: ``[X, U] - U V``
    * ``r_A_V2``: ``U^{-1}[A, U] - V^2``
    * ``r_commute_UV``, ``r_commute_UH``: ``[U, V]``, ``[U, H]``
    * ``r_norm_u``: ``max_k ||sum_j |u_j><u_j| - 1||`` (normalization and orthogonality)
    """

    r_XV_H: float
    r_XU_UV: float
    r_A_V2: float
    r_commute_UV: float
    r_commute_UH: float
    r_norm_u: float
    K: int = 0
    band: int = 0

    def residuals(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name.startswith("r_")}

    def max(self) -> float:
        return max(self.residuals().values())


def _opnorm(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(scipy.linalg.svdvals(m)[0])


def _apply_blocks(blocks: np.ndarray, y: np.ndarray) -> np.ndarray:
    K = len(blocks)
    return np.einsum("kab,kbc->kac", blocks, y.reshape(K, 2, -1)).reshape(2 * K, -1)


def check_identities(p: CoinParams, K: int = 256, band: int | None = None) -> IdentityResiduals:
    """Residuals of the commutator identities on the band-limited subspace.

    Multiplication operators commute pointwise, so ``[U, V]`` and ``[U, H]`` are
    measured on the whole grid space (their norm is the largest 2x2 block norm).
    """
    K = _check_K(K)
    band = default_band(K) if band is None else int(band)
    k = grid(K)
    u = eigenvectors(p, k)
    ub = symbol_at(p, k)
    vb = _projectors(u, velocities(p, k))
    hb = _projectors(u, -velocity_derivatives(p, k))
    uinv = np.conj(np.swapaxes(ub, 1, 2))
    X = build_X(p, K).matrix

    def U(y):
        return _apply_blocks(ub, y)

    def V(y):
        return _apply_blocks(vb, y)

    def A(y):
        return 0.5 * (X @ V(y) + V(X @ y))

    B = band_basis(K, band)
    XB, VB, UB = X @ B, V(B), U(B)
    r1 = 1j * (X @ VB - V(XB)) - _apply_blocks(hb, B)
    r2 = (X @ UB - U(XB)) - U(VB)
    r3 = _apply_blocks(uinv, A(UB) - U(A(B))) - V(VB)

    resolution = np.einsum("kja,kjb->kab", u, u.conj()) - np.eye(2)
    return IdentityResiduals(
        r_XV_H=_opnorm(r1),
        r_XU_UV=_opnorm(r2),
        r_A_V2=_opnorm(r3),
        r_commute_UV=float(np.max(op_norm_2x2(ub @ vb - vb @ ub))),
        r_commute_UH=float(np.max(op_norm_2x2(ub @ hb - hb @ ub))),
        r_norm_u=float(np.max(op_norm_2x2(resolution))),
        K=K,
        band=band,
    )


@dataclass(frozen=True)
class VirialReport:
    max_pairing: float
    max_eigen_residual: float
    vectors: int


def virial_check(p: CoinParams, K: int = 128, band: int | None = None) -> VirialReport:
    """Expectation of ``U^{-1}[A, U]`` in grid eigenvectors of U (only for a = 0).

    The eigenvectors used are ``e^{ink} u_j(k)`` for ``|n| <= band``.
    """
    if p.case != "zero":
        raise ValidationError(
            "virial check needs a = 0: for a > 0 the constant-coin walk has no eigenvectors"
        )
    K = _check_K(K)
    band = default_band(K) if band is None else int(band)
    k = grid(K)
    u = eigenvectors(p, k)
    lam = 1j * np.exp(1j * p.delta / 2) * np.array([1.0, -1.0])
    U = build_U(p, K).matrix
    A = build_A(p, K).matrix
    comm = U.conj().T @ (A @ U - U @ A)
    pairings, resid = [], []
    for n in range(-band, band + 1):
        phase = np.exp(1j * n * k) / np.sqrt(K)
        for j in range(2):
            phi = (phase[:, None] * u[:, j, :]).reshape(-1)
            resid.append(np.linalg.norm(U @ phi - lam[j] * phi))
            pairings.append(abs(np.vdot(phi, comm @ phi)))
    return VirialReport(float(max(pairings)), float(max(resid)), len(pairings))


def velocity_spectrum(p: CoinParams, K: int) -> np.ndarray:
    """All eigenvalues of the velocity operator over the grid, sorted."""
    k = grid(_check_K(K))
    return np.sort(velocities(p, k).reshape(-1))
