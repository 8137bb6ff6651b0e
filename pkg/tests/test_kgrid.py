import math

import numpy as np
import pytest

from anisowalk.coin import CoinParams, hadamard, parametrize
from anisowalk.errors import ValidationError
from anisowalk.kgrid import (
    band_basis,
    build_A,
    build_H,
    build_P,
    build_U,
    build_V,
    build_X,
    check_identities,
    default_band,
    grid,
    velocity_spectrum,
    virial_check,
)
from anisowalk.symbol import eigenvectors

H = parametrize(hadamard())
A0 = CoinParams(0.0, 1.0, 0.0, 0.3, 0.0)
A1 = CoinParams.from_a(1.0, 0.4, 0.0, 0.9)


def spinor(f):
    return np.kron(f, [1.0, 0.0])


def fft_derivative(values):
    """Oracle: -i d/dk via FFT for a scalar function sampled on the grid."""
    K = len(values)
    n = np.fft.fftfreq(K, 1.0 / K)
    n[K // 2] = -K // 2  # Nyquist mode carries frequency -K/2
    return np.fft.ifft(n * np.fft.fft(values))


def test_P_examples():
    K = 64
    P = build_P(K)
    k = grid(K)
    assert np.abs(P @ np.ones(2 * K)).max() < 1e-13
    np.testing.assert_allclose(P @ spinor(np.exp(3j * k)), 3 * spinor(np.exp(3j * k)), atol=1e-12)
    np.testing.assert_allclose(P @ spinor(np.sin(k)), spinor(-1j * np.cos(k)), atol=1e-13)
    assert P.hermiticity_error() < 1e-12


def test_P_matches_fft_oracle():
    K = 32
    rng = np.random.default_rng(0)
    f = rng.normal(size=K) + 1j * rng.normal(size=K)
    np.testing.assert_allclose(build_P(K) @ spinor(f), spinor(fft_derivative(f)), atol=1e-12)


def test_grid_size_validation():
    for bad in (16, 100, 48):
        with pytest.raises(ValidationError):
            build_P(bad)


def test_U_blockwise_unitary_V_H_hermitian():
    K = 64
    U, V, Hh = build_U(H, K).matrix, build_V(H, K).matrix, build_H(H, K).matrix
    assert np.abs(U.conj().T @ U - np.eye(2 * K)).max() < 1e-13
    assert np.abs(V - V.conj().T).max() < 1e-14
    assert np.abs(Hh - Hh.conj().T).max() < 1e-13


def test_X_for_a_one_is_minus_P():
    K = 64
    np.testing.assert_allclose(build_X(A1, K).matrix, -build_P(K).matrix, atol=1e-14)


def test_X_hermitian():
    for p in (H, A0, CoinParams.from_a(0.4, 1.0, 2.0, 0.5)):
        assert build_X(p, 128).hermiticity_error() < 1e-8


def test_X_a_zero_exact_against_fft_oracle():
    # for a = 0 the eigenvectors contain only Fourier modes 0 and +-1, so an FFT
    # evaluation of -sum_j |u_j><u_j| P + i sum_j |u_j><u_j'| is exact on low modes
    K = 64
    k = grid(K)
    u = eigenvectors(A0, k)
    du = np.stack([[1j * fft_derivative(u[:, j, c]) for c in range(2)] for j in range(2)])
    du = np.transpose(du, (2, 0, 1))
    phi = np.stack([np.exp(2j * k) * u[:, 0, 0] + np.cos(k) * u[:, 1, 0],
                    np.exp(2j * k) * u[:, 0, 1] + np.cos(k) * u[:, 1, 1]], axis=1)
    p_phi = np.stack([fft_derivative(phi[:, c]) for c in range(2)], axis=1)
    proj = np.einsum("kja,kjb->kab", u, u.conj())
    conn = np.einsum("kja,kjb->kab", u, du.conj())
    expected = -np.einsum("kab,kb->ka", proj, p_phi) + 1j * np.einsum("kab,kb->ka", conn, phi)
    got = build_X(A0, K) @ phi.reshape(-1)
    assert np.abs(got - expected.reshape(-1)).max() < 1e-12


def test_A_examples():
    K = 64
    assert np.all(build_A(A0, K).matrix == 0)
    P = build_P(K).matrix
    D = np.kron(np.eye(K), np.diag([-1.0, 1.0]))
    np.testing.assert_allclose(build_A(A1, K).matrix, -0.5 * (P @ D + D @ P), atol=1e-13)
    assert build_A(H, 256).hermiticity_error() < 1e-8


def test_band_basis_orthonormal():
    B = band_basis(64, 8)
    np.testing.assert_allclose(B.conj().T @ B, np.eye(34), atol=1e-13)
    with pytest.raises(ValidationError):
        band_basis(64, 32)


def test_identities_a_zero():
    r = check_identities(A0, 256)
    assert r.max() <= 1e-12


def test_identities_a_one():
    r = check_identities(A1, 128)
    assert r.r_XU_UV <= 1e-10
    assert r.max() <= 1e-10


@pytest.mark.parametrize("p", [H, CoinParams.from_a(0.3, 0.5, -1.0, 2.0),
                               CoinParams.from_a(0.9, -2.0, 0.7, -0.4)])
def test_identities_generic(p):
    r = check_identities(p, 256)
    assert r.max() <= 1e-8, r.residuals()
    assert len(r.residuals()) == 6 and r.K == 256 and r.band == default_band(256)


def test_identities_converge_with_K():
    p = CoinParams.from_a(0.95, 0.0, 0.0, 1.0)
    r128, r256 = check_identities(p, 128, band=16), check_identities(p, 256, band=16)
    assert r256.r_XV_H < r128.r_XV_H


def test_identity_residuals_detect_broken_operator(monkeypatch):
    # dropping the connection term in X must show up as a large residual
    import anisowalk.kgrid as kg

    monkeypatch.setattr(kg, "eigenvector_derivatives", lambda p, k: 0 * eigenvectors(p, k))
    assert kg.check_identities(H, 128).r_XV_H > 1e-3


def test_virial():
    for delta in (0.0, math.pi / 3):
        rep = virial_check(CoinParams(0.0, 1.0, 0.0, 0.0, delta), 128)
        assert rep.max_pairing <= 1e-12 and rep.max_eigen_residual < 1e-12
        assert rep.vectors == 2 * (2 * default_band(128) + 1)
    with pytest.raises(ValidationError):
        virial_check(H, 128)


def test_velocity_spectrum_fills_interval():
    a = 0.6
    K = 256
    v = velocity_spectrum(CoinParams.from_a(a, 0.3, 0.2, 1.1), K)
    assert v.max() <= a + 1e-12 and v.min() >= -a - 1e-12
    assert a - v.max() <= 2 * math.pi / K and v.min() + a <= 2 * math.pi / K
    assert np.diff(v).max() <= 2 * math.pi * a / K * 2
