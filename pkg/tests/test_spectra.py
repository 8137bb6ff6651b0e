import math

import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from anisowalk.coin import CoinParams, hadamard, parametrize
from anisowalk.spectra import (
    INF,
    TWO_PI,
    SpectralArcs,
    angular_distance,
    arcs,
    contains,
    essential_spectrum,
    gaps,
    mourre_lower_bound,
    rho_tilde_asymptotic,
    thresholds,
    union,
)
from oracles import hausdorff, rho_oracle, sample_arcs, scan_phases

PI = math.pi
H = parametrize(hadamard())
ONE = CoinParams.from_a(1.0)

coin_params = st.builds(
    CoinParams.from_a,
    st.floats(0.02, 0.98),
    st.floats(-PI, PI),
    st.floats(-PI, PI),
    st.floats(-PI, PI),
)


def assert_arcs(s, expected):
    assert len(s.arcs) == len(expected)
    for (a, la), (b, lb) in zip(s.arcs, expected):
        assert angular_distance(a, b) < 1e-12
        assert la == pytest.approx(lb, abs=1e-12)


def test_hadamard_arcs():
    assert_arcs(arcs(H), [(3 * PI / 4, PI / 2), (7 * PI / 4, PI / 2)])


def test_case_coverage():
    s = arcs(CoinParams(0.0, 1.0, 0, 0, 0))
    assert s.arcs == () and s.points == (PI / 2, 3 * PI / 2)
    assert arcs(ONE).is_full_circle


@settings(max_examples=20, deadline=None)
@given(coin_params)
def test_arcs_match_brute_force_scan(p):
    assert hausdorff(sample_arcs(arcs(p)), scan_phases(p, 4000)) < 2e-3


@pytest.mark.parametrize("gamma, inside", [(PI, True), (PI / 4, True), (PI / 2, False)])
def test_contains_hadamard(gamma, inside):
    assert contains(arcs(H), gamma) is inside


def test_contains_vectorized():
    g = np.array([PI, PI / 2, 0.0])
    np.testing.assert_array_equal(contains(arcs(H), g), [True, False, True])


def test_essential_spectrum_examples():
    assert essential_spectrum(H, H) == arcs(H)
    assert essential_spectrum(H, ONE).is_full_circle
    right = CoinParams.from_a(0.5, 0, 0, PI)
    ess = essential_spectrum(H, right)
    g = TWO_PI * np.arange(10_000) / 10_000
    oracle = contains(arcs(H), g) | contains(arcs(right), g)
    np.testing.assert_array_equal(contains(ess, g), oracle)


@settings(max_examples=50, deadline=None)
@given(coin_params, coin_params)
def test_union_agrees_with_pointwise_or(p, q):
    ess = essential_spectrum(p, q)
    g = TWO_PI * (np.arange(3001) + 0.5) / 3001
    oracle = contains(arcs(p), g) | contains(arcs(q), g)
    got = contains(ess, g)
    # disagreements may only sit within merge tolerance of an endpoint
    bad = g[got != oracle]
    if bad.size:
        ends = np.array(arcs(p).endpoints() + arcs(q).endpoints())
        assert angular_distance(bad[:, None], ends[None, :]).min(axis=1).max() < 1e-9
    assert ess.total_length <= TWO_PI + 1e-12


def test_union_drops_points_inside_arcs():
    s = union(SpectralArcs(arcs=((0.0, 1.0),)), SpectralArcs(points=(0.5, 2.0)))
    assert s.points == (2.0,)


def test_union_rejoins_wrapping_arc():
    s = union(SpectralArcs(arcs=((6.0, 0.5),)), SpectralArcs(arcs=((0.1, 0.3),)))
    assert len(s.arcs) == 1
    assert s.arcs[0][0] == pytest.approx(6.0)
    assert s.arcs[0][1] == pytest.approx(0.4 + TWO_PI - 6.0)


def test_thresholds_examples():
    np.testing.assert_allclose(thresholds(H, H).angles, [PI / 4, 3 * PI / 4, 5 * PI / 4, 7 * PI / 4],
                               atol=1e-12)
    assert len(thresholds(ONE, ONE)) == 0
    t = thresholds(CoinParams.from_a(0.3, 0, 0, 0.4), CoinParams.from_a(0.8, 0, 0, 2.1))
    assert len(t) == 8


def test_threshold_tags_merge():
    t = thresholds(H, H)
    assert all(sides == ("l", "r") for _, sides in t.points)
    assert t.distance(PI) == pytest.approx(PI / 4)


def test_threshold_distance_empty_is_inf():
    assert thresholds(ONE, ONE).distance(1.0) == math.inf


def test_rho_examples():
    assert rho_tilde_asymptotic(ONE, 0.3) == 1.0
    assert rho_tilde_asymptotic(H, PI) == pytest.approx(0.5, abs=1e-15)
    assert rho_oracle(H, PI) == pytest.approx(0.5, abs=1e-6)
    assert rho_tilde_asymptotic(H, PI / 4) == 0.0
    assert rho_tilde_asymptotic(H, PI / 2) is INF


def test_rho_point_spectrum():
    p = CoinParams(0.0, 1.0, 0, 0, 0)
    assert rho_tilde_asymptotic(p, PI / 2) == 0.0
    assert rho_tilde_asymptotic(p, 1.0) is INF


@settings(max_examples=15, deadline=None)
@given(coin_params, st.floats(0.05, 0.95))
@example(CoinParams.from_a(0.5, 0.0, 0.0, 0.0), 0.5)  # scan grid hits the root exactly
def test_rho_matches_grid_scan(p, frac):
    start, length = arcs(p).arcs[0]
    theta = start + frac * length
    assert rho_tilde_asymptotic(p, theta) == pytest.approx(rho_oracle(p, theta), abs=1e-6)


def test_mourre_lower_bound_examples():
    assert mourre_lower_bound(H, H, PI) == pytest.approx(0.5)
    assert mourre_lower_bound(H, H, PI / 4) == 0.0
    assert mourre_lower_bound(H, ONE, PI) == pytest.approx(0.5)
    assert mourre_lower_bound(H, H, PI / 2) is INF


def test_infinite_ordering():
    assert INF > 1e300 and not INF < 5.0 and min(INF, 2.0) == 2.0
    assert str(INF) == "inf" and INF == INF and INF != math.inf


def test_gaps():
    assert gaps(arcs(ONE)).arcs == ()
    assert_arcs(gaps(arcs(H)), [(PI / 4, PI / 2), (5 * PI / 4, PI / 2)])
    assert gaps(arcs(CoinParams(0.0, 1.0, 0, 0, 0))).is_full_circle
