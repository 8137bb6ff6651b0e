import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anisowalk.coin import CoinMatrix, constant, hadamard, split_step_profile, two_phase
from anisowalk.errors import ValidationError
from anisowalk.lattice import (
    WalkState,
    apply_coin,
    apply_shift,
    evolve,
    interface_defect,
    join,
    observe,
    parse_initial,
    split,
    step,
    velocity_histogram,
)
from oracles import dense_walk_matrix

R2 = 1 / math.sqrt(2)
HAD = constant(hadamard())
IDENT = constant(CoinMatrix.from_array(np.eye(2)))
UP, DOWN = (1, 0), (0, 1)


def random_state(rng, lo=-6, n=12):
    amps = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    return WalkState(lo, amps / np.linalg.norm(amps))


states = st.integers(0, 2**32 - 1).map(lambda s: random_state(np.random.default_rng(s)))


def test_shift_directions():
    assert apply_shift(WalkState.delta(0, UP)).equals(WalkState.delta(-1, UP))
    assert apply_shift(WalkState.delta(0, DOWN)).equals(WalkState.delta(1, DOWN))


@settings(max_examples=50, deadline=None)
@given(states)
def test_shift_permutes_amplitudes(s):
    def nonzero(w):
        v = w.amplitudes.ravel()
        return np.sort_complex(v[v != 0])

    assert np.array_equal(nonzero(apply_shift(s)), nonzero(s))
    assert apply_shift(s).norm() == pytest.approx(s.norm(), rel=1e-15)


def test_coin_examples():
    s = WalkState.delta(0, UP)
    assert apply_coin(IDENT, s).equals(s)
    np.testing.assert_allclose(apply_coin(HAD, s).window(0, 1), [[R2, R2]], atol=1e-16)
    f = two_phase(0, math.pi, with_defect=True)
    assert apply_coin(f, WalkState.delta(0, DOWN)).equals(WalkState.delta(0, (0, -1)))


def test_hadamard_one_step():
    out = step(HAD, WalkState.delta(0, UP))
    np.testing.assert_allclose(out.window(-1, 2), [[R2, 0], [0, 0], [0, R2]], atol=1e-16)
    rep = observe(out)
    assert rep.distribution[rep.positions == -1][0] == pytest.approx(0.5)
    assert rep.distribution[rep.positions == 1][0] == pytest.approx(0.5)


def test_zero_steps_is_identity():
    s = random_state(np.random.default_rng(0))
    assert evolve(HAD, s, 0).equals(s)
    with pytest.raises(ValidationError):
        evolve(HAD, s, -1)


def test_unitarity_drift_1000_steps():
    out = evolve(HAD, WalkState.delta(0, UP), 1000)
    assert abs(out.norm() - 1) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 15))
def test_evolve_matches_dense_oracle(seed, t):
    rng = np.random.default_rng(seed)
    f = split_step_profile(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0.5, 4))
    s = random_state(rng, lo=-3, n=6)
    lo, hi = -3 - t - 1, 3 + t + 1
    U = dense_walk_matrix(f.coins(np.arange(lo, hi)), lo)
    vec = s.window(lo, hi).reshape(-1)
    for _ in range(t):
        vec = U @ vec
    got = evolve(f, s, t).window(lo, hi).reshape(-1)
    assert np.abs(got - vec).max() <= 1e-12


def test_evolve_equals_repeated_step():
    f = two_phase(0.4, 2.0, with_defect=True)
    s = WalkState.delta(2, (R2, 1j * R2))
    a = evolve(f, s, 7)
    b = s
    for _ in range(7):
        b = apply_shift(apply_coin(f, b))
    assert (a - b).norm() < 1e-15


def test_light_cone():
    out = evolve(HAD, WalkState.delta(0, UP), 20)
    lo, hi = out.support()
    assert lo >= -20 and hi <= 20


def test_observe_fresh_delta():
    rep = observe(WalkState.delta(0, UP))
    assert rep.mean_position == 0 and rep.second_moment == 0 and rep.norm == 1


def test_hadamard_ballistic_spread():
    rep = observe(evolve(HAD, WalkState.delta(0, (R2, 1j * R2)), 400))
    # symmetric initial spinor: mean near 0; spread grows linearly
    assert abs(rep.mean_position) < 1.0
    sigma = math.sqrt(rep.second_moment) / 400
    assert 0.4 < sigma < R2


def test_velocity_histogram():
    h = velocity_histogram(HAD, WalkState.delta(0, UP), 200, bins=40)
    assert h.mass.sum() == pytest.approx(1.0, abs=1e-12)
    assert h.max_speed <= 1.0
    assert len(h.centers) == 40
    with pytest.raises(ValidationError):
        velocity_histogram(HAD, WalkState.delta(0, UP), 0)


def test_split_example():
    left, right = split(WalkState.delta(0, UP))
    assert left.norm() == 0 and right.equals(WalkState.delta(0, UP))


@settings(max_examples=100, deadline=None)
@given(states)
def test_join_split_identity(s):
    assert join(split(s)).equals(s)


@settings(max_examples=100, deadline=None)
@given(states, states)
def test_split_join_is_projection(a, b):
    left, right = split(join((a, b)))
    xl, xr = a.positions, b.positions
    assert left.equals(WalkState(a.offset, np.where((xl < 0)[:, None], a.amplitudes, 0)))
    assert right.equals(WalkState(b.offset, np.where((xr >= 0)[:, None], b.amplitudes, 0)))


def test_interface_defect_is_local():
    f = two_phase(0.0, math.pi, with_defect=True)
    rng = np.random.default_rng(3)
    far = (random_state(rng, lo=-40, n=10), random_state(rng, lo=30, n=10))
    assert interface_defect(f, far).norm() == 0
    near = (random_state(rng, lo=-5, n=10), random_state(rng, lo=-5, n=10))
    d = interface_defect(f, near)
    lo, hi = d.support()
    assert -3 <= lo and hi <= 3


def test_parse_initial():
    s = parse_initial("0:1,0; 2:0.5,0.5j")
    np.testing.assert_allclose(s.window(0, 3), [[1, 0], [0, 0], [0.5, 0.5j]])
    for bad in ("", "x:1,0", "0:1"):
        with pytest.raises(ValidationError):
            parse_initial(bad)


def test_state_validation_and_trim():
    with pytest.raises(ValidationError):
        WalkState(0, np.zeros((3, 3)))
    s = WalkState(-10, np.zeros((20, 2)))
    assert s.support() is None and s.norm() == 0
    t = WalkState(0, [[0, 0], [0, 0], [1, 0], [0, 0], [0, 0]])
    assert t.support() == (2, 2) and len(t.amplitudes) <= 3
    assert not t.amplitudes.flags.writeable
