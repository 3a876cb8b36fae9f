import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coinwalk.coins import coin_from_theta, grover_coin
from coinwalk.walk import (
    CHIRALITIES,
    WalkState,
    chirality_index,
    coords_of,
    evolve,
    index_of,
    initial_state,
    position_distribution,
    probability_at,
    step,
    time_averaged_chirality_profile,
    time_averaged_probability,
)


def test_chirality_order():
    assert [chirality_index(S) for S in CHIRALITIES] == [1, 2, 3, 4]


def test_index_examples():
    assert index_of("R", -2, -2, 5) == 1
    assert index_of("D", 2, 2, 5) == 100
    assert index_of("U", 0, 0, 5) == 51


def test_index_bijection_n5():
    seen = set()
    for S in CHIRALITIES:
        for x in range(-2, 3):
            for y in range(-2, 3):
                w = index_of(S, x, y, 5)
                assert coords_of(w, 5) == (S, x, y)
                seen.add(w)
    assert seen == set(range(1, 101))


@given(st.sampled_from([3, 5, 7, 9]), st.integers(0, 3), st.data())
@settings(max_examples=60, deadline=None)
def test_index_round_trip(N, s, data):
    half = (N - 1) // 2
    x = data.draw(st.integers(-half, half))
    y = data.draw(st.integers(-half, half))
    S = CHIRALITIES[s]
    assert coords_of(index_of(S, x, y, N), N) == (S, x, y)


def test_index_validation():
    with pytest.raises(ValueError):
        index_of("R", 3, 0, 5)
    with pytest.raises(ValueError):
        index_of("R", 0, 0, 4)
    with pytest.raises(ValueError):
        coords_of(101, 5)


def test_initial_state_positions():
    s = initial_state(5, "R")
    assert s.to_vector()[48] == 1.0  # index 49, 0-based 48
    assert s.norm() == 1.0
    s = initial_state(5, "D")
    assert s.to_vector()[51] == 1.0
    assert abs(s.amplitude("D", 0, 0)) == 1.0


def test_vector_round_trip():
    rng = np.random.default_rng(0)
    v = rng.normal(size=100) + 1j * rng.normal(size=100)
    st5 = WalkState.from_vector(v, 5)
    assert np.abs(st5.to_vector() - v).max() == 0


def test_identity_coin_pure_translation():
    s = initial_state(5, "R")
    s1 = step(s, np.eye(4))
    assert abs(s1.amplitude("R", 1, 0) - 1.0) < 1e-15
    # after N steps the walker recurs exactly
    sN = evolve(s, np.eye(4), 5)
    assert np.abs(sN.amps - s.amps).max() < 1e-12


def test_grover_one_step_amplitudes():
    G = grover_coin()
    s1 = step(initial_state(5, "R"), G)
    assert s1.amplitude("R", 1, 0) == pytest.approx(-0.5)
    assert s1.amplitude("L", -1, 0) == pytest.approx(0.5)
    assert s1.amplitude("U", 0, 1) == pytest.approx(0.5)
    assert s1.amplitude("D", 0, -1) == pytest.approx(0.5)
    assert probability_at(s1, 0, 0) == 0.0
    for x, y in [(1, 0), (-1, 0), (0, 1), (0, -1)]:
        assert probability_at(s1, x, y) == pytest.approx(0.25)


def test_probabilities_normalized_every_step():
    c = coin_from_theta("p23z1", 1.1)
    s = initial_state(7, "U")
    for _ in range(25):
        s = step(s, c)
        assert position_distribution(s).sum() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("family", ["p34x1", "p24y1", "p23z1", "x3"])
@pytest.mark.parametrize("N", [3, 5, 7, 9])
def test_unitarity_long_run(family, N):
    c = coin_from_theta(family, -1.3)
    s = evolve(initial_state(N, "L"), c, 400)
    assert abs(s.norm() - 1.0) < 1e-12


def test_translation_covariance():
    c = coin_from_theta("p24y1", 0.8)
    s = initial_state(5, "R")
    rolled = WalkState(5, np.roll(s.amps, (1, 2), axis=(1, 2)))
    lhs = evolve(rolled, c, 9).amps
    rhs = np.roll(evolve(s, c, 9).amps, (1, 2), axis=(1, 2))
    assert np.abs(lhs - rhs).max() < 1e-12


def test_degenerate_coin_rejected():
    c = coin_from_theta("p24y1", math.pi)
    with pytest.raises(ValueError):
        step(initial_state(5, "R"), c)


def test_nonorthogonal_coin_warns():
    s = initial_state(3, "R")
    with pytest.warns(UserWarning):
        step(s, np.eye(4) * 1.001)


def test_time_average_t1_is_origin_probability():
    c = coin_from_theta("x3", 2.2)
    assert time_averaged_probability(c, 5, "R", 0, 0, 1) == 1.0


def test_x3_permutation_coin_cycles():
    # theta = 0 makes the coin the (34) permutation: R drifts right with
    # period N, U bounces with period 2
    c = coin_from_theta("x3", 0.0)
    assert time_averaged_probability(c, 5, "R", 0, 0, 2000) == pytest.approx(1 / 5)
    assert time_averaged_probability(c, 5, "U", 0, 0, 2000) == pytest.approx(1 / 2)


def test_chirality_profile_sums_to_position_average():
    c = coin_from_theta("p34x1", 0.5)
    prof = time_averaged_chirality_profile(c, 5, "R", 300)
    total = time_averaged_probability(c, 5, "R", 0, 0, 300)
    assert prof.sum() == pytest.approx(total, abs=1e-14)


def test_grover_time_average_matches_spectral_value():
    # the Grover point has a triply degenerate (0,0) block; the grouped
    # spectral average must still match direct evolution
    from coinwalk.coins import grover_coin
    from coinwalk.spectral import finite_N_pbar_matrix
    g = grover_coin()
    T = 2000
    emp = time_averaged_chirality_profile(g, 5, "R", T)
    exact = finite_N_pbar_matrix(g, 5)[:, 0]
    assert np.abs(emp - exact).max() < 5.0 / T


@pytest.mark.slow
def test_unitarity_ten_thousand_steps():
    c = coin_from_theta("p23z1", 0.9)
    s = evolve(initial_state(9, "D"), c, 10_000)
    assert abs(s.norm() - 1.0) < 1e-10
