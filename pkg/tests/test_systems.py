import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erf

from tsallis_mpc.systems import (InfeasibleFieldError, PlanarNavigation, Quadcopter, SingleStageObjective,
                                 generate_obstacle_field, make_system, single_stage_cost)
from tsallis_mpc.systems.obstacles import quad_field
from tsallis_mpc.systems.planar import Q_RUNNING, Q_TERMINAL
from tsallis_mpc.systems.quadcopter import GRAVITY
from tsallis_mpc.systems.single_stage import NORMALIZATION, raw_objective

EMPTY_PLANAR = PlanarNavigation(obstacles=np.zeros((0, 3)))


# ----------------------------------------------------------------- planar

def test_planar_step_examples():
    m = EMPTY_PLANAR
    np.testing.assert_array_equal(m.step(np.zeros(4), np.zeros(2)), np.zeros(4))
    np.testing.assert_allclose(m.step(np.array([0.0, 0, 1, 0]), np.zeros(2)), [0.01, 0, 1, 0])


def test_planar_crashed_state_frozen():
    m = PlanarNavigation(obstacles=np.array([[0.0, 0.0, 1.0]]))
    x = np.array([0.2, 0.3, 5.0, -2.0])
    nxt = m.step(x, np.array([100.0, 100.0]))
    np.testing.assert_array_equal(nxt, [0.2, 0.3, 0.0, 0.0])
    np.testing.assert_array_equal(m.step(nxt, np.array([-7.0, 3.0])), nxt)


def test_planar_simulate_matches_repeated_step():
    m = PlanarNavigation(field_seed=0)
    rng = np.random.default_rng(0)
    ob = m.obstacles[0]
    # start just left of an obstacle, moving toward it
    x0 = np.tile([ob[0] - ob[2] - 0.05, ob[1], 3.0, 0.0], (16, 1))
    U = rng.normal(0, 40, (16, 60, 2))
    X = m.simulate(x0, U)
    x = x0
    for t in range(60):
        x = m.step(x, U[:, t])
        np.testing.assert_allclose(X[:, t + 1], x, rtol=0, atol=1e-12)
    crashed = m.is_crashed(X)
    assert crashed.any()
    # latch: once crashed, stays crashed
    assert np.all(np.diff(crashed.astype(int), axis=1) >= 0)


def _planar_cost_by_hand(m, X, U):
    c = 0.0
    for t in range(U.shape[0]):
        e = X[t] - m.goal
        c += e @ np.diag(Q_RUNNING) @ e + U[t] @ np.diag([0.01, 0.01]) @ U[t]
    e = X[-1] - m.goal
    c += e @ np.diag(Q_TERMINAL) @ e
    return c + (10000.0 if m.is_crashed(X).any() else 0.0)


def test_planar_cost_examples():
    m = EMPTY_PLANAR
    X = np.tile(m.goal, (6, 1))
    U = np.zeros((5, 2))
    assert m.trajectory_cost(X, U) == 0.0
    X2 = X.copy()
    X2[2, 0] += 1.0
    assert m.trajectory_cost(X2, U) == pytest.approx(0.5)
    crash = PlanarNavigation(obstacles=np.array([[9.0, 9.0, 0.5]]))
    assert crash.trajectory_cost(X, U) >= 10000


def test_planar_zero_controls_from_rest_closed_form():
    m = PlanarNavigation(field_seed=0)
    T = 40
    U = np.zeros((1, T, 2))
    X = m.simulate(m.x0[None], U)
    e = m.x0 - m.goal
    expected = T * (e @ (Q_RUNNING * e)) + e @ (Q_TERMINAL * e)
    assert m.trajectory_cost(X, U)[0] == pytest.approx(expected, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_planar_cost_batched_matches_hand(seed):
    m = PlanarNavigation(field_seed=seed % 5)
    rng = np.random.default_rng(seed)
    U = rng.normal(0, 30, (3, 20, 2))
    X = m.simulate(np.tile(m.x0, (3, 1)) + rng.normal(0, 3, (3, 4)), U)
    got = m.trajectory_cost(X, U)
    for b in range(3):
        assert got[b] == pytest.approx(_planar_cost_by_hand(m, X[b], U[b]), rel=1e-12)
        assert got[b] >= 0


def test_planar_field_deterministic_and_central():
    a = generate_obstacle_field(3, "planar")
    np.testing.assert_array_equal(a, generate_obstacle_field(3, "planar"))
    assert not np.array_equal(a, generate_obstacle_field(4, "planar"))
    assert np.all(np.abs(a[:, :2]) <= 5.0)
    m = PlanarNavigation(field_seed=3)
    assert not m.is_crashed(m.x0) and not m.is_crashed(m.goal)


# ----------------------------------------------------------------- quadcopter

def test_quad_hover_and_free_fall():
    m = Quadcopter(obstacles=np.zeros((0, 2)))
    x = m.x0.copy()
    hover = m.nominal_control
    nxt = m.step(x, hover)
    assert np.max(np.abs(nxt[:3] - x[:3])) < 1e-9
    assert np.max(np.abs(nxt[7:10])) < 1e-9
    fall = m.step(x, np.zeros(4))
    assert fall[9] == pytest.approx(-GRAVITY * m.dt, rel=1e-12)


def test_quad_quaternion_norm_stays_unit():
    m = Quadcopter(obstacles=np.zeros((0, 2)), z_bounds=(-1e9, 1e9))
    rng = np.random.default_rng(0)
    x = m.x0.copy()
    for _ in range(10_000):
        x = m.step(x, np.concatenate([rng.normal(0, 2, 3), [GRAVITY]]))
        assert abs(np.linalg.norm(x[3:7]) - 1.0) < 1e-9


def test_quad_crash_latch_and_cost():
    m = Quadcopter(obstacles=np.array([[0.5, 0.0]]))
    assert m.is_crashed(m.x0)
    x = m.x0.copy()
    for _ in range(5):
        x2 = m.step(x, np.array([1.0, 1.0, 1.0, 30.0]))
        np.testing.assert_array_equal(x2[:7], x[:7])
        x = x2
        assert m.is_crashed(x)
    T, t_star = 10, 4
    free = Quadcopter(obstacles=np.zeros((0, 2)))
    X = np.tile(free.x0, (T + 1, 1))
    X[t_star:, 2] = -1.0  # below the floor from t* on
    assert free.trajectory_cost(X, np.zeros((T, 4))) >= 1e7 * (T - t_star)


def test_quad_cost_examples():
    m = Quadcopter(obstacles=np.zeros((0, 2)))
    at = m.x0.copy()
    at[:3] = m.target
    X = np.tile(at, (4, 1))
    assert m.trajectory_cost(X, np.zeros((3, 4))) == 0.0
    X[1, 0] += 1.0
    assert m.trajectory_cost(X, np.zeros((3, 4))) == pytest.approx(40.0)


def test_quad_field():
    f = generate_obstacle_field(0, "quadcopter")
    assert f.shape == (35, 2)
    np.testing.assert_array_equal(f, generate_obstacle_field(0, "quadcopter"))
    for p in ((0.0, 0.0), (25.0, 25.0)):
        assert np.min(np.linalg.norm(f - np.array(p), axis=1)) >= 1.5
    m = Quadcopter(field_seed=0)
    assert not m.is_crashed(m.x0)
    with pytest.raises(InfeasibleFieldError):
        quad_field(0, (0, 0), (1, 0), n_obstacles=5, clearance=50.0, corridor=1.0)


def test_make_system():
    assert isinstance(make_system("planar"), PlanarNavigation)
    assert isinstance(make_system("quadcopter"), Quadcopter)
    with pytest.raises(ValueError):
        make_system("franka")


# ----------------------------------------------------------------- single stage

def _grid_oracle(variant):
    u = np.linspace(-5, 5, 10**6)
    fn = erf if variant == "erf" else (lambda z: 1 - erf(z))
    g = -0.1 * np.exp(0.1 * (1.25 - 2 * u)) * fn((1.25 - u) / (np.sqrt(2) * 2.5))
    return g.min(), g.max() - g.min(), u[g.argmin()]


@pytest.mark.parametrize("variant", ["erf", "erfc"])
def test_single_stage_normalization_constants(variant):
    c, d, us = _grid_oracle(variant)
    fc, fd, fus = NORMALIZATION[variant]
    assert fc == pytest.approx(c, rel=1e-12)
    assert fd == pytest.approx(d, rel=1e-9)
    assert fus == pytest.approx(us, abs=1e-9)


@pytest.mark.parametrize("variant", ["erf", "erfc"])
def test_single_stage_range_and_minimum(variant):
    obj = SingleStageObjective(variant=variant)
    u = np.linspace(-5, 5, 200_001)
    v = obj.noiseless(u)
    assert v.min() >= -1e-9 and v.max() <= 1 + 1e-9
    assert v.min() == pytest.approx(0.0, abs=1e-9) and v.max() == pytest.approx(1.0, abs=1e-9)
    assert abs(obj(obj.argmin, 0.0)) < 1e-6


def test_single_stage_cost_noise_and_validation():
    obj = SingleStageObjective()
    assert single_stage_cost(0.3, 2.0) == pytest.approx(obj.noiseless(0.3) + 0.2)
    assert raw_objective(0.0) == pytest.approx(-0.1 * np.exp(0.125) * erf(1.25 / (np.sqrt(2) * 2.5)))
    with pytest.raises(ValueError):
        SingleStageObjective(variant="tanh")
    with pytest.raises(ValueError):
        SingleStageObjective(lam=0.3)
