import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsallis_mpc.rollout import (NoiseConfig, compute_likelihoods, elite_count, normalize_costs, rollout_batch,
                                 stream, weigh_batch)
from tsallis_mpc.systems import PlanarNavigation
from tsallis_mpc.systems.base import SystemModel
from tsallis_mpc.systems.planar import Q_RUNNING, Q_TERMINAL
from tsallis_mpc.transforms import Cem, EliteFraction, EliteThreshold, Mppi, Tsallis

MODEL = PlanarNavigation(field_seed=0)


class Exploding(SystemModel):
    """1-D system that overflows for large controls."""

    state_dim = 1
    control_dim = 1
    dt = 1.0
    x0 = np.zeros(1)

    def step(self, x, u):
        return x * 1e200 + u

    def is_crashed(self, x):
        return np.zeros(np.shape(x)[:-1], dtype=bool)

    def trajectory_cost(self, X, U):
        return np.sum(X[..., 0] ** 2, axis=-1)

    def goal_distance(self, x):
        return np.abs(x[..., 0])


def _x0(N, M, model=MODEL):
    return np.broadcast_to(model.x0, (N, M, model.state_dim))


def test_noise_free_columns_identical():
    rng = np.random.default_rng(0)
    U = rng.normal(0, 10, (8, 20, 2))
    eps = NoiseConfig(0.0).draw(0, 0, 0, (8, 2, 20, 2))
    c = rollout_batch(MODEL, _x0(8, 2), U, eps)
    np.testing.assert_array_equal(c[:, 0], c[:, 1])


def test_rollouts_are_order_insensitive():
    rng = np.random.default_rng(1)
    U = rng.normal(0, 10, (8, 20, 2))
    eps = NoiseConfig(1.0).draw(0, 0, 0, (8, 3, 20, 2))
    perm = rng.permutation(8)
    a = rollout_batch(MODEL, _x0(8, 3), U, eps)
    b = rollout_batch(MODEL, _x0(8, 3), U[perm], eps[perm])
    np.testing.assert_array_equal(a[perm], b)


def test_zero_controls_from_rest_cost():
    T = 30
    c = rollout_batch(MODEL, _x0(1, 1), np.zeros((1, T, 2)), np.zeros((1, 1, T, 2)))
    e = MODEL.x0 - MODEL.goal
    assert c[0, 0] == pytest.approx(T * (e @ (Q_RUNNING * e)) + e @ (Q_TERMINAL * e), rel=1e-14)


def test_non_finite_rollouts_cost_inf_and_normalize_to_one():
    m = Exploding()
    U = np.array([[[0.0], [0.0]], [[1.0], [1.0]]])
    x0 = np.array([[[0.0]], [[1.0]]])
    c = rollout_batch(m, x0, U, np.zeros((2, 1, 2, 1)))
    assert np.isfinite(c[0, 0]) and c[1, 0] == np.inf
    norm, flat = normalize_costs(np.array([[1.0, 3.0], [np.inf, 2.0]]))
    np.testing.assert_array_equal(norm, [[0.0, 1.0], [1.0, 0.5]])
    assert not flat


def test_rollout_dimension_check():
    with pytest.raises(ValueError):
        rollout_batch(MODEL, _x0(2, 1), np.zeros((2, 5, 2)), np.zeros((2, 2, 5, 2)))


def test_normalize_examples():
    np.testing.assert_array_equal(normalize_costs(np.array([[1.0], [3.0]]))[0], [[0.0], [1.0]])
    np.testing.assert_array_equal(normalize_costs(np.array([[2.0], [4.0], [6.0]]))[0], [[0.0], [0.5], [1.0]])
    norm, flat = normalize_costs(np.full((3, 2), 7.0))
    assert flat and np.all(norm == 0)
    with pytest.raises(ValueError):
        normalize_costs(np.full((2, 2), np.inf))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), N=st.integers(2, 40), M=st.integers(1, 4))
def test_normalized_costs_in_unit_interval(seed, N, M):
    rng = np.random.default_rng(seed)
    c = rng.normal(0, 1e3, (N, M))
    c[rng.uniform(size=(N, M)) < 0.1] = np.inf
    if not np.isfinite(c).any():
        c[0, 0] = 1.0
    norm, _ = normalize_costs(c)
    assert np.all((norm >= 0) & (norm <= 1))
    batch = weigh_batch(np.zeros((N, 1, 1)), c, Tsallis(2.0, EliteFraction(0.3)))
    assert np.all(batch.likelihood >= 0)
    assert abs(batch.weights.w.sum() - 1) <= 1e-12


def test_mppi_likelihood_is_exponential_of_normalized_cost():
    c = np.array([[3.0], [5.0], [11.0]])
    lik, gamma = compute_likelihoods(normalize_costs(c)[0], Mppi(2.0))
    np.testing.assert_allclose(lik, np.exp(-2.0 * np.array([0.0, 0.25, 1.0])), rtol=1e-15)
    assert gamma is None


def test_cem_half_elite():
    b = weigh_batch(np.zeros((4, 1, 1)), np.array([[4.0], [1.0], [3.0], [2.0]]), Cem(EliteFraction(0.5)))
    np.testing.assert_array_equal(b.weights.w, [0.0, 0.5, 0.0, 0.5])
    assert elite_count(b, Cem(EliteFraction(0.5))) == 2


def test_constant_shape_gives_uniform_weights():
    b = weigh_batch(np.zeros((5, 1, 1)), np.arange(5.0)[:, None], Cem(EliteFraction(1.0)))
    np.testing.assert_array_equal(b.weights.w, np.full(5, 0.2))


def test_duplicated_columns_leave_likelihood_unchanged():
    rng = np.random.default_rng(2)
    c = rng.uniform(0, 10, (16, 1))
    for t in (Tsallis(1.7, EliteFraction(0.25)), Mppi(3.0), Cem(EliteFraction(0.25))):
        one = weigh_batch(np.zeros((16, 1, 1)), c, t)
        four = weigh_batch(np.zeros((16, 1, 1)), np.tile(c, (1, 4)), t)
        np.testing.assert_array_equal(one.likelihood, four.likelihood)
        np.testing.assert_array_equal(one.weights.w, four.weights.w)


def test_near_one_tsallis_ranks_like_mppi():
    rng = np.random.default_rng(3)
    for _ in range(20):
        J = rng.uniform(0, 1, 32)
        g = J.max() * 1.5
        ts = compute_likelihoods(J[:, None], Tsallis(1 + 1e-6, EliteThreshold(g)))[0]
        mp = compute_likelihoods(J[:, None], Mppi(1.0))[0]
        ts = np.where(ts > 0, ts, 0.0)
        # ranks agree wherever Tsallis weights have not underflowed
        keep = ts > 0
        np.testing.assert_array_equal(np.argsort(-ts[keep], kind="stable"), np.argsort(-mp[keep], kind="stable"))


def test_noise_streams_are_keyed():
    cfg = NoiseConfig(1.5)
    a = cfg.draw(7, 3, 1, (4, 2, 5, 2))
    np.testing.assert_array_equal(a, cfg.draw(7, 3, 1, (4, 2, 5, 2)))
    assert not np.array_equal(a, cfg.draw(7, 3, 2, (4, 2, 5, 2)))
    assert not np.array_equal(a, cfg.draw(8, 3, 1, (4, 2, 5, 2)))
    assert stream(1, 2).integers(1 << 30) == stream(1, 2).integers(1 << 30)
    with pytest.raises(ValueError):
        NoiseConfig(-1.0)
