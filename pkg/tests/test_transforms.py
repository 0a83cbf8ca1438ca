import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsallis_mpc.transforms import (Cem, EliteFraction, EliteThreshold, Mppi, SingularityError, Tsallis,
                                    ara_coefficient, ara_finite_difference, exp_r, likelihood, log_r,
                                    resolve_gamma, risk_premium, shape_function, tsallis_likelihood)


# ----------------------------------------------------------------- deformed log / exp

def test_log_r_examples():
    assert log_r(1.0, 3.0) == 0.0
    assert log_r(2.0, 2.0) == pytest.approx(1.0, abs=1e-15)
    assert abs(log_r(0.5, 1 + 1e-9) - math.log(0.5)) < 1e-6


def test_log_r_rejects_non_positive():
    with pytest.raises(ValueError):
        log_r(0.0, 2.0)
    with pytest.raises(ValueError):
        log_r(np.array([1.0, -1.0]), 2.0)


def test_exp_r_examples():
    assert exp_r(0.0, 5.0) == 1.0
    assert exp_r(-1.0, 2.0) == 0.0
    assert abs(exp_r(-0.5, 1 + 1e-9) - math.exp(-0.5)) < 1e-6


def test_r_one_dispatches_to_natural_functions():
    x = np.linspace(0.1, 3, 7)
    np.testing.assert_array_equal(log_r(x, 1.0), np.log(x))
    np.testing.assert_array_equal(exp_r(x, 1.0), np.exp(x))


def _well_conditioned_floor(r):
    # the round trip loses about eps / (|r-1| x^(r-1)) relative accuracy,
    # since log_r maps x to -1/(r-1) + x^(r-1)/(r-1)
    return 1e-300 if r < 1 else (1e-5 / (r - 1)) ** (1 / (r - 1))


@settings(max_examples=300, deadline=None)
@given(u=st.floats(min_value=0.0, max_value=1.0), r=st.sampled_from([0.5, 2.0, 5.0]))
def test_inverse_pair(u, r):
    lo = _well_conditioned_floor(r)
    x = float(np.exp(np.log(lo) + u * (np.log(10.0) - np.log(lo))))
    assert exp_r(log_r(x, r), r) == pytest.approx(x, rel=1e-10)


def test_inverse_pair_degrades_gracefully_below_float_resolution():
    # x^(r-1) below machine epsilon cannot be recovered; the result is a clean 0
    assert log_r(1e-5, 5.0) == -0.25
    assert exp_r(log_r(1e-5, 5.0), 5.0) == 0.0


def test_deformed_exp_matches_plain_power_formula():
    # independent evaluation of (1 + (r-1) x)_+ ** (1/(r-1))
    for r in (1.5, 2.0, 4.0):
        for x in np.linspace(-2, 2, 41):
            base = max(1 + (r - 1) * x, 0.0)
            assert exp_r(x, r) == pytest.approx(base ** (1 / (r - 1)), rel=1e-12, abs=1e-300)


# ----------------------------------------------------------------- Tsallis likelihood

def test_tsallis_likelihood_examples():
    assert tsallis_likelihood(1.0, 1.0, 3.0) == 0.0
    assert tsallis_likelihood(2.0, 1.0, 1.5) == 0.0
    for r in (1.01, 2.0, 50.0):
        assert tsallis_likelihood(0.0, 0.7, r) == 1.0
    assert abs(tsallis_likelihood(0.5, 1.0, 1e6) - 1.0) < 1e-5


def test_tsallis_likelihood_near_one_is_finite():
    J = np.linspace(0, 0.99, 50)
    v = tsallis_likelihood(J, 1.0, 1.001)
    assert np.all(np.isfinite(v)) and np.all(v >= 0)
    # direct power form agrees where it does not underflow
    np.testing.assert_allclose(v[:5], (1 - J[:5]) ** 1000, rtol=1e-9)


def test_tsallis_likelihood_validates():
    with pytest.raises(ValueError):
        tsallis_likelihood(0.1, 0.0, 2.0)
    with pytest.raises(ValueError):
        tsallis_likelihood(0.1, 1.0, 1.0)


@settings(max_examples=100, deadline=None)
@given(ratio=st.floats(min_value=0.01, max_value=0.99))
def test_tsallis_pointwise_limits_monotone_in_r(ratio):
    rs = np.geomspace(1.001, 1e5, 30)
    vals = np.array([tsallis_likelihood(ratio, 1.0, r) for r in rs])
    assert np.all(np.diff(vals) >= 0)  # J/gamma < 1: weight grows with r
    assert vals[-1] > 1 - 1e-3 * (1 + abs(math.log1p(-ratio)))
    assert vals[0] < 1e-4 or ratio < 0.01


# ----------------------------------------------------------------- dispatch

def test_likelihood_examples():
    assert likelihood(Mppi(1.0), math.log(2)) == pytest.approx(0.5, rel=1e-15)
    assert likelihood(Cem(EliteThreshold(2.0)), 2.0, 2.0) == 1.0
    assert likelihood(Tsallis(2.0, EliteThreshold(1.0)), 0.75, 1.0) == pytest.approx(0.25, rel=1e-14)


def test_threshold_transforms_need_gamma():
    with pytest.raises(ValueError):
        likelihood(Tsallis(2.0, EliteFraction(0.5)), 0.3)
    with pytest.raises(ValueError):
        likelihood(Cem(EliteFraction(0.5)), 0.3)


@pytest.mark.parametrize("bad", [lambda: Tsallis(1.0, EliteFraction(0.1)), lambda: Mppi(0.0),
                                 lambda: EliteFraction(0.0), lambda: EliteFraction(1.5),
                                 lambda: EliteThreshold(-1.0), lambda: Cem(EliteFraction(0.1), 1.0)])
def test_invalid_parameters(bad):
    with pytest.raises(ValueError):
        bad()


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), which=st.sampled_from(["tsallis", "mppi", "cem"]))
def test_likelihood_non_increasing_and_non_negative(seed, which):
    rng = np.random.default_rng(seed)
    J = np.sort(rng.uniform(0, 1, 64))
    g = rng.uniform(0.05, 1.2)
    t = {"tsallis": Tsallis(rng.uniform(1.01, 20), EliteThreshold(g)),
         "mppi": Mppi(rng.uniform(0.1, 50)), "cem": Cem(EliteThreshold(g))}[which]
    v = likelihood(t, J, None if which == "mppi" else g)
    assert np.all(v >= 0)
    assert np.all(np.diff(v) <= 0)


# ----------------------------------------------------------------- resolve_gamma

def test_resolve_gamma_examples():
    costs = np.array([1.0, 2.0, 3.0, 4.0])
    g = resolve_gamma(costs, EliteFraction(0.5))
    np.testing.assert_array_equal(costs < g, [True, True, False, False])
    np.testing.assert_array_equal(likelihood(Cem(EliteFraction(0.5)), costs, g), [1, 1, 0, 0])
    same = np.full(4, 5.0)
    g = resolve_gamma(same, EliteFraction(0.25))
    assert np.all(likelihood(Cem(EliteFraction(0.25)), same, g) == 1)
    assert resolve_gamma([1.0, 2.0], EliteThreshold(1.5)) == 1.5


def test_resolve_gamma_empty():
    with pytest.raises(ValueError):
        resolve_gamma([], EliteFraction(0.5))


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), f=st.floats(min_value=0.001, max_value=1.0), n=st.integers(1, 300))
def test_fraction_gives_exact_elite_count_on_distinct_costs(seed, f, n):
    costs = np.random.default_rng(seed).uniform(-5, 5, n)
    g = resolve_gamma(costs, EliteFraction(f))
    k = EliteFraction(f).count(n)
    assert k == max(1, min(n, math.ceil(f * n - 1e-9)))
    assert np.count_nonzero(costs < g) == k
    assert np.count_nonzero(costs <= g) == k


def test_resolve_gamma_per_row():
    rng = np.random.default_rng(0)
    costs = rng.uniform(size=(5, 20))
    g = resolve_gamma(costs, EliteFraction(0.2), axis=-1)
    assert g.shape == (5, 1)
    for i in range(5):
        assert g[i, 0] == resolve_gamma(costs[i], EliteFraction(0.2))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(min_value=1e-3, max_value=1e3))
def test_elite_selection_is_scale_invariant(seed, scale):
    rng = np.random.default_rng(seed)
    J = rng.uniform(0, 1, 64)
    for t in (Cem(EliteFraction(0.2)), Tsallis(2.5, EliteFraction(0.2))):
        w1 = likelihood(t, J, resolve_gamma(J, t.elite))
        w2 = likelihood(t, scale * J, resolve_gamma(scale * J, t.elite))
        np.testing.assert_allclose(w1 / w1.sum(), w2 / w2.sum(), atol=1e-9)


# ----------------------------------------------------------------- ARA

def test_ara_examples():
    assert ara_coefficient(Tsallis(2.0, EliteThreshold(1.0)), 0.5, 1.0) == 0.0
    assert ara_coefficient(Mppi(4.0), 123.0) == 4.0
    assert ara_coefficient(Tsallis(3.0, EliteThreshold(1.0)), 0.5, 1.0) == pytest.approx(-1.0, rel=1e-15)


def test_ara_cem_values():
    c = Cem(EliteThreshold(0.5))
    assert ara_coefficient(c, 0.2, 0.5) == -math.inf
    assert ara_coefficient(c, 0.7, 0.5) == math.inf
    assert ara_coefficient(c, 0.5, 0.5) == 0.0


def test_ara_tsallis_domain():
    with pytest.raises(ValueError):
        ara_coefficient(Tsallis(3.0, EliteThreshold(1.0)), 1.0, 1.0)


def test_ara_finite_difference_examples():
    assert ara_finite_difference(lambda J: math.exp(-J), 1.0, 1e-4) == pytest.approx(1.0, abs=1e-4)
    with pytest.raises(SingularityError):
        ara_finite_difference(lambda J: 3.0, 0.4, 1e-4)
    t = Tsallis(3.0, EliteThreshold(1.0))
    assert ara_finite_difference(shape_function(t, 1.0), 0.5, 1e-5) == pytest.approx(-1.0, abs=1e-3)


def _ara_by_hand(r, g, J):
    # S = (1 - J/g)^p, p = 1/(r-1):  S'/S = -p/(g-J),  S''/S = p(p-1)/(g-J)^2
    p = 1.0 / (r - 1.0)
    return -(p * (p - 1) / (g - J) ** 2) / (-p / (g - J))


@settings(max_examples=200, deadline=None)
@given(r=st.one_of(st.floats(1.05, 1.95), st.floats(2.05, 30.0)), g=st.floats(0.05, 5.0),
       frac=st.floats(0.0, 0.9))
def test_ara_closed_form_against_oracles(r, g, frac):
    J = frac * g
    t = Tsallis(r, EliteThreshold(g))
    a = ara_coefficient(t, J, g)
    assert a == pytest.approx(_ara_by_hand(r, g, J), rel=1e-10)
    fd = ara_finite_difference(shape_function(t, g), J, 1e-4 * (g - J))
    assert a == pytest.approx(fd, rel=1e-3)
    # sign law
    assert (a > 0) == (r < 2)


def test_ara_mppi_finite_difference():
    for inv in (0.3, 1.0, 7.0):
        fd = ara_finite_difference(shape_function(Mppi(inv)), 0.4, 1e-4)
        assert ara_coefficient(Mppi(inv), 0.4) == pytest.approx(fd, rel=1e-3)


def test_risk_premium():
    assert risk_premium(Mppi(2.0), 0.3, 0.5) == pytest.approx(0.5)
    t = Tsallis(3.0, EliteThreshold(1.0))
    assert risk_premium(t, 0.5, 0.2, 1.0) == pytest.approx(-0.1)
