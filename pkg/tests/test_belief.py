import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from pinstop.belief import (critical_time, h_positive, indicator_H, likelihood_ratio,
                            log_likelihood_ratio, payoff_G, posterior, posterior_value,
                            signal_to_noise)
from pinstop.errors import DomainError, NotFound
from pinstop.params import ModelParams

from oracles import H_symbolic, critical_time_closed, lr_marginals, posterior_bayes

inner_t = st.floats(0.01, 0.99)
xs = st.floats(-4.0, 4.0)
levels = st.floats(-2.5, 2.5)
priors = st.floats(0.01, 0.99)


@given(inner_t, xs, levels)
def test_lr_is_ratio_of_marginal_densities(t, x, a):
    assert likelihood_ratio(t, x, a) == pytest.approx(lr_marginals(t, x, a), rel=1e-9)


@given(levels)
def test_lr_is_one_at_start(a):
    # the posterior starts at the prior whatever the pin level
    assert likelihood_ratio(0.0, 0.0, a) == 1.0


@given(inner_t, levels)
def test_lr_on_drift_line(t, a):
    assert likelihood_ratio(t, a * t, a) == pytest.approx(1 / math.sqrt(1 - t), rel=1e-14)


def test_lr_values():
    assert likelihood_ratio(0.5, 0.0, 1.0) == pytest.approx(math.sqrt(2) * math.exp(-0.25), rel=1e-14)
    assert likelihood_ratio(0.5, 0.0, -1.0) == pytest.approx(1.1013906, abs=1e-7)


def test_lr_vanishes_off_pin_at_horizon():
    assert likelihood_ratio(1 - 1e-8, 0.1, 0.0) < 1e-9
    assert likelihood_ratio(1 - 1e-8, 1.1, 1.0) < 1e-9


def test_log_lr_finite_where_lr_underflows():
    assert likelihood_ratio(0.5, 60.0, 0.0) == 0.0
    assert log_likelihood_ratio(0.5, 60.0, 0.0) == pytest.approx(-3600 + 0.5 * math.log(2))


@given(st.floats(0.001, 0.99), xs, levels, priors)
def test_posterior_matches_bayes(t, x, a, pi):
    p = ModelParams(a, pi)
    assert posterior_value(t, x, p) == pytest.approx(posterior_bayes(t, x, a, pi), rel=1e-9, abs=1e-300)


@given(st.floats(0.0, 0.99), xs, levels)
def test_posterior_degenerate_priors_exact(t, x, a):
    assert posterior_value(t, x, ModelParams(a, 0.0)) == 0.0
    assert posterior_value(t, x, ModelParams(a, 1.0)) == 1.0


@given(st.floats(0.0, 0.99), xs, levels, priors, priors)
def test_posterior_increasing_in_prior(t, x, a, p1, p2):
    assume(p1 < p2)
    lo = posterior_value(t, x, ModelParams(a, p1))
    hi = posterior_value(t, x, ModelParams(a, p2))
    assume(0.0 < lo and hi < 1.0)
    assert lo < hi


def test_posterior_point():
    pt = posterior(0.5, 0.0, ModelParams(1.0, 0.5))
    L = math.sqrt(2) * math.exp(-0.25)
    assert pt.value == pytest.approx(L / (1 + L), rel=1e-14)
    assert pt.pi0 == 0.5
    assert posterior(0.0, 0.0, ModelParams(0.0, 0.3)).value == pytest.approx(0.3, rel=1e-15)


def test_posterior_extreme_odds_stay_in_unit_interval():
    p = ModelParams(0.0, 1e-300)
    v = posterior_value(np.array([0.0, 0.999999]), np.array([0.0, 0.0]), p)
    assert np.all((v >= 0) & (v <= 1))


def test_signal_to_noise():
    assert signal_to_noise(0.5, 0.0, 1.0) == pytest.approx(1.0)
    assert signal_to_noise(0.3, 0.0, 0.0) == 0.0
    assert signal_to_noise(0.7, 1.5, 1.5) == pytest.approx(-1.5)


def test_payoff_G_values():
    p = ModelParams(0.0, 0.5)
    assert payoff_G(0.5, 0.5, p) == pytest.approx(0.5 * (1 + math.sqrt(2) * math.exp(-0.25)), rel=1e-14)
    assert payoff_G(0.3, 0.0, ModelParams(1.0, 0.4)) == 0.0
    assert payoff_G(0.3, 1.7, ModelParams(1.0, 0.0)) == 1.7


@given(st.floats(0.0, 0.9), levels)
def test_G_over_x_tends_to_one(t, a):
    p = ModelParams(a, 0.5)
    for x in (a + 40.0, a - 40.0):
        assert payoff_G(t, x, p) / x == pytest.approx(1.0, abs=1e-12)


@given(st.floats(0.0, 0.95), xs, levels, priors)
def test_H_matches_symbolic_generator(t, x, a, pi):
    p = ModelParams(a, pi)
    ref = float(H_symbolic(mp.mpf(t), mp.mpf(x), mp.mpf(a), mp.mpf(pi) / (1 - mp.mpf(pi))))
    assert indicator_H(t, x, p) == pytest.approx(ref, rel=1e-9, abs=1e-12)


@given(st.floats(0.0, 0.95), levels, priors)
def test_H_at_pin_and_far_right(t, a, pi):
    p = ModelParams(a, pi)
    assert indicator_H(t, a, p) == a
    assert indicator_H(t, a + 50.0, p) == pytest.approx(a, abs=1e-12)


@given(st.floats(0.0, 0.95), xs, levels)
def test_H_antisymmetry(t, x, a):
    p, q = ModelParams(a, 0.5), ModelParams(-a, 0.5)
    assert indicator_H(t, x, p) == pytest.approx(-indicator_H(t, -x, q), rel=1e-12, abs=1e-15)


@given(st.floats(0.0, 0.95), st.floats(-4, 4).filter(lambda v: abs(v) > 1e-9))
def test_H_sign_a0(t, x):
    assert np.sign(indicator_H(t, x, ModelParams(0.0, 0.5))) == -np.sign(x)


@given(st.floats(0.0, 0.99), st.floats(-40, 40), levels, priors)
def test_h_positive_agrees_with_H(t, x, a, pi):
    p = ModelParams(a, pi)
    H = indicator_H(t, x, p)
    assume(abs(H) > 1e-12)
    assert h_positive(t, x, p) == (H > 0)


def test_h_positive_where_L_underflows():
    # H = -k x L with L below the smallest double: still strictly positive for x < 0
    p = ModelParams(0.0, 0.5)
    assert indicator_H(0.5, -60.0, p) == 0.0
    assert h_positive(0.5, -60.0, p)
    assert not h_positive(0.5, 60.0, p)


def test_G_H_reject_certain_pinning():
    with pytest.raises(DomainError):
        payoff_G(0.1, 0.0, ModelParams(0.0, 1.0))
    with pytest.raises(DomainError):
        indicator_H(0.1, 0.0, ModelParams(0.0, 1.0))
    with pytest.raises(DomainError):
        indicator_H(1.0, 0.0, ModelParams(0.0, 0.5))


@pytest.mark.parametrize("a,pi", [(1.0, 0.5), (1.0, 0.3), (-1.0, 0.5), (2.0, 0.5), (-2.0, 0.7)])
def test_critical_time_against_closed_form_extremum(a, pi):
    assert critical_time(ModelParams(a, pi)) == pytest.approx(critical_time_closed(a, pi), abs=1e-9)


def test_critical_time_symmetry_and_frozen_value():
    t1 = critical_time(ModelParams(1.0, 0.5))
    t2 = critical_time(ModelParams(-1.0, 0.5))
    assert abs(t1 - t2) < 1e-9
    assert t1 == pytest.approx(0.6831789877, abs=1e-9)


def test_critical_time_is_where_H_stops_being_one_signed():
    p = ModelParams(1.0, 0.5)
    tc = critical_time(p)
    x = np.linspace(-5, 6, 20001)
    assert np.all(indicator_H(tc - 1e-3, x, p) > 0)
    assert np.any(indicator_H(tc + 1e-3, x, p) < 0)


def test_critical_time_errors():
    with pytest.raises(DomainError):
        critical_time(ModelParams(0.0, 0.5))
    with pytest.raises(DomainError):
        critical_time(ModelParams(1.0, 1.0))
    # for a small pin level H already takes both signs at t = 0
    with pytest.raises(NotFound):
        critical_time(ModelParams(0.2, 0.5))
