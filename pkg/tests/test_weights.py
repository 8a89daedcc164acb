import math
import warnings

import numpy as np
import pytest
from scipy import special as sps
from scipy.optimize import brentq

from polymerlab.errors import ConfigurationError, DomainError
from polymerlab.special import digamma, gamma_star as special_gamma_star, polygamma, tetragamma, trigamma
from polymerlab.weights import (
    CriticalGammaWarning,
    DistSpec,
    WeightModel,
    assign_weights,
    gamma_star,
    replica_rng,
    sample_hex,
    sample_inverse_gamma,
    scaling_constants,
)

EULER = 0.5772156649015329
ZETA3 = 1.2020569031595942


# -- polygamma --------------------------------------------------------------------


def test_digamma_closed_forms():
    assert polygamma(0, 1.0) == pytest.approx(-EULER, abs=1e-13)
    assert polygamma(0, 0.5) == pytest.approx(-EULER - 2 * math.log(2), abs=1e-13)
    assert polygamma(0, 0.5) == pytest.approx(-1.9635100260214235, abs=1e-13)


def test_higher_orders_closed_forms():
    assert polygamma(1, 1.0) == pytest.approx(math.pi**2 / 6, rel=1e-13)
    assert polygamma(1, 0.5) == pytest.approx(math.pi**2 / 2, rel=1e-13)
    assert polygamma(2, 1.0) == pytest.approx(-2 * ZETA3, rel=1e-13)
    assert polygamma(2, 0.5) == pytest.approx(-14 * ZETA3, rel=1e-13)
    assert polygamma(2, 0.5) == pytest.approx(-16.828796644234318, rel=1e-12)


@pytest.mark.parametrize("m", [0, 1, 2])
def test_polygamma_matches_scipy(m):
    xs = np.concatenate([np.geomspace(1e-3, 1e3, 60), [0.25, 0.75, 1.5, 7.3, 11.999, 12.0, 12.001]])
    for x in xs:
        ref = float(sps.polygamma(m, x))
        assert polygamma(m, x) == pytest.approx(ref, rel=1e-11, abs=1e-14)


def test_aliases():
    assert digamma(2.5) == polygamma(0, 2.5)
    assert trigamma(2.5) == polygamma(1, 2.5)
    assert tetragamma(2.5) == polygamma(2, 2.5)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5, math.inf, math.nan])
def test_polygamma_domain(x):
    with pytest.raises(DomainError):
        polygamma(0, x)


def test_polygamma_bad_order():
    with pytest.raises(ValueError):
        polygamma(3, 1.0)


# -- gamma* and scaling constants ------------------------------------------------


def test_gamma_star_value():
    g = gamma_star()
    assert g == pytest.approx(1.461632, abs=1e-5)
    assert abs(digamma(g)) < 1e-12
    assert g == pytest.approx(brentq(lambda x: sps.digamma(x), 1.0, 2.0, xtol=1e-15), abs=1e-12)
    assert digamma(1.0) < 0 < digamma(2.0)


def test_gamma_star_stable():
    assert special_gamma_star() == special_gamma_star() == gamma_star()


def test_scaling_constants_gamma_one():
    sc = scaling_constants(1.0)
    assert sc.f_bar == pytest.approx(2 * (EULER + 2 * math.log(2)), rel=1e-12)
    assert sc.f_bar == pytest.approx(3.927020052042847, rel=1e-12)
    assert sc.g_bar == pytest.approx(28 * ZETA3, rel=1e-12)
    assert sc.g_bar == pytest.approx(33.657593288468636, rel=1e-12)


def test_scaling_constants_gamma_two_and_half():
    with pytest.warns(CriticalGammaWarning):
        assert scaling_constants(2.0).f_bar == pytest.approx(2 * EULER, rel=1e-12)
    sc = scaling_constants(0.5)
    assert sc.f_bar == pytest.approx(-2 * sps.digamma(0.25), rel=1e-12)
    assert sc.g_bar == pytest.approx(-2 * sps.polygamma(2, 0.25), rel=1e-12)
    assert not sc.above_critical


def test_scaling_constants_warn_at_and_above_critical():
    with pytest.warns(CriticalGammaWarning):
        sc = scaling_constants(gamma_star())
    assert sc.f_bar > 0
    with pytest.warns(CriticalGammaWarning):
        scaling_constants(2.0)


def test_no_warning_below_critical():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        scaling_constants(1.0)


def test_scaling_constants_domain():
    with pytest.raises(DomainError):
        scaling_constants(0.0)


def test_fluctuation_scale():
    sc = scaling_constants(1.0)
    assert sc.fluctuation_scale(64) == pytest.approx((64 * sc.g_bar / 2) ** (1 / 3))


# -- sampling ------------------------------------------------------------------------


@pytest.mark.parametrize("gamma", [0.5, 1.0, 1.4])
def test_inverse_gamma_log_moments(gamma):
    rng = np.random.default_rng(7)
    x = sample_inverse_gamma(gamma, rng, 10**6)
    assert np.all(x > 0)
    lx = np.log(x)
    se_mean = math.sqrt(polygamma(1, gamma) / x.size)
    assert abs(lx.mean() + polygamma(0, gamma)) < 4 * se_mean
    # variance of the sample variance uses the fourth cumulant psi'''
    var = polygamma(1, gamma)
    k4 = float(sps.polygamma(3, gamma))
    se_var = math.sqrt((k4 + 2 * var**2) / x.size)
    assert abs(lx.var() - var) < 4 * se_var


def test_inverse_gamma_gamma_one_values():
    rng = np.random.default_rng(8)
    lx = np.log(sample_inverse_gamma(1.0, rng, 10**6))
    assert lx.mean() == pytest.approx(0.5772, abs=0.01)
    assert lx.var() == pytest.approx(1.6449, abs=0.02)


def test_inverse_gamma_domain():
    with pytest.raises(DomainError):
        sample_inverse_gamma(0.0, np.random.default_rng(0))


def test_mixed_model_lattice(mixed_model):
    lat = assign_weights(mixed_model, 4)
    assert np.all(lat.right_weights == -1.0) and np.all(lat.up_weights == -1.0)
    assert np.all(lat.loop_weights > 0)


def test_seeded_determinism(mixed_model, iid_model):
    for model in (mixed_model, iid_model):
        assert assign_weights(model, 5, 3).same_weights(assign_weights(model, 5, 3))
        assert not assign_weights(model, 5, 3).same_weights(assign_weights(model, 5, 4))


def test_replica_streams_independent_of_order():
    a = replica_rng(1, 8, 5).random(3)
    replica_rng(1, 8, 4).random(10)
    assert np.array_equal(a, replica_rng(1, 8, 5).random(3))


def test_iid_dual_transform():
    model = WeightModel.iid(DistSpec("two-point", (2.0, 0.3)), seed=5)
    hx = sample_hex(model, 6)
    sq = assign_weights(model, 6)
    assert np.array_equal(sq.loop_weights, 1.0 / hx.blue)
    assert np.array_equal(sq.right_weights, -hx.red_right)
    pos = np.mean(hx.red_right > 0)
    assert set(np.unique(np.abs(hx.blue))) == {2.0}
    assert 0.05 < pos < 0.6


@pytest.mark.parametrize(
    "name,params,expected",
    [
        ("inverse-gamma", (1.0,), EULER),
        ("gamma", (1.0,), -EULER),
        ("lognormal", (0.3, 0.5), 0.3),
        ("two-point", (2.0, 0.5), math.log(2.0)),
    ],
)
def test_mean_log_abs_closed_forms(name, params, expected):
    assert DistSpec(name, params).mean_log_abs() == pytest.approx(expected, rel=1e-12)


def test_mean_log_abs_shifted_exponential():
    d = DistSpec("shifted-exponential", (1.0, 2.0))
    x = d.sample(np.random.default_rng(3), 400_000)
    assert d.mean_log_abs() == pytest.approx(np.log(x).mean(), abs=5e-3)


@pytest.mark.parametrize(
    "name,params",
    [("nope", ()), ("gamma", ()), ("gamma", (-1.0,)), ("lognormal", (0.0, -1.0)), ("two-point", (1.0, 2.0))],
)
def test_invalid_distributions(name, params):
    with pytest.raises(ConfigurationError):
        DistSpec(name, params)


def test_model_config_round_trip():
    for cfg in ({"model": "mixed", "gamma": 0.5, "seed": 3},
                {"model": "iid", "dist": {"name": "gamma", "params": [2.0]}, "seed": 4}):
        assert WeightModel.from_config(cfg).to_config() == cfg


@pytest.mark.parametrize(
    "cfg",
    [{"model": "mixed"}, {"model": "other"}, {"model": "mixed", "gamma": -1}, {"model": "iid"},
     {"model": "mixed", "gamma": 0.5, "seed": -1}, {"model": "mixed", "gamma": 0.5, "seed": 2**64}],
)
def test_bad_model_configs(cfg):
    with pytest.raises(ConfigurationError):
        WeightModel.from_config(cfg)
