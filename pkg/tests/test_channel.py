import numpy as np
import pytest

from meppm.channel import (
    ChannelParams,
    photon_budget,
    photon_rate,
    sample_gaussian,
    sample_poisson,
    superpose,
)
from meppm.codes import Codeword, load_catalog
from meppm.modulation import cmeppm_constellation, eppm_constellation

import oracles


def test_photon_rate_oracle():
    rate = photon_rate(0.1e-6, 0.8, 650e-9)
    assert rate == pytest.approx(oracles.photon_rate(0.1e-6), rel=1e-12)
    assert rate == pytest.approx(oracles.FROZEN["photon_rate_0p1uW_650nm"], rel=1e-4)


@pytest.mark.parametrize(
    "Q, M, key",
    [(341, 341, "lam0_341"), (63, 70, "lam0_63_type2"), (63, 63, "lam0_63_coded")],
)
def test_reference_budgets(Q, M, key):
    lam0, lamb = photon_budget(ChannelParams(Q=Q, M=M))
    assert lam0 == pytest.approx(oracles.FROZEN[key], rel=1e-4)
    assert lamb == lam0  # Pb = P0 in the defaults


def test_zero_background_and_linearity():
    _, lamb = photon_budget(ChannelParams(pb_w=0.0, Q=13, M=13))
    assert lamb == 0
    a = photon_budget(ChannelParams(Q=20, M=16))[0]
    b = photon_budget(ChannelParams(Q=40, M=16))[0]
    assert b == pytest.approx(a / 2)


@pytest.mark.parametrize("field, value", [("p0_w", 0.0), ("eta", 1.5), ("eta", 0.0), ("pb_w", -1.0),
                                          ("wavelength_m", -1.0), ("bitrate_bps", 0.0), ("M", 1)])
def test_invalid_params(field, value):
    with pytest.raises(ValueError):
        ChannelParams(**{field: value})


def test_superpose():
    b = load_catalog("bibd_13_4_1")
    e = eppm_constellation(b).amplitudes()[3]
    assert np.array_equal(superpose([e]), e)
    assert np.allclose(superpose([e / 3] * 3), e)
    with pytest.raises(ValueError):
        superpose([np.ones(3), np.ones(4)])
    c = [cmeppm_constellation(b, Codeword.from_string("1100100000000"), 2, n) for n in range(2)]
    # slot average of any two-user combination is K/Q
    total = superpose([c[0].amplitudes()[0], c[1].amplitudes()[5]])
    assert total.mean() == pytest.approx(4 / 13)


def test_poisson_sampler():
    rng = np.random.default_rng(0)
    assert not sample_poisson(np.ones(5), 0.0, 0.0, rng).any()
    x = np.linspace(0, 1, 7)
    draws = sample_poisson(np.tile(x, (100_000, 1)), 100.0, 2.0, np.random.default_rng(1))
    mean = 100 * x + 2
    se = np.sqrt(mean / 100_000)
    assert np.all(np.abs(draws.mean(axis=0) - mean) < 3 * se + 1e-12)
    assert np.allclose(draws.mean(axis=0), mean, rtol=0.01)
    a = sample_poisson(x, 5.0, 1.0, np.random.default_rng(9))
    b = sample_poisson(x, 5.0, 1.0, np.random.default_rng(9))
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        sample_poisson(-x - 1, 1.0, 0.0, rng)


def test_gaussian_sampler():
    mean = 50.0
    draws = sample_gaussian(np.ones((100_000, 1)), 40.0, 10.0, np.random.default_rng(2))
    assert abs(draws.var() / mean - 1) < 0.02
    assert np.array_equal(sample_gaussian(np.zeros(4), 0.0, 0.0, np.random.default_rng(3)), np.zeros(4))


def test_large_mean_poisson_gaussian_agree():
    n, lam = 100_000, 2000.0
    p = sample_poisson(np.ones(n), lam, 0.0, np.random.default_rng(4))
    g = sample_gaussian(np.ones(n), lam, 0.0, np.random.default_rng(5))
    se_mean = np.sqrt(lam / n)
    assert abs(p.mean() - g.mean()) < 4 * se_mean * np.sqrt(2)
    assert abs(p.var() / g.var() - 1) < 0.03
