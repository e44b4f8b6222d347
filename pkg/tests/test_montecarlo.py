import dataclasses

import numpy as np
import pytest

from meppm.analysis import cmeppm_mai_ser
from meppm.channel import ChannelParams, photon_budget
from meppm.codes import load_catalog, msequence_difference_set
from meppm.montecarlo import ConfigError, SimConfig, derived_seed, run_point, sweep


@pytest.fixture(scope="module")
def codes():
    return {
        "b341": load_catalog("bibd_341_85_21"),
        "o341": load_catalog("ooc_341_5_1"),
        "b13": load_catalog("bibd_13_4_1"),
        "o13": load_catalog("ooc_13_3_1"),
        "b63": msequence_difference_set(6),
        "o63": load_catalog("ooc_63_7_2"),
        "o101": load_catalog("ooc_101_25_9"),
    }


def small(codes, **kw):
    base = dict(scheme="cmeppm", bibd=codes["b13"], ooc=codes["o13"], trials=4000,
                target_errors=10**9, seed=1)
    base.update(kw)
    return SimConfig(**base)


@pytest.mark.parametrize("scheme", ["cmeppm", "dmeppm", "ccm", "eppm"])
def test_high_snr_single_user_is_error_free(codes, scheme):
    kw = {"scheme": scheme, "lam0": 1e6, "lamb": 0.0}
    if scheme == "dmeppm":
        kw.update(bibd=codes["b63"])
    if scheme == "ccm":
        kw.update(ooc=codes["o101"])
    res = run_point(small(codes, **kw))
    assert res.symbol_errors == 0 and res.trials == 4000


def test_noiseless_mai_point(codes):
    cfg = SimConfig("cmeppm", codes["b341"], codes["o341"], n_users=10, stats="noiseless",
                    trials=100_000, target_errors=10**9, seed=5)
    res = run_point(cfg)
    formula = cmeppm_mai_ser(10, 5, 1, 341).raw
    assert formula / 2 <= res.ser <= 2 * formula


def test_parallel_matches_serial(codes):
    cfg = SimConfig("cmeppm", codes["b341"], codes["o341"], n_users=6, trials=9_000,
                    target_errors=150, seed=9, block_size=1000)
    a = run_point(cfg, workers=1)
    b = run_point(cfg, workers=3)
    assert a.counts() == b.counts()
    assert a.bit_error_sq == b.bit_error_sq


def test_stop_at_block_boundary(codes):
    cfg = small(codes, lam0=3.0, lamb=3.0, target_errors=50, block_size=100, trials=10**6)
    res = run_point(cfg)
    assert res.symbol_errors >= 50
    assert res.trials % 100 == 0 and res.trials < 10**6


def test_seed_determinism(codes):
    cfg = small(codes, lam0=5.0, lamb=2.0)
    assert run_point(cfg).counts() == run_point(cfg).counts()
    assert run_point(cfg).counts() != run_point(cfg.replace(seed=2)).counts()


def test_single_value_sweep_equals_run_point(codes):
    cfg = small(codes, lam0=5.0, lamb=2.0)
    [(point, res)] = sweep(cfg, "lam0", [8.0])
    assert point.seed == derived_seed(cfg.seed, 0)
    assert res.counts() == run_point(cfg.replace(lam0=8.0, seed=derived_seed(1, 0))).counts()


def test_sweep_scheme_resets_detector(codes):
    cfg = small(codes, detector="sud", lam0=50.0, lamb=1.0)
    out = sweep(cfg, "scheme", ["eppm", "cmeppm"])
    assert [p.detector for p, _ in out] == ["corr", "corr"]


def test_error_accounting(codes):
    res = run_point(small(codes, lam0=2.0, lamb=2.0))
    assert res.symbol_errors <= res.bit_errors <= res.symbol_errors * res.bits_per_symbol
    assert res.ser >= res.ber
    assert 0 < res.ci95 < 1 and 0 < res.ser_ci95 < 1


@pytest.mark.parametrize(
    "kw",
    [
        {"scheme": "ofdm"},
        {"stats": "laplace"},
        {"detector": "ccm"},
        {"n_users": 2},  # single-word OOC
        {"desired_user": 1},
        {"trials": 0},
        {"lam0": -1.0},
        {"scheme": "eppm", "n_users": 2},
        {"bibd": None},
    ],
)
def test_config_errors(codes, kw):
    with pytest.raises(ConfigError):
        small(codes, **kw)


def test_dmeppm_oversubscription(codes):
    with pytest.raises(ConfigError):
        small(codes, scheme="dmeppm", n_users=4, dmeppm_q=4)


def test_sud_log_zero_rejected(codes):
    with pytest.raises(ConfigError):
        run_point(small(codes, detector="sud", lamb=0.0, lam0=10.0))


def test_bad_sweep_variable(codes):
    with pytest.raises(ConfigError):
        sweep(small(codes), "Q", [1])
    with pytest.raises(ConfigError):
        sweep(small(codes), "lam0", [])


def test_desired_user_symmetry(codes):
    """Cyclic structure makes every user equivalent; intervals overlap."""
    results = []
    for u in range(5):
        cfg = SimConfig("cmeppm", codes["b341"], codes["o341"], n_users=5, desired_user=u,
                        trials=20_000, target_errors=10**9, seed=100 + u)
        results.append(run_point(cfg))
    lo = max(r.ser - r.ser_ci95 for r in results)
    hi = min(r.ser + r.ser_ci95 for r in results)
    assert lo <= hi + 1e-12


def test_more_users_more_errors(codes):
    sers = []
    for N in (2, 5, 9):
        cfg = SimConfig("cmeppm", codes["b341"], codes["o341"], n_users=N,
                        trials=20_000, target_errors=10**9, seed=4)
        sers.append(run_point(cfg).ser)
    assert sers[0] < sers[1] < sers[2]


def test_dmeppm_improves_with_power(codes):
    bers = []
    for p0 in (0.1e-6, 1e-6, 10e-6):
        cfg = SimConfig("dmeppm", codes["b63"], n_users=4, trials=6_000, target_errors=10**9,
                        seed=2, channel=ChannelParams(p0_w=p0))
        bers.append(run_point(cfg).ber)
    assert bers[0] > bers[1] > bers[2]


def test_gaussian_and_noiseless_modes(codes):
    cfg = small(codes, lam0=20.0, lamb=1.0)
    g = run_point(cfg.replace(stats="gaussian"))
    n = run_point(cfg.replace(stats="noiseless"))
    assert n.symbol_errors == 0
    assert g.trials == 4000


def test_budget_reported(codes):
    res = run_point(small(codes, trials=10))
    # 13-slot frame with 13 symbols: three bits per symbol
    expected = dataclasses.replace(ChannelParams(), Q=13, M=13)
    assert (res.lam0, res.lamb) == photon_budget(expected)
    assert res.bits_per_symbol == 3
    assert np.isfinite(res.wall_time)
