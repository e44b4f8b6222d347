"""Seeded Monte Carlo estimation of symbol and bit error rates.

Trials are grouped in fixed-size blocks.  Block ``k`` draws from its own
generator seeded by ``SeedSequence(seed, spawn_key=(k,))``, and blocks are
accumulated in index order with the stopping rule checked after each
block, so the counts depend only on the configuration and never on how
many workers evaluated the blocks.
"""

from __future__ import annotations

import dataclasses
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .channel import ChannelParams, photon_budget
from .codes import BibdCode, OocCode, verify_bibd, verify_ooc
from .detection import (
    detect_ccm,
    detect_cmeppm_corr,
    detect_eppm,
    detect_meppm,
    detect_sud,
    sud_weights,
)
from .modulation import (
    ccm_constellation,
    cmeppm_constellation,
    dmeppm_partition,
    eppm_constellation,
    meppm_constellation,
)

__all__ = [
    "SCHEMES",
    "DETECTORS",
    "STATS_MODES",
    "SimConfig",
    "BerResult",
    "ConfigError",
    "run_point",
    "sweep",
    "derived_seed",
]

SCHEMES = ("cmeppm", "dmeppm", "ccm", "eppm")
STATS_MODES = ("poisson", "gaussian", "noiseless")
DETECTORS = {
    "cmeppm": ("corr", "corr-diff", "sud"),
    "dmeppm": ("meppm",),
    "ccm": ("ccm",),
    "eppm": ("corr", "corr-diff"),
}
SWEEP_VARIABLES = {
    "N": "n_users",
    "n_users": "n_users",
    "P0": "p0_w",
    "p0_w": "p0_w",
    "lam0": "lam0",
    "scheme": "scheme",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    """One simulation point.

    ``channel.Q`` and ``channel.M`` are ignored; they follow from the scheme.
    ``lam0``/``lamb`` override the photon budget derived from the channel.
    """

    scheme: str = "cmeppm"
    bibd: BibdCode | None = None
    ooc: OocCode | None = None
    n_users: int = 1
    desired_user: int = 0
    channel: ChannelParams = ChannelParams()
    stats: str = "poisson"
    detector: str = "auto"
    trials: int = 1_000_000
    target_errors: int = 100
    seed: int = 0
    block_size: int = 2000
    dmeppm_q: int = 4
    dmeppm_ell: int = 4
    dmeppm_type: str = "II"
    lam0: float | None = None
    lamb: float | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.stats not in STATS_MODES:
            raise ConfigError(f"stats must be one of {STATS_MODES}, got {self.stats!r}")
        if self.detector == "auto":
            object.__setattr__(self, "detector", DETECTORS[self.scheme][0])
        if self.detector not in DETECTORS[self.scheme]:
            raise ConfigError(
                f"detector {self.detector!r} does not fit scheme {self.scheme!r}; "
                f"choose from {DETECTORS[self.scheme]}"
            )
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.target_errors < 1:
            raise ConfigError("target_errors must be at least 1")
        if self.block_size < 1:
            raise ConfigError("block_size must be at least 1")
        if self.n_users < 1:
            raise ConfigError("n_users must be at least 1")
        if not 0 <= self.desired_user < self.n_users:
            raise ConfigError(f"desired_user must lie in [0, {self.n_users})")
        if self.scheme != "ccm" and self.bibd is None:
            raise ConfigError(f"scheme {self.scheme} needs a BIBD")
        if self.scheme in ("cmeppm", "ccm"):
            if self.ooc is None:
                raise ConfigError(f"scheme {self.scheme} needs an OOC")
            if self.n_users > self.ooc.N:
                raise ConfigError(f"OOC has {self.ooc.N} words, {self.n_users} users requested")
        if self.scheme == "eppm" and self.n_users != 1:
            raise ConfigError("EPPM is single-user")
        if self.scheme == "dmeppm" and self.n_users * self.dmeppm_q > self.bibd.Q:
            raise ConfigError(
                f"{self.n_users} users x {self.dmeppm_q} codewords exceed Q = {self.bibd.Q}"
            )
        for name in ("lam0", "lamb"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ConfigError(f"{name} must be nonnegative")

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class BerResult:
    trials: int
    symbol_errors: int
    bit_errors: int
    bits_per_symbol: int
    bit_error_sq: int  # sum over trials of (bit errors)^2, for the BER interval
    lam0: float
    lamb: float
    wall_time: float = 0.0

    @property
    def ser(self) -> float:
        return self.symbol_errors / self.trials

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.trials * self.bits_per_symbol)

    @property
    def ser_ci95(self) -> float:
        p = self.ser
        return 1.96 * math.sqrt(p * (1 - p) / self.trials)

    @property
    def ci95(self) -> float:
        """Half-width for the BER, from the per-symbol bit error fraction."""
        n, b = self.trials, self.bits_per_symbol
        mean = self.bit_errors / (n * b)
        second = self.bit_error_sq / (n * b * b)
        var = max(second - mean * mean, 0.0)
        return 1.96 * math.sqrt(var / n)

    def counts(self) -> tuple[int, int, int]:
        return self.trials, self.symbol_errors, self.bit_errors


# --------------------------------------------------------------------------
# Setup (cached per configuration so worker processes build it once)
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _Setup:
    amplitudes: tuple[np.ndarray, ...]  # per user (M_n, Q)
    used: tuple[int, ...]  # labelled symbols per user, 2**bits
    bits: int  # of the desired user
    M: int
    lam0: float
    lamb: float
    detect: Callable[[np.ndarray], np.ndarray]


def _constellations(cfg: SimConfig):
    N = cfg.n_users
    if cfg.scheme == "cmeppm":
        return [cmeppm_constellation(cfg.bibd, cfg.ooc.words[n], N, n) for n in range(N)]
    if cfg.scheme == "ccm":
        return [ccm_constellation(cfg.ooc.words[n], N, n) for n in range(N)]
    if cfg.scheme == "eppm":
        return [eppm_constellation(cfg.bibd)]
    part = dmeppm_partition(cfg.bibd, [cfg.dmeppm_q] * N)
    return [
        meppm_constellation(cfg.bibd, part.sets[n], cfg.dmeppm_ell, cfg.dmeppm_type, n)
        for n in range(N)
    ]


def _check_codes(cfg: SimConfig):
    if cfg.bibd is not None and not verify_bibd(cfg.bibd):
        raise ConfigError(f"BIBD {cfg.bibd} fails verification")
    if cfg.ooc is not None and cfg.scheme in ("cmeppm", "ccm"):
        if not verify_ooc(cfg.ooc.subset(cfg.n_users)):
            raise ConfigError(f"OOC {cfg.ooc} fails verification")


@lru_cache(maxsize=32)
def _setup(cfg: SimConfig) -> _Setup:
    _check_codes(cfg)
    consts = _constellations(cfg)
    me = consts[cfg.desired_user]
    link = dataclasses.replace(cfg.channel, Q=me.Q, M=me.M)
    lam0, lamb = photon_budget(link)
    lam0 = lam0 if cfg.lam0 is None else cfg.lam0
    lamb = lamb if cfg.lamb is None else cfg.lamb
    u = cfg.desired_user

    if cfg.scheme == "cmeppm" and cfg.detector == "sud":
        if lamb == 0 and cfg.n_users == 1:
            raise ConfigError("SUD needs background light or interferers (log of zero)")
        weights = sud_weights(cfg.ooc.words[u], cfg.bibd, cfg.n_users, lamb / lam0)

        def detect(r):
            return detect_sud(r, weights)

    elif cfg.scheme == "cmeppm":
        diff = cfg.detector == "corr-diff"

        def detect(r):
            return detect_cmeppm_corr(r, cfg.bibd, cfg.ooc.words[u], diff)

    elif cfg.scheme == "eppm":
        diff = cfg.detector == "corr-diff"

        def detect(r):
            return detect_eppm(r, cfg.bibd, diff)

    elif cfg.scheme == "ccm":

        def detect(r):
            return detect_ccm(r, cfg.ooc.words[u])

    else:

        def detect(r):
            return detect_meppm(r, me, (lam0, lamb))

    return _Setup(
        amplitudes=tuple(c.amplitudes() for c in consts),
        used=tuple(2**c.bits for c in consts),
        bits=me.bits,
        M=me.M,
        lam0=lam0,
        lamb=lamb,
        detect=detect,
    )


def _popcount(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64)
    count = np.zeros(x.shape, dtype=np.int64)
    while x.any():
        count += (x & np.uint64(1)).astype(np.int64)
        x >>= np.uint64(1)
    return count


def derived_seed(seed: int, index: int) -> int:
    """Independent seed for the ``index``-th point of a sweep."""
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1, np.uint64)[0] >> 1)


def _run_block(cfg: SimConfig, block: int, size: int) -> tuple[int, int, int]:
    """(symbol errors, bit errors, sum of squared bit errors) of one block."""
    s = _setup(cfg)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(block,)))
    u = cfg.desired_user
    intensity = np.zeros((size, s.amplitudes[0].shape[1]))
    tx = None
    for n, (amp, used) in enumerate(zip(s.amplitudes, s.used)):
        idx = rng.integers(0, used, size=size)
        intensity += amp[idx]
        if n == u:
            tx = idx
    if cfg.stats == "poisson":
        r = rng.poisson(s.lam0 * intensity + s.lamb).astype(float)
    elif cfg.stats == "gaussian":
        mean = s.lam0 * intensity + s.lamb
        r = mean + np.sqrt(mean) * rng.standard_normal(mean.shape)
    else:
        r = s.lam0 * intensity + s.lamb
    decided = np.asarray(s.detect(r))
    wrong = decided != tx
    bit_err = np.where(
        decided < 2**s.bits,
        _popcount(np.bitwise_xor(decided, tx)),
        math.ceil(s.bits / 2),
    )
    bit_err = np.where(wrong, bit_err, 0)
    if (bit_err[wrong] < 1).any():
        raise AssertionError("symbol error without a bit error")
    return int(wrong.sum()), int(bit_err.sum()), int((bit_err * bit_err).sum())


def _block_plan(cfg: SimConfig) -> list[int]:
    full, rest = divmod(cfg.trials, cfg.block_size)
    return [cfg.block_size] * full + ([rest] if rest else [])


def _block_task(args):
    cfg, block, size = args
    return _run_block(cfg, block, size)


def run_point(cfg: SimConfig, workers: int = 1) -> BerResult:
    """Simulate until ``trials`` are spent or ``target_errors`` symbol errors occur.

    Stopping is checked at block boundaries in block order, so the result
    is identical for any ``workers``.
    """
    start = time.perf_counter()
    setup = _setup(cfg)
    plan = _block_plan(cfg)
    trials = sym = bit = sq = 0
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        k = 0
        while k < len(plan):
            wave = list(range(k, min(k + max(workers, 1), len(plan))))
            tasks = [(cfg, j, plan[j]) for j in wave]
            outs = list(pool.map(_block_task, tasks)) if pool else [_block_task(t) for t in tasks]
            done = False
            for j, (e, b, q) in zip(wave, outs):
                trials += plan[j]
                sym, bit, sq = sym + e, bit + b, sq + q
                if sym >= cfg.target_errors:
                    done = True
                    break
            if done:
                break
            k = wave[-1] + 1
    finally:
        if pool:
            pool.shutdown()
    return BerResult(
        trials=trials,
        symbol_errors=sym,
        bit_errors=bit,
        bits_per_symbol=setup.bits,
        bit_error_sq=sq,
        lam0=setup.lam0,
        lamb=setup.lamb,
        wall_time=time.perf_counter() - start,
    )


def _apply(cfg: SimConfig, variable: str, value) -> SimConfig:
    field = SWEEP_VARIABLES.get(variable)
    if field is None:
        raise ConfigError(f"cannot sweep {variable!r}; choose from {sorted(SWEEP_VARIABLES)}")
    if field == "p0_w":
        return cfg.replace(channel=dataclasses.replace(cfg.channel, p0_w=float(value)))
    if field == "n_users":
        return cfg.replace(n_users=int(value))
    if field == "lam0":
        return cfg.replace(lam0=float(value))
    return cfg.replace(scheme=str(value), detector="auto")


def sweep(
    cfg: SimConfig, variable: str, values: Sequence, workers: int = 1
) -> list[tuple[SimConfig, BerResult]]:
    """One :func:`run_point` per value, in input order, each with a derived seed."""
    if len(values) == 0:
        raise ConfigError("sweep needs at least one value")
    out = []
    for i, value in enumerate(values):
        point = _apply(cfg, variable, value).replace(seed=derived_seed(cfg.seed, i))
        out.append((point, run_point(point, workers)))
    return out
