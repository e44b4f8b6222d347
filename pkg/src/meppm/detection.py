"""Correlation receivers and symbol decision rules.

All detectors take either one received vector (length Q) or a batch
(shape ``(B, Q)``) and return an index or an index array.  Ties go to the
lowest symbol index.

Poisson counts are integers; every correlator statistic below is built
from integer-valued float64 products so BLAS sums stay exact and genuinely
tied symbols compare equal bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .codes import BibdCode, Codeword
from .modulation import Constellation

__all__ = [
    "CorrelatorBank",
    "SudWeights",
    "bibd_correlate",
    "ooc_correlate",
    "detect_eppm",
    "detect_cmeppm_corr",
    "sud_weights",
    "detect_sud",
    "sud_loglikelihood",
    "detect_meppm",
    "detect_ccm",
]


@lru_cache(maxsize=64)
def _codeword_matrix(bibd: BibdCode) -> np.ndarray:
    return bibd.matrix().astype(float)


@lru_cache(maxsize=64)
def _shift_matrix(word: Codeword, length: int) -> np.ndarray:
    """Columns are the cyclic shifts d^(m) of ``word`` zero padded to ``length``."""
    d = np.zeros(length)
    d[list(word.positions)] = 1.0
    return np.stack([np.roll(d, m) for m in range(length)], axis=1)


@lru_cache(maxsize=64)
def _cascade_matrix(bibd: BibdCode, word: Codeword) -> np.ndarray:
    # y = (r C^T) D  with D[:, m] = d^(m)
    return _codeword_matrix(bibd).T @ _shift_matrix(word, bibd.Q)


def _as_counts(r) -> np.ndarray:
    return np.asarray(r, dtype=float)


def _argmax(stat: np.ndarray):
    idx = np.argmax(stat, axis=-1)  # first maximum, i.e. lowest index
    return int(idx) if np.ndim(idx) == 0 else idx


def _check_length(r: np.ndarray, n: int):
    if r.shape[-1] != n:
        raise ValueError(f"received vector has length {r.shape[-1]}, expected {n}")


@dataclass(frozen=True)
class CorrelatorBank:
    """BIBD correlator of the single-user MEPPM receiver.

    Plain mode returns ``z_j = <r, c_j>``.  Differential mode subtracts the
    complement branch weighted by ``gamma = lambda / (K - lambda)``.
    """

    bibd: BibdCode
    differential: bool = False

    @property
    def gamma(self) -> float:
        return self.bibd.lam / (self.bibd.K - self.bibd.lam)

    def scaled(self, r) -> np.ndarray:
        """Decision-equivalent integer form: ``z`` or ``K z - lambda sum(r)``.

        ``(K - lambda) * z_differential`` equals the latter, so both share an
        argmax with the float output of :meth:`__call__`.
        """
        r = _as_counts(r)
        _check_length(r, self.bibd.Q)
        z = r @ _codeword_matrix(self.bibd).T
        if not self.differential:
            return z
        return self.bibd.K * z - self.bibd.lam * r.sum(axis=-1, keepdims=True)

    def __call__(self, r) -> np.ndarray:
        out = self.scaled(r)
        if self.differential:
            out = out / (self.bibd.K - self.bibd.lam)
        return out


def bibd_correlate(r, bibd: BibdCode, differential: bool = False) -> np.ndarray:
    return CorrelatorBank(bibd, differential)(r)


def ooc_correlate(z, oocword: Codeword) -> np.ndarray:
    """``y_m = <z, d^(m)>`` over all cyclic shifts of the OOC word."""
    z = np.asarray(z, dtype=float)
    _check_length(z, oocword.length)
    return z @ _shift_matrix(oocword, oocword.length)


def detect_eppm(r, bibd: BibdCode, differential: bool = False):
    """Single-user EPPM decision: the codeword with the largest correlation."""
    return _argmax(CorrelatorBank(bibd, differential).scaled(r))


def detect_cmeppm_corr(r, bibd: BibdCode, oocword: Codeword, differential: bool = False):
    """BIBD correlator followed by the OOC correlator; pick the largest output."""
    if oocword.length > bibd.Q:
        raise ValueError("OOC word longer than the BIBD")
    r = _as_counts(r)
    _check_length(r, bibd.Q)
    if not differential:
        return _argmax(r @ _cascade_matrix(bibd, oocword))
    z = CorrelatorBank(bibd, True).scaled(r)
    return _argmax(z @ _shift_matrix(oocword, bibd.Q))


# --------------------------------------------------------------------------
# Optimum single-user detector
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SudWeights:
    """Log-likelihood weights of one C-MEPPM user.

    ``coverage[j]`` counts the user's selected BIBD codewords covering slot
    ``j`` in symbol 0; ``v[j]`` is the slot weight derived from it.
    """

    v: np.ndarray
    coverage: np.ndarray
    level_values: np.ndarray  # weight for each distinct coverage level
    levels: np.ndarray

    @property
    def Q(self) -> int:
        return self.v.size


def sud_weights(oocword: Codeword, bibd: BibdCode, N: int, lamb_over_lam0: float) -> SudWeights:
    """``v_j = log(coverage_j / w + N lamb/lam0 + (N - 1) K / Q)``."""
    if lamb_over_lam0 < 0:
        raise ValueError("background ratio must be nonnegative")
    if oocword.length > bibd.Q:
        raise ValueError("OOC word longer than the BIBD")
    w = oocword.weight
    d = np.zeros(bibd.Q, dtype=np.int64)
    d[list(oocword.positions)] = 1
    coverage = d @ bibd.matrix()
    offset = N * lamb_over_lam0 + (N - 1) * bibd.K / bibd.Q
    levels = np.unique(coverage)
    arg = levels / w + offset
    if (arg <= 0).any():
        raise ValueError(
            "log of a nonpositive value: with N=1 and no background some slot is never lit"
        )
    level_values = np.log(arg)
    v = level_values[np.searchsorted(levels, coverage)]
    return SudWeights(v, coverage, level_values, levels)


@lru_cache(maxsize=64)
def _level_masks(coverage_bytes: bytes, Q: int) -> tuple[np.ndarray, ...]:
    coverage = np.frombuffer(coverage_bytes, dtype=np.int64)
    out = []
    for level in np.unique(coverage):
        base = (coverage == level).astype(float)
        out.append(np.stack([np.roll(base, m) for m in range(Q)], axis=1))
    return tuple(out)


def detect_sud(r, weights: SudWeights, Q: int | None = None):
    """``argmax_m <r, v^(m)>`` over the Q cyclic shifts of the weights.

    The statistic is accumulated level by level (integer slot sums times
    the level weight) so every shift is evaluated with the same operations.
    """
    Q = weights.Q if Q is None else Q
    if Q != weights.Q:
        raise ValueError("weight length differs from Q")
    r = _as_counts(r)
    _check_length(r, Q)
    masks = _level_masks(weights.coverage.astype(np.int64).tobytes(), Q)
    stat = 0.0
    for value, mask in zip(weights.level_values, masks):
        stat = stat + value * (r @ mask)
    return _argmax(stat)


def sud_loglikelihood(r, constellation: Constellation, lam0: float, lamb: float, N: int) -> np.ndarray:
    """Full Poisson log-likelihood (up to r-only terms) of every symbol.

    Treats the other users' mean as extra background
    ``lamb + (N - 1) lam0 K / (N Q)``.  Used as the reference rule for
    :func:`detect_sud`.
    """
    K, Q = constellation.meta["K"], constellation.Q
    lamb_eff = lamb + (N - 1) * lam0 * K / (N * Q)
    means = lam0 * constellation.amplitudes() + lamb_eff  # (M, Q)
    r = _as_counts(r)
    return r @ np.log(means).T - means.sum(axis=1)


# --------------------------------------------------------------------------
# MEPPM and CCM
# --------------------------------------------------------------------------

def detect_meppm(r, constellation: Constellation, levels: tuple[float, float] | None = None):
    """Exhaustive symbol decision from the plain BIBD correlator output.

    Without ``levels`` this is maximum correlation of the mean-centred
    correlator output with each symbol's codeword multiplicity vector.
    With ``levels = (lam0, lamb)`` the common offset of the correlator
    outputs is estimated from the total count and each candidate pays half
    its energy, i.e. nearest symbol in correlator space; this is the rule
    to use when symbols carry different numbers of codewords (type II).
    """
    counts = constellation.codeword_counts
    if counts is None:
        raise ValueError("constellation has no BIBD codeword structure")
    meta = constellation.meta
    Q, K, lam = meta["Q"], meta["K"], meta["lam"]
    r = _as_counts(r)
    _check_length(r, Q)
    bibd = meta.get("bibd")
    if bibd is None:
        raise ValueError("constellation lacks its BIBD reference")
    z = r @ _codeword_matrix(bibd).T
    A = counts.astype(float)
    if levels is None:
        zc = z - z.mean(axis=-1, keepdims=True)
        return _argmax(zc @ A.T)
    lam0, lamb = levels
    if lam0 <= 0:
        raise ValueError("signal level must be positive")
    total = (r.sum(axis=-1, keepdims=True) - Q * lamb) * Q / (lam0 * K)
    offset = lam0 * lam * total / Q + K * lamb
    gain = lam0 * (K - lam) / Q
    e = z - offset
    return _argmax(e @ A.T - 0.5 * gain * (A * A).sum(axis=1))


def detect_ccm(r, oocword: Codeword):
    """CCM decision: the OOC shift with the largest correlation."""
    r = _as_counts(r)
    _check_length(r, oocword.length)
    return _argmax(r @ _shift_matrix(oocword, oocword.length))
