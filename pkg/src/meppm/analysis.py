"""Closed-form error estimates for C-MEPPM and D-MEPPM.

Bounds can legitimately exceed one; every estimator returns an
:class:`Estimate` holding the raw value and the value clamped to [0, 1].
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .codes import BibdCode, OocCode
from .modulation import bits_per_symbol, cmeppm_constellation

log = logging.getLogger(__name__)

__all__ = [
    "Estimate",
    "RegimeError",
    "CmeppmAnalysisParams",
    "DmeppmAnalysisParams",
    "cmeppm_highsnr_bound",
    "cmeppm_mai_ser",
    "cmeppm_mai_ber",
    "mai_pairwise_probability",
    "cmeppm_exact_union_bound",
    "cmeppm_ser",
    "dmeppm_multiplicity",
    "dmeppm_ber",
    "ser_to_ber",
    "gaussian_tail",
]


class RegimeError(ValueError):
    """The high-SNR bound is outside its validity region (alpha N >= w)."""


class Estimate(NamedTuple):
    raw: float
    value: float


def _estimate(raw: float, what: str) -> Estimate:
    value = min(max(raw, 0.0), 1.0)
    if value != raw:
        log.info("%s: raw value %.6g clamped to %.6g", what, raw, value)
    return Estimate(raw, value)


def gaussian_tail(mean: float, std: float) -> float:
    """P(X < 0) for X ~ N(mean, std^2); a zero-variance tie counts one half."""
    if std <= 0:
        return 0.0 if mean > 0 else (0.5 if mean == 0 else 1.0)
    return 0.5 * math.erfc(mean / (math.sqrt(2.0) * std))


@dataclass(frozen=True)
class CmeppmAnalysisParams:
    Q: int
    K: int
    lam: int
    L: int
    w: int
    alpha: int
    N: int
    lam0: float
    lamb: float = 0.0

    def __post_init__(self):
        if self.L > self.Q:
            raise ValueError("OOC length must not exceed Q")
        if self.N < 1:
            raise ValueError("need at least one user")


@dataclass(frozen=True)
class DmeppmAnalysisParams:
    Q: int
    K: int
    lam: int
    ells: tuple[int, ...]  # branch count of every active user; ells[0] is the desired one
    q1: int
    kind: str
    lam0: float

    def __post_init__(self):
        object.__setattr__(self, "ells", tuple(self.ells))
        if self.kind.upper() not in ("I", "II"):
            raise ValueError("kind must be 'I' or 'II'")
        object.__setattr__(self, "kind", self.kind.upper())
        if not self.ells:
            raise ValueError("need at least one user")


def cmeppm_highsnr_bound(p: CmeppmAnalysisParams) -> Estimate:
    """Shot-noise limited union bound ``w^2/(2 alpha) erfc(mu / (sqrt(2) sigma))``.

    mu = (lam0 K / (N w)) (w - alpha N),  sigma^2 = 2 lam0 lambda w (w - 1) + mu.
    Only meaningful while alpha N < w; otherwise :class:`RegimeError`.
    """
    if p.alpha * p.N >= p.w:
        raise RegimeError(
            f"alpha*N = {p.alpha * p.N} >= w = {p.w}: MAI dominates, use cmeppm_mai_ser"
        )
    mu = p.lam0 * p.K / (p.N * p.w) * (p.w - p.alpha * p.N)
    var = 2 * p.lam0 * p.lam * p.w * (p.w - 1) + mu
    raw = p.w**2 / (2 * p.alpha) * math.erfc(mu / (math.sqrt(2 * var)))
    return _estimate(raw, "cmeppm_highsnr_bound")


def mai_pairwise_probability(N: int, w: int, alpha: int, L: int, exact: bool = False) -> float:
    """Probability that an interferer-only count favours a wrong shift.

    ``exact`` evaluates the double binomial sum of the Bernoulli model, the
    default is its small-p limit ``C(N-1, w-1) p^(w-1) (1-p)^(N-w)``.
    """
    p = w * (w - alpha) / L
    if not 0 <= p < 1:
        raise ValueError(f"collision probability p = {p} outside [0, 1)")
    if N < w:
        return 0.0
    if not exact:
        return math.comb(N - 1, w - 1) * p ** (w - 1) * (1 - p) ** (N - w)
    n = N - 1

    def pmf(k):
        return math.comb(n, k) * p**k * (1 - p) ** (n - k)

    return sum(
        pmf(j) * sum(pmf(i) for i in range(w - 1 + j, n + 1)) for j in range(0, N - w + 1)
    )


def cmeppm_mai_ser(N: int, w: int, alpha: int, L: int) -> Estimate:
    """Weak-MAI symbol error estimate ``w^2 C(N-1, w-1) p^(w-1) (1-p)^(N-w)``.

    p = w (w - alpha) / L.  Zero when N < w.
    """
    return _estimate(w**2 * mai_pairwise_probability(N, w, alpha, L), "cmeppm_mai_ser")


def cmeppm_mai_ber(N: int, w: int, alpha: int, L: int, M: int | None = None) -> Estimate:
    """:func:`cmeppm_mai_ser` converted to BER for an M-ary (default L) alphabet."""
    ser = cmeppm_mai_ser(N, w, alpha, L)
    M = L if M is None else M
    return Estimate(ser_to_ber(ser.raw, M, clamp=False), ser_to_ber(ser.value, M))


def cmeppm_ser(p: CmeppmAnalysisParams) -> tuple[Estimate, str]:
    """Pick the applicable C-MEPPM estimate; returns it with its name."""
    if p.alpha * p.N < p.w:
        return cmeppm_highsnr_bound(p), "highsnr"
    return cmeppm_mai_ser(p.N, p.w, p.alpha, p.L), "mai"


def cmeppm_exact_union_bound(
    bibd: BibdCode,
    ooc: OocCode,
    N: int,
    lam0: float,
    lamb: float = 0.0,
    max_terms: int = 10_000_000,
) -> Estimate:
    """Union bound with every interferer symbol combination enumerated.

    Each pairwise term P(y_m' > y_m1) is the Gaussian tail of y_m1 - y_m'
    with its exact conditional mean and variance under Poisson counts.
    By cyclic symmetry the average over the desired symbol m1 equals the
    value at m1 = 0.
    """
    if N > ooc.N:
        raise ValueError(f"code has {ooc.N} words, {N} users requested")
    Q = bibd.Q
    L = Q
    n_terms = (Q - 1) * L ** (N - 1)
    if n_terms > max_terms:
        raise OverflowError(f"union bound needs {n_terms} terms (> {max_terms})")
    users = [cmeppm_constellation(bibd, ooc.words[n], N).amplitudes() for n in range(N)]
    C = bibd.matrix().astype(float)
    d = np.zeros(Q)
    d[list(ooc.words[0].positions)] = 1
    D = np.stack([np.roll(d, m) for m in range(Q)], axis=1)
    G = C.T @ D  # y = r @ G
    g = G[:, [0]] - G[:, 1:]  # column m'-1: coefficients of y_0 - y_m'
    total = 0.0
    for combo in itertools.product(range(L), repeat=N - 1):
        intensity = users[0][0].copy()
        for n, m in enumerate(combo, start=1):
            intensity += users[n][m]
        mean_r = lam0 * intensity + lamb
        means = mean_r @ g
        stds = np.sqrt(mean_r @ (g * g))
        total += sum(gaussian_tail(mu, s) for mu, s in zip(means, stds))
    raw = total / L ** (N - 1)
    return _estimate(raw, "cmeppm_exact_union_bound")


def dmeppm_multiplicity(ell1: int, q1: int, kind: str) -> float:
    """Error multiplicity M' of the D-MEPPM BER approximation."""
    kind = kind.upper()
    if kind == "I":
        if ell1 == q1:
            log.warning("type-I with ell1 = q1 has a single symbol; M' = 0")
        return ell1 * (q1 - ell1) / 8
    if kind == "II":
        den = 8 * (q1 + ell1) * (q1 + ell1 - 1) * (q1 + ell1 - 2)
        if den == 0:
            raise ValueError("type-II M' undefined for q1 + ell1 <= 2")
        return ell1 * q1**2 * (q1 - 1) ** 2 / den
    raise ValueError(f"kind must be 'I' or 'II', got {kind!r}")


def dmeppm_ber(p: DmeppmAnalysisParams) -> Estimate:
    """``M' erfc(sqrt((K-lambda)^2 (lam0/Q) / (sum(ell) lambda K + (K - 2 lambda) K)))``."""
    mult = dmeppm_multiplicity(p.ells[0], p.q1, p.kind)
    den = sum(p.ells) * p.lam * p.K + (p.K - 2 * p.lam) * p.K
    if den <= 0:
        raise ValueError("nonpositive variance term")
    arg = math.sqrt((p.K - p.lam) ** 2 * (p.lam0 / p.Q) / den)
    return _estimate(mult * math.erfc(arg), "dmeppm_ber")


def ser_to_ber(ser: float, M: int, clamp: bool = True) -> float:
    """Orthogonal-signalling conversion ``ser 2^(b-1) / (2^b - 1)``, b = floor(log2 M)."""
    if clamp and not 0 <= ser <= 1:
        raise ValueError(f"symbol error rate {ser} outside [0, 1]")
    b = bits_per_symbol(M)
    return ser * 2 ** (b - 1) / (2**b - 1)


def ser_to_ber_many(ser: Sequence[float], M: int) -> list[float]:
    return [ser_to_ber(s, M) for s in ser]
