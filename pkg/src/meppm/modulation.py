"""Per-user constellations for the multiple-access schemes.

Every constellation keeps its symbols exactly: an integer numerator matrix
(one row per symbol, one column per slot) over a common denominator.  For
the BIBD based schemes the matrix is ``codeword_counts @ C`` where ``C``
holds the Q BIBD codewords as rows and ``codeword_counts[m, j]`` says how
many times codeword ``j`` is summed into symbol ``m``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .codes import BibdCode, Codeword

__all__ = [
    "Scheme",
    "Constellation",
    "Partition",
    "cmeppm_constellation",
    "eppm_constellation",
    "dmeppm_partition",
    "meppm_constellation",
    "ccm_constellation",
    "papr",
    "aggregate_papr",
    "aggregate_peak_and_mean",
    "bits_per_symbol",
    "achievable_bitrate",
    "symbol_rate_for",
    "subset_rank",
    "subset_unrank",
    "multiset_rank",
    "multiset_unrank",
    "dump_constellation_csv",
]


MAX_MEPPM_SYMBOLS = 2**20


class Scheme:
    CMEPPM = "C-MEPPM"
    DMEPPM_I = "D-MEPPM-I"
    DMEPPM_II = "D-MEPPM-II"
    CCM = "CCM"
    EPPM = "EPPM"

    ALL = (CMEPPM, DMEPPM_I, DMEPPM_II, CCM, EPPM)


@dataclass(frozen=True, eq=False)
class Constellation:
    """Ordered symbol list of one user.

    ``numerators`` is an (M, Q) integer array; symbol ``m`` has amplitude
    ``numerators[m, j] / denominator`` in slot ``j`` (fraction of the peak
    transmit power).
    """

    scheme: str
    numerators: np.ndarray
    denominator: int
    user: int = 0
    codeword_counts: np.ndarray | None = None
    labels: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        num = np.asarray(self.numerators, dtype=np.int64)
        if num.ndim != 2 or num.shape[0] == 0:
            raise ValueError("constellation needs a non-empty (M, Q) numerator matrix")
        if (num < 0).any():
            raise ValueError("symbol amplitudes must be nonnegative")
        if self.denominator <= 0:
            raise ValueError("denominator must be positive")
        num.setflags(write=False)
        object.__setattr__(self, "numerators", num)
        if self.codeword_counts is not None:
            counts = np.asarray(self.codeword_counts, dtype=np.int64)
            counts.setflags(write=False)
            object.__setattr__(self, "codeword_counts", counts)

    @property
    def M(self) -> int:
        return self.numerators.shape[0]

    @property
    def Q(self) -> int:
        return self.numerators.shape[1]

    @property
    def bits(self) -> int:
        return bits_per_symbol(self.M)

    def amplitudes(self) -> np.ndarray:
        """Float (M, Q) intensities."""
        return self.numerators / self.denominator

    def symbol(self, m: int) -> list[Fraction]:
        return [Fraction(int(v), self.denominator) for v in self.numerators[m]]

    def __len__(self) -> int:
        return self.M

    def __repr__(self) -> str:
        return f"Constellation({self.scheme}, user={self.user}, M={self.M}, Q={self.Q})"


def _check_word(word: Codeword):
    if word.weight == 0:
        raise ValueError("OOC word has zero weight")


def cmeppm_constellation(bibd: BibdCode, oocword: Codeword, N: int, user: int = 0) -> Constellation:
    """Coded-MEPPM symbols of one user.

    Symbol ``m`` is ``1/(N w)`` times the sum of BIBD codewords
    ``l + m`` over the pulse positions ``l`` of the user's OOC word.  A word
    shorter than Q is zero padded.
    """
    _check_word(oocword)
    if oocword.length > bibd.Q:
        raise ValueError(f"OOC length {oocword.length} exceeds BIBD length {bibd.Q}")
    if N < 1:
        raise ValueError("need at least one active user")
    Q, w = bibd.Q, oocword.weight
    d = np.zeros(Q, dtype=np.int64)
    d[list(oocword.positions)] = 1
    counts = np.stack([np.roll(d, m) for m in range(Q)])
    return Constellation(
        Scheme.CMEPPM,
        counts @ bibd.matrix(),
        N * w,
        user,
        codeword_counts=counts,
        meta=dict(Q=Q, K=bibd.K, lam=bibd.lam, L=oocword.length, w=w, N=N, bibd=bibd),
    )


def eppm_constellation(bibd: BibdCode) -> Constellation:
    """Single-user EPPM: the Q codewords themselves."""
    counts = np.eye(bibd.Q, dtype=np.int64)
    return Constellation(
        Scheme.EPPM,
        bibd.matrix(),
        1,
        codeword_counts=counts,
        meta=dict(Q=bibd.Q, K=bibd.K, lam=bibd.lam, bibd=bibd),
    )


def ccm_constellation(oocword: Codeword, N: int, user: int = 0) -> Constellation:
    """Code cycle modulation: the L cyclic shifts of the OOC word, scaled 1/N."""
    _check_word(oocword)
    if N < 1:
        raise ValueError("need at least one active user")
    d = oocword.to_array()
    return Constellation(
        Scheme.CCM,
        np.stack([np.roll(d, m) for m in range(oocword.length)]),
        N,
        user,
        meta=dict(L=oocword.length, w=oocword.weight, N=N),
    )


# --------------------------------------------------------------------------
# Colex ranking of subsets and multisets
# --------------------------------------------------------------------------

def subset_rank(subset: Sequence[int]) -> int:
    """Colex rank of a set of distinct nonnegative integers."""
    s = sorted(subset)
    if len(set(s)) != len(s):
        raise ValueError("subset has repeated elements")
    return sum(comb(x, i + 1) for i, x in enumerate(s))


def subset_unrank(rank: int, k: int) -> tuple[int, ...]:
    """Inverse of :func:`subset_rank` for ``k``-subsets."""
    if rank < 0:
        raise ValueError("rank must be nonnegative")
    out = []
    for i in range(k, 0, -1):
        x = i - 1
        while comb(x + 1, i) <= rank:
            x += 1
        out.append(x)
        rank -= comb(x, i)
    return tuple(reversed(out))


def multiset_rank(multiset: Sequence[int]) -> int:
    """Colex rank of a multiset (sorted a_i map to distinct a_i + i)."""
    s = sorted(multiset)
    return subset_rank([x + i for i, x in enumerate(s)])


def multiset_unrank(rank: int, k: int) -> tuple[int, ...]:
    return tuple(x - i for i, x in enumerate(subset_unrank(rank, k)))


# --------------------------------------------------------------------------
# Divided MEPPM
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Partition:
    """Disjoint per-user sets of BIBD codeword indices (0-based)."""

    Q: int
    sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for s in self.sets:
            if not s:
                raise ValueError("every user needs at least one codeword")
            if seen & set(s):
                raise ValueError("partition sets overlap")
            if min(s) < 0 or max(s) >= self.Q:
                raise ValueError("codeword index outside 0..Q-1")
            seen |= set(s)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.sets)

    @property
    def complete(self) -> bool:
        return sum(self.sizes) == self.Q


def dmeppm_partition(bibd: BibdCode, sizes: Sequence[int]) -> Partition:
    """Contiguous blocks: user 0 gets codewords 0..q_0-1, user 1 the next q_1, ..."""
    sizes = [int(q) for q in sizes]
    if not sizes or any(q < 1 for q in sizes):
        raise ValueError("all set sizes must be at least 1")
    if sum(sizes) > bibd.Q:
        raise ValueError(f"sizes sum to {sum(sizes)} > Q={bibd.Q}")
    start, sets = 0, []
    for q in sizes:
        sets.append(tuple(range(start, start + q)))
        start += q
    return Partition(bibd.Q, tuple(sets))


def _capped(M: int) -> int:
    if M > MAX_MEPPM_SYMBOLS:
        raise ValueError(f"{M} symbols exceed the exhaustive-detection cap {MAX_MEPPM_SYMBOLS}")
    return M


def meppm_constellation(
    bibd: BibdCode,
    codeword_set: Sequence[int],
    ell: int,
    kind: str = "II",
    user: int = 0,
) -> Constellation:
    """MEPPM symbols built from one user's codeword set.

    Type I sums ``ell`` distinct codewords, giving C(q, ell) symbols.  Type II
    allows repeats; the multisets are taken over the q codewords plus an
    "empty" codeword of zero amplitude (last in the order), which yields
    C(q + ell, ell) symbols.  Symbols follow the colex order of the
    (multi)set and are scaled by 1/Q.
    """
    kind = kind.upper()
    members = tuple(int(i) for i in codeword_set)
    q = len(members)
    if len(set(members)) != q or q == 0:
        raise ValueError("codeword set must be non-empty with distinct indices")
    if min(members) < 0 or max(members) >= bibd.Q:
        raise ValueError("codeword index outside the BIBD")
    if kind == "I":
        if not 1 <= ell < q:
            raise ValueError(f"type-I needs 1 <= ell < q, got ell={ell}, q={q}")
        M = _capped(comb(q, ell))
        labels = tuple(subset_unrank(r, ell) for r in range(M))
        scheme = Scheme.DMEPPM_I
    elif kind == "II":
        if ell < 1:
            raise ValueError(f"type-II needs ell >= 1, got {ell}")
        M = _capped(comb(q + ell, ell))
        labels = tuple(multiset_unrank(r, ell) for r in range(M))
        scheme = Scheme.DMEPPM_II
    else:
        raise ValueError(f"MEPPM type must be 'I' or 'II', got {kind!r}")
    counts = np.zeros((M, bibd.Q), dtype=np.int64)
    for m, label in enumerate(labels):
        for item in label:
            if item < q:  # item q is the empty codeword
                counts[m, members[item]] += 1
    return Constellation(
        scheme,
        counts @ bibd.matrix(),
        bibd.Q,
        user,
        codeword_counts=counts,
        labels=labels,
        meta=dict(Q=bibd.Q, K=bibd.K, lam=bibd.lam, q=q, ell=ell, members=members, bibd=bibd),
    )


# --------------------------------------------------------------------------
# PAPR and rates
# --------------------------------------------------------------------------

def papr(trace) -> float:
    """Peak over time-average of a nonnegative intensity trace (any shape)."""
    x = np.asarray(trace, dtype=float)
    mean = x.mean() if x.size else 0.0
    if mean <= 0:
        raise ValueError("PAPR undefined for an all-zero trace")
    return float(x.max() / mean)


def aggregate_peak_and_mean(constellations: Iterable[Constellation]) -> tuple[Fraction, Fraction]:
    """Exact worst-case peak and equiprobable time-average of the summed signal.

    The peak is the largest slot amplitude any combination of user symbols
    can produce; the mean averages over slots and equiprobable symbols.
    """
    peak = None
    mean = Fraction(0)
    for c in constellations:
        per_slot = [Fraction(int(v), c.denominator) for v in c.numerators.max(axis=0)]
        peak = per_slot if peak is None else [a + b for a, b in zip(peak, per_slot)]
        mean += Fraction(int(c.numerators.sum()), c.denominator * c.M * c.Q)
    if peak is None:
        raise ValueError("no constellations given")
    return max(peak), mean


def aggregate_papr(constellations: Iterable[Constellation], full_scale: Fraction | int | None = None) -> Fraction:
    """Peak-to-average ratio of the summed multiuser signal.

    By default the peak is the largest slot amplitude the users can
    actually produce together.  Passing ``full_scale`` (1 for the LED array
    rating that the C-MEPPM and CCM normalisations target) measures against
    that fixed peak instead.
    """
    peak, mean = aggregate_peak_and_mean(constellations)
    if mean == 0:
        raise ValueError("PAPR undefined for an all-zero signal")
    if full_scale is not None:
        full_scale = Fraction(full_scale)
        if peak > full_scale:
            raise ValueError(f"signal peak {peak} exceeds the full-scale value {full_scale}")
        peak = full_scale
    return peak / mean


def bits_per_symbol(M: int) -> int:
    if M < 2:
        raise ValueError(f"constellation of size {M} carries no bits")
    return M.bit_length() - 1


def achievable_bitrate(constellation: Constellation | int, symbol_rate: float) -> float:
    """floor(log2 M) bits per symbol times the symbol rate."""
    M = constellation if isinstance(constellation, int) else constellation.M
    if symbol_rate <= 0:
        raise ValueError("symbol rate must be positive")
    return bits_per_symbol(M) * symbol_rate


def symbol_rate_for(bitrate: float, M: int) -> float:
    """Symbol rate that carries ``bitrate`` with floor(log2 M) bits per symbol."""
    if bitrate <= 0:
        raise ValueError("bitrate must be positive")
    return bitrate / bits_per_symbol(M)


def dump_constellation_csv(constellation: Constellation, fh) -> None:
    """Write ``symbol_index, slot_index, amplitude_num, amplitude_den`` rows."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["symbol_index", "slot_index", "amplitude_num", "amplitude_den"])
    den = constellation.denominator
    for m, row in enumerate(constellation.numerators):
        for j, v in enumerate(row):
            g = math.gcd(int(v), den)
            writer.writerow([m, j, int(v) // g, den // g])
