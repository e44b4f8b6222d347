"""Binary codes used by the multiple-access schemes.

Two families are handled here:

* cyclic (Q, K, lambda) block designs (BIBD codes), given by a single base
  word whose Q cyclic shifts pairwise correlate exactly lambda;
* (L, w, alpha) optical orthogonal codes (OOC), a list of base words with
  bounded auto- and cross-correlation.

Words are stored packed in a Python ``int`` (bit ``i`` is slot ``i``) so
every correlation is a popcount of an AND.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

__all__ = [
    "Codeword",
    "BibdCode",
    "OocCode",
    "VerificationReport",
    "CodeFormatError",
    "CodeVerificationError",
    "InfeasibleSearchError",
    "cyclic_shift",
    "correlation",
    "complement",
    "paley_difference_set",
    "msequence_difference_set",
    "bibd_from_positions",
    "verify_bibd",
    "johnson_bound",
    "search_ooc",
    "verify_ooc",
    "load_code",
    "save_code",
    "catalog_entries",
    "load_catalog",
    "PRIMITIVE_POLYNOMIALS",
]


class CodeFormatError(ValueError):
    """Raised for malformed code catalog files."""


class CodeVerificationError(ValueError):
    """Raised when a loaded code fails its correlation checks."""

    def __init__(self, message: str, report: "VerificationReport"):
        super().__init__(message)
        self.report = report


class InfeasibleSearchError(RuntimeError):
    """Raised when an OOC search cannot reach the requested size."""

    def __init__(self, message: str, best: "OocCode | None" = None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class Codeword:
    """Fixed-length binary word.

    ``bits`` holds slot ``i`` in bit ``i``.  Use :meth:`from_string` /
    :meth:`from_positions` rather than building the integer by hand.
    """

    bits: int
    length: int

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("codeword length must be positive")
        if self.bits < 0 or self.bits >> self.length:
            raise ValueError("bits do not fit in the codeword length")

    @classmethod
    def from_string(cls, text: str) -> "Codeword":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a 0/1 string: {text!r}")
        bits = 0
        for i, ch in enumerate(text):
            if ch == "1":
                bits |= 1 << i
        return cls(bits, len(text))

    @classmethod
    def from_positions(cls, positions: Iterable[int], length: int) -> "Codeword":
        bits = 0
        for p in positions:
            bits |= 1 << (p % length)
        return cls(bits, length)

    @classmethod
    def from_array(cls, values: Sequence[int]) -> "Codeword":
        return cls.from_positions((i for i, v in enumerate(values) if v), len(values))

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.length) if self.bits >> i & 1)

    def to_array(self, dtype=np.int64) -> np.ndarray:
        out = np.zeros(self.length, dtype=dtype)
        out[list(self.positions)] = 1
        return out

    def __str__(self) -> str:
        return "".join("1" if self.bits >> i & 1 else "0" for i in range(self.length))

    def __len__(self) -> int:
        return self.length


def cyclic_shift(word: Codeword, m: int) -> Codeword:
    """Rotate ``word`` right by ``m`` slots: ``out[i] = word[(i - m) % n]``."""
    n = word.length
    m %= n
    if m == 0:
        return word
    mask = (1 << n) - 1
    return Codeword(((word.bits << m) | (word.bits >> (n - m))) & mask, n)


def correlation(a: Codeword, b: Codeword) -> int:
    if a.length != b.length:
        raise ValueError(f"length mismatch: {a.length} != {b.length}")
    return (a.bits & b.bits).bit_count()


def complement(word: Codeword) -> Codeword:
    return Codeword(~word.bits & ((1 << word.length) - 1), word.length)


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of an exhaustive correlation check.

    ``violations`` holds ``(what, i, j, observed)`` tuples; ``i``/``j`` are
    shift indices for BIBD codes and ``(word, shift)`` style indices for OOCs.
    """

    ok: bool
    violations: tuple = ()

    def __bool__(self) -> bool:
        return self.ok

    def describe(self, limit: int = 5) -> str:
        if self.ok:
            return "ok"
        shown = ", ".join(str(v) for v in self.violations[:limit])
        more = len(self.violations) - limit
        return shown + (f" (+{more} more)" if more > 0 else "")


@dataclass(frozen=True)
class BibdCode:
    """Cyclic (Q, K, lambda) code: ``base`` plus its Q cyclic shifts."""

    Q: int
    K: int
    lam: int
    base: Codeword

    def __post_init__(self):
        if self.base.length != self.Q:
            raise ValueError("base word length must equal Q")
        if not (1 <= self.K < self.Q) or not (0 <= self.lam < self.K):
            raise ValueError(f"invalid BIBD parameters ({self.Q},{self.K},{self.lam})")

    @property
    def params(self) -> tuple[int, int, int]:
        return (self.Q, self.K, self.lam)

    @property
    def papr(self) -> float:
        return self.Q / self.K

    def codeword(self, j: int) -> Codeword:
        return cyclic_shift(self.base, j)

    def codewords(self) -> list[Codeword]:
        return [self.codeword(j) for j in range(self.Q)]

    def matrix(self) -> np.ndarray:
        """Q x Q 0/1 matrix whose row ``j`` is codeword ``j``."""
        base = self.base.to_array()
        return np.stack([np.roll(base, j) for j in range(self.Q)])

    def complemented(self) -> "BibdCode":
        Q, K, lam = self.params
        return BibdCode(Q, Q - K, Q - 2 * K + lam, complement(self.base))

    def __str__(self) -> str:
        return f"({self.Q},{self.K},{self.lam})-BIBD"


@dataclass(frozen=True)
class OocCode:
    """(L, w, alpha) optical orthogonal code."""

    L: int
    w: int
    alpha: int
    words: tuple[Codeword, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        for word in self.words:
            if word.length != self.L:
                raise ValueError("OOC word length must equal L")

    @property
    def N(self) -> int:
        return len(self.words)

    @property
    def params(self) -> tuple[int, int, int]:
        return (self.L, self.w, self.alpha)

    def subset(self, n: int) -> "OocCode":
        if n > self.N:
            raise ValueError(f"code has only {self.N} words, {n} requested")
        return OocCode(self.L, self.w, self.alpha, self.words[:n])

    def __iter__(self) -> Iterator[Codeword]:
        return iter(self.words)

    def __str__(self) -> str:
        return f"({self.L},{self.w},{self.alpha})-OOC[{self.N}]"


Code = Union[BibdCode, OocCode]


# --------------------------------------------------------------------------
# BIBD constructions
# --------------------------------------------------------------------------

def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def bibd_from_positions(Q: int, positions: Iterable[int]) -> BibdCode:
    """Build a BIBD from a difference set; lambda is inferred from its size."""
    base = Codeword.from_positions(positions, Q)
    K = base.weight
    if (K * (K - 1)) % (Q - 1):
        raise ValueError(f"{K}-subset of Z_{Q} cannot be a difference set")
    return BibdCode(Q, K, K * (K - 1) // (Q - 1), base)


def paley_difference_set(Q: int) -> BibdCode:
    """Quadratic residues mod a prime ``Q = 3 (mod 4)``: a (Q, (Q-1)/2, (Q-3)/4) code."""
    if not _is_prime(Q) or Q % 4 != 3:
        raise ValueError(f"Paley construction needs a prime Q = 3 mod 4, got {Q}")
    residues = {(x * x) % Q for x in range(1, Q)}
    return BibdCode(Q, (Q - 1) // 2, (Q - 3) // 4, Codeword.from_positions(residues, Q))


# Exponents of the non-leading terms of a primitive polynomial over GF(2),
# e.g. 5: (2, 0) is x^5 + x^2 + 1.
PRIMITIVE_POLYNOMIALS: dict[int, tuple[int, ...]] = {
    2: (1, 0),
    3: (1, 0),
    4: (1, 0),
    5: (2, 0),
    6: (1, 0),
    7: (1, 0),
    8: (4, 3, 2, 0),
    9: (4, 0),
    10: (3, 0),
    11: (2, 0),
    12: (6, 4, 1, 0),
    13: (4, 3, 1, 0),
    14: (10, 6, 1, 0),
    15: (1, 0),
    16: (12, 3, 1, 0),
}


def _msequence(m: int) -> list[int]:
    taps = PRIMITIVE_POLYNOMIALS[m]
    period = (1 << m) - 1
    # s[k+m] = sum of s[k+t] over the non-leading exponents t
    seq = [0] * (m - 1) + [1]
    while len(seq) < period:
        k = len(seq) - m
        seq.append(sum(seq[k + t] for t in taps) & 1)
    return seq


def msequence_difference_set(m: int) -> BibdCode:
    """Zero positions of a period ``2^m - 1`` m-sequence.

    Gives a (2^m - 1, 2^(m-1) - 1, 2^(m-2) - 1) code.
    """
    if m not in PRIMITIVE_POLYNOMIALS:
        raise ValueError(f"no primitive polynomial tabulated for m={m} (need 2..16)")
    seq = _msequence(m)
    Q = len(seq)
    zeros = [i for i, s in enumerate(seq) if s == 0]
    if len(zeros) != (1 << (m - 1)) - 1:
        raise ValueError(f"tabulated polynomial for m={m} is not primitive")
    return BibdCode(Q, len(zeros), (1 << (m - 2)) - 1, Codeword.from_positions(zeros, Q))


def verify_bibd(code: BibdCode) -> VerificationReport:
    """Check the fixed cross-correlation property over every shift pair."""
    violations = []
    if code.base.weight != code.K:
        violations.append(("weight", 0, 0, code.base.weight))
    words = code.codewords()
    for m in range(code.Q):
        for n in range(m + 1, code.Q):
            c = (words[m].bits & words[n].bits).bit_count()
            if c != code.lam:
                violations.append(("cross", m, n, c))
    return VerificationReport(not violations, tuple(violations))


# --------------------------------------------------------------------------
# OOCs
# --------------------------------------------------------------------------

def johnson_bound(L: int, w: int, alpha: int) -> int:
    """Johnson upper bound on the number of (L, w, alpha) OOC words."""
    if not (0 <= alpha < w <= L):
        raise ValueError(f"need 0 <= alpha < w <= L, got ({L},{w},{alpha})")
    if alpha == 0:
        if w != 1:
            raise ValueError("alpha = 0 is only achievable with w = 1")
        return L
    bound = (L - alpha) // (w - alpha)
    for i in range(alpha - 1, 0, -1):
        bound = (L - i) * bound // (w - i)
    return bound // w


def verify_ooc(code: OocCode) -> VerificationReport:
    """Exhaustive auto/cross-correlation check.

    Violations: ``("weight", n, -, observed)``, ``("auto", n, shift, observed)``
    and ``("cross", (n, n2), shift, observed)``.
    """
    violations = []
    L, alpha = code.L, code.alpha
    for n, word in enumerate(code.words):
        if word.weight != code.w:
            violations.append(("weight", n, None, word.weight))
        for s in range(1, L):
            c = correlation(word, cyclic_shift(word, s))
            if c > alpha:
                violations.append(("auto", n, s, c))
    for n in range(code.N):
        for n2 in range(n + 1, code.N):
            a = code.words[n]
            for s in range(L):
                c = correlation(a, cyclic_shift(code.words[n2], s))
                if c > alpha:
                    violations.append(("cross", (n, n2), s, c))
    return VerificationReport(not violations, tuple(violations))


def _profiles(positions: Sequence[np.ndarray], L: int) -> np.ndarray:
    """Row k counts, for every residue d, the pulses of word k at d (mod L)."""
    out = np.zeros((len(positions), L), dtype=np.int64)
    for k, pos in enumerate(positions):
        out[k, pos] = 1
    return out


def _correlation_excess(word: np.ndarray, accepted: np.ndarray, alpha: int) -> int:
    """Total amount by which ``word`` (0/1 array) breaks the alpha constraints."""
    fw = np.fft.rfft(word)
    L = word.size
    auto = np.rint(np.fft.irfft(fw * np.conj(fw), L)).astype(np.int64)
    excess = int(np.clip(auto[1:] - alpha, 0, None).sum())
    if accepted.size:
        fa = np.fft.rfft(accepted, axis=1)
        cross = np.rint(np.fft.irfft(fa * np.conj(fw), L, axis=1)).astype(np.int64)
        excess += int(np.clip(cross - alpha, 0, None).sum())
    return excess


class _WordSearch:
    """Randomized depth-first construction of one word.

    Correlation of A with B shifted by s counts the pairs (a, b) with
    a - b = s (mod L), so constraints are tracked as difference counts:
    ``auto[d]`` for the partial word and ``cross[k, d]`` against accepted
    word k.  Adding pulses only increases counts, so partial violations prune.
    """

    def __init__(self, L, w, alpha, accepted, rng, node_limit):
        self.L, self.w, self.alpha = L, w, alpha
        self.accepted = accepted  # (W, w) array of accepted pulse positions
        self.rng = rng
        self.node_limit = node_limit
        self.nodes = 0

    def run(self) -> list[int] | None:
        L = self.L
        auto = np.zeros(L, dtype=np.int64)
        cross = np.zeros((len(self.accepted), L), dtype=np.int64)
        for k, pos in enumerate(self.accepted):
            np.add.at(cross[k], (-pos) % L, 1)
        # first pulse pinned to slot 0: shifting a word never changes its correlations
        return self._extend([0], auto, cross)

    def _candidates(self, chosen, auto, cross):
        L, alpha = self.L, self.alpha
        remaining = self.w - len(chosen)
        x = np.arange(chosen[-1] + 1, L - remaining + 1)
        if x.size == 0:
            return x
        ch = np.asarray(chosen)
        ok = (auto[(x[:, None] - ch) % L] < alpha).all(axis=1)
        ok &= (auto[(ch - x[:, None]) % L] < alpha).all(axis=1)
        if len(self.accepted):
            k = np.arange(len(self.accepted))[None, :, None]
            idx = (x[:, None, None] - self.accepted[None, :, :]) % L
            ok &= (cross[k, idx] < alpha).all(axis=(1, 2))
        x = x[ok]
        self.rng.shuffle(x)
        return x

    def _extend(self, chosen, auto, cross):
        if len(chosen) == self.w:
            return list(chosen)
        L, alpha = self.L, self.alpha
        ch = np.asarray(chosen)
        for x in self._candidates(chosen, auto, cross):
            self.nodes += 1
            if self.nodes > self.node_limit:
                return None
            new_auto = auto.copy()
            np.add.at(new_auto, (x - ch) % L, 1)
            np.add.at(new_auto, (ch - x) % L, 1)
            if new_auto.max() > alpha:  # 2x = c_i + c_j doubles a difference
                continue
            new_cross = cross.copy()
            if len(self.accepted):
                rows = np.repeat(np.arange(len(self.accepted)), self.accepted.shape[1])
                np.add.at(new_cross, (rows, ((x - self.accepted) % L).ravel()), 1)
            found = self._extend(chosen + [int(x)], new_auto, new_cross)
            if found is not None:
                return found
            if self.nodes > self.node_limit:
                return None
        return None


def _local_search_word(L, w, alpha, accepted, rng, iterations) -> list[int] | None:
    """Tabu min-conflicts repair of a random word.

    Each step pulls the pulse involved in the most over-alpha correlations
    and reinserts it at the slot creating the fewest new ones.
    """
    acc = np.asarray(accepted, dtype=np.int64).reshape(-1, w)
    kk = np.repeat(np.arange(len(acc)), w)
    flat_b = acc.ravel()
    pos = [int(p) for p in rng.choice(L, size=w, replace=False)]
    auto = np.zeros(L, dtype=np.int64)
    cross = np.zeros((len(acc), L), dtype=np.int64)

    def touch(p, others, sign):
        o = np.asarray(others, dtype=np.int64)
        np.add.at(auto, (p - o) % L, sign)
        np.add.at(auto, (o - p) % L, sign)
        if len(acc):
            np.add.at(cross, (kk, (p - flat_b) % L), sign)

    for i, p in enumerate(pos):
        touch(p, pos[:i], 1)
    tabu = np.zeros(L, dtype=np.int64)
    for it in range(iterations):
        over_auto = auto > alpha
        over_auto[0] = False
        over_cross = cross > alpha
        if not over_auto.any() and not over_cross.any():
            return sorted(pos)
        arr = np.asarray(pos)
        conflict = over_auto[(arr[:, None] - arr[None, :]) % L].sum(axis=1)
        if len(acc):
            conflict += over_cross[kk[None, :], (arr[:, None] - flat_b[None, :]) % L].sum(axis=1)
        worst = np.flatnonzero(conflict == conflict.max())
        i = int(rng.choice(worst))
        p = pos.pop(i)
        touch(p, pos, -1)
        others = np.asarray(pos)
        j = np.arange(L)
        score = (auto[(j[:, None] - others) % L] >= alpha).sum(axis=1)
        score += (auto[(others - j[:, None]) % L] >= alpha).sum(axis=1)
        if len(acc):
            score += (cross[kk[None, :], (j[:, None] - flat_b[None, :]) % L] >= alpha).sum(axis=1)
        score[others] = np.iinfo(np.int64).max
        score[tabu > it] = np.iinfo(np.int64).max
        score[p] = np.iinfo(np.int64).max
        best = np.flatnonzero(score == score.min())
        q = int(rng.choice(best))
        touch(q, pos, 1)
        pos.append(q)
        tabu[p] = it + 1 + int(rng.integers(2, 8))
    return None


def search_ooc(
    L: int,
    w: int,
    alpha: int,
    N: int,
    seed: int = 0,
    restarts: int = 10,
    node_limit: int = 5000,
    probes: int = 20,
    local_iterations: int = 2000,
) -> OocCode:
    """Find ``N`` words of an (L, w, alpha) OOC.

    Words are placed greedily.  Each word is first sought by ``probes``
    short randomized depth-first searches (``node_limit`` nodes each); if
    those fail, a min-conflicts local search takes over.  A word that still
    cannot be placed triggers a rebuild from a fresh random order; after
    ``restarts`` rebuilds the best partial code rides on the raised
    :class:`InfeasibleSearchError`.  The result depends only on the arguments.
    """
    bound = johnson_bound(L, w, alpha)
    if N < 1:
        raise ValueError("N must be at least 1")
    if N > bound:
        raise ValueError(f"N={N} exceeds the Johnson bound {bound} for ({L},{w},{alpha})")
    rng = np.random.default_rng(seed)
    best: list[list[int]] = []
    for _ in range(max(1, restarts)):
        words: list[list[int]] = []
        while len(words) < N:
            accepted = np.array(words, dtype=np.int64).reshape(len(words), w)
            found = None
            for _ in range(probes):
                found = _WordSearch(L, w, alpha, accepted, rng, node_limit).run()
                if found is not None:
                    break
            if found is None and local_iterations:
                found = _local_search_word(L, w, alpha, list(accepted), rng, local_iterations)
            if found is None:
                break
            words.append(found)
        if len(words) > len(best):
            best = words
        if len(best) == N:
            break
    code = OocCode(L, w, alpha, [Codeword.from_positions(p, L) for p in best])
    if code.N < N:
        raise InfeasibleSearchError(
            f"search found only {code.N} of {N} words for ({L},{w},{alpha})", code
        )
    return code


# --------------------------------------------------------------------------
# Catalog files
# --------------------------------------------------------------------------

def _format_code(code: Code, comments: Sequence[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    if isinstance(code, BibdCode):
        lines.append(f"BIBD {code.Q} {code.K} {code.lam}")
        lines.append(str(code.base))
    else:
        lines.append(f"OOC {code.L} {code.w} {code.alpha} {code.N}")
        lines.extend(str(word) for word in code.words)
    return "\n".join(lines) + "\n"


def _parse_code(text: str, source: str = "<string>") -> Code:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise CodeFormatError(f"{source}: empty code file")
    header = lines[0].split()
    body = lines[1:]
    try:
        kind, nums = header[0].upper(), [int(t) for t in header[1:]]
    except (IndexError, ValueError):
        raise CodeFormatError(f"{source}: bad header {lines[0]!r}") from None
    try:
        words = [Codeword.from_string(ln) for ln in body]
    except ValueError as exc:
        raise CodeFormatError(f"{source}: {exc}") from None
    if kind == "BIBD":
        if len(nums) != 3 or len(words) != 1:
            raise CodeFormatError(f"{source}: BIBD needs 'BIBD Q K LAMBDA' and one word")
        Q, K, lam = nums
        if words[0].length != Q:
            raise CodeFormatError(f"{source}: word length {words[0].length} != Q={Q}")
        try:
            return BibdCode(Q, K, lam, words[0])
        except ValueError as exc:
            raise CodeFormatError(f"{source}: {exc}") from None
    if kind == "OOC":
        if len(nums) != 4:
            raise CodeFormatError(f"{source}: OOC needs 'OOC L W ALPHA N'")
        L, w, alpha, n = nums
        if len(words) != n:
            raise CodeFormatError(f"{source}: header says {n} words, found {len(words)}")
        if any(word.length != L for word in words):
            raise CodeFormatError(f"{source}: word length differs from L={L}")
        return OocCode(L, w, alpha, words)
    raise CodeFormatError(f"{source}: unknown code kind {header[0]!r}")


def save_code(code: Code, path, comments: Sequence[str] = ()) -> None:
    Path(path).write_text(_format_code(code, comments))


def load_code(path, verify: bool = True) -> Code:
    """Read a catalog file; the code is verified unless ``verify`` is false."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CodeFormatError(f"{path}: {exc}") from None
    return _checked(_parse_code(text, str(path)), str(path), verify)


def _checked(code: Code, source: str, verify: bool) -> Code:
    if not verify:
        return code
    report = verify_bibd(code) if isinstance(code, BibdCode) else verify_ooc(code)
    if not report.ok:
        raise CodeVerificationError(f"{source}: {code} fails verification: {report.describe()}", report)
    return code


def catalog_entries() -> list[str]:
    """Names of the bundled catalog files (without extension)."""
    root = resources.files("meppm") / "catalog"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".txt"))


def load_catalog(name: str, verify: bool = True) -> Code:
    """Load a bundled code, e.g. ``load_catalog("bibd_341_85_21")``."""
    res = resources.files("meppm") / "catalog" / f"{name}.txt"
    if not res.is_file():
        raise KeyError(f"no catalog entry {name!r}; available: {', '.join(catalog_entries())}")
    return _checked(_parse_code(res.read_text(), f"catalog:{name}"), f"catalog:{name}", verify)
