"""Independent reference computations used by the tests.

Written in plain Python (sets, Fractions, loops) without touching the
package internals, so agreement with the library means something.
"""

from __future__ import annotations

import math
from fractions import Fraction

PLANCK = 6.62607015e-34
LIGHT = 2.99792458e8

# Values produced by these oracles (or by hand) and frozen here.
FROZEN = {
    "photon_rate_0p1uW_650nm": 2.6177e11,  # 0.8 * 1e-7 / (h c / 650e-9)
    "lam0_341": 30.7066,  # Q = M = 341, 8 bits at 200 Mb/s
    "lam0_63_type2": 124.65,  # Q = 63, M = 70 -> 6 bits
    "lam0_63_coded": 103.88,  # Q = M = 63 -> 5 bits
    "mai_ser_341_5_1_N10": 2.7553e-2,
    "johnson_341_5_1": 17,
    "johnson_13_3_1": 2,
    "mprime_typeI_2_4": Fraction(1, 2),
    "mprime_typeII_4_4": Fraction(576, 2688),
}


def rotate(bits: list[int], m: int) -> list[int]:
    n = len(bits)
    return [bits[(i - m) % n] for i in range(n)]


def dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def bibd_ok(base: list[int], lam: int) -> bool:
    Q, K = len(base), sum(base)
    rows = [rotate(base, m) for m in range(Q)]
    return all(
        dot(rows[i], rows[j]) == (K if i == j else lam) for i in range(Q) for j in range(Q)
    )


def ooc_ok(words: list[list[int]], alpha: int) -> bool:
    L = len(words[0])
    for a_idx, a in enumerate(words):
        for b_idx, b in enumerate(words):
            for s in range(L):
                if a_idx == b_idx and s == 0:
                    continue
                if dot(a, rotate(b, s)) > alpha:
                    return False
    return True


def johnson(L: int, w: int, alpha: int) -> int:
    """Nested floors: innermost (L-alpha)/(w-alpha), outermost 1/w."""
    if w == 1:
        return L
    inner = (L - alpha) // (w - alpha)
    for i in range(alpha - 1, 0, -1):
        inner = ((L - i) * inner) // (w - i)
    return inner // w


def cmeppm_symbol(base: list[int], word: list[int], N: int, m: int) -> list[Fraction]:
    """Slot amplitudes of shift m: (1/(N w)) sum_l d_l c_{l+m}."""
    Q, w = len(base), sum(word)
    out = [Fraction(0)] * Q
    for ell, d in enumerate(word):
        if d:
            c = rotate(base, ell + m)
            out = [o + Fraction(x, N * w) for o, x in zip(out, c)]
    return out


def poisson_loglik_decision(r, symbols, lam0, lamb_eff) -> int:
    """argmax_m sum_j r_j log(lam0 u_mj + lamb_eff) - (lam0 u_mj + lamb_eff)."""
    best, best_m = None, None
    for m, u in enumerate(symbols):
        score = sum(rj * math.log(lam0 * uj + lamb_eff) - (lam0 * uj + lamb_eff) for rj, uj in zip(r, u))
        if best is None or score > best + 1e-9 * abs(best):
            best, best_m = score, m
    return best_m


def photon_rate(p, eta=0.8, wavelength=650e-9):
    return eta * p * wavelength / (PLANCK * LIGHT)


def mai_ser(N, w, alpha, L) -> float:
    p = w * (w - alpha) / L
    if N < w:
        return 0.0
    return w * w * math.comb(N - 1, w - 1) * p ** (w - 1) * (1 - p) ** (N - w)
