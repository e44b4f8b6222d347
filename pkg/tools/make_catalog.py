"""Regenerate the bundled code catalog in src/meppm/catalog/.

BIBDs outside the Paley / m-sequence families come from Singer difference
sets (hyperplanes of PG(m-1, q)) and from biquadratic residues; OOCs come
from ``meppm.codes.search_ooc`` with larger budgets than the library
defaults.  Every file is verified on load by the library itself.

    python tools/make_catalog.py
"""

from __future__ import annotations

import itertools
from pathlib import Path

from meppm.codes import (
    Codeword,
    InfeasibleSearchError,
    OocCode,
    bibd_from_positions,
    save_code,
    search_ooc,
    verify_bibd,
    verify_ooc,
)

OUT = Path(__file__).resolve().parents[1] / "src" / "meppm" / "catalog"


def _polymulmod(a, b, f, p):
    n = len(f) - 1
    out = [0] * (2 * n - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    for k in range(len(out) - 1, n - 1, -1):
        c = out[k]
        if c:
            for i in range(n + 1):
                out[k - n + i] = (out[k - n + i] - c * f[i]) % p
    return out[:n]


def _primitive_poly(p, n):
    """Monic degree-n polynomial over GF(p) whose root x has order p^n - 1."""
    order = p**n - 1
    for tail in itertools.product(range(p), repeat=n):
        if tail[0] == 0:
            continue
        f = list(tail) + [1]  # f[i] is the coefficient of x^i
        x = [0, 1] + [0] * (n - 2)
        acc = [1] + [0] * (n - 1)
        seen_one = False
        for k in range(1, order + 1):
            acc = _polymulmod(acc, x, f, p)
            if acc == [1] + [0] * (n - 1):
                seen_one = k == order
                break
        if seen_one:
            return f
    raise ValueError(f"no primitive polynomial of degree {n} over GF({p})")


def singer(p, e, m):
    """Singer ((q^m-1)/(q-1), (q^(m-1)-1)/(q-1), (q^(m-2)-1)/(q-1)) set, q = p^e."""
    q, n = p**e, e * m
    f = _primitive_poly(p, n)
    v = (q**m - 1) // (q - 1)
    powers = []
    acc = [1] + [0] * (n - 1)
    x = [0, 1] + [0] * (n - 2)
    for _ in range(q**m - 1):
        powers.append(acc)
        acc = _polymulmod(acc, x, f, p)
    total = q**m - 1

    def trace_zero(i):
        # Tr_{GF(q^m)/GF(q)}(x^i) = sum_k x^(i q^k)
        s = [0] * n
        for k in range(m):
            t = powers[(i * q**k) % total]
            s = [(a + b) % p for a, b in zip(s, t)]
        return not any(s)

    return bibd_from_positions(v, [i for i in range(v) if trace_zero(i)])


def quartic_residues(p):
    return bibd_from_positions(p, {pow(x, 4, p) for x in range(1, p)})


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    bibds = {
        "bibd_13_4_1": (singer(3, 1, 3), "Singer set, PG(2,3)"),
        "bibd_57_8_1": (singer(7, 1, 3), "Singer set, PG(2,7)"),
        "bibd_341_85_21": (singer(2, 2, 5), "Singer set, PG(4,4)"),
        "bibd_101_25_6": (quartic_residues(101), "biquadratic residues mod 101"),
    }
    for name, (code, how) in bibds.items():
        assert verify_bibd(code).ok, name
        save_code(code, OUT / f"{name}.txt", [how])
        print(name, code)

    toy_word = Codeword.from_string("1100100000000")
    oocs = {
        # (L, w, alpha, N, seed, search budget)
        "ooc_341_5_1": (341, 5, 1, 14, 1, dict(restarts=5)),
        "ooc_101_8_2": (101, 8, 2, 10, 1, dict(restarts=5)),
        "ooc_101_25_9": (101, 25, 9, 5, 1, dict(restarts=3)),
        "ooc_63_7_2": (63, 7, 2, 8, 1, dict(restarts=10, local_iterations=4000)),
        "ooc_63_6_2": (63, 6, 2, 16, 1, dict(restarts=5)),
    }
    for name, (L, w, a, n, seed, budget) in oocs.items():
        while True:
            try:
                code = search_ooc(L, w, a, n, seed=seed, **budget)
                break
            except InfeasibleSearchError as exc:
                print(f"{name}: {exc}; retrying with N={exc.best.N}")
                n = exc.best.N
        assert verify_ooc(code).ok
        save_code(code, OUT / f"{name}.txt", [f"search_ooc(seed={seed})"])
        print(name, code)
    code = OocCode(13, 3, 1, [toy_word])
    assert verify_ooc(code).ok
    save_code(code, OUT / "ooc_13_3_1.txt", ["single-word example code"])


if __name__ == "__main__":
    main()
