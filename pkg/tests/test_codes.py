import pytest
from hypothesis import given, settings, strategies as st

from meppm.codes import (
    BibdCode,
    CodeFormatError,
    CodeVerificationError,
    Codeword,
    InfeasibleSearchError,
    OocCode,
    catalog_entries,
    complement,
    correlation,
    cyclic_shift,
    johnson_bound,
    load_catalog,
    load_code,
    msequence_difference_set,
    paley_difference_set,
    save_code,
    search_ooc,
    verify_bibd,
    verify_ooc,
)

import oracles

TOY_WORD = "1100100000000"


def bits(word: Codeword) -> list[int]:
    return [int(c) for c in str(word)]


class TestShift:
    def test_identity_and_full_period(self):
        w = Codeword.from_string("1101000")
        assert str(cyclic_shift(w, 0)) == "1101000"
        assert str(cyclic_shift(w, 7)) == "1101000"

    def test_rightward_rotation(self):
        assert str(cyclic_shift(Codeword.from_string(TOY_WORD), 1)) == "0110010000000"

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=40), st.integers(0, 100), st.integers(0, 100))
    def test_composes_additively(self, raw, a, b):
        w = Codeword.from_array(raw)
        assert cyclic_shift(cyclic_shift(w, a), b) == cyclic_shift(w, (a + b) % len(raw))

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=40), st.integers(-50, 50))
    def test_matches_oracle_and_keeps_weight(self, raw, m):
        w = Codeword.from_array(raw)
        out = cyclic_shift(w, m)
        assert bits(out) == oracles.rotate(raw, m % len(raw))
        assert out.weight == w.weight


class TestCorrelation:
    def test_fixed_cross_correlation_7_3_1(self):
        code = paley_difference_set(7)
        c = code.codewords()
        assert correlation(c[0], c[0]) == 3
        assert all(correlation(c[i], c[j]) == 1 for i in range(7) for j in range(7) if i != j)

    def test_zero_word(self):
        assert correlation(Codeword.from_string("1011"), Codeword.from_string("0000")) == 0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            correlation(Codeword.from_string("101"), Codeword.from_string("1010"))


class TestConstructions:
    @pytest.mark.parametrize("Q", [7, 11, 19, 23, 83])
    def test_paley(self, Q):
        code = paley_difference_set(Q)
        assert code.params == (Q, (Q - 1) // 2, (Q - 3) // 4)
        assert verify_bibd(code).ok
        assert oracles.bibd_ok(bits(code.base), code.lam)

    def test_paley_7_base(self):
        assert str(paley_difference_set(7).base) == "0110100"

    @pytest.mark.parametrize("Q", [5, 13, 9, 15])
    def test_paley_rejects(self, Q):
        with pytest.raises(ValueError):
            paley_difference_set(Q)

    @pytest.mark.parametrize("m", range(2, 9))
    def test_msequence(self, m):
        code = msequence_difference_set(m)
        assert code.params == (2**m - 1, 2 ** (m - 1) - 1, 2 ** (m - 2) - 1)
        assert verify_bibd(code).ok
        if m <= 6:
            assert oracles.bibd_ok(bits(code.base), code.lam)

    def test_msequence_63(self):
        assert msequence_difference_set(6).params == (63, 31, 15)

    def test_msequence_out_of_table(self):
        with pytest.raises(ValueError):
            msequence_difference_set(17)

    def test_complement_parameters(self):
        comp = paley_difference_set(7).complemented()
        assert comp.params == (7, 4, 2)
        assert verify_bibd(comp).ok
        assert complement(complement(comp.base)) == comp.base


class TestVerification:
    def test_bad_bibd_reported(self):
        code = BibdCode(7, 3, 1, Codeword.from_string("1110000"))
        report = verify_bibd(code)
        assert not report.ok
        assert any(v[-1] == 2 for v in report.violations)

    def test_13_4_1_difference_set(self):
        code = BibdCode(13, 4, 1, Codeword.from_positions([0, 1, 3, 9], 13))
        assert verify_bibd(code).ok

    def test_toy_word(self):
        assert verify_ooc(OocCode(13, 3, 1, [Codeword.from_string(TOY_WORD)])).ok

    def test_duplicate_words_fail(self):
        w = Codeword.from_string(TOY_WORD)
        assert not verify_ooc(OocCode(13, 3, 1, [w, w])).ok

    def test_zero_word_fails(self):
        assert not verify_ooc(OocCode(13, 3, 1, [Codeword.from_string("0" * 13)])).ok


class TestJohnson:
    def test_reference_values(self):
        assert johnson_bound(341, 5, 1) == oracles.FROZEN["johnson_341_5_1"]
        assert johnson_bound(13, 3, 1) == oracles.FROZEN["johnson_13_3_1"]

    def test_single_pulse(self):
        assert johnson_bound(50, 1, 0) == 50

    @given(st.integers(2, 30).flatmap(lambda w: st.tuples(
        st.just(w), st.integers(1, w - 1), st.integers(w, 600))))
    def test_matches_oracle(self, args):
        w, alpha, L = args
        assert johnson_bound(L, w, alpha) == oracles.johnson(L, w, alpha)

    @pytest.mark.parametrize("args", [(10, 3, 3), (10, 11, 1), (10, 3, 0)])
    def test_bad_ordering(self, args):
        with pytest.raises(ValueError):
            johnson_bound(*args)


class TestSearch:
    def test_13_3_1_single(self):
        code = search_ooc(13, 3, 1, 1, seed=0)
        assert code.N == 1 and verify_ooc(code).ok

    def test_7_3_1(self):
        assert verify_ooc(search_ooc(7, 3, 1, 1, seed=2)).ok
        with pytest.raises(ValueError):
            search_ooc(7, 3, 1, 2)

    def test_deterministic(self):
        a = search_ooc(101, 5, 1, 4, seed=7)
        b = search_ooc(101, 5, 1, 4, seed=7)
        assert a == b

    @settings(max_examples=12, deadline=None)
    @given(st.integers(0, 10_000), st.sampled_from([(31, 3, 1, 5), (63, 4, 1, 5), (57, 5, 2, 6), (101, 4, 1, 6)]))
    def test_output_valid(self, seed, params):
        L, w, alpha, N = params
        try:
            code = search_ooc(L, w, alpha, N, seed=seed)
        except InfeasibleSearchError as exc:
            code = exc.best
            assert code is not None and code.N < N
        assert verify_ooc(code).ok
        assert code.N <= N <= johnson_bound(L, w, alpha)
        assert oracles.ooc_ok([bits(x) for x in code.words], alpha)

    def test_infeasible_reports_best(self):
        with pytest.raises(InfeasibleSearchError) as info:
            search_ooc(101, 25, 7, 2, seed=0, restarts=1, node_limit=200, probes=2, local_iterations=50)
        best = info.value.best
        assert best is None or verify_ooc(best).ok


class TestCatalogIO:
    def test_round_trip(self, tmp_path):
        code = paley_difference_set(7)
        path = tmp_path / "c.txt"
        save_code(code, path, ["note"])
        assert load_code(path) == code
        ooc = OocCode(13, 3, 1, [Codeword.from_string(TOY_WORD)])
        save_code(ooc, path)
        assert load_code(path) == ooc

    def test_truncated(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("OOC 13 3 1 2\n1100100000000\n")
        with pytest.raises(CodeFormatError):
            load_code(path)
        path.write_text("BIBD 7 3 1\n01101\n")
        with pytest.raises(CodeFormatError):
            load_code(path)

    def test_failed_verification_names_pair(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("# bogus\nBIBD 7 3 1\n1110000\n")
        with pytest.raises(CodeVerificationError) as info:
            load_code(path)
        assert info.value.report.violations

    @pytest.mark.parametrize("name", catalog_entries())
    def test_catalog_entries_verify(self, name):
        load_catalog(name)

    def test_catalog_341(self):
        code = load_catalog("bibd_341_85_21")
        assert code.params == (341, 85, 21)
        assert verify_bibd(code).ok
