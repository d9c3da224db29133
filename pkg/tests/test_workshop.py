from __future__ import annotations

import numpy as np
import pytest

from pkw.bitcode import BinaryMatrix, popcount, span_words
from pkw.kernel import kernel_from_matrix, partial_distances, truncate
from pkw.workshop import (
    TABLE_IV,
    ConstructionRecipe,
    RecipeError,
    Step,
    base_matrix,
    build_golay_family,
    build_small_family,
    extended_hamming_8_codes,
    last_one_row,
    lemma3_violations,
    run_recipe,
    shorten,
    tail_profile,
    weight_distribution,
)

A_PROFILE = (1, 2, 2, 2, 2, 2, 4, 4, 4, 4, 4, 4, 8, 8, 8, 8, 8, 8, 8, 12, 12, 12, 16, 16)


def random_full_rank(n, rng):
    while True:
        m = BinaryMatrix(tuple(int(x) for x in rng.integers(0, 1 << n, size=n)), n)
        if m.rank == n:
            return m


# --- shortening -------------------------------------------------------------------


def test_shorten_arikan():
    g2 = BinaryMatrix.from_strings(["10", "11"])
    s = shorten(g2, 1, 0)
    assert s.shape == (1, 1) and s.rows == (1,)
    assert partial_distances(kernel_from_matrix(s)).d == (1,)


def test_shorten_preconditions():
    g2 = BinaryMatrix.from_strings(["10", "11"])
    with pytest.raises(RecipeError):
        shorten(g2, 0, 0)  # column 0 has a 1 below row 0
    with pytest.raises(RecipeError):
        shorten(BinaryMatrix.from_strings(["10", "01"]), 1, 0)  # entry is 0
    with pytest.raises(RecipeError):
        shorten(g2, 2, 0)


def test_lemma3_against_brute_force(rng):
    cases = 0
    while cases < 60:
        m = random_full_rank(6, rng)
        col = int(rng.integers(6))
        row = last_one_row(m, col)
        before = partial_distances(kernel_from_matrix(m)).d
        s = shorten(m, row, col)
        assert s.shape == (5, 5) and s.rank == 5
        after = partial_distances(kernel_from_matrix(s)).d
        assert lemma3_violations(before, after, row) == []
        assert all(after[i] >= before[i] for i in range(row))
        assert all(after[i] == before[i + 1] for i in range(row, 5))
        cases += 1


def test_lemma3_violations_reports_indices():
    assert lemma3_violations((1, 2, 4), (1, 2), 1) == [1]
    assert lemma3_violations((2, 2, 4), (1, 4), 1) == [0]


# --- Golay family ------------------------------------------------------------------


def test_extended_hamming_codes_count():
    # 30 distinct [8,4,4] codes exist
    codes = extended_hamming_8_codes()
    assert len(codes) == 30
    assert all(len(c) == 16 for c in codes)


def test_golay_weight_distribution():
    golay = build_golay_family()["C24"]
    wd = weight_distribution(golay)
    assert {w: c for w, c in enumerate(wd) if c} == {0: 1, 8: 759, 12: 2576, 16: 759, 24: 1}


def test_g_tail_profile():
    assert tail_profile(build_golay_family()["G"]) == (12, 12, 12, 16, 16)


def test_g_prime_orthogonal_to_golay():
    fam = build_golay_family()
    words = span_words(list(fam["C24"].rows))
    assert words.size == 1 << 12
    for r in fam["G'"].rows:
        assert all(popcount(int(w) & r) % 2 == 0 for w in words)


def test_a_contains_declared_subcodes():
    fam = build_golay_family()
    a = fam["A"]
    assert a.shape == (24, 24) and a.rank == 24
    assert a.rows[-5:] == fam["G"].rows
    golay = set(span_words(list(fam["C24"].rows)).tolist())
    assert set(span_words(list(a.rows[-12:])).tolist()) == golay


def test_a_profile():
    res = run_recipe(ConstructionRecipe("A", "A"))
    assert res.profile.d == A_PROFILE
    assert truncate(res.exponent) == 0.51577


def test_a_prime():
    fam = build_golay_family()
    assert fam["A'"].shape == (25, 25)
    assert fam["A'"].rank == 25


def test_small_family_tails():
    fam = build_small_family()
    assert tail_profile(fam["B"]) == (4, 4, 4, 4, 6, 6, 8, 8, 8, 8, 8, 16)
    for name in ("B-complete", "F-complete"):
        m = fam[name]
        assert m.nrows == m.cols and m.rank == m.cols


# --- recipes -----------------------------------------------------------------------


@pytest.mark.parametrize("ell", sorted(TABLE_IV))
def test_table_iv(ell):
    recipe, value = TABLE_IV[ell]
    res = run_recipe(recipe)
    assert res.matrix.shape == (ell, ell)
    assert res.profile.d == recipe.target
    assert truncate(res.exponent) == value


def test_table_iv_profiles_by_brute_force():
    # independent oracle: enumerate every codeword of the 23-row result
    res = run_recipe(TABLE_IV[23][0])
    m = res.matrix
    ws = span_words(list(m.rows))
    # index bit i of span_words selects row i; row i present, rows above absent
    weights = np.bitwise_count(ws.astype(np.uint64))
    for i in range(m.nrows):
        assert int(weights[1 << i :: 2 << i].min()) == res.profile.d[i]


def test_empty_recipe_keeps_base():
    res = run_recipe(ConstructionRecipe("x", "B-complete"))
    assert res.matrix == base_matrix("B-complete")


def test_bad_recipes():
    with pytest.raises(RecipeError):
        base_matrix("nope")
    with pytest.raises(RecipeError):
        run_recipe(ConstructionRecipe("x", "A", (Step("shorten", (0, 0)),)))
    with pytest.raises(RecipeError):
        run_recipe(ConstructionRecipe("x", "A", (Step("augment-column"),)))
    with pytest.raises(RecipeError):
        run_recipe(ConstructionRecipe("x", "A", (), A_PROFILE[:-1] + (15,)))
