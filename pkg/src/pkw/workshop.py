"""Linear kernels of sizes 18-25 from shortening and completing Golay-type codes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .bitcode import (
    BinaryMatrix,
    data_path,
    gf2_rank,
    load_binary_matrix,
    popcount,
    popcount_array,
    span_words,
)
from .kernel import PartialDistanceProfile, exponent_value, linear_partial_distances, suffix_coset_weights


class RecipeError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# shortening
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShorteningStep:
    row: int
    col: int


def check_shortening(gen: BinaryMatrix, row: int, col: int) -> None:
    n, c = gen.shape
    if not (0 <= row < n and 0 <= col < c):
        raise RecipeError(f"shortening position ({row},{col}) outside a {n}x{c} matrix")
    if gen.entry(row, col) != 1:
        raise RecipeError(f"entry ({row},{col}) is 0; column {col} must have its last 1 in row {row}")
    below = [i for i in range(row + 1, n) if gen.entry(i, col)]
    if below:
        raise RecipeError(f"column {col} has a 1 below row {row} (rows {below})")


def shorten(gen: BinaryMatrix, row: int, col: int) -> BinaryMatrix:
    """Add ``row`` to every other row with a 1 in ``col``, then delete that row and column."""
    check_shortening(gen, row, col)
    c = gen.cols
    pivot = gen.rows[row]
    bit = 1 << (c - 1 - col)
    hi_mask = ~((bit << 1) - 1)
    lo_mask = bit - 1
    out = []
    for i, r in enumerate(gen.rows):
        if i == row:
            continue
        if r & bit:
            r ^= pivot
        out.append(((r & hi_mask) >> 1) | (r & lo_mask))
    return BinaryMatrix(tuple(out), c - 1)


def last_one_row(gen: BinaryMatrix, col: int) -> int | None:
    for i in range(gen.nrows - 1, -1, -1):
        if gen.entry(i, col):
            return i
    return None


def lemma3_violations(before: Sequence[int], after: Sequence[int], row: int) -> list[int]:
    """Indices where the shortened profile breaks d~[i] >= d[i] (i < row) or d~[i] = d[i+1] (i >= row)."""
    bad = []
    for i, v in enumerate(after):
        if i < row and v < before[i]:
            bad.append(i)
        if i >= row and v != before[i + 1]:
            bad.append(i)
    return bad


# ---------------------------------------------------------------------------
# Golay family
# ---------------------------------------------------------------------------

H8_PRIME = (0b11111111, 0b10101010, 0b11000011, 0b11110000)


def extended_hamming_8_codes() -> list[tuple[int, ...]]:
    """All [8,4,4] codes, as sorted word tuples, in lexicographic order."""
    w4 = [v for v in range(256) if popcount(v) == 4]
    codes = set()
    for a, b, c in itertools.combinations(w4, 3):
        basis = [0xFF, a, b, c]
        if gf2_rank(basis) < 4:
            continue
        ws = span_words(basis)
        if popcount_array(ws[ws != 0]).min() >= 4:
            codes.add(tuple(sorted(int(x) for x in ws)))
    return sorted(codes)


def _echelon_basis(words: Iterable[int]) -> list[int]:
    basis: list[int] = []
    for v in words:
        if v and gf2_rank(basis + [v]) > len(basis):
            basis.append(v)
    return basis


def turyn_golay_generator() -> BinaryMatrix:
    """Generator of C24 = {(a+x, b+x, a+b+x)} containing the rows of G.

    x runs over the extended Hamming code spanned by G's 8-bit blocks; the
    first [8,4,4] code H8 (lexicographic order) giving distance 8 is used.
    """
    for code in extended_hamming_8_codes():
        basis = _echelon_basis(code)
        rows = [(a << 16) | a for a in basis] + [(b << 8) | b for b in basis]
        rows += [(x << 16) | (x << 8) | x for x in H8_PRIME]
        if gf2_rank(rows) < 12:
            continue
        ws = span_words(rows)
        if popcount_array(ws[ws != 0]).min() == 8:
            return BinaryMatrix(tuple(rows), 24)
    raise RecipeError("no Turyn completion with distance 8")


def weight_distribution(gen: BinaryMatrix) -> list[int]:
    ws = span_words(_echelon_basis(gen.rows))
    return np.bincount(popcount_array(ws), minlength=gen.cols + 1).tolist()


def dual_words_of_weight(gen: BinaryMatrix, w: int) -> list[int]:
    """Weight-w words orthogonal to every row of ``gen``, increasing."""
    n = gen.cols
    out = []
    for pos in itertools.combinations(range(n), w):
        v = sum(1 << (n - 1 - p) for p in pos)
        if all(popcount(v & r) % 2 == 0 for r in gen.rows):
            out.append(v)
    return sorted(out)


def words_of_weight(n: int, w: int) -> list[int]:
    return sorted(sum(1 << (n - 1 - p) for p in pos) for pos in itertools.combinations(range(n), w))


def complete_upward(tail: Sequence[int], layers: Sequence[tuple[int, Sequence[int]]], cols: int) -> BinaryMatrix:
    """Stack rows above ``tail``: for each (count, candidates) layer, bottom layer first,
    take the first ``count`` candidates independent of everything chosen so far."""
    rows = list(tail)
    for count, cands in layers:
        added: list[int] = []
        for v in cands:
            if len(added) == count:
                break
            if gf2_rank(added + rows + [v]) > len(added) + len(rows):
                added.append(v)
        if len(added) < count:
            raise RecipeError(f"completion ran out of candidates ({len(added)}/{count})")
        rows = added[::-1] + rows
    return BinaryMatrix(tuple(rows), cols)


def _even_weight2(n: int) -> list[int]:
    return words_of_weight(n, 2)


def complete_a(g: BinaryMatrix, golay: BinaryMatrix) -> BinaryMatrix:
    """24x24 completion with G on the last five rows."""
    gp = g_prime(g)
    golay_words = span_words(_echelon_basis(golay.rows))
    w8 = sorted(int(x) for x in golay_words[popcount_array(golay_words) == 8])
    c4 = dual_words_of_weight(gp, 4)
    layers = [
        (7, w8),
        (6, c4),
        (5, _even_weight2(24)),
        (1, words_of_weight(24, 1)),
    ]
    return complete_upward(g.rows, layers, 24)


def g_prime(g: BinaryMatrix) -> BinaryMatrix:
    return BinaryMatrix(((1 << g.cols) - 1,) + g.rows, g.cols)


A_PRIME_V = (0, 8, 17)
A_PRIME_ROW = 7


def augment_a(a: BinaryMatrix, support: Sequence[int] = A_PRIME_V, at: int = A_PRIME_ROW) -> BinaryMatrix:
    """Append a zero column, then insert [v 1] as row ``at``."""
    rows = [r << 1 for r in a.rows]
    v = sum(1 << (a.cols - 1 - p) for p in support)
    rows.insert(at, (v << 1) | 1)
    return BinaryMatrix(tuple(rows), a.cols + 1)


def complete_even(base: BinaryMatrix) -> BinaryMatrix:
    """Square completion of an even code: weight-2 rows, then one weight-1 row on top."""
    n = base.cols
    missing = n - base.nrows
    return complete_upward(base.rows, [(missing - 1, _even_weight2(n)), (1, words_of_weight(n, 1))], n)


@lru_cache(maxsize=None)
def build_golay_family() -> dict[str, BinaryMatrix]:
    g = load_binary_matrix(data_path("matrix_G.txt"))
    golay = load_binary_matrix(data_path("golay24.txt"))
    a = complete_a(g, golay)
    return {"G": g, "G'": g_prime(g), "C24": golay, "A": a, "A'": augment_a(a)}


@lru_cache(maxsize=None)
def build_small_family() -> dict[str, BinaryMatrix]:
    b = load_binary_matrix(data_path("matrix_B.txt"))
    f = load_binary_matrix(data_path("matrix_F.txt"))
    return {"B": b, "F": f, "B-complete": complete_even(b), "F-complete": complete_even(f)}


def tail_profile(gen: BinaryMatrix) -> tuple[int, ...]:
    """Partial distances of the rows of ``gen`` taken as the last rows of a kernel."""
    return tuple(suffix_coset_weights(gen.rows))


# ---------------------------------------------------------------------------
# recipes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Step:
    kind: str  # "shorten", "augment-column", "insert-row", "append-row"
    args: tuple = ()

    def apply(self, m: BinaryMatrix) -> BinaryMatrix:
        if self.kind == "shorten":
            return shorten(m, *self.args)
        if self.kind == "augment-column":
            return BinaryMatrix(tuple(r << 1 for r in m.rows), m.cols + 1)
        if self.kind == "insert-row":
            at, word = self.args
            if not 0 <= at <= m.nrows or word >> m.cols:
                raise RecipeError("row insertion does not fit the matrix")
            rows = list(m.rows)
            rows.insert(at, word)
            return BinaryMatrix(tuple(rows), m.cols)
        if self.kind == "append-row":
            (word,) = self.args
            return BinaryMatrix(m.rows + (word,), m.cols)
        raise RecipeError(f"unknown step kind {self.kind!r}")

    def __str__(self) -> str:
        if self.kind == "shorten":
            return f"shorten{self.args}"
        return self.kind


@dataclass(frozen=True)
class ConstructionRecipe:
    name: str
    base: str
    steps: tuple[Step, ...] = ()
    target: tuple[int, ...] | None = None
    note: str = ""


@dataclass(frozen=True)
class RecipeResult:
    recipe: ConstructionRecipe
    matrix: BinaryMatrix
    profile: PartialDistanceProfile
    exponent: float


def base_matrix(name: str) -> BinaryMatrix:
    fam = {**build_golay_family(), **build_small_family()}
    if name not in fam:
        raise RecipeError(f"unknown base matrix {name!r}")
    return fam[name]


def run_recipe(recipe: ConstructionRecipe, verify: bool = True) -> RecipeResult:
    m = base_matrix(recipe.base)
    prof = None
    for k, step in enumerate(recipe.steps):
        before = linear_partial_distances(m).d if (verify and step.kind == "shorten") else None
        try:
            m = step.apply(m)
        except RecipeError as exc:
            raise RecipeError(f"{recipe.name}: step {k} ({step}) failed: {exc}") from None
        if before is not None:
            prof = linear_partial_distances(m).d
            bad = lemma3_violations(before, prof, step.args[0])
            if bad:
                raise RecipeError(f"{recipe.name}: step {k} ({step}) breaks the shortening relations at {bad}")
    if m.nrows != m.cols or m.rank != m.nrows:
        raise RecipeError(f"{recipe.name}: result is not a full-rank square matrix")
    profile = linear_partial_distances(m)
    if verify and recipe.target is not None and profile.d != recipe.target:
        raise RecipeError(f"{recipe.name}: profile {profile.d} differs from target {recipe.target}")
    return RecipeResult(recipe, m, profile, exponent_value(profile.d))


def _seq(s: str) -> tuple[int, ...]:
    return tuple(int(x) for x in s.split(","))


TABLE_IV: dict[int, tuple[ConstructionRecipe, float]] = {
    18: (
        ConstructionRecipe("l18", "B-complete", (), _seq("1,2,2,2,2,2,4,4,4,4,6,6,8,8,8,8,8,16")),
        0.49521,
    ),
    19: (
        ConstructionRecipe("l19", "F-complete", (), _seq("1,2,2,2,2,2,4,4,4,4,4,6,8,8,8,8,8,8,16")),
        0.49045,
    ),
    21: (
        ConstructionRecipe(
            "l21",
            "A",
            (Step("shorten", (23, 0)), Step("shorten", (22, 7)), Step("shorten", (18, 19))),
            _seq("1,2,2,2,2,2,4,4,4,4,4,4,8,8,8,8,8,8,12,12,12"),
            note="steps 2-3 found by find_zero_column_recipe; after step 2 column 19 is zero on the last three rows",
        ),
        0.49604,
    ),
    22: (
        ConstructionRecipe(
            "l22",
            "A",
            (Step("shorten", (23, 0)), Step("shorten", (19, 0))),
            _seq("1,2,2,2,2,2,4,4,4,4,4,4,8,8,8,8,8,8,8,12,12,16"),
        ),
        0.50118,
    ),
    23: (
        ConstructionRecipe(
            "l23",
            "A",
            (Step("shorten", (23, 0)),),
            _seq("1,2,2,2,2,2,4,4,4,4,4,4,8,8,8,8,8,8,8,12,12,12,16"),
            note="row 23 is the last row; every column 0-15 works",
        ),
        0.50705,
    ),
    24: (
        ConstructionRecipe("l24", "A", (), _seq("1,2,2,2,2,2,4,4,4,4,4,4,8,8,8,8,8,8,8,12,12,12,16,16")),
        0.51577,
    ),
    25: (
        ConstructionRecipe("l25", "A'", (), _seq("1,2,2,2,2,2,4,4,4,4,4,4,4,8,8,8,8,8,8,8,12,12,12,16,16")),
        0.50608,
    ),
}


def find_zero_column_recipe(
    a: BinaryMatrix,
    first: Sequence[tuple[int, int]],
    target: Sequence[int],
    tail_rows: int = 3,
    profile: Callable[[BinaryMatrix], tuple[int, ...]] = lambda m: linear_partial_distances(m).d,
) -> list[tuple[int, int]] | None:
    """Search two further shortenings after each candidate first step.

    The second shortening must leave a column that is zero on the last
    ``tail_rows`` rows; the third shortens on that column.  Returns the first
    step list whose final profile equals ``target``.
    """
    target = tuple(target)
    for s1 in first:
        m1 = shorten(a, *s1)
        for col in range(m1.cols):
            r = last_one_row(m1, col)
            if r is None:
                continue
            m2 = shorten(m1, r, col)
            n = m2.nrows
            for zc in range(m2.cols):
                if any(m2.entry(i, zc) for i in range(n - tail_rows, n)):
                    continue
                r3 = last_one_row(m2, zc)
                if r3 is None:
                    continue
                m3 = shorten(m2, r3, zc)
                if profile(m3) == target:
                    return [s1, (r, col), (r3, zc)]
    return None
