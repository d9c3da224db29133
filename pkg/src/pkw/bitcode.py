"""Binary and quaternary words, matrices, code containers and distance bounds.

Bit convention used throughout the package: position 0 of a word is the most
significant bit of its integer packing.  A word ``1000`` of length 4 is the
integer 8.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

MAX_LENGTH = 25


def popcount(x: int) -> int:
    return bin(x).count("1")


def popcount_array(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(a, dtype=np.uint64)).astype(np.int64)


def _check_length(n: int) -> None:
    if not 1 <= n <= MAX_LENGTH:
        raise ValueError(f"word length must be in 1..{MAX_LENGTH}, got {n}")


# ---------------------------------------------------------------------------
# words
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class BitWord:
    """A binary word of fixed length packed into one integer."""

    length: int
    bits: int

    def __post_init__(self) -> None:
        _check_length(self.length)
        if self.bits < 0 or self.bits >> self.length:
            raise ValueError("bits outside the word length")

    @classmethod
    def from_str(cls, s: str) -> BitWord:
        s = "".join(s.split())
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"not a binary string: {s!r}")
        return cls(len(s), int(s, 2))

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> BitWord:
        v = 0
        for b in bits:
            v = (v << 1) | (int(b) & 1)
        return cls(len(bits), v)

    def __str__(self) -> str:
        return format(self.bits, f"0{self.length}b")

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return (self.bits >> (self.length - 1 - i)) & 1

    def __xor__(self, other: BitWord) -> BitWord:
        if other.length != self.length:
            raise ValueError("length mismatch")
        return BitWord(self.length, self.bits ^ other.bits)

    @property
    def weight(self) -> int:
        return popcount(self.bits)

    def to_list(self) -> list[int]:
        return [self[i] for i in range(self.length)]


def hamming_distance(a: BitWord, b: BitWord) -> int:
    if a.length != b.length:
        raise ValueError(f"length mismatch: {a.length} vs {b.length}")
    return popcount(a.bits ^ b.bits)


GRAY = {0: (0, 0), 1: (0, 1), 2: (1, 1), 3: (1, 0)}
GRAY_INT = np.array([0, 1, 3, 2], dtype=np.int64)
LEE = (0, 1, 2, 1)


@dataclass(frozen=True)
class QuaternaryWord:
    """A word over Z4."""

    digits: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(d not in (0, 1, 2, 3) for d in self.digits):
            raise ValueError("digits must lie in {0,1,2,3}")

    @classmethod
    def from_str(cls, s: str) -> QuaternaryWord:
        s = "".join(s.split())
        return cls(tuple(int(c) for c in s))

    @property
    def length(self) -> int:
        return len(self.digits)

    def __add__(self, other: QuaternaryWord) -> QuaternaryWord:
        if other.length != self.length:
            raise ValueError("length mismatch")
        return QuaternaryWord(tuple((a + b) % 4 for a, b in zip(self.digits, other.digits)))

    def __sub__(self, other: QuaternaryWord) -> QuaternaryWord:
        return self + other.scale(3)

    def scale(self, c: int) -> QuaternaryWord:
        return QuaternaryWord(tuple((c * a) % 4 for a in self.digits))

    @property
    def lee_weight(self) -> int:
        return sum(LEE[d] for d in self.digits)

    def gray(self) -> BitWord:
        """Gray image: digit j becomes output bits 2j and 2j+1."""
        bits: list[int] = []
        for d in self.digits:
            bits.extend(GRAY[d])
        return BitWord.from_bits(bits)

    def __str__(self) -> str:
        return "".join(map(str, self.digits))


def lee_distance(a: QuaternaryWord, b: QuaternaryWord) -> int:
    return (a - b).lee_weight


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BinaryMatrix:
    """Row-major binary matrix; each row is packed like a BitWord of length ``cols``."""

    rows: tuple[int, ...]
    cols: int

    def __post_init__(self) -> None:
        _check_length(self.cols)
        for r in self.rows:
            if r < 0 or r >> self.cols:
                raise ValueError("row has bits beyond the column count")

    @classmethod
    def from_strings(cls, lines: Iterable[str]) -> BinaryMatrix:
        words = [BitWord.from_str(s) for s in lines]
        if not words:
            raise ValueError("empty matrix")
        n = words[0].length
        if any(w.length != n for w in words):
            raise ValueError("rows have different lengths")
        return cls(tuple(w.bits for w in words), n)

    @classmethod
    def from_words(cls, words: Sequence[BitWord]) -> BinaryMatrix:
        return cls(tuple(w.bits for w in words), words[0].length)

    @classmethod
    def identity(cls, n: int) -> BinaryMatrix:
        return cls(tuple(1 << (n - 1 - i) for i in range(n)), n)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), self.cols)

    def row(self, i: int) -> BitWord:
        return BitWord(self.cols, self.rows[i])

    def entry(self, i: int, j: int) -> int:
        return (self.rows[i] >> (self.cols - 1 - j)) & 1

    def column(self, j: int) -> int:
        """Column j packed with row 0 as the most significant bit."""
        v = 0
        for i in range(self.nrows):
            v = (v << 1) | self.entry(i, j)
        return v

    def to_strings(self) -> list[str]:
        return [format(r, f"0{self.cols}b") for r in self.rows]

    def to_array(self) -> np.ndarray:
        return np.array([[self.entry(i, j) for j in range(self.cols)] for i in range(self.nrows)], dtype=np.uint8)

    def __str__(self) -> str:
        return "\n".join(self.to_strings())

    @property
    def rank(self) -> int:
        return gf2_rank(self.rows)

    def multiply(self, u: int) -> int:
        """u·M over GF(2) with input bit 0 the MSB of ``u``."""
        x = 0
        n = self.nrows
        for i, r in enumerate(self.rows):
            if (u >> (n - 1 - i)) & 1:
                x ^= r
        return x


def gf2_rank(rows: Iterable[int]) -> int:
    basis: dict[int, int] = {}
    for r in rows:
        while r:
            h = r.bit_length() - 1
            if h in basis:
                r ^= basis[h]
            else:
                basis[h] = r
                break
    return len(basis)


def in_span(basis_rows: Iterable[int], v: int) -> bool:
    rows = list(basis_rows)
    return gf2_rank(rows + [v]) == gf2_rank(rows)


# ---------------------------------------------------------------------------
# codes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CodeSet:
    """A set of binary words of common length, stored sorted and unique."""

    length: int
    words: np.ndarray = field(compare=False)

    def __post_init__(self) -> None:
        _check_length(self.length)
        w = np.unique(np.asarray(self.words, dtype=np.int64))
        if w.size == 0:
            raise ValueError("a code needs at least one word")
        if w[0] < 0 or int(w[-1]) >> self.length:
            raise ValueError("word outside the code length")
        w.setflags(write=False)
        object.__setattr__(self, "words", w)

    @classmethod
    def from_words(cls, words: Iterable[BitWord]) -> CodeSet:
        ws = list(words)
        n = ws[0].length
        if any(w.length != n for w in ws):
            raise ValueError("words have different lengths")
        return cls(n, np.array([w.bits for w in ws], dtype=np.int64))

    @property
    def size(self) -> int:
        return int(self.words.size)

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[BitWord]:
        return (BitWord(self.length, int(w)) for w in self.words)

    def __contains__(self, w: BitWord) -> bool:
        i = np.searchsorted(self.words, w.bits)
        return bool(i < self.words.size and self.words[i] == w.bits)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, CodeSet)
            and other.length == self.length
            and np.array_equal(other.words, self.words)
        )

    def __hash__(self) -> int:
        return hash((self.length, self.words.tobytes()))


def _pairwise_min(words: np.ndarray, chunk: int = 1 << 22) -> int:
    w = words.astype(np.uint64)
    best = 10**9
    n = w.size
    step = max(1, chunk // max(n, 1))
    for s in range(0, n - 1, step):
        a = w[s : s + step, None]
        b = w[None, :]
        d = np.bitwise_count(a ^ b).astype(np.int64)
        idx = np.arange(s, min(s + step, n))[:, None]
        d[np.arange(n)[None, :] <= idx] = 10**9
        best = min(best, int(d.min()))
        if best == 1:
            break
    return best


def min_distance_words(words: np.ndarray, length: int) -> int:
    """Minimum pairwise distance of a set of packed words.

    Picks between the full pairwise scan and a growing Hamming-ball probe,
    whichever is estimated to be cheaper.
    """
    w = np.unique(np.asarray(words, dtype=np.int64))
    n = w.size
    if n < 2:
        raise ValueError("minimum distance needs at least two words")
    pair_cost = n * n / 2
    member = None
    ball_cost = 0.0
    for radius in range(1, length + 1):
        ball_cost += n * comb(length, radius)
        if ball_cost >= pair_cost:
            return _pairwise_min(w)
        if member is None:
            member = np.zeros(1 << length, dtype=bool)
            member[w] = True
        for pos in itertools.combinations(range(length), radius):
            e = sum(1 << (length - 1 - p) for p in pos)
            if member[w ^ e].any():
                return radius
    return _pairwise_min(w)


def min_distance(code: CodeSet) -> int:
    if code.size < 2:
        raise ValueError("minimum distance of a single-word code is undefined")
    return min_distance_words(code.words, code.length)


def span_words(rows: Sequence[int]) -> np.ndarray:
    """All GF(2) combinations of ``rows`` (with repetition if dependent)."""
    out = np.zeros(1, dtype=np.int64)
    for r in rows:
        out = np.concatenate([out, out ^ np.int64(r)])
    return out


def span(gen: BinaryMatrix) -> tuple[CodeSet, int]:
    """The linear code spanned by the rows of ``gen`` and its dimension."""
    if gen.nrows > MAX_LENGTH:
        raise ValueError("too many generator rows")
    rank = gen.rank
    basis: list[int] = []
    for r in gen.rows:
        if gf2_rank(basis + [r]) > len(basis):
            basis.append(r)
    return CodeSet(gen.cols, span_words(basis)), rank


def min_weight_linear(gen: BinaryMatrix) -> int:
    """Minimum nonzero weight of the code spanned by ``gen``."""
    words = span(gen)[0].words
    wts = popcount_array(words[words != 0])
    if wts.size == 0:
        raise ValueError("zero code")
    return int(wts.min())


# ---------------------------------------------------------------------------
# classical bounds
# ---------------------------------------------------------------------------


def _sphere(n: int, t: int, q: int = 2) -> int:
    return sum(comb(n, i) * (q - 1) ** i for i in range(t + 1))


def plotkin_binary(n: int, d: int) -> int:
    """Plotkin upper bound on A(n, d); beyond its range, halve down to n = 2d."""
    if d <= 0:
        raise ValueError("d must be positive")
    if d > n:
        return 1
    if d % 2:
        return plotkin_binary(n + 1, d + 1)
    if 2 * d > n:
        return 2 * (d // (2 * d - n))
    if 2 * d == n:
        return 4 * d
    return 2 ** (n - 2 * d) * 4 * d


def plotkin_qary(n: int, d: int, q: int) -> int | None:
    theta = 1 - 1 / q
    if d > theta * n:
        return int(d // (d - theta * n))
    return None


def max_code_size_bound(n: int, d: int, q: int = 2) -> int:
    """Smallest of the Singleton, Hamming and Plotkin bounds on A_q(n, d)."""
    if d <= 1:
        return q**n
    if d > n:
        return 1
    bounds = [q ** (n - d + 1), q**n // _sphere(n, (d - 1) // 2, q)]
    if q == 2:
        bounds.append(plotkin_binary(n, d))
    else:
        p = plotkin_qary(n, d, q)
        if p is not None:
            bounds.append(p)
    return min(bounds)


@lru_cache(maxsize=None)
def classical_bounds(n: int, k: int, q: int = 2) -> int:
    """Largest d not excluded by Singleton, Hamming or Plotkin for q^k words of length n."""
    if not 1 <= k <= n <= MAX_LENGTH:
        raise ValueError(f"need 1 <= k <= n <= {MAX_LENGTH}")
    best = 1
    for d in range(1, n + 1):
        if max_code_size_bound(n, d, q) >= q**k:
            best = d
    return best


# ---------------------------------------------------------------------------
# text formats
# ---------------------------------------------------------------------------


def data_dir() -> Path:
    env = os.environ.get("PKW_DATA_DIR")
    if env:
        return Path(env)
    return Path(__file__).resolve().parent / "data"


def data_path(name: str) -> Path:
    return data_dir() / name


def parse_matrix_lines(text: str) -> list[str]:
    """Non-comment rows of the matrix text format (whitespace inside rows is ignored)."""
    out = []
    for line in text.splitlines():
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        out.append("".join(s.split()))
    return out


def load_binary_matrix(path: str | Path) -> BinaryMatrix:
    lines = parse_matrix_lines(Path(path).read_text())
    for s in lines:
        if set(s) - {"0", "1"}:
            raise ValueError(f"{path}: non-binary row {s!r}")
    return BinaryMatrix.from_strings(lines)


def load_quaternary_matrix(path: str | Path) -> list[QuaternaryWord]:
    lines = parse_matrix_lines(Path(path).read_text())
    for s in lines:
        if set(s) - set("0123"):
            raise ValueError(f"{path}: non-quaternary row {s!r}")
    return [QuaternaryWord.from_str(s) for s in lines]


def format_matrix(m: BinaryMatrix, header: str | None = None) -> str:
    lines = [f"# {h}" for h in header.splitlines()] if header else []
    return "\n".join(lines + m.to_strings()) + "\n"
