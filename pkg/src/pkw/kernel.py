"""Kernels as explicit permutations, partial distances and exponents.

Input packing: input bit u_0 is the most significant bit of the table index,
and output coordinate 0 is the most significant bit of the table value.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from math import comb
from pathlib import Path
from typing import Sequence

import numpy as np

from .bitcode import BinaryMatrix, classical_bounds, span_words

MAX_TABLE_ELL = 16


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class KernelTable:
    """A bijection on {0,1}^ell stored as its table of output indices."""

    ell: int
    table: np.ndarray = field(compare=False, repr=False)

    def __post_init__(self) -> None:
        if not 1 <= self.ell <= MAX_TABLE_ELL:
            raise KernelError(f"table kernels need 1 <= ell <= {MAX_TABLE_ELL}")
        t = np.array(self.table, dtype=np.int64)
        n = 1 << self.ell
        if t.shape != (n,):
            raise KernelError(f"table must have {n} entries, got {t.shape}")
        if t.min() < 0 or t.max() >= n:
            raise KernelError("table entry out of range")
        seen = np.zeros(n, dtype=bool)
        seen[t] = True
        if not seen.all():
            raise KernelError("table is not a permutation (kernel not bijective)")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, KernelTable) and other.ell == self.ell and np.array_equal(other.table, self.table)

    def __hash__(self) -> int:
        return hash((self.ell, self.table.tobytes()))

    def __call__(self, u: int) -> int:
        return int(self.table[u])

    @property
    def size(self) -> int:
        return 1 << self.ell

    def inverse(self) -> np.ndarray:
        inv = np.empty_like(self.table)
        inv[self.table] = np.arange(self.size, dtype=np.int64)
        return inv

    def output_bits(self) -> np.ndarray:
        """Matrix of shape (2^ell, ell): row u holds g(u) coordinate by coordinate."""
        shifts = np.arange(self.ell - 1, -1, -1, dtype=np.int64)
        return ((self.table[:, None] >> shifts[None, :]) & 1).astype(np.uint8)

    @classmethod
    def identity(cls, ell: int) -> KernelTable:
        return cls(ell, np.arange(1 << ell))

    # kernel file format: first line ell, then 2^ell hex output indices
    def dumps(self) -> str:
        return f"{self.ell}\n" + "\n".join(format(int(v), "x") for v in self.table) + "\n"

    @classmethod
    def loads(cls, text: str) -> KernelTable:
        lines = [s.strip() for s in text.splitlines() if s.strip()]
        if not lines:
            raise KernelError("empty kernel file")
        try:
            ell = int(lines[0])
            vals = [int(s, 16) for s in lines[1:]]
        except ValueError as exc:
            raise KernelError(f"malformed kernel file: {exc}") from None
        if not 1 <= ell <= MAX_TABLE_ELL:
            raise KernelError(f"bad kernel size {ell}")
        if len(vals) != 1 << ell:
            raise KernelError(f"expected {1 << ell} table lines, found {len(vals)}")
        return cls(ell, np.array(vals, dtype=np.int64))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path: str | Path) -> KernelTable:
        return cls.loads(Path(path).read_text())


def kernel_from_matrix(gen: BinaryMatrix) -> KernelTable:
    """Linear kernel u -> u·G (row vector convention)."""
    n, c = gen.shape
    if n != c:
        raise KernelError("generator must be square")
    if n > MAX_TABLE_ELL:
        raise KernelError(f"table kernels are limited to ell <= {MAX_TABLE_ELL}")
    if gen.rank != n:
        raise KernelError("singular generator: kernel would not be bijective")
    # span_words gives its k-th argument row index bit k, so feed the rows last-first
    return KernelTable(n, span_words(list(reversed(gen.rows))))


ARIKAN = BinaryMatrix.from_strings(["10", "11"])


def arikan_kernel() -> KernelTable:
    return kernel_from_matrix(ARIKAN)


# ---------------------------------------------------------------------------
# partial distances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartialDistanceProfile:
    ell: int
    d: tuple[int, ...]

    def __post_init__(self) -> None:
        d = tuple(int(x) for x in self.d)
        object.__setattr__(self, "d", d)
        if len(d) != self.ell:
            raise ValueError(f"profile needs {self.ell} entries")
        if any(x < 1 for x in d):
            raise ValueError("partial distances are positive")
        # min(d[i:]) is the distance of a (ell, 2^(ell-i)) code; a single
        # entry of a non-monotone profile may legitimately exceed the bound
        if self.ell <= 25:
            for i in range(self.ell):
                if min(d[i:]) > classical_bounds(self.ell, self.ell - i):
                    raise ValueError(f"min(d[{i}:]) exceeds the classical bound")

    def __iter__(self):
        return iter(self.d)

    def __getitem__(self, i: int) -> int:
        return self.d[i]

    def __len__(self) -> int:
        return self.ell

    @property
    def exponent(self) -> float:
        return exponent_value(self.d)

    def is_monotone(self) -> bool:
        return all(a <= b for a, b in zip(self.d, self.d[1:]))


@dataclass(frozen=True)
class Exponent:
    value: float
    profile: PartialDistanceProfile

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise ValueError("exponent outside [0, 1]")


def exponent_value(d: Sequence[int]) -> float:
    """(1/l) * sum log_l d_i, evaluated in the log2 domain."""
    ell = len(d)
    if ell < 2:
        return 0.0
    return sum(math.log2(x) for x in d) / (ell * math.log2(ell))


def exponent(profile: PartialDistanceProfile | Sequence[int]) -> Exponent:
    if not isinstance(profile, PartialDistanceProfile):
        profile = PartialDistanceProfile(len(profile), tuple(profile))
    return Exponent(exponent_value(profile.d), profile)


def truncate(x: float, digits: int = 5) -> float:
    """Cut ``x`` after ``digits`` decimals (a 1e-9 guard absorbs float noise on exact values)."""
    s = 10**digits
    return math.floor(x * s + 1e-9) / s


def _bitlen(a: np.ndarray) -> np.ndarray:
    out = np.zeros(a.shape, dtype=np.int64)
    nz = a > 0
    out[nz] = np.floor(np.log2(a[nz].astype(np.float64))).astype(np.int64) + 1
    return out


def _direct_level(table: np.ndarray, ell: int, i: int, chunk: int = 1 << 24) -> int:
    """min over prefixes of the distance between the two halves selected by bit i."""
    t = table.astype(np.uint64).reshape(1 << i, 2, -1)
    half = t.shape[2]
    best = ell
    per = max(1, chunk // (half * half))
    rows = max(1, chunk // half) if per == 1 else half
    for s in range(0, t.shape[0], per):
        for r in range(0, half, rows):
            a = t[s : s + per, 0, r : r + rows, None]
            b = t[s : s + per, 1, None, :]
            best = min(best, int(np.bitwise_count(a ^ b).min()))
            if best == 1:
                return best
    return best


def partial_distances(kernel: KernelTable) -> PartialDistanceProfile:
    """Exact partial-distance profile.

    Low-weight differences are found by probing Hamming balls around every
    image; the level at which a probe lands is where the two inputs first
    disagree, so the first radius reaching a level is its distance.  Levels
    still open once probing stops being cheaper are settled by a direct
    pairwise scan of sibling halves.
    """
    ell, n = kernel.ell, kernel.size
    table = kernel.table
    inv = kernel.inverse()
    u = np.arange(n, dtype=np.int64)
    d: list[int | None] = [None] * ell

    def direct_cost(i: int) -> int:
        return 1 << (2 * ell - i - 2)

    w = 1
    while w <= ell and any(x is None for x in d):
        remaining = sum(direct_cost(i) for i in range(ell) if d[i] is None)
        if n * comb(ell, w) >= remaining:
            break
        hit = np.zeros(ell, dtype=bool)
        for pos in itertools.combinations(range(ell), w):
            e = sum(1 << (ell - 1 - p) for p in pos)
            lev = ell - _bitlen(u ^ inv[table ^ e])
            hit[lev] = True
        for i in range(ell):
            if hit[i] and d[i] is None:
                d[i] = w
        w += 1
    for i in range(ell):
        if d[i] is None:
            d[i] = _direct_level(table, ell, i)
    return PartialDistanceProfile(ell, tuple(d))  # type: ignore[arg-type]


def partial_distances_naive(kernel: KernelTable) -> tuple[int, ...]:
    """Textbook definition, used as an oracle at small ell."""
    ell = kernel.ell
    out = []
    for i in range(ell):
        best = ell
        for p in range(1 << i):
            base = p << (ell - i)
            half = 1 << (ell - i - 1)
            zeros = [int(kernel.table[base + s]) for s in range(half)]
            ones = [int(kernel.table[base + half + s]) for s in range(half)]
            for a in zeros:
                for b in ones:
                    best = min(best, bin(a ^ b).count("1"))
        out.append(best)
    return tuple(out)


def prefix_distances(kernel: KernelTable, i: int) -> np.ndarray:
    """D^(i)(u_0^{i-1}) for every prefix, indexed by the prefix value."""
    if not 0 <= i < kernel.ell:
        raise ValueError("level out of range")
    t = kernel.table.astype(np.uint64).reshape(1 << i, 2, -1)
    out = np.empty(1 << i, dtype=np.int64)
    for p in range(1 << i):
        out[p] = int(np.bitwise_count(t[p, 0, :, None] ^ t[p, 1, None, :]).min())
    return out


def polarization_check(kernel: KernelTable) -> bool:
    """True iff some prefix of length ell-1 has last-level distance at least 2."""
    t = kernel.table.astype(np.uint64).reshape(-1, 2)
    return bool((np.bitwise_count(t[:, 0] ^ t[:, 1]) >= 2).any())


def linear_partial_distances(gen: BinaryMatrix) -> PartialDistanceProfile:
    """Profile of u -> u·G for a full-rank square G of any supported size.

    d[i] is the minimum weight of row i plus the span of the rows below it.
    """
    n, c = gen.shape
    if n != c:
        raise KernelError("generator must be square")
    if gen.rank != n:
        raise KernelError("singular generator")
    return PartialDistanceProfile(n, tuple(suffix_coset_weights(gen.rows)))


def suffix_coset_weights(rows: Sequence[int]) -> list[int]:
    """For each i, min weight of rows[i] + span(rows[i+1:])."""
    out = [0] * len(rows)
    sp = np.zeros(1, dtype=np.int64)
    for i in range(len(rows) - 1, -1, -1):
        coset = sp ^ np.int64(rows[i])
        out[i] = int(np.bitwise_count(coset.astype(np.uint64)).min())
        sp = np.concatenate([sp, coset])
    return out


# ---------------------------------------------------------------------------
# coordinate swaps
# ---------------------------------------------------------------------------


def swap_coordinates(kernel: KernelTable, k: int) -> KernelTable:
    """Exchange input coordinates k and k+1."""
    ell = kernel.ell
    if not 0 <= k <= ell - 2:
        raise ValueError(f"k must be in 0..{ell - 2}")
    u = np.arange(kernel.size, dtype=np.int64)
    sa, sb = ell - 1 - k, ell - 2 - k
    a = (u >> sa) & 1
    b = (u >> sb) & 1
    v = u ^ ((a ^ b) << sa) ^ ((a ^ b) << sb)
    return KernelTable(ell, kernel.table[v])


def normalize_profile(kernel: KernelTable, max_swaps: int = 10_000) -> KernelTable:
    """Swap adjacent coordinates until the profile is non-decreasing (smallest index first)."""
    prof = partial_distances(kernel).d
    for _ in range(max_swaps):
        bad = next((i for i in range(kernel.ell - 1) if prof[i] > prof[i + 1]), None)
        if bad is None:
            return kernel
        kernel = swap_coordinates(kernel, bad)
        prof = partial_distances(kernel).d
    raise RuntimeError("normalisation did not converge")


def permute_outputs(kernel: KernelTable, perm: Sequence[int]) -> KernelTable:
    """Kernel whose output coordinate j is coordinate perm[j] of the original."""
    ell = kernel.ell
    bits = kernel.output_bits()[:, list(perm)]
    weights = 1 << np.arange(ell - 1, -1, -1, dtype=np.int64)
    return KernelTable(ell, (bits.astype(np.int64) * weights).sum(axis=1))


def random_kernel(ell: int, rng: np.random.Generator) -> KernelTable:
    return KernelTable(ell, rng.permutation(1 << ell))
