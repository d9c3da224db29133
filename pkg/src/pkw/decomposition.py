"""Code decompositions, chain parameters and the length-16 nonlinear kernels.

A decomposition is stored level by level as an assignment array: entry x of
the array at depth t is the branch label (an integer whose t bits are
b_0 ... b_{t-1}, b_0 most significant) of the set containing word x.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .bitcode import (
    GRAY_INT,
    BinaryMatrix,
    CodeSet,
    QuaternaryWord,
    classical_bounds,
    data_path,
    gf2_rank,
    load_quaternary_matrix,
    popcount_array,
    span_words,
)
from .kernel import KernelTable, PartialDistanceProfile, exponent_value, kernel_from_matrix


class ConstructionError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# chains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainSpec:
    """Chain (ell,k_0,d_0)-(ell,k_1,d_1)-... with k_0 = ell and d_0 = 1."""

    ell: int
    levels: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        levels = tuple((int(k), int(d)) for k, d in self.levels)
        object.__setattr__(self, "levels", levels)
        if not levels or levels[0] != (self.ell, 1):
            raise ValueError("a chain starts at (ell, 1)")
        for (k0, d0), (k1, d1) in zip(levels, levels[1:]):
            if k1 >= k0:
                raise ValueError("chain dimensions must strictly decrease")
            if d1 < d0:
                raise ValueError("chain distances must not decrease")
        for k, d in levels:
            if k < 1:
                raise ValueError("chain dimensions are positive")
            if d > classical_bounds(self.ell, k):
                raise ValueError(f"distance {d} impossible for {2**k} words of length {self.ell}")

    @classmethod
    def parse(cls, ell: int, text: str) -> ChainSpec:
        """Parse ``"(16,1)-(15,2)-..."`` where each pair is (k, d)."""
        parts = [p.strip("() ") for p in text.split("-")]
        return cls(ell, tuple(tuple(int(v) for v in p.split(",")) for p in parts))  # type: ignore[misc]

    @property
    def depths(self) -> tuple[int, ...]:
        return tuple(self.ell - k for k, _ in self.levels)

    def __str__(self) -> str:
        return "-".join(f"({k},{d})" for k, d in self.levels)


def refine_chain(chain: ChainSpec) -> PartialDistanceProfile:
    """Binary profile guaranteed by a chain: level j covers ell-k_j <= i <= ell-1-k_{j+1}."""
    d = []
    ks = [k for k, _ in chain.levels] + [0]
    for j, (k, dj) in enumerate(chain.levels):
        d.extend([dj] * (k - ks[j + 1]))
    return PartialDistanceProfile(chain.ell, tuple(d))


def chain_exponent_bound(chain: ChainSpec) -> float:
    """(1/l) * sum_j (k_j - k_{j+1}) log_l d_j."""
    return exponent_value(refine_chain(chain).d)


TABLE_III = {
    1: (ChainSpec.parse(16, "(16,1)-(15,2)-(11,4)-(8,6)-(5,8)-(1,16)"), 0.52742),
    2: (ChainSpec.parse(16, "(16,1)-(15,2)-(11,4)-(7,6)-(5,8)-(1,16)"), 0.51828),
    3: (ChainSpec.parse(15, "(15,1)-(14,2)-(10,4)-(7,6)-(4,8)"), 0.50773),
    4: (ChainSpec.parse(14, "(14,1)-(13,2)-(9,4)-(6,6)-(3,8)"), 0.50194),
}


# ---------------------------------------------------------------------------
# decompositions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Decomposition:
    """Nested partitions of {0,1}^ell stored at selected depths."""

    ell: int
    depths: tuple[int, ...]
    assignment: tuple[np.ndarray, ...] = field(repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.depths) != len(self.assignment):
            raise ValueError("one assignment array per depth")
        if list(self.depths) != sorted(set(self.depths)):
            raise ValueError("depths must be strictly increasing")
        for a in self.assignment:
            if a.shape != (1 << self.ell,):
                raise ValueError("assignment arrays cover the whole space")

    @classmethod
    def from_kernel(cls, kernel: KernelTable, depths: Sequence[int] | None = None) -> Decomposition:
        ell = kernel.ell
        depths = tuple(range(ell + 1)) if depths is None else tuple(sorted(set(depths)))
        inv = kernel.inverse()
        return cls(ell, depths, tuple(inv >> (ell - t) for t in depths))

    def level(self, depth: int) -> np.ndarray:
        return self.assignment[self.depths.index(depth)]

    def code(self, depth: int, label: Sequence[int]) -> CodeSet:
        if len(label) != depth:
            raise ValueError("label length must equal the depth")
        v = 0
        for b in label:
            v = (v << 1) | int(b)
        words = np.flatnonzero(self.level(depth) == v)
        if words.size == 0:
            raise KeyError(tuple(label))
        return CodeSet(self.ell, words)

    def sets(self, depth: int) -> dict[tuple[int, ...], np.ndarray]:
        a = self.level(depth)
        order = np.argsort(a, kind="stable")
        labels, starts = np.unique(a[order], return_index=True)
        chunks = np.split(order, starts[1:])
        return {tuple((int(l) >> (depth - 1 - j)) & 1 for j in range(depth)): c for l, c in zip(labels, chunks)}

    def induced_kernel(self) -> KernelTable:
        """The kernel sending each depth-ell label to the single word carrying it."""
        if self.depths[-1] != self.ell:
            raise ConstructionError("finest level missing")
        a = self.assignment[-1]
        if np.bincount(a, minlength=1 << self.ell).max() != 1:
            raise ConstructionError("finest level is not made of singletons")
        table = np.empty(1 << self.ell, dtype=np.int64)
        table[a] = np.arange(1 << self.ell, dtype=np.int64)
        return KernelTable(self.ell, table)

    def with_level(self, depth: int, assignment: np.ndarray) -> Decomposition:
        i = self.depths.index(depth)
        arr = list(self.assignment)
        arr[i] = np.asarray(assignment, dtype=np.int64)
        return Decomposition(self.ell, self.depths, tuple(arr))


@dataclass(frozen=True)
class LevelCheck:
    depth: int
    dimension: int
    required_distance: int | None
    partition_ok: bool
    nesting_ok: bool
    min_distance: int | None
    distance_ok: bool

    @property
    def ok(self) -> bool:
        return self.partition_ok and self.nesting_ok and self.distance_ok


@dataclass(frozen=True)
class ValidationReport:
    levels: tuple[LevelCheck, ...]
    missing_depths: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.missing_depths and all(l.ok for l in self.levels)

    def failures(self) -> list[str]:
        out = [f"depth {d} missing" for d in self.missing_depths]
        for l in self.levels:
            if not l.partition_ok:
                out.append(f"depth {l.depth}: not an equal-size partition")
            if not l.nesting_ok:
                out.append(f"depth {l.depth}: sets not nested in the previous level")
            if not l.distance_ok:
                out.append(f"depth {l.depth}: min distance {l.min_distance} < {l.required_distance}")
        return out


def level_min_distance(assign: np.ndarray, ell: int) -> int | None:
    """Minimum distance inside the sets of one level (None when all sets are singletons)."""
    counts = np.bincount(assign)
    counts = counts[counts > 0]
    if counts.max() < 2:
        return None
    pair_cost = float((counts.astype(np.float64) ** 2).sum() / 2)
    space = np.arange(1 << ell, dtype=np.int64)
    ball_cost = 0.0
    for r in range(1, ell + 1):
        ball_cost += (1 << ell) * comb(ell, r)
        if ball_cost >= pair_cost:
            break
        for pos in itertools.combinations(range(ell), r):
            e = sum(1 << (ell - 1 - p) for p in pos)
            if (assign == assign[space ^ e]).any():
                return r
    order = np.argsort(assign, kind="stable")
    labels, starts = np.unique(assign[order], return_index=True)
    best = ell + 1
    for c in np.split(order, starts[1:]):
        if c.size < 2:
            continue
        w = c.astype(np.uint64)
        d = np.bitwise_count(w[:, None] ^ w[None, :]).astype(np.int64)
        np.fill_diagonal(d, ell + 1)
        best = min(best, int(d.min()))
        if best == 1:
            break
    return best


def validate_decomposition(dec: Decomposition, chain: ChainSpec | None = None) -> ValidationReport:
    """Check partitions, equal sizes, nesting and (given a chain) per-level distances."""
    ell = dec.ell
    required: dict[int, int] = {}
    missing: tuple[int, ...] = ()
    if chain is not None:
        if chain.ell != ell:
            raise ValueError("chain length does not match the decomposition")
        required = {ell - k: d for k, d in chain.levels}
        missing = tuple(t for t in required if t not in dec.depths)
    checks = []
    prev: tuple[int, np.ndarray] | None = None
    for t, a in zip(dec.depths, dec.assignment):
        counts = np.bincount(a, minlength=1 << t) if a.min() >= 0 and a.max() < (1 << t) else None
        part_ok = counts is not None and counts.size == 1 << t and bool((counts == (1 << (ell - t))).all())
        nest_ok = True
        if prev is not None:
            pt, pa = prev
            nest_ok = bool(((a >> (t - pt)) == pa).all())
        need = required.get(t)
        md = level_min_distance(a, ell) if (need is not None and need > 1 and part_ok) else None
        dist_ok = need is None or need <= 1 or (md is not None and md >= need)
        checks.append(LevelCheck(t, ell - t, need, part_ok, nest_ok, md, dist_ok))
        prev = (t, a)
    if dec.depths[0] != 0:
        missing = missing + (0,)
    return ValidationReport(tuple(checks), missing)


# ---------------------------------------------------------------------------
# decomposition #1 from its coset vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CosetGroup:
    first: int
    last: int
    linear: bool
    vectors: tuple[int, ...]

    @property
    def size(self) -> int:
        return self.last - self.first + 1


TABLE6_DIGEST = "f0ef843ff08bdc8ed15f73cf3021dd48fffde13fb940ba2ddd29257b0246c7f7"


def _content_digest(rows: Sequence[str]) -> str:
    return hashlib.sha256("\n".join(rows).encode()).hexdigest()


def load_coset_groups(name: str = "table6_coset_vectors.txt", check_digest: bool = True) -> tuple[int, list[CosetGroup]]:
    text = data_path(name).read_text()
    groups: list[CosetGroup] = []
    cur: list | None = None
    rows: list[str] = []
    for line in text.splitlines():
        s = line.strip()
        if s.startswith("# group"):
            _, _, rng, kind = s.split()
            a, _, b = rng.partition("-")
            cur = [int(a), int(b or a), kind == "linear", []]
            groups.append(cur)  # type: ignore[arg-type]
            rows.append(s)
        elif s and not s.startswith("#"):
            if cur is None:
                raise ConstructionError("coset vector before any group header")
            cur[3].append(s)
            rows.append(s)
    if check_digest and _content_digest(rows) != TABLE6_DIGEST:
        raise ConstructionError(f"{name}: content checksum mismatch")
    lengths = {len(v) for g in groups for v in g[3]}
    if len(lengths) != 1:
        raise ConstructionError("coset vectors of different lengths")
    ell = lengths.pop()
    out = [CosetGroup(a, b, lin, tuple(int(v, 2) for v in vecs)) for a, b, lin, vecs in groups]
    pos = 0
    for g in out:
        if g.first != pos:
            raise ConstructionError("input groups are not contiguous")
        need = g.size if g.linear else 1 << g.size
        if len(g.vectors) != need:
            raise ConstructionError(f"group {g.first}-{g.last} needs {need} vectors")
        pos = g.last + 1
    if pos != ell:
        raise ConstructionError("input groups do not cover every input bit")
    return ell, out


def coset_kernel(ell: int, groups: Sequence[CosetGroup]) -> KernelTable:
    """Sum of one coset vector per input group."""
    u = np.arange(1 << ell, dtype=np.int64)
    x = np.zeros_like(u)
    for g in groups:
        sub = (u >> (ell - 1 - g.last)) & ((1 << g.size) - 1)
        if g.linear:
            for j, v in enumerate(g.vectors):
                bit = (sub >> (g.size - 1 - j)) & 1
                x ^= bit * np.int64(v)
        else:
            x ^= np.array(g.vectors, dtype=np.int64)[sub]
    try:
        return KernelTable(ell, x)
    except ValueError as exc:
        raise ConstructionError(f"coset construction is not bijective: {exc}") from None


DEC1_DEPTHS = TABLE_III[1][0].depths + (16,)


def build_decomposition_16() -> tuple[Decomposition, KernelTable]:
    ell, groups = load_coset_groups()
    kernel = coset_kernel(ell, groups)
    return Decomposition.from_kernel(kernel, DEC1_DEPTHS), kernel


# ---------------------------------------------------------------------------
# Z4 representation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Z4Generator:
    rows: tuple[QuaternaryWord, ...]
    groups: tuple[tuple[int, int], ...] = ((0, 0), (1, 4), (5, 7), (8, 10), (11, 14), (15, 15))

    def __post_init__(self) -> None:
        if len({r.length for r in self.rows}) != 1:
            raise ValueError("rows of different lengths")

    @classmethod
    def load(cls, name: str = "g_hash1_z4.txt") -> Z4Generator:
        return cls(tuple(load_quaternary_matrix(data_path(name))))

    def as_array(self) -> np.ndarray:
        return np.array([r.digits for r in self.rows], dtype=np.int64)

    def gamma_identity(self) -> bool:
        """gamma_{i+4} = 2 gamma_i for 8 <= i <= 11 (the orientation the matrix satisfies)."""
        return all(self.rows[i + 4] == self.rows[i].scale(2) for i in range(8, 12))

    def gamma_identity_literal(self) -> bool:
        """gamma_i = 2 gamma_{i+4} for 8 <= i <= 11, read literally."""
        return all(self.rows[i] == self.rows[i + 4].scale(2) for i in range(8, 12))

    def z4_span(self, z4_rows: Sequence[int], binary_rows: Sequence[int] = ()) -> np.ndarray:
        """Gray images of all combinations with Z4 coefficients on ``z4_rows`` and 0/1 on the rest."""
        g = self.as_array()
        n = g.shape[1]
        coefs = itertools.product(*([range(4)] * len(z4_rows) + [range(2)] * len(binary_rows)))
        sel = g[list(z4_rows) + list(binary_rows)]
        words = [gray_pack(np.array(c, dtype=np.int64) @ sel % 4, n) for c in coefs]
        return np.array(words, dtype=np.int64)


def gray_pack(digits: np.ndarray, n: int | None = None) -> int:
    """Gray image of a Z4 word: digit j gives output bits 2j, 2j+1."""
    x = 0
    for d in digits:
        x = (x << 2) | int(GRAY_INT[int(d)])
    return x


def gray_table(x: np.ndarray) -> np.ndarray:
    """Vectorised Gray map on an array of Z4 words (last axis = digits)."""
    bits = GRAY_INT[x]
    n = x.shape[-1]
    weights = 1 << (2 * np.arange(n - 1, -1, -1, dtype=np.int64))
    return (bits * weights).sum(axis=-1)


def build_decomposition_z4(gen: Z4Generator | None = None) -> KernelTable:
    gen = gen or Z4Generator.load()
    g = gen.as_array()
    ell = g.shape[0]
    u = np.arange(1 << ell, dtype=np.int64)
    bits = (u[:, None] >> np.arange(ell - 1, -1, -1, dtype=np.int64)[None, :]) & 1
    x = (bits @ g) % 4
    return KernelTable(2 * g.shape[1], gray_table(x))


# ---------------------------------------------------------------------------
# decomposition #2: nested extended cyclic codes
# ---------------------------------------------------------------------------


def _gf16() -> tuple[list[int], list[int]]:
    exp = [0] * 30
    log = [0] * 16
    v = 1
    for i in range(15):
        exp[i] = exp[i + 15] = v
        log[v] = i
        v <<= 1
        if v & 0x10:
            v ^= 0x13  # x^4 + x + 1
    return exp, log


def _minimal_polynomial(i: int) -> list[int]:
    """Coefficients (lowest degree first) of the minimal polynomial of alpha^i over GF(2)."""
    exp, log = _gf16()
    coset = sorted({(i * 2**j) % 15 for j in range(4)})

    def mul(a: int, b: int) -> int:
        return 0 if a == 0 or b == 0 else exp[log[a] + log[b]]

    poly = [1]
    for c in coset:
        root = exp[c]
        nxt = [0] * (len(poly) + 1)
        for k, a in enumerate(poly):
            nxt[k + 1] ^= a
            nxt[k] ^= mul(a, root)
        poly = nxt
    if any(a not in (0, 1) for a in poly):
        raise ConstructionError("minimal polynomial not binary")
    return poly


def _polymul2(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] ^= y
    return out


def extended_cyclic_basis(zero_cosets: Sequence[int]) -> list[int]:
    """Basis of the extended length-16 binary cyclic code with the given zero cosets.

    Position p < 15 carries the coefficient of x^p; position 15 is the overall parity.
    """
    g = [1]
    for c in zero_cosets:
        g = _polymul2(g, _minimal_polynomial(c))
    deg = len(g) - 1
    basis = []
    for shift in range(15 - deg):
        coeffs = [0] * shift + g + [0] * (15 - deg - shift - 1)
        word = coeffs + [sum(coeffs) % 2]
        basis.append(int("".join(map(str, word)), 2))
    return basis


def extend_basis(small: Sequence[int], big: Sequence[int]) -> list[int]:
    """Vectors of ``big`` (in order) extending ``small`` to a basis of span(big)."""
    if gf2_rank(list(big) + list(small)) != gf2_rank(big):
        raise ConstructionError("codes are not nested")
    chosen: list[int] = []
    for v in big:
        if gf2_rank(list(small) + chosen + [v]) > len(small) + len(chosen):
            chosen.append(v)
    return chosen


DEC2_CODES = (
    ("repetition", (1, 3, 5, 7)),
    ("first-order Reed-Muller", (1, 3, 5)),
    ("extended 2-error BCH", (1, 3)),
    ("extended Hamming", (1,)),
    ("single parity check", ()),
)


def decomposition_2_matrix() -> BinaryMatrix:
    """Nested basis: full space ⊃ SPC ⊃ ext. Hamming ⊃ eBCH ⊃ RM(1,4) ⊃ repetition, coarse rows first."""
    rows: list[int] = []
    prev: list[int] = []
    for _, zeros in DEC2_CODES:
        basis = extended_cyclic_basis(zeros)
        ext = extend_basis(prev, basis)
        rows = ext[::-1] + rows
        prev = prev + ext
    full = [1 << (15 - p) for p in range(16)]
    rows = extend_basis(prev, full)[::-1] + rows
    m = BinaryMatrix(tuple(rows), 16)
    if m.nrows != 16 or m.rank != 16:
        raise ConstructionError("decomposition #2 basis is not complete")
    return m


def build_decomposition_2() -> tuple[Decomposition, KernelTable]:
    kernel = kernel_from_matrix(decomposition_2_matrix())
    return Decomposition.from_kernel(kernel, TABLE_III[2][0].depths + (16,)), kernel


def code_dimensions_2() -> dict[str, tuple[int, int]]:
    """(dimension, minimum distance) of each nested code of decomposition #2."""
    out = {}
    for name, zeros in DEC2_CODES:
        b = extended_cyclic_basis(zeros)
        w = span_words(b)
        out[name] = (len(b), int(popcount_array(w[w != 0]).min()))
    return out


# ---------------------------------------------------------------------------
# shortening a decomposition (#3, #4)
# ---------------------------------------------------------------------------


def shorten_decomposition(dec: Decomposition, coord: int) -> Decomposition:
    """Keep the words with a 0 in ``coord``, delete that coordinate, drop the finest level.

    Raises ConstructionError naming the first level whose sets stop being equal-sized.
    """
    ell = dec.ell
    if dec.depths != tuple(range(ell + 1)):
        raise ConstructionError("shortening needs every depth of the decomposition")
    x = np.arange(1 << ell, dtype=np.int64)
    keep = ((x >> (ell - 1 - coord)) & 1) == 0
    kept = x[keep]
    high = kept >> (ell - coord)
    low = kept & ((1 << (ell - 1 - coord)) - 1)
    new_index = (high << (ell - 1 - coord)) | low
    out = []
    for t, a in zip(dec.depths[:-1], dec.assignment[:-1]):
        na = np.empty(1 << (ell - 1), dtype=np.int64)
        na[new_index] = a[keep]
        counts = np.bincount(na, minlength=1 << t)
        if counts.size != 1 << t or not (counts == (1 << (ell - 1 - t))).all():
            raise ConstructionError(f"shortening on coordinate {coord}: level at depth {t} splits unevenly")
        out.append(na)
    return Decomposition(ell - 1, tuple(range(ell)), tuple(out))


def shorten_last(dec: Decomposition) -> tuple[Decomposition, int]:
    """Shorten on the highest coordinate that keeps every level equal-sized."""
    last_error: ConstructionError | None = None
    for c in range(dec.ell - 1, -1, -1):
        try:
            return shorten_decomposition(dec, c), c
        except ConstructionError as exc:
            last_error = exc
    raise ConstructionError(f"no coordinate admits an even shortening ({last_error})")


@lru_cache(maxsize=None)
def _dec1_full() -> Decomposition:
    _, kernel = build_decomposition_16()
    return Decomposition.from_kernel(kernel)


def build_decomposition_shortened(ell: int) -> tuple[Decomposition, KernelTable]:
    """Decomposition #3 (ell=15) or #4 (ell=14) obtained by shortening #1."""
    if ell not in (14, 15):
        raise ValueError("shortened decompositions exist for ell in {14, 15}")
    dec = _dec1_full()
    coords = []
    while dec.ell > ell:
        dec, c = shorten_last(dec)
        coords.append(c)
    chain = TABLE_III[3 if ell == 15 else 4][0]
    report = validate_decomposition(dec, chain)
    if not report.ok:
        raise ConstructionError("shortened decomposition fails: " + "; ".join(report.failures()))
    return dec, dec.induced_kernel()


def shortening_coordinates() -> list[int]:
    """Output coordinates removed when going from #1 to #3 and then to #4."""
    dec = _dec1_full()
    out = []
    for _ in range(2):
        dec, c = shorten_last(dec)
        out.append(c)
    return out
