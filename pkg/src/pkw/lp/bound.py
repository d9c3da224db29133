"""Distance-distribution polytopes and LP upper bounds on the kernel exponent.

For a monotone sequence D_0 <= ... <= D_{l-1} the polytope has one variable
B[k, i] for every level k and distance i >= D_k, read as the average number
of words at distance i from a word of the level-k sub-code.  Constraints:

* level sums:  sum_i B[k, i] = q^(l-k) - 1
* nesting:     B[k, i] >= B[k+1, i] for i >= D_{k+1}
* Delsarte:    sum_i P_t(i) B[k, i] >= -C(l, t) (q-1)^t for t = 1..l
* B >= 0
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from pathlib import Path
from typing import Mapping, Sequence

from ..bitcode import classical_bounds, data_path
from .simplex import Constraint, phase1


@lru_cache(maxsize=None)
def krawtchouk(k: int, x: int, ell: int, q: int = 2) -> int:
    """P_k(x) = sum_m (-1)^m (q-1)^(k-m) C(x, m) C(ell-x, k-m)."""
    if not (0 <= k <= ell and 0 <= x <= ell) or q < 2:
        raise ValueError("need 0 <= k, x <= ell and q >= 2")
    return sum((-1) ** m * (q - 1) ** (k - m) * comb(x, m) * comb(ell - x, k - m) for m in range(k + 1))


def krawtchouk_binary(k: int, x: int, ell: int) -> int:
    """Binary form sum_j (-1)^j C(x, j) C(ell-x, k-j)."""
    return sum((-1) ** j * comb(x, j) * comb(ell - x, k - j) for j in range(k + 1))


# ---------------------------------------------------------------------------
# sequences and verdicts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LpSequence:
    ell: int
    q: int
    d: tuple[int, ...]

    def __post_init__(self) -> None:
        d = tuple(int(x) for x in self.d)
        object.__setattr__(self, "d", d)
        if self.q < 2:
            raise ValueError("alphabet size must be at least 2")
        if len(d) != self.ell:
            raise ValueError(f"sequence needs {self.ell} entries")
        if any(x < 1 or x > self.ell for x in d):
            raise ValueError("entries must lie in 1..ell")
        if any(a > b for a, b in zip(d, d[1:])):
            raise ValueError("sequence must be non-decreasing")

    @property
    def product(self) -> int:
        return math.prod(self.d)

    @property
    def exponent(self) -> float:
        if self.ell < 2:
            return 0.0
        return sum(math.log2(x) for x in self.d) / (self.ell * math.log2(self.ell))


@dataclass(frozen=True)
class LpVerdict:
    sequence: LpSequence
    feasible: bool
    point: dict[tuple[int, int], Fraction] | None = field(default=None, compare=False)
    infeasibility: Fraction = Fraction(0)
    pivots: int = 0


def _variables(d: Sequence[int], ell: int, start: int = 0) -> dict[tuple[int, int], int]:
    idx: dict[tuple[int, int], int] = {}
    for k in range(start, ell):
        for i in range(d[k], ell + 1):
            idx[(k, i)] = len(idx)
    return idx


def polytope(d: Sequence[int], ell: int, q: int = 2, start: int = 0) -> tuple[dict[tuple[int, int], int], list[Constraint]]:
    """Variables and constraints for levels ``start..ell-1`` (``start > 0`` gives a relaxation)."""
    idx = _variables(d, ell, start)
    cons: list[Constraint] = []
    for k in range(start, ell):
        cons.append(Constraint({idx[(k, i)]: 1 for i in range(d[k], ell + 1)}, "==", q ** (ell - k) - 1))
    for k in range(start, ell - 1):
        for i in range(d[k + 1], ell + 1):
            cons.append(Constraint({idx[(k, i)]: 1, idx[(k + 1, i)]: -1}, ">=", 0))
    for k in range(start, ell):
        for t in range(1, ell + 1):
            coefs = {}
            for i in range(d[k], ell + 1):
                p = krawtchouk(t, i, ell, q)
                if p:
                    coefs[idx[(k, i)]] = p
            cons.append(Constraint(coefs, ">=", -comb(ell, t) * (q - 1) ** t))
    return idx, cons


def verify_point(seq: LpSequence, point: Mapping[tuple[int, int], Fraction]) -> bool:
    """Exact re-substitution of a certificate into every constraint."""
    idx, cons = polytope(seq.d, seq.ell, seq.q)
    if set(point) != set(idx):
        return False
    x = [Fraction(0)] * len(idx)
    for key, j in idx.items():
        x[j] = Fraction(point[key])
        if x[j] < 0:
            return False
    for c in cons:
        lhs = sum(Fraction(v) * x[j] for j, v in c.coefs.items())
        rhs = Fraction(c.rhs)
        if c.sense == "==" and lhs != rhs:
            return False
        if c.sense == ">=" and lhs < rhs:
            return False
        if c.sense == "<=" and lhs > rhs:
            return False
    return True


def lp_feasible(seq: LpSequence) -> LpVerdict:
    idx, cons = polytope(seq.d, seq.ell, seq.q)
    res = phase1(len(idx), cons)
    if not res.feasible:
        return LpVerdict(seq, False, None, res.infeasibility, res.pivots)
    assert res.point is not None
    point = {key: res.point[j] for key, j in idx.items()}
    return LpVerdict(seq, True, point, Fraction(0), res.pivots)


def suffix_feasible(d: Sequence[int], ell: int, q: int, start: int) -> bool:
    """Feasibility of the constraints that only involve levels >= start."""
    idx, cons = polytope(d, ell, q, start)
    return phase1(len(idx), cons).feasible


# ---------------------------------------------------------------------------
# d(n, k) table
# ---------------------------------------------------------------------------


def delsarte_admits(n: int, k: int, d: int, q: int = 2) -> bool:
    """Whether Delsarte's inequalities allow q^k words of length n at distance >= d.

    Binary codes with even d may be assumed to have only even distances; odd
    d is reduced to (n+1, d+1).
    """
    if d <= 1:
        return True
    if q == 2 and d % 2 == 1:
        return delsarte_admits(n + 1, k, d + 1, q)
    dist = [i for i in range(d, n + 1) if q != 2 or i % 2 == 0]
    if not dist:
        return False
    idx = {i: j for j, i in enumerate(dist)}
    cons = [Constraint({idx[i]: 1 for i in dist}, ">=", q**k - 1)]
    for t in range(1, n + 1):
        coefs = {idx[i]: krawtchouk(t, i, n, q) for i in dist if krawtchouk(t, i, n, q)}
        cons.append(Constraint(coefs, ">=", -comb(n, t) * (q - 1) ** t))
    return phase1(len(dist), cons).feasible


def delsarte_dnk(n: int, k: int, q: int = 2) -> int:
    """Largest d not excluded by Delsarte's LP or the classical bounds."""
    best = 1
    for d in range(2, classical_bounds(n, k, q) + 1):
        if delsarte_admits(n, k, d, q):
            best = d
        else:
            break
    return best


@dataclass
class DnkTable:
    """Upper bounds d(n, k) on the best minimum distance of q^k words of length n."""

    q: int = 2
    entries: dict[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for (n, k), d in self.entries.items():
            self._check(n, k, d)

    def _check(self, n: int, k: int, d: int) -> None:
        if not 1 <= k <= n:
            raise ValueError(f"bad table key ({n},{k})")
        if n <= 25 and d > classical_bounds(n, k, self.q):
            raise ValueError(f"d({n},{k}) = {d} exceeds the classical bound {classical_bounds(n, k, self.q)}")
        if d < 1:
            raise ValueError("table entries are positive")

    @classmethod
    def load(cls, path: str | Path | None = None, q: int = 2) -> DnkTable:
        path = Path(path) if path is not None else data_path("dnk_table.csv")
        entries = {}
        with open(path, newline="") as fh:
            rows = [r for r in fh if r.strip() and not r.lstrip().startswith("#")]
        for row in csv.DictReader(rows):
            entries[(int(row["n"]), int(row["k"]))] = int(row["d_upper"])
        return cls(q, entries)

    def get(self, n: int, k: int) -> int:
        if (n, k) in self.entries:
            return self.entries[(n, k)]
        return classical_bounds(n, k, self.q)

    def covers(self, n: int) -> bool:
        return all((n, k) in self.entries for k in range(1, n + 1))

    def dump(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "k", "d_upper"])
            for (n, k), d in sorted(self.entries.items()):
                w.writerow([n, k, d])


@lru_cache(maxsize=None)
def default_table(q: int = 2) -> DnkTable:
    if q == 2:
        return DnkTable.load()
    return DnkTable(q)


def dnk_bound(ell: int, k: int, table: DnkTable | None = None) -> int:
    if not 1 <= k <= ell:
        raise ValueError("need 1 <= k <= ell")
    table = table if table is not None else default_table(2)
    return table.get(ell, k)


def lemma2_bound(ell: int, table: DnkTable | None = None) -> float:
    """(1/l) sum_i log_l d(l, l-i)."""
    if ell < 2:
        return 0.0
    table = table if table is not None else default_table(2)
    return sum(math.log2(table.get(ell, ell - i)) for i in range(ell)) / (ell * math.log2(ell))


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchResult:
    ell: int
    q: int
    value: float
    sequence: LpSequence
    lp_calls: int
    nodes: int


class _Searcher:
    def __init__(self, ell: int, q: int, caps: Sequence[int]):
        self.ell, self.q, self.caps = ell, q, list(caps)
        self.cache: dict[tuple[int, ...], bool] = {}
        self.best_product = 0
        self.best: tuple[int, ...] | None = None
        self.lp_calls = 0
        self.nodes = 0

    def feasible_suffix(self, suffix: tuple[int, ...]) -> bool:
        hit = self.cache.get(suffix)
        if hit is None:
            self.lp_calls += 1
            start = self.ell - len(suffix)
            d = [1] * start + list(suffix)
            hit = suffix_feasible(d, self.ell, self.q, start)
            self.cache[suffix] = hit
        return hit

    def optimistic(self, suffix: tuple[int, ...]) -> int:
        start = self.ell - len(suffix)
        top = suffix[0] if suffix else self.ell
        p = math.prod(suffix)
        for j in range(start):
            p *= min(self.caps[j], top)
        return p

    def run(self, suffix: tuple[int, ...] = ()) -> None:
        self.nodes += 1
        pos = self.ell - len(suffix) - 1
        if pos < 0:
            prod = math.prod(suffix)
            if prod > self.best_product:
                self.best_product, self.best = prod, suffix
            return
        top = min(self.caps[pos], suffix[0] if suffix else self.ell)
        for v in range(top, 0, -1):
            cand = (v,) + suffix
            if self.optimistic(cand) <= self.best_product:
                break  # smaller v only lowers the estimate
            if not self.feasible_suffix(cand):
                continue
            self.run(cand)


def _caps(ell: int, q: int, table: DnkTable | None) -> list[int]:
    if table is None:
        table = default_table(q)
    return [table.get(ell, ell - i) for i in range(ell)]


def _search_branch(args: tuple[int, int, list[int], int]) -> tuple[int, tuple[int, ...] | None, int, int]:
    ell, q, caps, last = args
    s = _Searcher(ell, q, caps)
    if s.feasible_suffix((last,)):
        s.run((last,))
    return s.best_product, s.best, s.lp_calls, s.nodes


def search_upper_bound(ell: int, q: int = 2, dnk: DnkTable | None = None, workers: int = 1) -> SearchResult:
    """Largest exponent over LP-valid sequences under the d(n,k) caps.

    Depth-first from the last coordinate downwards, largest values first.
    Branches are cut when the optimistic completion cannot beat the
    incumbent or when the constraints of the levels fixed so far are already
    infeasible.  Ties keep the first sequence met in this order.
    """
    if q == 2 and ell > 25:
        raise ValueError("binary search supported up to ell = 25")
    caps = _caps(ell, q, dnk)
    if workers <= 1:
        s = _Searcher(ell, q, caps)
        s.run()
        best, calls, nodes = s.best, s.lp_calls, s.nodes
    else:
        tops = list(range(caps[-1], 0, -1))
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_search_branch, [(ell, q, caps, t) for t in tops]))
        best, bp = None, 0
        calls = sum(p[2] for p in parts)
        nodes = sum(p[3] for p in parts)
        for prod, seq, _, _ in parts:
            if seq is not None and prod > bp:
                bp, best = prod, seq
    if best is None:
        raise ValueError("no LP-valid sequence under the given caps")
    seq = LpSequence(ell, q, best)
    return SearchResult(ell, q, seq.exponent, seq, calls, nodes)


# ---------------------------------------------------------------------------
# published reference rows
# ---------------------------------------------------------------------------


def _s(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


# ell -> (optimal LP-valid sequence, bound, Lemma 2 bound)
TABLE_I: dict[int, tuple[tuple[int, ...], float, float]] = {
    5: (_s("1,2,2,2,4"), 0.43067, 0.50879),
    6: (_s("1,2,2,2,4,4"), 0.45132, 0.52676),
    7: (_s("1,2,2,2,4,4,4"), 0.45798, 0.52883),
    8: (_s("1,2,2,2,4,4,4,8"), 0.5, 0.51341),
    9: (_s("1,2,2,2,2,4,4,6,6"), 0.46162, 0.50263),
    10: (_s("1,2,2,2,2,4,4,4,6,8"), 0.46915, 0.50614),
    11: (_s("1,2,2,2,2,4,4,4,6,6,8"), 0.47748, 0.51923),
    12: (_s("1,2,2,2,2,4,4,4,6,6,6,12"), 0.49605, 0.52677),
    13: (_s("1,2,2,2,2,4,4,4,6,6,6,8,10"), 0.50049, 0.53184),
    14: (_s("1,2,2,2,2,4,4,4,6,6,6,8,8,8"), 0.50194, 0.54146),
    15: (_s("1,2,2,2,2,4,4,4,6,6,6,8,8,8,8"), 0.50773, 0.54797),
    16: (_s("1,2,2,2,2,4,4,4,6,6,6,8,8,8,8,16"), 0.52742, 0.53245),
    17: (_s("1,1,2,2,2,3,4,4,5,6,6,7,8,8,8,9,16"), 0.50447, 0.52673),
    18: (_s("1,1,2,2,2,3,4,4,5,6,6,7,8,8,8,9,12,12"), 0.50925, 0.53466),
    19: (_s("1,1,2,2,2,3,4,4,5,6,6,7,8,8,8,9,10,12,12"), 0.51475, 0.53934),
    20: (_s("1,1,2,2,2,3,4,4,5,6,6,7,8,8,8,8,10,10,12,16"), 0.52190, 0.54385),
    21: (_s("1,2,2,2,2,2,4,4,4,6,6,6,8,8,8,8,10,10,10,12,18"), 0.52554, 0.54381),
    22: (_s("1,1,2,2,2,3,4,4,4,5,6,6,7,8,8,9,10,10,11,12,12,16"), 0.52317, 0.54454),
    23: (_s("1,1,2,2,2,3,4,4,4,5,6,6,7,8,8,9,10,10,10,11,12,14,16"), 0.52739, 0.54788),
    24: (_s("1,1,2,2,2,3,4,4,4,5,6,6,7,8,8,8,9,10,11,12,12,12,14,20"), 0.53362, 0.54840),
    25: (_s("1,1,2,2,2,3,4,4,4,5,6,6,7,8,8,8,9,10,10,12,12,12,12,15,20"), 0.53633, 0.54935),
}

# small-ell anchors: E_2 and E_3 from the worked examples, E_4 = 0.5
SMALL_ANCHORS: dict[int, float] = {3: 0.42062, 4: 0.5}

# (q, ell) -> (optimal LP-valid sequence, bound)
TABLE_II: dict[tuple[int, int], tuple[tuple[int, ...], float]] = {
    (4, 5): (_s("1,2,2,4,4"), 0.51681),
    (4, 6): (_s("1,2,2,4,4,6"), 0.55351),
    (4, 7): (_s("1,2,2,3,4,5,7"), 0.54521),
    (4, 8): (_s("1,2,2,3,4,5,6,8"), 0.56216),
    (4, 16): (_s("1,2,2,3,4,4,5,6,7,8,9,10,10,12,12,16"), 0.61379),
    (8, 9): (_s("1,2,2,4,5,6,7,8,8"), 0.62091),
    (8, 10): (_s("1,2,2,4,5,6,7,8,8,10"), 0.63325),
    (8, 11): (_s("1,2,2,3,5,6,7,8,8,8,11"), 0.62434),
    (8, 16): (_s("1,2,2,3,4,5,6,7,8,9,10,11,12,13,14,14"), 0.64297),
}
