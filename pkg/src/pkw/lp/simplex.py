"""Exact phase-1 simplex over the rationals.

Each tableau row is stored as a list of integers plus one positive integer
denominator, reduced by the row gcd after every update.  Rows whose entry in
the pivot column is zero are left untouched, which keeps the sparse
distance-distribution programs cheap.  Pricing is Dantzig's largest
coefficient rule; after a run of degenerate pivots the solver switches to
Bland's rule for good, so termination is guaranteed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Sequence


@dataclass(frozen=True)
class Constraint:
    """A linear constraint ``sum(coef * x[var]) <sense> rhs``; sense is ``==``, ``>=`` or ``<=``."""

    coefs: dict[int, Fraction | int]
    sense: str
    rhs: Fraction | int


@dataclass(frozen=True)
class Phase1Result:
    feasible: bool
    point: tuple[Fraction, ...] | None
    infeasibility: Fraction  # optimal phase-1 objective, 0 when feasible
    pivots: int


class SimplexError(RuntimeError):
    pass


def _integer_row(coefs: dict[int, Fraction | int], rhs: Fraction | int, nvars: int) -> tuple[list[int], int]:
    vals = {j: Fraction(v) for j, v in coefs.items()}
    r = Fraction(rhs)
    den = r.denominator
    for v in vals.values():
        den = lcm(den, v.denominator)
    row = [0] * nvars
    for j, v in vals.items():
        row[j] = v.numerator * (den // v.denominator)
    return row, r.numerator * (den // r.denominator)


def phase1(
    nvars: int,
    constraints: Sequence[Constraint],
    bland_after: int = 200,
    max_pivots: int = 1_000_000,
) -> Phase1Result:
    """Decide whether ``{x >= 0 : constraints}`` is non-empty.

    Returns a rational feasible point when one exists, otherwise the optimal
    (strictly positive) phase-1 objective, i.e. the minimum total violation.
    """
    rows: list[list[int]] = []
    rhs: list[int] = []
    slack_of_row: list[int | None] = []
    nslack = sum(1 for c in constraints if c.sense != "==")
    ncols = nvars + nslack
    s = nvars
    for c in constraints:
        row, b = _integer_row(c.coefs, c.rhs, nvars)
        row.extend([0] * nslack)
        slack = None
        if c.sense == ">=":
            row[s] = -1
            slack = s
            s += 1
        elif c.sense == "<=":
            row[s] = 1
            slack = s
            s += 1
        elif c.sense != "==":
            raise ValueError(f"unknown constraint sense {c.sense!r}")
        if b < 0:
            row = [-a for a in row]
            b = -b
        rows.append(row)
        rhs.append(b)
        slack_of_row.append(slack if slack is not None and row[slack] == 1 else None)

    m = len(rows)
    # Rows whose slack enters with +1 start with the slack basic; the others
    # get an artificial variable (indices >= ncols).
    basis: list[int] = []
    artificial: set[int] = set()
    art = ncols
    for i in range(m):
        if slack_of_row[i] is not None:
            basis.append(slack_of_row[i])
        else:
            basis.append(art)
            artificial.add(art)
            art += 1
    in_basis = set(basis)
    nonbasic = [j for j in range(ncols) if j not in in_basis]

    # Dictionary form: x_basis[i] = (T[i][-1] - sum_k T[i][k] x_nonbasic[k]) / den[i]
    # and the phase-1 objective w = (obj[-1] - sum_k obj[k] x_nonbasic[k]) / obj_den.
    T = [[rows[i][j] for j in nonbasic] + [rhs[i]] for i in range(m)]
    den = [1] * m
    obj = [0] * (len(nonbasic) + 1)
    for i in range(m):
        if basis[i] in artificial:
            obj = [a + b for a, b in zip(obj, T[i])]
    obj_den = 1

    pivots = 0
    degenerate_run = 0
    use_bland = False
    while True:
        enter = _choose_entering(obj, nonbasic, use_bland)
        if enter is None:
            break
        leave = _ratio_test(T, basis, enter)
        if leave is None:
            raise SimplexError("phase-1 objective unbounded below")
        if T[leave][-1] == 0:
            degenerate_run += 1
            if degenerate_run >= bland_after:
                use_bland = True
        else:
            degenerate_run = 0
        obj, obj_den = _pivot(T, den, obj, obj_den, leave, enter)
        basis[leave], nonbasic[enter] = nonbasic[enter], basis[leave]
        pivots += 1
        if pivots > max_pivots:
            raise SimplexError("pivot limit exceeded")
        if nonbasic[enter] in artificial:
            # an artificial that left the basis never needs to come back
            del nonbasic[enter]
            for row in T:
                del row[enter]
            del obj[enter]

    w = Fraction(obj[-1], obj_den)
    if w > 0:
        return Phase1Result(False, None, w, pivots)
    point = [Fraction(0)] * nvars
    for i, j in enumerate(basis):
        if j < nvars:
            point[j] = Fraction(T[i][-1], den[i])
    return Phase1Result(True, tuple(point), Fraction(0), pivots)


def _choose_entering(obj: list[int], nonbasic: list[int], use_bland: bool) -> int | None:
    best = None
    for k in range(len(nonbasic)):
        if obj[k] > 0:
            if best is None:
                best = k
            elif use_bland:
                if nonbasic[k] < nonbasic[best]:
                    best = k
            elif obj[k] > obj[best]:
                best = k
    return best


def _ratio_test(T: list[list[int]], basis: list[int], c: int) -> int | None:
    # Minimum rhs/a over a > 0; ties go to the smallest basic variable index.
    leave = None
    for i, row in enumerate(T):
        a = row[c]
        if a <= 0:
            continue
        if leave is None:
            leave = i
            continue
        lrow = T[leave]
        lhs = row[-1] * lrow[c]
        rhs = lrow[-1] * a
        if lhs < rhs or (lhs == rhs and basis[i] < basis[leave]):
            leave = i
    return leave


def _normalise(row: list[int], d: int) -> tuple[list[int], int]:
    g = gcd(d, *row)
    if d < 0:
        g = -g
    if g != 1:
        row = [a // g for a in row]
        d //= g
    return row, d


def _pivot(
    T: list[list[int]], den: list[int], obj: list[int], obj_den: int, r: int, c: int
) -> tuple[list[int], int]:
    prow = T[r]
    p = prow[c]
    dr = den[r]
    for i, row in enumerate(T):
        if i == r:
            continue
        f = row[c]
        if not f:
            continue
        new = [a * p - f * b for a, b in zip(row, prow)]
        new[c] = -f * dr
        T[i], den[i] = _normalise(new, den[i] * p)
    f = obj[c]
    if f:
        new = [a * p - f * b for a, b in zip(obj, prow)]
        new[c] = -f * dr
        obj, obj_den = _normalise(new, obj_den * p)
    new = list(prow)
    new[c] = dr
    T[r], den[r] = _normalise(new, p)
    return obj, obj_den
