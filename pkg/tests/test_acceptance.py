"""Acceptance criteria, one test each.

Every test records a single ``CRITERION n: PASS|FAIL`` line (shown inline and
in the terminal summary) listing each sub-check, then asserts that all of them
held.  Rows that only match after rounding are reported as failures.
"""

from __future__ import annotations

import itertools
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES

from pkw.bitcode import BinaryMatrix, min_distance_words, span_words
from pkw.cli import main
from pkw.decomposition import TABLE_III, Z4Generator, build_decomposition_z4, refine_chain
from pkw.kernel import (
    KernelTable,
    arikan_kernel,
    exponent_value,
    kernel_from_matrix,
    normalize_profile,
    partial_distances,
    random_kernel,
    truncate,
)
from pkw.lp.bound import SMALL_ANCHORS, TABLE_I, LpSequence, lp_feasible, search_upper_bound, verify_point
from pkw.sim import Channel, PolarCode, estimate_channels, polar_transform, sc_decode
from pkw.workshop import TABLE_IV, last_one_row, lemma3_violations, run_recipe, shorten


def report(capsys, n, checks, started):
    ok = all(v for _, v in checks)
    failed = [name for name, v in checks if not v]
    detail = "all sub-checks hold" if ok else "failed: " + "; ".join(failed)
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} ({len(checks)} checks, {time.perf_counter() - started:.1f}s) {detail}"
    ACCEPTANCE_LINES.append(line)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def all_inputs(n):
    return np.array(list(itertools.product([0, 1], repeat=n)), dtype=np.uint8)


def test_criterion_1_exponents(capsys):
    t0 = time.perf_counter()
    checks = [("exponent((1,2)) == 0.5", exponent_value((1, 2)) == 0.5)]
    for key in (1, 2, 3, 4):
        chain, paper = TABLE_III[key]
        got = truncate(exponent_value(refine_chain(chain).d))
        checks.append((f"Table III #{key}: {got} vs {paper}", got == paper))
    report(capsys, 1, checks, t0)


def test_criterion_2_decomposition_1(capsys, dec1):
    t0 = time.perf_counter()
    _, kernel = dec1
    bij = np.unique(kernel.table).size == 1 << 16 and kernel.table.min() == 0 and kernel.table.max() == (1 << 16) - 1
    d = partial_distances(kernel).d
    checks = [
        ("bijective on 65536 inputs", bool(bij)),
        (f"profile {d}", d == (1, 2, 2, 2, 2, 4, 4, 4, 6, 6, 6, 8, 8, 8, 8, 16)),
    ]
    report(capsys, 2, checks, t0)


def test_criterion_3_z4(capsys, dec1):
    t0 = time.perf_counter()
    _, k1 = dec1
    kz = build_decomposition_z4()
    same = bool(np.array_equal(k1.table, kz.table))
    g = Z4Generator.load()
    nr = np.unique(g.z4_span([8, 9, 10, 11]))
    checks = [
        (f"Z4 table identical to coset table ({int((k1.table != kz.table).sum())} entries differ)", same),
        ("gamma_i = 2 gamma_(i+4), rows 8..11 as written", g.gamma_identity_literal()),
        ("gamma_(i+4) = 2 gamma_i, rows 8..11 (reverse orientation)", g.gamma_identity()),
        (f"NR image: {nr.size} words", nr.size == 256),
        (f"NR image: min distance {min_distance_words(nr, 16)}", min_distance_words(nr, 16) == 6),
        ("Z4 kernel profile equals the coset kernel profile", partial_distances(kz).d == partial_distances(k1).d),
    ]
    report(capsys, 3, checks, t0)


def test_criterion_4_lp(capsys):
    t0 = time.perf_counter()
    checks = []
    for ell, d, want in [(3, (1, 2, 3), False), (3, (1, 2, 2), True), (4, (1, 2, 3, 3), False), (4, (1, 2, 2, 4), True)]:
        v = lp_feasible(LpSequence(ell, 2, d))
        good = v.feasible is want and (not want or verify_point(v.sequence, v.point))
        checks.append((f"{d} {'feasible' if want else 'infeasible'}", good))
    paper = {3: SMALL_ANCHORS[3], 4: SMALL_ANCHORS[4], **{ell: TABLE_I[ell][1] for ell in (5, 6, 7, 8)}}
    for ell in range(3, 9):
        got = truncate(search_upper_bound(ell).value)
        checks.append((f"search l={ell}: {got} vs {paper[ell]}", got == paper[ell]))
    for ell in (2, 3, 4):
        seq = search_upper_bound(ell, q=4).sequence.d
        checks.append((f"q=4 l={ell}: {seq}", seq == tuple(range(1, ell + 1))))
    report(capsys, 4, checks, t0)


def test_criterion_5_lp_verify(capsys):
    t0 = time.perf_counter()
    checks = []
    for ell in range(9, 17):
        seq = TABLE_I[ell][0]
        v = lp_feasible(LpSequence(ell, 2, seq))
        checks.append((f"l={ell} sequence feasible", v.feasible and verify_point(v.sequence, v.point)))
    got = truncate(exponent_value(TABLE_I[16][0]))
    checks.append((f"l=16 bound {got}", got == 0.52742))
    report(capsys, 5, checks, t0)


@pytest.mark.slow
def test_criterion_6_proposition_3(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    # LP validity is defined for non-decreasing sequences, so each kernel is
    # first brought to monotone form by adjacent coordinate swaps
    profiles: dict[int, set[tuple[int, ...]]] = {3: set()}
    for perm in itertools.permutations(range(8)):
        profiles[3].add(partial_distances(normalize_profile(KernelTable(3, np.array(perm)))).d)
    for ell in (4, 5, 6):
        profiles[ell] = {partial_distances(normalize_profile(random_kernel(ell, rng))).d for _ in range(1000)}
    checks = []
    for ell, ps in profiles.items():
        bad = [d for d in sorted(ps) if not lp_feasible(LpSequence(ell, 2, d)).feasible]
        checks.append((f"l={ell}: {len(ps)} distinct profiles, infeasible {bad}", not bad))
    report(capsys, 6, checks, t0)


def brute_force_profile(m: BinaryMatrix) -> tuple[int, ...]:
    # every codeword of the span; index bit i selects row i
    w = np.bitwise_count(span_words(list(m.rows)).astype(np.uint64))
    return tuple(int(w[1 << i :: 2 << i].min()) for i in range(m.nrows))


@pytest.mark.slow
def test_criterion_7_constructions(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    violations = 0
    for _ in range(60):
        while True:
            m = BinaryMatrix(tuple(int(x) for x in rng.integers(0, 64, size=6)), 6)
            if m.rank == 6:
                break
        col = int(rng.integers(6))
        row = last_one_row(m, col)
        before = partial_distances(kernel_from_matrix(m)).d
        after = partial_distances(kernel_from_matrix(shorten(m, row, col))).d
        violations += len(lemma3_violations(before, after, row))
    checks = [(f"shortening relations on 60 random 6x6 matrices: {violations} violations", violations == 0)]
    for ell in (18, 19, 21, 22, 23, 24, 25):
        recipe, paper = TABLE_IV[ell]
        res = run_recipe(recipe)
        brute = brute_force_profile(res.matrix)
        got = truncate(exponent_value(brute))
        checks.append((f"l={ell}: brute-force profile matches target", brute == recipe.target == res.profile.d))
        checks.append((f"l={ell}: {got} vs {paper}", got == paper))
    report(capsys, 7, checks, t0)


@pytest.mark.slow
def test_criterion_8_simulator(capsys, dec1):
    t0 = time.perf_counter()
    checks = []
    est = estimate_channels(PolarCode(arikan_kernel(), 3), Channel.parse("bec:0.5"))
    oracle = []
    for i in range(8):
        z = 0.5
        for s in format(i, "03b"):
            z = z * z if s == "1" else 2 * z - z * z
        oracle.append(z)
    err = max(abs(e.bhattacharyya - o) for e, o in zip(est, oracle))
    checks.append((f"Arikan m=3 recursion, max error {err:.1e}", err <= 1e-12))

    example1 = kernel_from_matrix(BinaryMatrix.from_strings(["1000", "1100", "1010", "1111"]))
    matrix = [(arikan_kernel(), m, 0.5) for m in (1, 2, 3, 4, 5)]
    matrix += [(example1, 2, 0.3), (random_kernel(4, np.random.default_rng(1)), 1, 0.5), (dec1[1], 1, 0.5)]
    for kernel, m, eps in matrix:
        e = estimate_channels(PolarCode(kernel, m), Channel.parse(f"bec:{eps}"))
        gap = abs(sum(x.capacity for x in e) - kernel.ell**m * (1 - eps))
        checks.append((f"capacity conservation l={kernel.ell} m={m}: gap {gap:.1e}", gap <= 1e-9))

    for kernel, m in [(arikan_kernel(), 4), (example1, 2), (random_kernel(4, np.random.default_rng(2)), 2), (dec1[1], 1)]:
        code = PolarCode(kernel, m)
        u = all_inputs(code.length)
        ok = bool((sc_decode(code, polar_transform(kernel, m, u), Channel.parse("bsc:0")) == u).all())
        checks.append((f"noiseless round trip l={kernel.ell} m={m} ({len(u)} inputs)", ok))

    ch = Channel.parse("bec:0.5")
    z1 = np.array([e.bhattacharyya for e in estimate_channels(PolarCode(dec1[1], 1), ch)])
    z2 = np.array([e.bhattacharyya for e in estimate_channels(PolarCode(dec1[1], 2), ch, trials=256, seed=8)])
    f1, f2 = float((z1 < 0.01).mean()), float((z2 < 0.01).mean())
    checks.append((f"polarization trend: fraction of Z<0.01 {f1:.3f} -> {f2:.3f}", f2 > f1))
    report(capsys, 8, checks, t0)


@pytest.mark.slow
def test_criterion_9_tables(capsys):
    t0 = time.perf_counter()
    checks = []
    for tid in ("I-small", "I-verify", "III", "IV"):
        code = main(["tables", tid])
        out = capsys.readouterr().out
        mism = out.strip().splitlines()[-1]
        checks.append((f"tables {tid} exit {code} ({mism})", code == 0))
    report(capsys, 9, checks, t0)
