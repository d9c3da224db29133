from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pkw.bitcode import BitWord, QuaternaryWord, hamming_distance, lee_distance, min_distance_words
from pkw.decomposition import (
    TABLE_III,
    ChainSpec,
    ConstructionError,
    Decomposition,
    Z4Generator,
    build_decomposition_2,
    build_decomposition_shortened,
    build_decomposition_z4,
    chain_exponent_bound,
    code_dimensions_2,
    gray_pack,
    load_coset_groups,
    refine_chain,
    shorten_decomposition,
    validate_decomposition,
)
from pkw.kernel import exponent_value, partial_distances, truncate

DEC1_PROFILE = (1, 2, 2, 2, 2, 4, 4, 4, 6, 6, 6, 8, 8, 8, 8, 16)
DEC2_PROFILE = (1, 2, 2, 2, 2, 4, 4, 4, 4, 6, 6, 8, 8, 8, 8, 16)


@pytest.fixture(scope="module")
def dec2():
    return build_decomposition_2()


@pytest.fixture(scope="module")
def z4_kernel():
    return build_decomposition_z4()


# --- chains ----------------------------------------------------------------------


def test_refine_chain_1():
    assert refine_chain(TABLE_III[1][0]).d == DEC1_PROFILE


def test_refine_single_level_chain():
    c = ChainSpec(7, ((7, 1),))
    assert refine_chain(c).d == (1,) * 7
    assert chain_exponent_bound(c) == 0.0


@pytest.mark.parametrize("key", [1, 2, 3])
def test_chain_exponents(key):
    chain, value = TABLE_III[key]
    assert truncate(chain_exponent_bound(chain)) == value


def test_chain_4_exponent_rounds_to_table_value():
    # the exact value 0.5019399... truncates to 0.50193; the table rounds
    chain, value = TABLE_III[4]
    e = chain_exponent_bound(chain)
    assert round(e, 5) == value
    assert truncate(e) == 0.50193


def test_chain_parse_and_str():
    c = ChainSpec.parse(16, "(16,1)-(15,2)-(11,4)")
    assert c.levels == ((16, 1), (15, 2), (11, 4))
    assert str(c) == "(16,1)-(15,2)-(11,4)"
    assert c.depths == (0, 1, 5)


@pytest.mark.parametrize(
    "levels",
    [((15, 1),), ((16, 1), (16, 2)), ((16, 1), (12, 4), (13, 6)), ((16, 1), (15, 4), (11, 2)), ((16, 1), (8, 9))],
)
def test_chain_invariants(levels):
    with pytest.raises(ValueError):
        ChainSpec(16, levels)


# --- decomposition #1 --------------------------------------------------------------


def test_table6_file_structure():
    ell, groups = load_coset_groups()
    assert ell == 16
    assert sum(g.size for g in groups) == 16


def test_dec1_examples(dec1):
    _, kernel = dec1
    assert kernel(0) == 0
    assert kernel(1) == 0xFFFF  # only input bit 15 set
    assert sorted(kernel.table.tolist()) == list(range(1 << 16))


def test_dec1_profile_and_validation(dec1):
    dec, kernel = dec1
    assert partial_distances(kernel).d == DEC1_PROFILE
    report = validate_decomposition(dec, TABLE_III[1][0])
    assert report.ok, report.failures()


def test_corrupted_level_detected(dec1):
    dec, _ = dec1
    a = dec.level(5).copy()
    # move one word of set 0 into its sibling set 1
    w = int(np.flatnonzero(a == 0)[0])
    a[w] = 1
    report = validate_decomposition(dec.with_level(5, a), TABLE_III[1][0])
    assert not report.ok
    assert any("depth 5" in f for f in report.failures())


def test_swapped_words_break_distance(dec1):
    dec, _ = dec1
    a = dec.level(8).copy()
    x = int(np.flatnonzero(a == 0)[1])
    y = int(np.flatnonzero(a == 1)[0])
    a[x], a[y] = a[y], a[x]
    report = validate_decomposition(dec.with_level(8, a))
    assert report.levels[[l.depth for l in report.levels].index(8)].partition_ok
    assert not validate_decomposition(dec.with_level(8, a), TABLE_III[1][0]).ok


def test_chain_length_mismatch(dec1):
    with pytest.raises(ValueError):
        validate_decomposition(dec1[0], TABLE_III[3][0])


def test_induced_kernel_dominates_chain(dec1):
    dec, kernel = dec1
    d = partial_distances(kernel).d
    assert all(a >= b for a, b in zip(d, refine_chain(TABLE_III[1][0]).d))
    full = Decomposition.from_kernel(kernel)
    assert full.induced_kernel() == kernel


def test_nordstrom_robinson_level(dec1):
    dec, _ = dec1
    nr = dec.code(8, (0,) * 8)
    assert nr.size == 256
    assert min_distance_words(nr.words, 16) == 6


# --- decomposition #2 --------------------------------------------------------------


def test_dec2_nested_codes():
    dims = code_dimensions_2()
    assert dims["single parity check"] == (15, 2)
    assert dims["extended Hamming"] == (11, 4)
    assert dims["extended 2-error BCH"] == (7, 6)
    assert dims["first-order Reed-Muller"] == (5, 8)


def test_dec2_profile(dec2):
    dec, kernel = dec2
    assert partial_distances(kernel).d == DEC2_PROFILE
    report = validate_decomposition(dec, TABLE_III[2][0])
    assert report.ok, report.failures()
    ebch = [l for l in report.levels if l.dimension == 7][0]
    assert ebch.min_distance == 6


# --- Z4 representation --------------------------------------------------------------


def test_gray_digit_map():
    assert gray_pack(np.array([2])) == 0b11
    assert gray_pack(np.array([0, 1, 2, 3])) == 0b00011110


@given(st.lists(st.integers(0, 3), min_size=8, max_size=8), st.lists(st.integers(0, 3), min_size=8, max_size=8))
def test_gray_isometry(x, y):
    a, b = gray_pack(np.array(x)), gray_pack(np.array(y))
    assert hamming_distance(BitWord(16, a), BitWord(16, b)) == lee_distance(QuaternaryWord(tuple(x)), QuaternaryWord(tuple(y)))


def test_gamma_identity():
    g = Z4Generator.load()
    assert g.gamma_identity()
    # the literal orientation does not hold for the listed matrix
    assert not g.gamma_identity_literal()


def test_z4_nordstrom_robinson():
    w = np.unique(Z4Generator.load().z4_span([8, 9, 10, 11]))
    assert w.size == 256
    assert min_distance_words(w, 16) == 6


def test_z4_reed_muller():
    g = Z4Generator.load()
    for w in (g.z4_span([], [11, 12, 13, 14, 15]), g.z4_span([11], [12, 13, 14])):
        w = np.unique(w)
        assert w.size == 32
        assert min_distance_words(w, 16) == 8


def test_z4_kernel_profile(z4_kernel):
    assert partial_distances(z4_kernel).d == DEC1_PROFILE
    dec = Decomposition.from_kernel(z4_kernel, TABLE_III[1][0].depths + (16,))
    assert validate_decomposition(dec, TABLE_III[1][0]).ok


def test_z4_and_xor_kernels_share_coarse_partitions(dec1, z4_kernel):
    _, k1 = dec1
    a, b = k1.inverse(), z4_kernel.inverse()
    for t in (1, 2, 3, 4, 12, 13, 14, 15, 16):
        # same partition of the output space at depth t (labels may differ)
        la, lb = a >> (16 - t), b >> (16 - t)
        pairs = np.unique(la * (1 << t) + lb)
        assert pairs.size == 1 << t


# --- shortened decompositions -------------------------------------------------------


@pytest.mark.slow
@pytest.mark.parametrize("ell,key", [(15, 3), (14, 4)])
def test_shortened(ell, key):
    dec, kernel = build_decomposition_shortened(ell)
    chain, value = TABLE_III[key]
    assert validate_decomposition(dec, chain).ok
    d = partial_distances(kernel).d
    assert d == refine_chain(chain).d
    assert round(exponent_value(d), 5) == value
    nr = dec.code(8, (0,) * 8)
    assert nr.size == 1 << (ell - 8)
    assert min_distance_words(nr.words, ell) >= 6


def test_shortened_rejects_other_lengths():
    with pytest.raises(ValueError):
        build_decomposition_shortened(13)


def test_shortening_needs_all_depths(dec1):
    with pytest.raises(ConstructionError):
        shorten_decomposition(dec1[0], 15)
