import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repairforge import gf2
from repairforge.errors import NoSolution, OddLength, PairedBlockMismatch, SingularSystem


def brute_rank(m):
    """Rank as log2 of the number of distinct vectors in the row space."""
    m = np.asarray(m, dtype=np.uint8)
    seen = set()
    for coeffs in itertools.product((0, 1), repeat=m.shape[0]):
        v = np.zeros(m.shape[1], dtype=np.uint8)
        for c, row in zip(coeffs, m):
            if c:
                v ^= row
        seen.add(v.tobytes())
    return len(seen).bit_length() - 1


def test_rank_examples():
    assert gf2.rank(gf2.identity(4)) == 4
    assert gf2.rank(gf2.zeros(3, 5)) == 0
    assert gf2.rank(np.array([[1, 1], [1, 1]])) == brute_rank([[1, 1], [1, 1]]) == 1


def test_rank_matches_enumeration():
    rng = np.random.default_rng(1)
    for _ in range(60):
        rows, cols = rng.integers(1, 7, size=2)
        m = rng.integers(0, 2, size=(rows, cols), dtype=np.uint8)
        assert gf2.rank(m) == brute_rank(m)


def test_rank_wide_matrices_cross_word_boundary():
    rng = np.random.default_rng(2)
    m = rng.integers(0, 2, size=(70, 150), dtype=np.uint8)
    m[40:] = m[:30] ^ m[10:40]
    assert gf2.rank(m) == 40


def test_zero_dimension_matrices():
    assert gf2.rank(gf2.zeros(0, 4)) == 0
    assert gf2.rank(gf2.zeros(4, 0)) == 0
    assert gf2.solve(gf2.zeros(3, 0), np.zeros(3, dtype=np.uint8)).shape == (0,)
    with pytest.raises(NoSolution):
        gf2.solve(gf2.zeros(2, 0), np.array([1, 0]))
    assert gf2.matmul(gf2.zeros(2, 0), gf2.zeros(0, 3)).shape == (2, 3)


def test_solve_identity_and_zero():
    y = np.array([1, 0, 1], dtype=np.uint8)
    assert np.array_equal(gf2.solve(gf2.identity(3), y), y)
    with pytest.raises(NoSolution):
        gf2.solve(gf2.zeros(2, 2), np.array([0, 1]))


def test_solve_random_invertible_round_trip():
    rng = np.random.default_rng(3)
    m = gf2.random_invertible(8, rng)
    assert gf2.rank(m) == 8
    xs = rng.integers(0, 2, size=(8, 1000), dtype=np.uint8)
    ys = gf2.matmul(m, xs)
    assert np.array_equal(gf2.solve(m, ys), xs)
    x = xs[:, 0]
    assert np.array_equal(gf2.solve(m, gf2.matmul(m, x)), x)


def test_solve_underdetermined_returns_a_solution():
    rng = np.random.default_rng(4)
    m = rng.integers(0, 2, size=(5, 9), dtype=np.uint8)
    y = gf2.matmul(m, rng.integers(0, 2, size=9, dtype=np.uint8))
    x = gf2.solve(m, y)
    assert np.array_equal(gf2.matmul(m, x), y)


def test_inverse():
    rng = np.random.default_rng(5)
    for n in (1, 5, 17, 70):
        m = gf2.random_invertible(n, rng)
        inv = gf2.inverse(m)
        assert np.array_equal(gf2.matmul(m, inv), gf2.identity(n))
        assert np.array_equal(gf2.matmul(inv, m), gf2.identity(n))
    with pytest.raises(SingularSystem):
        gf2.inverse(np.array([[1, 1], [1, 1]]))


@given(st.integers(0, 2**31 - 1), st.integers(1, 40))
@settings(max_examples=50, deadline=None)
def test_xor_group_laws(seed, length):
    rng = np.random.default_rng(seed)
    a, b, c = rng.integers(0, 2, size=(3, length), dtype=np.uint8)
    zero = gf2.zeros(length)
    assert np.array_equal(gf2.xor(gf2.xor(a, b), c), gf2.xor(a, gf2.xor(b, c)))
    assert np.array_equal(gf2.xor(a, a), zero)
    assert np.array_equal(gf2.xor(a, zero), a)
    assert np.array_equal(gf2.xor(a, b), gf2.xor(b, a))


def test_detect_paired_blocks_identity():
    blocks = gf2.detect_paired_blocks(gf2.identity(8), 4, 2)
    assert len(blocks) == 2
    for b in blocks:
        assert np.array_equal(b, gf2.identity(2))


def test_detect_paired_blocks_mdr_selector():
    # J_0 = {a : a_1 = 0} over 3-bit indices
    rows = [a for a in range(8) if not (a >> 1) & 1]
    assert rows == [0, 1, 4, 5]
    sel = gf2.row_selector(rows, 8)
    (block,) = gf2.detect_paired_blocks(sel, 8, 1)
    assert np.array_equal(block, gf2.row_selector([0, 1], 4))


def test_detect_paired_blocks_mismatch_located():
    s = gf2.paired_block_matrix([gf2.identity(2)])
    s[3, 3] = 0
    with pytest.raises(PairedBlockMismatch) as info:
        gf2.detect_paired_blocks(s, 4, 1)
    assert (info.value.row, info.value.col) == (3, 3)
    off = gf2.identity(4)
    off[0, 3] = 1
    with pytest.raises(PairedBlockMismatch) as info:
        gf2.detect_paired_blocks(off, 4, 1)
    assert (info.value.row, info.value.col) == (0, 3)
    with pytest.raises(OddLength):
        gf2.detect_paired_blocks(gf2.identity(3), 3, 1)


def test_zero_blocks_are_legal():
    s = gf2.paired_block_matrix([gf2.zeros(1, 1), gf2.identity(1)])
    blocks = gf2.detect_paired_blocks(s, 2, 2)
    assert blocks[0].sum() == 0 and blocks[1].sum() == 1


@given(st.integers(0, 2**31 - 1), st.sampled_from([2, 4, 6]), st.integers(1, 4))
@settings(max_examples=60, deadline=None)
def test_detect_paired_blocks_round_trip(seed, n, delta):
    rng = np.random.default_rng(seed)
    blocks = [rng.integers(0, 2, size=(n // 2, n // 2), dtype=np.uint8) for _ in range(delta)]
    s = gf2.paired_block_matrix(blocks)
    found = gf2.detect_paired_blocks(s, n, delta)
    assert np.array_equal(gf2.paired_block_matrix(found), s)
