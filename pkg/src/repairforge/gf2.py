"""
Dense GF(2) linear algebra.

Vectors and matrices are numpy ``uint8`` arrays holding 0/1.  Elimination
packs rows into little-endian 64-bit words so row operations are word-wide
XORs; callers never see the packed form.

A "vector" may also be a 2-D array whose columns are independent vectors
(a batch).  Every routine here treats axis 0 as the symbol axis.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import NoSolution, OddLength, PairedBlockMismatch, ShapeMismatch, SingularSystem

_WORD = 64


def as_bits(x) -> np.ndarray:
    """Coerce anything array-like to a uint8 array of 0/1 values."""
    return (np.asarray(x) & 1).astype(np.uint8)


def zeros(*shape: int) -> np.ndarray:
    return np.zeros(shape, dtype=np.uint8)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.uint8)


def xor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape != b.shape:
        raise ShapeMismatch(f"cannot add shapes {a.shape} and {b.shape}")
    return np.bitwise_xor(a, b)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product over GF(2).

    Uses float32 BLAS, which is exact while the inner dimension stays below 2**24.
    """
    if a.shape[-1] != b.shape[0]:
        raise ShapeMismatch(f"cannot multiply {a.shape} by {b.shape}")
    if a.size == 0 or b.size == 0:
        return np.zeros(a.shape[:-1] + b.shape[1:], dtype=np.uint8)
    prod = a.astype(np.float32) @ b.astype(np.float32)
    return (prod.astype(np.int64) & 1).astype(np.uint8)


def block_diag(*blocks: np.ndarray) -> np.ndarray:
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols), dtype=np.uint8)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def row_selector(rows: Sequence[int], size: int) -> np.ndarray:
    """Square diagonal 0/1 matrix keeping only the listed coordinates."""
    s = np.zeros((size, size), dtype=np.uint8)
    idx = np.asarray(list(rows), dtype=np.int64)
    s[idx, idx] = 1
    return s


def nonzero_columns(m: np.ndarray) -> np.ndarray:
    """Indices of columns that contain a 1, i.e. the coordinates a matrix reads."""
    return np.flatnonzero(m.any(axis=0))


# -- packed elimination -----------------------------------------------------

def _pack_rows(m: np.ndarray) -> np.ndarray:
    rows, cols = m.shape
    nwords = max(1, -(-cols // _WORD))
    buf = np.zeros((rows, nwords * 8), dtype=np.uint8)
    if cols:
        packed = np.packbits(m, axis=1, bitorder="little")
        buf[:, :packed.shape[1]] = packed
    return buf.view("<u8")


def _unpack_rows(p: np.ndarray, cols: int) -> np.ndarray:
    as_bytes = np.ascontiguousarray(p).view(np.uint8)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :cols]


def _rref_packed(p: np.ndarray, pivot_cols: int) -> tuple[np.ndarray, list[int]]:
    """Gauss-Jordan on packed rows; pivots are searched in the first ``pivot_cols`` columns."""
    p = p.copy()
    nrows = p.shape[0]
    pivots: list[int] = []
    r = 0
    one = np.uint64(1)
    for c in range(pivot_cols):
        if r == nrows:
            break
        w, b = divmod(c, _WORD)
        shift = np.uint64(b)
        col = (p[:, w] >> shift) & one
        nz = np.flatnonzero(col[r:])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            p[[r, piv]] = p[[piv, r]]
            col[[r, piv]] = col[[piv, r]]
        hits = np.flatnonzero(col)
        hits = hits[hits != r]
        if hits.size:
            p[hits] ^= p[r]
        pivots.append(c)
        r += 1
    return p, pivots


def rref(m: np.ndarray, pivot_cols: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2) and the list of pivot columns."""
    m = as_bits(m)
    if m.ndim != 2:
        raise ShapeMismatch("rref expects a matrix")
    if pivot_cols is None:
        pivot_cols = m.shape[1]
    if m.shape[0] == 0:
        return m.copy(), []
    p, pivots = _rref_packed(_pack_rows(m), pivot_cols)
    return _unpack_rows(p, m.shape[1]), pivots


def rank(m: np.ndarray) -> int:
    m = np.asarray(m)
    if m.ndim != 2 or 0 in m.shape:
        return 0
    _, pivots = _rref_packed(_pack_rows(as_bits(m)), m.shape[1])
    return len(pivots)


def solve(m: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Return some ``x`` with ``m @ x == y`` over GF(2).

    ``y`` may be a vector or a matrix of right-hand sides.  Free variables are
    set to zero, so the answer is unique exactly when ``m`` has full column rank.
    Raises NoSolution when the system is inconsistent.
    """
    m = as_bits(m)
    y = as_bits(y)
    vector = y.ndim == 1
    if vector:
        y = y[:, None]
    if m.shape[0] != y.shape[0]:
        raise ShapeMismatch(f"matrix has {m.shape[0]} rows but right side has {y.shape[0]}")
    cols = m.shape[1]
    x = np.zeros((cols, y.shape[1]), dtype=np.uint8)
    if m.shape[0]:
        red, pivots = rref(np.hstack([m, y]), pivot_cols=cols)
        if red[len(pivots):, cols:].any():
            raise NoSolution("inconsistent GF(2) system")
        x[pivots] = red[:len(pivots), cols:]
    return x[:, 0] if vector else x


def inverse(m: np.ndarray) -> np.ndarray:
    m = as_bits(m)
    n = m.shape[0]
    if m.ndim != 2 or m.shape[1] != n:
        raise ShapeMismatch(f"cannot invert non-square shape {m.shape}")
    if n == 0:
        return m.copy()
    red, pivots = rref(np.hstack([m, identity(n)]), pivot_cols=n)
    if len(pivots) != n:
        raise SingularSystem(f"matrix of order {n} has rank {len(pivots)}")
    return red[:, n:]


def random_invertible(n: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        m = rng.integers(0, 2, size=(n, n), dtype=np.uint8)
        if rank(m) == n:
            return m


# -- paired block-diagonal form ---------------------------------------------

def paired_block_matrix(blocks: Sequence[np.ndarray]) -> np.ndarray:
    """``diag(B0, B0, B1, B1, ...)``: every block repeated twice in a row."""
    doubled = [b for blk in blocks for b in (blk, blk)]
    return block_diag(*doubled) if doubled else zeros(0, 0)


def detect_paired_blocks(s: np.ndarray, n: int, delta: int) -> list[np.ndarray]:
    """Split ``s`` into the half-blocks of the paired block-diagonal form.

    ``s`` must be ``(delta*n) x (delta*n)`` and equal
    ``diag(S_0, S_0, S_1, S_1, ..., S_{delta-1}, S_{delta-1})`` with each
    ``S_m`` of order ``n/2``.  Zero blocks are allowed.  Raises
    PairedBlockMismatch naming the first offending entry otherwise.
    """
    if n % 2:
        raise OddLength(f"segment length {n} is odd")
    size = delta * n
    s = as_bits(s)
    if s.shape != (size, size):
        raise ShapeMismatch(f"expected a {size}x{size} matrix, got {s.shape}")
    half = n // 2
    blocks = [s[m * n:m * n + half, m * n:m * n + half].copy() for m in range(delta)]
    diff = np.argwhere(s != paired_block_matrix(blocks))
    if diff.size:
        row, col = (int(v) for v in diff[0])
        raise PairedBlockMismatch(
            f"entry ({row}, {col}) breaks the paired block-diagonal form", row, col)
    return blocks
