"""
Half-split pairing of binary vectors.

A vector of length ``t*N`` (``N`` even) is read as ``t`` segments of length
``N``; each segment splits into a first and a second half.  The box-sum of two
segments is::

    a boxplus b = (a[0] + b[0] + b[1],  a[1] + b[0])

Together with the plain XOR ``a + b`` this pairs two vectors invertibly using
only XORs.  All functions act along axis 0, so a 2-D array is a batch of
column vectors (or a matrix of coefficients, which is how the transformation
builds generator matrices symbolically).
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import LengthMismatch, OddLength, ShapeMismatch, UnknownKind


class Combo(enum.Enum):
    """How a stored combination was built from the unknown ``a`` and a known ``b``."""

    A_BOX_B = "a_box_b"
    B_BOX_A = "b_box_a"
    A_PLUS_B = "a_plus_b"


def segments(x: np.ndarray, n: int) -> np.ndarray:
    """View ``x`` as ``(t, 2, n/2, ...)``: segment, half, position."""
    if n <= 0 or n % 2:
        raise OddLength(f"segment length must be a positive even number, got {n}")
    if x.shape[0] % n:
        raise ShapeMismatch(f"length {x.shape[0]} is not a multiple of segment length {n}")
    return x.reshape((x.shape[0] // n, 2, n // 2) + x.shape[1:])


def _check_pair(a: np.ndarray, b: np.ndarray, n: int) -> None:
    if a.shape != b.shape:
        raise LengthMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    segments(a, n)


def _join(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    t = first.shape[0]
    out = np.stack([first, second], axis=1)
    return out.reshape((t * 2 * first.shape[1],) + first.shape[2:])


def boxplus_segment(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Box-sum of two single segments of equal even length."""
    if a.shape != b.shape:
        raise LengthMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return boxplus(a, b, a.shape[0])


def boxplus(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """Segment-wise box-sum with segment length ``n``."""
    _check_pair(a, b, n)
    sa, sb = segments(a, n), segments(b, n)
    first = sa[:, 0] ^ sb[:, 0] ^ sb[:, 1]
    second = sa[:, 1] ^ sb[:, 0]
    return _join(first, second)


def unpair_sum_box(x: np.ndarray, y: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Recover ``(a, b)`` from ``x = a + b`` and ``y = a boxplus b``.

    Per segment: ``b1 = x0 + y0``, ``a1 = x1 + b1``, ``b0 = y1 + a1``,
    ``a0 = x0 + b0``.
    """
    _check_pair(x, y, n)
    sx, sy = segments(x, n), segments(y, n)
    b1 = sx[:, 0] ^ sy[:, 0]
    a1 = sx[:, 1] ^ b1
    b0 = sy[:, 1] ^ a1
    a0 = sx[:, 0] ^ b0
    return _join(a0, a1), _join(b0, b1)


def cancel_partner(known_b: np.ndarray, combo: np.ndarray, kind: Combo | str,
                   n: int) -> np.ndarray:
    """Strip a known partner ``b`` out of a stored combination, returning ``a``."""
    try:
        kind = Combo(kind)
    except ValueError:
        raise UnknownKind(f"unknown combination kind {kind!r}") from None
    _check_pair(known_b, combo, n)
    if kind is Combo.A_PLUS_B:
        return combo ^ known_b
    sb, sc = segments(known_b, n), segments(combo, n)
    if kind is Combo.A_BOX_B:
        a0 = sc[:, 0] ^ sb[:, 0] ^ sb[:, 1]
        a1 = sc[:, 1] ^ sb[:, 0]
    else:
        # combo = (b0 + a0 + a1, b1 + a0)
        a0 = sc[:, 1] ^ sb[:, 1]
        a1 = sc[:, 0] ^ sb[:, 0] ^ a0
    return _join(a0, a1)


def masked_unpair(sx: np.ndarray, sy: np.ndarray,
                  s_half: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Recover ``(S a, S b)`` from ``S (a + b)`` and ``S (a boxplus b)`` for one segment.

    ``S = diag(s_half, s_half)`` acts identically on both halves, so the
    unpairing formulas carry over verbatim to the masked halves.  ``sx`` and
    ``sy`` have length ``2 * s_half.shape[0]``.
    """
    rows, cols = s_half.shape
    if sx.shape != sy.shape or sx.shape[0] != 2 * rows:
        raise ShapeMismatch(
            f"masked inputs {sx.shape}, {sy.shape} do not match a mask with {rows} rows")
    if rows == 0:
        return sx.copy(), sy.copy()
    return unpair_sum_box(sx, sy, 2 * rows)


def masked_unpair_segments(sx: np.ndarray, sy: np.ndarray, halves: list[np.ndarray],
                           n: int) -> tuple[np.ndarray, np.ndarray]:
    """``masked_unpair`` applied segment by segment with one half-block per segment.

    ``sx`` and ``sy`` are full-length products with the square paired
    block-diagonal matrix built from ``halves``.
    """
    if len(halves) * n != sx.shape[0]:
        raise ShapeMismatch(f"{len(halves)} half-blocks do not cover length {sx.shape[0]}")
    sa = np.empty_like(sx)
    sb = np.empty_like(sy)
    for m, half in enumerate(halves):
        sl = slice(m * n, (m + 1) * n)
        sa[sl], sb[sl] = masked_unpair(sx[sl], sy[sl], half)
    return sa, sb


def cross_pair(h_tl: np.ndarray, h_lt: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Spread two vectors over a pair so that pairing them back gives the originals.

    For indices ``t > l`` with ``h_tl = h_t^(l)`` and ``h_lt = h_l^(t)``
    returns ``(v_t^(l), v_l^(t))`` where per segment::

        v_t^(l) = (h_tl0 + h_tl1 + h_lt0 + h_lt1,  h_tl0 + h_lt0)
        v_l^(t) = (h_lt0 + h_lt1 + h_tl1,          h_tl0 + h_tl1 + h_lt0)

    so that ``v_t + v_l == h_tl`` and ``v_l boxplus v_t == h_lt``.
    """
    _check_pair(h_tl, h_lt, n)
    ht, hl = segments(h_tl, n), segments(h_lt, n)
    vt = _join(ht[:, 0] ^ ht[:, 1] ^ hl[:, 0] ^ hl[:, 1], ht[:, 0] ^ hl[:, 0])
    vl = _join(hl[:, 0] ^ hl[:, 1] ^ ht[:, 1], ht[:, 0] ^ ht[:, 1] ^ hl[:, 0])
    return vt, vl
