"""
Systematic binary codes.

A code with ``k`` systematic and ``r = n - k`` parity nodes is described by
an ``r x k`` grid of ``alpha x alpha`` coding matrices: parity ``i`` stores
``sum_j A[i, j] @ f_j``.  Node ``j < k`` stores slice ``j`` of the message.
Messages are laid out node-major: symbol ``s`` of node ``j`` is message
index ``j * alpha + s``.

Each node carries a repair strategy describing what a failed copy of it
downloads from the survivors.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from . import gf2
from .errors import (
    FieldTooSmall, LengthMismatch, NoSolution, NotPrime, ShapeMismatch, SingularSystem,
    StrategyIncomplete,
)
from .report import HelperUsage, RepairReport


# -- repair strategies ------------------------------------------------------

@dataclass(frozen=True)
class Naive:
    """Repair by reconstructing the whole message from ``k`` survivors."""


@dataclass(frozen=True)
class RowSelect:
    """Every survivor sends the same coordinates ``rows`` of its payload."""

    rows: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(sorted(int(x) for x in self.rows)))


@dataclass(frozen=True, eq=False)
class Matrices:
    """Survivor ``j`` sends ``mats[j] @ f_j``; each matrix is ``alpha x alpha``."""

    mats: Mapping[int, np.ndarray]

    def __eq__(self, other):
        if not isinstance(other, Matrices) or set(self.mats) != set(other.mats):
            return NotImplemented if not isinstance(other, Matrices) else False
        return all(np.array_equal(self.mats[j], other.mats[j]) for j in self.mats)

    __hash__ = None


RepairStrategy = Union[Naive, RowSelect, Matrices]


def strategy_matrix(strategy: RepairStrategy, helper: int, alpha: int) -> np.ndarray:
    """The ``alpha x alpha`` repair matrix a strategy applies at ``helper``."""
    if isinstance(strategy, RowSelect):
        return gf2.row_selector(strategy.rows, alpha)
    if isinstance(strategy, Matrices):
        return strategy.mats[helper]
    raise TypeError("naive repair has no repair matrices")


def simplify_strategy(mats: Mapping[int, np.ndarray]) -> RepairStrategy:
    """Collapse a matrix family to RowSelect when every helper gets one diagonal selector."""
    mats = dict(mats)
    first = next(iter(mats.values()))
    same = all(np.array_equal(m, first) for m in mats.values())
    if same and not (first ^ np.diag(np.diag(first))).any():
        return RowSelect(tuple(np.flatnonzero(np.diag(first))))
    return Matrices(mats)


# -- the code model ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SystematicCodeSpec:
    n: int
    k: int
    alpha: int
    coding: np.ndarray
    repair: tuple
    name: str = ""
    meta: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if not 0 < self.k < self.n:
            raise ShapeMismatch(f"need 0 < k < n, got n={self.n}, k={self.k}")
        coding = gf2.as_bits(self.coding)
        expected = (self.n - self.k, self.k, self.alpha, self.alpha)
        if coding.shape != expected:
            raise ShapeMismatch(f"coding matrices have shape {coding.shape}, expected {expected}")
        object.__setattr__(self, "coding", coding)
        repair = tuple(self.repair) if self.repair is not None else (Naive(),) * self.n
        if len(repair) != self.n:
            raise ShapeMismatch(f"{len(repair)} repair strategies for {self.n} nodes")
        object.__setattr__(self, "repair", repair)

    @property
    def r(self) -> int:
        return self.n - self.k

    @property
    def generator(self) -> np.ndarray:
        """``(n*alpha) x (k*alpha)`` matrix mapping the message to all payloads."""
        g = self._cache.get("generator")
        if g is None:
            ka = self.k * self.alpha
            parity = self.coding.transpose(0, 2, 1, 3).reshape(self.r * self.alpha, ka)
            g = np.vstack([gf2.identity(ka), parity])
            self._cache["generator"] = g
        return g

    def node_generator(self, node: int) -> np.ndarray:
        return self.generator[node * self.alpha:(node + 1) * self.alpha]

    def rows_of(self, nodes: Sequence[int]) -> np.ndarray:
        return np.vstack([self.node_generator(x) for x in nodes])

    def with_repair(self, repair, **meta) -> "SystematicCodeSpec":
        return SystematicCodeSpec(self.n, self.k, self.alpha, self.coding, tuple(repair),
                                  self.name, {**self.meta, **meta})

    def __eq__(self, other):
        if not isinstance(other, SystematicCodeSpec):
            return NotImplemented
        return ((self.n, self.k, self.alpha, self.name) == (other.n, other.k, other.alpha, other.name)
                and np.array_equal(self.coding, other.coding) and self.repair == other.repair)

    __hash__ = None


def systematize(generator: np.ndarray, n: int, k: int, alpha: int) -> tuple[np.ndarray, np.ndarray]:
    """Rewrite an arbitrary generator so that nodes ``0..k-1`` carry the message.

    Returns the coding-matrix grid and the inverse of the systematic block
    (which maps new messages back to the original parameters).
    """
    ka = k * alpha
    inv = gf2.inverse(generator[:ka])
    parity = gf2.matmul(generator[ka:], inv)
    coding = parity.reshape(n - k, alpha, k, alpha).transpose(0, 2, 1, 3)
    return np.ascontiguousarray(coding), inv


# -- encode / decode --------------------------------------------------------

def encode(spec: SystematicCodeSpec, message: np.ndarray) -> list[np.ndarray]:
    """All ``n`` payloads for a message (or a batch of messages as columns)."""
    message = gf2.as_bits(message)
    if message.shape[0] != spec.k * spec.alpha:
        raise LengthMismatch(f"message has {message.shape[0]} symbols, expected {spec.k * spec.alpha}")
    full = gf2.matmul(spec.generator, message)
    return [full[x * spec.alpha:(x + 1) * spec.alpha] for x in range(spec.n)]


def _decoder(spec: SystematicCodeSpec, nodes: tuple[int, ...]) -> np.ndarray:
    key = ("decoder", nodes)
    d = spec._cache.get(key)
    if d is None:
        try:
            d = gf2.inverse(spec.rows_of(nodes))
        except SingularSystem as exc:
            raise SingularSystem(f"nodes {nodes} do not determine the message of {spec.name or 'code'}") from exc
        spec._cache[key] = d
    return d


def _pick(spec: SystematicCodeSpec, shards: Mapping[int, np.ndarray]) -> tuple[int, ...]:
    ids = tuple(sorted(int(x) for x in shards))[:spec.k]
    if len(ids) < spec.k:
        raise LengthMismatch(f"need {spec.k} shards, got {len(shards)}")
    if any(not 0 <= x < spec.n for x in ids):
        raise ShapeMismatch(f"node ids {ids} outside [0, {spec.n})")
    return ids


def reconstruct(spec: SystematicCodeSpec, shards: Mapping[int, np.ndarray]) -> np.ndarray:
    """Recover the message from ``k`` node payloads (the lowest ``k`` ids if more are given)."""
    ids = _pick(spec, shards)
    if ids == tuple(range(spec.k)):
        return np.concatenate([gf2.as_bits(shards[x]) for x in ids])
    stacked = np.concatenate([gf2.as_bits(shards[x]) for x in ids])
    return gf2.matmul(_decoder(spec, ids), stacked)


def complete(spec: SystematicCodeSpec, shards: Mapping[int, np.ndarray]) -> list[np.ndarray]:
    """Fill in every node's payload from any ``k`` of them."""
    return encode(spec, reconstruct(spec, shards))


@dataclass(frozen=True)
class MDSVerdict:
    ok: bool
    counterexample: tuple[int, ...] | None
    checked: int

    def __bool__(self) -> bool:
        return self.ok


def verify_mds(spec: SystematicCodeSpec) -> MDSVerdict:
    """Exhaustively check that every ``k``-subset of nodes has a full-rank generator block."""
    full = spec.k * spec.alpha
    checked = 0
    for subset in itertools.combinations(range(spec.n), spec.k):
        checked += 1
        if gf2.rank(spec.rows_of(subset)) != full:
            return MDSVerdict(False, subset, checked)
    return MDSVerdict(True, None, checked)


# -- repair -----------------------------------------------------------------

def helper_usage(node: int, s: np.ndarray) -> HelperUsage:
    rows = gf2.nonzero_columns(s)
    return HelperUsage(node, int(rows.size), gf2.rank(s), tuple(int(x) for x in rows))


def _repair_decoder(spec: SystematicCodeSpec, failed: int) -> tuple[list[int], list[np.ndarray], np.ndarray]:
    key = ("repair", failed)
    hit = spec._cache.get(key)
    if hit is not None:
        return hit
    strategy = spec.repair[failed]
    helpers = [y for y in range(spec.n) if y != failed]
    mats = [strategy_matrix(strategy, y, spec.alpha) for y in helpers]
    seen = np.vstack([gf2.matmul(s, spec.node_generator(y)) for s, y in zip(mats, helpers)])
    try:
        combiner = gf2.solve(seen.T, spec.node_generator(failed).T).T
    except NoSolution:
        raise StrategyIncomplete(
            f"downloads of the repair strategy for node {failed} do not determine it") from None
    hit = (helpers, mats, combiner)
    spec._cache[key] = hit
    return hit


def repair_with_strategy(spec: SystematicCodeSpec, failed: int,
                         shards: Mapping[int, np.ndarray] | Sequence[np.ndarray]
                         ) -> tuple[np.ndarray, RepairReport]:
    """Rebuild node ``failed`` from survivor payloads using its repair strategy.

    ``shards`` is a codeword (sequence) or a mapping of surviving node ids to
    payloads; the failed node's own entry, if present, is never read.
    """
    if not isinstance(shards, Mapping):
        shards = dict(enumerate(shards))
    survivors = {x: gf2.as_bits(p) for x, p in shards.items() if x != failed}
    strategy = spec.repair[failed]
    if isinstance(strategy, Naive):
        ids = _pick(spec, survivors)
        payload = complete(spec, {x: survivors[x] for x in ids})[failed]
        usage = [HelperUsage(x, spec.alpha, spec.alpha, tuple(range(spec.alpha))) for x in ids]
        return payload, RepairReport(failed, spec.n, spec.k, spec.alpha, "naive", usage)
    helpers, mats, combiner = _repair_decoder(spec, failed)
    missing = [y for y in helpers if y not in survivors]
    if missing:
        raise LengthMismatch(f"strategy repair of node {failed} needs helpers {missing}")
    downloads = np.concatenate([gf2.matmul(s, survivors[y]) for s, y in zip(mats, helpers)])
    payload = gf2.matmul(combiner, downloads)
    usage = [helper_usage(y, s) for s, y in zip(mats, helpers)]
    return payload, RepairReport(failed, spec.n, spec.k, spec.alpha, "strategy", usage)


# -- symbolic rows ----------------------------------------------------------

_TERM = re.compile(r"([a-z])_?\{?(\d+)\}?")


def parse_combination(expr: str, k: int, alpha: int) -> np.ndarray:
    """Parse ``"a_0+b_1+c_0"`` into a length ``k*alpha`` coefficient row.

    Letter ``a`` is systematic node 0, ``b`` node 1, and so on; repeated terms cancel.
    """
    row = np.zeros(k * alpha, dtype=np.uint8)
    for term in filter(None, (t.strip() for t in expr.replace(" ", "").split("+"))):
        m = _TERM.fullmatch(term)
        if not m:
            raise ValueError(f"cannot parse term {term!r}")
        node, idx = ord(m.group(1)) - ord("a"), int(m.group(2))
        if not (0 <= node < k and 0 <= idx < alpha):
            raise ValueError(f"term {term!r} outside a code with k={k}, alpha={alpha}")
        row[node * alpha + idx] ^= 1
    return row


def format_combination(row: np.ndarray, alpha: int) -> str:
    terms = [f"{chr(ord('a') + i // alpha)}_{i % alpha}" for i in np.flatnonzero(row)]
    return "+".join(terms) if terms else "0"


def parity_rows(spec: SystematicCodeSpec, parity: int) -> list[str]:
    g = spec.node_generator(spec.k + parity)
    return [format_combination(row, spec.alpha) for row in g]


def spec_from_rows(parity_exprs: Sequence[Sequence[str]], k: int, alpha: int,
                   repair=None, name: str = "") -> SystematicCodeSpec:
    """Build a spec from textual parity equations, one list of ``alpha`` rows per parity."""
    r = len(parity_exprs)
    coding = np.zeros((r, k, alpha, alpha), dtype=np.uint8)
    for i, rows in enumerate(parity_exprs):
        if len(rows) != alpha:
            raise ShapeMismatch(f"parity {i} lists {len(rows)} rows, expected {alpha}")
        for s, expr in enumerate(rows):
            coding[i, :, s, :] = parse_combination(expr, k, alpha).reshape(k, alpha)
    return SystematicCodeSpec(k + r, k, alpha, coding, repair, name)


# -- base codes -------------------------------------------------------------

def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, int(p ** 0.5) + 1))


def evenodd(p: int) -> SystematicCodeSpec:
    """The EVENODD code on ``p`` data columns: ``(p+2, p)``, ``alpha = p - 1``.

    Parity 0 is the row parity.  Parity 1 is the diagonal parity adjusted by
    the syndrome ``S`` of the special diagonal, treating row ``p-1`` as zero.
    """
    if not (_is_prime(p) and p % 2):
        raise NotPrime(f"EVENODD needs an odd prime, got {p}")
    alpha = p - 1
    coding = np.zeros((2, p, alpha, alpha), dtype=np.uint8)
    for j in range(p):
        coding[0, j] = gf2.identity(alpha)
        for i in range(alpha):
            s = (i - j) % p
            if s < alpha:
                coding[1, j, i, s] ^= 1
            if j >= 1:
                coding[1, j, i, p - 1 - j] ^= 1
    return SystematicCodeSpec(p + 2, p, alpha, coding, None, f"evenodd-{p}")


MDR1_6_4_PARITY1 = (
    "a_0+a_3+b_0+c_1+c_4+d_4",
    "a_1+a_2+b_1+c_5+d_0+d_5",
    "a_2+b_1+b_2+c_6+d_3+d_6",
    "a_3+b_0+b_3+c_2+c_7+d_7",
    "a_0+a_4+a_7+b_0+b_4+c_0+c_5+d_0",
    "a_1+a_5+a_6+b_1+b_5+c_1+d_1+d_4",
    "a_2+a_6+b_2+b_5+b_6+c_2+d_2+d_7",
    "a_3+a_7+b_3+b_4+b_7+c_3+c_6+d_3",
)


def mdr1_repair_rows(i: int, bits: int) -> tuple[int, ...]:
    """Indices read when repairing systematic node ``i`` of an MDR-1 code.

    Indices are ``bits``-bit integers ``a``; ``a_b`` is bit ``b``.
    """
    def bit(a, b):
        return (a >> b) & 1

    tests = {
        0: lambda a: bit(a, 1) == 0,
        1: lambda a: bit(a, 1) == 1,
        2: lambda a: bit(a, 0) + bit(a, 1) in (0, 2),
        3: lambda a: bit(a, 0) + bit(a, 1) == 1,
    }
    test = tests.get(i, lambda a: bit(a, i - 2) == 1)
    return tuple(a for a in range(2 ** bits) if test(a))


def mdr1_6_4() -> SystematicCodeSpec:
    """The (6,4) MDR-1 instance with ``alpha = 8``; systematic nodes repair by row selection."""
    parity0 = tuple("+".join(f"{c}_{s}" for c in "abcd") for s in range(8))
    repair = tuple(RowSelect(mdr1_repair_rows(i, 3)) for i in range(4)) + (Naive(), Naive())
    return spec_from_rows([parity0, MDR1_6_4_PARITY1], 4, 8, repair, "mdr1-6-4")


_IRREDUCIBLE = {2: 0b111, 3: 0b1011, 4: 0b10011, 5: 0b100101, 6: 0b1000011,
                7: 0b10001001, 8: 0b100011101}


def _gf_mul(a: int, b: int, w: int) -> int:
    poly = _IRREDUCIBLE[w]
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> w:
            a ^= poly
    return out


def _gf_inv(a: int, w: int) -> int:
    for b in range(1, 2 ** w):
        if _gf_mul(a, b, w) == 1:
            return b
    raise ZeroDivisionError(a)


def gf_element_matrix(e: int, w: int) -> np.ndarray:
    """``w x w`` binary matrix of multiplication by ``e`` in GF(2^w), polynomial basis."""
    m = np.zeros((w, w), dtype=np.uint8)
    for c in range(w):
        prod = _gf_mul(e, 1 << c, w)
        m[:, c] = [(prod >> b) & 1 for b in range(w)]
    return m


def cauchy_binary_mds(n: int, k: int, w: int) -> SystematicCodeSpec:
    """Systematic Cauchy code over GF(2^w) expanded to ``w x w`` binary blocks."""
    if w not in _IRREDUCIBLE:
        raise FieldTooSmall(f"field width w={w} unsupported; use 2..8")
    if not 0 < k < n or n > 2 ** w:
        raise FieldTooSmall(f"(n={n}, k={k}) needs n <= 2^w = {2 ** w}")
    r = n - k
    coding = np.zeros((r, k, w, w), dtype=np.uint8)
    for i in range(r):
        for j in range(k):
            coding[i, j] = gf_element_matrix(_gf_inv(i ^ (r + j), w), w)
    return SystematicCodeSpec(n, k, w, coding, None, f"cauchy-{n}-{k}-{w}")
