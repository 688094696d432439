"""
The generic transformation and its decode/repair procedures.

A transformed node stores ``r`` blocks of length ``delta * N``, one per inner
instance of the base code (instance-major).  Remainder (non-target) nodes store
their inner-instance payloads as they are.  Target position ``t`` stores, in
block ``l``, a pairing of ``w[l][t]`` (the content instance ``l`` places at
target ``t``) with its mirror ``w[t][l]``:

* ``t == l``: ``w[l][l]``
* ``t > l``:  ``w[l][t] + w[t][l]``
* ``t < l``:  ``w[l][t] boxplus w[t][l]``

With ``Variant.PAIR_TARGETS`` the inner instances are independent base
codewords.  ``Variant.PAIR_REMAINDERS`` instead cross-pairs the target contents
in advance and recomputes ``r`` remainder nodes, so the stored target contents
are the original base contents and a systematic base stays systematic.

Every array argument follows the package convention: axis 0 is the symbol
axis and trailing axes are batch (or symbolic coefficient) axes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import codes, gf2
from .codes import Matrices, Naive, RowSelect, SystematicCodeSpec
from .errors import (
    BadTargets, ConfigError, NotATarget, OddSubpacketization, PairedBlockMismatch, R1Violation,
    R2Violation, ShapeMismatch,
)
from .pairing import Combo, boxplus, cancel_partner, cross_pair, masked_unpair_segments, unpair_sum_box
from .report import HelperUsage, RepairReport


class Variant(enum.Enum):
    PAIR_TARGETS = "pair_targets"
    PAIR_REMAINDERS = "pair_remainders"


@dataclass(frozen=True)
class TransformConfig:
    targets: tuple[int, ...]
    perms: tuple[tuple[int, ...], ...]
    variant: Variant
    N: int
    delta: int
    modified: tuple[int, ...] = ()

    @property
    def r(self) -> int:
        return len(self.targets)

    def validate(self, spec: SystematicCodeSpec) -> None:
        r = spec.r
        if len(set(self.targets)) != r or len(self.targets) != r:
            raise BadTargets(f"need {r} distinct targets, got {self.targets}")
        if list(self.targets) != sorted(self.targets) or not all(0 <= t < spec.n for t in self.targets):
            raise BadTargets(f"targets {self.targets} must be sorted node ids below {spec.n}")
        if len(self.perms) != r or any(sorted(p) != list(range(r)) for p in self.perms):
            raise ConfigError(f"need {r} permutations of range({r}), got {self.perms}")
        if self.N <= 0 or self.N % 2:
            raise OddSubpacketization(f"segment length N={self.N} must be positive and even")
        if self.N * self.delta != spec.alpha:
            raise ConfigError(f"delta*N = {self.delta}*{self.N} differs from alpha={spec.alpha}")
        if self.variant is Variant.PAIR_REMAINDERS:
            if spec.k < r:
                raise ConfigError(f"remainder pairing needs k >= r, got k={spec.k}, r={r}")
            rest = set(range(spec.n)) - set(self.targets)
            if len(set(self.modified)) != r or not set(self.modified) <= rest:
                raise ConfigError(f"need {r} distinct non-target nodes to modify, got {self.modified}")
        elif self.modified:
            raise ConfigError("modified nodes only apply to remainder pairing")

    def to_dict(self) -> dict:
        return {"targets": list(self.targets), "perms": [list(p) for p in self.perms],
                "variant": self.variant.value, "N": self.N, "delta": self.delta,
                "modified": list(self.modified)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "TransformConfig":
        return cls(tuple(d["targets"]), tuple(tuple(p) for p in d["perms"]), Variant(d["variant"]),
                   int(d["N"]), int(d["delta"]), tuple(d.get("modified", ())))


def identity_perms(r: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(range(r)) for _ in range(r))


def cyclic_perms(r: int) -> tuple[tuple[int, ...], ...]:
    """``pi_l(j) = (l + j) mod r``, symmetric in ``(l, j)``."""
    return tuple(tuple((l + j) % r for j in range(r)) for l in range(r))


def make_config(spec: SystematicCodeSpec, targets: Sequence[int],
                variant: Variant | str = Variant.PAIR_TARGETS, perms="auto",
                N: int | None = None, modified: Sequence[int] | None = None) -> TransformConfig:
    """Fill in defaults: ``N = alpha``, highest-id modified nodes, and automatic permutations.

    ``perms`` is ``"auto"``, ``"identity"``, ``"cyclic"`` or an explicit list.
    Automatic permutations are the identity when every non-naive remainder
    node has the same repair matrix at all targets, and cyclic otherwise.
    """
    variant = Variant(variant)
    targets = tuple(sorted(int(t) for t in targets))
    r = spec.r
    if spec.alpha % 2 and N is None:
        raise OddSubpacketization(
            f"alpha={spec.alpha} is odd; space-share two instances before transforming")
    N = spec.alpha if N is None else int(N)
    if N <= 0 or spec.alpha % N:
        raise ConfigError(f"N={N} does not divide alpha={spec.alpha}")
    if modified is None:
        modified = ()
        if variant is Variant.PAIR_REMAINDERS:
            rest = [x for x in range(spec.n) if x not in targets]
            modified = tuple(rest[-r:])
    if isinstance(perms, str):
        if perms == "identity":
            perms = identity_perms(r)
        elif perms == "cyclic":
            perms = cyclic_perms(r)
        elif perms == "auto":
            constant = all(
                _constant_over_targets(spec, i, targets)
                for i in range(spec.n)
                if i not in targets and not isinstance(spec.repair[i], Naive))
            perms = identity_perms(r) if constant else cyclic_perms(r)
        else:
            raise ConfigError(f"unknown permutation choice {perms!r}")
    cfg = TransformConfig(targets, tuple(tuple(int(x) for x in p) for p in perms), variant,
                          N, spec.alpha // N, tuple(sorted(modified)))
    cfg.validate(spec)
    return cfg


# -- space sharing ----------------------------------------------------------

def space_share(spec: SystematicCodeSpec, copies: int) -> SystematicCodeSpec:
    """Stack ``copies`` independent codewords into one code with ``copies * alpha`` symbols."""
    if copies < 1:
        raise ConfigError(f"need at least one copy, got {copies}")
    if copies == 1:
        return spec
    a = spec.alpha
    coding = np.zeros((spec.r, spec.k, copies * a, copies * a), dtype=np.uint8)
    for c in range(copies):
        coding[:, :, c * a:(c + 1) * a, c * a:(c + 1) * a] = spec.coding
    repair = []
    for s in spec.repair:
        if isinstance(s, RowSelect):
            repair.append(RowSelect(tuple(c * a + x for c in range(copies) for x in s.rows)))
        elif isinstance(s, Matrices):
            repair.append(Matrices({y: gf2.block_diag(*([m] * copies)) for y, m in s.mats.items()}))
        else:
            repair.append(s)
    name = f"{spec.name}x{copies}" if spec.name else ""
    meta = {**spec.meta, "space_shared": spec.meta.get("space_shared", 1) * copies}
    return SystematicCodeSpec(spec.n, spec.k, copies * a, coding, tuple(repair), name, meta)


# -- the three construction steps ------------------------------------------

def permute_targets(instances: Sequence[Sequence[np.ndarray]], config: TransformConfig) -> list[list[np.ndarray]]:
    """``h[l][j] = instances[l][targets[pi_l(j)]]``: what instance ``l`` places at target ``j``."""
    return [[inst[config.targets[config.perms[l][j]]] for j in range(config.r)]
            for l, inst in enumerate(instances)]


def pair_targets(h: Sequence[Sequence[np.ndarray]], config: TransformConfig) -> list[list[np.ndarray]]:
    """Stored target blocks: ``out[l][j]`` is block ``l`` of target ``j``."""
    r, n = config.r, config.N
    out = [[None] * r for _ in range(r)]
    for l in range(r):
        for j in range(r):
            if h[l][j].shape != h[j][l].shape:
                raise ShapeMismatch(f"h[{l}][{j}] and h[{j}][{l}] differ in shape")
            if j == l:
                out[l][j] = h[l][j]
            elif j > l:
                out[l][j] = h[l][j] ^ h[j][l]
            else:
                out[l][j] = boxplus(h[l][j], h[j][l], n)
    return out


def cross_pair_all(h: Sequence[Sequence[np.ndarray]], config: TransformConfig) -> list[list[np.ndarray]]:
    """The ``v`` values that, once paired, reproduce ``h`` (diagonal copied)."""
    r = config.r
    v = [[None] * r for _ in range(r)]
    for l in range(r):
        v[l][l] = h[l][l]
        for t in range(l + 1, r):
            v[l][t], v[t][l] = cross_pair(h[l][t], h[t][l], config.N)
    return v


# -- R1 / R2 ------------------------------------------------------------------

@dataclass(frozen=True)
class R1Verdict:
    ok: bool
    node: int
    halves: dict = field(default_factory=dict)
    reason: str = ""

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class R2Verdict:
    ok: bool
    node: int
    branch: str | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def check_R1(spec: SystematicCodeSpec, i: int, N: int, delta: int = 1) -> R1Verdict:
    """Check every repair matrix of node ``i`` is paired block-diagonal with segment ``N``."""
    strategy = spec.repair[i]
    if isinstance(strategy, Naive):
        return R1Verdict(False, i, reason="naive repair has no repair matrices")
    halves = {}
    for y in range(spec.n):
        if y == i:
            continue
        try:
            halves[y] = gf2.detect_paired_blocks(codes.strategy_matrix(strategy, y, spec.alpha), N, delta)
        except PairedBlockMismatch as exc:
            return R1Verdict(False, i, reason=f"helper {y}: {exc}")
    return R1Verdict(True, i, halves)


def _constant_over_targets(spec: SystematicCodeSpec, i: int, targets: Sequence[int]) -> bool:
    strategy = spec.repair[i]
    if isinstance(strategy, RowSelect):
        return True
    mats = [codes.strategy_matrix(strategy, t, spec.alpha) for t in targets]
    return all(np.array_equal(m, mats[0]) for m in mats)


def check_R2(spec: SystematicCodeSpec, config: TransformConfig, i: int) -> R2Verdict:
    """Symmetric permutations, or one repair matrix shared by all target helpers."""
    if isinstance(spec.repair[i], Naive):
        return R2Verdict(False, i, reason="naive repair has no repair matrices")
    r, p = config.r, config.perms
    if all(p[l][j] == p[j][l] for l in range(r) for j in range(r)):
        return R2Verdict(True, i, "symmetric")
    if _constant_over_targets(spec, i, config.targets):
        return R2Verdict(True, i, "constant")
    return R2Verdict(False, i, reason="permutations are not symmetric and repair matrices differ across targets")


# -- the transformed code ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class TransformedCode:
    base: SystematicCodeSpec
    config: TransformConfig
    spec: SystematicCodeSpec
    to_params: np.ndarray
    structural_generator: np.ndarray
    fallbacks: dict

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def k(self) -> int:
        return self.base.k

    @property
    def r(self) -> int:
        return self.base.r

    @property
    def alpha(self) -> int:
        return self.spec.alpha

    @property
    def block(self) -> int:
        return self.base.alpha

    def target_position(self, node: int) -> int | None:
        try:
            return self.config.targets.index(node)
        except ValueError:
            return None

    def is_target(self, node: int) -> bool:
        return node in self.config.targets

    # structural encode ------------------------------------------------
    def base_instances(self, params: np.ndarray) -> list[list[np.ndarray]]:
        ka = self.k * self.block
        return [codes.encode(self.base, params[l * ka:(l + 1) * ka]) for l in range(self.r)]

    def inner_instances(self, message: np.ndarray) -> list[list[np.ndarray]]:
        """Base codewords whose blocks (and pairings) make up the stored codeword."""
        params = gf2.matmul(self.to_params, gf2.as_bits(message))
        return _inner_from_params(self.base, self.config, params)

    def encode(self, message: np.ndarray) -> list[np.ndarray]:
        return assemble(self.inner_instances(message), self.config)

    def blocks(self, payload: np.ndarray) -> list[np.ndarray]:
        b = self.block
        return [payload[l * b:(l + 1) * b] for l in range(self.r)]


def _completion(base: SystematicCodeSpec, info: tuple[int, ...], x: int) -> np.ndarray:
    key = ("completion", info, x)
    e = base._cache.get(key)
    if e is None:
        e = gf2.matmul(base.node_generator(x), gf2.inverse(base.rows_of(info)))
        base._cache[key] = e
    return e


def _inner_from_params(base: SystematicCodeSpec, config: TransformConfig,
                       params: np.ndarray) -> list[list[np.ndarray]]:
    ka = base.k * base.alpha
    inst = [codes.encode(base, params[l * ka:(l + 1) * ka]) for l in range(config.r)]
    if config.variant is Variant.PAIR_TARGETS:
        return inst
    v = cross_pair_all(permute_targets(inst, config), config)
    info = tuple(x for x in range(base.n) if x not in config.modified)
    inner = []
    for l, b in enumerate(inst):
        u = list(b)
        for t in range(config.r):
            u[config.targets[config.perms[l][t]]] = v[l][t]
        stacked = np.concatenate([u[z] for z in info])
        for x in config.modified:
            u[x] = gf2.matmul(_completion(base, info, x), stacked)
        inner.append(u)
    return inner


def assemble(inner: Sequence[Sequence[np.ndarray]], config: TransformConfig) -> list[np.ndarray]:
    """Stored payloads of every node from the inner instances."""
    n = len(inner[0])
    paired = pair_targets(permute_targets(inner, config), config)
    out = []
    for x in range(n):
        if x in config.targets:
            t = config.targets.index(x)
            out.append(np.concatenate([paired[l][t] for l in range(config.r)]))
        else:
            out.append(np.concatenate([inner[l][x] for l in range(config.r)]))
    return out


def _derived_strategies(base: SystematicCodeSpec, config: TransformConfig) -> tuple[list, dict]:
    r, a = config.r, base.alpha
    repair, fallbacks = [], {}
    for i in range(base.n):
        if i in config.targets:
            t = config.targets.index(i)
            repair.append(RowSelect(tuple(range(t * a, (t + 1) * a))))
            continue
        if isinstance(base.repair[i], Naive):
            repair.append(Naive())
            continue
        v1, v2 = check_R1(base, i, config.N, config.delta), check_R2(base, config, i)
        if not (v1 and v2):
            repair.append(Naive())
            fallbacks[i] = v1.reason or v2.reason
            continue
        repair.append(codes.simplify_strategy(
            {y: gf2.block_diag(*[codes.strategy_matrix(base.repair[i], z, a)
                                 for z in _helper_sources(config, y)])
             for y in range(base.n) if y != i}))
    return repair, fallbacks


def _helper_sources(config: TransformConfig, y: int) -> list[int]:
    """Base node whose repair matrix helper ``y`` applies to each of its blocks."""
    if y in config.targets:
        t = config.targets.index(y)
        return [config.targets[config.perms[l][t]] for l in range(config.r)]
    return [y] * config.r


def apply_transform(spec: SystematicCodeSpec, config: TransformConfig, name: str | None = None) -> TransformedCode:
    """Transform ``spec`` so the configured targets repair with ``alpha'/r`` access per helper."""
    config.validate(spec)
    r, ka = spec.r, spec.k * spec.alpha
    params = gf2.identity(r * ka)
    g = np.vstack(assemble(_inner_from_params(spec, config, params), config))
    coding, to_params = codes.systematize(g, spec.n, spec.k, r * spec.alpha)
    repair, fallbacks = _derived_strategies(spec, config)
    meta = {"transform": config.to_dict(), "base": spec.name}
    if fallbacks:
        meta["naive_fallbacks"] = {str(i): why for i, why in fallbacks.items()}
    if name is None:
        name = f"{spec.name}~t{''.join(str(t) for t in config.targets)}" if spec.name else ""
    derived = SystematicCodeSpec(spec.n, spec.k, r * spec.alpha, coding, tuple(repair), name, meta)
    return TransformedCode(spec, config, derived, to_params, g, fallbacks)


def apply_transform_systematic(spec: SystematicCodeSpec, config: TransformConfig,
                               name: str | None = None) -> TransformedCode:
    """The remainder-pairing variant; raises unless ``config`` selects it."""
    if config.variant is not Variant.PAIR_REMAINDERS:
        raise ConfigError("the systematic-preserving transform needs Variant.PAIR_REMAINDERS")
    return apply_transform(spec, config, name)


# -- decode -----------------------------------------------------------------

def _shard_map(shards) -> dict:
    if not isinstance(shards, Mapping):
        shards = dict(enumerate(shards))
    return {int(x): gf2.as_bits(p) for x, p in shards.items()}


def decode_transformed(tc: TransformedCode, shards, trace: list | None = None) -> np.ndarray:
    """Recover the message from any ``k`` stored payloads without touching the flat generator.

    Connected targets are unpaired first, which completes their own inner
    instances; those in turn strip the partners out of the remaining target
    blocks, after which every other instance is a plain base decode.
    """
    shards = _shard_map(shards)
    nodes = sorted(shards)[:tc.k]
    if len(nodes) < tc.k:
        raise ShapeMismatch(f"need {tc.k} shards, got {len(shards)}")
    cfg, r, N = tc.config, tc.r, tc.config.N
    blk = {x: tc.blocks(shards[x]) for x in nodes}
    J = [t for t, x in enumerate(cfg.targets) if x in blk]
    R = [x for x in nodes if x not in cfg.targets]
    w = {}

    for l in J:
        w[l, l] = blk[cfg.targets[l]][l]
        for u in J:
            if u > l:
                x, y = blk[cfg.targets[u]][l], blk[cfg.targets[l]][u]
                w[u, l], w[l, u] = unpair_sum_box(x, y, N)
                if trace is not None:
                    trace.append(("unpair", l, u))

    inner = [None] * r

    def complete(l):
        known = {cfg.targets[cfg.perms[l][u]]: w[l, u] for u in J}
        known.update({x: blk[x][l] for x in R})
        inner[l] = codes.complete(tc.base, known)
        for t in range(r):
            w[l, t] = inner[l][cfg.targets[cfg.perms[l][t]]]
        if trace is not None:
            trace.append(("base_decode", l))

    for l in J:
        complete(l)
    for l in range(r):
        if l in J:
            continue
        for u in J:
            combo = blk[cfg.targets[u]][l]
            kind = Combo.A_PLUS_B if u > l else Combo.A_BOX_B
            w[l, u] = cancel_partner(w[u, l], combo, kind, N)
            if trace is not None:
                trace.append(("cancel", l, u, kind.value))
        complete(l)
    stored = assemble(inner, cfg)
    return np.concatenate(stored[:tc.k])


def decode_oracle(tc: TransformedCode, shards) -> np.ndarray:
    """Flattened-generator decode, for cross-checking the structural one."""
    shards = _shard_map(shards)
    return codes.reconstruct(tc.spec, shards)


# -- repair -----------------------------------------------------------------

def repair_target(tc: TransformedCode, node: int, shards) -> tuple[np.ndarray, RepairReport]:
    """Rebuild target ``node`` from block ``j`` of every survivor, ``j`` its target position."""
    j = tc.target_position(node)
    if j is None:
        raise NotATarget(f"node {node} is not a target of this transform")
    shards = _shard_map(shards)
    cfg, r, N, b = tc.config, tc.r, tc.config.N, tc.block
    helpers = [y for y in range(tc.n) if y != node]
    missing = [y for y in helpers if y not in shards]
    if missing:
        raise ShapeMismatch(f"target repair needs every survivor; missing {missing}")
    got = {y: shards[y][j * b:(j + 1) * b] for y in helpers}
    inner = codes.complete(tc.base, {x: got[x] for x in helpers if x not in cfg.targets})
    w_j = [inner[cfg.targets[cfg.perms[j][t]]] for t in range(r)]
    mirror = {}
    for t in range(r):
        if t == j:
            continue
        combo = got[cfg.targets[t]]
        mirror[t] = combo ^ w_j[t] if t > j else cancel_partner(w_j[t], combo, Combo.B_BOX_A, N)
    out = []
    for l in range(r):
        if l == j:
            out.append(w_j[j])
        elif j > l:
            out.append(mirror[l] ^ w_j[l])
        else:
            out.append(boxplus(mirror[l], w_j[l], N))
    rows = tuple(range(j * b, (j + 1) * b))
    usage = [HelperUsage(y, b, b, rows) for y in helpers]
    return np.concatenate(out), RepairReport(node, tc.n, tc.k, tc.alpha, "target", usage)


def repair_remainder(tc: TransformedCode, node: int, shards) -> tuple[np.ndarray, RepairReport]:
    """Rebuild a non-target node with the base repair applied inside every inner instance."""
    if tc.is_target(node):
        raise ConfigError(f"node {node} is a target; use repair_target")
    base, cfg, r, N, b = tc.base, tc.config, tc.r, tc.config.N, tc.block
    shards = _shard_map(shards)
    if isinstance(base.repair[node], Naive):
        return codes.repair_with_strategy(tc.spec, node, shards)
    v1 = check_R1(base, node, N, cfg.delta)
    if not v1:
        raise R1Violation(f"node {node}: {v1.reason}")
    v2 = check_R2(base, cfg, node)
    if not v2:
        raise R2Violation(f"node {node}: {v2.reason}")
    helpers = [y for y in range(tc.n) if y != node]
    missing = [y for y in helpers if y not in shards]
    if missing:
        raise ShapeMismatch(f"remainder repair needs every survivor; missing {missing}")

    def s(z):
        return codes.strategy_matrix(base.repair[node], z, b)

    down = {y: [gf2.matmul(s(z), blk) for z, blk in zip(_helper_sources(cfg, y), tc.blocks(shards[y]))]
            for y in helpers}
    # per instance l: S w for every base node other than ``node``
    seen = [dict() for _ in range(r)]
    for l in range(r):
        for x in helpers:
            if x not in cfg.targets:
                seen[l][x] = down[x][l]
    for l in range(r):
        src = cfg.targets[cfg.perms[l][l]]
        seen[l][src] = down[cfg.targets[l]][l]
        for t in range(l + 1, r):
            sx, sy = down[cfg.targets[t]][l], down[cfg.targets[l]][t]
            halves = v1.halves[cfg.targets[cfg.perms[l][t]]]
            s_tl, s_lt = masked_unpair_segments(sx, sy, halves, N)
            seen[t][cfg.targets[cfg.perms[t][l]]] = s_tl
            seen[l][cfg.targets[cfg.perms[l][t]]] = s_lt
    base_helpers, _, combiner = codes._repair_decoder(base, node)
    out = [gf2.matmul(combiner, np.concatenate([seen[l][z] for z in base_helpers])) for l in range(r)]
    strategy = tc.spec.repair[node]
    usage = [codes.helper_usage(y, codes.strategy_matrix(strategy, y, tc.alpha)) for y in helpers]
    return np.concatenate(out), RepairReport(node, tc.n, tc.k, tc.alpha, "remainder", usage)


def repair_node(tc: TransformedCode, node: int, shards) -> tuple[np.ndarray, RepairReport]:
    """Dispatch to the target, remainder or naive procedure."""
    if tc.is_target(node):
        return repair_target(tc, node, shards)
    if isinstance(tc.spec.repair[node], Naive):
        return codes.repair_with_strategy(tc.spec, node, _shard_map(shards))
    return repair_remainder(tc, node, shards)
