"""
Multi-round pipelines built on the generic transformation.

``algorithm1`` starts from any binary MDS code and, one window of ``r`` nodes
per round, makes every node repairable with optimal access.  ``algorithm2``
starts from a code whose systematic nodes already repair optimally and only
needs one round with the parity nodes as targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import codes, gf2, transform
from .codes import Naive, RowSelect, SystematicCodeSpec
from .errors import ConfigError, OddLength, PairedBlockMismatch, PropagationFailure
from .simulation import optimal_nodes, simulate_repair_all
from .transform import TransformedCode, Variant


@dataclass(frozen=True)
class RoundPlan:
    index: int
    targets: tuple[int, ...]
    variant: Variant

    def to_dict(self) -> dict:
        return {"round": self.index, "targets": list(self.targets), "variant": self.variant.value}


def plan_rounds(n: int, k: int, pair_remainders: bool = True) -> list[RoundPlan]:
    """Target windows: ``r`` consecutive nodes per round, parities last.

    Non-final windows start at ``min(i*r, k-r)``, clamped at zero when ``k < r``.
    Remainder pairing keeps systematic nodes raw but needs ``k >= r``.
    """
    r = n - k
    m = math.ceil(n / r)
    plans = []
    for i in range(m - 1):
        start = max(0, min(i * r, k - r))
        variant = Variant.PAIR_REMAINDERS if pair_remainders and k >= r else Variant.PAIR_TARGETS
        plans.append(RoundPlan(i, tuple(range(start, start + r)), variant))
    plans.append(RoundPlan(m - 1, tuple(range(k, n)), Variant.PAIR_TARGETS))
    return plans


def expected_rows(plans: list[RoundPlan], node: int, N: int, r: int) -> tuple[int, ...] | None:
    """Rows a node reads after the given rounds, or None if it was never a target.

    A row index ``w`` splits into ``w mod N`` and base-``r`` digits of ``w // N``;
    digit ``s`` is the block chosen in round ``s``.  The node reads every row
    whose digit for the last round it was a target equals its window position.
    """
    hits = [p for p in plans if node in p.targets]
    if not hits:
        return None
    last = hits[-1]
    pos = last.targets.index(node)
    alpha = r ** len(plans) * N
    return tuple(w for w in range(alpha) if (w // N // r ** last.index) % r == pos)


def propagate_strategies(plans: list[RoundPlan], n: int, N: int, r: int) -> list:
    """Expected repair strategy of every node after ``plans`` have run."""
    out = []
    for x in range(n):
        rows = expected_rows(plans, x, N, r)
        out.append(Naive() if rows is None else RowSelect(rows))
    return out


def check_propagation(tc: TransformedCode, plans: list[RoundPlan], N: int) -> None:
    """Compare a round's derived strategies with the predicted block form."""
    round_index = plans[-1].index
    expected = propagate_strategies(plans, tc.n, N, tc.r)
    for x, (want, got) in enumerate(zip(expected, tc.spec.repair)):
        if want != got:
            raise PropagationFailure(
                f"round {round_index}: node {x} repair strategy {got} differs from predicted {want}",
                round_index)
        if isinstance(got, RowSelect):
            s = gf2.row_selector(got.rows, tc.alpha)
            try:
                gf2.detect_paired_blocks(s, N, tc.alpha // N)
            except PairedBlockMismatch as exc:
                raise PropagationFailure(f"round {round_index}: node {x}: {exc}", round_index) from None


@dataclass
class PipelineResult:
    base: SystematicCodeSpec
    final: TransformedCode
    rounds: list[TransformedCode]
    plans: list[RoundPlan]
    N: int
    notes: list[str] = field(default_factory=list)

    @property
    def alpha(self) -> int:
        return self.final.alpha

    def manifest(self) -> dict:
        from .io import spec_sha256
        return {
            "schema": "repairforge-manifest/1",
            "base": {"name": self.base.name, "sha256": spec_sha256(self.base), "alpha": self.base.alpha},
            "N": self.N,
            "rounds": [{**p.to_dict(), "config": tc.config.to_dict(), "alpha": tc.alpha,
                        "sha256": spec_sha256(tc.spec)} for p, tc in zip(self.plans, self.rounds)],
            "notes": list(self.notes),
        }


def _prepare(base: SystematicCodeSpec, notes: list[str]) -> SystematicCodeSpec:
    if base.alpha % 2:
        notes.append(f"alpha={base.alpha} is odd; space-shared two instances")
        return transform.space_share(base, 2)
    return base


def algorithm1(base: SystematicCodeSpec, perms="auto", pair_remainders: bool = True,
               audit_trials: int = 0, seed: int | None = None) -> PipelineResult:
    """Run all rounds; the final code repairs every node with ``alpha/r`` access per helper.

    ``audit_trials > 0`` additionally simulates repairs after every round and
    checks the first ``min((t+1) r, k)`` nodes (all nodes after the last round)
    are optimal.
    """
    notes: list[str] = []
    if any(not isinstance(s, Naive) for s in base.repair):
        notes.append("base repair strategies ignored; every node starts with naive repair")
        base = base.with_repair([Naive()] * base.n)
    spec = _prepare(base, notes)
    N, r = spec.alpha, spec.r
    plans = plan_rounds(spec.n, spec.k, pair_remainders)
    rounds: list[TransformedCode] = []
    current = spec
    for i, plan in enumerate(plans):
        cfg = transform.make_config(current, plan.targets, plan.variant, perms=perms, N=N)
        tc = transform.apply_transform(current, cfg, name=f"{spec.name}-r{i + 1}" if spec.name else "")
        check_propagation(tc, plans[:i + 1], N)
        if audit_trials:
            reports = simulate_repair_all(tc, audit_trials, seed)
            want = range(spec.n) if i == len(plans) - 1 else range(min((i + 1) * r, spec.k))
            missing = sorted(set(want) - set(optimal_nodes(reports)))
            if missing:
                raise PropagationFailure(f"round {i}: nodes {missing} are not optimally repaired", i)
        rounds.append(tc)
        current = tc.spec
    return PipelineResult(spec, rounds[-1], rounds, plans, N, notes)


def systematic_r1(spec: SystematicCodeSpec, N: int) -> dict[int, bool]:
    """R1 verdict at segment length ``N`` for each systematic node."""
    out = {}
    for i in range(spec.k):
        try:
            out[i] = bool(transform.check_R1(spec, i, N, spec.alpha // N))
        except OddLength:
            out[i] = False
    return out


def algorithm2(base: SystematicCodeSpec, force_space_share: bool = False, perms="auto",
               trials: int = 2, seed: int | None = None) -> PipelineResult:
    """Make the parities of a systematic-repair-optimal code optimal too.

    The base strategies are validated by simulation first.  Two instances are
    space-shared when some systematic strategy fails R1 at ``N = alpha`` or
    when ``force_space_share`` is set.
    """
    notes: list[str] = []
    naive = [i for i in range(base.k) if isinstance(base.repair[i], Naive)]
    if naive:
        raise ConfigError(f"systematic nodes {naive} have no repair strategy")
    simulate_repair_all(base, trials, seed, nodes=range(base.k))
    r1 = systematic_r1(base, base.alpha) if base.alpha % 2 == 0 else {i: False for i in range(base.k)}
    if all(r1.values()) and force_space_share:
        notes.append("R1 already holds at N=alpha; space-shared anyway on request")
    if not all(r1.values()) or force_space_share:
        spec = transform.space_share(base, 2)
        if not all(r1.values()):
            notes.append(f"R1 fails at N={base.alpha} for nodes "
                         f"{[i for i, ok in r1.items() if not ok]}; space-shared two instances")
    else:
        spec = base
    plan = RoundPlan(0, tuple(range(spec.k, spec.n)), Variant.PAIR_TARGETS)
    cfg = transform.make_config(spec, plan.targets, plan.variant, perms=perms, N=spec.alpha)
    tc = transform.apply_transform(spec, cfg, name=f"{base.name}-alg2" if base.name else "")
    if tc.fallbacks:
        raise PropagationFailure(f"nodes {sorted(tc.fallbacks)} lost their repair strategy", 0)
    return PipelineResult(spec, tc, [tc], [plan], spec.alpha, notes)
