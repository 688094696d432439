import numpy as np
import pytest

from repairforge import codes, pipelines
from repairforge.codes import Naive, RowSelect
from repairforge.errors import ConfigError, PropagationFailure
from repairforge.simulation import optimal_nodes, simulate_repair_all
from repairforge.transform import Variant

from reference_tables import (
    EVENODD3_FINAL_ACCESS, EVENODD3_ROUND1, EVENODD3_ROUND2, EVENODD3_ROUND3,
    parity_generator, parity_matrix,
)


@pytest.fixture(scope="module")
def evenodd_run():
    return pipelines.algorithm1(codes.evenodd(3), perms="identity", audit_trials=1, seed=3)


# -- planning -----------------------------------------------------------------

def test_plan_rounds_windows():
    plans = pipelines.plan_rounds(5, 3)
    assert [p.targets for p in plans] == [(0, 1), (1, 2), (3, 4)]
    assert [p.variant for p in plans] == [Variant.PAIR_REMAINDERS] * 2 + [Variant.PAIR_TARGETS]

    plans = pipelines.plan_rounds(9, 6)
    assert [p.targets for p in plans] == [(0, 1, 2), (3, 4, 5), (6, 7, 8)]

    plans = pipelines.plan_rounds(7, 4)
    assert [p.targets for p in plans] == [(0, 1, 2), (1, 2, 3), (4, 5, 6)]


def test_plan_rounds_when_k_below_r():
    plans = pipelines.plan_rounds(5, 2)
    assert [p.targets for p in plans] == [(0, 1, 2), (2, 3, 4)]
    assert plans[0].variant is Variant.PAIR_TARGETS


def test_plan_rounds_targets_only():
    plans = pipelines.plan_rounds(5, 3, pair_remainders=False)
    assert {p.variant for p in plans} == {Variant.PAIR_TARGETS}


def test_every_node_is_a_target_somewhere():
    for n, k in [(5, 3), (5, 2), (7, 4), (9, 6), (8, 3), (6, 4)]:
        plans = pipelines.plan_rounds(n, k)
        assert set().union(*(p.targets for p in plans)) == set(range(n))


def test_expected_rows_single_round():
    plans = pipelines.plan_rounds(5, 3)[:1]
    assert pipelines.expected_rows(plans, 0, 2, 2) == (0, 1)
    assert pipelines.expected_rows(plans, 1, 2, 2) == (2, 3)
    assert pipelines.expected_rows(plans, 2, 2, 2) is None


def test_propagated_strategies_match_final_access():
    plans = pipelines.plan_rounds(5, 3)
    strategies = pipelines.propagate_strategies(plans, 5, 2, 2)
    assert [{w + 1 for w in s.rows} for s in strategies] == list(EVENODD3_FINAL_ACCESS)


def test_propagation_partial():
    strategies = pipelines.propagate_strategies(pipelines.plan_rounds(5, 3)[:2], 5, 2, 2)
    assert isinstance(strategies[3], Naive)
    assert isinstance(strategies[1], RowSelect) and len(strategies[1].rows) == 4


# -- algorithm 1 --------------------------------------------------------------

def test_algorithm1_reproduces_all_rounds(evenodd_run):
    tables = [EVENODD3_ROUND1, EVENODD3_ROUND2, EVENODD3_ROUND3]
    for tc, table in zip(evenodd_run.rounds, tables):
        assert np.array_equal(parity_generator(tc.spec), parity_matrix(table, 3, tc.alpha))


def test_algorithm1_final_code(evenodd_run):
    final = evenodd_run.final
    assert evenodd_run.alpha == 16 and evenodd_run.N == 2
    assert codes.verify_mds(final.spec)
    reports = simulate_repair_all(final, trials=2, seed=5)
    assert optimal_nodes(reports) == list(range(5))
    assert [{w + 1 for w in rep.rows_accessed()} for rep in reports] == list(EVENODD3_FINAL_ACCESS)


def test_algorithm1_odd_alpha_space_shares():
    res = pipelines.algorithm1(codes.cauchy_binary_mds(5, 2, 3))
    assert res.N == 6 and res.alpha == 3 ** 2 * 6
    assert any("space-shared" in note for note in res.notes)
    assert codes.verify_mds(res.final.spec)
    assert optimal_nodes(simulate_repair_all(res.final, seed=1)) == list(range(5))


def test_algorithm1_seven_four():
    res = pipelines.algorithm1(codes.cauchy_binary_mds(7, 4, 4), audit_trials=1)
    assert res.alpha == 3 ** 3 * 4
    assert codes.verify_mds(res.final.spec)


def test_algorithm1_resets_base_strategies():
    res = pipelines.algorithm1(codes.mdr1_6_4())
    assert any("ignored" in note for note in res.notes)
    assert res.alpha == 2 ** 3 * 8
    assert optimal_nodes(simulate_repair_all(res.final, seed=2)) == list(range(6))


def test_algorithm1_pair_targets_only_is_mds():
    res = pipelines.algorithm1(codes.evenodd(3), pair_remainders=False)
    assert res.alpha == 16
    assert codes.verify_mds(res.final.spec)
    assert optimal_nodes(simulate_repair_all(res.final, seed=4)) == list(range(5))


def test_manifest(evenodd_run):
    man = evenodd_run.manifest()
    assert man["schema"] == "repairforge-manifest/1"
    assert [r["targets"] for r in man["rounds"]] == [[0, 1], [1, 2], [3, 4]]
    assert [r["alpha"] for r in man["rounds"]] == [4, 8, 16]
    assert len({r["sha256"] for r in man["rounds"]}) == 3


def test_check_propagation_detects_wrong_plan(evenodd_run):
    wrong = [pipelines.RoundPlan(0, (2, 3), Variant.PAIR_TARGETS)]
    with pytest.raises(PropagationFailure) as info:
        pipelines.check_propagation(evenodd_run.rounds[0], wrong, 2)
    assert info.value.round_index == 0


# -- algorithm 2 --------------------------------------------------------------

def test_algorithm2_without_space_sharing():
    res = pipelines.algorithm2(codes.mdr1_6_4())
    assert res.alpha == 16 and res.notes == []
    assert codes.verify_mds(res.final.spec)
    assert optimal_nodes(simulate_repair_all(res.final, seed=6)) == list(range(6))


def test_algorithm2_forced_space_sharing():
    res = pipelines.algorithm2(codes.mdr1_6_4(), force_space_share=True)
    assert res.alpha == 32
    assert any("anyway" in note for note in res.notes)
    reports = simulate_repair_all(res.final, seed=7)
    rows = [rep.rows_accessed() for rep in reports]
    bit = lambda j, b: (j >> b) & 1
    assert rows[0] == {j for j in range(32) if bit(j, 1) == 0}
    assert rows[3] == {j for j in range(32) if bit(j, 0) != bit(j, 1)}
    assert rows[5] == set(range(16, 32))


def test_algorithm2_needs_systematic_strategies():
    with pytest.raises(ConfigError):
        pipelines.algorithm2(codes.evenodd(3))


def test_systematic_r1_flags_unpaired_rows():
    base = codes.mdr1_6_4()
    # rows {0,1,2,3} read only the first half of the segment, so the halves differ
    spread = RowSelect((0, 1, 2, 3))
    probe = base.with_repair([spread] + list(base.repair[1:]))
    assert pipelines.systematic_r1(probe, 8)[0] is False
    assert pipelines.systematic_r1(base, 8) == {i: True for i in range(4)}


def test_systematic_r1_odd_segment_is_false():
    spec = codes.cauchy_binary_mds(5, 3, 3)
    spec = spec.with_repair([RowSelect((0,))] * 3 + [Naive()] * 2)
    assert pipelines.systematic_r1(spec, 3) == {0: False, 1: False, 2: False}
