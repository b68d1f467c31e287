"""Instance model, generators, and serialization."""

import itertools

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import sparsedisc as sd
from sparsedisc.instance import InstanceFormatError

from conftest import merge_instances


def inst_of(n, *setlists):
    functions = tuple(
        sd.CoverageFunction(tuple(tuple(s) for s in sets)) for sets in setlists
    )
    return sd.CoverageInstance(n=n, functions=functions)


# ---------------------------------------------------------------------------
# validate


def test_validate_duplicate_element():
    bad = inst_of(3, [[0, 0, 1]])
    assert any("duplicate element" in v for v in sd.validate(bad))


def test_validate_index_out_of_range():
    bad = inst_of(3, [[3]])
    assert any("out of range" in v for v in sd.validate(bad))


def test_validate_empty_set_and_unsorted():
    assert any("empty set" in v for v in sd.validate(inst_of(3, [[]])))
    assert any("not sorted" in v for v in sd.validate(inst_of(3, [[2, 0]])))


def test_validate_ok_partition():
    inst = sd.gen_partition_matroid(4, [[0, 1], [2, 3]])
    assert sd.validate(inst) == []


def test_validate_duplicate_sets_are_fine():
    # identical dual sets stand for distinct universe elements
    inst = inst_of(1, [[0], [0], [0]])
    assert sd.validate(inst) == []
    assert inst.t == 3


# ---------------------------------------------------------------------------
# sparsity


def test_sparsity_partition_singletons():
    inst = inst_of(3, [[0], [1], [2]])
    assert sd.sparsity(inst) == 1


def test_sparsity_triangle_edge_coverage():
    triangle = sd.gen_edge_coverage(3, [(0, 1), (1, 2), (0, 2)])
    assert sd.sparsity(triangle) == 2  # each edge covers its two endpoints


def test_sparsity_counts_across_sets():
    inst = inst_of(3, [[0, 1], [0, 2]])
    assert sd.sparsity(inst) == 2


# ---------------------------------------------------------------------------
# Beck-Fiala encoding


def test_beck_fiala_single_edge():
    inst = sd.gen_beck_fiala(3, [[1, 2]])
    assert inst.functions[0].sets == ((1,), (2,))


def test_beck_fiala_degree_is_sparsity():
    # vertex 0 sits in three hyperedges
    inst = sd.gen_beck_fiala(4, [[0, 1], [0, 2], [0, 3]])
    assert inst.t == 3


def test_beck_fiala_rejects_empty_edge():
    with pytest.raises(ValueError):
        sd.gen_beck_fiala(3, [[0], []])


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_beck_fiala_function_counts_intersection(seed):
    # encoded value must equal |T intersect H| on every subset
    rng = np.random.default_rng(seed)
    n = 7
    H = sorted(int(j) for j in rng.choice(n, size=4, replace=False))
    inst = sd.gen_beck_fiala(n, [H])
    fn = inst.functions[0]
    for r in range(n + 1):
        for T in itertools.combinations(range(n), r):
            assert sd.eval_f(fn, T) == len(set(T) & set(H))


# ---------------------------------------------------------------------------
# partition matroid


def test_partition_block_value_is_one():
    inst = sd.gen_partition_matroid(4, [[0, 1], [2, 3]])
    assert sd.eval_f(inst.functions[0], [0, 1]) == 1


def test_partition_full_ground_set_counts_blocks():
    inst = sd.gen_partition_matroid(6, [[0, 1], [2, 3], [4, 5]])
    assert sd.eval_f(inst.functions[0], range(6)) == 3


def test_stacked_matroids_sparsity():
    a = sd.gen_partition_matroid(4, [[0, 1], [2, 3]])
    b = sd.gen_partition_matroid(4, [[0, 2], [1, 3]])
    c = sd.gen_partition_matroid(4, [[0, 3], [1, 2]])
    assert merge_instances(a, b, c).t == 3


def test_partition_rejects_overlap_and_gap():
    with pytest.raises(ValueError, match="overlap"):
        sd.gen_partition_matroid(3, [[0, 1], [1, 2]])
    with pytest.raises(ValueError, match="cover"):
        sd.gen_partition_matroid(3, [[0], [2]])


# ---------------------------------------------------------------------------
# edge coverage


def test_edge_coverage_path():
    # path 0-1-2 with edges e0=(0,1), e1=(1,2)
    inst = sd.gen_edge_coverage(3, [(0, 1), (1, 2)])
    assert inst.functions[0].sets == ((0,), (0, 1), (1,))
    assert sd.eval_f(inst.functions[0], [0]) == 2  # one edge covers 2 vertices


def test_edge_coverage_triangle_all_edges():
    inst = sd.gen_edge_coverage(3, [(0, 1), (1, 2), (0, 2)])
    assert sd.eval_f(inst.functions[0], [0, 1, 2]) == 3


def test_edge_coverage_families_are_2m_sparse():
    edges = [(0, 1), (1, 2), (2, 3)]
    parts = [sd.gen_edge_coverage(4, edges) for _ in range(3)]
    assert merge_instances(*parts).t == 6


def test_edge_coverage_rejects_self_loop():
    with pytest.raises(ValueError, match="self-loop"):
        sd.gen_edge_coverage(3, [(1, 1)])


# ---------------------------------------------------------------------------
# gen_random


def test_gen_random_deterministic():
    a = sd.gen_random(10, 2, 3, (2, 4), seed=7)
    b = sd.gen_random(10, 2, 3, (2, 4), seed=7)
    assert a == b


def test_gen_random_valid_and_sparse():
    inst = sd.gen_random(10, 2, 3, (2, 4), seed=7)
    assert sd.validate(inst) == []
    assert sd.sparsity(inst) <= 3


def test_gen_random_infeasible():
    with pytest.raises(ValueError, match="size range"):
        sd.gen_random(3, 1, 1, (5, 6), seed=0)
    with pytest.raises(ValueError, match="infeasible"):
        sd.gen_random(3, 4, 1, (1, 1), seed=0)


@pytest.mark.parametrize("t", [1, 2, 4])
def test_gen_random_respects_sparsity_budget(t):
    for seed in range(5):
        inst = sd.gen_random(20, 3, t, (1, 5), seed=seed)
        assert sd.sparsity(inst) <= t


# ---------------------------------------------------------------------------
# monotone + submodular by enumeration (all generators, small n)


def _check_monotone_submodular(fn, n):
    ground = list(range(n))
    for r in range(n + 1):
        for T in itertools.combinations(ground, r):
            base = sd.eval_f(fn, T)
            rest = [j for j in ground if j not in T]
            for i in rest:
                assert sd.eval_f(fn, T + (i,)) >= base  # monotone
            for i, j in itertools.combinations(rest, 2):
                lhs = sd.eval_f(fn, T + (i,)) + sd.eval_f(fn, T + (j,))
                rhs = sd.eval_f(fn, T + (i, j)) + base
                assert lhs >= rhs  # submodular


def test_generator_outputs_monotone_submodular():
    cases = [
        sd.gen_beck_fiala(6, [[0, 1, 2], [2, 3, 4]]),
        sd.gen_partition_matroid(6, [[0, 1, 2], [3], [4, 5]]),
        sd.gen_edge_coverage(4, [(0, 1), (1, 2), (2, 3), (0, 3)]),
        sd.gen_random(7, 2, 2, (1, 3), seed=3),
    ]
    for inst in cases:
        for fn in inst.functions:
            _check_monotone_submodular(fn, inst.n)


# ---------------------------------------------------------------------------
# serialization


def test_round_trip_identity():
    inst = sd.gen_random(12, 3, 2, (2, 4), seed=5)
    text = sd.write_instance(inst)
    again = sd.read_instance(text)
    assert again.n == inst.n
    assert again.functions == inst.functions
    assert sd.write_instance(again) == text


def test_missing_n_is_parse_error():
    with pytest.raises(InstanceFormatError, match="missing field 'n'"):
        sd.read_instance('{"functions": [{"sets": [[0]]}]}')


def test_unsorted_input_is_canonicalized():
    inst = sd.read_instance('{"n": 3, "functions": [{"sets": [[2, 0, 1]]}]}')
    assert inst.functions[0].sets == ((0, 1, 2),)


def test_duplicate_entries_deduped_on_read():
    inst = sd.read_instance('{"n": 3, "functions": [{"sets": [[1, 1, 0]]}]}')
    assert inst.functions[0].sets == ((0, 1),)


def test_unknown_top_level_key_rejected():
    with pytest.raises(InstanceFormatError, match="unknown top-level"):
        sd.read_instance('{"n": 1, "functions": [{"sets": [[0]]}], "extra": 1}')


def test_meta_is_preserved():
    text = '{"n": 1, "functions": [{"sets": [[0]]}], "meta": {"seed": 4, "generator": "random"}}'
    inst = sd.read_instance(text)
    assert inst.meta == {"seed": 4, "generator": "random"}
    assert '"meta"' in sd.write_instance(inst)


def test_invalid_instance_rejected_by_parser():
    with pytest.raises(InstanceFormatError, match="out of range"):
        sd.read_instance('{"n": 2, "functions": [{"sets": [[0, 5]]}]}')


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(2, 8),
    seed=st.integers(0, 10_000),
    m=st.integers(1, 3),
    t=st.integers(1, 3),
)
def test_round_trip_random_instances(n, seed, m, t):
    assume(t * n >= m)
    inst = sd.gen_random(n, m, t, (1, max(1, n // 2)), seed=seed)
    text = sd.write_instance(inst)
    again = sd.read_instance(text)
    assert again.functions == inst.functions and again.n == inst.n


# ---------------------------------------------------------------------------
# thresholds


def test_threshold_set_fields():
    inst = sd.gen_random(30, 2, 2, (2, 4), seed=0)
    th = sd.ThresholdSet.from_instance(inst, 3)
    assert th.drop_threshold == 3 * th.t
    assert th.frac_cap == inst.m * 3 * th.t * inst.max_set_size()
    assert th.s_split >= 1 and th.s_big >= 1
    assert th.s_split == int(np.ceil(24 * 3 * np.log(30 * th.t * 3)))
