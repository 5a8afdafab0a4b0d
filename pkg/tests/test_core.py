import pytest

from robustkep import (
    Attack,
    CompatibilityGraph,
    Exchange,
    ExchangeKind,
    KepSolution,
    PicefArc,
    build_pool,
    enumerate_chains,
    enumerate_cycles,
    picef_positions,
)
from robustkep.core import (
    enforceable_set,
    enforced_under_attack,
    exchange_weight,
    longest_unattacked_prefix,
    objective_value,
    prefix_subchains,
    subchain_to,
    surviving_structures,
)

# 3 pairs (0,1,2), one NDD (3); the NDD feeds a path through all pairs and
# pairs 1,2 form a 2-cycle
CHAIN_GRAPH = CompatibilityGraph(3, 1, ((3, 0), (0, 1), (1, 2), (2, 1)))


class TestCompatibilityGraph:
    def test_counts(self):
        assert CHAIN_GRAPH.num_vertices == 4
        assert list(CHAIN_GRAPH.pairs) == [0, 1, 2]
        assert list(CHAIN_GRAPH.ndds) == [3]
        assert CHAIN_GRAPH.is_pair(0) and not CHAIN_GRAPH.is_pair(3)
        assert CHAIN_GRAPH.is_ndd(3) and not CHAIN_GRAPH.is_ndd(2)

    def test_arc_into_ndd_rejected(self):
        with pytest.raises(ValueError, match="enters an NDD"):
            CompatibilityGraph(2, 1, ((0, 2),))

    def test_self_loop_rejected(self):
        with pytest.raises(ValueError, match="self-loop"):
            CompatibilityGraph(2, 0, ((1, 1),))

    def test_duplicate_arc_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            CompatibilityGraph(2, 0, ((0, 1), (0, 1)))

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="out of range"):
            CompatibilityGraph(2, 0, ((0, 5),))

    def test_adjacency(self):
        assert CHAIN_GRAPH.out_adj[1] == [2]
        assert CHAIN_GRAPH.in_adj[1] == [0, 2]
        assert (3, 0) in CHAIN_GRAPH.arc_set


class TestEnumeration:
    def test_cycles(self):
        cycles = enumerate_cycles(CHAIN_GRAPH, 3)
        assert [c.vertices for c in cycles] == [(1, 2)]

    def test_cycles_need_two_vertices(self):
        assert enumerate_cycles(CHAIN_GRAPH, 1) == []

    def test_cycle_canonical_rotation(self):
        g = CompatibilityGraph(3, 0, ((0, 1), (1, 2), (2, 0)))
        cycles = enumerate_cycles(g, 3)
        assert [c.vertices for c in cycles] == [(0, 1, 2)]

    def test_chains(self):
        chains = enumerate_chains(CHAIN_GRAPH, 3)
        assert [c.vertices for c in chains] == [(3, 0), (3, 0, 1), (3, 0, 1, 2)]

    def test_chains_respect_length(self):
        chains = enumerate_chains(CHAIN_GRAPH, 1)
        assert [c.vertices for c in chains] == [(3, 0)]
        assert enumerate_chains(CHAIN_GRAPH, 0) == []

    def test_picef_positions(self):
        arcs = picef_positions(CHAIN_GRAPH, 3)
        assert arcs == [
            PicefArc(3, 0, 1),
            PicefArc(0, 1, 2),
            PicefArc(1, 2, 3),
        ]

    def test_picef_positions_cross_check(self):
        # every (arc, position) on an enumerated chain must be generated
        for L in range(0, 4):
            arcs = set(picef_positions(CHAIN_GRAPH, L))
            from_chains = {
                PicefArc(i, j, pos)
                for d in enumerate_chains(CHAIN_GRAPH, L)
                for pos, (i, j) in enumerate(d.arcs, start=1)
            }
            assert from_chains <= arcs


class TestExchange:
    def test_cycle_arcs_include_closing(self):
        e = Exchange(ExchangeKind.CYCLE, (1, 2))
        assert e.arcs == ((1, 2), (2, 1))
        assert e.num_arcs == 2

    def test_chain_arcs(self):
        e = Exchange(ExchangeKind.CHAIN, (3, 0, 1))
        assert e.arcs == ((3, 0), (0, 1))
        assert e.num_arcs == 2

    def test_validate(self):
        Exchange(ExchangeKind.CYCLE, (1, 2)).validate(CHAIN_GRAPH, 3, 3)
        with pytest.raises(ValueError, match="length bound"):
            Exchange(ExchangeKind.CHAIN, (3, 0, 1, 2)).validate(CHAIN_GRAPH, 3, 2)
        with pytest.raises(ValueError, match="missing arc"):
            Exchange(ExchangeKind.CYCLE, (0, 1)).validate(CHAIN_GRAPH, 3, 3)
        with pytest.raises(ValueError, match="start at an NDD"):
            Exchange(ExchangeKind.CHAIN, (0, 1)).validate(CHAIN_GRAPH, 3, 3)


class TestPool:
    def test_indexing(self):
        pool = build_pool(CHAIN_GRAPH, 3, 3)
        assert len(pool) == 4
        assert pool.exchange(0).kind is ExchangeKind.CYCLE
        full = Exchange(ExchangeKind.CHAIN, (3, 0, 1, 2))
        assert pool.exchange(pool.index_of(full)).vertices == (3, 0, 1, 2)
        with pytest.raises(KeyError):
            pool.index_of(Exchange(ExchangeKind.CYCLE, (0, 1)))

    def test_involving(self):
        pool = build_pool(CHAIN_GRAPH, 3, 3)
        idx_cycle = pool.index_of(Exchange(ExchangeKind.CYCLE, (1, 2)))
        assert idx_cycle in pool.involving(2)
        assert pool.involving(3) == [
            pool.index_of(Exchange(ExchangeKind.CHAIN, v))
            for v in ((3, 0), (3, 0, 1), (3, 0, 1, 2))
        ]


class TestSolutionAndAttack:
    def test_solution_feasibility(self):
        pool = build_pool(CHAIN_GRAPH, 3, 3)
        i_cycle = pool.index_of(Exchange(ExchangeKind.CYCLE, (1, 2)))
        i_first = pool.index_of(Exchange(ExchangeKind.CHAIN, (3, 0)))
        i_full = pool.index_of(Exchange(ExchangeKind.CHAIN, (3, 0, 1, 2)))
        assert KepSolution.of([i_cycle, i_first]).is_feasible(pool)
        assert not KepSolution.of([i_cycle, i_full]).is_feasible(pool)

    def test_initial_pairs_excludes_ndds(self):
        pool = build_pool(CHAIN_GRAPH, 3, 3)
        sol = KepSolution.of([pool.index_of(Exchange(ExchangeKind.CHAIN, (3, 0)))])
        assert sol.initial_pairs(pool, CHAIN_GRAPH) == {0}

    def test_attack_budget(self):
        with pytest.raises(ValueError, match="exceeds budget"):
            Attack.of([0, 1], 1)
        u = Attack.of([1], 2)
        assert u.hits(Exchange(ExchangeKind.CYCLE, (1, 2)))
        assert not u.hits(Exchange(ExchangeKind.CHAIN, (3, 0)))


class TestFixSuccessfulConstructs:
    def test_subchain_to(self):
        d = Exchange(ExchangeKind.CHAIN, (3, 0, 1, 2))
        assert subchain_to(d, 1).vertices == (3, 0, 1)
        assert subchain_to(d, 3).vertices == (3, 0)
        with pytest.raises(ValueError):
            subchain_to(d, 9)

    def test_prefix_subchains(self):
        d = Exchange(ExchangeKind.CHAIN, (3, 0, 1, 2))
        assert [p.vertices for p in prefix_subchains(d)] == [
            (3, 0),
            (3, 0, 1),
            (3, 0, 1, 2),
        ]

    def test_enforceable_set(self):
        pool = build_pool(CHAIN_GRAPH, 3, 3)
        full = pool.index_of(Exchange(ExchangeKind.CHAIN, (3, 0, 1, 2)))
        enf = enforceable_set(KepSolution.of([full]), pool)
        assert [e.vertices for e in enf] == [(3, 0), (3, 0, 1), (3, 0, 1, 2)]
        assert all(e.index >= 0 for e in enf)

    def test_longest_unattacked_prefix(self):
        d = Exchange(ExchangeKind.CHAIN, (3, 0, 1, 2))
        assert longest_unattacked_prefix(d, Attack.of([2], 1)).vertices == (3, 0, 1)
        assert longest_unattacked_prefix(d, Attack.of([0], 1)) is None
        assert longest_unattacked_prefix(d, Attack.of([], 1)).vertices == (3, 0, 1, 2)

    def test_enforced_under_attack(self):
        pool = build_pool(CHAIN_GRAPH, 3, 3)
        full = pool.index_of(Exchange(ExchangeKind.CHAIN, (3, 0, 1, 2)))
        enforced = enforced_under_attack(
            KepSolution.of([full]), Attack.of([2], 1), pool
        )
        assert [e.vertices for e in enforced] == [(3, 0, 1)]

    def test_surviving_structures(self):
        pool = build_pool(CHAIN_GRAPH, 3, 3)
        survivors, per_vertex = surviving_structures(
            pool, KepSolution.empty(), Attack.of([2], 1)
        )
        cycle = pool.index_of(Exchange(ExchangeKind.CYCLE, (1, 2)))
        full = pool.index_of(Exchange(ExchangeKind.CHAIN, (3, 0, 1, 2)))
        assert cycle not in survivors and full not in survivors
        # the full chain still enforces coverage of vertices before the hit
        assert full in per_vertex[1]
        assert full not in per_vertex.get(2, set())


class TestWeightsAndObjective:
    def test_exchange_weight(self):
        e = Exchange(ExchangeKind.CHAIN, (3, 0, 1))
        assert exchange_weight(e, {0, 1, 2}) == 2
        assert exchange_weight(e, {2}) == 0

    def test_objective_value(self):
        pool = build_pool(CHAIN_GRAPH, 3, 3)
        full = pool.index_of(Exchange(ExchangeKind.CHAIN, (3, 0, 1, 2)))
        cycle = pool.index_of(Exchange(ExchangeKind.CYCLE, (1, 2)))
        initial = KepSolution.of([full])
        u = Attack.of([0], 1)
        assert objective_value(initial, u, KepSolution.of([cycle]), pool, CHAIN_GRAPH) == 2

    def test_objective_rejects_attacked_recourse(self):
        pool = build_pool(CHAIN_GRAPH, 3, 3)
        cycle = pool.index_of(Exchange(ExchangeKind.CYCLE, (1, 2)))
        with pytest.raises(ValueError, match="attacked"):
            objective_value(
                KepSolution.empty(),
                Attack.of([1], 1),
                KepSolution.of([cycle]),
                pool,
                CHAIN_GRAPH,
            )
