import random

import pytest

from confound_quant.dag import (
    AdjustmentResult,
    CausalDag,
    DagNode,
    GraphError,
    NodeKind,
    Path,
    QueryError,
    SeparationQuery,
    TripleClass,
    ViolatedCondition,
    backdoor_paths,
    classify_triple,
    descendants,
    is_admissible,
    is_d_separated,
    is_identifiable_via_backdoor,
    minimal_adjustment_sets,
    path_is_blocked,
)

from oracles import (
    admissible_oracle,
    backdoor_trails_oracle,
    descendants_closure,
    dsep_oracle,
    minimal_sets_oracle,
    random_dag,
    trail_blocked,
    undirected_trails,
)


def make_dag(edges, latent=(), name="g"):
    ids = sorted({n for e in edges for n in e} | set(latent))
    nodes = tuple(
        DagNode(i, i.lower(), NodeKind.LATENT if i in latent else NodeKind.OBSERVED)
        for i in ids
    )
    return CausalDag(name, nodes, tuple(edges))


CHAIN = make_dag([("A", "B"), ("B", "C")])
FORK = make_dag([("B", "A"), ("B", "C")])
COLLIDER = make_dag([("A", "B"), ("C", "B")])
COLLIDER_DESC = make_dag([("A", "B"), ("C", "B"), ("B", "D")])


class TestStructure:
    def test_duplicate_node_rejected(self):
        with pytest.raises(GraphError, match="duplicate node"):
            CausalDag("g", (DagNode("A", "a"), DagNode("A", "a")), ())

    def test_self_loop_rejected(self):
        with pytest.raises(GraphError, match="self-loop"):
            make_dag([("A", "A"), ("A", "B")])

    def test_unknown_endpoint_rejected(self):
        with pytest.raises(GraphError, match="unknown node"):
            CausalDag("g", (DagNode("A", "a"),), (("A", "B"),))

    def test_duplicate_edge_rejected(self):
        with pytest.raises(GraphError, match="duplicate edge"):
            CausalDag(
                "g",
                (DagNode("A", "a"), DagNode("B", "b")),
                (("A", "B"), ("A", "B")),
            )

    def test_cycle_rejected(self):
        with pytest.raises(GraphError, match="cycle"):
            make_dag([("A", "B"), ("B", "C"), ("C", "A")])

    def test_topological_order_respects_edges(self):
        rng = random.Random(7)
        for _ in range(50):
            nodes, edges = random_dag(rng, rng.randint(1, 7), 0.4)
            dag = make_dag(edges) if edges else CausalDag(
                "g", tuple(DagNode(n, n) for n in nodes), ()
            )
            order = {n: i for i, n in enumerate(dag.topological_order)}
            assert all(order[a] < order[b] for a, b in dag.edges)

    def test_observed_latent_partition(self):
        dag = make_dag([("A", "B")], latent=("A",))
        assert dag.latent_ids == {"A"}
        assert dag.observed_ids == {"B"}


class TestTriples:
    def test_chain(self):
        assert classify_triple(CHAIN, "A", "B", "C") is TripleClass.CHAIN
        assert classify_triple(CHAIN, "C", "B", "A") is TripleClass.CHAIN

    def test_fork(self):
        assert classify_triple(FORK, "A", "B", "C") is TripleClass.FORK

    def test_collider(self):
        assert classify_triple(COLLIDER, "A", "B", "C") is TripleClass.COLLIDER

    def test_non_adjacent_rejected(self):
        with pytest.raises(QueryError, match="adjacent triple"):
            classify_triple(CHAIN, "A", "C", "B")

    def test_unknown_node_rejected(self):
        with pytest.raises(QueryError, match="unknown"):
            classify_triple(CHAIN, "A", "B", "Q")


class TestDescendants:
    def test_chain(self):
        assert descendants(CHAIN, "A") == {"B", "C"}
        assert descendants(CHAIN, "C") == frozenset()

    def test_artwork(self, artwork_dag):
        assert descendants(artwork_dag, "A") == {"M", "X", "Z"}
        assert descendants(artwork_dag, "X") == {"Z"}
        assert descendants(artwork_dag, "G") == {"X", "Z"}

    def test_matches_oracle_on_random_dags(self):
        rng = random.Random(11)
        for _ in range(40):
            nodes, edges = random_dag(rng, rng.randint(1, 7), 0.35)
            dag = CausalDag("g", tuple(DagNode(n, n) for n in nodes), tuple(edges))
            closure = descendants_closure(nodes, edges)
            for n in nodes:
                assert descendants(dag, n) == closure[n]


class TestDSeparation:
    def test_chain_blocked_by_interior(self):
        assert not is_d_separated(CHAIN, x=["A"], z=["C"])
        assert is_d_separated(CHAIN, x=["A"], z=["C"], given=["B"])

    def test_fork_blocked_by_interior(self):
        assert not is_d_separated(FORK, x=["A"], z=["C"])
        assert is_d_separated(FORK, x=["A"], z=["C"], given=["B"])

    def test_collider_blocked_by_default(self):
        assert is_d_separated(COLLIDER, x=["A"], z=["C"])
        assert not is_d_separated(COLLIDER, x=["A"], z=["C"], given=["B"])

    def test_collider_opened_by_descendant(self):
        assert is_d_separated(COLLIDER_DESC, x=["A"], z=["C"])
        assert not is_d_separated(COLLIDER_DESC, x=["A"], z=["C"], given=["D"])

    def test_direct_edge_never_separable(self, artwork_dag):
        assert not is_d_separated(artwork_dag, x=["X"], z=["Z"], given=["A", "G", "M"])

    def test_query_object_form(self):
        q = SeparationQuery(frozenset({"A"}), frozenset({"C"}), frozenset({"B"}))
        assert is_d_separated(CHAIN, q)

    def test_query_sets_must_be_disjoint(self):
        with pytest.raises(QueryError, match="disjoint"):
            SeparationQuery(frozenset({"A"}), frozenset({"A"}))

    def test_empty_sets_rejected(self):
        with pytest.raises(QueryError, match="nonempty"):
            SeparationQuery(frozenset(), frozenset({"A"}))

    def test_unknown_nodes_rejected(self):
        with pytest.raises(QueryError, match="unknown"):
            is_d_separated(CHAIN, x=["A"], z=["Q"])

    def test_matches_path_enumeration_oracle(self):
        rng = random.Random(23)
        checked = 0
        for _ in range(60):
            n = rng.randint(2, 7)
            nodes, edges = random_dag(rng, n, rng.choice([0.2, 0.35, 0.5]))
            dag = CausalDag("g", tuple(DagNode(m, m) for m in nodes), tuple(edges))
            for _ in range(8):
                pool = list(nodes)
                rng.shuffle(pool)
                x, z = pool[0], pool[1]
                cond = set(pool[2 : 2 + rng.randint(0, n - 2)])
                got = is_d_separated(dag, x=[x], z=[z], given=cond)
                want = dsep_oracle(nodes, edges, {x}, {z}, cond)
                assert got == want, (edges, x, z, cond)
                checked += 1
        assert checked == 480

    def test_set_valued_queries_match_oracle(self):
        rng = random.Random(29)
        for _ in range(30):
            nodes, edges = random_dag(rng, 6, 0.35)
            dag = CausalDag("g", tuple(DagNode(m, m) for m in nodes), tuple(edges))
            pool = list(nodes)
            rng.shuffle(pool)
            x_set, z_set, cond = set(pool[:2]), set(pool[2:4]), set(pool[4:5])
            got = is_d_separated(dag, x=x_set, z=z_set, given=cond)
            assert got == dsep_oracle(nodes, edges, x_set, z_set, cond)


class TestBackdoorPaths:
    def test_artwork_paths_in_order(self, artwork_dag):
        rendered = [p.arrow_str(artwork_dag) for p in backdoor_paths(artwork_dag, "X", "Z")]
        assert rendered == [
            "X <- A -> M -> Z",
            "X <- A -> Z",
            "X <- G -> Z",
            "X <- M <- A -> Z",
            "X <- M -> Z",
        ]

    def test_latent_variant_adds_mood_path(self, latent_artwork_dag):
        rendered = [
            p.arrow_str(latent_artwork_dag)
            for p in backdoor_paths(latent_artwork_dag, "X", "Z")
        ]
        assert "X <- E -> Z" in rendered
        assert len(rendered) == 6

    def test_first_edge_points_into_exposure(self, artwork_dag):
        for p in backdoor_paths(artwork_dag, "X", "Z"):
            assert artwork_dag.has_edge(p.nodes[1], p.nodes[0])

    def test_matches_trail_oracle(self):
        rng = random.Random(37)
        for _ in range(40):
            nodes, edges = random_dag(rng, rng.randint(2, 7), 0.4)
            dag = CausalDag("g", tuple(DagNode(m, m) for m in nodes), tuple(edges))
            x, z = rng.sample(nodes, 2)
            got = {p.nodes for p in backdoor_paths(dag, x, z)}
            want = set(backdoor_trails_oracle(nodes, edges, x, z))
            assert got == want

    def test_same_node_rejected(self, artwork_dag):
        with pytest.raises(QueryError, match="must differ"):
            backdoor_paths(artwork_dag, "X", "X")

    def test_path_invariants(self):
        with pytest.raises(QueryError, match="two nodes"):
            Path(("A",), ())
        with pytest.raises(QueryError, match="repeat"):
            Path(("A", "B", "A"), (TripleClass.CHAIN,))
        with pytest.raises(QueryError, match="triple class"):
            Path(("A", "B", "C"), ())


class TestAdmissibility:
    def test_artwork_full_set_admissible(self, artwork_dag):
        res = is_admissible(artwork_dag, "X", "Z", {"A", "G", "M"})
        assert res == AdjustmentResult(True)

    def test_artwork_witness_for_missing_artist(self, artwork_dag):
        res = is_admissible(artwork_dag, "X", "Z", {"G", "M"})
        assert not res.admissible
        assert res.violated_condition is ViolatedCondition.UNBLOCKED_BACKDOOR
        assert res.witness_path.arrow_str(artwork_dag) == "X <- A -> Z"

    def test_descendant_violation(self):
        dag = make_dag([("C", "X"), ("C", "Z"), ("X", "M"), ("M", "Z")])
        res = is_admissible(dag, "X", "Z", {"M"})
        assert res.violated_condition is ViolatedCondition.DESCENDANT
        assert res.witness_path is None
        assert minimal_adjustment_sets(dag, "X", "Z") == [frozenset({"C"})]

    def test_latent_candidate_rejected(self, latent_artwork_dag):
        with pytest.raises(QueryError, match="latent"):
            is_admissible(latent_artwork_dag, "X", "Z", {"E"})

    def test_exposure_in_candidate_rejected(self, artwork_dag):
        with pytest.raises(QueryError, match="exclude"):
            is_admissible(artwork_dag, "X", "Z", {"X"})

    def test_result_witness_invariant(self):
        with pytest.raises(QueryError, match="witness"):
            AdjustmentResult(False, ViolatedCondition.UNBLOCKED_BACKDOOR, None)

    def test_matches_oracle_on_random_dags(self):
        rng = random.Random(41)
        for _ in range(40):
            nodes, edges = random_dag(rng, rng.randint(2, 6), 0.4)
            dag = CausalDag("g", tuple(DagNode(m, m) for m in nodes), tuple(edges))
            x, z = rng.sample(nodes, 2)
            rest = [n for n in nodes if n not in (x, z)]
            cand = set(rng.sample(rest, rng.randint(0, len(rest))))
            got = is_admissible(dag, x, z, cand).admissible
            assert got == admissible_oracle(nodes, edges, x, z, cand)


class TestMinimalSets:
    def test_artwork_unique_minimal_set(self, artwork_dag):
        assert minimal_adjustment_sets(artwork_dag, "X", "Z") == [
            frozenset({"A", "G", "M"})
        ]
        assert is_identifiable_via_backdoor(artwork_dag, "X", "Z")

    def test_latent_variant_not_identifiable(self, latent_artwork_dag):
        assert minimal_adjustment_sets(latent_artwork_dag, "X", "Z") == []
        assert not is_identifiable_via_backdoor(latent_artwork_dag, "X", "Z")

    def test_no_backdoor_means_empty_set_admissible(self):
        dag = make_dag([("X", "Z")])
        assert minimal_adjustment_sets(dag, "X", "Z") == [frozenset()]

    def test_matches_brute_force_oracle(self):
        rng = random.Random(43)
        checked = 0
        while checked < 30:
            n = rng.randint(2, 6)
            nodes, edges = random_dag(rng, n, 0.4)
            latent = set(rng.sample(nodes, rng.randint(0, n - 2))) if n > 2 else set()
            observed = sorted(set(nodes) - latent)
            if len(observed) < 2:
                continue
            x, z = rng.sample(observed, 2)
            dag = CausalDag(
                "g",
                tuple(
                    DagNode(m, m, NodeKind.LATENT if m in latent else NodeKind.OBSERVED)
                    for m in nodes
                ),
                tuple(edges),
            )
            got = minimal_adjustment_sets(dag, x, z)
            want = minimal_sets_oracle(nodes, edges, observed, x, z)
            assert got == want, (edges, latent, x, z)
            checked += 1

    def test_blocking_matches_trail_oracle(self, artwork_dag):
        nodes = sorted(artwork_dag.node_ids)
        edges = list(artwork_dag.edges)
        rng = random.Random(47)
        paths = backdoor_paths(artwork_dag, "X", "Z")
        for _ in range(40):
            cond = frozenset(
                rng.sample(["A", "G", "M"], rng.randint(0, 3))
            )
            for p in paths:
                got = path_is_blocked(artwork_dag, p, cond)
                assert got == trail_blocked(nodes, edges, p.nodes, cond)


class TestOracleSelfChecks:
    """Sanity-check the reference implementations on worked examples."""

    def test_trail_enumeration_counts(self, artwork_dag):
        nodes = sorted(artwork_dag.node_ids)
        trails = undirected_trails(nodes, list(artwork_dag.edges), "X", "Z")
        assert set(trails) == {
            ("X", "Z"),
            ("X", "A", "Z"),
            ("X", "A", "M", "Z"),
            ("X", "G", "Z"),
            ("X", "M", "Z"),
            ("X", "M", "A", "Z"),
        }

    def test_collider_descendant_unblocks(self):
        nodes = ["A", "B", "C", "D"]
        edges = [("A", "B"), ("C", "B"), ("B", "D")]
        trail = ("A", "B", "C")
        assert trail_blocked(nodes, edges, trail, set())
        assert not trail_blocked(nodes, edges, trail, {"D"})
