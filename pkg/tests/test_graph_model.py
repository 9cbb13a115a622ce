import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fixture_doc, sub, timer
from treesched.errors import CycleError, SchemaError
from treesched.generate import GenParams, generate
from treesched.graph_model import (
    AppGraph,
    CallbackKind,
    CallbackSpec,
    path_counts,
    unfold,
    validate,
)


def nx_graph(graph):
    g = nx.DiGraph()
    g.add_nodes_from(cb.id for cb in graph.callbacks)
    g.add_edges_from((e.publisher, e.subscriber) for e in graph.edges)
    return g


def enumerate_paths(graph):
    """Brute-force oracle: count every root-to-callback path."""
    g = nx_graph(graph)
    roots = [cb.id for cb in graph.callbacks if cb.is_root]
    counts = {}
    for cb in graph.callbacks:
        n = 1 if cb.is_root else 0
        for r in roots:
            if r != cb.id:
                n += sum(1 for _ in nx.all_simple_paths(g, r, cb.id))
        counts[cb.id] = n
    return counts


def test_sample_application_validates():
    doc = fixture_doc("sample_app")
    report = validate(doc.graph)
    assert report.ok
    assert report.callbacks == 7


def test_empty_graph_validates():
    assert validate(AppGraph()).ok
    assert unfold(AppGraph()).trees == ()


def test_two_cycle_is_reported():
    graph = AppGraph(
        (timer("T", 10, 1, pubs=["ta"]), sub("A", "ta", 1, pubs=["tb"]), sub("B", "tb", 1, pubs=["ta"])),
        ("ta", "tb"),
    )
    with pytest.raises(CycleError) as exc:
        validate(graph)
    oracle = {n for edge in nx.find_cycle(nx_graph(graph)) for n in edge[:2]}
    assert set(exc.value.cycle) == oracle == {"A", "B"}


def test_self_loop_is_a_cycle():
    graph = AppGraph((timer("T", 10, 1, pubs=["x"]), sub("S", "x", 1, pubs=["x"])), ("x",))
    with pytest.raises(CycleError) as exc:
        validate(graph)
    assert exc.value.cycle == ["S"]


@pytest.mark.parametrize("bad, field", [
    (timer("T", 10, 0), "wcet"),
    (timer("T", 0, 1), "period"),
    (timer("T", 10, 1, deadline=11), "relative_deadline"),
    (timer("T", 10, 1, pubs=["nope"]), "published_topics"),
    (timer("T", 10, 1, pubs=["x", "x"]), "published_topics"),
    (CallbackSpec("E", CallbackKind.EXTERNAL_SPORADIC, 1, min_interarrival=10, arrivals=(0, 5)), "arrivals"),
])
def test_schema_errors_name_the_field(bad, field):
    with pytest.raises(SchemaError) as exc:
        validate(AppGraph((bad,), ("x",)))
    assert exc.value.field.endswith(field)


def test_subscription_without_publisher_is_rejected():
    with pytest.raises(SchemaError, match="external_sporadic"):
        validate(AppGraph((sub("S", "x", 1),), ("x",)))


def test_duplicate_ids_rejected():
    with pytest.raises(SchemaError):
        validate(AppGraph((timer("T", 10, 1), timer("T", 20, 1))))


def test_synthetic_50_unfolds_to_three_trees_of_three():
    forest = unfold(fixture_doc("synthetic_50").graph)
    assert len(forest.trees) == 3
    assert forest.node_count == 9
    for tree in forest.trees:
        assert len(tree.nodes) == 3
        assert tree.root.children == (1, 2)
        assert [tree.nodes[c].callback for c in tree.root.children] == ["sub_a", "sub_b"]
    assert [t.period for t in forest.trees] == [25, 41, 51]
    assert forest.duplication_counts()["sub_a"] == 3


def test_chain_unfolds_to_itself():
    graph = AppGraph((timer("T", 50, 1, pubs=["a"]), sub("A", "a", 2, pubs=["b"]), sub("B", "b", 3)),
                     ("a", "b"))
    forest = unfold(graph)
    (tree,) = forest.trees
    assert [(n.callback, n.parent, n.wcet) for n in tree.nodes] == [("T", None, 1), ("A", 0, 2), ("B", 1, 3)]


def test_diamond_duplicates_the_join():
    graph = AppGraph((
        timer("T", 100, 1, pubs=["ta", "tb"]),
        sub("A", "ta", 2, pubs=["tc"]),
        sub("B", "tb", 2, pubs=["tc"]),
        sub("C", "tc", 5),
    ), ("ta", "tb", "tc"))
    forest = unfold(graph)
    (tree,) = forest.trees
    assert len(tree.nodes) == 5
    assert enumerate_paths(graph)["C"] == 2
    c_nodes = [n for n in tree.nodes if n.callback == "C"]
    assert {tree.nodes[n.parent].callback for n in c_nodes} == {"A", "B"}
    assert all(n.wcet == 5 for n in c_nodes)


def test_roots_carry_timing():
    graph = AppGraph((timer("T", 40, 1, phase=7, deadline=30),
                      CallbackSpec("E", CallbackKind.EXTERNAL_SPORADIC, 2, min_interarrival=15,
                                   arrivals=(3, 20))))
    t, e = unfold(graph).trees
    assert (t.period, t.phase, t.relative_deadline, t.sporadic) == (40, 7, 30, False)
    assert (e.period, e.relative_deadline, e.sporadic, e.arrivals) == (15, 15, True, (3, 20))
    assert list(e.release_times(100)) == [(0, 3), (1, 20)]
    assert list(t.release_times(100)) == [(0, 7), (1, 47), (2, 87)]


seeds = st.integers(min_value=0, max_value=10**6)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_unfolding_properties(seed):
    graph = generate(seed, GenParams(sporadic_prob=0.2)).graph
    forest = unfold(graph)
    roots = [cb for cb in graph.callbacks if cb.is_root]
    assert len(forest.trees) == len(roots)
    for tree in forest.trees:
        parents = [n.parent for n in tree.nodes]
        assert parents.count(None) == 1 and parents[0] is None
        # every node reaches the root, so the tree is connected
        for n in tree.nodes:
            seen, p = set(), n.id
            while p is not None:
                assert p not in seen
                seen.add(p)
                p = tree.nodes[p].parent
            assert 0 in seen
        assert tree.depth() <= 4
        assert all(len(n.children) <= 3 for n in tree.nodes)
    oracle = enumerate_paths(graph)
    assert forest.duplication_counts() == {k: v for k, v in oracle.items() if v}
    assert forest.node_count == sum(oracle.values()) == sum(path_counts(graph).values())
    # provenance is total, and regrouping by callback gives back the callback set
    assert set(forest.provenance) == {(t.index, n.id) for t in forest.trees for n in t.nodes}
    assert {cb for cb, _ in forest.provenance.values()} == {cb.id for cb in graph.callbacks}
    for (ti, ni), (cb, edge) in forest.provenance.items():
        node = forest.trees[ti].nodes[ni]
        assert node.callback == cb
        if edge is None:
            assert node.parent is None
        else:
            assert forest.trees[ti].nodes[node.parent].callback == edge.publisher


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_single_publisher_graphs_unfold_isomorphically(seed):
    graph = generate(seed, GenParams(share_prob=0.0)).graph
    assert all(len(graph.publishers(cb.subscribed_topic)) == 1
               for cb in graph.callbacks if not cb.is_root)
    forest = unfold(graph)
    assert forest.node_count == len(graph.callbacks)
    tree_edges = {(t.nodes[n.parent].callback, n.callback) for t in forest.trees for n in t.nodes[1:]}
    assert tree_edges == {(e.publisher, e.subscriber) for e in graph.edges}
