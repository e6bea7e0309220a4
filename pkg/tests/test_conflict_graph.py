import pytest

from chronolabel.conflict_graph import (
    SizeLimitExceeded,
    build_graph,
    candidate_conflict,
)
from chronolabel.model import make_activity_set
from chronolabel.validation import AmMode, check_valid

from conftest import random_instance


def intervals_of(graph, label):
    return sorted(
        (c.interval.start, c.interval.end) for c in graph.candidates if c.label_id == label
    )


class TestBuildGraph:
    def test_am1(self, i1):
        graph = build_graph(i1, AmMode.AM1)
        assert len(graph) == 3
        assert all(len(m) == 1 for m in graph.clusters.values())
        assert graph.edge_count == 1
        c1 = next(c for c in graph.candidates if c.label_id == "l1")
        c2 = next(c for c in graph.candidates if c.label_id == "l2")
        assert graph.adjacent(c1.id, c2.id)

    def test_am2(self, i1):
        graph = build_graph(i1, AmMode.AM2)
        assert len(graph) == 5
        assert intervals_of(graph, "l1") == [(0.0, 4.0), (0.0, 10.0)]
        assert intervals_of(graph, "l2") == [(0.0, 4.0), (0.0, 10.0)]
        assert intervals_of(graph, "l3") == [(2.0, 8.0)]

    def test_am3(self, i1):
        graph = build_graph(i1, AmMode.AM3)
        assert len(graph) == 7
        assert intervals_of(graph, "l2") == [(0.0, 4.0), (0.0, 10.0), (6.0, 10.0)]

    def test_candidate_ids_deterministic(self, i1):
        graph = build_graph(i1, AmMode.AM3)
        keys = [(c.label_id, c.presence_index, c.interval.start, c.interval.end) for c in graph.candidates]
        assert keys == sorted(keys)
        assert [c.id for c in graph.candidates] == list(range(len(graph)))

    def test_clusters_are_cliques(self):
        for seed in range(20):
            instance = random_instance(seed)
            graph = build_graph(instance, AmMode.AM3)
            for members in graph.clusters.values():
                for i, u in enumerate(members):
                    for v in members[i + 1 :]:
                        assert graph.adjacent(u, v)

    def test_graph_symmetric_and_loop_free(self):
        for seed in range(20):
            graph = build_graph(random_instance(seed), AmMode.AM3)
            for u in range(len(graph)):
                assert u not in graph.neighbors(u)
                for v in graph.neighbors(u):
                    assert u in graph.neighbors(v)

    def test_candidate_interval_containment(self):
        for seed in range(20):
            instance = random_instance(seed)
            for mode in AmMode:
                graph = build_graph(instance, mode)
                for c in graph.candidates:
                    presence = instance.presences_of(c.label_id)[c.presence_index]
                    assert presence.contains(c.interval)
                    assert c.interval.length > 0

    def test_candidate_nesting_am1_am2_am3(self):
        for seed in range(20):
            instance = random_instance(seed)
            sets = {
                mode: {
                    (c.label_id, c.presence_index, c.interval.start, c.interval.end)
                    for c in build_graph(instance, mode).candidates
                }
                for mode in AmMode
            }
            assert sets[AmMode.AM1] <= sets[AmMode.AM2] <= sets[AmMode.AM3]

    def test_size_guard(self, i1):
        with pytest.raises(SizeLimitExceeded):
            build_graph(i1, AmMode.AM3, size_limit=3)

    def test_independent_set_passes_check_valid(self):
        for seed in range(30):
            instance = random_instance(seed)
            graph = build_graph(instance, AmMode.AM3)
            selection = []
            for v in range(len(graph)):
                if all(not graph.adjacent(v, u) for u in selection):
                    selection.append(v)
            phi = graph.to_activity_set(selection)
            assert check_valid(instance, phi).valid


class TestCandidateConflict:
    def test_boundary_touch(self, i1):
        graph = build_graph(i1, AmMode.AM2)
        c1 = next(c for c in graph.candidates if c.label_id == "l1" and c.interval.end == 10.0)
        c2_short = next(c for c in graph.candidates if c.label_id == "l2" and c.interval.end == 4.0)
        c2_full = next(c for c in graph.candidates if c.label_id == "l2" and c.interval.end == 10.0)
        assert not candidate_conflict(i1, c1, c2_short)
        assert candidate_conflict(i1, c1, c2_full)

    def test_no_conflict_entry(self, i1):
        graph = build_graph(i1, AmMode.AM1)
        c1 = next(c for c in graph.candidates if c.label_id == "l1")
        c3 = next(c for c in graph.candidates if c.label_id == "l3")
        assert not candidate_conflict(i1, c1, c3)


def test_dimacs_dump(i1):
    graph = build_graph(i1, AmMode.AM1)
    text = graph.dump_dimacs()
    lines = text.strip().splitlines()
    assert lines[0].startswith("c ") and "AM1" in lines[0]
    assert sum(1 for l in lines if l.startswith("v ")) == 3
    assert sum(1 for l in lines if l.startswith("e ")) == 1
