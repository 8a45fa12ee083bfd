import random

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from fluxcharge.generators import random_planar_circuit, random_torus_circuit
from fluxcharge.graph import (
    CircuitError,
    EdgeEnd,
    Element,
    build_circuit,
    embed,
    fundamental_cycles,
    make_rotation,
    same_rotation,
    spanning_tree,
    trace_faces,
    with_topological_loops,
)
from fluxcharge.linalg import rank

from helpers import (
    FIG1A_B,
    FIG1B_B,
    FIG3_A,
    FIG3_B,
    FIG5_A,
    FIG5_B,
    K5_A,
    K5_B,
    ints,
    load,
)

C1 = Element("capacitor", 1)
L1 = Element("inductor", 1)


def triangle():
    c = build_circuit(["a", "b", "c"], [("e1", "a", "b", C1), ("e2", "b", "c", L1), ("e3", "c", "a", C1)])
    return c, make_rotation(c, {"a": ["e1", "e3"], "b": ["e1", "e2"], "c": ["e2", "e3"]})


def two_vertex_torus():
    # four parallel edges; this cyclic order at v2 puts the pair on the torus
    c = build_circuit(["v1", "v2"], [(f"e{i}", "v1", "v2", C1 if i % 2 else L1) for i in range(1, 5)])
    return c, make_rotation(c, {"v1": ["e1", "e2", "e3", "e4"], "v2": ["e1", "e2", "e3", "e4"]})


@pytest.mark.parametrize(
    "edges, message",
    [
        ([("e1", "a", "b", C1), ("e1", "b", "a", L1)], "duplicate id 'e1'"),
        ([("e1", "a", "z", C1)], "unknown vertex 'z'"),
        ([("e1", "a", "a", C1), ("e2", "a", "b", L1)], "'e1' is a self-loop"),
        ([("e1", "a", "b", C1), ("e2", "b", "a", L1)], "vertex 'c' is not reachable"),
    ],
)
def test_build_errors_name_the_offender(edges, message):
    with pytest.raises(CircuitError, match=message):
        build_circuit(["a", "b", "c"] if "reachable" in message else ["a", "b"], edges)


@pytest.mark.parametrize("value", [0, -1, "-1/2"])
def test_nonpositive_parameter(value):
    with pytest.raises(CircuitError, match="positive"):
        Element("capacitor", value)


def test_unknown_kind():
    with pytest.raises(CircuitError, match="unknown element kind 'resistor'"):
        Element("resistor", 1)


def test_element_classes():
    assert Element("phase_slip", 2).branch_class == "C"
    assert Element("josephson", 2).branch_class == "I"
    assert not Element("josephson", 2).is_linear


def test_edge_end_twin_and_sign():
    e = EdgeEnd("e1", "tail")
    assert e.twin == EdgeEnd("e1", "head")
    assert e.sign == 1 and e.twin.sign == -1


def test_triangle_has_two_faces():
    c, r = triangle()
    ls = trace_faces(c, r)
    assert len(ls.faces) == 2 and ls.genus == 0


def test_two_vertex_torus():
    c, r = two_vertex_torus()
    ls = trace_faces(c, r)
    assert (len(ls.faces), ls.genus) == (2, 1)
    ec = embed(c, r)
    assert len(ec.loops.topological) == 2
    assert rank(ec.B) == len(ec.loops.loops) - 1


def test_rotation_missing_vertex():
    c, _ = triangle()
    with pytest.raises(CircuitError, match="no cyclic order for vertex 'c'"):
        make_rotation(c, {"a": ["e1", "e3"], "b": ["e1", "e2"]})


def test_rotation_unknown_edge():
    c, _ = triangle()
    with pytest.raises(CircuitError, match="unknown edge 'e9'"):
        make_rotation(c, {"a": ["e1", "e9"], "b": ["e1", "e2"], "c": ["e2", "e3"]})


def test_rotation_missing_end():
    c, _ = triangle()
    with pytest.raises(CircuitError, match="missing edge-end"):
        embed(c, {"a": ["e1"], "b": ["e1", "e2"], "c": ["e2", "e3"]})


def test_given_face_must_exist():
    c, r = triangle()
    with pytest.raises(CircuitError):
        trace_faces(c, r, [("x", (("e1", 1), ("e2", -1), ("e3", 1))), ("y", (("e1", -1),))])


@pytest.mark.parametrize(
    "name, A, B",
    [("fig3", FIG3_A, FIG3_B), ("fig5a", FIG5_A, FIG5_B), ("k5_torus", K5_A, K5_B)],
)
def test_printed_incidence_and_orientation(name, A, B):
    _, ec = load(name)
    assert ints(ec.A) == A
    assert ints(ec.B) == B


@pytest.mark.parametrize("name, B, genus", [("fig1a", FIG1A_B, 0), ("fig1b", FIG1B_B, 1)])
def test_printed_orientation_matrices(name, B, genus):
    _, ec = load(name)
    assert ints(ec.B) == B
    assert ec.genus == genus


def test_self_dual_circuit_has_four_faces():
    _, ec = load("fig3")
    assert len(ec.loops.faces) == 4
    assert ec.loops.labels == ("l1", "l2", "l3", "l4")


def test_k5_torus_loops():
    _, ec = load("k5_torus")
    assert ec.genus == 1
    assert len(ec.loops.faces) == 5
    assert [l.label for l in ec.loops.topological] == ["l6", "l7"]


def test_automatic_topological_loops_are_independent():
    _, ec = load("k5_torus_default")
    c = ec.circuit
    auto = embed(c, ec.rotation, [(f.label, f.walk) for f in ec.loops.faces])
    assert len(auto.loops.topological) == 2
    assert rank(auto.B) == 6
    assert set(auto.loops.labels) == {"l1", "l2", "l3", "l4", "l5", "l6", "l7"}


def test_topological_loop_validation():
    _, ec = load("k5_torus")
    ls = trace_faces(ec.circuit, ec.rotation)
    c = ec.circuit
    with pytest.raises(CircuitError, match="genus 1 needs 2"):
        with_topological_loops(c, ls, [("t1", (("e1", 1), ("e2", 1), ("e3", 1)))])
    with pytest.raises(CircuitError, match="does not close up"):
        with_topological_loops(c, ls, [("t1", (("e1", 1), ("e2", 1))), ("t2", (("e4", 1), ("e5", 1), ("e6", 1)))])
    # a face boundary is not a topological loop
    face = ls.faces[0]
    with pytest.raises(CircuitError, match="dependent"):
        with_topological_loops(c, ls, [("t1", face.walk), ("t2", (("e4", 1), ("e5", 1), ("e6", 1)))])


def test_fundamental_cycles_count_matches_networkx():
    for name in ("fig3", "fig5a", "k5_torus", "fig1b"):
        _, ec = load(name)
        c = ec.circuit
        g = nx.MultiGraph()
        g.add_nodes_from(c.vertices)
        g.add_edges_from((e.tail, e.head) for e in c.edges)
        cycles = list(fundamental_cycles(c))
        assert len(cycles) == len(c.edges) - len(c.vertices) + nx.number_connected_components(g)
        tree = spanning_tree(c)
        assert tree is not None


def test_same_rotation_ignores_start():
    c, r = triangle()
    rotated = make_rotation(c, {"a": ["e3", "e1"], "b": ["e2", "e1"], "c": ["e3", "e2"]})
    assert same_rotation(r, rotated)


def _check_structure(ec):
    A, B = ec.A, ec.B
    c = ec.circuit
    assert (B @ A).is_zero()
    assert all(sum(r) == 0 for r in A.rows())
    V, E, F = len(c.vertices), len(c.edges), len(ec.loops.faces)
    assert V - E + F == 2 - 2 * ec.genus
    assert rank(A) == V - 1
    assert rank(B) == len(ec.loops.loops) - 1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_planar_structure(seed):
    ec = random_planar_circuit(random.Random(seed), max_vertices=15)
    assert ec.genus == 0
    _check_structure(ec)
    g = nx.MultiGraph()
    g.add_edges_from((e.tail, e.head) for e in ec.circuit.edges)
    assert nx.check_planarity(nx.Graph(g))[0]


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_torus_structure(seed):
    ec = random_torus_circuit(random.Random(seed))
    assert ec.genus == 1
    assert len(ec.loops.topological) == 2
    _check_structure(ec)
