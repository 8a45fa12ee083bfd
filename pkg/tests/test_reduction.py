import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import example, given, settings, strategies as st

from fluxcharge.dynamics import normal_mode_frequencies
from fluxcharge.generators import random_planar_circuit, random_torus_circuit
from fluxcharge.graph import Element, build_circuit, embed
from fluxcharge.linalg import RationalMatrix, rank
from fluxcharge.netlist import document_embedded, parse_netlist
from fluxcharge.reduction import (
    CosineTerm,
    HamiltonianExpr,
    ReductionError,
    UnsupportedConstraint,
    analyze,
    build_lagrangian,
    classification_spans,
    classify_nulls,
    connection_matrix,
    dof_count,
    kinetic_form_residual,
)

from helpers import FIG3_M, FIG5_M, FIXTURES, K5_M, analysis, ints, load, netlist_text
from oracles import expr_of, nodal_frequencies, reference_hamiltonian

F = Fraction
EXPECTED_N = {
    "fig1a": 2, "fig1b": 4, "fig3": 2, "fig3_default": 2, "fig3_l2": 2,
    "fig5a": 3, "fig5b": 3, "k5_torus": 3, "k5_torus_default": 3, "lc": 1,
}


def pinned(rs):
    return [e.variable for e in rs.eliminations if e.fixed_by == "absent"]


@pytest.mark.parametrize("name, M", [("fig3", FIG3_M), ("fig5a", FIG5_M), ("k5_torus", K5_M)])
def test_printed_connection_matrix(name, M):
    _, ec = load(name)
    assert ints(connection_matrix(ec.A, ec.B, ec.circuit.classes())) == M


def test_connection_matrix_from_either_class_agrees():
    # M = sum over C of B A = -(sum over I of B A), because B A = 0
    _, ec = load("fig5a")
    c = ec.circuit
    flipped = {e: ("I" if k == "C" else "C") for e, k in c.classes().items()}
    M = connection_matrix(ec.A, ec.B, c.classes())
    assert connection_matrix(ec.A, ec.B, flipped).same_entries(-M)


@pytest.mark.parametrize("name", FIXTURES)
def test_pair_count(name):
    an = analysis(name)
    assert an.reduced.pair_count == EXPECTED_N[name] == rank(an.M)
    assert dof_count(an.ec, an.classification, an.M) == EXPECTED_N[name]


@pytest.mark.parametrize("name", FIXTURES)
def test_hamiltonian_matches_direct_elimination(name):
    rs = analysis(name).reduced
    H, Q, P = reference_hamiltonian(rs.lagrangian.ec, rs.D, rs.S, pinned(rs))
    assert sympy.expand(H - expr_of(rs.hamiltonian, Q, P)) == 0


@pytest.mark.parametrize("name", [n for n in FIXTURES if not n.startswith(("k5", "fig1b"))])
def test_modes_match_nodal_analysis(name):
    an = analysis(name)
    np.testing.assert_allclose(normal_mode_frequencies(an.hamiltonian), nodal_frequencies(an.ec), rtol=1e-10)


@pytest.mark.parametrize("name", FIXTURES)
def test_kinetic_term_is_canonical(name):
    rs = analysis(name).reduced
    assert kinetic_form_residual(rs).is_zero()
    assert ints(rs.D @ rs.Gq) == ints(RationalMatrix.identity(range(rs.pair_count)))
    assert rs.poisson == "{Phi_j, Q_i} = delta_ij"


def test_self_dual_circuit_classification():
    nc = analysis("fig3").classification
    assert [h.label for h in nc.capacitive_loops] == ["l3"]
    assert nc.inductive_loops == ()
    assert [c.vertices for c in nc.inductive_cuts] == [("v2",)]
    assert nc.capacitive_cuts == ()


def test_self_dual_circuit_eliminations():
    rs = analysis("fig3").reduced
    by_var = {e.variable: e for e in rs.eliminations}
    assert by_var["l3"].fixed_by == "constraint" and by_var["l3"].source == "capacitive loop l3"
    assert by_var["v2"].fixed_by == "constraint" and by_var["v2"].source == "inductive cut {v2}"
    assert by_var["l4"].fixed_by == by_var["v4"].fixed_by == "gauge"


def test_self_dual_circuit_quadratic_forms():
    # with Q1 = q2 - q4, Q2 = q2 - q1, Phi1 = phi1 - phi3, Phi2 = phi4 - phi1 and C = L = 1
    h = analysis("fig3").hamiltonian
    assert h.quadratic_Q.to_lists() == [[F(2, 3), F(-1, 3)], [F(-1, 3), F(2, 3)]]
    # the flux block carries a plus sign on the cross term; see the notes on the printed form
    assert h.quadratic_Phi.to_lists() == [[F(2, 3), F(1, 3)], [F(1, 3), F(2, 3)]]
    assert h.cosine_terms == () and h.constant == 0


def test_self_dual_circuit_printed_charge_part():
    # 1/(3C) (Q1^2 - Q1 Q2 + Q2^2)
    h = analysis("fig3").hamiltonian
    assert h.monomials("Q") == {(0, 0): F(1, 3), (0, 1): F(-1, 3), (1, 1): F(1, 3)}


def test_self_dual_circuit_flux_part_by_hand():
    # Eliminating phi2 from the node equation at v2 (three unit inductors)
    # gives phi2 = (phi1 + phi3 + phi4)/3; substitute into the inductive energy.
    p1, p3, p4, P1, P2 = sympy.symbols("p1 p3 p4 P1 P2")
    p2 = (p1 + p3 + p4) / 3
    E = ((p2 - p1) ** 2 + (p2 - p3) ** 2 + (p4 - p2) ** 2) / 2
    E = sympy.expand(E.subs({p1: P1, p3: 0, p4: P1 + P2}))
    h = analysis("fig3").hamiltonian
    assert E == sympy.expand(expr_of(h, [0, 0], [P1, P2]))
    assert E == sympy.expand((P1**2 + P1 * P2 + P2**2) / 3)


def test_four_junction_circuit_printed_hamiltonian():
    # all elements of unit value, so 1/L_sigma = 4
    an = analysis("fig5a")
    h = an.hamiltonian
    assert h.quadratic_Q.to_lists() == [[2, 0, 0], [0, 1, 0], [0, 0, 1]]
    P1, P2, P3 = P = sympy.symbols("P1:4")
    Ls = sympy.Rational(1, 4)
    printed = Ls / 2 * (P1**2 + (P1 - P2) ** 2 + P3**2 + P2**2 + (P1 + P3) ** 2 + (P1 - P2 + P3) ** 2)
    assert sympy.expand(printed - expr_of(h, [0, 0, 0], P)) == 0


def test_torus_circuit_printed_constraints():
    rs = analysis("k5_torus").reduced
    by_var = {e.variable: e.expression for e in rs.eliminations}
    assert by_var["l6"] == (F(2, 3), F(-1, 3), F(1, 3))
    assert by_var["l7"] == (F(-1, 3), F(-2, 3), F(-1))


def test_torus_circuit_printed_energy():
    h = analysis("k5_torus").hamiltonian
    Q1, Q2, Q3, P1, P2, P3 = sympy.symbols("Q1:4 P1:4")
    q6 = (2 * Q1 - Q2 + Q3) / 3
    q7 = (-Q1 - 2 * Q2 - 3 * Q3) / 3
    printed = (
        ((q6 - Q1) ** 2 + (q6 - Q1 - Q3) ** 2 + (Q2 + q6) ** 2) / 2
        + ((q7 + Q1 + Q2 + Q3) ** 2 + (q7 + Q2 + Q3) ** 2 + (q7 + Q3) ** 2) / 2
        + (P2**2 + P1**2 + (P3 - P1) ** 2 + (P2 - P3) ** 2) / 2
    )
    assert sympy.expand(printed - expr_of(h, [Q1, Q2, Q3], [P1, P2, P3])) == 0


def test_constraint_sources_name_topological_loops():
    rs = analysis("k5_torus").reduced
    srcs = {e.source for e in rs.eliminations if e.fixed_by == "constraint"}
    assert srcs == {"capacitive loops l6; l7"}


def test_null_classification_spans_both_kernels():
    for name in FIXTURES:
        an = analysis(name)
        assert classification_spans(an.classification, an.M)


@pytest.mark.parametrize("kind, edge", [("josephson", "e1"), ("phase_slip", "e3")])
def test_nonlinear_constraint_is_unsupported(kind, edge):
    doc, _ = load("fig3")
    edges = tuple(e if e.id != edge else e.__class__(e.id, e.tail, e.head, kind, e.value) for e in doc.edges)
    ec = document_embedded(doc.__class__(doc.version, doc.vertices, edges, doc.embedding, doc.faces, None, None))
    with pytest.raises(UnsupportedConstraint, match=f"'{edge}'"):
        analyze(ec)


def test_nonlinear_element_outside_constraints():
    ec = document_embedded(parse_netlist(netlist_text(
        ["v1", "v2"],
        [("e1", "v1", "v2", "capacitor", 1), ("e2", "v1", "v2", "josephson", 3)],
        {"v1": ["e2", "e1"], "v2": ["e2", "e1"]},
    )))
    h = analyze(ec).hamiltonian
    assert h.quadratic_Phi.to_lists() == [[0]]
    assert h.cosine_terms == (CosineTerm(F(3), "Phi", (F(1),)),)


def test_choice_with_wrong_pair_count():
    doc, ec = load("fig3")
    q, phi = doc.variable_choice
    with pytest.raises(ReductionError, match="defines 1 pairs"):
        analyze(ec, (q[:1], phi[:1]))


def test_non_canonical_choice():
    doc, ec = load("fig3")
    q, phi = doc.variable_choice
    doubled = tuple((lab, 2 * c) for lab, c in q[0])
    with pytest.raises(ReductionError, match="not canonical"):
        analyze(ec, ((doubled,) + q[1:], phi))


def test_dependent_choice():
    doc, ec = load("fig3")
    q, phi = doc.variable_choice
    with pytest.raises(ReductionError, match="independent"):
        analyze(ec, ((q[0], q[0]), phi))


def test_pivot_preference_changes_coordinates_not_physics():
    _, ec = load("fig5a")
    hi = analyze(ec, pivot="highest").reduced
    lo = analyze(ec, pivot="lowest").reduced
    cons = lambda rs: [e.variable for e in rs.eliminations if e.fixed_by == "constraint"]
    assert cons(hi) == ["v2"] and cons(lo) == ["v1"]
    np.testing.assert_allclose(normal_mode_frequencies(hi.hamiltonian), normal_mode_frequencies(lo.hamiltonian))
    with pytest.raises(ValueError, match="pivot"):
        analyze(ec, pivot="middle")


def test_cosine_terms_are_canonical():
    z = RationalMatrix.from_rows([[0]], ["Q1"], ["Q1"])
    h = HamiltonianExpr(z, z, (CosineTerm(F(1), "Phi", (F(-1),)), CosineTerm(F(2), "Phi", (F(1),)), CosineTerm(F(5), "Q", (F(0),))))
    assert h.cosine_terms == (CosineTerm(F(3), "Phi", (F(1),)),)
    assert h.constant == -5
    with pytest.raises(ValueError, match="symmetric"):
        HamiltonianExpr(RationalMatrix([[1, 2], [0, 1]]), RationalMatrix([[1, 0], [0, 1]]))


def test_energy_terms_use_edge_rows():
    _, ec = load("fig3")
    lag = build_lagrangian(ec)
    t = lag.term("e3")
    assert (t.form, t.space, t.coefficient) == ("quadratic", "q", F(1, 2))
    assert t.argument == tuple(ec.B.col("e3"))
    assert lag.term("e1").argument == tuple(ec.A.row("e1"))


def _check_reduction(an):
    rs = an.reduced
    assert rs.pair_count == rank(an.M)
    assert kinetic_form_residual(rs).is_zero()
    assert classification_spans(an.classification, an.M)
    h = rs.hamiltonian
    if rs.pair_count == 0:
        return
    for K in (h.quadratic_Q, h.quadratic_Phi):
        ev = np.linalg.eigvalsh(np.array([[float(x) for x in r] for r in K.rows()]))
        assert ev.min() > -1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_planar_reductions(seed):
    ec = random_planar_circuit(random.Random(seed), max_vertices=12)
    an = analyze(ec)
    _check_reduction(an)
    # planar counting from loops and from cuts agrees with rank M
    nc = an.classification
    V, F_ = len(ec.circuit.vertices), len(ec.loops.faces)
    N = an.reduced.pair_count
    assert N == V - len(nc.inductive_cuts) - len(nc.capacitive_cuts) - 1
    assert N == F_ - len(nc.inductive_loops) - len(nc.capacitive_loops) - 1


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_torus_reductions(seed):
    _check_reduction(analyze(random_torus_circuit(random.Random(seed))))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
@example(343)  # no degrees of freedom left
def test_random_planar_against_direct_elimination(seed):
    ec = random_planar_circuit(random.Random(seed), max_vertices=6)
    rs = analyze(ec).reduced
    H, Q, P = reference_hamiltonian(ec, rs.D, rs.S, pinned(rs))
    assert sympy.expand(H - expr_of(rs.hamiltonian, Q, P)) == 0
