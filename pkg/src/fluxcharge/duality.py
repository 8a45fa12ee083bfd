"""Planar duals of embedded circuits and the Hamiltonian duality map.

The dual circuit has one vertex per face (same label), keeps every edge id,
and labels its faces after the primal vertices. Edge e* runs from the face
that traverses e backwards to the face that traverses it forwards, so the
dual incidence matrix is exactly B^T, and capacitors and inductors (and
junctions and phase slips) trade places with their parameter unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product

from .graph import (
    EdgeEnd,
    Element,
    EmbeddedCircuit,
    RotationSystem,
    build_circuit,
    embed,
)
from .linalg import RationalMatrix
from .reduction import CosineTerm, HamiltonianExpr, NullClassification, pair_labels

DUAL_KIND = {
    "capacitor": "inductor",
    "inductor": "capacitor",
    "josephson": "phase_slip",
    "phase_slip": "josephson",
}


class DualityError(ValueError):
    """The circuit has no planar dual."""


@dataclass(frozen=True)
class DualMap:
    loop_to_vertex: dict  # primal loop label -> dual vertex label
    vertex_to_loop: dict  # primal vertex label -> dual loop label
    edge_to_edge: dict  # primal edge id -> (dual edge id, orientation sign)


def _membership(ec: EmbeddedCircuit):
    B = ec.B
    out = {}
    for e in B.col_labels:
        col = B.col(e)
        out[e] = [l for l, x in zip(B.row_labels, col) if x]
    return out


def dual_circuit(ec: EmbeddedCircuit):
    """Return (dual EmbeddedCircuit, DualMap). Raises DualityError off the sphere."""
    B = ec.B
    members = _membership(ec)
    for e in ec.circuit.edge_ids:
        if len(members[e]) != 2:
            listed = ", ".join(members[e]) if members[e] else "none"
            raise DualityError(
                f"B^T is not a valid incidence matrix: edge {e} lies on {len(members[e])} loops ({listed})"
            )
    if ec.genus != 0:
        raise DualityError(f"B^T is not a valid incidence matrix: the embedding has genus {ec.genus}")

    c = ec.circuit
    faces = ec.loops.faces
    taken = set(c.edge_ids)
    vname = {}
    for f in faces:
        name = f.label
        while name in taken:
            name += "*"
        taken.add(name)
        vname[f.label] = name
    fname = {}
    used = set()
    for v in c.vertices:
        name = v
        while name in used:
            name += "*"
        used.add(name)
        fname[v] = name

    edges = []
    for e in c.edges:
        col = dict(zip(B.row_labels, B.col(e.id)))
        tail = next(l for l, x in col.items() if x == -1)
        head = next(l for l, x in col.items() if x == 1)
        el = Element(DUAL_KIND[e.element.kind], e.element.parameter)
        edges.append((e.id, vname[tail], vname[head], el))
    dc = build_circuit([vname[f.label] for f in faces], edges)

    # the dual rotation at a face vertex lists the edges in walk order
    order = {}
    for f in faces:
        ends = []
        for eid, s in f.walk:
            ends.append(EdgeEnd(eid, "head" if s == 1 else "tail"))
        order[vname[f.label]] = tuple(ends)
    rot = RotationSystem(order)

    # pin dual face labels and order to the primal vertices
    from .graph import trace_faces

    traced = trace_faces(dc, rot)
    given = []
    A = ec.A
    for v in c.vertices:
        want = {eid: int(x) for eid, x in zip(A.row_labels, A.col(v)) if x}
        match = next((f for f in traced.faces if f.edge_signs() == want), None)
        if match is None:
            raise DualityError(f"internal: no dual face matches vertex {v!r}")
        given.append((fname[v], match.walk))
    dual = embed(dc, rot, given)
    dm = DualMap(
        {f.label: vname[f.label] for f in faces},
        {v: fname[v] for v in c.vertices},
        {e: (e, 1) for e in c.edge_ids},
    )
    return dual, dm


def dual_connection_check(M: RationalMatrix, M_dual: RationalMatrix, dm: DualMap) -> bool:
    """True iff M_dual = -M^T under the label correspondence, exactly."""
    for l in M.row_labels:
        for v in M.col_labels:
            dv = dm.loop_to_vertex.get(l)
            dl = dm.vertex_to_loop.get(v)
            if dv not in M_dual.col_labels or dl not in M_dual.row_labels:
                return False
            if M_dual[dl, dv] != -M[l, v]:
                return False
    return M_dual.shape == (M.ncols, M.nrows)


def hamiltonian_dual(h: HamiltonianExpr) -> HamiltonianExpr:
    """H*(Q, Phi) = H(-Phi, Q)."""
    n = h.pair_count
    qn, pn = pair_labels(n)
    KQ = h.quadratic_Phi.relabel(qn, qn)
    KP = h.quadratic_Q.relabel(pn, pn)
    cos = []
    for t in h.cosine_terms:
        if t.space == "Q":
            cos.append(CosineTerm(t.coefficient, "Phi", tuple(-w for w in t.weights)))
        else:
            cos.append(CosineTerm(t.coefficient, "Q", t.weights))
    return HamiltonianExpr(KQ, KP, tuple(cos), h.constant)


def is_self_dual(h: HamiltonianExpr) -> bool:
    """Literal self-duality: H(-Phi, Q) equals H(Q, Phi) coefficient by coefficient."""
    return hamiltonian_dual(h) == h


def relabel_pairs(h: HamiltonianExpr, perm, signs) -> HamiltonianExpr:
    """Apply the point transformation x_i -> signs[i] * x'_perm[i] to both Q and Phi.

    This is canonical because the same signed permutation acts on Q and Phi.
    """
    n = h.pair_count
    P = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        P[i][perm[i]] = Fraction(signs[i])
    Pm = RationalMatrix.from_rows(P, range(n), range(n))
    qn, pn = pair_labels(n)

    def conj(K, labels):
        K0 = K.relabel(range(n), range(n))
        return (Pm.T @ K0 @ Pm).relabel(labels, labels)

    cos = []
    for t in h.cosine_terms:
        w = [Fraction(0)] * n
        for i in range(n):
            w[perm[i]] += signs[i] * t.weights[i]
        cos.append(CosineTerm(t.coefficient, t.space, tuple(w)))
    return HamiltonianExpr(conj(h.quadratic_Q, qn), conj(h.quadratic_Phi, pn), tuple(cos), h.constant)


def self_dual_relabeling(h: HamiltonianExpr, max_pairs=7):
    """A signed permutation of the pairs taking H*(Q, Phi) back to H, or None.

    This is the exact, non-trivial weaker notion of self-duality: the dual
    Hamiltonian coincides with the original after relabeling the canonical
    pairs and flipping signs of some of them.
    """
    n = h.pair_count
    if n > max_pairs:
        raise ValueError(f"relabeling search over {n} pairs is too large")
    hd = hamiltonian_dual(h)
    for perm in permutations(range(n)):
        for signs in product((1, -1), repeat=n):
            if relabel_pairs(hd, perm, signs) == h:
                return perm, signs
    return None


@dataclass(frozen=True)
class PlanarizabilityReport:
    loops: tuple  # (label, class of all its edges or None)
    effectively_planar: bool


def planarizability_report(ec: EmbeddedCircuit, nc: NullClassification = None) -> PlanarizabilityReport:
    """For each topological loop, whether all its edges share one element class."""
    entries = []
    for l in ec.loops.topological:
        classes = {ec.circuit.edge(eid).element.branch_class for eid, _ in l.walk}
        entries.append((l.label, classes.pop() if len(classes) == 1 else None))
    return PlanarizabilityReport(tuple(entries), all(c is not None for _, c in entries))


def dual_variable_choice(D: RationalMatrix, S: RationalMatrix, dm: DualMap):
    """Transport (D, S) to the dual: Q* = -Phi and Phi* = Q, i.e. D* = -S, S* = D."""
    q_rows = tuple(
        tuple((dm.vertex_to_loop[v], -x) for v, x in zip(S.col_labels, row) if x) for row in S.rows()
    )
    p_rows = tuple(
        tuple((dm.loop_to_vertex[l], x) for l, x in zip(D.col_labels, row) if x) for row in D.rows()
    )
    return q_rows, p_rows
