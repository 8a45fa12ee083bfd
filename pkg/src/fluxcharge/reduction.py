"""Connection matrix, null-vector classification and reduction to canonical pairs.

The Lagrangian is  L = q^T M phi_dot - sum_C E_e(B^T q)_e - sum_I E_e(A phi)_e
with loop charges q and node fluxes phi. Null vectors of M come from gauge
shifts, homogeneous loops and homogeneous cuts; removing them leaves an
invertible kinetic block and N = rank(M) canonical pairs (Q_i, Phi_i) with
{Phi_j, Q_i} = delta_ij.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .graph import EmbeddedCircuit, components, fundamental_cycles
from .linalg import (
    RationalMatrix,
    inverse,
    mat_vec,
    rank,
    rref,
    same_span,
    left_nullspace,
    right_nullspace,
    solve_affine,
    solve_unique_many,
)

_ZERO = Fraction(0)
_ONE = Fraction(1)

COMMUTATION = "[Phi_j, Q_i] = i*hbar*delta_ij"
POISSON = "{Phi_j, Q_i} = delta_ij"


class ReductionError(ValueError):
    """The circuit cannot be reduced (inconsistent data or bad variable choice)."""


class UnsupportedConstraint(ReductionError):
    """A homogeneous loop or cut contains a nonlinear element."""


def connection_matrix(A: RationalMatrix, B: RationalMatrix, classes) -> RationalMatrix:
    """M = 1/2 (B_C A_C - B_I A_I), checked against both one-sided forms."""
    if tuple(B.col_labels) != tuple(A.row_labels):
        raise ReductionError("A and B disagree on the edge list")
    cap = [e for e in A.row_labels if classes[e] == "C"]
    ind = [e for e in A.row_labels if classes[e] == "I"]
    if len(cap) + len(ind) != A.nrows:
        raise ReductionError("every edge needs a class 'C' or 'I'")
    from_c = B.submatrix(cols=cap) @ A.submatrix(rows=cap)
    from_i = B.submatrix(cols=ind) @ A.submatrix(rows=ind)
    M = (from_c - from_i).scale(Fraction(1, 2))
    if not (M.same_entries(from_c) and M.same_entries(-from_i)):
        raise ReductionError("capacitive and inductive forms of M disagree; B A is not zero")
    return M


@dataclass(frozen=True)
class HomogeneousLoop:
    branch_class: str  # "C" or "I"
    walk: tuple  # signed edge steps of the cycle
    vector: tuple  # coefficients over loop labels, reference loop coefficient 0
    provenance: str  # "face", "topological" or "combination"
    label: str = None  # loop label when the cycle is a single loop of the loop set


@dataclass(frozen=True)
class HomogeneousCut:
    branch_class: str  # class of every crossing edge
    vertices: tuple
    vector: tuple  # indicator over vertex labels


@dataclass(frozen=True)
class NullClassification:
    loop_labels: tuple
    vertex_labels: tuple
    capacitive_loops: tuple
    inductive_loops: tuple
    capacitive_cuts: tuple
    inductive_cuts: tuple
    gauge_left: tuple
    gauge_right: tuple


def _cycle_vector(ec: EmbeddedCircuit, walk):
    vec = [_ZERO] * len(ec.circuit.edges)
    for eid, s in walk:
        vec[ec.circuit.edge_position(eid)] += s
    return vec


def _loop_combinations(ec: EmbeddedCircuit, edge_vecs):
    """Solve B^T n = c for each cycle vector c, with the reference (last) face coefficient zero."""
    B = ec.B
    ref = ec.loops.faces[-1].label
    keep = [l for l in B.row_labels if l != ref]
    if not edge_vecs:
        return []
    try:
        sols = solve_unique_many(B.submatrix(rows=keep).T, edge_vecs)
    except ValueError:
        sols = [None]
    if any(s is None for s in sols):
        raise ReductionError("cycle is not a unique combination of loops")
    out = []
    for sol in sols:
        full = dict(zip(keep, sol))
        out.append(tuple(full.get(l, _ZERO) for l in B.row_labels))
    return out


def homogeneous_loops(ec: EmbeddedCircuit):
    """(Delta_C, Delta_I): cycle bases of the capacitor-only and inductor-only subgraphs."""
    out = {}
    kinds = {l.label: l.kind for l in ec.loops.loops}
    by_row = {}
    for l in reversed(ec.B.row_labels):
        r = tuple(ec.B.row(l))
        by_row[r] = by_row[tuple(-x for x in r)] = l
    for cls in ("C", "I"):
        found = []
        walks = list(fundamental_cycles(ec.circuit, lambda e, c=cls: e.element.branch_class == c))
        vecs = [_cycle_vector(ec, w) for w in walks]
        for walk, vec, n in zip(walks, vecs, _loop_combinations(ec, vecs)):
            first = next(x for x in n if x) if any(n) else _ONE
            if first < 0:
                n = tuple(-x for x in n)
                walk = tuple((eid, -s) for eid, s in reversed(walk))
                vec = [-x for x in vec]
            label = by_row.get(tuple(vec))
            provenance = kinds[label] if label else "combination"
            found.append(HomogeneousLoop(cls, tuple(walk), n, provenance, label))
        out[cls] = tuple(found)
    return out["C"], out["I"]


def homogeneous_cuts(ec: EmbeddedCircuit):
    """(Gamma_C, Gamma_I) from components of the one-class subgraphs.

    Components of the capacitor-only subgraph are bounded only by inductors
    (inductive cuts) and vice versa. The component holding the reference
    (last) vertex is dropped, since it is the complement of the others.
    """
    c = ec.circuit
    ref = c.vertices[-1]
    out = {}
    for cls, keep in (("I", "C"), ("C", "I")):
        pairs = [(e.tail, e.head) for e in c.edges if e.element.branch_class == keep]
        cuts = []
        for comp in components(c.vertices, pairs):
            if ref in comp:
                continue
            vec = tuple(_ONE if v in comp else _ZERO for v in c.vertices)
            cuts.append(HomogeneousCut(cls, tuple(comp), vec))
        out[cls] = tuple(cuts)
    return out["C"], out["I"]


def classify_nulls(ec: EmbeddedCircuit) -> NullClassification:
    dc, di = homogeneous_loops(ec)
    gc, gi = homogeneous_cuts(ec)
    face = {f.label for f in ec.loops.faces}
    left = tuple(_ONE if l in face else _ZERO for l in ec.loops.labels)
    right = tuple(_ONE for _ in ec.circuit.vertices)
    return NullClassification(ec.loops.labels, ec.circuit.vertices, dc, di, gc, gi, left, right)


def classification_spans(nc: NullClassification, M: RationalMatrix) -> bool:
    """Every listed vector annihilates M and together they span both null spaces."""
    lefts = [l.vector for l in nc.capacitive_loops + nc.inductive_loops] + [nc.gauge_left]
    rights = [c.vector for c in nc.capacitive_cuts + nc.inductive_cuts] + [nc.gauge_right]
    MT = M.T
    if any(any(mat_vec(MT, v)) for v in lefts) or any(any(mat_vec(M, v)) for v in rights):
        return False
    return (
        same_span(lefts, left_nullspace(M), M.nrows)
        and same_span(rights, right_nullspace(M), M.ncols)
        and len(lefts) == M.nrows - rank(M)
        and len(rights) == M.ncols - rank(M)
    )


@dataclass(frozen=True)
class EnergyTerm:
    edge: str
    form: str  # "quadratic" or "cosine"
    coefficient: Fraction  # 1/(2 parameter) for quadratic, parameter for cosine
    space: str  # "q" (loop charges) or "phi" (node fluxes)
    argument: tuple  # coefficients over the loop or vertex labels


@dataclass(frozen=True)
class SymmetricLagrangian:
    connection: RationalMatrix
    loop_labels: tuple
    vertex_labels: tuple
    energy_terms: tuple
    ec: EmbeddedCircuit

    def term(self, edge) -> EnergyTerm:
        return next(t for t in self.energy_terms if t.edge == edge)


def build_lagrangian(ec: EmbeddedCircuit) -> SymmetricLagrangian:
    c = ec.circuit
    M = connection_matrix(ec.A, ec.B, c.classes())
    BT = ec.B.T
    terms = []
    for e in c.edges:
        el = e.element
        if el.branch_class == "C":
            space, arg = "q", BT.row(e.id)
        else:
            space, arg = "phi", ec.A.row(e.id)
        if el.is_linear:
            terms.append(EnergyTerm(e.id, "quadratic", 1 / (2 * el.parameter), space, tuple(arg)))
        else:
            terms.append(EnergyTerm(e.id, "cosine", el.parameter, space, tuple(arg)))
    return SymmetricLagrangian(M, ec.loops.labels, c.vertices, tuple(terms), ec)


@dataclass(frozen=True)
class CosineTerm:
    """-coefficient * cos(weights . x) with x the Q or Phi vector."""

    coefficient: Fraction
    space: str  # "Q" or "Phi"
    weights: tuple


def _canonical_weights(w):
    w = tuple(Fraction(x) for x in w)
    first = next((x for x in w if x), None)
    if first is not None and first < 0:
        w = tuple(-x for x in w)
    return w


@dataclass(frozen=True)
class HamiltonianExpr:
    """H = 1/2 Q^T K_Q Q + 1/2 Phi^T K_Phi Phi - sum c cos(w . x) + constant.

    Cosine terms are kept in a canonical form (first nonzero weight positive,
    equal arguments merged, sorted) so that equal functions compare equal.
    """

    quadratic_Q: RationalMatrix
    quadratic_Phi: RationalMatrix
    cosine_terms: tuple = ()
    constant: Fraction = _ZERO

    def __post_init__(self):
        merged = {}
        const = Fraction(self.constant)
        for t in self.cosine_terms:
            w = _canonical_weights(t.weights)
            if not any(w):
                const -= t.coefficient
                continue
            key = (t.space, w)
            merged[key] = merged.get(key, _ZERO) + Fraction(t.coefficient)
        terms = tuple(
            CosineTerm(c, space, w) for (space, w), c in sorted(merged.items()) if c
        )
        object.__setattr__(self, "cosine_terms", terms)
        object.__setattr__(self, "constant", const)
        for K in (self.quadratic_Q, self.quadratic_Phi):
            if K.T.to_lists() != K.to_lists():
                raise ValueError("quadratic form must be symmetric")

    @property
    def pair_count(self):
        return self.quadratic_Q.nrows

    def monomials(self, space):
        """Coefficients of x_i^2 and x_i x_j (i < j) in 1/2 x^T K x."""
        K = self.quadratic_Q if space == "Q" else self.quadratic_Phi
        out = {}
        n = K.nrows
        for i in range(n):
            for j in range(i, n):
                c = K[i, i] / 2 if i == j else K[i, j]
                if c:
                    out[(i, j)] = c
        return out


def pair_labels(n):
    return [f"Q{i + 1}" for i in range(n)], [f"Phi{i + 1}" for i in range(n)]


@dataclass(frozen=True)
class Elimination:
    variable: str  # loop or vertex label
    space: str  # "q" or "phi"
    fixed_by: str  # "gauge", "constraint" or "absent"
    expression: tuple  # coefficients over Q (for q) or Phi (for phi)
    source: str = None  # which null vector caused it


@dataclass(frozen=True)
class ReducedSystem:
    lagrangian: SymmetricLagrangian
    classification: NullClassification
    pair_count: int
    D: RationalMatrix  # Q = D q
    S: RationalMatrix  # Phi = S phi
    Gq: RationalMatrix  # q = Gq Q on the constraint surface
    Gphi: RationalMatrix  # phi = Gphi Phi
    reduced_q: tuple
    reduced_phi: tuple
    eliminations: tuple
    hamiltonian: HamiltonianExpr
    user_choice: bool = False
    poisson: str = POISSON
    commutation: str = COMMUTATION


def _pivot_order(support, labels, skip, pivot):
    idx = [i for i in range(len(labels)) if labels[i] not in skip]
    sup = [i for i in idx if i in support]
    rest = [i for i in idx if i not in support]
    if pivot == "highest":
        return sorted(sup, reverse=True) + sorted(rest, reverse=True)
    if pivot == "lowest":
        return sorted(sup) + sorted(rest)
    raise ValueError(f"unknown pivot preference {pivot!r}")


def _reduce_side(labels, ref, constraints, constraint_sources, absent, absent_sources, pivot, names=(None, None)):
    """Coordinates for one side (charges or fluxes).

    ``constraints`` are rows over ``labels`` that must vanish; ``absent``
    are directions the Lagrangian does not see (dropped by setting a
    coordinate to zero). Returns (J, kept labels, records) where J maps the
    kept coordinates to the full vector, and records are
    (variable, fixed_by, source, row of J).
    """
    n = len(labels)
    ri = labels.index(ref)
    records = [(ref, "gauge", None)]
    free = [i for i in range(n) if i != ri]
    # express[i] = dict free-index -> coefficient for every coordinate
    express = {i: {i: _ONE} for i in free}
    express[ri] = {}

    if constraints:
        sub = RationalMatrix.from_rows([[r[i] for i in free] for r in constraints], [f"k{k}" for k in range(len(constraints))], [labels[i] for i in free])
        support = {free.index(i) for r in constraint_sources for i in r if i in free}
        order = _pivot_order(support, [labels[i] for i in free], set(), pivot)
        red, pivots = rref(sub, order)
        if len(pivots) != len(constraints):
            raise ReductionError("linear constraints are dependent")
        pset = set(pivots)
        for row, p in zip(red.rows(), pivots):
            expr = {}
            for j, x in enumerate(row):
                if x and j not in pset:
                    expr[free[j]] = -x
            express[free[p]] = expr
        for k, p in enumerate(pivots):
            records.append((labels[free[p]], "constraint", names[0]))
        free = [free[j] for j in range(len(free)) if j not in pset]

    if absent:
        # absent directions, written in the current free coordinates
        rows = [[vec[i] for i in free] for vec in absent]
        sub = RationalMatrix.from_rows(rows, [f"a{k}" for k in range(len(rows))], [labels[i] for i in free])
        support = {free.index(i) for vec in absent for i in range(n) if vec[i] and i in free}
        order = _pivot_order(support, [labels[i] for i in free], set(), pivot)
        _, pivots = rref(sub, order)
        if len(pivots) != len(absent):
            raise ReductionError("absent directions are dependent")
        dropped = [free[p] for p in pivots]
        for i in dropped:
            records.append((labels[i], "absent", names[1]))
        free = [i for i in free if i not in dropped]
        for i in dropped:
            express[i] = {}
        for i in list(express):
            express[i] = {j: c for j, c in express[i].items() if j not in dropped}

    kept = [labels[i] for i in free]
    J = RationalMatrix.from_rows(
        [[express[i].get(j, _ZERO) for j in free] for i in range(n)], labels, kept
    )
    return J, kept, records


def _source_name(kind, items):
    if not items:
        return None
    names = []
    for x in items:
        if isinstance(x, HomogeneousCut):
            names.append("{" + ", ".join(x.vertices) + "}")
        else:
            names.append(x.label or "cycle " + " ".join(("+" if s > 0 else "-") + e for e, s in x.walk))
    return f"{kind}{'s' if len(names) > 1 else ''} " + "; ".join(names)


def resolve_constraints(lag: SymmetricLagrangian, nc: NullClassification, variable_choice=None, pivot="highest") -> ReducedSystem:
    """Eliminate gauge, constrained and absent variables; build canonical pairs.

    ``variable_choice`` is an optional (Q rows, Phi rows) pair, each row a
    sequence of (label, coefficient); rows define Q_i = D q and Phi_i = S phi.
    ``pivot`` chooses which participating variable a constraint eliminates
    ("highest" or "lowest" index).
    """
    ec = lag.ec
    c = ec.circuit
    L, V = list(lag.loop_labels), list(lag.vertex_labels)
    M = lag.connection
    BT = ec.B.T
    A = ec.A

    # charge side
    q_constraints, q_sources = [], []
    for h in nc.capacitive_loops:
        edge_vec = mat_vec(BT, h.vector)
        row = [_ZERO] * len(L)
        for e, x in zip(c.edge_ids, edge_vec):
            if not x:
                continue
            el = c.edge(e).element
            if el.kind != "capacitor":
                raise UnsupportedConstraint(
                    f"capacitive loop through {e!r} contains a nonlinear element ({el.kind}); "
                    "nonlinear constraint equations are not supported"
                )
            col = ec.B.col(e)
            for k in range(len(L)):
                if col[k]:
                    row[k] += x * col[k] / el.parameter
        q_constraints.append(row)
        q_sources.append([k for k, x in enumerate(h.vector) if x])
    Jq, kept_q, q_rec = _reduce_side(
        L, ec.loops.faces[-1].label, q_constraints, q_sources,
        [h.vector for h in nc.inductive_loops], None, pivot,
        (_source_name("capacitive loop", nc.capacitive_loops), _source_name("inductive loop", nc.inductive_loops)),
    )

    # flux side
    p_constraints, p_sources = [], []
    for cut in nc.inductive_cuts:
        edge_vec = mat_vec(A, cut.vector)
        row = [_ZERO] * len(V)
        for e, x in zip(c.edge_ids, edge_vec):
            if not x:
                continue
            el = c.edge(e).element
            if el.kind != "inductor":
                raise UnsupportedConstraint(
                    f"inductive cut through {e!r} contains a nonlinear element ({el.kind}); "
                    "nonlinear constraint equations are not supported"
                )
            arow = A.row(e)
            for k in range(len(V)):
                if arow[k]:
                    row[k] += x * arow[k] / el.parameter
        p_constraints.append(row)
        p_sources.append([k for k, x in enumerate(cut.vector) if x])
    Jphi, kept_phi, p_rec = _reduce_side(
        V, V[-1], p_constraints, p_sources, [cut.vector for cut in nc.capacitive_cuts], None, pivot,
        (_source_name("inductive cut", nc.inductive_cuts), _source_name("capacitive cut", nc.capacitive_cuts)),
    )

    Mr = Jq.T @ M @ Jphi
    if Mr.nrows != Mr.ncols:
        raise ReductionError(f"reduced kinetic block is {Mr.nrows}x{Mr.ncols}, not square")
    N = Mr.nrows
    if rank(Mr) != N:
        raise ReductionError("reduced kinetic block is singular")
    qn, pn = pair_labels(N)

    if variable_choice is None:
        sel_q = RationalMatrix.from_rows(
            [[_ONE if l == k else _ZERO for l in L] for k in kept_q], kept_q, L
        )
        D = (Mr.T @ sel_q).relabel(row_labels=qn)
        S = RationalMatrix.from_rows(
            [[_ONE if v == k else _ZERO for v in V] for k in kept_phi], pn, V
        )
        user = False
    else:
        qrows, prows = variable_choice
        if len(qrows) != N or len(prows) != N:
            raise ReductionError(f"variable choice defines {len(qrows)} pairs but the circuit has {N}")
        D = _rows_matrix(qrows, qn, L, "Q")
        S = _rows_matrix(prows, pn, V, "Phi")
        user = True

    DJ = D @ Jq
    SJ = S @ Jphi
    if rank(DJ) != N or rank(SJ) != N:
        raise ReductionError("variable choice does not give independent coordinates on the constraint surface")
    if not (DJ.T @ SJ).same_entries(Mr):
        raise ReductionError("variable choice is not canonical: D^T S differs from M on the constraint surface")
    Gq = (Jq @ inverse(DJ)).relabel(col_labels=qn)
    Gphi = (Jphi @ inverse(SJ)).relabel(col_labels=pn)

    records = []
    for var, how, src in q_rec:
        records.append(Elimination(var, "q", how, tuple(Gq.row(var)), src))
    for var, how, src in p_rec:
        records.append(Elimination(var, "phi", how, tuple(Gphi.row(var)), src))

    H = _hamiltonian(lag, Gq, Gphi)
    return ReducedSystem(lag, nc, N, D, S, Gq, Gphi, tuple(kept_q), tuple(kept_phi), tuple(records), H, user)


def _rows_matrix(rows, row_labels, col_labels, what):
    data = []
    for row in rows:
        r = [_ZERO] * len(col_labels)
        for lab, coef in row:
            if lab not in col_labels:
                raise ReductionError(f"variable choice for {what} references unknown label {lab!r}")
            r[col_labels.index(lab)] += Fraction(coef)
        data.append(r)
    return RationalMatrix.from_rows(data, row_labels, col_labels)


def _quadratic_form(terms, N):
    """Sum of k w w^T over (k, w) pairs, accumulated in integers over a common denominator."""
    if not terms:
        return [[_ZERO] * N for _ in range(N)]
    den = 1
    for k, w in terms:
        for x in (k, *w):
            d = Fraction(x).denominator
            den = den * d // gcd(den, d)
    acc = [[0] * N for _ in range(N)]
    for k, w in terms:
        u = [int(x * den) for x in w]
        kk = int(k * den)
        nz = [i for i in range(N) if u[i]]
        for i in nz:
            ki = kk * u[i]
            row = acc[i]
            for j in nz:
                row[j] += ki * u[j]
    scale = den ** 3
    return [[Fraction(x, scale) for x in row] for row in acc]


def _hamiltonian(lag: SymmetricLagrangian, Gq: RationalMatrix, Gphi: RationalMatrix) -> HamiltonianExpr:
    N = Gq.ncols
    qn, pn = pair_labels(N)
    quad = {"Q": [], "Phi": []}
    cosines = []
    GqT, GpT = Gq.T, Gphi.T
    for t in lag.energy_terms:
        if t.space == "q":
            w, space = mat_vec(GqT, t.argument), "Q"
        else:
            w, space = mat_vec(GpT, t.argument), "Phi"
        if t.form == "quadratic":
            quad[space].append((2 * t.coefficient, w))  # E = c x^2 = 1/2 (2c) x^2
        else:
            cosines.append(CosineTerm(t.coefficient, space, tuple(w)))
    KQ = _quadratic_form(quad["Q"], N)
    KP = _quadratic_form(quad["Phi"], N)
    return HamiltonianExpr(
        RationalMatrix.from_rows(KQ, qn, qn), RationalMatrix.from_rows(KP, pn, pn), tuple(cosines)
    )


def hamiltonian(rs: ReducedSystem) -> HamiltonianExpr:
    return rs.hamiltonian


def kinetic_form_residual(rs: ReducedSystem) -> RationalMatrix:
    """Gq^T M Gphi - I; the zero matrix when q^T M phi_dot = sum Q_i Phi_dot_i on the surface."""
    K = rs.Gq.T @ rs.lagrangian.connection @ rs.Gphi
    return K - RationalMatrix.identity(K.row_labels).relabel(col_labels=K.col_labels)


def dof_count(ec: EmbeddedCircuit, nc: NullClassification, M: RationalMatrix = None) -> int:
    """rank(M); for planar circuits also checks the loop and cut counting identities."""
    if M is None:
        M = connection_matrix(ec.A, ec.B, ec.circuit.classes())
    r = rank(M)
    if ec.genus == 0:
        by_cuts = len(ec.circuit.vertices) - len(nc.inductive_cuts) - len(nc.capacitive_cuts) - 1
        by_loops = len(ec.loops.faces) - len(nc.inductive_loops) - len(nc.capacitive_loops) - 1
        if not (r == by_cuts == by_loops):
            raise ReductionError(f"counting mismatch: rank {r}, from cuts {by_cuts}, from loops {by_loops}")
    return r


@dataclass(frozen=True)
class Analysis:
    """Everything computed for one embedded circuit."""

    ec: EmbeddedCircuit
    lagrangian: SymmetricLagrangian
    classification: NullClassification
    reduced: ReducedSystem

    @property
    def M(self):
        return self.lagrangian.connection

    @property
    def hamiltonian(self):
        return self.reduced.hamiltonian


def analyze(ec: EmbeddedCircuit, variable_choice=None, pivot="highest") -> Analysis:
    lag = build_lagrangian(ec)
    nc = classify_nulls(ec)
    rs = resolve_constraints(lag, nc, variable_choice, pivot)
    return Analysis(ec, lag, nc, rs)
