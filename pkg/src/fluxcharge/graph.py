"""Embedded circuit graphs: elements, rotation systems, faces, loops, A and B."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .linalg import RationalMatrix, to_fraction

CAPACITIVE_KINDS = ("capacitor", "phase_slip")
INDUCTIVE_KINDS = ("inductor", "josephson")
ELEMENT_KINDS = CAPACITIVE_KINDS + INDUCTIVE_KINDS
LINEAR_KINDS = ("capacitor", "inductor")


class CircuitError(ValueError):
    """Structural problem with a circuit or its embedding."""


@dataclass(frozen=True)
class Element:
    kind: str
    parameter: Fraction

    def __post_init__(self):
        if self.kind not in ELEMENT_KINDS:
            raise CircuitError(f"unknown element kind {self.kind!r}")
        object.__setattr__(self, "parameter", to_fraction(self.parameter))
        if self.parameter <= 0:
            raise CircuitError(f"{self.kind} parameter must be positive, got {self.parameter}")

    @property
    def branch_class(self) -> str:
        """'C' for capacitive branches, 'I' for inductive ones."""
        return "C" if self.kind in CAPACITIVE_KINDS else "I"

    @property
    def is_linear(self) -> bool:
        return self.kind in LINEAR_KINDS


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    element: Element


class EdgeEnd(NamedTuple):
    """One end of an edge. As a half-edge it points away from its vertex."""

    edge: str
    end: str  # "tail" or "head"

    @property
    def twin(self) -> "EdgeEnd":
        return EdgeEnd(self.edge, "head" if self.end == "tail" else "tail")

    @property
    def sign(self) -> int:
        # leaving from the tail walks the edge along its direction
        return 1 if self.end == "tail" else -1


@dataclass(frozen=True)
class Circuit:
    vertices: tuple
    edges: tuple
    _edge_index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "_edge_index", {e.id: i for i, e in enumerate(self.edges)})

    @property
    def edge_ids(self):
        return tuple(e.id for e in self.edges)

    def edge(self, eid) -> Edge:
        return self.edges[self._edge_index[eid]]

    def edge_position(self, eid) -> int:
        return self._edge_index[eid]

    def vertex_of(self, end: EdgeEnd) -> str:
        e = self.edge(end.edge)
        return e.tail if end.end == "tail" else e.head

    def incident_ends(self, v):
        out = []
        for e in self.edges:
            if e.tail == v:
                out.append(EdgeEnd(e.id, "tail"))
            if e.head == v:
                out.append(EdgeEnd(e.id, "head"))
        return out

    def edges_of_class(self, cls):
        return tuple(e.id for e in self.edges if e.element.branch_class == cls)

    def classes(self):
        return {e.id: e.element.branch_class for e in self.edges}


def build_circuit(vertices, edges) -> Circuit:
    """Validate and assemble a Circuit.

    ``edges`` is an iterable of ``(id, tail, head, Element)`` or ``Edge``.
    """
    vertices = tuple(vertices)
    seen = set()
    for v in vertices:
        if v in seen:
            raise CircuitError(f"duplicate vertex id {v!r}")
        seen.add(v)
    if not vertices:
        raise CircuitError("circuit has no vertices")
    built = []
    for item in edges:
        e = item if isinstance(item, Edge) else Edge(*item)
        if e.id in seen:
            raise CircuitError(f"duplicate id {e.id!r}")
        seen.add(e.id)
        for end in (e.tail, e.head):
            if end not in vertices:
                raise CircuitError(f"edge {e.id!r} references unknown vertex {end!r}")
        if e.tail == e.head:
            raise CircuitError(f"edge {e.id!r} is a self-loop at {e.tail!r}")
        if not isinstance(e.element, Element):
            raise CircuitError(f"edge {e.id!r} has no element")
        built.append(e)
    c = Circuit(vertices, tuple(built))
    comps = components(vertices, [(e.tail, e.head) for e in built])
    if len(comps) > 1:
        stray = comps[1][0]
        raise CircuitError(f"circuit is disconnected: vertex {stray!r} is not reachable from {vertices[0]!r}")
    return c


def components(vertices, pairs):
    """Connected components (lists of vertices in input order) of an undirected graph."""
    adj = {v: [] for v in vertices}
    for a, b in pairs:
        adj[a].append(b)
        adj[b].append(a)
    label = {}
    comps = []
    for v in vertices:
        if v in label:
            continue
        k = len(comps)
        label[v] = k
        stack = [v]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in label:
                    label[w] = k
                    stack.append(w)
        comps.append([u for u in vertices if label.get(u) == k])
    return comps


@dataclass(frozen=True)
class RotationSystem:
    """Cyclic order of edge-ends around each vertex."""

    order: dict  # vertex -> tuple of EdgeEnd

    def successor(self, end: EdgeEnd, vertex: str) -> EdgeEnd:
        cyc = self.order[vertex]
        return cyc[(cyc.index(end) + 1) % len(cyc)]

    def __hash__(self):
        return hash(tuple(sorted((v, tuple(c)) for v, c in self.order.items())))


def make_rotation(c: Circuit, order) -> RotationSystem:
    """Build a RotationSystem, resolving bare edge ids to the end at that vertex."""
    out = {}
    for v in c.vertices:
        if v not in order:
            raise CircuitError(f"rotation system has no cyclic order for vertex {v!r}")
        ends = []
        for item in order[v]:
            if isinstance(item, EdgeEnd):
                ends.append(item)
            elif isinstance(item, str):
                if item not in c._edge_index:
                    raise CircuitError(f"rotation at {v!r} references unknown edge {item!r}")
                e = c.edge(item)
                ends.append(EdgeEnd(item, "tail" if e.tail == v else "head"))
            else:
                ends.append(EdgeEnd(*item))
        out[v] = tuple(ends)
    for v in order:
        if v not in out:
            raise CircuitError(f"rotation system lists unknown vertex {v!r}")
    check_rotation(c, RotationSystem(out))
    return RotationSystem(out)


def check_rotation(c: Circuit, r: RotationSystem):
    used = set()
    for v in c.vertices:
        for end in r.order[v]:
            if end.edge not in c._edge_index:
                raise CircuitError(f"rotation at {v!r} references unknown edge {end.edge!r}")
            if c.vertex_of(end) != v:
                raise CircuitError(
                    f"rotation at {v!r} lists edge-end ({end.edge}, {end.end}) which belongs to {c.vertex_of(end)!r}"
                )
            if end in used:
                raise CircuitError(f"edge-end ({end.edge}, {end.end}) appears twice in the rotation system")
            used.add(end)
    for e in c.edges:
        for end in (EdgeEnd(e.id, "tail"), EdgeEnd(e.id, "head")):
            if end not in used:
                raise CircuitError(f"rotation system is missing edge-end ({end.edge}, {end.end})")


@dataclass(frozen=True)
class Loop:
    """An oriented closed walk: a tuple of (edge id, +1/-1) steps."""

    label: str
    walk: tuple
    kind: str = "face"  # or "topological"

    def edge_signs(self):
        out = {}
        for eid, s in self.walk:
            out[eid] = out.get(eid, 0) + s
        return out


@dataclass(frozen=True)
class LoopSet:
    faces: tuple
    topological: tuple = ()
    genus: int = 0

    @property
    def loops(self):
        return self.faces + self.topological

    @property
    def labels(self):
        return tuple(l.label for l in self.loops)

    @property
    def face_labels(self):
        return tuple(l.label for l in self.faces)

    def loop(self, label) -> Loop:
        for l in self.loops:
            if l.label == label:
                return l
        raise KeyError(label)


def _trace_orbits(c: Circuit, r: RotationSystem):
    visited = set()
    orbits = []
    for e in c.edges:
        for start in (EdgeEnd(e.id, "tail"), EdgeEnd(e.id, "head")):
            if start in visited:
                continue
            walk = []
            h = start
            while h not in visited:
                visited.add(h)
                walk.append(h)
                t = h.twin
                h = r.successor(t, c.vertex_of(t))
            if h != start:
                raise CircuitError("face traversal did not close; rotation system is inconsistent")
            orbits.append(tuple(walk))
    return orbits


def _cyclic_equal(a, b):
    if len(a) != len(b):
        return False
    if not a:
        return True
    n = len(a)
    for k in range(n):
        if a[k] == b[0] and all(a[(k + i) % n] == b[i] for i in range(n)):
            return True
    return False


def trace_faces(c: Circuit, r: RotationSystem, given=None) -> LoopSet:
    """Faces of the embedding and its genus.

    ``given`` optionally lists ``(label, walk)`` pairs, each walk a sequence
    of (edge id, sign). They are matched against the traced faces and fix
    the labels and order; any mismatch raises CircuitError.
    """
    check_rotation(c, r)
    orbits = _trace_orbits(c, r)
    walks = [tuple((h.edge, h.sign) for h in o) for o in orbits]
    chi = len(walks) - len(c.edges) + len(c.vertices)
    if chi % 2 or chi > 2:
        raise CircuitError(f"Euler characteristic {chi} is impossible for a connected orientable embedding")
    genus = (2 - chi) // 2
    if given is None:
        faces = tuple(Loop(f"l{i + 1}", w, "face") for i, w in enumerate(walks))
    else:
        given = list(given)
        if len(given) != len(walks):
            raise CircuitError(f"{len(given)} faces listed but the embedding has {len(walks)}")
        remaining = list(walks)
        faces = []
        for label, walk in given:
            walk = tuple((eid, int(s)) for eid, s in walk)
            match = next((w for w in remaining if _cyclic_equal(w, walk)), None)
            if match is None:
                raise CircuitError(f"face {label!r} is not a face of the embedding")
            remaining.remove(match)
            faces.append(Loop(label, walk, "face"))
        faces = tuple(faces)
    return LoopSet(faces, (), genus)


def _edge_mask(c: Circuit, walk):
    m = 0
    for eid, _ in walk:
        m ^= 1 << c.edge_position(eid)
    return m


def _gf2_reduce(basis: dict, v: int) -> int:
    # basis maps leading bit -> vector with that leading bit
    while v:
        top = v.bit_length() - 1
        b = basis.get(top)
        if b is None:
            return v
        v ^= b
    return 0


def _gf2_insert(basis: dict, v: int) -> bool:
    v = _gf2_reduce(basis, v)
    if not v:
        return False
    basis[v.bit_length() - 1] = v
    return True


def spanning_tree(c: Circuit, edge_filter=None):
    """BFS spanning forest. Returns (tree edge ids, parent map vertex -> (parent, edge id))."""
    adj = {v: [] for v in c.vertices}
    for e in c.edges:
        if edge_filter is not None and not edge_filter(e):
            continue
        adj[e.tail].append((e.head, e.id))
        adj[e.head].append((e.tail, e.id))
    parent = {}
    tree = []
    for root in c.vertices:
        if root in parent:
            continue
        parent[root] = None
        q = deque([root])
        while q:
            u = q.popleft()
            for w, eid in adj[u]:
                if w not in parent:
                    parent[w] = (u, eid)
                    tree.append(eid)
                    q.append(w)
    return tree, parent


def _tree_path(c, parent, a, b):
    """Signed walk from a to b through the tree."""
    def up(v):
        chain = [v]
        while parent[v] is not None:
            v = parent[v][0]
            chain.append(v)
        return chain

    pa, pb = up(a), up(b)
    common = set(pa) & set(pb)
    walk = []
    v = a
    while v not in common:
        p, eid = parent[v]
        walk.append((eid, 1 if c.edge(eid).tail == v else -1))
        v = p
    meet = v
    back = []
    v = b
    while v != meet:
        p, eid = parent[v]
        # walking from p down to v
        back.append((eid, 1 if c.edge(eid).tail == p else -1))
        v = p
    return walk + back[::-1]


def fundamental_cycles(c: Circuit, edge_filter=None):
    """Fundamental cycles of a BFS spanning forest, oriented along their non-tree edge."""
    tree, parent = spanning_tree(c, edge_filter)
    tree = set(tree)
    out = []
    for e in c.edges:
        if e.id in tree or (edge_filter is not None and not edge_filter(e)):
            continue
        out.append(((e.id, 1),) + tuple(_tree_path(c, parent, e.head, e.tail)))
    return out


def topological_loops(c: Circuit, ls: LoopSet, prefix="l"):
    """2g oriented cycles independent of the face boundaries over GF(2)."""
    need = 2 * ls.genus
    if need == 0:
        return ()
    basis = {}
    for f in ls.faces:
        _gf2_insert(basis, _edge_mask(c, [(eid, 1) for eid, s in f.edge_signs().items() if s % 2]))
    chosen = []
    for cyc in fundamental_cycles(c):
        if len(chosen) == need:
            break
        if _gf2_insert(basis, _edge_mask(c, cyc)):
            chosen.append(cyc)
    if len(chosen) != need:
        raise CircuitError("could not find enough topological loops; embedding is inconsistent")
    used = {f.label for f in ls.faces}
    out = []
    k = len(ls.faces)
    for w in chosen:
        k += 1
        while f"{prefix}{k}" in used:
            k += 1
        out.append(Loop(f"{prefix}{k}", w, "topological"))
    return tuple(out)


def check_closed_walk(c: Circuit, walk, label="loop"):
    if not walk:
        raise CircuitError(f"{label!r} is empty")
    pos = None
    first = None
    for eid, s in walk:
        if eid not in c._edge_index:
            raise CircuitError(f"{label!r} references unknown edge {eid!r}")
        if s not in (1, -1):
            raise CircuitError(f"{label!r} has a step with sign {s!r}")
        e = c.edge(eid)
        a, b = (e.tail, e.head) if s == 1 else (e.head, e.tail)
        if pos is None:
            first = a
        elif pos != a:
            raise CircuitError(f"{label!r} is not a walk: edge {eid!r} does not start at {pos!r}")
        pos = b
    if pos != first:
        raise CircuitError(f"{label!r} does not close up")


def with_topological_loops(c: Circuit, ls: LoopSet, given=None) -> LoopSet:
    """Attach topological loops: validate ``given`` (label, walk) pairs, or choose them."""
    if given is None:
        loops = topological_loops(c, ls)
    else:
        given = list(given)
        if len(given) != 2 * ls.genus:
            raise CircuitError(f"{len(given)} topological loops listed but genus {ls.genus} needs {2 * ls.genus}")
        basis = {}
        for f in ls.faces:
            _gf2_insert(basis, _edge_mask(c, [(eid, 1) for eid, s in f.edge_signs().items() if s % 2]))
        loops = []
        for label, walk in given:
            walk = tuple((eid, int(s)) for eid, s in walk)
            check_closed_walk(c, walk, label)
            if not _gf2_insert(basis, _edge_mask(c, walk)):
                raise CircuitError(f"topological loop {label!r} is dependent on the faces and earlier loops")
            loops.append(Loop(label, walk, "topological"))
        loops = tuple(loops)
    labels = [l.label for l in ls.faces] + [l.label for l in loops]
    if len(set(labels)) != len(labels):
        raise CircuitError("loop labels are not unique")
    return LoopSet(ls.faces, tuple(loops), ls.genus)


def incidence_matrix(c: Circuit) -> RationalMatrix:
    """A with rows edges, columns vertices: +1 at the head, -1 at the tail."""
    col = {v: j for j, v in enumerate(c.vertices)}
    rows = []
    for e in c.edges:
        r = [Fraction(0)] * len(c.vertices)
        r[col[e.tail]] = Fraction(-1)
        r[col[e.head]] = Fraction(1)
        rows.append(r)
    return RationalMatrix.from_rows(rows, c.edge_ids, c.vertices)


def orientation_matrix(c: Circuit, ls: LoopSet) -> RationalMatrix:
    """B with rows loops, columns edges; a walk that crosses an edge both ways gives 0."""
    rows = []
    for l in ls.loops:
        r = [Fraction(0)] * len(c.edges)
        for eid, s in l.walk:
            r[c.edge_position(eid)] += s
        rows.append(r)
    return RationalMatrix.from_rows(rows, ls.labels, c.edge_ids)


@dataclass(frozen=True)
class EmbeddedCircuit:
    """A circuit with its embedding and loop set, plus cached A and B."""

    circuit: Circuit
    rotation: RotationSystem
    loops: LoopSet
    A: RationalMatrix = field(compare=False)
    B: RationalMatrix = field(compare=False)

    @property
    def genus(self):
        return self.loops.genus


def embed(c: Circuit, rotation, faces=None, topological=None) -> EmbeddedCircuit:
    """Trace faces, attach topological loops and compute A and B."""
    r = rotation if isinstance(rotation, RotationSystem) else make_rotation(c, rotation)
    ls = trace_faces(c, r, faces)
    ls = with_topological_loops(c, ls, topological)
    return EmbeddedCircuit(c, r, ls, incidence_matrix(c), orientation_matrix(c, ls))


def same_rotation(r1: RotationSystem, r2: RotationSystem) -> bool:
    """Equal as cyclic orders at every vertex (starting point ignored)."""
    if set(r1.order) != set(r2.order):
        return False
    return all(_cyclic_equal(tuple(r1.order[v]), tuple(r2.order[v])) for v in r1.order)
