"""Random embedded circuits for property tests.

Everything is built by local surgery on a rotation system, using moves that
keep the genus fixed: subdividing an edge, adding a chord across a face,
inserting a star vertex inside a face, and flipping an edge. Planar
circuits grow from a triangle; torus circuits grow from K5 on the torus.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .graph import EdgeEnd, Element, EmbeddedCircuit, RotationSystem, build_circuit, embed

PARAMETERS = tuple(Fraction(x) for x in ("1", "2", "3", "1/2", "3/2", "2/3", "5/4"))


class _Map:
    """Mutable rotation system. A dart is (edge, end) at the vertex of that end."""

    def __init__(self):
        self.vertices = []
        self.edges = {}  # id -> [tail, head]
        self.rot = {}  # vertex -> list of darts
        self._n = 0

    def vertex(self):
        v = f"v{len(self.vertices) + 1}"
        self.vertices.append(v)
        self.rot[v] = []
        return v

    def new_edge_id(self):
        self._n += 1
        return f"e{self._n}"

    def at(self, d):
        eid, end = d
        return self.edges[eid][0 if end == "tail" else 1]

    @staticmethod
    def twin(d):
        return (d[0], "head" if d[1] == "tail" else "tail")

    def succ(self, d):
        r = self.rot[self.at(d)]
        return r[(r.index(d) + 1) % len(r)]

    def faces(self):
        """Faces as lists of darts leaving successive corners."""
        seen, out = set(), []
        for v in self.vertices:
            for d in self.rot[v]:
                if d in seen:
                    continue
                face = []
                while d not in seen:
                    seen.add(d)
                    face.append(d)
                    d = self.succ(self.twin(d))
                out.append(face)
        return out

    def corner(self, face, i):
        """(vertex, dart after which a new end goes) for the i-th corner of a face."""
        prev = face[i - 1]
        tw = self.twin(prev)
        return self.at(tw), tw

    def insert_after(self, v, after, d):
        r = self.rot[v]
        if after is None:
            r.append(d)
        else:
            r.insert(r.index(after) + 1, d)

    def add_edge(self, u, after_u, w, after_w, rng):
        eid = self.new_edge_id()
        if rng.random() < 0.5:
            u, after_u, w, after_w = w, after_w, u, after_u
        self.edges[eid] = [u, w]
        self.insert_after(u, after_u, (eid, "tail"))
        self.insert_after(w, after_w, (eid, "head"))
        return eid

    # genus-preserving moves

    def subdivide(self, eid, rng):
        tail, head = self.edges[eid]
        m = self.vertex()
        # e keeps its tail end; its head end moves to m; a new edge m -> old head
        hd = (eid, "head")
        r = self.rot[head]
        new = self.new_edge_id()
        r[r.index(hd)] = (new, "head")
        self.edges[eid] = [tail, m]
        self.edges[new] = [m, head]
        self.rot[m] = [(eid, "head"), (new, "tail")]
        if rng.random() < 0.5:
            self.reverse(new)

    def reverse(self, eid):
        t, h = self.edges[eid]
        self.edges[eid] = [h, t]
        for v in (t, h):
            self.rot[v] = [
                (e, ("head" if end == "tail" else "tail")) if e == eid else (e, end) for e, end in self.rot[v]
            ]

    def chord(self, face, i, j, rng):
        u, au = self.corner(face, i)
        w, aw = self.corner(face, j)
        if u == w:
            return None
        return self.add_edge(u, au, w, aw, rng)

    def star(self, face, rng):
        corners = [self.corner(face, i) for i in range(len(face))]
        m = self.vertex()
        last = None
        # going around the face, the new vertex sees the corners in reverse order
        for u, au in corners:
            if u == m:
                continue
            eid = self.new_edge_id()
            if rng.random() < 0.5:
                self.edges[eid] = [u, m]
                du, dm = (eid, "tail"), (eid, "head")
            else:
                self.edges[eid] = [m, u]
                du, dm = (eid, "head"), (eid, "tail")
            self.insert_after(u, au, du)
            self.rot[m].insert(0, dm)
            last = eid
        return m, last

    def remove(self, eid):
        t, h = self.edges.pop(eid)
        self.rot[t].remove((eid, "tail"))
        self.rot[h].remove((eid, "head"))

    def flip(self, eid, rng):
        """Replace an edge between two triangles by the other diagonal."""
        d = (eid, "tail")
        faces = self.faces()
        f1 = next(f for f in faces if d in f)
        f2 = next(f for f in faces if self.twin(d) in f)
        if f1 is f2 or len(f1) != 3 or len(f2) != 3:
            return False
        a = self.at(self.twin(f1[(f1.index(d) + 1) % 3]))
        b = self.at(self.twin(f2[(f2.index(self.twin(d)) + 1) % 3]))
        t, h = self.edges[eid]
        if a == b or a in (t, h) or b in (t, h) or len(self.rot[t]) < 4 or len(self.rot[h]) < 4:
            return False
        self.remove(eid)
        merged = next(f for f in self.faces() if any(self.at(x) == a for x in f) and any(self.at(x) == b for x in f) and len(f) == 4)
        ia = next(i for i in range(4) if self.corner(merged, i)[0] == a)
        ib = next(i for i in range(4) if self.corner(merged, i)[0] == b)
        u, au = self.corner(merged, ia)
        w, aw = self.corner(merged, ib)
        if rng.random() < 0.5:
            u, au, w, aw = w, aw, u, au
        self.edges[eid] = [u, w]
        self.insert_after(u, au, (eid, "tail"))
        self.insert_after(w, aw, (eid, "head"))
        return True

    def finish(self, rng, nonlinear=0.0, classes=None) -> EmbeddedCircuit:
        edges = []
        for eid in sorted(self.edges, key=lambda s: int(s[1:])):
            t, h = self.edges[eid]
            cls = classes[eid] if classes else rng.choice("CI")
            if rng.random() < nonlinear:
                kind = "phase_slip" if cls == "C" else "josephson"
            else:
                kind = "capacitor" if cls == "C" else "inductor"
            edges.append((eid, t, h, Element(kind, rng.choice(PARAMETERS))))
        c = build_circuit(self.vertices, edges)
        rot = RotationSystem({v: tuple(EdgeEnd(e, end) for e, end in self.rot[v]) for v in self.vertices})
        return embed(c, rot)


def _triangle(rng):
    m = _Map()
    a, b, c = m.vertex(), m.vertex(), m.vertex()
    # with two ends per vertex either cyclic order is the same
    m.add_edge(a, None, b, None, rng)
    m.add_edge(b, None, c, None, rng)
    m.add_edge(c, None, a, None, rng)
    return m


def random_triangulation(rng: random.Random, n_vertices=None, max_vertices=30, flips=None):
    """A random planar triangulation: stacked vertex insertions followed by random flips."""
    n = n_vertices or rng.randint(3, max_vertices)
    m = _triangle(rng)
    while len(m.vertices) < n:
        faces = [f for f in m.faces() if len(f) == 3]
        m.star(rng.choice(faces), rng)
    for _ in range(flips if flips is not None else len(m.edges)):
        m.flip(rng.choice(list(m.edges)), rng)
    return m


def random_planar_map(rng: random.Random, max_vertices=30, moves=None):
    """Mixed planar circuit: a cycle grown by chords, stars and subdivisions."""
    m = _Map()
    k = rng.randint(2, 5)
    vs = [m.vertex() for _ in range(k)]
    # k = 2 gives two parallel edges between the same pair
    for i in range(k):
        m.add_edge(vs[i], None, vs[(i + 1) % k], None, rng)
    for _ in range(moves if moves is not None else rng.randint(1, 12)):
        if len(m.vertices) >= max_vertices:
            break
        _random_move(m, rng)
    return m


def _random_move(m: _Map, rng):
    op = rng.random()
    faces = m.faces()
    if op < 0.3:
        m.subdivide(rng.choice(list(m.edges)), rng)
    elif op < 0.65:
        f = rng.choice(faces)
        if len(f) >= 2:
            i, j = rng.sample(range(len(f)), 2)
            m.chord(f, i, j, rng)
    else:
        m.star(rng.choice(faces), rng)


def _k5_torus(rng):
    """K5 embedded on the torus (a standard rotation system, verified by face tracing)."""
    m = _Map()
    vs = [m.vertex() for _ in range(5)]
    ids = {}
    for i in range(5):
        for j in range(i + 1, 5):
            eid = m.new_edge_id()
            m.edges[eid] = [vs[i], vs[j]]
            ids[(i, j)] = ids[(j, i)] = eid
    # neighbours of i in the cyclic order i+1, i+2, i+4, i+3 (mod 5): five faces, genus 1
    for i in range(5):
        order = [(i + s) % 5 for s in (1, 2, 4, 3)]
        m.rot[vs[i]] = [(ids[(i, j)], "tail" if i < j else "head") for j in order]
    return m


def random_torus_map(rng: random.Random, moves=None, max_vertices=20):
    m = _k5_torus(rng)
    for eid in list(m.edges):
        if rng.random() < 0.5:
            m.reverse(eid)
    for _ in range(moves if moves is not None else rng.randint(0, 8)):
        if len(m.vertices) >= max_vertices:
            break
        _random_move(m, rng)
    return m


def random_planar_circuit(rng: random.Random, max_vertices=30, nonlinear=0.0) -> EmbeddedCircuit:
    if rng.random() < 0.5:
        m = random_triangulation(rng, max_vertices=max_vertices)
    else:
        m = random_planar_map(rng, max_vertices=max_vertices)
    return m.finish(rng, nonlinear)


def random_torus_circuit(rng: random.Random, nonlinear=0.0) -> EmbeddedCircuit:
    return random_torus_map(rng).finish(rng, nonlinear)
