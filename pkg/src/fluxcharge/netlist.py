"""The ``fluxcharge/1`` netlist format.

A netlist is a JSON document::

    {
      "version": "fluxcharge/1",
      "vertices": ["v1", "v2"],
      "edges": [{"id": "e1", "from": "v1", "to": "v2", "kind": "capacitor", "value": "1"}, ...],
      "embedding": {"v1": ["e1", {"edge": "e2", "end": "tail"}], ...},
      "faces": [{"label": "l1", "walk": ["+e1", "-e2"]}, ...],             (optional)
      "topological_loops": [{"label": "l6", "walk": [...]}],                 (optional)
      "variable_choice": {"Q": [{"l2": "1", "l4": "-1"}, ...], "Phi": [...]} (optional)
    }

Embedding lists give the cyclic order of edge-ends around each vertex.
Parameter values are exact decimal or ``p/q`` strings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .graph import (
    ELEMENT_KINDS,
    Circuit,
    CircuitError,
    EdgeEnd,
    Element,
    EmbeddedCircuit,
    build_circuit,
    embed,
    make_rotation,
)

VERSION = "fluxcharge/1"


class NetlistError(ValueError):
    """Syntax or validation problem in a netlist document."""


@dataclass(frozen=True)
class EdgeSpec:
    id: str
    tail: str
    head: str
    kind: str
    value: Fraction


@dataclass(frozen=True)
class NetlistDocument:
    version: str
    vertices: tuple
    edges: tuple  # of EdgeSpec
    embedding: tuple  # of (vertex, tuple of EdgeEnd)
    faces: tuple = None  # of (label, walk)
    topological_loops: tuple = None
    variable_choice: tuple = None  # (Q rows, Phi rows); rows are tuples of (label, Fraction)


def render_rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_rational(s, where="value") -> Fraction:
    if isinstance(s, bool):
        raise NetlistError(f"{where}: expected a number, got {s!r}")
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, float):
        # JSON numbers are read as floats; go through the shortest decimal repr
        return Fraction(repr(s))
    if isinstance(s, str):
        try:
            return Fraction(s.strip())
        except (ValueError, ZeroDivisionError):
            raise NetlistError(f"{where}: {s!r} is not an exact decimal or ratio") from None
    raise NetlistError(f"{where}: expected a number, got {type(s).__name__}")


def _walk_step(tok, where):
    if isinstance(tok, str) and tok[:1] in "+-" and len(tok) > 1:
        return (tok[1:], 1 if tok[0] == "+" else -1)
    if isinstance(tok, dict) and set(tok) == {"edge", "sign"} and tok["sign"] in (1, -1):
        return (tok["edge"], tok["sign"])
    raise NetlistError(f"{where}: walk step {tok!r} must look like '+e1' or '-e1'")


def _render_step(step):
    eid, s = step
    return ("+" if s > 0 else "-") + eid


def _require(obj, key, kind, where):
    if key not in obj:
        raise NetlistError(f"{where}: missing field {key!r}")
    val = obj[key]
    if not isinstance(val, kind):
        raise NetlistError(f"{where}: field {key!r} has the wrong type")
    return val


def _loops(raw, name):
    if not isinstance(raw, list):
        raise NetlistError(f"{name} must be a list")
    out = []
    labels = set()
    for i, item in enumerate(raw):
        where = f"{name}[{i}]"
        if not isinstance(item, dict):
            raise NetlistError(f"{where} must be an object")
        label = _require(item, "label", str, where)
        if label in labels:
            raise NetlistError(f"{where}: duplicate loop label {label!r}")
        labels.add(label)
        walk = tuple(_walk_step(t, where) for t in _require(item, "walk", list, where))
        out.append((label, walk))
    return tuple(out)


def parse_netlist(text) -> NetlistDocument:
    """Parse and validate netlist text (bytes or str)."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise NetlistError(f"netlist is not UTF-8: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetlistError(f"syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise NetlistError("netlist must be a JSON object")
    known = {"version", "vertices", "edges", "embedding", "faces", "topological_loops", "variable_choice"}
    extra = set(raw) - known
    if extra:
        raise NetlistError(f"unknown top-level field {sorted(extra)[0]!r}")
    version = _require(raw, "version", str, "netlist")
    if version != VERSION:
        raise NetlistError(f"unsupported version {version!r}; expected {VERSION!r}")

    vertices = _require(raw, "vertices", list, "netlist")
    seen = set()
    for v in vertices:
        if not isinstance(v, str):
            raise NetlistError(f"vertex id {v!r} must be a string")
        if v in seen:
            raise NetlistError(f"duplicate id {v!r}")
        seen.add(v)

    edges = []
    for i, item in enumerate(_require(raw, "edges", list, "netlist")):
        where = f"edges[{i}]"
        if not isinstance(item, dict):
            raise NetlistError(f"{where} must be an object")
        eid = _require(item, "id", str, where)
        if eid in seen:
            raise NetlistError(f"duplicate id {eid!r}")
        seen.add(eid)
        tail = _require(item, "from", str, where)
        head = _require(item, "to", str, where)
        for v in (tail, head):
            if v not in vertices:
                raise NetlistError(f"edge {eid!r} references missing vertex {v!r}")
        kind = _require(item, "kind", str, where)
        if kind not in ELEMENT_KINDS:
            raise NetlistError(f"edge {eid!r} has unknown element kind {kind!r}")
        if "value" not in item:
            raise NetlistError(f"{where}: missing field 'value'")
        value = parse_rational(item["value"], f"edge {eid!r}")
        extra = set(item) - {"id", "from", "to", "kind", "value"}
        if extra:
            raise NetlistError(f"{where}: unknown field {sorted(extra)[0]!r}")
        edges.append(EdgeSpec(eid, tail, head, kind, value))
    by_id = {e.id: e for e in edges}

    emb_raw = _require(raw, "embedding", dict, "netlist")
    embedding = []
    for v in vertices:
        if v not in emb_raw:
            raise NetlistError(f"embedding has no cyclic order for vertex {v!r}")
    for v, cyc in emb_raw.items():
        if v not in vertices:
            raise NetlistError(f"embedding references missing vertex {v!r}")
        if not isinstance(cyc, list):
            raise NetlistError(f"embedding[{v!r}] must be a list")
        ends = []
        for ref in cyc:
            if isinstance(ref, str):
                e = by_id.get(ref)
                if e is None:
                    raise NetlistError(f"embedding at {v!r} references missing edge {ref!r}")
                if v not in (e.tail, e.head):
                    raise NetlistError(f"embedding at {v!r} lists edge {ref!r} which is not incident to it")
                ends.append(EdgeEnd(ref, "tail" if e.tail == v else "head"))
            elif isinstance(ref, dict) and set(ref) == {"edge", "end"}:
                if ref["edge"] not in by_id:
                    raise NetlistError(f"embedding at {v!r} references missing edge {ref['edge']!r}")
                if ref["end"] not in ("tail", "head"):
                    raise NetlistError(f"embedding at {v!r}: end must be 'tail' or 'head'")
                e = by_id[ref["edge"]]
                if (e.tail if ref["end"] == "tail" else e.head) != v:
                    raise NetlistError(f"embedding at {v!r}: the {ref['end']} of {ref['edge']!r} is not at this vertex")
                ends.append(EdgeEnd(ref["edge"], ref["end"]))
            else:
                raise NetlistError(f"embedding at {v!r}: bad edge-end reference {ref!r}")
        embedding.append((v, tuple(ends)))
    order = {v: i for i, v in enumerate(vertices)}
    embedding.sort(key=lambda p: order[p[0]])

    faces = _loops(raw["faces"], "faces") if "faces" in raw else None
    topo = _loops(raw["topological_loops"], "topological_loops") if "topological_loops" in raw else None
    for group in (faces or ()), (topo or ()):
        for label, walk in group:
            for eid, _ in walk:
                if eid not in by_id:
                    raise NetlistError(f"loop {label!r} references missing edge {eid!r}")

    choice = None
    if "variable_choice" in raw:
        vc = raw["variable_choice"]
        if not isinstance(vc, dict) or set(vc) != {"Q", "Phi"}:
            raise NetlistError("variable_choice must be an object with 'Q' and 'Phi'")
        sides = []
        for side in ("Q", "Phi"):
            rows = vc[side]
            if not isinstance(rows, list):
                raise NetlistError(f"variable_choice.{side} must be a list")
            parsed = []
            for k, row in enumerate(rows):
                if not isinstance(row, dict):
                    raise NetlistError(f"variable_choice.{side}[{k}] must be an object")
                parsed.append(tuple((lab, parse_rational(c, f"variable_choice.{side}[{k}]")) for lab, c in row.items()))
            sides.append(tuple(parsed))
        if len(sides[0]) != len(sides[1]):
            raise NetlistError("variable_choice needs as many Q rows as Phi rows")
        for lab, _ in (x for row in sides[1] for x in row):
            if lab not in vertices:
                raise NetlistError(f"variable_choice.Phi references missing vertex {lab!r}")
        choice = tuple(sides)

    return NetlistDocument(VERSION, tuple(vertices), tuple(edges), tuple(embedding), faces, topo, choice)


def document_to_json(d: NetlistDocument) -> dict:
    out = {
        "version": d.version,
        "vertices": list(d.vertices),
        "edges": [
            {"id": e.id, "from": e.tail, "to": e.head, "kind": e.kind, "value": render_rational(e.value)}
            for e in d.edges
        ],
        "embedding": {v: [end.edge for end in ends] for v, ends in d.embedding},
    }
    if d.faces is not None:
        out["faces"] = [{"label": lab, "walk": [_render_step(s) for s in w]} for lab, w in d.faces]
    if d.topological_loops is not None:
        out["topological_loops"] = [
            {"label": lab, "walk": [_render_step(s) for s in w]} for lab, w in d.topological_loops
        ]
    if d.variable_choice is not None:
        q, phi = d.variable_choice
        out["variable_choice"] = {
            "Q": [{lab: render_rational(c) for lab, c in row} for row in q],
            "Phi": [{lab: render_rational(c) for lab, c in row} for row in phi],
        }
    return out


def serialize_netlist(d: NetlistDocument) -> bytes:
    """Canonical text: fixed key order, shorthand edge-ends, rationals as strings."""
    return (json.dumps(document_to_json(d), indent=2) + "\n").encode("utf-8")


def document_circuit(d: NetlistDocument) -> Circuit:
    try:
        return build_circuit(
            d.vertices, [(e.id, e.tail, e.head, Element(e.kind, e.value)) for e in d.edges]
        )
    except CircuitError as exc:
        raise NetlistError(str(exc)) from None


def document_embedded(d: NetlistDocument) -> EmbeddedCircuit:
    """Build the embedded circuit described by a document."""
    c = document_circuit(d)
    try:
        rot = make_rotation(c, dict(d.embedding))
        return embed(c, rot, d.faces, d.topological_loops)
    except CircuitError as exc:
        raise NetlistError(str(exc)) from None


def embedded_document(ec: EmbeddedCircuit, variable_choice=None, with_loops=True) -> NetlistDocument:
    """Document describing an embedded circuit, with its loop labels pinned."""
    c = ec.circuit
    edges = tuple(EdgeSpec(e.id, e.tail, e.head, e.element.kind, e.element.parameter) for e in c.edges)
    emb = tuple((v, tuple(ec.rotation.order[v])) for v in c.vertices)
    faces = topo = None
    if with_loops:
        faces = tuple((l.label, l.walk) for l in ec.loops.faces)
        if ec.loops.topological:
            topo = tuple((l.label, l.walk) for l in ec.loops.topological)
    return NetlistDocument(VERSION, c.vertices, edges, emb, faces, topo, variable_choice)


def load_netlist(path) -> NetlistDocument:
    with open(path, "rb") as fh:
        return parse_netlist(fh.read())
