from fractions import Fraction
from pathlib import Path

from fluxcharge.netlist import document_embedded, load_netlist
from fluxcharge.reduction import analyze

CIRCUITS = Path(__file__).resolve().parent.parent / "circuits"
FIXTURES = sorted(p.stem for p in CIRCUITS.glob("*.json"))
PLANAR_FIXTURES = ["fig1a", "fig3", "fig3_default", "fig3_l2", "fig5a", "fig5b", "lc"]


def load(name):
    doc = load_netlist(CIRCUITS / f"{name}.json")
    return doc, document_embedded(doc)


def analysis(name, **kw):
    doc, ec = load(name)
    return analyze(ec, doc.variable_choice, **kw)


def F(x):
    return Fraction(x)


def ints(m):
    return [[int(x) for x in row] for row in m.rows()]


def netlist_text(vertices, edges, embedding, **extra):
    """Small JSON netlist builder for tests; edges are (id, from, to, kind, value)."""
    import json

    doc = {
        "version": "fluxcharge/1",
        "vertices": list(vertices),
        "edges": [{"id": i, "from": t, "to": h, "kind": k, "value": str(v)} for i, t, h, k, v in edges],
        "embedding": embedding,
    }
    doc.update(extra)
    return json.dumps(doc)


# printed matrices, rows in label order
FIG3_A = [[-1, 1, 0, 0], [0, -1, 1, 0], [1, 0, -1, 0], [-1, 0, 0, 1], [0, 0, 1, -1], [0, -1, 0, 1]]
FIG3_B = [[1, 0, 0, -1, 0, 1], [0, 1, 0, 0, -1, -1], [0, 0, 1, 1, 1, 0], [-1, -1, -1, 0, 0, 0]]
FIG3_M = [[1, 0, 0, -1], [0, 0, -1, 1], [0, 0, 0, 0], [-1, 0, 1, 0]]

FIG5_A = [
    [0, -1, 1, 0, 0, 0],
    [1, 0, 0, -1, 0, 0],
    [-1, 0, 0, 0, 1, 0],
    [0, -1, 0, 0, 0, 1],
    [-1, 1, 0, 0, 0, 0],
    [0, 0, -1, 1, 0, 0],
    [0, 0, 1, 0, 0, -1],
    [0, 0, 0, 1, -1, 0],
]
FIG5_B = [
    [0, -1, -1, 0, 0, 0, 0, -1],
    [-1, 0, 1, 0, -1, -1, 0, 1],
    [1, 0, 0, -1, 0, 0, -1, 0],
    [0, 1, 0, 1, 1, 1, 1, 0],
]
FIG5_M = [[0, 0, 0, -1, 1, 0], [1, -1, 1, 0, -1, 0], [0, 0, -1, 0, 0, 1], [-1, 1, 0, 1, 0, -1]]

K5_A = [
    [-1, 0, 0, 1, 0],
    [0, 0, 0, -1, 1],
    [1, 0, 0, 0, -1],
    [-1, 1, 0, 0, 0],
    [0, -1, 1, 0, 0],
    [1, 0, -1, 0, 0],
    [0, 0, -1, 0, 1],
    [0, 1, 0, 0, -1],
    [0, -1, 0, 1, 0],
    [0, 0, 1, -1, 0],
]
K5_B = [
    [0, 0, 0, 0, 0, 0, -1, -1, -1, -1],
    [1, 1, 0, -1, 0, 0, 0, 1, 0, 0],
    [-1, 0, 0, 0, -1, -1, 0, 0, 1, 0],
    [0, 0, 1, 1, 1, 0, 1, 0, 0, 0],
    [0, -1, -1, 0, 0, 1, 0, 0, 0, 1],
    [1, 1, 1, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 1, 1, 1, 0, 0, 0, 0],
]
K5_M = [
    [0, 0, 0, 0, 0],
    [0, -1, 0, 0, 1],
    [0, 1, 0, -1, 0],
    [0, 0, 1, 0, -1],
    [0, 0, -1, 1, 0],
    [0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0],
]

FIG1A_B = [
    [1, 0, 1, 0, 0, 0, -1, 0, 0, 0],
    [0, -1, 0, 0, 1, 0, 1, 1, -1, -1],
    [0, 0, -1, 1, 0, 1, 0, -1, 0, 0],
    [-1, 1, 0, -1, -1, -1, 0, 0, 1, 1],
]
FIG1B_B = [
    [0, 1, -1, 0, 0, 0, 1, 0, 0, 0],
    [1, 0, 0, -1, 0, 1, 0, 0, 0, 0],
    [0, -1, 0, 1, -1, 0, 0, 0, 0, 0],
    [-1, 0, 1, 0, 0, 0, 0, -1, 0, 0],
    [0, 0, 0, 0, 1, -1, -1, 1, 0, 0],
    [1, -1, 0, 0, 0, 0, 0, 0, 0, 1],
    [0, 0, 1, -1, 0, 0, 0, 0, 1, 0],
]
