"""Analysis reports: structured (JSON) and human-readable text.

Every rational is written as a "p" or "p/q" string, so a JSON report
parses back to exactly the same values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .duality import is_self_dual, self_dual_relabeling
from .linalg import RationalMatrix, format_matrix
from .netlist import parse_rational, render_rational
from .reduction import Analysis, CosineTerm, HamiltonianExpr, dof_count, pair_labels

REPORT_VERSION = "fluxcharge-report/1"


@dataclass(frozen=True)
class AnalysisReport:
    A: RationalMatrix
    B: RationalMatrix
    M: RationalMatrix
    genus: int
    face_count: int
    loop_count: int
    pair_count: int
    classification: dict
    eliminations: tuple  # dicts
    pairs: dict  # {"Q": [{label: coeff}], "Phi": [...]}
    hamiltonian: HamiltonianExpr
    commutation: str
    poisson: str
    self_dual: bool
    self_dual_relabeling: object = None  # (perm, signs) or None


def _vec(labels, values):
    return {l: x for l, x in zip(labels, values) if x}


def build_report(an: Analysis, relabel_limit=6) -> AnalysisReport:
    ec, nc, rs = an.ec, an.classification, an.reduced
    L, V = nc.loop_labels, nc.vertex_labels

    def loops(items):
        return [
            {"class": h.branch_class, "provenance": h.provenance, "label": h.label, "vector": _vec(L, h.vector)}
            for h in items
        ]

    def cuts(items):
        return [{"class": c.branch_class, "vertices": list(c.vertices)} for c in items]

    classification = {
        "capacitive_loops": loops(nc.capacitive_loops),
        "inductive_loops": loops(nc.inductive_loops),
        "capacitive_cuts": cuts(nc.capacitive_cuts),
        "inductive_cuts": cuts(nc.inductive_cuts),
        "gauge_loops": [l for l, x in zip(L, nc.gauge_left) if x],
        "gauge_vertices": [v for v, x in zip(V, nc.gauge_right) if x],
    }
    n = rs.pair_count
    qn, pn = pair_labels(n)
    elims = []
    for e in rs.eliminations:
        names = qn if e.space == "q" else pn
        elims.append(
            {
                "variable": e.variable,
                "space": e.space,
                "fixed_by": e.fixed_by,
                "source": e.source,
                "expression": _vec(names, e.expression),
            }
        )
    pairs = {
        "Q": [_vec(rs.D.col_labels, r) for r in rs.D.rows()],
        "Phi": [_vec(rs.S.col_labels, r) for r in rs.S.rows()],
    }
    h = rs.hamiltonian
    relab = self_dual_relabeling(h) if n <= relabel_limit else None
    return AnalysisReport(
        ec.A,
        ec.B,
        an.M,
        ec.genus,
        len(ec.loops.faces),
        len(ec.loops.loops),
        dof_count(ec, nc, an.M),
        classification,
        tuple(elims),
        pairs,
        h,
        rs.commutation,
        rs.poisson,
        is_self_dual(h),
        relab,
    )


# structured form


def _r(x):
    return render_rational(Fraction(x))


def _mat_json(m: RationalMatrix):
    return {"rows": list(m.row_labels), "cols": list(m.col_labels), "entries": [[_r(x) for x in r] for r in m.rows()]}


def _mat_from(d):
    return RationalMatrix.from_rows(
        [[parse_rational(x) for x in r] for r in d["entries"]], tuple(d["rows"]), tuple(d["cols"])
    )


def _dict_r(d):
    return {k: _r(v) for k, v in d.items()}


def _dict_from(d):
    return {k: parse_rational(v) for k, v in d.items()}


def hamiltonian_json(h: HamiltonianExpr):
    return {
        "K_Q": _mat_json(h.quadratic_Q),
        "K_Phi": _mat_json(h.quadratic_Phi),
        "cosines": [
            {"space": t.space, "coefficient": _r(t.coefficient), "weights": [_r(w) for w in t.weights]}
            for t in h.cosine_terms
        ],
        "constant": _r(h.constant),
        "text": render_hamiltonian(h),
    }


def hamiltonian_from_json(d) -> HamiltonianExpr:
    cos = tuple(
        CosineTerm(parse_rational(t["coefficient"]), t["space"], tuple(parse_rational(w) for w in t["weights"]))
        for t in d["cosines"]
    )
    return HamiltonianExpr(_mat_from(d["K_Q"]), _mat_from(d["K_Phi"]), cos, parse_rational(d["constant"]))


def report_to_json(r: AnalysisReport) -> dict:
    cl = dict(r.classification)
    cl["capacitive_loops"] = [dict(h, vector=_dict_r(h["vector"])) for h in cl["capacitive_loops"]]
    cl["inductive_loops"] = [dict(h, vector=_dict_r(h["vector"])) for h in cl["inductive_loops"]]
    out = {
        "version": REPORT_VERSION,
        "genus": r.genus,
        "face_count": r.face_count,
        "loop_count": r.loop_count,
        "pair_count": r.pair_count,
        "A": _mat_json(r.A),
        "B": _mat_json(r.B),
        "M": _mat_json(r.M),
        "classification": cl,
        "eliminations": [dict(e, expression=_dict_r(e["expression"])) for e in r.eliminations],
        "pairs": {k: [_dict_r(row) for row in v] for k, v in r.pairs.items()},
        "hamiltonian": hamiltonian_json(r.hamiltonian),
        "poisson": r.poisson,
        "commutation": r.commutation,
        "self_dual": r.self_dual,
    }
    if r.self_dual_relabeling is not None:
        perm, signs = r.self_dual_relabeling
        out["self_dual_relabeling"] = {"permutation": list(perm), "signs": list(signs)}
    return out


def report_from_json(d) -> AnalysisReport:
    if d.get("version") != REPORT_VERSION:
        raise ValueError(f"unrecognized report version {d.get('version')!r}")
    cl = dict(d["classification"])
    for k in ("capacitive_loops", "inductive_loops"):
        cl[k] = [dict(h, vector=_dict_from(h["vector"])) for h in cl[k]]
    relab = d.get("self_dual_relabeling")
    if relab is not None:
        relab = (tuple(relab["permutation"]), tuple(relab["signs"]))
    return AnalysisReport(
        _mat_from(d["A"]),
        _mat_from(d["B"]),
        _mat_from(d["M"]),
        d["genus"],
        d["face_count"],
        d["loop_count"],
        d["pair_count"],
        cl,
        tuple(dict(e, expression=_dict_from(e["expression"])) for e in d["eliminations"]),
        {k: [_dict_from(row) for row in v] for k, v in d["pairs"].items()},
        hamiltonian_from_json(d["hamiltonian"]),
        d["commutation"],
        d["poisson"],
        d["self_dual"],
        relab,
    )


# text form


def _linear(coeffs: dict):
    """Render {name: coeff} as '2/3 q_l1 - q_l2'."""
    parts = []
    for name, c in coeffs.items():
        mag = abs(c)
        s = name if mag == 1 else f"{render_rational(mag)} {name}"
        if not parts:
            parts.append(s if c > 0 else f"-{s}")
        else:
            parts.append(("+ " if c > 0 else "- ") + s)
    return " ".join(parts) if parts else "0"


def _weights(names, w):
    return _linear({n: x for n, x in zip(names, w) if x})


def render_hamiltonian(h: HamiltonianExpr) -> str:
    """'H = 1/3 Q1^2 - 1/3 Q1 Q2 + ...' with exact coefficients."""
    terms = []
    n = h.pair_count
    qn, pn = pair_labels(n)
    for space, names in (("Q", qn), ("Phi", pn)):
        for (i, j), c in h.monomials(space).items():
            mono = f"{names[i]}^2" if i == j else f"{names[i]} {names[j]}"
            terms.append((c, mono))
    for t in h.cosine_terms:
        names = qn if t.space == "Q" else pn
        terms.append((-t.coefficient, f"cos({_weights(names, t.weights)})"))
    if h.constant:
        terms.append((h.constant, None))
    out = []
    for c, mono in terms:
        mag = abs(c)
        body = render_rational(mag) if mono is None else (mono if mag == 1 else f"{render_rational(mag)} {mono}")
        if not out:
            out.append(body if c > 0 else f"-{body}")
        else:
            out.append(("+ " if c > 0 else "- ") + body)
    return "H = " + (" ".join(out) if out else "0")


def render_text(r: AnalysisReport) -> str:
    lines = [
        f"genus: {r.genus}",
        f"faces: {r.face_count}",
        f"loops: {r.loop_count}",
        f"canonical pairs: N = {r.pair_count}",
        "",
        "incidence matrix A:",
        format_matrix(r.A),
        "",
        "orientation matrix B:",
        format_matrix(r.B),
        "",
        "connection matrix M:",
        format_matrix(r.M),
        "",
        "null classification:",
    ]
    cl = r.classification
    for key, title in (("capacitive_loops", "capacitive loops"), ("inductive_loops", "inductive loops")):
        for h in cl[key]:
            name = h["label"] or h["provenance"]
            lines.append(f"  {title}: {name}: {_linear({f'q_{k}': v for k, v in h['vector'].items()})}")
    for key, title in (("capacitive_cuts", "capacitive cuts"), ("inductive_cuts", "inductive cuts")):
        for c in cl[key]:
            lines.append(f"  {title}: {{{', '.join(c['vertices'])}}}")
    lines.append(f"  gauge: all loops ({len(cl['gauge_loops'])}), all vertices ({len(cl['gauge_vertices'])})")
    lines += ["", "eliminations:"]
    for e in r.eliminations:
        prefix = "q" if e["space"] == "q" else "phi"
        src = f" [{e['source']}]" if e["source"] else ""
        lines.append(f"  {prefix}_{e['variable']} = {_linear(e['expression'])}  ({e['fixed_by']}{src})")
    lines += ["", "canonical pairs:"]
    for i, (q, p) in enumerate(zip(r.pairs["Q"], r.pairs["Phi"]), 1):
        lines.append(f"  Q{i} = {_linear({f'q_{k}': v for k, v in q.items()})}")
        lines.append(f"  Phi{i} = {_linear({f'phi_{k}': v for k, v in p.items()})}")
    lines += [
        "",
        render_hamiltonian(r.hamiltonian),
        "",
        f"poisson: {r.poisson}",
        f"commutation: {r.commutation}",
        f"self-dual: {'true' if r.self_dual else 'false'}",
    ]
    if r.self_dual_relabeling is not None:
        perm, signs = r.self_dual_relabeling
        desc = ", ".join(f"{'-' if s < 0 else ''}{i + 1}" for i, s in zip(perm, signs))
        lines.append(f"self-dual up to relabeling: true (pairs -> {desc})")
    else:
        lines.append("self-dual up to relabeling: false")
    return "\n".join(lines) + "\n"


def serialize_report(r: AnalysisReport, format="json") -> bytes:
    if format == "json":
        return (json.dumps(report_to_json(r), indent=2) + "\n").encode()
    if format == "text":
        return render_text(r).encode()
    raise ValueError(f"unknown report format {format!r}")


def parse_report(data) -> AnalysisReport:
    if isinstance(data, bytes):
        data = data.decode()
    return report_from_json(json.loads(data))
