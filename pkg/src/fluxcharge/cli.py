"""Command-line interface: analyze, dualize, simulate, check.

Exit codes: 0 success, 1 invariant or check failure, 2 parse or validation
error, 3 unsupported structure (no planar dual, nonlinear constraint).
"""

from __future__ import annotations

import argparse
import io
import sys

from .duality import DualityError, dual_circuit, dual_variable_choice
from .dynamics import DivergenceError, State, check_kirchhoff, energy_drift, integrate, write_csv
from .graph import CircuitError
from .invariants import Check, all_checks
from .netlist import (
    NetlistError,
    document_embedded,
    embedded_document,
    load_netlist,
    parse_netlist,
    serialize_netlist,
)
from .reduction import ReductionError, UnsupportedConstraint, analyze
from .report import build_report, serialize_report

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_UNSUPPORTED = 0, 1, 2, 3

KIRCHHOFF_TOL = 1e-6


class UsageError(ValueError):
    pass


def _emit(data: bytes, out):
    if out:
        with open(out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _load(path):
    try:
        doc = load_netlist(path)
    except OSError as exc:
        raise NetlistError(f"cannot read {path}: {exc.strerror}") from None
    return doc, document_embedded(doc)


def parse_state(text, n):
    """'q=1,phi=0' sets every pair; 'Q2=0.5' or 'Phi1=-1' sets one entry."""
    Q, P = [0.0] * n, [0.0] * n
    for item in filter(None, (s.strip() for s in text.split(","))):
        if "=" not in item:
            raise UsageError(f"bad state assignment {item!r}; expected name=value")
        name, val = (s.strip() for s in item.split("=", 1))
        try:
            x = float(val)
        except ValueError:
            raise UsageError(f"bad value in state assignment {item!r}") from None
        low = name.lower()
        if low == "q":
            Q = [x] * n
        elif low == "phi":
            P = [x] * n
        else:
            if low.startswith("phi"):
                target, idx = P, low[3:]
            elif low.startswith("q"):
                target, idx = Q, low[1:]
            else:
                raise UsageError(f"unknown state variable {name!r}")
            if not idx.isdigit() or not 1 <= int(idx) <= n:
                raise UsageError(f"state variable {name!r} out of range 1..{n}")
            target[int(idx) - 1] = x
    return State(Q, P)


def cmd_analyze(args):
    doc, ec = _load(args.file)
    an = analyze(ec, doc.variable_choice)
    _emit(serialize_report(build_report(an), args.format), args.out)
    return EXIT_OK


def cmd_dualize(args):
    doc, ec = _load(args.file)
    dual, dm = dual_circuit(ec)
    choice = None
    try:
        rs = analyze(ec, doc.variable_choice).reduced
        choice = dual_variable_choice(rs.D, rs.S, dm)
    except UnsupportedConstraint:
        pass
    _emit(serialize_netlist(embedded_document(dual, choice)), args.out)
    return EXIT_OK


def cmd_simulate(args):
    doc, ec = _load(args.file)
    an = analyze(ec, doc.variable_choice)
    s0 = parse_state(args.state, an.reduced.pair_count)
    if not args.dt > 0 or not args.t_end > 0:
        raise UsageError("--dt and --t-end must be positive")
    tr = integrate(an.hamiltonian, s0, args.dt, args.t_end)
    buf = io.StringIO()
    write_csv(tr, buf)
    _emit(buf.getvalue().encode(), args.out)
    drift = energy_drift(tr)
    k = check_kirchhoff(an.reduced, tr)
    print(
        f"samples: {len(tr)}  final t: {tr.times[-1]:.17g}  energy drift: {drift:.3e}  "
        f"max Kirchhoff residual: {k.worst:.3e}",
        file=sys.stderr,
    )
    if not k.ok(KIRCHHOFF_TOL):
        print(f"Kirchhoff residual above {KIRCHHOFF_TOL:g}: {k}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_check(args):
    doc, ec = _load(args.file)
    an = analyze(ec, doc.variable_choice)
    checks = all_checks(an, args.seed)
    # the netlist format must reproduce this circuit exactly
    text = serialize_netlist(embedded_document(ec, doc.variable_choice))
    again = document_embedded(parse_netlist(text))
    checks.append(Check("netlist round trip", again == ec and again.B == ec.B))
    failed = 0
    for c in checks:
        status = "ok" if c.ok else "FAIL"
        failed += not c.ok
        print(f"{status:4} {c.name}" + (f"  ({c.detail})" if c.detail else ""))
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_CHECK if failed else EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="fluxcharge", description="Flux-charge symmetric analysis of LC circuits.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="matrices, constraint resolution and Hamiltonian")
    a.add_argument("file")
    a.add_argument("--out")
    a.add_argument("--format", choices=("json", "text"), default="json")
    a.set_defaults(func=cmd_analyze)

    d = sub.add_parser("dualize", help="planar dual circuit as a netlist")
    d.add_argument("file")
    d.add_argument("--out")
    d.set_defaults(func=cmd_dualize)

    s = sub.add_parser("simulate", help="integrate Hamilton's equations, CSV trajectory")
    s.add_argument("file")
    s.add_argument("--t-end", type=float, required=True)
    s.add_argument("--dt", type=float, required=True)
    s.add_argument("--state", required=True, help="e.g. q=1,phi=0 or Q1=1,Phi2=0.5")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("check", help="run the invariant suites on one circuit")
    c.add_argument("file")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (DualityError, UnsupportedConstraint) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (NetlistError, CircuitError, ReductionError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
