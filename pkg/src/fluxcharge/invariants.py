"""Invariant suites run by `fluxcharge check` and by the randomized tests.

Each suite returns a list of Check(name, ok, detail).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .duality import (
    DualityError,
    dual_circuit,
    dual_connection_check,
    dual_variable_choice,
    hamiltonian_dual,
)
from .graph import same_rotation
from .linalg import rank, right_nullspace, vectors_rank
from .reduction import (
    Analysis,
    ReductionError,
    analyze,
    classification_spans,
    kinetic_form_residual,
)


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""


def structural_checks(an: Analysis):
    ec, nc, M = an.ec, an.classification, an.M
    A, B = ec.A, ec.B
    c = ec.circuit
    V, E, F = len(c.vertices), len(c.edges), len(ec.loops.faces)
    nL = len(ec.loops.loops)
    out = [Check("B A = 0", (B @ A).is_zero())]
    out.append(Check("rows of A sum to zero", all(sum(r) == 0 for r in A.rows())))
    faces = ec.loops.face_labels
    out.append(
        Check("face columns of B sum to zero", all(sum(B[f, e] for f in faces) == 0 for e in c.edge_ids))
    )
    out.append(Check("Euler identity", V - E + F == 2 - 2 * ec.genus, f"V={V} E={E} F={F} g={ec.genus}"))
    rA, rB = rank(A), rank(B)
    out.append(Check("rank A = |V| - 1", rA == V - 1, f"rank {rA}"))
    out.append(Check("rank B = |L| - 1", rB == nL - 1, f"rank {rB}"))
    kerB = right_nullspace(B)
    cols = [A.col(v) for v in A.col_labels]
    out.append(
        Check(
            "ker B = im A",
            len(kerB) == rA and vectors_rank(cols + kerB, E) == rA,
            f"dim ker B {len(kerB)}",
        )
    )
    out.append(Check("null classification spans both null spaces", classification_spans(nc, M)))
    if ec.genus == 0:
        lhs = F - len(nc.inductive_loops) - len(nc.capacitive_loops)
        rhs = V - len(nc.inductive_cuts) - len(nc.capacitive_cuts)
        out.append(Check("planar counting identity", lhs == rhs, f"{lhs} vs {rhs}"))
    rs = an.reduced
    out.append(Check("N = rank M", rs.pair_count == rank(M), f"N={rs.pair_count}"))
    out.append(Check("kinetic form identity", kinetic_form_residual(rs).is_zero()))
    return out


def duality_checks(an: Analysis):
    ec = an.ec
    try:
        dual, dm = dual_circuit(ec)
    except DualityError as exc:
        # off the sphere, or a bridge (whose dual would be a self-loop)
        return [Check("dual circuit", ec.genus != 0 or "on 0 loops" in str(exc), f"not dualizable: {exc}")]
    out = []
    back, _ = dual_circuit(dual)
    out.append(
        Check(
            "dual of dual restores the circuit",
            back.circuit == ec.circuit
            and same_rotation(back.rotation, ec.rotation)
            and back.loops.faces == ec.loops.faces,
        )
    )
    out.append(Check("dual B = A^T", dual.B.same_entries(ec.A.T)))
    try:
        dan = analyze(dual, dual_variable_choice(an.reduced.D, an.reduced.S, dm))
        out.append(Check("dual connection is -M^T", dual_connection_check(an.M, dan.M, dm)))
        out.append(
            Check("dual circuit Hamiltonian is the dual Hamiltonian", dan.hamiltonian == hamiltonian_dual(an.hamiltonian))
        )
    except ReductionError as exc:
        out.append(Check("dual analysis", False, str(exc)))
    h = an.hamiltonian
    out.append(Check("hamiltonian_dual is an involution", hamiltonian_dual(hamiltonian_dual(h)) == h))
    return out


def gradient_fd_error(h, rng: random.Random, trials=5, eps=1e-6):
    """Largest relative gap between closed-form and central-difference gradients."""
    from .dynamics import NumericHamiltonian

    nh = NumericHamiltonian(h)
    worst = 0.0
    for _ in range(trials):
        Q = np.array([rng.uniform(-1, 1) for _ in range(nh.n)])
        P = np.array([rng.uniform(-1, 1) for _ in range(nh.n)])
        gq, gp = nh.grad_Q(Q), nh.grad_Phi(P)
        fq, fp = np.zeros(nh.n), np.zeros(nh.n)
        for i in range(nh.n):
            d = np.zeros(nh.n)
            d[i] = eps
            fq[i] = (nh.energy(Q + d, P) - nh.energy(Q - d, P)) / (2 * eps)
            fp[i] = (nh.energy(Q, P + d) - nh.energy(Q, P - d)) / (2 * eps)
        g = np.concatenate([gq, gp])
        f = np.concatenate([fq, fp])
        worst = max(worst, float(np.max(np.abs(g - f)) / max(1.0, float(np.max(np.abs(g))))))
    return worst


def dynamics_checks(an: Analysis, seed=0, t_end=5.0, step=1e-3):
    from .dynamics import State, check_kirchhoff, energy_drift, integrate

    rng = random.Random(seed)
    h = an.hamiltonian
    n = h.pair_count
    out = []
    g = gradient_fd_error(h, rng)
    out.append(Check("gradient matches finite differences", g <= 1e-8, f"{g:.3g}"))
    s0 = State([rng.uniform(-0.5, 0.5) for _ in range(n)], [rng.uniform(-0.5, 0.5) for _ in range(n)])
    tr = integrate(h, s0, step, t_end)
    d = energy_drift(tr)
    out.append(Check("energy drift", d <= 1e-7, f"{d:.3g}"))
    k = check_kirchhoff(an.reduced, tr, stride=10)
    out.append(Check("Kirchhoff residuals", k.ok(1e-6), f"{k.worst:.3g}"))
    return out


def all_checks(an: Analysis, seed=0):
    return structural_checks(an) + duality_checks(an) + dynamics_checks(an, seed)
