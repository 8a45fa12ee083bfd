"""Classical dynamics of a reduced Hamiltonian.

Hamilton's equations with {Phi_j, Q_i} = delta_ij read
    dPhi/dt = dH/dQ,   dQ/dt = -dH/dPhi.
Exact rational data is converted to floats here and nowhere else.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .reduction import HamiltonianExpr, ReducedSystem


class DivergenceError(ArithmeticError):
    """Integration produced a non-finite state."""


def _f(x):
    return float(x)


class NumericHamiltonian:
    """Float arrays for fast evaluation of a HamiltonianExpr."""

    def __init__(self, h: HamiltonianExpr):
        self.expr = h
        self.n = h.pair_count
        self.KQ = np.array([[_f(x) for x in r] for r in h.quadratic_Q.rows()], dtype=float).reshape(self.n, self.n)
        self.KP = np.array([[_f(x) for x in r] for r in h.quadratic_Phi.rows()], dtype=float).reshape(self.n, self.n)
        self.cq = np.array([_f(t.coefficient) for t in h.cosine_terms if t.space == "Q"])
        self.wq = np.array([[_f(w) for w in t.weights] for t in h.cosine_terms if t.space == "Q"]).reshape(-1, self.n)
        self.cp = np.array([_f(t.coefficient) for t in h.cosine_terms if t.space == "Phi"])
        self.wp = np.array([[_f(w) for w in t.weights] for t in h.cosine_terms if t.space == "Phi"]).reshape(-1, self.n)
        self.const = _f(h.constant)
        self.linear = not h.cosine_terms

    def energy(self, Q, Phi):
        """H at one state, or along the last axis for stacked states."""
        Q = np.asarray(Q, dtype=float)
        Phi = np.asarray(Phi, dtype=float)
        e = 0.5 * np.einsum("...i,ij,...j->...", Q, self.KQ, Q)
        e = e + 0.5 * np.einsum("...i,ij,...j->...", Phi, self.KP, Phi)
        if self.cq.size:
            e = e - np.cos(Q @ self.wq.T) @ self.cq
        if self.cp.size:
            e = e - np.cos(Phi @ self.wp.T) @ self.cp
        return e + self.const

    def grad_Q(self, Q):
        g = self.KQ @ Q
        if self.cq.size:
            g = g + self.wq.T @ (self.cq * np.sin(self.wq @ Q))
        return g

    def grad_Phi(self, Phi):
        g = self.KP @ Phi
        if self.cp.size:
            g = g + self.wp.T @ (self.cp * np.sin(self.wp @ Phi))
        return g

    def rates(self, Q, Phi):
        """(dPhi/dt, dQ/dt)."""
        return self.grad_Q(Q), -self.grad_Phi(Phi)

    def linear_generator(self):
        """Matrix G with d/dt (Q, Phi) = G (Q, Phi) for purely quadratic H."""
        n = self.n
        G = np.zeros((2 * n, 2 * n))
        G[:n, n:] = -self.KP
        G[n:, :n] = self.KQ
        return G


@dataclass(frozen=True)
class State:
    Q: tuple
    Phi: tuple
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "Q", tuple(float(x) for x in self.Q))
        object.__setattr__(self, "Phi", tuple(float(x) for x in self.Phi))
        if len(self.Q) != len(self.Phi):
            raise ValueError("Q and Phi must have the same length")
        if not all(math.isfinite(x) for x in self.Q + self.Phi):
            raise ValueError("state entries must be finite")


def vector_field(h, s: State):
    """(dPhi/dt, dQ/dt) at state s, from closed-form derivatives of H."""
    nh = h if isinstance(h, NumericHamiltonian) else NumericHamiltonian(h)
    if len(s.Q) != nh.n:
        raise ValueError(f"state has {len(s.Q)} pairs, Hamiltonian has {nh.n}")
    dphi, dq = nh.rates(np.array(s.Q), np.array(s.Phi))
    return tuple(dphi.tolist()), tuple(dq.tolist())


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    Q: np.ndarray  # samples x N
    Phi: np.ndarray
    step: float
    hamiltonian: HamiltonianExpr

    @property
    def samples(self):
        return [State(q, p, t) for t, q, p in zip(self.times, self.Q, self.Phi)]

    def __len__(self):
        return len(self.times)

    def energies(self):
        return NumericHamiltonian(self.hamiltonian).energy(self.Q, self.Phi)


def integrate(h: HamiltonianExpr, s0: State, step: float, t_end: float) -> Trajectory:
    """Classical fixed-step RK4; floor(t_end/step) + 1 samples starting at s0.time."""
    with np.errstate(over="ignore", invalid="ignore"):
        return _integrate(h, s0, step, t_end)


def _integrate(h, s0, step, t_end):
    if not step > 0 or not t_end > 0:
        raise ValueError("step and t_end must be positive")
    nh = NumericHamiltonian(h)
    n = nh.n
    if len(s0.Q) != n:
        raise ValueError(f"state has {len(s0.Q)} pairs, Hamiltonian has {n}")
    steps = int(math.floor(t_end / step + 1e-9))
    z = np.empty((steps + 1, 2 * n))
    z[0, :n] = s0.Q
    z[0, n:] = s0.Phi
    if nh.linear:
        # RK4 applied to z' = G z is the fixed polynomial map below
        Gh = nh.linear_generator() * step
        P = np.eye(2 * n)
        term = np.eye(2 * n)
        for k in range(1, 5):
            term = term @ Gh / k
            P = P + term
        PT = P.T
        for i in range(steps):
            z[i + 1] = z[i] @ PT
        bad = ~np.isfinite(z).all(axis=1)
        if bad.any():
            i = int(np.argmax(bad))
            raise DivergenceError(f"non-finite state at t = {s0.time + i * step}")
    else:
        def f(y):
            dphi, dq = nh.rates(y[:n], y[n:])
            return np.concatenate([dq, dphi])

        h2 = step / 2
        for i in range(steps):
            y = z[i]
            k1 = f(y)
            k2 = f(y + h2 * k1)
            k3 = f(y + h2 * k2)
            k4 = f(y + step * k3)
            z[i + 1] = y + (step / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.isfinite(z[i + 1]).all():
                raise DivergenceError(f"non-finite state at t = {s0.time + (i + 1) * step}")
    times = s0.time + step * np.arange(steps + 1)
    return Trajectory(times, z[:, :n].copy(), z[:, n:].copy(), step, h)


def energy_drift(t: Trajectory) -> float:
    """max |H(s) - H(s0)| / max(1, |H(s0)|)."""
    if len(t) == 0:
        raise ValueError("empty trajectory")
    e = t.energies()
    return float(np.max(np.abs(e - e[0])) / max(1.0, abs(e[0])))


def normal_mode_frequencies(h: HamiltonianExpr):
    """Angular frequencies sqrt(eig(K_Q K_Phi)) of a quadratic Hamiltonian, ascending."""
    nh = NumericHamiltonian(h)
    ev = np.linalg.eigvals(nh.KQ @ nh.KP)
    return np.sort(np.sqrt(np.abs(ev.real)))


@dataclass(frozen=True)
class KirchhoffReport:
    loop_voltage: float  # max |sum of branch voltages around a loop|
    node_current: float  # max |sum of branch currents at a node|
    capacitive_constitutive: float  # max |branch voltage - dE/dq| on capacitive branches
    inductive_constitutive: float  # max |branch current - dE/dphi| on inductive branches

    @property
    def worst(self):
        return max(self.loop_voltage, self.node_current, self.capacitive_constitutive, self.inductive_constitutive)

    def ok(self, tol=1e-6):
        return self.worst <= tol


def _arr(m):
    return np.array([[float(x) for x in r] for r in m.rows()], dtype=float).reshape(m.nrows, m.ncols)


def _energy_slope(kind, parameter, x):
    if kind in ("capacitor", "inductor"):
        return x / parameter
    return parameter * np.sin(x)


def _project_out(r, basis):
    """Residual of r (samples x k) after removing its component along the basis columns."""
    if basis.size == 0:
        return r
    coef, *_ = np.linalg.lstsq(basis, r.T, rcond=None)
    return r - (basis @ coef).T


def check_kirchhoff(rs: ReducedSystem, t: Trajectory, stride: int = 1) -> KirchhoffReport:
    """Reconstruct every branch quantity from the reduced trajectory and test circuit laws.

    Time derivatives come from the exact vector field at each sample.
    Constitutive residuals are measured modulo the directions the reduction
    leaves undetermined (absent fluxes along capacitive cuts and absent
    charges around inductive loops).
    """
    ec = rs.lagrangian.ec
    c = ec.circuit
    nh = NumericHamiltonian(rs.hamiltonian)
    Q = t.Q[::stride]
    Phi = t.Phi[::stride]
    dPhi = Q @ nh.KQ.T
    dQ = -(Phi @ nh.KP.T)
    if nh.cq.size:
        dPhi = dPhi + (np.sin(Q @ nh.wq.T) * nh.cq) @ nh.wq
    if nh.cp.size:
        dQ = dQ - (np.sin(Phi @ nh.wp.T) * nh.cp) @ nh.wp

    Gq, Gp = _arr(rs.Gq), _arr(rs.Gphi)
    A, B = _arr(ec.A), _arr(ec.B)
    q, qd = Q @ Gq.T, dQ @ Gq.T
    phi, phid = Phi @ Gp.T, dPhi @ Gp.T
    branch_q = q @ B  # samples x edges, (B^T q)_e
    branch_qd = qd @ B
    branch_phi = phi @ A.T
    branch_phid = phid @ A.T

    cap = np.array([e.element.branch_class == "C" for e in c.edges])
    voltage = np.empty_like(branch_phid)
    current = np.empty_like(branch_qd)
    for k, e in enumerate(c.edges):
        el = e.element
        p = float(el.parameter)
        if cap[k]:
            voltage[:, k] = _energy_slope(el.kind, p, branch_q[:, k])
            current[:, k] = branch_qd[:, k]
        else:
            voltage[:, k] = branch_phid[:, k]
            current[:, k] = _energy_slope(el.kind, p, branch_phi[:, k])

    kvl = voltage @ B.T  # samples x loops
    kcl = current @ A  # samples x vertices

    cap_res = (branch_phid - voltage)[:, cap]
    cut_dirs = [np.array([float(x) for x in cut.vector]) for cut in rs.classification.capacitive_cuts]
    basis = np.array([(A @ s)[cap] for s in cut_dirs]).T if cut_dirs else np.zeros((int(cap.sum()), 0))
    cap_res = _project_out(cap_res, basis)

    ind = ~cap
    ind_res = (branch_qd - current)[:, ind]
    loop_dirs = [np.array([float(x) for x in h.vector]) for h in rs.classification.inductive_loops]
    basis = np.array([(n @ B)[ind] for n in loop_dirs]).T if loop_dirs else np.zeros((int(ind.sum()), 0))
    ind_res = _project_out(ind_res, basis)

    def mx(a):
        return float(np.max(np.abs(a))) if a.size else 0.0

    return KirchhoffReport(mx(kvl), mx(kcl), mx(cap_res), mx(ind_res))


def write_csv(t: Trajectory, fh):
    """Trajectory CSV: header t,Q1..QN,Phi1..PhiN,H; 17 significant digits."""
    n = t.Q.shape[1]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t"] + [f"Q{i + 1}" for i in range(n)] + [f"Phi{i + 1}" for i in range(n)] + ["H"])
    e = t.energies()
    for i in range(len(t)):
        row = [t.times[i], *t.Q[i], *t.Phi[i], e[i]]
        w.writerow([format(float(x), ".17g") for x in row])


def read_csv(fh):
    """Inverse of write_csv: (header, float rows)."""
    r = csv.reader(fh)
    header = next(r)
    return header, np.array([[float(x) for x in row] for row in r])
