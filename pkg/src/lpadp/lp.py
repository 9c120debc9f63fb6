"""Dense inequality-form LPs for Q-function fitting.

Everything here is maximize m'alpha subject to G alpha <= h with free
variables. Two assemblers build the policy-evaluation program (unknown
candidate on both sides of each row) and the one-step-backup program
(previous candidate frozen into the right-hand side). The solver wraps
HiGHS and then re-solves the active set as a least-squares system with
mixed-precision iterative refinement, which pushes vertex coordinates to a
few ulps so the outer iterations can settle to tight thresholds.

KKT residuals (primal feasibility, dual stationarity, complementarity gap)
are recomputed from the returned point and the solver duals; callers gate
on them rather than trusting solver status alone.
"""
from __future__ import annotations

import dataclasses
import itertools
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import linprog

from .basis import LinearPolicy, QParams, greedy_gain, objective_vector

__all__ = [
    "LpProblem", "LpSolution", "SolverSettings",
    "assemble_pi_lp", "assemble_vi_lp", "solve_lp", "solve_consistent",
    "dump_lp",
]


@dataclasses.dataclass
class LpProblem:
    """maximize m . alpha  subject to  G alpha <= h."""
    m: np.ndarray
    G: np.ndarray
    h: np.ndarray
    metadata: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=float).ravel()
        self.G = np.atleast_2d(np.asarray(self.G, dtype=float))
        self.h = np.asarray(self.h, dtype=float).ravel()
        if self.G.shape != (self.h.shape[0], self.m.shape[0]):
            raise ValueError(
                f"inconsistent LP shapes: G {self.G.shape}, m {self.m.shape}, h {self.h.shape}")


@dataclasses.dataclass
class LpSolution:
    alpha_star: Optional[np.ndarray]
    objective_value: Optional[float]
    status: str                       # optimal | unbounded | infeasible | numerical_failure
    kkt_residuals: dict
    n_active: int = 0
    refined: bool = False
    message: str = ""


@dataclasses.dataclass
class SolverSettings:
    feasibility_tol: float = 1e-10
    kkt_tol: float = 1e-9
    refine: bool = True
    # rows within active_tol * scale of tight enter the refinement system
    active_tol: float = 1e-6


_STATUS = {0: "optimal", 1: "numerical_failure", 2: "infeasible",
           3: "unbounded", 4: "numerical_failure"}


def _policy_action(family, policy, Y):
    if isinstance(policy, LinearPolicy):
        return policy.act(family, Y)
    if isinstance(policy, QParams):
        return greedy_gain(policy).act(family, Y)
    raise TypeError(f"policy must be a LinearPolicy or QParams, got {type(policy).__name__}")


def _tau_rows(family, tau):
    """Diagonal-dominance rows on the control block at margin tau.

    For every control diagonal entry and every sign pattern over its
    off-diagonal partners: -P_uu[i,i] + sum_j s_j P_uu[i,j] <= -tau. With a
    single input this is one row pinning the u^2 coefficient above tau.
    """
    xf = family.x_feature_dim
    m = family.input_dim
    # feature index of the (z_a, z_b) quadratic entry, a <= b
    idx = {(int(a), int(b)): k for k, (a, b) in enumerate(zip(family._iu, family._ju))}
    rows = []
    for i in range(m):
        zi = xf + i
        others = [j for j in range(m) if j != i]
        for signs in itertools.product((1.0, -1.0), repeat=len(others)):
            row = np.zeros(family.feature_count)
            row[idx[(zi, zi)]] = -1.0
            for s, j in zip(signs, others):
                a, b = sorted((zi, xf + j))
                row[idx[(a, b)]] = s
            rows.append(row)
    G = np.vstack(rows)
    h = np.full(G.shape[0], -float(tau))
    return G, h


def _with_tau(G, h, family, tau, metadata):
    if tau is None:
        return G, h
    Gt, ht = _tau_rows(family, tau)
    metadata["tau"] = float(tau)
    metadata["n_tau_rows"] = Gt.shape[0]
    return np.vstack([G, Gt]), np.concatenate([h, ht])


def assemble_pi_lp(buffer, family, policy, gamma, moments, tau=None):
    """Policy-evaluation LP: rows phi(x,a) - gamma phi(y, policy(y)) on the left.

    Its (unique, all-binding) optimum is the evaluation of the given policy
    when the fitted equation is exactly solvable over the feature span;
    in general it is the tightest underestimator in the moment objective.
    """
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    Uy = _policy_action(family, policy, buffer.y)
    G = family.features_batch(buffer.x, buffer.a) - gamma * family.features_batch(buffer.y, Uy)
    h = buffer.l.copy()
    meta = {"kind": "pi", "gamma": float(gamma), "n_buffer_rows": len(buffer)}
    G, h = _with_tau(G, h, family, tau, meta)
    return LpProblem(objective_vector(family, moments), G, h, meta)


def assemble_vi_lp(buffer, family, prev_q, gamma, moments, policy=None, tau=None):
    """One-step-backup LP: phi(x,a) alpha <= l + gamma Q_prev(y, policy(y)).

    policy defaults to the greedy policy of prev_q.
    """
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    if policy is None:
        policy = prev_q
    Uy = _policy_action(family, policy, buffer.y)
    qy = family.features_batch(buffer.y, Uy) @ prev_q.alpha
    G = family.features_batch(buffer.x, buffer.a)
    h = buffer.l + gamma * qy
    meta = {"kind": "vi", "gamma": float(gamma), "n_buffer_rows": len(buffer)}
    G, h = _with_tau(G, h, family, tau, meta)
    return LpProblem(objective_vector(family, moments), G, h, meta)


def _kkt(m, G, h, alpha, lam):
    r = G @ alpha - h
    primal = max(0.0, float(r.max())) / max(1.0, float(np.abs(h).max()))
    dual = float(np.abs(m - G.T @ lam).max()) / max(1.0, float(np.abs(m).max()))
    obj = float(m @ alpha)
    gap = abs(obj - float(h @ lam)) / max(1.0, abs(obj))
    return {"primal": primal, "dual": dual, "gap": gap}


def solve_lp(problem, settings=None):
    """Solve with HiGHS, refine the vertex, report KKT residuals.

    Refinement re-solves the near-active rows by column-scaled QR with three
    extended-precision residual corrections, and keeps the result only if it
    stays feasible and preserves the objective. The active set is taken at
    active_tol * scale since HiGHS itself only locates the vertex to its own
    feasibility tolerance.
    """
    st = settings or SolverSettings()
    m, G, h = problem.m, problem.G, problem.h
    res = linprog(-m, A_ub=G, b_ub=h, bounds=(None, None), method="highs",
                  options={"presolve": True,
                           "primal_feasibility_tolerance": st.feasibility_tol,
                           "dual_feasibility_tolerance": st.feasibility_tol})
    status = _STATUS.get(res.status, "numerical_failure")
    if status != "optimal":
        return LpSolution(None, None, status, {}, message=res.message)
    alpha = res.x
    lam = -np.asarray(res.ineqlin.marginals)   # nonneg multipliers of G alpha <= h
    scale = max(1.0, float(np.abs(h).max()))
    K = G.shape[1]
    refined = False
    n_active = int((h - G @ alpha <= st.active_tol * scale).sum())
    if st.refine:
        for _ in range(2):
            r = h - G @ alpha
            act = r <= st.active_tol * scale
            n_active = int(act.sum())
            if n_active < K:
                break
            Ga, ha = G[act], h[act]
            cs = np.abs(Ga).max(axis=0)
            cs[cs < 1e-12] = 1.0
            Q_, R_ = np.linalg.qr(Ga / cs)
            dr = np.abs(np.diag(R_))
            if dr.min() <= 1e-10 * dr.max():
                break
            a_s = solve_triangular(R_, Q_.T @ ha)
            Gl = Ga.astype(np.longdouble)
            hl = ha.astype(np.longdouble)
            csl = cs.astype(np.longdouble)
            asl = a_s.astype(np.longdouble)
            for _ in range(3):
                rl = hl - Gl @ (asl / csl)
                d = solve_triangular(R_, Q_.T @ np.asarray(rl, dtype=float))
                asl = asl + d.astype(np.longdouble)
            cand = np.asarray(asl / csl, dtype=float)
            if (h - G @ cand).min() < -1e-7 * scale:
                break
            if abs(m @ cand - m @ alpha) > 1e-6 * max(1.0, abs(m @ alpha)):
                break
            if np.array_equal(cand, alpha):
                refined = True
                break
            alpha = cand
            refined = True
    return LpSolution(alpha, float(m @ alpha), "optimal", _kkt(m, G, h, alpha, lam),
                      n_active=n_active, refined=refined, message=res.message)


def solve_consistent(G, h):
    """Least-squares solve of G alpha = h by column-scaled QR with three
    extended-precision refinement passes. Returns (alpha, max |G alpha - h|).

    Used when a policy-evaluation LP is unbounded but its rows form a
    consistent system: the all-binding point is then the LP optimum the
    evaluation semantics calls for.
    """
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    cs = np.abs(G).max(axis=0)
    cs[cs < 1e-12] = 1.0
    Q_, R_ = np.linalg.qr(G / cs)
    a_s = solve_triangular(R_, Q_.T @ h)
    Gl = G.astype(np.longdouble)
    hl = h.astype(np.longdouble)
    csl = cs.astype(np.longdouble)
    asl = a_s.astype(np.longdouble)
    for _ in range(3):
        rl = hl - Gl @ (asl / csl)
        d = solve_triangular(R_, Q_.T @ np.asarray(rl, dtype=float))
        asl = asl + d.astype(np.longdouble)
    alpha = np.asarray(asl / csl, dtype=float)
    resid = float(np.abs(G @ alpha - h).max())
    return alpha, resid


def dump_lp(problem, path):
    """Plain-text dump: shapes, then m, h, and G one row per line, 17 digits."""
    N, K = problem.G.shape
    with open(path, "w") as fh:
        fh.write("# dense LP: maximize m.alpha subject to G alpha <= h, alpha free\n")
        fh.write(f"# rows {N} cols {K}\n")
        fh.write("m " + " ".join(format(v, ".17g") for v in problem.m) + "\n")
        fh.write("h " + " ".join(format(v, ".17g") for v in problem.h) + "\n")
        for row in problem.G:
            fh.write("G " + " ".join(format(v, ".17g") for v in row) + "\n")
    return path
