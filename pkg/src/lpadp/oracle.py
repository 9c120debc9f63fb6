"""Ground truth for the linear-quadratic case, plus closed-loop rollouts.

The discounted Riccati fixed point gives the exact optimal Q-function of an
LTI plant under quadratic cost, which is what the data-driven runs are
measured against. Rollouts simulate any policy on any plant and accumulate
discounted cost, with a divergence guard.
"""
from __future__ import annotations

import dataclasses

import numpy as np

__all__ = ["DareSolution", "DareNonConvergence", "DivergedTrajectory",
           "RolloutResult", "solve_discounted_dare", "rollout_cost", "qfun_error"]


class DareNonConvergence(RuntimeError):
    pass


class DivergedTrajectory(RuntimeError):
    def __init__(self, step, norm):
        self.step = int(step)
        self.norm = float(norm)
        super().__init__(f"state norm {norm:.3e} exceeded the blow-up bound at step {step}")


@dataclasses.dataclass(frozen=True)
class DareSolution:
    """P solves P = E + gA'PA - g^2 A'PB (F + gB'PB)^-1 B'PA.

    Pq is the induced optimal Q-matrix over [x; u], K the optimal gain
    (u* = -Kx), residual the fixed-point defect of P.
    """
    P: np.ndarray
    Pq: np.ndarray
    K: np.ndarray
    residual: float
    iterations: int


def _fixed_point(A, B, E, F, tol, max_iter):
    P = E.copy()
    for it in range(1, int(max_iter) + 1):
        PB = P @ B
        inner = F + B.T @ PB
        Pn = E + A.T @ P @ A - A.T @ PB @ np.linalg.solve(inner, PB.T @ A)
        Pn = 0.5 * (Pn + Pn.T)
        if np.abs(Pn - P).max() <= tol:
            return Pn, it
        P = Pn
    raise DareNonConvergence(
        f"Riccati recursion did not settle below {tol:g} in {max_iter} iterations")


def solve_discounted_dare(A, B, E, F, gamma, tol=1e-14, max_iter=1_000_000):
    """Fixed-point iteration from P = E; scalar inputs work as 1x1 matrices.

    Internally cross-checked: the discounted equation equals the undiscounted
    one on (sqrt(g) A, sqrt(g) B), and both recursions must agree to 1e-12
    relative before the result is returned.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    if B.ndim == 0:
        B = B.reshape(1, 1)
    elif B.ndim == 1:
        B = B[:, None]
    E = np.atleast_2d(np.asarray(E, dtype=float))
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    sg = np.sqrt(gamma)
    P, iters = _fixed_point(sg * A, sg * B, E, F, tol, max_iter)
    # direct discounted recursion as an independent arithmetic path
    Pd = E.copy()
    for _ in range(iters + 10):
        PB = Pd @ B
        inner = F + gamma * B.T @ PB
        Pd = E + gamma * A.T @ Pd @ A \
            - gamma ** 2 * A.T @ PB @ np.linalg.solve(inner, PB.T @ A)
        Pd = 0.5 * (Pd + Pd.T)
    scale = max(1.0, float(np.abs(P).max()))
    if np.abs(P - Pd).max() > 1e-12 * scale:
        raise DareNonConvergence("discounted and scaled-undiscounted recursions disagree")
    PB = P @ B
    inner = F + gamma * B.T @ PB
    resid = float(np.abs(
        E + gamma * A.T @ P @ A
        - gamma ** 2 * A.T @ PB @ np.linalg.solve(inner, PB.T @ A) - P).max())
    Pq = np.block([[E + gamma * A.T @ P @ A, gamma * A.T @ PB],
                   [gamma * PB.T @ A, inner]])
    Pq = 0.5 * (Pq + Pq.T)
    K = np.linalg.solve(inner, gamma * PB.T @ A)
    return DareSolution(P=P, Pq=Pq, K=K, residual=resid, iterations=iters)


@dataclasses.dataclass(frozen=True)
class RolloutResult:
    cost: float
    states: np.ndarray   # (horizon+1) x n
    inputs: np.ndarray   # horizon x m


def rollout_cost(plant, cost, policy_fn, x0, gamma, horizon, blowup=1e9):
    """Discounted cost of policy_fn from x0 over a finite horizon.

    policy_fn maps a state vector to an input vector. Raises
    DivergedTrajectory (with the step index) once the state sup-norm passes
    the blow-up bound.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    x = np.asarray(x0, dtype=float).ravel()
    if x.shape != (plant.state_dim,):
        raise ValueError(f"x0 has shape {x.shape}, plant state dim is {plant.state_dim}")
    states = np.empty((horizon + 1, plant.state_dim))
    inputs = np.empty((horizon, plant.input_dim))
    states[0] = x
    total = 0.0
    disc = 1.0
    for k in range(horizon):
        if np.abs(x).max() > blowup:
            raise DivergedTrajectory(k, np.abs(x).max())
        u = np.atleast_1d(np.asarray(policy_fn(x), dtype=float)).ravel()
        total += disc * cost.eval(x, u)
        x = plant.step(x, u)
        states[k + 1] = x
        inputs[k] = u
        disc *= gamma
    if np.abs(x).max() > blowup:
        raise DivergedTrajectory(horizon, np.abs(x).max())
    return RolloutResult(cost=float(total), states=states, inputs=inputs)


def qfun_error(params, dare):
    """Sup-norm gaps between a fitted extended-quadratic candidate and the
    exact optimal Q-matrix: (quadratic block, linear block, constant)."""
    from .basis import split_matrices
    f = params.family
    if f.kind != "extended_quadratic":
        raise ValueError("oracle comparison is defined for the extended_quadratic family")
    P, p, s = split_matrices(f, params.alpha)
    if P.shape != dare.Pq.shape:
        raise ValueError(f"candidate block is {P.shape}, oracle Q-matrix is {dare.Pq.shape}")
    return (float(np.abs(P - dare.Pq).max()), float(np.abs(p).max()), abs(s))
