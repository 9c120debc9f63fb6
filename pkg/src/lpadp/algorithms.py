"""Policy iteration and value iteration over LP-fitted Q-candidates.

Both loops share the shape: act on the buffer successors with the current
policy, solve one dense LP, read off the next candidate, update the greedy
policy. They differ in where the previous candidate sits. Policy iteration
keeps the unknown on both sides (an evaluation equation); value iteration
freezes the previous candidate into the right-hand side (a one-step backup).

Runs never raise from inside the loop. Solver failures, undefined greedy
policies and detected cycles all truncate the trace with a status string and
a diagnostic, so batch experiments can be inspected after the fact.

Stopping uses one of two successive-difference rules, switched in the
config: "qvalues" (sup norm over the buffer Q-values, the default) or
"params" (sup norm over the parameter blocks). On top of that the runner
watches for bitwise repetition of the coefficient vector with periods up to
cycle_max_period. Bitwise period 1 means the LP returns the exact same
vertex again; nothing further can change, so the run is converged no matter
how small the threshold was set. Longer periods report status "cycle" with
the period and the sup-norm amplitude across one window, which is what a
policy/vertex oscillation actually looks like in exact arithmetic.
"""
from __future__ import annotations

import dataclasses
import time
from typing import List, Optional

import numpy as np

from .basis import (BasisFamily, LinearPolicy, MomentSpec, PolicyUndefined,
                    QParams, greedy_gain, split_matrices)
from .lp import SolverSettings, assemble_pi_lp, assemble_vi_lp, solve_consistent, solve_lp

__all__ = ["RunConfig", "IterationRecord", "IterationTrace",
           "run_q_pi_lp", "run_q_vi_lp", "stopping_check"]

UNBOUNDED_PI_DIAGNOSTIC = ("evaluation LP unbounded: initial policy likely not "
                           "stabilizing or buffer lacks excitation")
UNBOUNDED_VI_DIAGNOSTIC = ("backup LP unbounded: the objective admits a feasible "
                           "ascent ray on this buffer; the relevance-weight moments "
                           "are not consistent with any sampling distribution that "
                           "covers these rows")


@dataclasses.dataclass
class RunConfig:
    """Knobs for one run. algorithm is "pi" or "vi".

    PI needs initial_policy (or initial_q to take its greedy policy from);
    VI needs initial_q and optionally an initial_policy override for the
    first backup. epsilon boundary counts as converged. stop_rule selects
    which successive-difference sequence gates termination.
    """
    algorithm: str
    gamma: float
    moments: MomentSpec
    epsilon: float = 1e-12
    max_iters: int = 500
    initial_policy: Optional[LinearPolicy] = None
    initial_q: Optional[QParams] = None
    stop_rule: str = "qvalues"
    cycle_max_period: int = 8
    tau: Optional[float] = None
    pi_consistent_fallback: bool = True
    consistent_residual_tol: float = 1e-6
    solver: SolverSettings = dataclasses.field(default_factory=SolverSettings)

    def __post_init__(self):
        if self.algorithm not in ("pi", "vi"):
            raise ValueError(f"algorithm must be 'pi' or 'vi', got {self.algorithm!r}")
        if self.stop_rule not in ("qvalues", "params"):
            raise ValueError(f"stop_rule must be 'qvalues' or 'params', got {self.stop_rule!r}")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must be in (0, 1)")
        if self.epsilon < 0 or self.max_iters < 1:
            raise ValueError("epsilon must be >= 0 and max_iters >= 1")


@dataclasses.dataclass
class IterationRecord:
    i: int
    alpha: np.ndarray
    q_values: np.ndarray
    dq_sup: float
    dparams_sup: float
    dP_sup: float
    dp_sup: float
    ds_abs: float
    lp_status: str
    n_active: int
    refined: bool
    fallback: bool
    wall_time: float


@dataclasses.dataclass
class IterationTrace:
    family: BasisFamily
    status: str = "running"
    diagnostic: str = ""
    iterations: List[IterationRecord] = dataclasses.field(default_factory=list)
    final_params: Optional[QParams] = None
    final_policy: Optional[LinearPolicy] = None
    cycle_period: Optional[int] = None
    cycle_amplitude: Optional[float] = None

    @property
    def n_iters(self):
        return len(self.iterations)

    def series(self, field):
        return np.array([getattr(r, field) for r in self.iterations])


def stopping_check(values_now, values_prev, epsilon):
    """Sup-norm successive-difference rule; landing on the boundary stops."""
    diff = np.abs(np.asarray(values_now) - np.asarray(values_prev)).max()
    return bool(diff <= epsilon)


def _block_diffs(family, alpha, alpha_prev):
    P1, p1, s1 = split_matrices(family, alpha)
    P0, p0, s0 = split_matrices(family, alpha_prev)
    dP = float(np.abs(P1 - P0).max())
    dp = float(np.abs(p1 - p0).max()) if family.has_linear else 0.0
    ds = abs(s1 - s0)
    return dP, dp, ds, max(dP, dp, ds)


def _detect_cycle(alphas, max_period):
    """Smallest period p with alphas[-1] bitwise equal to alphas[-1-p]."""
    last = alphas[-1]
    for p in range(1, min(max_period, len(alphas) - 1) + 1):
        if np.array_equal(last, alphas[-1 - p]):
            return p
    return None


def _cycle_amplitude(family, alphas, period):
    amp = 0.0
    for k in range(period):
        amp = max(amp, _block_diffs(family, alphas[-1 - k], alphas[-2 - k])[3])
    return amp


def _initial_policy_for_pi(config):
    if config.initial_policy is not None:
        return config.initial_policy
    if config.initial_q is not None:
        return greedy_gain(config.initial_q)
    raise ValueError("policy iteration needs initial_policy or initial_q")


def run_q_pi_lp(buffer, family, config):
    """LP policy iteration. Termination is checked from the second solve on,
    comparing successive candidates, after the greedy update."""
    if config.algorithm != "pi":
        raise ValueError("config.algorithm must be 'pi'")
    trace = IterationTrace(family)
    try:
        policy = _initial_policy_for_pi(config)
    except PolicyUndefined as e:
        trace.status = "policy_undefined"
        trace.diagnostic = f"initial greedy policy undefined: {e}"
        return trace
    phixa = family.features_batch(buffer.x, buffer.a)
    alphas = []
    q_prev = None
    for i in range(config.max_iters):
        t0 = time.perf_counter()
        problem = assemble_pi_lp(buffer, family, policy, config.gamma,
                                 config.moments, tau=config.tau)
        sol = solve_lp(problem, config.solver)
        fallback = False
        if sol.status == "unbounded" and config.pi_consistent_fallback:
            # unbounded evaluation LP with consistent rows: the all-binding
            # least-squares point is the optimum the semantics asks for
            cand, resid = solve_consistent(problem.G, problem.h)
            scale = max(1.0, float(np.abs(problem.h).max()))
            if resid <= config.consistent_residual_tol * scale:
                sol = dataclasses.replace(sol, alpha_star=cand, status="optimal",
                                          objective_value=float(problem.m @ cand),
                                          n_active=len(problem.h))
                fallback = True
        if sol.status != "optimal":
            trace.status = {"unbounded": "lp_unbounded", "infeasible": "lp_infeasible"}.get(
                sol.status, "lp_failure")
            trace.diagnostic = (UNBOUNDED_PI_DIAGNOSTIC if sol.status == "unbounded"
                                else f"LP terminated with status {sol.status}: {sol.message}")
            break
        alpha = sol.alpha_star
        q = phixa @ alpha
        if alphas:
            dq = float(np.abs(q - q_prev).max())
            dP, dp, ds, dal = _block_diffs(family, alpha, alphas[-1])
        else:
            dq = dP = dp = ds = dal = float("inf")
        alphas.append(alpha)
        trace.iterations.append(IterationRecord(
            i=i, alpha=alpha, q_values=q, dq_sup=dq, dparams_sup=dal,
            dP_sup=dP, dp_sup=dp, ds_abs=ds, lp_status=sol.status,
            n_active=sol.n_active, refined=sol.refined, fallback=fallback,
            wall_time=time.perf_counter() - t0))
        try:
            policy = greedy_gain(QParams(alpha, family))
        except PolicyUndefined as e:
            trace.status = "policy_undefined"
            trace.diagnostic = f"iteration {i}: {e}"
            trace.final_params = QParams(alpha, family)
            return trace
        trace.final_params = QParams(alpha, family)
        trace.final_policy = policy
        q_prev = q
        if i >= 1:
            gate = dal if config.stop_rule == "params" else dq
            if gate <= config.epsilon:
                trace.status = "converged"
                break
        if config.cycle_max_period > 0:
            p = _detect_cycle(alphas, config.cycle_max_period)
            if p == 1:
                trace.status = "converged"
                trace.diagnostic = "successive LP solutions repeat exactly"
                break
            if p is not None:
                trace.status = "cycle"
                trace.cycle_period = p
                trace.cycle_amplitude = _cycle_amplitude(family, alphas, p)
                trace.diagnostic = (f"bitwise-periodic orbit of period {p}, "
                                    f"amplitude {trace.cycle_amplitude:.3e}")
                break
    else:
        trace.status = "max_iters"
    return trace


def run_q_vi_lp(buffer, family, config):
    """LP value iteration. The previous candidate prices the backup RHS;
    termination is checked from the first solve against the initial values."""
    if config.algorithm != "vi":
        raise ValueError("config.algorithm must be 'vi'")
    if config.initial_q is None:
        raise ValueError("value iteration needs initial_q")
    trace = IterationTrace(family)
    prev = config.initial_q
    if config.initial_policy is not None:
        policy = config.initial_policy
    else:
        try:
            policy = greedy_gain(prev)
        except PolicyUndefined as e:
            trace.status = "policy_undefined"
            trace.diagnostic = f"greedy policy of initial_q undefined: {e}"
            return trace
    phixa = family.features_batch(buffer.x, buffer.a)
    q_prev = phixa @ prev.alpha
    alphas = [np.asarray(prev.alpha)]
    for i in range(config.max_iters):
        t0 = time.perf_counter()
        problem = assemble_vi_lp(buffer, family, prev, config.gamma,
                                 config.moments, policy=policy, tau=config.tau)
        sol = solve_lp(problem, config.solver)
        if sol.status != "optimal":
            trace.status = {"unbounded": "lp_unbounded", "infeasible": "lp_infeasible"}.get(
                sol.status, "lp_failure")
            trace.diagnostic = (UNBOUNDED_VI_DIAGNOSTIC if sol.status == "unbounded"
                                else f"LP terminated with status {sol.status}: {sol.message}")
            break
        alpha = sol.alpha_star
        q = phixa @ alpha
        dq = float(np.abs(q - q_prev).max())
        dP, dp, ds, dal = _block_diffs(family, alpha, alphas[-1])
        alphas.append(alpha)
        trace.iterations.append(IterationRecord(
            i=i, alpha=alpha, q_values=q, dq_sup=dq, dparams_sup=dal,
            dP_sup=dP, dp_sup=dp, ds_abs=ds, lp_status=sol.status,
            n_active=sol.n_active, refined=sol.refined, fallback=False,
            wall_time=time.perf_counter() - t0))
        prev = QParams(alpha, family)
        trace.final_params = prev
        try:
            policy = greedy_gain(prev)
        except PolicyUndefined as e:
            trace.status = "policy_undefined"
            trace.diagnostic = f"iteration {i}: {e}"
            return trace
        trace.final_policy = policy
        q_prev = q
        gate = dal if config.stop_rule == "params" else dq
        if gate <= config.epsilon:
            trace.status = "converged"
            break
        if config.cycle_max_period > 0:
            p = _detect_cycle(alphas, config.cycle_max_period)
            if p == 1:
                trace.status = "converged"
                trace.diagnostic = "successive LP solutions repeat exactly"
                break
            if p is not None:
                trace.status = "cycle"
                trace.cycle_period = p
                trace.cycle_amplitude = _cycle_amplitude(family, alphas, p)
                trace.diagnostic = (f"bitwise-periodic orbit of period {p}, "
                                    f"amplitude {trace.cycle_amplitude:.3e}")
                break
    else:
        trace.status = "max_iters"
    return trace
