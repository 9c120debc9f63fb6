"""End-to-end experiment runner and its JSON-serializable configuration.

One experiment = build a buffer, run one algorithm, write artifacts into a
run directory:

    config.json        exact copy of the configuration that ran
    buffer.csv         the sampled transitions
    trace.csv          per-iteration norms, statuses and coefficient vectors
    summary.json       terminal state, block matrices, oracle gaps, rollouts
    trajectory_k.csv   closed-loop rollouts of the final policy
    plot.py            standalone matplotlib script over the CSVs

summary.json is byte-identical across repeated runs of the same config once
keys containing "wall" are dropped; everything else is seeded.

The output root is the out_dir argument, else $LPADP_OUTPUT_ROOT, else
./runs. The run directory inside it is "<name>-seed<seed>".
"""
from __future__ import annotations

import csv
import dataclasses
import json
import os
import time
from typing import Optional

import numpy as np

from . import systems
from .algorithms import RunConfig, run_q_pi_lp, run_q_vi_lp
from .basis import (BasisFamily, LinearPolicy, MomentSpec, QParams, pack,
                    split_matrices)
from .lp import assemble_pi_lp, assemble_vi_lp, dump_lp
from .oracle import DivergedTrajectory, rollout_cost, solve_discounted_dare
from .replay import SamplerSpec, build_buffer, save_buffer

__all__ = ["ExperimentConfig", "ExperimentResult", "run_experiment",
           "OUTPUT_ROOT_ENV", "DEFAULT_OUTPUT_ROOT", "ROLLOUT_TOL"]

OUTPUT_ROOT_ENV = "LPADP_OUTPUT_ROOT"
DEFAULT_OUTPUT_ROOT = "runs"
# regulation is declared reached when the state sup-norm first drops below this
ROLLOUT_TOL = 1e-3


@dataclasses.dataclass
class ExperimentConfig:
    """Complete, JSON-round-trippable description of one run."""
    name: str
    plant: str
    cost: str
    family: str
    algorithm: str
    gamma: float
    n_tuples: int
    seed: int
    state_sampler: dict
    action_sampler: dict
    moments: dict
    epsilon: float
    max_iters: int
    stop_rule: str = "qvalues"
    initial_policy: Optional[dict] = None
    initial_q: Optional[dict] = None
    tau: Optional[float] = None
    plant_matrices: Optional[dict] = None
    cost_weights: Optional[dict] = None
    rollout_x0: list = dataclasses.field(default_factory=list)
    rollout_horizon: int = 100

    def to_dict(self):
        return dataclasses.asdict(self)

    @staticmethod
    def from_dict(d):
        return ExperimentConfig(**d)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_json(text):
        return ExperimentConfig.from_dict(json.loads(text))

    # builders for the live objects

    def build_plant(self):
        return systems.make_plant(self.plant, self.plant_matrices)

    def build_cost(self, plant):
        cw = self.cost_weights or {}
        return systems.make_cost(self.cost, plant.state_dim, plant.input_dim,
                                 E=cw.get("E"), F=cw.get("F"))

    def build_family(self, plant):
        return BasisFamily(self.family, plant.state_dim, plant.input_dim)

    def build_moments(self):
        md = self.moments
        return MomentSpec(second=np.asarray(md["second"], dtype=float),
                          third=md.get("third"), fourth=md.get("fourth"),
                          first=md.get("first"))

    def build_samplers(self):
        return (SamplerSpec.from_dict(self.state_sampler),
                SamplerSpec.from_dict(self.action_sampler))

    def build_run_config(self, family):
        pol = None
        if self.initial_policy is not None:
            pol = LinearPolicy(np.asarray(self.initial_policy["gain"], dtype=float),
                               np.asarray(self.initial_policy["offset"], dtype=float))
        q0 = None
        if self.initial_q is not None:
            q0 = pack(family, np.asarray(self.initial_q["P"], dtype=float),
                      p=self.initial_q.get("p"), s=self.initial_q.get("s", 0.0))
        return RunConfig(algorithm=self.algorithm, gamma=self.gamma,
                         moments=self.build_moments(), epsilon=self.epsilon,
                         max_iters=self.max_iters, initial_policy=pol,
                         initial_q=q0, stop_rule=self.stop_rule, tau=self.tau)


@dataclasses.dataclass
class ExperimentResult:
    run_dir: str
    summary: dict
    trace: object
    buffer: object


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if np.isfinite(f) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def _write_trace_csv(path, trace):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "lp_status", "dq_sup", "dparams_sup", "dP_sup",
                    "dp_sup", "ds_abs", "n_active", "refined", "fallback",
                    "wall_time_s", "alpha"])
        for r in trace.iterations:
            w.writerow([r.i, r.lp_status,
                        format(r.dq_sup, ".17g"), format(r.dparams_sup, ".17g"),
                        format(r.dP_sup, ".17g"), format(r.dp_sup, ".17g"),
                        format(r.ds_abs, ".17g"), r.n_active, int(r.refined),
                        int(r.fallback), format(r.wall_time, ".6g"),
                        json.dumps([float(a) for a in r.alpha])])


def _write_trajectory_csv(path, states, inputs):
    n = states.shape[1]
    m = inputs.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step"] + [f"x{i+1}" for i in range(n)] + [f"u{j+1}" for j in range(m)])
        for k in range(states.shape[0]):
            u = list(inputs[k]) if k < inputs.shape[0] else [float("nan")] * m
            w.writerow([k] + [format(v, ".17g") for v in states[k]]
                       + [format(v, ".17g") for v in u])


_PLOT_TEMPLATE = '''"""Auto-generated. Plots the run in this directory; needs matplotlib."""
import csv
import json
import math
import os

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))

iters, dq, dal = [], [], []
with open(os.path.join(here, "trace.csv")) as fh:
    for row in csv.DictReader(fh):
        iters.append(int(row["iter"]))
        dq.append(float(row["dq_sup"]))
        dal.append(float(row["dparams_sup"]))

traj_files = {traj_files}

nplots = 1 + (1 if traj_files else 0)
fig, axes = plt.subplots(1, nplots, figsize=(6 * nplots, 4.5))
axes = [axes] if nplots == 1 else list(axes)

ax = axes[0]
finite = [(i, v) for i, v in zip(iters, dq) if math.isfinite(v) and v > 0]
if finite:
    ax.semilogy([i for i, _ in finite], [v for _, v in finite], "o-", label="buffer Q-values")
finite = [(i, v) for i, v in zip(iters, dal) if math.isfinite(v) and v > 0]
if finite:
    ax.semilogy([i for i, _ in finite], [v for _, v in finite], "s-", label="parameters")
ax.set_xlabel("iteration")
ax.set_ylabel("successive difference (sup norm)")
ax.legend()
ax.grid(True, which="both", alpha=0.3)

if traj_files:
    ax = axes[1]
    for tf in traj_files:
        steps, cols = [], dict()
        with open(os.path.join(here, tf)) as fh:
            r = csv.DictReader(fh)
            names = [c for c in r.fieldnames if c != "step"]
            for c in names:
                cols[c] = []
            for row in r:
                steps.append(int(row["step"]))
                for c in names:
                    cols[c].append(float(row[c]))
        for c in names:
            style = "--" if c.startswith("u") else "-"
            ax.plot(steps, cols[c], style, label=c + " (" + tf + ")")
    ax.set_xlabel("step")
    ax.set_ylabel("state / control")
    ax.legend(fontsize=7)
    ax.grid(True, alpha=0.3)

with open(os.path.join(here, "summary.json")) as fh:
    summary = json.load(fh)
fig.suptitle(summary["name"] + " seed " + str(summary["seed"]) + ": " + summary["status"])
fig.tight_layout()
out = os.path.join(here, "plots.png")
fig.savefig(out, dpi=130)
print(out)
'''


def _oracle_block(config, plant, trace):
    if not (isinstance(plant, systems.LtiPlant) and config.family == "extended_quadratic"
            and config.cost == "quadratic" and trace.final_params is not None):
        return None
    cw = config.cost_weights or {}
    E = np.eye(plant.state_dim) if cw.get("E") is None else np.asarray(cw["E"], dtype=float)
    F = np.eye(plant.input_dim) if cw.get("F") is None else np.atleast_2d(
        np.asarray(cw["F"], dtype=float))
    dare = solve_discounted_dare(plant.A, plant.B, E, F, config.gamma)
    P, p, s = split_matrices(trace.final_params.family, trace.final_params.alpha)
    out = {"dP": float(np.abs(P - dare.Pq).max()), "dp": float(np.abs(p).max()),
           "ds": abs(s), "dare_residual": dare.residual}
    if trace.final_policy is not None:
        out["gain_err"] = float(np.abs(trace.final_policy.gain + dare.K).max())
    return out


def run_experiment(config, out_dir=None, dump_lps=False):
    """Run one configured experiment and write its artifact directory."""
    t_start = time.perf_counter()
    root = out_dir or os.environ.get(OUTPUT_ROOT_ENV) or DEFAULT_OUTPUT_ROOT
    run_dir = os.path.join(root, f"{config.name}-seed{config.seed}")
    os.makedirs(run_dir, exist_ok=True)
    with open(os.path.join(run_dir, "config.json"), "w") as fh:
        fh.write(config.to_json())

    plant = config.build_plant()
    cost = config.build_cost(plant)
    family = config.build_family(plant)
    ss, asp = config.build_samplers()
    buffer = build_buffer(plant, cost, ss, asp, config.n_tuples, config.seed)
    save_buffer(buffer, os.path.join(run_dir, "buffer.csv"))

    rc = config.build_run_config(family)
    if dump_lps:
        try:
            if config.algorithm == "pi":
                pol = rc.initial_policy if rc.initial_policy is not None else rc.initial_q
                prob = assemble_pi_lp(buffer, family, pol, rc.gamma, rc.moments, tau=rc.tau)
            else:
                prob = assemble_vi_lp(buffer, family, rc.initial_q, rc.gamma, rc.moments,
                                      policy=rc.initial_policy, tau=rc.tau)
            dump_lp(prob, os.path.join(run_dir, "lp_iter0.txt"))
        except Exception as e:          # dump is best-effort diagnostics
            with open(os.path.join(run_dir, "lp_iter0.txt"), "w") as fh:
                fh.write(f"# could not assemble the iteration-0 LP: {e}\n")

    runner = run_q_pi_lp if config.algorithm == "pi" else run_q_vi_lp
    trace = runner(buffer, family, rc)

    _write_trace_csv(os.path.join(run_dir, "trace.csv"), trace)

    rollouts = []
    traj_files = []
    if trace.final_policy is not None:
        pol = trace.final_policy
        for k, x0 in enumerate(config.rollout_x0):
            entry = {"x0": [float(v) for v in x0]}
            try:
                rr = rollout_cost(plant, cost, lambda x: pol.act(family, x),
                                  x0, config.gamma, config.rollout_horizon)
                sup = np.abs(rr.states).max(axis=1)
                hit = np.nonzero(sup <= ROLLOUT_TOL)[0]
                fname = f"trajectory_{k}.csv"
                _write_trajectory_csv(os.path.join(run_dir, fname), rr.states, rr.inputs)
                traj_files.append(fname)
                entry.update(steps_to_tol=(int(hit[0]) if hit.size else None),
                             final_sup=float(sup[-1]), cost=rr.cost,
                             diverged=False, file=fname)
            except DivergedTrajectory as e:
                entry.update(steps_to_tol=None, final_sup=None, cost=None,
                             diverged=True, diverged_at=e.step, file=None)
            rollouts.append(entry)

    final = None
    if trace.final_params is not None:
        P, p, s = split_matrices(family, trace.final_params.alpha)
        final = {"alpha": trace.final_params.alpha, "P": P, "p": p, "s": s}
        if trace.final_policy is not None:
            final["policy_gain"] = trace.final_policy.gain
            final["policy_offset"] = trace.final_policy.offset

    summary = {
        "schema": 1,
        "name": config.name,
        "seed": config.seed,
        "algorithm": config.algorithm,
        "plant": config.plant,
        "cost": config.cost,
        "family": config.family,
        "gamma": config.gamma,
        "n_tuples": config.n_tuples,
        "epsilon": config.epsilon,
        "stop_rule": config.stop_rule,
        "status": trace.status,
        "diagnostic": trace.diagnostic,
        "n_iters": trace.n_iters,
        "cycle_period": trace.cycle_period,
        "cycle_amplitude": trace.cycle_amplitude,
        "final": final,
        "norms": {
            "dq_sup": list(trace.series("dq_sup")) if trace.n_iters else [],
            "dparams_sup": list(trace.series("dparams_sup")) if trace.n_iters else [],
            "dP_sup": list(trace.series("dP_sup")) if trace.n_iters else [],
            "dp_sup": list(trace.series("dp_sup")) if trace.n_iters else [],
            "ds_abs": list(trace.series("ds_abs")) if trace.n_iters else [],
        },
        "lp_statuses": [r.lp_status for r in trace.iterations],
        "fallback_iters": [r.i for r in trace.iterations if r.fallback],
        "oracle": _oracle_block(config, plant, trace),
        "rollouts": rollouts,
        "buffer_resample_count": buffer.resample_count,
        "wall_total_s": time.perf_counter() - t_start,
    }
    summary = _jsonable(summary)
    with open(os.path.join(run_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(run_dir, "plot.py"), "w") as fh:
        fh.write(_PLOT_TEMPLATE.replace("{traj_files}", repr(traj_files), 1))
    return ExperimentResult(run_dir=run_dir, summary=summary, trace=trace, buffer=buffer)
