"""Command-line entry points.

    lpadp presets                     list benchmark configurations
    lpadp buffer --plant lti4d --cost quadratic --n 7000 --seed 1 --out buf.csv
    lpadp run --preset lti4d-pi [--seed N] [--out DIR] [--dump-lps]
    lpadp run --config my_config.json
    lpadp oracle --plant lti4d --gamma 0.9
    lpadp rollout --run-dir runs/lti4d-pi-seed1 --x0 1.8,1 [--horizon 60]

Run output goes under --out, else $LPADP_OUTPUT_ROOT, else ./runs.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import systems
from .basis import BasisFamily, LinearPolicy
from .experiment import (ExperimentConfig, OUTPUT_ROOT_ENV, ROLLOUT_TOL,
                         run_experiment)
from .oracle import DivergedTrajectory, rollout_cost, solve_discounted_dare
from .presets import DEFAULT_SEED, PRESET_NAMES, preset
from .replay import SamplerSpec, build_buffer, save_buffer


def _cmd_presets(_args):
    rows = []
    for name in PRESET_NAMES:
        c = preset(name)
        rows.append((name, c.algorithm, c.plant, c.cost, f"{c.gamma:g}",
                     str(c.n_tuples), f"{c.epsilon:g}"))
    head = ("name", "alg", "plant", "cost", "gamma", "N", "epsilon")
    widths = [max(len(r[i]) for r in rows + [head]) for i in range(len(head))]
    for r in [head] + rows:
        print("  ".join(v.ljust(w) for v, w in zip(r, widths)))
    print(f"\ndefault seed: {DEFAULT_SEED}; output root: --out, ${OUTPUT_ROOT_ENV}, or ./runs")
    return 0


def _cmd_buffer(args):
    plant = systems.make_plant(args.plant)
    cost = systems.make_cost(args.cost, plant.state_dim, plant.input_dim)
    variance = args.action_variance
    if variance is None:
        variance = 9.0 if args.plant == "lti4d" else 1.0
    ss = SamplerSpec("uniform", plant.state_dim, low=args.state_low, high=args.state_high)
    asp = SamplerSpec("gaussian", plant.input_dim, mean=0.0, variance=variance)
    buf = build_buffer(plant, cost, ss, asp, args.n, args.seed)
    save_buffer(buf, args.out)
    print(f"wrote {len(buf)} tuples to {args.out} (redraws: {buf.resample_count})")
    return 0


def _cmd_run(args):
    if bool(args.preset) == bool(args.config):
        print("run needs exactly one of --preset or --config", file=sys.stderr)
        return 2
    if args.preset:
        config = preset(args.preset, seed=args.seed)
    else:
        with open(args.config) as fh:
            config = ExperimentConfig.from_json(fh.read())
        if args.seed is not None:
            config.seed = int(args.seed)
    result = run_experiment(config, out_dir=args.out, dump_lps=args.dump_lps)
    s = result.summary
    print(f"run dir: {result.run_dir}")
    print(f"status: {s['status']}"
          + (f" ({s['diagnostic']})" if s["diagnostic"] else ""))
    print(f"iterations: {s['n_iters']}")
    norms = s["norms"]["dparams_sup"]
    if norms:
        last = norms[-1]
        print(f"last parameter change: {last if last is not None else 'inf'}")
    if s.get("oracle"):
        o = s["oracle"]
        print(f"oracle gaps: |P - Pq*| {o['dP']:.3e}, |p| {o['dp']:.3e}, |s| {o['ds']:.3e}")
    for r in s["rollouts"]:
        reach = r["steps_to_tol"]
        print(f"rollout from {r['x0']}: "
              + (f"sup norm <= {ROLLOUT_TOL:g} at step {reach}" if reach is not None
                 else "did not reach the regulation tolerance")
              + (", diverged" if r["diverged"] else ""))
    return 0


def _cmd_oracle(args):
    if args.plant_json:
        with open(args.plant_json) as fh:
            mats = json.load(fh)
        plant = systems.make_plant(args.plant, mats)
    else:
        plant = systems.make_plant(args.plant)
    if not isinstance(plant, systems.LtiPlant):
        print(f"oracle needs an LTI plant, got {args.plant!r}", file=sys.stderr)
        return 2
    E = np.eye(plant.state_dim)
    F = np.eye(plant.input_dim)
    sol = solve_discounted_dare(plant.A, plant.B, E, F, args.gamma)
    print(json.dumps({
        "P": sol.P.tolist(), "Pq": sol.Pq.tolist(), "K": sol.K.tolist(),
        "residual": sol.residual, "iterations": sol.iterations,
    }, indent=2, sort_keys=True))
    return 0


def _cmd_rollout(args):
    import os
    with open(os.path.join(args.run_dir, "config.json")) as fh:
        config = ExperimentConfig.from_json(fh.read())
    with open(os.path.join(args.run_dir, "summary.json")) as fh:
        summary = json.load(fh)
    final = summary.get("final") or {}
    if "policy_gain" not in final:
        print("that run produced no policy; nothing to roll out", file=sys.stderr)
        return 2
    plant = config.build_plant()
    cost = config.build_cost(plant)
    family = BasisFamily(config.family, plant.state_dim, plant.input_dim)
    pol = LinearPolicy(np.asarray(final["policy_gain"], dtype=float),
                       np.asarray(final["policy_offset"], dtype=float))
    x0 = np.array([float(v) for v in args.x0.split(",")])
    try:
        rr = rollout_cost(plant, cost, lambda x: pol.act(family, x), x0,
                          config.gamma, args.horizon)
    except DivergedTrajectory as e:
        print(f"trajectory diverged at step {e.step}")
        return 1
    sup = np.abs(rr.states).max(axis=1)
    hit = np.nonzero(sup <= ROLLOUT_TOL)[0]
    out = args.out or os.path.join(args.run_dir, "rollout.csv")
    from .experiment import _write_trajectory_csv
    _write_trajectory_csv(out, rr.states, rr.inputs)
    print(f"wrote {out}")
    print(f"discounted cost: {rr.cost:.6g}")
    print(f"final state sup norm: {sup[-1]:.3e}")
    if hit.size:
        print(f"sup norm <= {ROLLOUT_TOL:g} first reached at step {int(hit[0])}")
    else:
        print(f"sup norm never reached {ROLLOUT_TOL:g} within {args.horizon} steps")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="lpadp", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("presets", help="list benchmark presets").set_defaults(fn=_cmd_presets)

    b = sub.add_parser("buffer", help="sample a transition buffer to CSV")
    b.add_argument("--plant", required=True, choices=["lti4d", "nonlinear2d"])
    b.add_argument("--cost", required=True, choices=["quadratic", "nonquadratic"])
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--seed", type=int, default=DEFAULT_SEED)
    b.add_argument("--out", required=True)
    b.add_argument("--state-low", type=float, default=-5.0)
    b.add_argument("--state-high", type=float, default=5.0)
    b.add_argument("--action-variance", type=float, default=None,
                   help="defaults to the benchmark value for the chosen plant")
    b.set_defaults(fn=_cmd_buffer)

    r = sub.add_parser("run", help="run a preset or a JSON experiment config")
    r.add_argument("--preset", choices=list(PRESET_NAMES))
    r.add_argument("--config", help="path to an ExperimentConfig JSON file")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--out", default=None, help="output root directory")
    r.add_argument("--dump-lps", action="store_true",
                   help="also dump the iteration-0 LP in plain text")
    r.set_defaults(fn=_cmd_run)

    o = sub.add_parser("oracle", help="print the discounted Riccati solution as JSON")
    o.add_argument("--plant", default="lti4d")
    o.add_argument("--gamma", type=float, required=True)
    o.add_argument("--plant-json", default=None,
                   help="JSON file with custom A, B matrices")
    o.set_defaults(fn=_cmd_oracle)

    ro = sub.add_parser("rollout", help="roll out the final policy of a finished run")
    ro.add_argument("--run-dir", required=True)
    ro.add_argument("--x0", required=True, help="comma-separated initial state")
    ro.add_argument("--horizon", type=int, default=60)
    ro.add_argument("--out", default=None)
    ro.set_defaults(fn=_cmd_rollout)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
