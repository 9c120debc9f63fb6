"""Quartic-basis policy iteration on the 2-state trigonometric plant.

Neither stage cost admits an exact quartic-basis Q-function, so the
iteration does not settle to a fixed point: it locks into a short bitwise-
periodic orbit of LP vertices and stops. The policies along the orbit
still regulate the plant from the benchmark start states.
"""
import numpy as np

import lpadp as L

for name, x0 in (("nl2d-quad-pi", (1.8, 1.0)), ("nl2d-nonquad-pi", (0.7, -0.25))):
    res = L.run_experiment(L.preset(name), out_dir="runs")
    tr = res.trace
    print(f"{name}: {tr.status} after {tr.n_iters} iterations")
    if tr.status == "cycle":
        print(f"  period {tr.cycle_period}, parameter amplitude {tr.cycle_amplitude:.3e}")
    P, _, _ = L.basis.split_matrices(tr.family, tr.final_params.alpha)
    print("  final quadratic block over (x1, x2, x1^2, x2^2, u):")
    for row in P:
        print("   " + " ".join(f"{v:8.4f}" for v in row))
    print(f"  greedy gain over (x1, x2, x1^2, x2^2): "
          f"{np.round(tr.final_policy.gain.ravel(), 4)}")
    roll = res.summary["rollouts"][0]
    print(f"  rollout from {x0}: sup norm <= 1e-3 at step {roll['steps_to_tol']}, "
          f"cost {roll['cost']:.4f}\n")
