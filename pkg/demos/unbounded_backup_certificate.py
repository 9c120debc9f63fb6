"""Why every one-step-backup LP on the 2-state plant is unbounded.

The backup LP maximizes m . alpha subject to phi(x_b, a_b) . alpha <= rhs_b.
Exhibit a direction d with phi(x, u) . d <= 0 for EVERY state-input pair and
m . d > 0 under the quartic-family relevance weights (identity second
moments, all-ones third and fourth): then alpha + t d stays feasible for all
t >= 0 whatever the buffer or right-hand side, and the objective grows
without bound. The certificate is algebraic, so no amount of data fixes it;
the weight vector is not the moment sequence of any nonnegative measure.

Take s = (1, 1, -1, -1, 1) over the lifted vector z = (x1, x2, x1^2, x2^2, u)
and d = -vec_upper(s s'). Since the features are exactly the upper triangle
of z z' (off-diagonals doubled), phi(x, u) . d = -(s . z)^2 <= 0 pointwise.
"""
import numpy as np

import lpadp as L

fam = L.BasisFamily("quartic", 2, 1)
s = np.array([1.0, 1.0, -1.0, -1.0, 1.0])
iu, ju = np.triu_indices(5)
d = -(np.outer(s, s))[iu, ju]

# pointwise sign check on random pairs, to machine precision
rng = np.random.default_rng(0)
X = rng.uniform(-5, 5, size=(20000, 2))
U = rng.normal(0, 1, size=(20000, 1))
vals = fam.features_batch(X, U) @ d
z = np.hstack([X, X ** 2, U])
assert np.abs(vals + (z @ s) ** 2).max() < 1e-9
print(f"phi . d over 20000 samples: max {vals.max():.3e} (never positive)")

moments = L.MomentSpec(second=np.eye(3), third=np.ones(12), fourth=np.ones(4))
m = L.objective_vector(fam, moments)
print(f"m . d = {m @ d:+.1f}  (ascent direction for the LP objective)")

# watch it happen on a real buffer: the first backup of the benchmark
cfg = L.preset("nl2d-quad-vi-a")
plant = cfg.build_plant()
buf = L.build_buffer(plant, cfg.build_cost(plant), *cfg.build_samplers(),
                     cfg.n_tuples, cfg.seed)
q0 = L.QParams(np.zeros(fam.feature_count), fam)
problem = L.assemble_vi_lp(buf, fam, q0, cfg.gamma, moments,
                           policy=L.LinearPolicy([[0.0] * 4], [0.0]))
sol = L.solve_lp(problem)
print(f"first backup LP on the {len(buf)}-tuple buffer: {sol.status}")
print("any relevance weights with m . d > 0 for some pointwise-nonpositive "
      "feature direction d produce the same verdict")
