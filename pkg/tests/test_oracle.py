import numpy as np
import pytest
from scipy.linalg import solve_discrete_are

import lpadp as L

# frozen reference solution for the 4-state benchmark, gamma 0.9
P_STAR = np.array([
    [9.81496405, 0.94777744, 1.95703865, 7.30871402],
    [0.94777744, 3.85689161, -0.41356112, 1.35784115],
    [1.95703865, -0.41356112, 3.23956525, 1.42189944],
    [7.30871402, 1.35784115, 1.42189944, 7.37738012]])
K_STAR = np.array([[1.88281254, -0.51257964, 0.66892401, 1.16416737]])


def test_memoryless_plant_q_matrix():
    # with A = 0 the value is the stage cost alone, but the Q-matrix still
    # prices the immediate control through the discounted successor term
    for gamma in (0.3, 0.9, 0.99):
        sol = L.solve_discounted_dare(0.0, 1.0, 1.0, 1.0, gamma)
        assert np.abs(sol.P - 1.0).max() < 1e-12
        assert np.abs(sol.K).max() < 1e-12
        assert np.abs(sol.Pq - np.array([[1.0, 0.0], [0.0, 1.0 + gamma]])).max() < 1e-12


def test_scalar_fixed_point_against_bisection():
    """For A=B=E=F=1, gamma 0.9 the fixed point solves
    0.9 p^2 - 0.8 p - 1 = 0; bisection on that polynomial is an arithmetic
    path fully independent of the recursion."""
    g = lambda p: 0.9 * p * p - 0.8 * p - 1.0
    lo, hi = 1.0, 2.0
    assert g(lo) < 0 < g(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    sol = L.solve_discounted_dare(1.0, 1.0, 1.0, 1.0, 0.9)
    assert abs(sol.P[0, 0] - root) < 1e-10
    assert abs(root - 1.58840335) < 1e-7


def test_benchmark_solution_regression(lti_dare):
    assert np.abs(lti_dare.P - P_STAR).max() < 5e-9
    assert np.abs(lti_dare.K - K_STAR).max() < 5e-9
    assert lti_dare.residual < 1e-12
    assert lti_dare.Pq.shape == (5, 5)
    assert np.abs(lti_dare.Pq - lti_dare.Pq.T).max() == 0.0


def test_agrees_with_scipy_riccati(lti_dare):
    from lpadp.systems import LTI4D_A, LTI4D_B
    sg = np.sqrt(0.9)
    P_ref = solve_discrete_are(sg * LTI4D_A, sg * LTI4D_B.reshape(4, 1),
                               np.eye(4), np.eye(1))
    assert np.abs(lti_dare.P - P_ref).max() < 1e-9


def test_nonconvergence_raises():
    with pytest.raises(L.DareNonConvergence, match="did not settle"):
        L.solve_discounted_dare(2.0, 0.0, 1.0, 1.0, 0.9, max_iter=50)
    with pytest.raises(ValueError, match="gamma"):
        L.solve_discounted_dare(0.5, 1.0, 1.0, 1.0, 1.5)


def test_rollout_from_origin_costs_nothing():
    plant = L.lti4d()
    cost = L.make_cost("quadratic", 4, 1)
    pol = lambda x: np.array([-0.5 * x[0]])
    res = L.rollout_cost(plant, cost, pol, np.zeros(4), 0.9, 50)
    assert res.cost == 0.0
    assert np.all(res.states == 0.0)
    assert res.states.shape == (51, 4)
    assert res.inputs.shape == (50, 1)


def test_rollout_matches_value_function(lti_dare):
    """Under the exact optimal gain the discounted rollout cost must equal
    x0' P* x0 once the horizon tail is negligible."""
    plant = L.lti4d()
    cost = L.make_cost("quadratic", 4, 1)
    K = lti_dare.K
    rng = np.random.default_rng(31)
    for _ in range(20):
        x0 = rng.uniform(-2, 2, 4)
        val = float(x0 @ lti_dare.P @ x0)
        res = L.rollout_cost(plant, cost, lambda x: -(K @ x), x0, 0.9, 400)
        assert abs(res.cost - val) < 1e-6 * max(1.0, abs(val))


def test_diverged_trajectory_reports_step():
    plant = L.LtiPlant(np.array([[2.0]]), np.array([[0.0]]))
    cost = L.make_cost("quadratic", 1, 1)
    with pytest.raises(L.DivergedTrajectory) as err:
        L.rollout_cost(plant, cost, lambda x: np.zeros(1), np.array([1.0]),
                       0.9, 200, blowup=1e6)
    # doubling from 1 passes 1e6 at step 20; the guard fires when it checks
    assert err.value.step == 20
    assert err.value.norm > 1e6


def test_rollout_validation():
    plant = L.lti4d()
    cost = L.make_cost("quadratic", 4, 1)
    pol = lambda x: np.zeros(1)
    with pytest.raises(ValueError, match="horizon"):
        L.rollout_cost(plant, cost, pol, np.zeros(4), 0.9, 0)
    with pytest.raises(ValueError, match="x0"):
        L.rollout_cost(plant, cost, pol, np.zeros(3), 0.9, 10)


def test_qfun_error_vanishes_on_exact_candidate(lti_dare, lti_family):
    params = L.pack(lti_family, lti_dare.Pq, p=np.zeros(5), s=0.0)
    dP, dp, ds = L.qfun_error(params, lti_dare)
    assert dP == 0.0 and dp == 0.0 and ds == 0.0
    # candidates from other families have no matrix-block comparison
    fam_q = L.BasisFamily("quartic", 2, 1)
    with pytest.raises(ValueError, match="extended_quadratic"):
        L.qfun_error(L.QParams(np.zeros(15), fam_q), lti_dare)
    fam_small = L.BasisFamily("extended_quadratic", 2, 1)
    with pytest.raises(ValueError, match="candidate block"):
        L.qfun_error(L.QParams(np.zeros(10), fam_small), lti_dare)
