import numpy as np
import pytest

import lpadp as L
from lpadp.systems import LTI4D_A, LTI4D_B


def test_lti_step_examples():
    ident = L.LtiPlant(np.eye(4), np.array([[1.0], [0], [0], [0]]))
    assert np.all(L.lti_step(ident, np.zeros(4), np.zeros(1)) == 0)
    plant = L.lti4d()
    y = L.lti_step(plant, np.array([1.0, 0, 0, 0]), np.zeros(1))
    assert np.allclose(y, [1.8, 1.0, 1.0, 0.0], atol=0, rtol=0)
    y = L.lti_step(plant, np.zeros(4), np.ones(1))
    assert np.allclose(y, [1.0, 0, 0, 0], atol=0, rtol=0)


def test_lti_step_dimension_mismatch():
    plant = L.lti4d()
    with pytest.raises(ValueError, match="dimension"):
        plant.step(np.zeros(3), np.zeros(1))
    with pytest.raises(ValueError, match="dimension"):
        plant.step(np.zeros(4), np.zeros(2))
    with pytest.raises(TypeError):
        L.lti_step(L.nonlinear2d(), np.zeros(2), np.zeros(1))


def test_nonlinear2d_step_examples():
    assert np.all(L.nonlinear2d_step(np.zeros(2), 0.0) == 0)
    assert np.allclose(L.nonlinear2d_step(np.array([1.0, 0.0]), 0.0), [1.0, 0.0])
    y = L.nonlinear2d_step(np.array([0.0, 1.0]), 0.0)
    assert abs(y[0] - 0.540302) < 1e-6
    assert abs(y[1] - 0.420735) < 1e-6


def test_nonlinear2d_rejects_nonfinite():
    with pytest.raises(ValueError, match="finite"):
        L.nonlinear2d_step(np.array([np.inf, 0.0]), 0.0)


def test_quadratic_cost_examples():
    assert L.quadratic_cost(np.zeros(4), np.zeros(1), np.eye(4), np.eye(1)) == 0.0
    v = L.quadratic_cost(np.ones(4), np.array([2.0]), np.eye(4), np.eye(1))
    assert v == 8.0
    assert L.quadratic_cost(np.array([3.0, 4.0]), np.zeros(1), np.eye(2), np.eye(1)) == 25.0


def test_quadratic_cost_rejects_negative():
    with pytest.raises(ValueError, match="semidefinite"):
        L.quadratic_cost(np.ones(2), np.zeros(1), -np.eye(2), np.eye(1))


def test_nonquadratic_cost_examples():
    E, F = np.eye(2), np.eye(1)
    assert L.nonquadratic_cost(np.zeros(2), np.zeros(1), E, F) == 0.0
    assert abs(L.nonquadratic_cost(np.zeros(2), np.ones(1), E, F) - np.log(2)) < 1e-15
    assert abs(L.nonquadratic_cost(np.array([1.0, 0.0]), np.zeros(1), E, F) - np.log(2)) < 1e-15


def test_step_determinism_bitwise():
    rng = np.random.default_rng(0)
    for plant in (L.lti4d(), L.nonlinear2d()):
        X = rng.uniform(-5, 5, (50, plant.state_dim))
        U = rng.normal(0, 2, (50, plant.input_dim))
        a = plant.step(X, U)
        b = plant.step(X, U)
        assert np.array_equal(a, b)


def test_lti4d_eigenvalues():
    eig = np.linalg.eigvals(LTI4D_A)
    expect = {1.8569, 0.7902}
    reals = sorted(e.real for e in eig if abs(e.imag) < 1e-9)
    assert [round(v, 4) for v in reals] == sorted(expect)
    cplx = [e for e in eig if e.imag > 1e-9]
    assert len(cplx) == 1
    assert round(cplx[0].real, 4) == -0.4236
    assert round(abs(cplx[0].imag), 4) == 0.6048
    assert max(abs(eig)) > 1.0   # open loop unstable


def test_costs_nonnegative_on_grid():
    rng = np.random.default_rng(7)
    X = rng.uniform(-10, 10, (10_000, 2))
    U = rng.normal(0, 3, (10_000, 1))
    quad = L.make_cost("quadratic", 2, 1)
    nonq = L.make_cost("nonquadratic", 2, 1)
    assert np.all(quad.eval(X, U) >= 0)
    assert np.all(nonq.eval(X, U) >= 0)


def test_make_plant_registry():
    assert L.make_plant("lti4d").state_dim == 4
    assert L.make_plant("nonlinear2d").input_dim == 1
    with pytest.raises(ValueError, match="unknown plant"):
        L.make_plant("nope")
    custom = L.make_plant("mine", {"A": [[0.5, 0], [0, 0.1]], "B": [[1.0], [0.0]]})
    assert isinstance(custom, L.LtiPlant)
    assert np.allclose(custom.step(np.array([2.0, 2.0]), np.zeros(1)), [1.0, 0.2])


def test_make_cost_registry():
    with pytest.raises(ValueError, match="unknown cost"):
        L.make_cost("nope", 2, 1)
    c = L.make_cost("quadratic", 2, 1, E=2 * np.eye(2), F=[[3.0]])
    assert c.eval(np.array([1.0, 0.0]), np.array([1.0])) == 5.0


def test_lti4d_b_column():
    assert np.array_equal(LTI4D_B.ravel(), [1.0, 0, 0, 0])
