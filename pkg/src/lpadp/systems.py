"""Plants and stage costs behind an opaque sampling interface.

The iteration code never sees functional forms. It calls step() and eval()
on sampled points only, which is the whole point of the data-driven setup:
the same code path would run against a lab rig that answers queries.

Built-ins are registered by name ("lti4d", "nonlinear2d" / "quadratic",
"nonquadratic") so CLI configs can refer to them. Custom LTI matrices can be
supplied as nested lists in a JSON config block.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "Plant", "LtiPlant", "StageCost",
    "lti_step", "nonlinear2d_step", "quadratic_cost", "nonquadratic_cost",
    "lti4d", "nonlinear2d", "make_plant", "make_cost",
    "LTI4D_A", "LTI4D_B",
]


def _as_batch(v, dim, name):
    arr = np.atleast_2d(np.asarray(v, dtype=float))
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(
            f"{name} has shape {np.asarray(v).shape}, expected vectors of dimension {dim}")
    return arr


class Plant:
    """Deterministic discrete-time system x' = f(x, u).

    step() accepts a single state/input pair or aligned batches (rows are
    samples) and returns the successor(s) with matching shape. Instances are
    immutable after construction and safe to call concurrently.
    """

    def __init__(self, state_dim, input_dim, step_fn, name="custom"):
        if state_dim <= 0 or input_dim <= 0:
            raise ValueError("state_dim and input_dim must be positive")
        self.state_dim = int(state_dim)
        self.input_dim = int(input_dim)
        self._step_fn = step_fn
        self.name = name

    def step(self, x, u):
        single = np.asarray(x).ndim == 1
        X = _as_batch(x, self.state_dim, "x")
        U = _as_batch(u, self.input_dim, "u")
        if X.shape[0] != U.shape[0]:
            raise ValueError(f"batch mismatch: {X.shape[0]} states vs {U.shape[0]} inputs")
        if not (np.isfinite(X).all() and np.isfinite(U).all()):
            raise ValueError("non-finite input to step")
        Y = np.asarray(self._step_fn(X, U), dtype=float)
        if Y.shape != X.shape:
            raise ValueError(f"step returned shape {Y.shape}, expected {X.shape}")
        return Y[0] if single else Y

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r}, n={self.state_dim}, m={self.input_dim})"


class LtiPlant(Plant):
    """x' = Ax + Bu, exactly."""

    def __init__(self, A, B, name="lti"):
        A = np.asarray(A, dtype=float)
        B = np.asarray(B, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got {A.shape}")
        if B.ndim == 1:
            B = B[:, None]
        if B.shape[0] != A.shape[0]:
            raise ValueError(f"B has {B.shape[0]} rows, A is {A.shape[0]}x{A.shape[1]}")
        A.setflags(write=False)
        B.setflags(write=False)
        self.A = A
        self.B = B
        super().__init__(A.shape[0], B.shape[1],
                         lambda X, U: X @ A.T + U @ B.T, name=name)


class StageCost:
    """Nonnegative stage cost l(x, u), exposed as an opaque callable."""

    def __init__(self, eval_fn, name="custom"):
        self._eval_fn = eval_fn
        self.name = name

    def eval(self, x, u):
        single = np.asarray(x).ndim == 1
        X = np.atleast_2d(np.asarray(x, dtype=float))
        U = np.atleast_2d(np.asarray(u, dtype=float))
        if X.shape[0] != U.shape[0]:
            raise ValueError(f"batch mismatch: {X.shape[0]} states vs {U.shape[0]} inputs")
        L = np.asarray(self._eval_fn(X, U), dtype=float)
        if L.ndim != 1 or L.shape[0] != X.shape[0]:
            raise ValueError(f"cost returned shape {L.shape}, expected ({X.shape[0]},)")
        neg = L < 0
        if neg.any():
            raise ValueError(
                f"stage cost is negative ({L[neg].min():.3e}) at some sampled point; "
                "weight matrices are probably not positive semidefinite")
        return float(L[0]) if single else L

    def __repr__(self):
        return f"StageCost(name={self.name!r})"


# the 4-state benchmark plant; open-loop unstable, spectral radius 1.8569
LTI4D_A = np.array([
    [1.8, -0.77, 0.0, 1.0],
    [1.0, 0.0, 0.0, 1.0],
    [1.0, 1.0, 0.0, 1.0],
    [0.0, 0.0, 1.0, 0.0],
])
LTI4D_B = np.array([[1.0], [0.0], [0.0], [0.0]])


def lti_step(plant, x, u):
    """Successor Ax + Bu of an LTI plant. Rejects dimension mismatches."""
    if not isinstance(plant, LtiPlant):
        raise TypeError("lti_step expects an LtiPlant")
    return plant.step(x, u)


def _nl2d_step_batch(X, U):
    u = U[:, 0]
    y1 = (X[:, 0] + X[:, 1] ** 2 + u) * np.cos(X[:, 1])
    y2 = 0.5 * (X[:, 0] ** 2 + X[:, 1] + u) * np.sin(X[:, 1])
    return np.column_stack([y1, y2])


def nonlinear2d_step(x, u):
    """One step of the planar benchmark system.

    x' = ((x1 + x2^2 + u) cos(x2), 0.5 (x1^2 + x2 + u) sin(x2)).
    The origin with u = 0 is an equilibrium.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        u_arr = np.atleast_1d(np.asarray(u, dtype=float)).reshape(1, -1)
        if not (np.isfinite(x).all() and np.isfinite(u_arr).all()):
            raise ValueError("non-finite input")
        return _nl2d_step_batch(x[None, :], u_arr)[0]
    return nonlinear2d().step(x, u)


def quadratic_cost(x, u, E, F):
    """x'Ex + u'Fu for symmetric PSD E, F."""
    x = np.asarray(x, dtype=float)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    E = np.asarray(E, dtype=float)
    F = np.atleast_2d(np.asarray(F, dtype=float))
    val = float(x @ E @ x + u @ F @ u)
    if val < 0:
        raise ValueError(f"negative cost {val:.3e}; E, F must be positive semidefinite")
    return val


def nonquadratic_cost(x, u, E, F):
    """ln(x'Ex + exp(x'Ex) u'Fu + 1); nonnegative since the argument is >= 1.

    Uses log1p so the value stays accurate near the origin.
    """
    x = np.asarray(x, dtype=float)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    E = np.asarray(E, dtype=float)
    F = np.atleast_2d(np.asarray(F, dtype=float))
    xex = float(x @ E @ x)
    ufu = float(u @ F @ u)
    if xex < 0 or ufu < 0:
        raise ValueError("E, F must be positive semidefinite")
    return float(np.log1p(xex + np.exp(xex) * ufu))


def lti4d():
    return LtiPlant(LTI4D_A, LTI4D_B, name="lti4d")


def nonlinear2d():
    return Plant(2, 1, _nl2d_step_batch, name="nonlinear2d")


_PLANTS = {"lti4d": lti4d, "nonlinear2d": nonlinear2d}


def make_plant(name, matrices=None):
    """Plant registry. matrices={"A": .., "B": ..} builds a custom LTI plant."""
    if matrices is not None:
        return LtiPlant(matrices["A"], matrices["B"], name=name)
    try:
        return _PLANTS[name]()
    except KeyError:
        raise ValueError(f"unknown plant {name!r}; built-ins: {sorted(_PLANTS)}") from None


def make_cost(name, state_dim, input_dim, E=None, F=None):
    """Stage-cost registry; E, F default to identity weights."""
    E = np.eye(state_dim) if E is None else np.asarray(E, dtype=float)
    F = np.eye(input_dim) if F is None else np.atleast_2d(np.asarray(F, dtype=float))
    if name == "quadratic":
        def fn(X, U):
            return np.einsum("bi,ij,bj->b", X, E, X) + np.einsum("bi,ij,bj->b", U, F, U)
        return StageCost(fn, name="quadratic")
    if name == "nonquadratic":
        def fn(X, U):
            xex = np.einsum("bi,ij,bj->b", X, E, X)
            ufu = np.einsum("bi,ij,bj->b", U, F, U)
            return np.log1p(xex + np.exp(xex) * ufu)
        return StageCost(fn, name="nonquadratic")
    raise ValueError(f"unknown cost {name!r}; built-ins: ['quadratic', 'nonquadratic']")
