"""Monomial feature families for parametric Q-functions.

A Q-function candidate is Q(x, u) = phi(x, u) . alpha over a fixed monomial
basis. Three families are supported:

  extended_quadratic : z = [x; u]. Features are the upper triangle of z z'
      (off-diagonal entries carry a factor 2 so the quadratic form is
      z'Pz with P symmetric), then the linear terms z, then a constant.
  pure_quadratic     : same quadratic block, no linear or constant terms.
  quartic            : z = [x; x^2; u] (elementwise square), quadratic block
      only. Products of squared entries give quartic monomials in x.

The packing convention is fixed: alpha lists the upper triangle of P row by
row (numpy triu order), then z, then 1 where present. extract_blocks and
pack are exact inverses under that convention.

The greedy policy of a candidate is the closed-form minimizer of Q(x, .),
affine in the family's x-features (x, or [x; x^2] for the quartic family).
It exists iff the control block P_uu is positive definite; otherwise
PolicyUndefined is raised carrying the offending eigenvalue.
"""
from __future__ import annotations

import dataclasses
from typing import Optional

import numpy as np

__all__ = [
    "BasisFamily", "QParams", "MomentSpec", "LinearPolicy", "Blocks",
    "PolicyUndefined", "features", "eval_q", "extract_blocks", "pack",
    "greedy_policy", "greedy_gain", "objective_vector",
]

_KINDS = ("extended_quadratic", "pure_quadratic", "quartic")

# below this eigenvalue floor the quadratic-in-u minimization is treated as
# undefined rather than inverted
_PD_TOL = 1e-10


class PolicyUndefined(Exception):
    """Greedy policy does not exist: P_uu is not positive definite."""

    def __init__(self, min_eig):
        self.min_eig = float(min_eig)
        super().__init__(f"P_uu is not positive definite (min eigenvalue {self.min_eig:.6e})")


class BasisFamily:
    """Fixed, ordered monomial feature basis for one (state_dim, input_dim)."""

    def __init__(self, kind, state_dim, input_dim):
        if kind not in _KINDS:
            raise ValueError(f"unknown family kind {kind!r}; choose from {_KINDS}")
        n, m = int(state_dim), int(input_dim)
        if n <= 0 or m <= 0:
            raise ValueError("state_dim and input_dim must be positive")
        self.kind = kind
        self.state_dim = n
        self.input_dim = m
        if kind == "quartic":
            self.z_dim = 2 * n + m
            self.x_feature_dim = 2 * n
            self._zdeg = np.array([1] * n + [2] * n + [1] * m)
            self._znames = ([f"x{i+1}" for i in range(n)]
                            + [f"x{i+1}^2" for i in range(n)]
                            + [f"u{j+1}" for j in range(m)])
        else:
            self.z_dim = n + m
            self.x_feature_dim = n
            self._zdeg = np.array([1] * (n + m))
            self._znames = [f"x{i+1}" for i in range(n)] + [f"u{j+1}" for j in range(m)]
        self._iu, self._ju = np.triu_indices(self.z_dim)
        self.n_quadratic = len(self._iu)
        self.has_linear = kind == "extended_quadratic"
        self.feature_count = self.n_quadratic + (self.z_dim + 1 if self.has_linear else 0)
        self.feature_degrees = self._build_degrees()
        self.feature_descriptors = self._build_descriptors()
        if kind == "quartic":
            d1 = int((self._zdeg == 1).sum())
            d2 = int((self._zdeg == 2).sum())
            n3 = int((self.feature_degrees == 3).sum())
            n4 = int((self.feature_degrees == 4).sum())
            # cross-degree feature counts must match the moment bookkeeping;
            # mixed deg-1 x deg-2 pairs appear once per unordered pair
            assert n3 == d1 * d2, (n3, d1, d2)
            assert n4 == d2 * (d2 + 1) // 2, (n4, d2)
            if (n, m) == (2, 1):
                # canonical planar case: 12 third-moment and 4 fourth-moment
                # matrix entries feed 6 + 3 features
                assert n3 == 6 and n4 == 3

    def _build_degrees(self):
        deg = self._zdeg[self._iu] + self._zdeg[self._ju]
        if self.has_linear:
            deg = np.concatenate([deg, self._zdeg, [0]])
        return deg

    def _build_descriptors(self):
        n = self.state_dim
        base = [f"x{i+1}" for i in range(n)] + [f"u{j+1}" for j in range(self.input_dim)]

        def zexp(zi):
            e = np.zeros(len(base), dtype=int)
            if self.kind == "quartic":
                if zi < n:
                    e[zi] = 1
                elif zi < 2 * n:
                    e[zi - n] = 2
                else:
                    e[n + (zi - 2 * n)] = 1
            else:
                e[zi] = 1
            return e

        def mono(e, coeff):
            parts = [] if coeff == 1 else [str(coeff)]
            for name, p in zip(base, e):
                if p == 1:
                    parts.append(name)
                elif p > 1:
                    parts.append(f"{name}^{p}")
            return "*".join(parts) if parts else "1"

        out = []
        for k in range(self.n_quadratic):
            a, b = self._iu[k], self._ju[k]
            coeff = 1 if a == b else 2
            out.append(mono(zexp(a) + zexp(b), coeff))
        if self.has_linear:
            for zi in range(self.z_dim):
                out.append(mono(zexp(zi), 1))
            out.append("1")
        return tuple(out)

    # lifted variable map and features, batch first since everything inner
    # loops over buffers

    def lift(self, X, U):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        U = np.atleast_2d(np.asarray(U, dtype=float))
        if X.shape[1] != self.state_dim or U.shape[1] != self.input_dim:
            raise ValueError(
                f"expected state dim {self.state_dim} and input dim {self.input_dim}, "
                f"got {X.shape[1]} and {U.shape[1]}")
        if self.kind == "quartic":
            return np.hstack([X, X ** 2, U])
        return np.hstack([X, U])

    def features_batch(self, X, U):
        Z = self.lift(X, U)
        quad = Z[:, self._iu] * Z[:, self._ju]
        quad[:, self._iu != self._ju] *= 2.0
        if self.has_linear:
            return np.hstack([quad, Z, np.ones((Z.shape[0], 1))])
        return quad

    def policy_features(self, X):
        """x-features the greedy policy is affine in: x, or [x; x^2]."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.kind == "quartic":
            return np.hstack([X, X ** 2])
        return X

    def __eq__(self, other):
        return (isinstance(other, BasisFamily)
                and (self.kind, self.state_dim, self.input_dim)
                == (other.kind, other.state_dim, other.input_dim))

    def __hash__(self):
        return hash((self.kind, self.state_dim, self.input_dim))

    def __repr__(self):
        return (f"BasisFamily({self.kind!r}, n={self.state_dim}, m={self.input_dim}, "
                f"K={self.feature_count})")


@dataclasses.dataclass(frozen=True)
class QParams:
    """Coefficient vector alpha over a family's features."""
    alpha: np.ndarray
    family: BasisFamily

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float)
        if alpha.shape != (self.family.feature_count,):
            raise ValueError(
                f"alpha has shape {alpha.shape}, family has {self.family.feature_count} features")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)


@dataclasses.dataclass(frozen=True)
class LinearPolicy:
    """u = gain @ policy_features(x) + offset."""
    gain: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        gain = np.atleast_2d(np.asarray(self.gain, dtype=float))
        offset = np.atleast_1d(np.asarray(self.offset, dtype=float))
        if offset.shape != (gain.shape[0],):
            raise ValueError(f"offset shape {offset.shape} does not match gain rows {gain.shape[0]}")
        gain.setflags(write=False)
        offset.setflags(write=False)
        object.__setattr__(self, "gain", gain)
        object.__setattr__(self, "offset", offset)

    def act(self, family, x):
        single = np.asarray(x).ndim == 1
        U = family.policy_features(x) @ self.gain.T + self.offset
        return U[0] if single else U


Blocks = dataclasses.make_dataclass(
    "Blocks", ["P_xx", "P_xu", "P_ux", "P_uu", "p", "s"], frozen=True)
Blocks.__doc__ = """Block view of a candidate: Q = z'Pz + p'z + s, z = [xf; u].

P is split at the family's x-feature dimension. p and s are structurally
zero for families without linear and constant terms."""


def features(family, x, u):
    """Feature vector phi(x, u); rows for batch input."""
    single = np.asarray(x).ndim == 1
    out = family.features_batch(x, u)
    return out[0] if single else out


def eval_q(params, x, u):
    """Q(x, u) = phi(x, u) . alpha; scalar for a single point."""
    single = np.asarray(x).ndim == 1
    vals = params.family.features_batch(x, u) @ params.alpha
    return float(vals[0]) if single else vals


def split_matrices(family, alpha):
    """(P, p, s) with P symmetric z_dim x z_dim. Internal building block."""
    alpha = np.asarray(alpha, dtype=float)
    P = np.zeros((family.z_dim, family.z_dim))
    P[family._iu, family._ju] = alpha[:family.n_quadratic]
    P = P + P.T - np.diag(np.diag(P))
    if family.has_linear:
        p = alpha[family.n_quadratic:family.n_quadratic + family.z_dim].copy()
        s = float(alpha[-1])
    else:
        p = np.zeros(family.z_dim)
        s = 0.0
    return P, p, s


def extract_blocks(params):
    f = params.family
    P, p, s = split_matrices(f, params.alpha)
    xf = f.x_feature_dim
    return Blocks(P_xx=P[:xf, :xf], P_xu=P[:xf, xf:], P_ux=P[xf:, :xf],
                  P_uu=P[xf:, xf:], p=p, s=s)


def pack(family, P, p=None, s=0.0):
    """QParams from a symmetric P (and p, s where the family has them)."""
    P = np.asarray(P, dtype=float)
    if P.shape != (family.z_dim, family.z_dim):
        raise ValueError(f"P has shape {P.shape}, expected {(family.z_dim, family.z_dim)}")
    if np.abs(P - P.T).max() != 0.0:
        raise ValueError("P must be exactly symmetric")
    parts = [P[family._iu, family._ju]]
    if family.has_linear:
        parts.append(np.zeros(family.z_dim) if p is None else np.asarray(p, dtype=float))
        parts.append([float(s)])
    elif p is not None and np.any(np.asarray(p) != 0):
        raise ValueError(f"{family.kind} family has no linear terms")
    return QParams(np.concatenate(parts), family)


def greedy_gain(params, pd_tol=_PD_TOL):
    """Closed-form greedy policy as a LinearPolicy on the x-features.

    u*(x) = -P_uu^{-1} (P_ux xf + p_u / 2). Raises PolicyUndefined when the
    smallest eigenvalue of P_uu is at or below pd_tol.
    """
    f = params.family
    P, p, _ = split_matrices(f, params.alpha)
    xf = f.x_feature_dim
    Puu = P[xf:, xf:]
    w = np.linalg.eigvalsh(Puu)
    if w.min() <= pd_tol:
        raise PolicyUndefined(w.min())
    gain = -np.linalg.solve(Puu, P[xf:, :xf])
    offset = -np.linalg.solve(Puu, 0.5 * p[xf:])
    return LinearPolicy(gain, offset)


def greedy_policy(params, x):
    """Greedy input at a state (or batch of states)."""
    return greedy_gain(params).act(params.family, x)


@dataclasses.dataclass(frozen=True)
class MomentSpec:
    """Relevance-weight moments defining the LP objective.

    second is the matrix of second moments over the degree-1 variables
    (x then u), validated symmetric positive definite. third and fourth feed
    the quartic family's mixed and squared groups; first feeds linear terms
    (extended family) and defaults to zero. The constant feature always gets
    weight 1, the total mass of the relevance weights.

    These are treated as given data. Nothing checks that they are jointly
    the moments of an actual distribution; see objective_vector.
    """
    second: np.ndarray
    third: Optional[np.ndarray] = None
    fourth: Optional[np.ndarray] = None
    first: Optional[np.ndarray] = None

    def __post_init__(self):
        second = np.asarray(self.second, dtype=float)
        if second.ndim != 2 or second.shape[0] != second.shape[1]:
            raise ValueError(f"second moment matrix must be square, got {second.shape}")
        if np.abs(second - second.T).max() > 1e-12:
            raise ValueError("second moment matrix must be symmetric")
        if np.linalg.eigvalsh(second).min() <= 0:
            raise ValueError("second moment matrix must be positive definite")
        object.__setattr__(self, "second", second)
        for name in ("third", "fourth", "first"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, np.asarray(v, dtype=float).ravel())


def objective_vector(family, moments):
    """Expected-feature vector m with m_k = E_c[phi_k] under the moment data.

    Degree bookkeeping over the lifted variables: degree-2 features read the
    second-moment matrix, the quartic family's degree-3 features read the
    third-moment entries (row-major over ordered (deg-1, deg-2) variable
    pairs) and its degree-4 features the fourth-moment entries (row-major
    over deg-2 pairs). Off-diagonal features collect moment(i,j)+moment(j,i)
    to match their factor-2 convention.
    """
    n1 = family.state_dim + family.input_dim
    second = moments.second
    if second.shape != (n1, n1):
        raise ValueError(f"second moments must be {n1}x{n1} for this family, got {second.shape}")
    d1 = np.where(family._zdeg == 1)[0]
    d2 = np.where(family._zdeg == 2)[0]
    pos1 = {int(z): k for k, z in enumerate(d1)}
    mom = np.zeros((family.z_dim, family.z_dim))
    for a in d1:
        for b in d1:
            mom[a, b] = second[pos1[int(a)], pos1[int(b)]]
    if len(d2):
        n3 = 2 * len(d1) * len(d2)
        n4 = len(d2) ** 2
        if moments.third is None or moments.third.shape != (n3,):
            raise ValueError(f"quartic family needs a third-moment vector of length {n3}")
        if moments.fourth is None or moments.fourth.shape != (n4,):
            raise ValueError(f"quartic family needs a fourth-moment vector of length {n4}")
        t = 0
        for a in range(family.z_dim):
            for b in range(family.z_dim):
                if {int(family._zdeg[a]), int(family._zdeg[b])} == {1, 2}:
                    mom[a, b] = moments.third[t]
                    t += 1
        assert t == n3
        f4 = 0
        for a in d2:
            for b in d2:
                mom[a, b] = moments.fourth[f4]
                f4 += 1
    mvec = np.empty(family.feature_count)
    for k in range(family.n_quadratic):
        a, b = family._iu[k], family._ju[k]
        mvec[k] = mom[a, b] if a == b else mom[a, b] + mom[b, a]
    if family.has_linear:
        if moments.first is None:
            mu = np.zeros(family.z_dim)
        else:
            mu = moments.first
            if mu.shape != (family.z_dim,):
                raise ValueError(f"first moments must have length {family.z_dim}")
        mvec[family.n_quadratic:family.n_quadratic + family.z_dim] = mu
        mvec[-1] = 1.0
    return mvec
