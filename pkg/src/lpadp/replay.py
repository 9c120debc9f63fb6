"""Offline transition buffers: seeded sampling, CSV persistence.

A buffer holds N tuples (x_b, a_b, y_b, l_b) drawn once from a plant and a
stage cost under explicit sampler specs. Everything downstream consumes the
buffer only; no algorithm touches the plant again except for rollouts.

CSV format (lossless round-trip):
    line 1: "# {json metadata}"   seed, sampler specs, resample count, dims
    line 2: "index,x1,..,xn,a1,..,am,y1,..,yn,l"
    rows  : values at 17 significant digits (bitwise float64 round-trip)
"""
from __future__ import annotations

import dataclasses
import json
import warnings
from typing import Optional

import numpy as np

__all__ = ["SamplerSpec", "ReplayBuffer", "BufferSamplingError",
           "build_buffer", "save_buffer", "load_buffer"]


class BufferSamplingError(RuntimeError):
    pass


@dataclasses.dataclass(frozen=True)
class SamplerSpec:
    """Marginal sampler for states or actions.

    kind "uniform" uses (low, high); kind "gaussian" uses (mean, variance).
    Scalar parameters broadcast across dim independent coordinates.
    """
    kind: str
    dim: int
    low: Optional[float] = None
    high: Optional[float] = None
    mean: Optional[float] = None
    variance: Optional[float] = None

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if self.kind == "uniform":
            if self.low is None or self.high is None or not self.low < self.high:
                raise ValueError(f"uniform sampler needs low < high, got {self.low}, {self.high}")
        elif self.kind == "gaussian":
            if self.mean is None or self.variance is None or self.variance <= 0:
                raise ValueError("gaussian sampler needs a mean and a positive variance")
        else:
            raise ValueError(f"unknown sampler kind {self.kind!r}")

    def draw(self, rng, count):
        if self.kind == "uniform":
            return rng.uniform(self.low, self.high, size=(count, self.dim))
        return rng.normal(self.mean, np.sqrt(self.variance), size=(count, self.dim))

    def to_dict(self):
        d = {"kind": self.kind, "dim": self.dim}
        if self.kind == "uniform":
            d.update(low=self.low, high=self.high)
        else:
            d.update(mean=self.mean, variance=self.variance)
        return d

    @staticmethod
    def from_dict(d):
        return SamplerSpec(**d)


@dataclasses.dataclass(frozen=True)
class ReplayBuffer:
    """Immutable batch of sampled transitions."""
    x: np.ndarray
    a: np.ndarray
    y: np.ndarray
    l: np.ndarray
    seed: Optional[int] = None
    state_sampler: Optional[SamplerSpec] = None
    action_sampler: Optional[SamplerSpec] = None
    resample_count: int = 0

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        y = np.atleast_2d(np.asarray(self.y, dtype=float))
        l = np.asarray(self.l, dtype=float).ravel()
        N = x.shape[0]
        if not (a.shape[0] == y.shape[0] == l.shape[0] == N):
            raise ValueError("tuple arrays disagree on length")
        if y.shape[1] != x.shape[1]:
            raise ValueError("successor dimension differs from state dimension")
        for arr in (x, a, y, l):
            arr.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "l", l)

    def __len__(self):
        return self.x.shape[0]

    @property
    def state_dim(self):
        return self.x.shape[1]

    @property
    def input_dim(self):
        return self.a.shape[1]

    def stats(self):
        """Per-block means and variances, for distribution sanity checks."""
        return {
            "x_mean": self.x.mean(axis=0), "x_var": self.x.var(axis=0),
            "a_mean": self.a.mean(axis=0), "a_var": self.a.var(axis=0),
            "l_min": float(self.l.min()), "l_max": float(self.l.max()),
        }


def build_buffer(plant, cost, state_sampler, action_sampler, n_tuples, seed):
    """Sample n_tuples transitions; redraw rows whose transition is non-finite.

    The redraw counter is kept on the buffer. It should read 0 for the
    built-in benchmarks (their dynamics and costs are finite on the sampled
    ranges); a nonzero count is surfaced as a warning since it means the
    sampling distributions reach outside the plant's finite domain.
    """
    if state_sampler.dim != plant.state_dim or action_sampler.dim != plant.input_dim:
        raise ValueError("sampler dimensions do not match the plant")
    N = int(n_tuples)
    if N <= 0:
        raise ValueError("n_tuples must be positive")
    rng = np.random.default_rng(seed)
    X = state_sampler.draw(rng, N)
    A = action_sampler.draw(rng, N)
    Y = plant.step(X, A)
    L = np.asarray(cost.eval(X, A), dtype=float)
    resampled = 0
    while True:
        bad = ~(np.isfinite(Y).all(axis=1) & np.isfinite(L)
                & np.isfinite(X).all(axis=1) & np.isfinite(A).all(axis=1))
        nbad = int(bad.sum())
        if nbad == 0:
            break
        resampled += nbad
        if resampled > 10 * N:
            raise BufferSamplingError(
                f"gave up after {resampled} redraws of non-finite transitions "
                f"({nbad} still bad); samplers likely reach outside the plant's domain")
        X[bad] = state_sampler.draw(rng, nbad)
        A[bad] = action_sampler.draw(rng, nbad)
        Y[bad] = plant.step(X[bad], A[bad])
        L[bad] = cost.eval(X[bad], A[bad])
    if resampled:
        warnings.warn(f"{resampled} non-finite transitions were redrawn while building the buffer")
    return ReplayBuffer(X, A, Y, L, seed=seed, state_sampler=state_sampler,
                        action_sampler=action_sampler, resample_count=resampled)


def _header(n, m):
    cols = (["index"] + [f"x{i+1}" for i in range(n)] + [f"a{j+1}" for j in range(m)]
            + [f"y{i+1}" for i in range(n)] + ["l"])
    return ",".join(cols)


def save_buffer(buffer, path):
    n, m = buffer.state_dim, buffer.input_dim
    meta = {
        "seed": buffer.seed,
        "state_sampler": buffer.state_sampler.to_dict() if buffer.state_sampler else None,
        "action_sampler": buffer.action_sampler.to_dict() if buffer.action_sampler else None,
        "resample_count": buffer.resample_count,
        "state_dim": n, "input_dim": m,
    }
    rows = np.hstack([buffer.x, buffer.a, buffer.y, buffer.l[:, None]])
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        fh.write(_header(n, m) + "\n")
        for i, row in enumerate(rows):
            fh.write(str(i) + "," + ",".join(format(v, ".17g") for v in row) + "\n")
    return path


def load_buffer(path):
    """Parse a buffer CSV; malformed content is reported with its line number."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty buffer file")
    meta = {}
    at = 0
    if lines[0].startswith("#"):
        try:
            meta = json.loads(lines[0].lstrip("#").strip())
        except json.JSONDecodeError as e:
            raise ValueError(f"{path}: line 1: bad metadata JSON ({e})") from None
        at = 1
    if at >= len(lines):
        raise ValueError(f"{path}: missing header line")
    header = lines[at].strip()
    ncols = len(header.split(","))
    # infer dims from the header: index + n + m + n + 1 columns
    n = sum(1 for c in header.split(",") if c.startswith("x"))
    m = sum(1 for c in header.split(",") if c.startswith("a"))
    if n == 0 or m == 0 or header != _header(n, m):
        raise ValueError(
            f"{path}: line {at+1}: bad header {header!r}, expected "
            f"'index,x1..xn,a1..am,y1..yn,l'")
    data = []
    for ln, line in enumerate(lines[at + 1:], start=at + 2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != ncols:
            raise ValueError(f"{path}: line {ln}: expected {ncols} columns, got {len(parts)}")
        try:
            data.append([float(v) for v in parts[1:]])
        except ValueError:
            raise ValueError(f"{path}: line {ln}: non-numeric field") from None
    if not data:
        raise ValueError(f"{path}: no data rows")
    arr = np.asarray(data)
    X = arr[:, :n]
    A = arr[:, n:n + m]
    Y = arr[:, n + m:2 * n + m]
    L = arr[:, -1]
    ss = meta.get("state_sampler")
    asp = meta.get("action_sampler")
    return ReplayBuffer(
        X, A, Y, L, seed=meta.get("seed"),
        state_sampler=SamplerSpec.from_dict(ss) if ss else None,
        action_sampler=SamplerSpec.from_dict(asp) if asp else None,
        resample_count=int(meta.get("resample_count", 0)))
