"""Discretization of the deconvolution problem.

Bins the observation domain into m intervals and the signal domain into
M intervals, builds the m-by-M channel matrix of noise-shift bin
probabilities, the 0/1 functional vector picking out the signal bins at
or below the evaluation point, and empirical distributions of binned
observations.  Convex signal classes are polyhedral subsets of the
probability simplex.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import optimize

from ._validation import check_sample
from .errors import InfeasibleClassError

__all__ = [
    "BinGrid",
    "EmpiricalDistribution",
    "ConvexClass",
    "DiscreteProblem",
    "make_bins",
    "build_channel_matrix",
    "build_indicator",
    "bin_observations",
    "lipschitz_class",
    "build_problem",
    "save_problem",
    "load_problem",
]

CHANNEL_FLOOR = 1e-12  # keeps logs of channel outputs finite downstream


@dataclass(frozen=True)
class BinGrid:
    """Strictly increasing bin edges; count = len(edges) - 1 intervals.
    The first interval is closed, the rest are left-open."""

    edges: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be strictly increasing with at least two entries")
        object.__setattr__(self, "edges", edges)

    @property
    def count(self):
        return self.edges.size - 1

    @property
    def midpoints(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def widths(self):
        return np.diff(self.edges)


def make_bins(lo, hi, count):
    """Uniform grid of ``count`` bins over [lo, hi]."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if not lo < hi:
        raise ValueError("need lo < hi")
    return BinGrid(np.linspace(lo, hi, count + 1))


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Bin counts of an observation sample; probs sums to 1."""

    counts: np.ndarray
    n: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.sum() != self.n:
            raise ValueError("counts must sum to n")
        object.__setattr__(self, "counts", counts)

    @property
    def probs(self):
        return self.counts / self.n


def bin_observations(y, bins: BinGrid, policy="clamp"):
    """Bin a sample: the first bin is closed on both sides, later bins
    are left-open.  Out-of-range points are clamped to the end bins or
    dropped (with the count reduced) per ``policy``."""
    y = check_sample(y)
    if policy not in ("clamp", "drop"):
        raise ValueError(f"unknown policy {policy!r}")
    idx = np.searchsorted(bins.edges, y, side="left") - 1
    idx[y == bins.edges[0]] = 0
    inside = (idx >= 0) & (idx <= bins.count - 1)
    if policy == "clamp":
        idx = np.clip(idx, 0, bins.count - 1)
    else:
        idx = idx[inside]
        if idx.size == 0:
            raise ValueError("drop policy removed every observation")
    counts = np.bincount(idx, minlength=bins.count)
    return EmpiricalDistribution(counts=counts, n=int(idx.size))


def build_channel_matrix(model, obs_bins: BinGrid, signal_bins: BinGrid,
                         floor=CHANNEL_FLOOR):
    """Channel matrix: entry (j, k) is the probability that the noise
    shifted by signal-bin midpoint k lands in observation bin j.

    Entries are floored at a tiny positive value; columns are *not*
    renormalized, so probability mass falling outside the observation
    domain stays lost (truncation is part of the model).
    """
    mids = signal_bins.midpoints
    cdf_at_edges = model.cdf(obs_bins.edges[:, None] - mids[None, :])
    a = np.diff(cdf_at_edges, axis=0)
    return np.maximum(a, floor)


def build_indicator(signal_bins: BinGrid, t0):
    """0/1 vector marking signal-bin midpoints at or below t0."""
    return (signal_bins.midpoints <= t0).astype(float)


@dataclass(frozen=True)
class ConvexClass:
    """Polyhedral subset of the probability simplex:
    {x >= 0, sum x = 1, a_ub @ x <= b_ub}.

    Construction verifies nonemptiness (fast path: the uniform vector;
    otherwise a feasibility LP) and raises `InfeasibleClassError` for an
    empty class.
    """

    dim: int
    a_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    label: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if (self.a_ub is None) != (self.b_ub is None):
            raise ValueError("a_ub and b_ub must be given together")
        if self.a_ub is not None:
            a = np.asarray(self.a_ub, dtype=float)
            b = np.asarray(self.b_ub, dtype=float)
            if a.ndim != 2 or a.shape[1] != self.dim or b.shape != (a.shape[0],):
                raise ValueError("inconsistent constraint shapes")
            object.__setattr__(self, "a_ub", a)
            object.__setattr__(self, "b_ub", b)
        uniform = np.full(self.dim, 1.0 / self.dim)
        if not self.contains(uniform) and not self._feasible():
            raise InfeasibleClassError(f"class {self.label or '<unnamed>'} is empty")

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            return False
        if np.any(x < -tol) or abs(x.sum() - 1.0) > tol:
            return False
        if self.a_ub is not None and np.any(self.a_ub @ x > self.b_ub + tol):
            return False
        return True

    def _linprog(self, cost, method="highs"):
        return optimize.linprog(
            cost, A_ub=self.a_ub, b_ub=self.b_ub,
            A_eq=np.ones((1, self.dim)), b_eq=np.array([1.0]),
            bounds=(0.0, 1.0), method=method,
        )

    def _feasible(self):
        return self._linprog(np.zeros(self.dim)).status == 0

    def max_linear(self, weights):
        """Vertex maximizing ``weights @ x`` over the class (exact LP)."""
        weights = np.asarray(weights, dtype=float)
        if self.a_ub is None:
            # bare simplex: the maximizing vertex is a basis vector
            out = np.zeros(self.dim)
            out[int(np.argmax(weights))] = 1.0
            return out
        scale = np.max(np.abs(weights))  # argmax is invariant to cost scale
        cost = -weights / scale if scale > 0 else np.zeros(self.dim)
        res = self._linprog(cost)
        if res.status != 0:
            res = self._linprog(cost, method="highs-ds")
        if res.status != 0:
            raise InfeasibleClassError(f"LP over class {self.label!r} failed: {res.message}")
        return np.maximum(res.x, 0.0)


def lipschitz_class(dim, lip):
    """Simplex vectors whose successive differences are at most ``lip``
    in absolute value; the uniform vector is always a member."""
    if lip < 0:
        raise InfeasibleClassError("negative Lipschitz constant")
    if dim == 1:
        return ConvexClass(dim=1, label=f"lipschitz[{lip:g}]")
    d = np.zeros((dim - 1, dim))
    rows = np.arange(dim - 1)
    d[rows, rows] = -1.0
    d[rows, rows + 1] = 1.0
    a_ub = np.vstack([d, -d])
    b_ub = np.full(2 * (dim - 1), float(lip))
    return ConvexClass(dim=dim, a_ub=a_ub, b_ub=b_ub, label=f"lipschitz[{lip:g}]")


@dataclass(frozen=True)
class DiscreteProblem:
    """Discretized deconvolution instance.

    ``channel`` maps signal-bin probabilities to observation-bin
    probabilities; ``indicator`` encodes the CDF functional at ``t0``.
    """

    obs_bins: BinGrid
    signal_bins: BinGrid
    channel: np.ndarray
    indicator: np.ndarray
    n: int
    epsilon: float
    t0: float

    def __post_init__(self):
        m, big_m = self.channel.shape
        if m != self.obs_bins.count or big_m != self.signal_bins.count:
            raise ValueError("channel shape does not match the bin grids")
        if self.indicator.shape != (big_m,):
            raise ValueError("indicator length does not match the signal bins")
        if not 0 < self.epsilon <= 0.25:
            raise ValueError("epsilon must lie in (0, 1/4]")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if np.any(self.channel < 0) or np.any(self.channel > 1):
            raise ValueError("channel entries must lie in [0, 1]")


def build_problem(model, obs_bins: BinGrid, signal_bins: BinGrid, t0, n, epsilon):
    return DiscreteProblem(
        obs_bins=obs_bins,
        signal_bins=signal_bins,
        channel=build_channel_matrix(model, obs_bins, signal_bins),
        indicator=build_indicator(signal_bins, t0),
        n=int(n),
        epsilon=float(epsilon),
        t0=float(t0),
    )


def save_problem(problem: DiscreteProblem, prefix):
    """Write a problem as a CSV bundle:
    {prefix}_obs_edges.csv, {prefix}_signal_edges.csv, {prefix}_channel.csv,
    {prefix}_indicator.csv and {prefix}_meta.json."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(f"{prefix}_obs_edges.csv", problem.obs_bins.edges, fmt="%.17g",
               header="edge", comments="")
    np.savetxt(f"{prefix}_signal_edges.csv", problem.signal_bins.edges, fmt="%.17g",
               header="edge", comments="")
    np.savetxt(f"{prefix}_channel.csv", problem.channel, fmt="%.17g", delimiter=",",
               header=",".join(f"k{k}" for k in range(problem.signal_bins.count)),
               comments="")
    np.savetxt(f"{prefix}_indicator.csv", problem.indicator, fmt="%.17g",
               header="indicator", comments="")
    meta = {"n": problem.n, "epsilon": problem.epsilon, "t0": problem.t0}
    Path(f"{prefix}_meta.json").write_text(json.dumps(meta, sort_keys=True))


def load_problem(prefix):
    prefix = Path(prefix)
    obs = BinGrid(np.loadtxt(f"{prefix}_obs_edges.csv", skiprows=1))
    sig = BinGrid(np.loadtxt(f"{prefix}_signal_edges.csv", skiprows=1))
    channel = np.loadtxt(f"{prefix}_channel.csv", delimiter=",", skiprows=1)
    channel = np.atleast_2d(channel)
    indicator = np.atleast_1d(np.loadtxt(f"{prefix}_indicator.csv", skiprows=1))
    meta = json.loads(Path(f"{prefix}_meta.json").read_text())
    return DiscreteProblem(obs_bins=obs, signal_bins=sig, channel=channel,
                           indicator=indicator, n=int(meta["n"]),
                           epsilon=float(meta["epsilon"]), t0=float(meta["t0"]))
