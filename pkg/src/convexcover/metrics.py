"""Distances between convex functions.

Lp distances come from tensor-product quadrature (midpoint by default,
trapezoid optionally), the sup distance from a vertex-grid maximum, and
the epigraph Hausdorff distance from support functions sampled over a
deterministic quasi-uniform set of directions. Every estimator here
converges from below as its resolution grows, and each report carries an
error estimate from a doubled-resolution recomputation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .functions import (
    ConvexFunction,
    ParameterError,
    Rect,
    _fstr,
    tensor_points,
    _vertex_axes,
)

RULES = ("midpoint", "trapezoid")

# Cap on entries of the node-by-direction work matrix per chunk.
_CHUNK_BUDGET = 4_000_000


@dataclass(frozen=True)
class GridSpec:
    """Quadrature resolution: n nodes per axis and the rule to apply."""

    n: int = 101
    rule: str = "midpoint"

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError("need n >= 2")
        if self.rule not in RULES:
            raise ParameterError(f"rule must be one of {RULES}")

    def refined(self) -> "GridSpec":
        return GridSpec(2 * self.n - 1, self.rule)

    def to_json(self) -> dict:
        return {"n": self.n, "rule": self.rule}


@dataclass(frozen=True)
class LpMetric:
    p: float

    def to_json(self) -> dict:
        return {"kind": "lp", "p": _fstr(self.p)}


@dataclass(frozen=True)
class SupGridMetric:
    def to_json(self) -> dict:
        return {"kind": "sup_grid"}


@dataclass(frozen=True)
class HausdorffEpigraphMetric:
    bound: float
    n_directions: int

    def to_json(self) -> dict:
        return {"kind": "hausdorff_epigraph", "bound": _fstr(self.bound),
                "n_directions": self.n_directions}


@dataclass(frozen=True)
class DistanceReport:
    """A distance value plus the gap to a doubled-resolution recomputation."""

    value: float
    error_estimate: float
    grid: GridSpec
    metric: LpMetric | SupGridMetric | HausdorffEpigraphMetric

    def to_json(self) -> dict:
        return {"value": _fstr(self.value),
                "error_estimate": _fstr(self.error_estimate),
                "grid": self.grid.to_json(),
                "metric": self.metric.to_json()}


def quadrature_grid(rect: Rect, spec: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Nodes (N, d) and weights (N,) of the tensor-product rule."""
    nodes, weights = [], []
    for lo, hi in zip(rect.lo, rect.hi):
        if spec.rule == "midpoint":
            h = (hi - lo) / spec.n
            nodes.append(lo + (np.arange(spec.n) + 0.5) * h)
            weights.append(np.full(spec.n, h))
        else:
            h = (hi - lo) / (spec.n - 1)
            nodes.append(np.linspace(lo, hi, spec.n))
            w = np.full(spec.n, h)
            w[0] = w[-1] = h / 2
            weights.append(w)
    pts = tensor_points(nodes)
    w = reduce(lambda a, b: np.multiply.outer(a, b).ravel(), weights)
    return pts, w


def vertex_grid(rect: Rect, n: int) -> np.ndarray:
    """Inclusive n-per-axis vertex grid; endpoints land exactly on the box."""
    if n < 2:
        raise ParameterError("need n >= 2")
    return tensor_points(_vertex_axes(rect, n))


def _require_common_domain(f: ConvexFunction, g: ConvexFunction) -> Rect:
    if f.domain != g.domain:
        raise ParameterError("functions must share a domain")
    return f.domain


def _lp_value(f, g, p, spec) -> float:
    pts, w = quadrature_grid(f.domain, spec)
    diff = np.abs(f.values(pts) - g.values(pts))
    return float((w @ diff**p) ** (1.0 / p))


def lp_distance(f: ConvexFunction, g: ConvexFunction, p: float,
                grid: GridSpec = GridSpec()) -> DistanceReport:
    """Quadrature Lp distance, 1 <= p < inf, on the shared domain."""
    if not (1.0 <= p < math.inf):
        raise ParameterError("need 1 <= p < inf")
    _require_common_domain(f, g)
    value = _lp_value(f, g, p, grid)
    fine = _lp_value(f, g, p, grid.refined())
    return DistanceReport(value, abs(value - fine), grid, LpMetric(p))


def _sup_value(f, g, n) -> float:
    pts = vertex_grid(f.domain, n)
    return float(np.abs(f.values(pts) - g.values(pts)).max())


def sup_grid_distance(f: ConvexFunction, g: ConvexFunction,
                      grid: GridSpec = GridSpec()) -> DistanceReport:
    """Max of |f - g| over an inclusive vertex grid.

    This is a lower bound for the true sup distance; it uses grid.n nodes
    per axis regardless of the quadrature rule.
    """
    _require_common_domain(f, g)
    value = _sup_value(f, g, grid.n)
    fine = _sup_value(f, g, 2 * grid.n - 1)
    return DistanceReport(value, abs(fine - value), grid, SupGridMetric())


@dataclass(frozen=True)
class EpigraphSupportQuery:
    """A unit direction in R^(d+1) paired with the ceiling of the epigraph slab."""

    direction: tuple[float, ...]
    bound: float

    def __post_init__(self):
        u = tuple(float(v) for v in self.direction)
        object.__setattr__(self, "direction", u)
        object.__setattr__(self, "bound", float(self.bound))
        if len(u) < 2:
            raise ParameterError("direction must live in R^(d+1), d >= 1")
        if abs(math.hypot(*u) - 1.0) > 1e-12:
            raise ParameterError("direction must have unit norm within 1e-12")


def _support_batch(pts: np.ndarray, vals: np.ndarray, bound: float,
                   dirs: np.ndarray) -> np.ndarray:
    """Support values of {(x, t) : f(x) <= t <= bound} for each direction row.

    For a direction with nonnegative last component the maximizing t is the
    ceiling; otherwise it is f(x). The x part is maximized over the grid,
    so each value is exact in t and grid-limited in x.
    """
    d = pts.shape[1]
    out = np.empty(len(dirs))
    step = max(1, _CHUNK_BUDGET // max(1, len(pts)))
    for s in range(0, len(dirs), step):
        u = dirs[s:s + step]
        last = u[:, d]
        spatial = pts @ u[:, :d].T
        lifted = spatial + vals[:, None] * np.minimum(last, 0.0)[None, :]
        out[s:s + step] = lifted.max(axis=0) + np.maximum(last, 0.0) * bound
    return out


def epigraph_support(f: ConvexFunction, query: EpigraphSupportQuery,
                     grid: GridSpec = GridSpec()) -> float:
    """Support of the epigraph slab in the query direction (grid maximum)."""
    pts = vertex_grid(f.domain, grid.n)
    vals = f.values(pts)
    u = np.asarray(query.direction)
    if len(u) != f.domain.dim + 1:
        raise ParameterError("direction dimension must be domain dim + 1")
    return float(_support_batch(pts, vals, query.bound, u[None, :])[0])


def direction_set(ambient: int, count: int) -> np.ndarray:
    """Deterministic quasi-uniform unit directions on S^(ambient-1).

    ambient 2 uses an angle lattice (doubling count keeps old directions),
    ambient 3 a Fibonacci spiral, higher dimensions an unscrambled Halton
    sequence pushed through the normal quantile.
    """
    if ambient < 2 or count < 1:
        raise ParameterError("need ambient >= 2 and count >= 1")
    if ambient == 2:
        theta = 2.0 * np.pi * np.arange(count) / count
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    if ambient == 3:
        i = np.arange(count)
        z = 1.0 - (2.0 * i + 1.0) / count
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        theta = i * math.pi * (3.0 - math.sqrt(5.0))
        return np.stack([r * np.cos(theta), r * np.sin(theta), z], axis=1)
    from scipy.stats import norm, qmc

    sampler = qmc.Halton(d=ambient, scramble=False)
    sampler.fast_forward(1)  # skip the all-zero first point
    raw = norm.ppf(sampler.random(count))
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    return raw / norms


def direction_covering_radius(ambient: int, count: int) -> float:
    """Upper bound on the covering radius of direction_set(ambient, count).

    Exact for the angle lattice (pi / count in chord distance, slightly
    over). The Fibonacci constant is measured at 2.7 / sqrt(count) and
    stated with margin; the Halton allowance is coarse. Used to bound how
    far a sampled support-function maximum can sit below the true one.
    """
    if ambient < 2 or count < 1:
        raise ParameterError("need ambient >= 2 and count >= 1")
    if ambient == 2:
        return math.pi / count
    if ambient == 3:
        return 3.5 / math.sqrt(count)
    return 6.0 * count ** (-1.0 / (ambient - 1.0))


def _hausdorff_value(f, g, bound, dirs, n) -> float:
    pts = vertex_grid(f.domain, n)
    sf = _support_batch(pts, f.values(pts), bound, dirs)
    sg = _support_batch(pts, g.values(pts), bound, dirs)
    return float(np.abs(sf - sg).max())


def hausdorff_epigraph(f: ConvexFunction, g: ConvexFunction, bound: float,
                       n_directions: int,
                       grid: GridSpec = GridSpec()) -> DistanceReport:
    """Hausdorff distance between the two epigraph slabs under the bound.

    Computed as the largest absolute support-function gap over the sampled
    directions, so the value converges to the true distance from below as
    directions and grid refine. The error estimate doubles the direction
    count and refines the support grid; it does not cover the systematic
    sampling bias, which is at most twice the slab circumradius times
    direction_covering_radius of the direction set.
    """
    d = _require_common_domain(f, g).dim
    if n_directions < 2 * (d + 1):
        raise ParameterError(f"need at least {2 * (d + 1)} directions")
    dirs = direction_set(d + 1, n_directions)
    value = _hausdorff_value(f, g, bound, dirs, grid.n)
    fine = _hausdorff_value(f, g, bound, direction_set(d + 1, 2 * n_directions),
                            2 * grid.n - 1)
    return DistanceReport(value, abs(fine - value), grid,
                          HausdorffEpigraphMetric(bound, n_directions))


def greedy_packing(family, eps: float,
                   metric: LpMetric | SupGridMetric | HausdorffEpigraphMetric,
                   grid: GridSpec = GridSpec()) -> list[int]:
    """Indices of a maximal eps-separated subfamily, scanned in input order.

    A candidate is admitted when its distance to every already admitted
    member is at least eps. Deterministic for a fixed input order.
    """
    if not eps > 0:
        raise ParameterError("eps must be positive")

    def dist(a, b):
        if isinstance(metric, LpMetric):
            return lp_distance(a, b, metric.p, grid).value
        if isinstance(metric, SupGridMetric):
            return sup_grid_distance(a, b, grid).value
        return hausdorff_epigraph(a, b, metric.bound, metric.n_directions,
                                  grid).value

    chosen: list[int] = []
    members: list[ConvexFunction] = []
    for i, f in enumerate(family):
        if all(dist(f, m) >= eps for m in members):
            chosen.append(i)
            members.append(f)
    return chosen
