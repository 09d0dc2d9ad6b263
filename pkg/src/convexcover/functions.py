"""Convex functions on axis-aligned boxes.

Every function here is convex by construction: affine pieces, maxima of
convex parts, a separable quadratic, one-sided ramps, and positively
scaled affine reparametrizations. Instances are frozen dataclasses and
safe to share between threads; evaluation never mutates state.

Coordinates are 64-bit floats. Batch evaluation takes an (N, d) array
and returns an (N,) array; the scalar helpers wrap the batch path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

MAX_DIM = 8

# Per-axis resolution of the bound-verification grid for random functions.
BOUND_GRID_AXIS = 17

# Guard for tensor grids materialized in memory.
MAX_GRID_POINTS = 10**7


class ParameterError(ValueError):
    """Construction or call parameters violate a precondition."""


class DomainError(ValueError):
    """A point lies outside the domain required by the operation."""


def _fstr(x: float) -> str:
    # repr of a float round-trips exactly through float()
    return repr(float(x))


@dataclass(frozen=True)
class Rect:
    """Axis-aligned box prod_i [lo_i, hi_i], dimension 1..8."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi):
            raise ParameterError("lo and hi must have the same length")
        if not 1 <= len(lo) <= MAX_DIM:
            raise ParameterError(f"dimension must be in 1..{MAX_DIM}")
        for a, b in zip(lo, hi):
            if not (math.isfinite(a) and math.isfinite(b) and a < b):
                raise ParameterError("each axis needs finite lo < hi")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def widths(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    def is_cube(self) -> bool:
        w = self.widths
        return all(x == w[0] for x in w)

    def to_json(self) -> dict:
        return {"lo": [_fstr(v) for v in self.lo],
                "hi": [_fstr(v) for v in self.hi]}

    @staticmethod
    def from_json(obj: dict) -> "Rect":
        return Rect(tuple(float(s) for s in obj["lo"]),
                    tuple(float(s) for s in obj["hi"]))


def unit_rect(d: int) -> Rect:
    return Rect((0.0,) * d, (1.0,) * d)


def _vertex_axes(rect: Rect, n: int) -> list[np.ndarray]:
    # linspace pins both endpoints exactly
    return [np.linspace(a, b, n) for a, b in zip(rect.lo, rect.hi)]


def tensor_points(axes: list[np.ndarray]) -> np.ndarray:
    """Row-major tensor grid as an (N, d) array."""
    total = math.prod(len(a) for a in axes)
    if total > MAX_GRID_POINTS:
        raise ParameterError(f"grid of {total} points exceeds {MAX_GRID_POINTS}")
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass(frozen=True)
class LipschitzVector:
    """Per-axis Lipschitz budgets; math.inf marks an unconstrained axis."""

    gamma: tuple[float, ...]

    def __post_init__(self):
        g = tuple(float(v) for v in self.gamma)
        object.__setattr__(self, "gamma", g)
        if not g:
            raise ParameterError("gamma must be non-empty")
        for v in g:
            if not v > 0:
                raise ParameterError("gamma entries must be positive (inf allowed)")

    def finite_sum(self) -> float:
        return sum(v for v in self.gamma if math.isfinite(v))

    def sum_squares(self) -> float:
        return sum(v * v for v in self.gamma)


@dataclass(frozen=True)
class ConvexFunction:
    """Base for all convex forms. Subclasses fill _values/_subgradients."""

    domain: Rect

    # -- evaluation ------------------------------------------------------

    def values(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.domain.dim:
            raise ParameterError(f"expected an (N, {self.domain.dim}) array")
        lo = np.asarray(self.domain.lo)
        hi = np.asarray(self.domain.hi)
        if not (np.all(pts >= lo) and np.all(pts <= hi)):
            raise DomainError("point outside the function's domain")
        return self._values(pts)

    def value(self, x) -> float:
        pts = np.asarray(x, dtype=float).reshape(1, -1)
        return float(self.values(pts)[0])

    def subgradients(self, points) -> np.ndarray:
        """One subgradient per row; points must be strictly interior."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.domain.dim:
            raise ParameterError(f"expected an (N, {self.domain.dim}) array")
        lo = np.asarray(self.domain.lo)
        hi = np.asarray(self.domain.hi)
        if not (np.all(pts > lo) and np.all(pts < hi)):
            raise DomainError("subgradients need strictly interior points")
        return self._subgradients(pts)

    def subgradient(self, x) -> tuple[float, ...]:
        pts = np.asarray(x, dtype=float).reshape(1, -1)
        return tuple(float(v) for v in self.subgradients(pts)[0])

    def _values(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _subgradients(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        return {"domain": self.domain.to_json(), "form": self._form_json()}

    def _form_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Affine(ConvexFunction):
    """x -> coeffs . x + intercept."""

    coeffs: tuple[float, ...]
    intercept: float

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "intercept", float(self.intercept))
        if len(c) != self.domain.dim:
            raise ParameterError("coeffs length must match the domain dimension")
        if not all(map(math.isfinite, c)) or not math.isfinite(self.intercept):
            raise ParameterError("affine coefficients must be finite")

    @cached_property
    def _coeff_arr(self) -> np.ndarray:
        return np.array(self.coeffs)

    def _values(self, pts):
        return pts @ self._coeff_arr + self.intercept

    def _subgradients(self, pts):
        return np.broadcast_to(self._coeff_arr, pts.shape).copy()

    def _form_json(self):
        return {"kind": "affine",
                "coeffs": [_fstr(v) for v in self.coeffs],
                "intercept": _fstr(self.intercept)}


@dataclass(frozen=True)
class MaxAffine(ConvexFunction):
    """Pointwise maximum of affine pieces.

    At a tie the subgradient is the gradient of the active piece with the
    smallest index, so evaluation is deterministic across platforms.
    """

    pieces: tuple[Affine, ...]
    bound_on_grid: float | None = None  # recorded by make_random_convex

    def __post_init__(self):
        if not self.pieces:
            raise ParameterError("MaxAffine needs at least one piece")
        object.__setattr__(self, "pieces", tuple(self.pieces))
        for p in self.pieces:
            if not isinstance(p, Affine) or p.domain != self.domain:
                raise ParameterError("pieces must be Affine on the same domain")

    @cached_property
    def _stacked(self) -> tuple[np.ndarray, np.ndarray]:
        c = np.array([p.coeffs for p in self.pieces])
        b = np.array([p.intercept for p in self.pieces])
        return c, b

    def _piece_values(self, pts):
        c, b = self._stacked
        return pts @ c.T + b

    def _values(self, pts):
        return self._piece_values(pts).max(axis=1)

    def _subgradients(self, pts):
        c, _ = self._stacked
        # argmax returns the first maximal index: the tie-break rule
        active = np.argmax(self._piece_values(pts), axis=1)
        return c[active]

    def _form_json(self):
        form = {"kind": "max_affine",
                "pieces": [{"coeffs": [_fstr(v) for v in p.coeffs],
                            "intercept": _fstr(p.intercept)} for p in self.pieces]}
        if self.bound_on_grid is not None:
            form["bound_on_grid"] = _fstr(self.bound_on_grid)
        return form


@dataclass(frozen=True)
class SeparableQuadratic(ConvexFunction):
    """x -> (x_1^2 + ... + x_d^2) / d."""

    def _values(self, pts):
        return np.square(pts).sum(axis=1) / self.domain.dim

    def _subgradients(self, pts):
        return 2.0 * pts / self.domain.dim

    def _form_json(self):
        return {"kind": "separable_quadratic"}


@dataclass(frozen=True)
class Hinge(ConvexFunction):
    """x -> max(0, 1 - x_axis / alpha), a ramp dropping from 1 to 0.

    Acts along a single axis. At the kink x_axis == alpha the zero piece
    wins the tie, so the subgradient there is 0.
    """

    alpha: float
    axis: int = 0

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ParameterError("alpha must be positive and finite")
        if not 0 <= self.axis < self.domain.dim:
            raise ParameterError("axis out of range")

    def _values(self, pts):
        return np.maximum(0.0, 1.0 - pts[:, self.axis] / self.alpha)

    def _subgradients(self, pts):
        out = np.zeros_like(pts)
        ramp = 1.0 - pts[:, self.axis] / self.alpha > 0
        out[ramp, self.axis] = -1.0 / self.alpha
        return out

    def _form_json(self):
        return {"kind": "hinge", "alpha": _fstr(self.alpha), "axis": self.axis}


@dataclass(frozen=True)
class MaxWith(ConvexFunction):
    """Pointwise maximum of convex parts; same tie-break as MaxAffine."""

    parts: tuple[ConvexFunction, ...]

    def __post_init__(self):
        if not self.parts:
            raise ParameterError("MaxWith needs at least one part")
        object.__setattr__(self, "parts", tuple(self.parts))
        for p in self.parts:
            if p.domain != self.domain:
                raise ParameterError("parts must share the outer domain")

    def _part_values(self, pts):
        return np.stack([p._values(pts) for p in self.parts], axis=1)

    def _values(self, pts):
        return self._part_values(pts).max(axis=1)

    def _subgradients(self, pts):
        vals = self._part_values(pts)
        active = np.argmax(vals, axis=1)
        grads = np.stack([p._subgradients(pts) for p in self.parts], axis=1)
        return grads[np.arange(len(pts)), active]

    def _form_json(self):
        return {"kind": "max_with", "parts": [p.to_json() for p in self.parts]}


@dataclass(frozen=True)
class Rescaled(ConvexFunction):
    """Lazy view scale * base(T(x)), T the affine map domain -> base.domain.

    scale must be positive so convexity is preserved. The map is applied
    per axis; sub-ulp spill outside base.domain is clipped away.
    """

    base: ConvexFunction
    scale: float

    def __post_init__(self):
        object.__setattr__(self, "scale", float(self.scale))
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ParameterError("scale must be positive and finite")
        if self.base.domain.dim != self.domain.dim:
            raise ParameterError("base dimension must match the target domain")

    @cached_property
    def _map_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        t_lo = np.asarray(self.domain.lo)
        b_lo = np.asarray(self.base.domain.lo)
        b_hi = np.asarray(self.base.domain.hi)
        ratio = np.asarray(self.base.domain.widths) / np.asarray(self.domain.widths)
        return t_lo, b_lo, b_hi, ratio

    def _mapped(self, pts):
        t_lo, b_lo, b_hi, ratio = self._map_arrays
        mapped = b_lo + (pts - t_lo) * ratio
        return np.clip(mapped, b_lo, b_hi)

    def _values(self, pts):
        return self.scale * self.base._values(self._mapped(pts))

    def _subgradients(self, pts):
        _, _, _, ratio = self._map_arrays
        return self.scale * self.base._subgradients(self._mapped(pts)) * ratio

    def _form_json(self):
        return {"kind": "rescaled", "scale": _fstr(self.scale),
                "base": self.base.to_json()}


def function_from_json(obj: dict) -> ConvexFunction:
    """Inverse of ConvexFunction.to_json; exact for every coefficient."""
    domain = Rect.from_json(obj["domain"])
    form = obj["form"]
    kind = form["kind"]
    if kind == "affine":
        return Affine(domain, tuple(float(s) for s in form["coeffs"]),
                      float(form["intercept"]))
    if kind == "max_affine":
        pieces = tuple(Affine(domain, tuple(float(s) for s in p["coeffs"]),
                              float(p["intercept"])) for p in form["pieces"])
        bound = form.get("bound_on_grid")
        return MaxAffine(domain, pieces,
                         float(bound) if bound is not None else None)
    if kind == "separable_quadratic":
        return SeparableQuadratic(domain)
    if kind == "hinge":
        return Hinge(domain, float(form["alpha"]), int(form["axis"]))
    if kind == "max_with":
        return MaxWith(domain, tuple(function_from_json(p) for p in form["parts"]))
    if kind == "rescaled":
        return Rescaled(domain, function_from_json(form["base"]),
                        float(form["scale"]))
    raise ParameterError(f"unknown form kind {kind!r}")


def rescale_to_unit(f: ConvexFunction, bound: float) -> ConvexFunction:
    """Normalize f on its box to a function on [0,1]^d with values / bound.

    Idempotent: a function already on the unit box with bound == 1 is
    returned unchanged.
    """
    if not bound > 0:
        raise ParameterError("bound must be positive")
    d = f.domain.dim
    if f.domain == unit_rect(d) and bound == 1.0:
        return f
    return Rescaled(unit_rect(d), f, 1.0 / bound)


def make_random_convex(d: int, bound: float, pieces: int, seed: int,
                       rect: Rect | None = None) -> MaxAffine:
    """Random max-affine function with |f| <= bound on a vertex check grid.

    Pieces are drawn from a seeded generator, then uniformly scaled so the
    max of |f| over a 17-per-axis grid fits inside [-bound, bound]. The
    grid max is recorded on the result as bound_on_grid. Re-samples up to
    1000 times if a scaled draw still fails the grid check.
    """
    if pieces < 1:
        raise ParameterError("need at least one piece")
    if not bound > 0:
        raise ParameterError("bound must be positive")
    rect = rect if rect is not None else unit_rect(d)
    if rect.dim != d:
        raise ParameterError("rect dimension mismatch")
    if BOUND_GRID_AXIS**d > MAX_GRID_POINTS:
        raise ParameterError("bound grid too large at this dimension")
    grid = tensor_points(_vertex_axes(rect, BOUND_GRID_AXIS))
    rng = np.random.default_rng(seed)
    for _ in range(1000):
        coeffs = rng.uniform(-2.0 * bound, 2.0 * bound, size=(pieces, d))
        icepts = rng.uniform(-bound, bound, size=pieces)
        vals = grid @ coeffs.T + icepts
        m = float(np.abs(vals.max(axis=1)).max())
        if m > bound:
            t = bound / m * (1.0 - 2.0**-40)
            coeffs *= t
            icepts *= t
            vals = grid @ coeffs.T + icepts
            m = float(np.abs(vals.max(axis=1)).max())
        if m <= bound:
            made = tuple(Affine(rect, tuple(c), float(b))
                         for c, b in zip(coeffs, icepts))
            return MaxAffine(rect, made, bound_on_grid=m)
    raise ParameterError("could not fit a random draw inside the bound")


def lipschitz_budget(f: ConvexFunction) -> LipschitzVector:
    """Valid per-axis Lipschitz upper bounds, read off the form.

    Unlike coordinate_lipschitz_estimate this never under-reports: each
    entry dominates the true coordinate Lipschitz constant, so the result
    is safe to use where an inequality depends on it.
    """
    d = f.domain.dim
    if isinstance(f, Affine):
        g = [abs(c) for c in f.coeffs]
    elif isinstance(f, MaxAffine):
        g = [max(abs(p.coeffs[j]) for p in f.pieces) for j in range(d)]
    elif isinstance(f, SeparableQuadratic):
        g = [2.0 * max(abs(a), abs(b)) / d
             for a, b in zip(f.domain.lo, f.domain.hi)]
    elif isinstance(f, Hinge):
        g = [0.0] * d
        g[f.axis] = 1.0 / f.alpha
    elif isinstance(f, MaxWith):
        cols = zip(*(lipschitz_budget(p).gamma for p in f.parts))
        g = [max(col) for col in cols]
    elif isinstance(f, Rescaled):
        ratio = [bw / tw for bw, tw in
                 zip(f.base.domain.widths, f.domain.widths)]
        g = [f.scale * b * r
             for b, r in zip(lipschitz_budget(f.base).gamma, ratio)]
    else:
        raise ParameterError(f"no Lipschitz budget rule for {type(f).__name__}")
    return LipschitzVector(tuple(max(v, 1e-300) for v in g))


def coordinate_lipschitz_estimate(f: ConvexFunction, n: int = 33) -> LipschitzVector:
    """Largest per-axis difference quotient over an n-per-axis vertex grid.

    A grid estimate: up to rounding in the quotients it lower-bounds the
    true coordinate Lipschitz constants, and converges to them as n grows.
    """
    if n < 2:
        raise ParameterError("need n >= 2")
    d = f.domain.dim
    axes = _vertex_axes(f.domain, n)
    vals = f.values(tensor_points(axes)).reshape((n,) * d)
    gammas = []
    for i in range(d):
        h = (f.domain.hi[i] - f.domain.lo[i]) / (n - 1)
        diffs = np.abs(np.diff(vals, axis=i)) / h
        gammas.append(float(diffs.max()) if diffs.size else 0.0)
    # an exactly constant axis still needs a positive budget
    return LipschitzVector(tuple(max(g, 1e-300) for g in gammas))
