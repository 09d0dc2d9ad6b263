"""Numerical verification of the inequalities tying the pieces together.

Three families of checks live here. First, comparisons between function
distances and the Hausdorff distance of their epigraph slabs: the sup
distance of two functions with per-axis slope budgets G is at most
sqrt(1 + sum G_j^2) times the slab Hausdorff distance, and for functions
bounded by 1 the L1 distance is at most (1 + 20 d) times it. Second,
facts those comparisons lean on: at interior points |f - g| is at most
the slab distance times (1 + slope(f) + slope(g)), the integral of the
slope magnitude over the ((rho, 1-rho)) inner box is at most 8 d, and
each one-dimensional slice integrates to at most 4. Third, closed forms
for ramp functions and the normalization identity for rescaled pairs.

Every estimator involved converges from below, so each check carries a
tolerance assembled from the estimators' own refinement gaps and can
refine itself a bounded number of times before reporting failure.

entropy_bounds assembles the headline quantities: upper and lower
bounds, in log form, on how many functions are needed to cover (or can
be packed into) the bounded convex functions on a cube at a given
distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functions import (
    ConvexFunction,
    Hinge,
    LipschitzVector,
    ParameterError,
    Rect,
    _fstr,
    lipschitz_budget,
    rescale_to_unit,
    unit_rect,
)
from .metrics import (
    GridSpec,
    direction_covering_radius,
    hausdorff_epigraph,
    lp_distance,
    quadrature_grid,
    sup_grid_distance,
    vertex_grid,
)
from .packing import separation_point, separation_scale
from .schedule import build_schedule, cover_accounting


@dataclass(frozen=True)
class LemmaReport:
    """One verified inequality: lhs <= rhs within tolerance.

    slack is rhs + tolerance - lhs (nonnegative when ok); refinements
    counts how many times the estimators were refined before settling.
    """

    name: str
    lhs: float
    rhs: float
    tolerance: float
    slack: float
    refinements: int
    ok: bool

    def to_json(self) -> dict:
        return {"name": self.name, "lhs": _fstr(self.lhs),
                "rhs": _fstr(self.rhs), "tolerance": _fstr(self.tolerance),
                "slack": _fstr(self.slack), "refinements": self.refinements,
                "ok": self.ok}


def _grid_max(f: ConvexFunction, n: int = 33) -> float:
    pts = vertex_grid(f.domain, n)
    return float(f.values(pts).max())


def _grid_abs_max(f: ConvexFunction, n: int = 33) -> float:
    pts = vertex_grid(f.domain, n)
    return float(np.abs(f.values(pts)).max())


def _combined_budget(f: ConvexFunction, g: ConvexFunction) -> LipschitzVector:
    gf, gg = lipschitz_budget(f).gamma, lipschitz_budget(g).gamma
    return LipschitzVector(tuple(max(a, b) for a, b in zip(gf, gg)))


def _hausdorff_bias(f: ConvexFunction, g: ConvexFunction, bound: float,
                    n_directions: int) -> float:
    """Bound on how far the sampled Hausdorff estimate sits below the truth.

    The support gap of two slabs inside a ball of radius R is 2R-Lipschitz
    along the sphere, so its sampled maximum misses the true one by at
    most 2R times the covering radius of the direction set.
    """
    dom = f.domain
    spat = sum(max(a * a, b * b) for a, b in zip(dom.lo, dom.hi))
    height = max(abs(bound), _grid_abs_max(f), _grid_abs_max(g))
    radius = math.sqrt(spat + height * height)
    return 2.0 * radius * direction_covering_radius(dom.dim + 1, n_directions)


def check_sup_bound(f: ConvexFunction, g: ConvexFunction, bound: float,
                    gammas: LipschitzVector | None = None,
                    n_directions: int = 2000, grid: GridSpec = GridSpec(201),
                    base_tol: float = 1e-9,
                    max_refinements: int = 2) -> LemmaReport:
    """sup |f - g| <= sqrt(1 + sum gamma_j^2) * slab Hausdorff distance.

    bound must dominate both functions (the slabs are cut at it); gammas
    must be valid upper bounds on the per-axis slopes and default to the
    form-derived budgets. Both sides are grid estimates converging from
    below, so the tolerance carries the refinement gaps plus the
    direction-sampling bias of the Hausdorff side.
    """
    if f.domain != g.domain:
        raise ParameterError("functions must share a domain")
    if bound < max(_grid_max(f), _grid_max(g)):
        raise ParameterError("bound must dominate both functions")
    if gammas is None:
        gammas = _combined_budget(f, g)
    factor = math.sqrt(1.0 + gammas.sum_squares())

    refinements = 0
    while True:
        lhs = sup_grid_distance(f, g, grid)
        ell = hausdorff_epigraph(f, g, bound, n_directions, grid)
        if math.isinf(factor):
            rhs, tol = math.inf, math.inf
        else:
            rhs = factor * ell.value
            bias = _hausdorff_bias(f, g, bound, n_directions)
            tol = base_tol + lhs.error_estimate \
                + factor * (ell.error_estimate + bias)
        ok = lhs.value <= rhs + tol
        if ok or refinements >= max_refinements:
            return LemmaReport("sup_vs_hausdorff", lhs.value, rhs, tol,
                               rhs + tol - lhs.value, refinements, ok)
        refinements += 1
        n_directions *= 2
        grid = GridSpec(2 * grid.n - 1, grid.rule)


def check_l1_bound(f: ConvexFunction, g: ConvexFunction,
                   n_directions: int = 2000, grid: GridSpec = GridSpec(201),
                   base_tol: float = 1e-9,
                   max_refinements: int = 2) -> LemmaReport:
    """L1 distance <= (1 + 20 d) * slab Hausdorff distance, for |f|,|g| <= 1.

    The constant is calibrated to functions bounded by 1 on their box, so
    the slab ceiling is fixed at 1; normalize first when needed.
    """
    if f.domain != g.domain:
        raise ParameterError("functions must share a domain")
    if max(_grid_abs_max(f), _grid_abs_max(g)) > 1.0 + 1e-12:
        raise ParameterError("functions must be bounded by 1; normalize first")
    factor = 1.0 + 20.0 * f.domain.dim

    refinements = 0
    while True:
        lhs = lp_distance(f, g, 1.0, grid)
        ell = hausdorff_epigraph(f, g, 1.0, n_directions, grid)
        rhs = factor * ell.value
        bias = _hausdorff_bias(f, g, 1.0, n_directions)
        tol = base_tol + lhs.error_estimate \
            + factor * (ell.error_estimate + bias)
        ok = lhs.value <= rhs + tol
        if ok or refinements >= max_refinements:
            return LemmaReport("l1_vs_hausdorff", lhs.value, rhs, tol,
                               rhs + tol - lhs.value, refinements, ok)
        refinements += 1
        n_directions *= 2
        grid = GridSpec(2 * grid.n - 1, grid.rule)


def check_pointwise_gap(f: ConvexFunction, g: ConvexFunction, bound: float,
                        points, n_directions: int = 2000,
                        grid: GridSpec = GridSpec(201),
                        base_tol: float = 1e-9) -> LemmaReport:
    """|f - g| <= rho * (1 + slope_f + slope_g) at interior points.

    rho is the slab Hausdorff distance (estimate plus its refinement
    gap and sampling bias) and slope is the l1 norm of a subgradient.
    Reports the worst point.
    """
    pts = np.asarray(points, dtype=float)
    ell = hausdorff_epigraph(f, g, bound, n_directions, grid)
    rho = ell.value + ell.error_estimate \
        + _hausdorff_bias(f, g, bound, n_directions)
    gaps = np.abs(f.values(pts) - g.values(pts))
    slopes = (np.abs(f.subgradients(pts)).sum(axis=1)
              + np.abs(g.subgradients(pts)).sum(axis=1))
    rhs_all = rho * (1.0 + slopes)
    worst = int(np.argmax(gaps - rhs_all))
    lhs, rhs = float(gaps[worst]), float(rhs_all[worst])
    ok = lhs <= rhs + base_tol
    return LemmaReport("pointwise_gap", lhs, rhs, base_tol,
                       rhs + base_tol - lhs, 0, ok)


def gradient_mass(f: ConvexFunction, rho: float,
                  grid: GridSpec = GridSpec(101)) -> float:
    """Integral of the l1 slope magnitude over the rho-inner box.

    For a function bounded by 1 this is at most 8 d; each coordinate
    direction contributes at most 4 through its one-dimensional slices.
    """
    if not 0.0 < rho < 0.5:
        raise ParameterError("need 0 < rho < 0.5")
    w = f.domain.widths
    inner = Rect(tuple(lo + rho * wi for lo, wi in zip(f.domain.lo, w)),
                 tuple(hi - rho * wi for hi, wi in zip(f.domain.hi, w)))
    pts, wts = quadrature_grid(inner, GridSpec(grid.n, "midpoint"))
    return float(wts @ np.abs(f.subgradients(pts)).sum(axis=1))


def slice_gradient_mass(f: ConvexFunction, axis: int, anchor,
                        rho: float, n: int = 1001) -> float:
    """Integral of |slope along one axis| over a rho-trimmed line segment.

    The anchor fixes the other coordinates; it must be strictly interior
    on them. At most 4 for a function bounded by 1.
    """
    if not 0.0 < rho < 0.5:
        raise ParameterError("need 0 < rho < 0.5")
    d = f.domain.dim
    if not 0 <= axis < d:
        raise ParameterError("axis out of range")
    anchor = np.asarray(anchor, dtype=float)
    if anchor.shape != (d,):
        raise ParameterError(f"anchor must have shape ({d},)")
    lo, hi = f.domain.lo[axis], f.domain.hi[axis]
    width = hi - lo
    a, b = lo + rho * width, hi - rho * width
    h = (b - a) / n
    ts = a + (np.arange(n) + 0.5) * h
    pts = np.broadcast_to(anchor, (n, d)).copy()
    pts[:, axis] = ts
    return float(h * np.abs(f.subgradients(pts)[:, axis]).sum())


# -- ramp closed forms -----------------------------------------------------


def hinge_lp_closed_form(alpha: float, p: float) -> float:
    """Lp norm of the ramp max(0, 1 - x/alpha) on [0, 1]: (alpha/(p+1))^(1/p)."""
    if not 0.0 < alpha <= 1.0:
        raise ParameterError("closed form needs 0 < alpha <= 1")
    if not p >= 1.0:
        raise ParameterError("need p >= 1")
    return (alpha / (p + 1.0)) ** (1.0 / p)


def hinge_hausdorff_closed_form(alpha: float) -> float:
    """Slab Hausdorff distance between the ramp and 0: alpha / sqrt(1 + alpha^2).

    The slabs (ceiling 1, domain [0, 1]) differ by the triangle under the
    ramp, and the farthest point of the larger slab is the origin, at
    exactly this distance from the ramp's hypotenuse.
    """
    if not 0.0 < alpha <= 1.0:
        raise ParameterError("closed form needs 0 < alpha <= 1")
    return alpha / math.sqrt(1.0 + alpha * alpha)


def hinge_family(count: int) -> tuple[Hinge, ...]:
    """Ramps with alpha = 2^-1, ..., 2^-count on [0, 1].

    Any two members are at sup distance >= 1/2: at x = 2^-k the steeper
    ramp has dropped to 0 while the flatter one still reads 1 - 2^(j-k),
    and both values are exact dyadic floats. The family shows that no
    finite sup-distance cover exists for ramps of unbounded slope.
    """
    if not 1 <= count <= 50:
        raise ParameterError("count must be in 1..50")
    dom = unit_rect(1)
    return tuple(Hinge(dom, 2.0**-j) for j in range(1, count + 1))


# -- normalization identity ------------------------------------------------


@dataclass(frozen=True)
class ScalingIdentityReport:
    """Both sides of the normalization identity at matching resolution.

    lhs is the Lp distance of the normalized pair on the unit cube; rhs
    is the raw distance times side^(-d/p) / bound. The two quadratures
    use affinely matching nodes, so difference is float noise plus the
    identity itself.
    """

    p: float
    bound: float
    side: float
    lhs: float
    rhs: float
    difference: float

    def to_json(self) -> dict:
        return {"p": _fstr(self.p), "bound": _fstr(self.bound),
                "side": _fstr(self.side), "lhs": _fstr(self.lhs),
                "rhs": _fstr(self.rhs), "difference": _fstr(self.difference)}


def scaling_identity_report(f: ConvexFunction, g: ConvexFunction, p: float,
                            bound: float,
                            grid: GridSpec = GridSpec(101)) -> ScalingIdentityReport:
    if f.domain != g.domain:
        raise ParameterError("functions must share a domain")
    if not f.domain.is_cube():
        raise ParameterError("the identity needs a cube domain")
    if not bound > 0:
        raise ParameterError("bound must be positive")
    d = f.domain.dim
    side = f.domain.widths[0]
    lhs = lp_distance(rescale_to_unit(f, bound), rescale_to_unit(g, bound),
                      p, grid).value
    raw = lp_distance(f, g, p, grid).value
    rhs = raw * side ** (-d / p) / bound
    return ScalingIdentityReport(p, bound, side, lhs, rhs, abs(lhs - rhs))


# -- headline bounds -------------------------------------------------------


@dataclass(frozen=True)
class EntropyBounds:
    """Bounds on the log cover and packing counts at one distance eps.

    Every field is a bound on a log count, so the three are directly
    comparable. log_upper caps the log cover count of the bound-B convex
    functions on the cube in Lp (None when eps is too large for the
    schedule to start; inf when the cap exceeds float range, in which
    case cover_accounting still has its log). log_lower is the log size
    of the constructed packing (None when the required level is
    inadmissible). log_lipschitz_upper caps the sup-distance cover count
    of the slope-budgeted subclass (None when no budgets are given; inf
    when a budget is infinite). All three carry an unspecified absolute
    factor, exposed as the scale argument.
    """

    eps: float
    p: float
    dim: int
    log_upper: float | None
    log_lower: float | None
    log_lipschitz_upper: float | None

    def to_json(self) -> dict:
        def opt(v):
            return None if v is None else _fstr(v)
        return {"eps": _fstr(self.eps), "p": _fstr(self.p), "dim": self.dim,
                "log_upper": opt(self.log_upper),
                "log_lower": opt(self.log_lower),
                "log_lipschitz_upper": opt(self.log_lipschitz_upper)}


def entropy_bounds(eps: float, p: float, rect: Rect, bound: float,
                   gammas: LipschitzVector | None = None,
                   scale: float = 1.0) -> EntropyBounds:
    """Assemble the cover and packing bounds for one (eps, p, cube, bound).

    Everything is first normalized: distances divide by bound * side^(d/p)
    (by side^0 for the sup-distance bound), slope budgets multiply by
    side / bound. The lower bound needs only an Lp distance >= L1, so one
    packing serves every p >= 1.
    """
    if not rect.is_cube():
        raise ParameterError("bounds are stated for cube domains")
    if not (eps > 0 and bound > 0):
        raise ParameterError("eps and bound must be positive")
    if not p >= 1.0:
        raise ParameterError("need p >= 1")
    d = rect.dim
    side = rect.widths[0]
    if gammas is not None and len(gammas.gamma) != d:
        raise ParameterError("gamma length must match the dimension")
    gsum = 0.0 if gammas is None else sum(v * side / bound
                                          for v in gammas.gamma)

    eta_lp = eps / (bound * side ** (d / p))
    log_upper = None
    if 0.0 < eta_lp < 1.0:
        try:
            sched = build_schedule(p, math.log(eta_lp))
            log_upper = cover_accounting(sched, d, gsum, scale).entropy_bound
        except ParameterError:
            log_upper = None

    log_lower = None
    eta_pack = eta_lp / separation_scale(d)
    try:
        log_lower = separation_point(eta_pack, d).log_packing
    except ParameterError:
        log_lower = None

    log_lip = None
    if gammas is not None:
        eta_sup = eps / bound
        if math.isinf(gsum):
            log_lip = math.inf
        elif 0.0 < eta_sup < 1.0:
            log_val = (math.log(scale)
                       + 0.5 * d * (math.log(gsum + 2.0) - math.log(eta_sup)))
            try:
                log_lip = math.exp(log_val)
            except OverflowError:
                log_lip = math.inf
    return EntropyBounds(eps, p, d, log_upper, log_lower, log_lip)
