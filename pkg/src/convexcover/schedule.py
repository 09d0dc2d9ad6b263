"""Geometric refinement schedules, kept entirely in log space.

A schedule at sharpness p >= 1 and target level eta < 1 is the finite
chain of levels

    log delta_m = p * ((p+1)/(p+2))^(m-1) * log eta,   m = 1, 2, ...

which climbs toward an edge u with log u = -2 (p+1)^2 (p+2) log 2. The
depth A is the last index with delta_A < u. Each step m <= A carries a
weight alpha_m with delta_m * alpha_m^(p+1) = eta^(p+1) and a radius

    zeta_m = sqrt(eta * delta_{m+1} / (delta_m * alpha_m)),

whose closed form is log zeta_m = p / (2 (p+1)^2) * ((p+1)/(p+2))^m *
log eta. Radii at least double at each step, their squares sum below
4/3, and the weighted level increments sum below (7/3) eta^p; these are
the facts schedule_checks certifies numerically. cover_accounting turns
a schedule into the log of a covering-count bound.

Levels like eta = 2^-200 underflow as plain floats, so every quantity
here is a log; exponentiate only at the boundary and accept 0 or inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .functions import ParameterError, _fstr

LOG2 = math.log(2.0)

# Reject eta when a level sits this close to the edge: the depth would
# hinge on float rounding.
EDGE_GUARD = 1e-9


def _log_add(a: float, b: float) -> float:
    # log(e^a + e^b) without overflow
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


def _check_p(p: float) -> float:
    p = float(p)
    if not (math.isfinite(p) and p >= 1.0):
        raise ParameterError("need finite p >= 1")
    return p


@dataclass(frozen=True)
class Breakpoints:
    """The edge level for sharpness p: log u = -2 (p+1)^2 (p+2) log 2."""

    p: float
    log_edge: float


def breakpoints(p: float) -> Breakpoints:
    p = _check_p(p)
    return Breakpoints(p, -2.0 * (p + 1.0) ** 2 * (p + 2.0) * LOG2)


@dataclass(frozen=True)
class Schedule:
    """Levels, weights, and radii of one refinement chain.

    log_levels holds log delta_1 .. log delta_{A+1} (the last one is past
    the edge), log_weights and log_radii hold entries for m = 1 .. A.
    log_radii is computed from the defining square root; the closed form
    is available separately for cross-checks.
    """

    p: float
    log_eta: float
    depth: int
    log_edge: float
    log_levels: tuple[float, ...]
    log_weights: tuple[float, ...]
    log_radii: tuple[float, ...]

    def to_json(self) -> dict:
        return {"p": _fstr(self.p), "log_eta": _fstr(self.log_eta),
                "depth": self.depth, "log_edge": _fstr(self.log_edge),
                "log_levels": [_fstr(v) for v in self.log_levels],
                "log_weights": [_fstr(v) for v in self.log_weights],
                "log_radii": [_fstr(v) for v in self.log_radii]}


def log_radius_closed_form(p: float, log_eta: float, m: int) -> float:
    """log zeta_m = p / (2 (p+1)^2) * ((p+1)/(p+2))^m * log eta."""
    p = _check_p(p)
    r = (p + 1.0) / (p + 2.0)
    return p / (2.0 * (p + 1.0) ** 2) * r**m * float(log_eta)


def build_schedule(p: float, log_eta: float) -> Schedule:
    """Chain levels until one clears the edge.

    Raises when no level sits below the edge (eta too large for this p)
    or when any level lands within EDGE_GUARD of the edge, where the
    depth would be decided by rounding rather than by the parameters.
    """
    p = _check_p(p)
    log_eta = float(log_eta)
    if not (math.isfinite(log_eta) and log_eta < 0.0):
        raise ParameterError("need finite log_eta < 0")
    edge = breakpoints(p).log_edge
    r = (p + 1.0) / (p + 2.0)

    def log_delta(m: int) -> float:
        return p * r ** (m - 1) * log_eta

    depth = 0
    m = 1
    while True:
        ld = log_delta(m)
        if abs(ld - edge) < EDGE_GUARD:
            raise ParameterError(
                "level indistinguishable from the edge; perturb eta")
        if ld >= edge:
            break
        depth = m
        m += 1
    if depth == 0:
        raise ParameterError(
            f"eta too large: need p * log_eta < {edge}")

    levels = tuple(log_delta(m) for m in range(1, depth + 2))
    weights = tuple(log_eta * (1.0 - (p / (p + 1.0)) * r ** (m - 1))
                    for m in range(1, depth + 1))
    radii = tuple(0.5 * (log_eta + levels[m] - levels[m - 1] - weights[m - 1])
                  for m in range(1, depth + 1))
    return Schedule(p, log_eta, depth, edge, levels, weights, radii)


def schedule_from_eta(p: float, eta: float) -> Schedule:
    if not (0.0 < eta < 1.0):
        raise ParameterError("need 0 < eta < 1")
    return build_schedule(p, math.log(eta))


@dataclass(frozen=True)
class ScheduleChecks:
    """Numerical certificate of the schedule's defining inequalities.

    dim_sums holds (d, sum of zeta^d, bound 2^d/(2^d - 1), ok) rows.
    """

    chain_ok: bool
    edge_ok: bool
    weights_monotone: bool
    identity_residual: float
    identity_ok: bool
    min_log_ratio: float
    ratio_ok: bool
    closed_form_gap: float
    closed_form_ok: bool
    log_s1: float
    log_s1_bound: float
    s1_ok: bool
    zeta_square_sum: float
    zeta_square_ok: bool
    dim_sums: tuple[tuple[int, float, float, bool], ...]
    ok: bool

    def to_json(self) -> dict:
        return {"chain_ok": self.chain_ok, "edge_ok": self.edge_ok,
                "weights_monotone": self.weights_monotone,
                "identity_residual": _fstr(self.identity_residual),
                "identity_ok": self.identity_ok,
                "min_log_ratio": _fstr(self.min_log_ratio),
                "ratio_ok": self.ratio_ok,
                "closed_form_gap": _fstr(self.closed_form_gap),
                "closed_form_ok": self.closed_form_ok,
                "log_s1": _fstr(self.log_s1),
                "log_s1_bound": _fstr(self.log_s1_bound),
                "s1_ok": self.s1_ok,
                "zeta_square_sum": _fstr(self.zeta_square_sum),
                "zeta_square_ok": self.zeta_square_ok,
                "dim_sums": [[d, _fstr(s), _fstr(b), ok]
                             for d, s, b, ok in self.dim_sums],
                "ok": self.ok}


def schedule_checks(sched: Schedule, dims: tuple[int, ...] = (1, 2, 3),
                    identity_tol: float = 1e-9,
                    closed_form_tol: float = 1e-12) -> ScheduleChecks:
    """Every inequality the construction relies on, checked at once.

    chain: levels strictly increase, the last crosses the edge and the
        one before stays below it.
    identity: delta_m * alpha_m^(p+1) = eta^(p+1) in log space.
    ratio: consecutive radii at least double (slack 1e-12 in logs).
    closed form: defining radii match log_radius_closed_form.
    s1: delta_1 + sum alpha_m^p (delta_{m+1} - delta_m) <= (7/3) eta^p.
    squares: sum zeta_m^2 <= 4/3; powers: sum zeta_m^d <= 2^d/(2^d-1).
    """
    p = sched.p
    a = sched.depth
    lv, wt, rd = sched.log_levels, sched.log_weights, sched.log_radii

    chain_ok = all(lv[i] < lv[i + 1] for i in range(a))
    edge_ok = lv[a - 1] < sched.log_edge <= lv[a]
    weights_monotone = all(wt[i + 1] < wt[i] for i in range(a - 1))

    target = (p + 1.0) * sched.log_eta
    identity_residual = max(abs(lv[m] + (p + 1.0) * wt[m] - target)
                            for m in range(a))
    identity_ok = identity_residual <= identity_tol

    if a >= 2:
        min_log_ratio = min(rd[m] - rd[m - 1] for m in range(1, a))
    else:
        min_log_ratio = math.inf
    ratio_ok = min_log_ratio >= LOG2 - 1e-12

    closed_form_gap = max(
        abs(rd[m - 1] - log_radius_closed_form(p, sched.log_eta, m))
        for m in range(1, a + 1))
    closed_form_ok = closed_form_gap <= closed_form_tol

    log_s1 = lv[0]
    for m in range(a):
        log_inc = lv[m + 1] + math.log1p(-math.exp(lv[m] - lv[m + 1]))
        log_s1 = _log_add(log_s1, p * wt[m] + log_inc)
    log_s1_bound = math.log(7.0 / 3.0) + p * sched.log_eta
    s1_ok = log_s1 <= log_s1_bound + 1e-12

    zeta_square_sum = sum(math.exp(2.0 * v) for v in rd)
    zeta_square_ok = zeta_square_sum <= 4.0 / 3.0

    dim_rows = []
    all_dims_ok = True
    for d in dims:
        s = sum(math.exp(d * v) for v in rd)
        b = 2.0**d / (2.0**d - 1.0)
        ok_d = s <= b
        all_dims_ok = all_dims_ok and ok_d
        dim_rows.append((d, s, b, ok_d))

    ok = (chain_ok and edge_ok and weights_monotone and identity_ok
          and ratio_ok and closed_form_ok and s1_ok and zeta_square_ok
          and all_dims_ok)
    return ScheduleChecks(chain_ok, edge_ok, weights_monotone,
                          identity_residual, identity_ok, min_log_ratio,
                          ratio_ok, closed_form_gap, closed_form_ok,
                          log_s1, log_s1_bound, s1_ok,
                          zeta_square_sum, zeta_square_ok,
                          tuple(dim_rows), ok)


@dataclass(frozen=True)
class CoverAccounting:
    """Cover radius and cover-count bound implied by a schedule.

    entropy_bound caps the log of the covering count: with u the edge
    level and G the sum of per-axis slope budgets,

        log N <= scale * (2^(d+1)/(2^d - 1) + (2/u)^(d/2))
                       * ((G + 2) / eta)^(d/2).

    Extreme parameters push that right-hand side past float range, so
    log_entropy_bound keeps its log alongside (entropy_bound is then
    inf). The cover radius is (17/3)^(1/p) * eta.
    """

    dim: int
    gamma_sum: float
    scale: float
    log_coverage_radius: float
    coverage_radius: float
    log_entropy_bound: float
    entropy_bound: float

    def to_json(self) -> dict:
        return {"dim": self.dim, "gamma_sum": _fstr(self.gamma_sum),
                "scale": _fstr(self.scale),
                "log_coverage_radius": _fstr(self.log_coverage_radius),
                "coverage_radius": _fstr(self.coverage_radius),
                "log_entropy_bound": _fstr(self.log_entropy_bound),
                "entropy_bound": _fstr(self.entropy_bound)}


def cover_accounting(sched: Schedule, d: int, gamma_sum: float = 0.0,
                     scale: float = 1.0) -> CoverAccounting:
    """Cover radius and the bound on the log covering count for dimension d."""
    if sched.depth < 1:
        raise ParameterError("schedule has no levels below the edge")
    if not 1 <= d <= 8:
        raise ParameterError("dimension must be in 1..8")
    if not (gamma_sum >= 0.0):
        raise ParameterError("gamma_sum must be nonnegative (inf allowed)")
    if not (math.isfinite(scale) and scale > 0.0):
        raise ParameterError("scale must be positive and finite")

    log_cover = math.log(17.0 / 3.0) / sched.p + sched.log_eta
    if math.isinf(gamma_sum):
        log_bound = math.inf
    else:
        half_d = 0.5 * d
        log_coef = _log_add((d + 1.0) * LOG2 - math.log(2.0**d - 1.0),
                            half_d * (LOG2 - sched.log_edge))
        log_bound = (math.log(scale) + log_coef
                     + half_d * (math.log(gamma_sum + 2.0) - sched.log_eta))
    try:
        bound = math.exp(log_bound)
    except OverflowError:
        bound = math.inf
    return CoverAccounting(d, gamma_sum, scale, log_cover,
                           math.exp(log_cover), log_bound, bound)
