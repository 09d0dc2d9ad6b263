"""Well-separated families of convex functions on the unit cube.

The construction tiles each axis of [0,1]^d with k disjoint intervals of
length sqrt(eta), separated by gaps of sqrt(eta*(d-1))/2. Over each cell
(a product of one interval per axis) an affine cap is raised above the
base paraboloid f0(x) = (x_1^2+...+x_d^2)/d; the cap meets f0 on the
cell's boundary grid lines, exceeds it inside the cell, and stays below
it on every other cell. Selecting cells by the bits of a binary codeword
and taking the pointwise max yields one convex function per codeword,
and the L1 distance between two of them is at least (Hamming distance)
times the per-cell gap integral eta^(d/2+1)/6.

The interval count k is decided in exact rational arithmetic so that
boundary cases of eta never flip on float rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial.legendre import leggauss

from .functions import (
    Affine,
    ConvexFunction,
    MaxWith,
    ParameterError,
    SeparableQuadratic,
    _fstr,
    tensor_points,
    unit_rect,
)
from .metrics import GridSpec, quadrature_grid

# Families larger than this in cells are refused; the code search over
# 2^n words stops being practical and ints no longer fit two rng draws.
CELL_CAP = 64

# Keep the last interval this far below 1 so exact-rational checks of the
# cap properties retain margin over coefficient rounding.
SPAN_LIMIT = 1.0 - 2.0**-30

_DEFAULT_CERT_GRID = {1: 2001, 2: 600, 3: 120}


def _sum_sqrt_le(p: Fraction, q: Fraction, b: Fraction) -> bool:
    # sqrt(p) + sqrt(q) <= b, decided without leaving the rationals:
    # square once to p + q + 2 sqrt(pq) <= b^2, then square the remainder.
    if p < 0 or q < 0 or b < 0:
        raise ParameterError("nonnegative arguments required")
    rem = b * b - p - q
    if rem < 0:
        return False
    return 4 * p * q <= rem * rem


def max_eta(d: int) -> float:
    """Largest admissible eta for dimension d, 4 / (2 + sqrt(d-1))^2."""
    return 4.0 / (2.0 + math.sqrt(d - 1.0)) ** 2


def interval_count(eta, d: int) -> int:
    """Largest k with k * (2 sqrt(eta) + sqrt(eta (d-1))) <= 2, exactly.

    eta may be an int, float, or Fraction; floats are taken at their exact
    binary value. Raises if no k >= 1 exists (eta above max_eta(d)).
    """
    if not 1 <= d <= 8:
        raise ParameterError("dimension must be in 1..8")
    e = Fraction(eta)
    if e <= 0:
        raise ParameterError("eta must be positive")

    def fits(k: int) -> bool:
        kk = Fraction(k * k)
        return _sum_sqrt_le(4 * e * kk, e * (d - 1) * kk, Fraction(2))

    if not fits(1):
        raise ParameterError(f"eta must be at most {max_eta(d)} at d={d}")
    k = max(1, int(2.0 / ((2.0 + math.sqrt(d - 1.0)) * math.sqrt(float(e)))))
    while not fits(k):
        k -= 1
    while fits(k + 1):
        k += 1
    return k


@dataclass(frozen=True)
class IntervalSystem:
    """k intervals per axis: [starts[i], starts[i] + length], plus gaps."""

    eta: float
    dim: int
    k: int
    length: float
    gap: float
    starts: tuple[float, ...]

    @property
    def n_cells(self) -> int:
        return self.k**self.dim

    def interval(self, i: int) -> tuple[float, float]:
        return self.starts[i], self.starts[i] + self.length

    def cell_from_index(self, idx: int) -> tuple[int, ...]:
        """Row-major cell tuple for a linear index in [0, k^d)."""
        if not 0 <= idx < self.n_cells:
            raise ParameterError("cell index out of range")
        out = []
        for _ in range(self.dim):
            out.append(idx % self.k)
            idx //= self.k
        return tuple(reversed(out))

    def cell_bounds(self, cell: tuple[int, ...]) -> tuple[tuple[float, ...],
                                                          tuple[float, ...]]:
        if len(cell) != self.dim or not all(0 <= i < self.k for i in cell):
            raise ParameterError("bad cell tuple")
        lo = tuple(self.starts[i] for i in cell)
        return lo, tuple(v + self.length for v in lo)

    def to_json(self) -> dict:
        return {"eta": _fstr(self.eta), "dim": self.dim, "k": self.k,
                "length": _fstr(self.length), "gap": _fstr(self.gap),
                "starts": [_fstr(v) for v in self.starts]}


def build_interval_system(eta, d: int) -> IntervalSystem:
    """Place the k intervals inside [0, 1] with a small safety margin.

    Endpoints are floats; when rounding (or an exactly spanning eta) pushes
    the last endpoint past SPAN_LIMIT the lengths are scaled down once and
    then stepped by ulps, so every endpoint sits strictly inside [0, 1).
    """
    k = interval_count(eta, d)
    ef = float(Fraction(eta))
    sq = math.sqrt(ef)
    gap = 0.5 * math.sqrt(ef * (d - 1))

    def span(s, g):
        return (k - 1) * (s + g) + s

    if span(sq, gap) > SPAN_LIMIT:
        t = SPAN_LIMIT / span(sq, gap)
        sq *= t
        gap *= t
    while span(sq, gap) > SPAN_LIMIT:
        sq = math.nextafter(sq, 0.0)
        if gap > 0.0:
            gap = math.nextafter(gap, 0.0)
    starts = tuple(i * (sq + gap) for i in range(k))
    return IntervalSystem(ef, d, k, sq, gap, starts)


def base_paraboloid(d: int) -> SeparableQuadratic:
    return SeparableQuadratic(unit_rect(d))


def cap_function(system: IntervalSystem, cell: tuple[int, ...]) -> Affine:
    """The affine cap over one cell.

    Coefficient j is (u_j + v_j)/d and the intercept is -sum(u_j v_j)/d,
    which interpolates the paraboloid's chord on each axis.
    """
    lo, hi = system.cell_bounds(cell)
    d = system.dim
    coeffs = tuple((u + v) / d for u, v in zip(lo, hi))
    intercept = -sum(u * v for u, v in zip(lo, hi)) / d
    return Affine(unit_rect(d), coeffs, intercept)


def perturbed_function(system: IntervalSystem, word: int) -> ConvexFunction:
    """max(f0, caps of the cells whose bit is set in word)."""
    if not 0 <= word < (1 << system.n_cells):
        raise ParameterError("word out of range for this system")
    base = base_paraboloid(system.dim)
    caps = [cap_function(system, system.cell_from_index(i))
            for i in range(system.n_cells) if (word >> i) & 1]
    if not caps:
        return base
    return MaxWith(unit_rect(system.dim), (base, *caps))


def cell_gap(eta, d: int) -> float:
    """Closed form of the per-cell integral of cap - f0: eta^(d/2+1)/6."""
    return float(Fraction(eta)) ** (0.5 * d + 1.0) / 6.0


def cell_gap_quadrature(system: IntervalSystem, cell: tuple[int, ...],
                        n_per_axis: int = 4) -> float:
    """Gauss-Legendre integral of cap - f0 over the cell.

    The integrand is quadratic, so any n_per_axis >= 2 is exact up to
    roundoff; the parameter exists to demonstrate stability under
    refinement.
    """
    if n_per_axis < 2:
        raise ParameterError("need n_per_axis >= 2")
    lo, hi = system.cell_bounds(cell)
    xi, wi = leggauss(n_per_axis)
    axes, wts = [], []
    for u, v in zip(lo, hi):
        mid, half = (u + v) / 2.0, (v - u) / 2.0
        axes.append(mid + half * xi)
        wts.append(half * wi)
    pts = tensor_points(axes)
    w = wts[0]
    for extra in wts[1:]:
        w = np.multiply.outer(w, extra).ravel()
    diff = cap_function(system, cell).values(pts) - \
        base_paraboloid(system.dim).values(pts)
    return float(w @ diff)


# -- binary codes ---------------------------------------------------------


def code_target(n: int) -> int:
    """ceil(exp(n / 8)) words."""
    if n < 1:
        raise ParameterError("need n >= 1")
    return math.ceil(math.exp(n / 8.0))


def code_min_distance(n: int) -> int:
    """ceil(n / 4) bits."""
    if n < 1:
        raise ParameterError("need n >= 1")
    return -(-n // 4)


def hamming(a: int, b: int) -> int:
    return (a ^ b).bit_count()


@dataclass(frozen=True)
class CodeSearchResult:
    """Outcome of the randomized greedy code search.

    A shortfall is reported as data rather than raised: the counting
    argument guarantees the target is reachable, but a finite sample
    budget can stop early and callers decide how to react.
    """

    words: tuple[int, ...]
    length: int
    min_distance: int
    target_size: int
    samples_used: int

    @property
    def shortfall(self) -> int:
        return max(0, self.target_size - len(self.words))

    def verify(self) -> bool:
        """Exhaustive pairwise recheck of the distance promise."""
        ws = self.words
        if any(not 0 <= w < (1 << self.length) for w in ws):
            return False
        return all(hamming(ws[i], ws[j]) >= self.min_distance
                   for i in range(len(ws)) for j in range(i + 1, len(ws)))

    def to_json(self) -> dict:
        return {"words": list(self.words), "length": self.length,
                "min_distance": self.min_distance,
                "target_size": self.target_size,
                "samples_used": self.samples_used,
                "shortfall": self.shortfall}


def greedy_binary_code(length: int, min_distance: int, target: int,
                       seed: int = 0, max_samples: int = 10**6) -> CodeSearchResult:
    """Sample random words, keeping those far from all kept words.

    Deterministic for a fixed seed. Stops at the target size or when the
    sample budget runs out, whichever comes first.
    """
    if not 1 <= length <= CELL_CAP:
        raise ParameterError(f"length must be in 1..{CELL_CAP}")
    if min_distance < 1 or target < 1 or max_samples < 1:
        raise ParameterError("min_distance, target, max_samples must be >= 1")
    rng = np.random.default_rng(seed)
    mask = (1 << length) - 1
    words: list[int] = []
    samples = 0
    while len(words) < target and samples < max_samples:
        block = min(4096, max_samples - samples)
        draws = rng.integers(0, 1 << 32, size=(block, 2), dtype=np.uint64)
        for a, b in draws:
            samples += 1
            w = ((int(a) << 32) | int(b)) & mask
            if all(hamming(w, v) >= min_distance for v in words):
                words.append(w)
                if len(words) == target:
                    break
    return CodeSearchResult(tuple(words), length, min_distance, target, samples)


# -- families and their certificate ---------------------------------------


def separation_scale(d: int) -> float:
    """The factor c with separation c * eta: (2 + sqrt(d-1))^(-d) / 24."""
    return (2.0 + math.sqrt(d - 1.0)) ** -d / 24.0


@dataclass(frozen=True)
class PackingFamily:
    system: IntervalSystem
    code: CodeSearchResult
    functions: tuple[ConvexFunction, ...]

    @property
    def eps(self) -> float:
        return separation_scale(self.system.dim) * self.system.eta

    @property
    def zeta(self) -> float:
        return cell_gap(self.system.eta, self.system.dim)

    @property
    def log_size_target(self) -> float:
        # log of ceil(exp(n/8)) is at least this
        return self.system.n_cells / 8.0

    def to_json(self) -> dict:
        return {"system": self.system.to_json(), "code": self.code.to_json(),
                "eps": _fstr(self.eps), "zeta": _fstr(self.zeta),
                "functions": [f.to_json() for f in self.functions]}


def build_packing_family(eta, d: int, seed: int = 0,
                         max_samples: int = 10**6) -> PackingFamily:
    """Interval system, greedy code, and one function per codeword.

    Refuses systems with more than CELL_CAP cells; smaller eta makes the
    cell count grow like eta^(-d/2).
    """
    system = build_interval_system(eta, d)
    n = system.n_cells
    if n > CELL_CAP:
        raise ParameterError(
            f"{n} cells exceeds the {CELL_CAP}-cell cap at eta={float(Fraction(eta))}")
    code = greedy_binary_code(n, code_min_distance(n), code_target(n),
                              seed=seed, max_samples=max_samples)
    funcs = tuple(perturbed_function(system, w) for w in code.words)
    return PackingFamily(system, code, funcs)


@dataclass(frozen=True)
class PackingCertificate:
    """Quadrature evidence that the family is pairwise separated.

    Every pair (i, j) must satisfy L1(g_i, g_j) >= hamming(w_i, w_j) * zeta
    within tol; min_margin is the worst observed slack. eps_consistent
    records the closed-form chain min_distance * zeta >= eps.
    """

    eta: float
    dim: int
    k: int
    n_cells: int
    code_size: int
    shortfall: int
    min_hamming: int
    zeta: float
    eps: float
    separation_floor: float
    grid_n: int
    tol: float
    pairs_checked: int
    failures: int
    min_margin: float
    min_l1: float
    eps_consistent: bool
    ok: bool

    def to_json(self) -> dict:
        return {"eta": _fstr(self.eta), "dim": self.dim, "k": self.k,
                "n_cells": self.n_cells, "code_size": self.code_size,
                "shortfall": self.shortfall, "min_hamming": self.min_hamming,
                "zeta": _fstr(self.zeta), "eps": _fstr(self.eps),
                "separation_floor": _fstr(self.separation_floor),
                "grid_n": self.grid_n, "tol": _fstr(self.tol),
                "pairs_checked": self.pairs_checked, "failures": self.failures,
                "min_margin": _fstr(self.min_margin),
                "min_l1": _fstr(self.min_l1),
                "eps_consistent": self.eps_consistent, "ok": self.ok}


def packing_certificate(family: PackingFamily, grid_n: int | None = None,
                        tol: float = 1e-6) -> PackingCertificate:
    """Check every pairwise L1 distance against its Hamming floor.

    Uses midpoint quadrature on the unit cube. Values are computed once
    per function and pairs are scanned in blocks to bound memory.
    """
    system = family.system
    d = system.dim
    if grid_n is None:
        grid_n = _DEFAULT_CERT_GRID.get(d, 40)
    pts, w = quadrature_grid(unit_rect(d), GridSpec(grid_n, "midpoint"))
    vals = np.stack([f.values(pts) for f in family.functions]) \
        if family.functions else np.zeros((0, len(pts)))

    zeta = family.zeta
    eps = family.eps
    words = family.code.words
    m = len(words)
    failures = 0
    pairs = 0
    min_margin = math.inf
    min_l1 = math.inf
    min_ham: int | None = None
    block = 16
    for i in range(m - 1):
        hams = np.array([hamming(words[i], words[j]) for j in range(i + 1, m)])
        for s in range(i + 1, m, block):
            rows = vals[s:s + block]
            l1 = np.abs(rows - vals[i]) @ w
            req = hams[s - i - 1:s - i - 1 + len(rows)] * zeta
            margin = l1 - req
            pairs += len(rows)
            failures += int((margin < -tol).sum())
            min_margin = min(min_margin, float(margin.min()))
            min_l1 = min(min_l1, float(l1.min()))
        h = int(hams.min())
        min_ham = h if min_ham is None else min(min_ham, h)
    floor = family.code.min_distance * zeta
    eps_consistent = floor >= eps
    ok = failures == 0 and family.code.shortfall == 0 and eps_consistent
    return PackingCertificate(
        eta=system.eta, dim=d, k=system.k, n_cells=system.n_cells,
        code_size=m, shortfall=family.code.shortfall,
        min_hamming=min_ham if min_ham is not None else 0,
        zeta=zeta, eps=eps, separation_floor=floor, grid_n=grid_n, tol=tol,
        pairs_checked=pairs, failures=failures,
        min_margin=min_margin if pairs else math.inf,
        min_l1=min_l1 if pairs else math.inf,
        eps_consistent=eps_consistent, ok=ok)


# -- scaling of the family size -------------------------------------------


@dataclass(frozen=True)
class SeparationPoint:
    """Family-size accounting at one eta: separation eps, log size n/8."""

    eta: float
    dim: int
    k: int
    n_cells: int
    eps: float
    log_packing: float

    def to_json(self) -> dict:
        return {"eta": _fstr(self.eta), "dim": self.dim, "k": self.k,
                "n_cells": self.n_cells, "eps": _fstr(self.eps),
                "log_packing": _fstr(self.log_packing)}


def separation_point(eta, d: int) -> SeparationPoint:
    k = interval_count(eta, d)
    n = k**d
    ef = float(Fraction(eta))
    return SeparationPoint(ef, d, k, n, separation_scale(d) * ef, n / 8.0)


def separation_curve(eta, d: int, steps: int = 5,
                     ratio: int = 4) -> tuple[SeparationPoint, ...]:
    """Points at eta, eta/ratio, ..., eta/ratio^(steps-1), exact in eta."""
    if steps < 1 or ratio < 2:
        raise ParameterError("need steps >= 1 and ratio >= 2")
    e = Fraction(eta)
    return tuple(separation_point(e / ratio**m, d) for m in range(steps))


# -- exact rational verification of the cap properties --------------------


@dataclass(frozen=True)
class CapPropertyReport:
    """Counts of exact-rational checks of the four cap properties.

    affine: midpoint identity of the cap, checked in Q.
    corner: coefficients nonnegative and cap value at the all-ones corner
        at most 1, every cell.
    above_inside: cap >= f0 at sampled interior points of its own cell.
    below_outside: cap <= f0 at sampled points of other cells.
    """

    affine_checks: int
    corner_checks: int
    above_checks: int
    below_checks: int
    failures: tuple[str, ...]

    @property
    def total_checks(self) -> int:
        return (self.affine_checks + self.corner_checks
                + self.above_checks + self.below_checks)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"affine_checks": self.affine_checks,
                "corner_checks": self.corner_checks,
                "above_checks": self.above_checks,
                "below_checks": self.below_checks,
                "failures": list(self.failures), "ok": self.ok}


def _cap_exact(cap: Affine, x: tuple[Fraction, ...]) -> Fraction:
    total = Fraction(cap.intercept)
    for c, v in zip(cap.coeffs, x):
        total += Fraction(c) * v
    return total


def _base_exact(x: tuple[Fraction, ...], d: int) -> Fraction:
    return sum(v * v for v in x) / d


def _sample_in_cell(system: IntervalSystem, cell: tuple[int, ...],
                    rng) -> tuple[Fraction, ...]:
    # strictly interior rational point of the cell
    lo, hi = system.cell_bounds(cell)
    denom = 10**6
    out = []
    for u, v in zip(lo, hi):
        t = Fraction(int(rng.integers(1, denom)), denom)
        out.append(Fraction(u) + t * (Fraction(v) - Fraction(u)))
    return tuple(out)


def verify_cap_properties(system: IntervalSystem, samples: int = 10_000,
                          seed: int = 0) -> CapPropertyReport:
    """Exact-rational spot checks of the four cap properties.

    Floats are taken at their exact binary values, so every comparison is
    decided without rounding. Sampled points are strictly interior to
    their cells; the samples budget is split across the point-sampled
    properties, and the corner check covers every cell once.
    """
    if samples < 4:
        raise ParameterError("need samples >= 4")
    rng = np.random.default_rng(seed)
    d = system.dim
    n = system.n_cells
    failures: list[str] = []
    caps = {}

    def cap_at(idx: int) -> Affine:
        if idx not in caps:
            caps[idx] = cap_function(system, system.cell_from_index(idx))
        return caps[idx]

    # corner: every cell once
    one = (Fraction(1),) * d
    for idx in range(n):
        cap = cap_at(idx)
        if any(c < 0 for c in cap.coeffs):
            failures.append(f"cell {idx}: negative coefficient")
        if _cap_exact(cap, one) > 1:
            failures.append(f"cell {idx}: corner value above 1")
    corner_checks = n

    n_affine = samples // 4
    n_above = samples // 4
    n_below = samples - n_affine - n_above

    affine_checks = 0
    for _ in range(n_affine):
        idx = int(rng.integers(0, n))
        cap = cap_at(idx)
        x = _sample_in_cell(system, system.cell_from_index(idx), rng)
        y = tuple(Fraction(int(rng.integers(0, 10**6)), 10**6) for _ in range(d))
        mid = tuple((a + b) / 2 for a, b in zip(x, y))
        if _cap_exact(cap, x) + _cap_exact(cap, y) != 2 * _cap_exact(cap, mid):
            failures.append(f"cell {idx}: midpoint identity broken")
        affine_checks += 1

    above_checks = 0
    for _ in range(n_above):
        idx = int(rng.integers(0, n))
        cell = system.cell_from_index(idx)
        x = _sample_in_cell(system, cell, rng)
        if _cap_exact(cap_at(idx), x) < _base_exact(x, d):
            failures.append(f"cell {idx}: cap below base inside own cell")
        above_checks += 1

    below_checks = 0
    if n >= 2:
        for _ in range(n_below):
            idx = int(rng.integers(0, n))
            other = int(rng.integers(0, n - 1))
            if other >= idx:
                other += 1
            x = _sample_in_cell(system, system.cell_from_index(other), rng)
            if _cap_exact(cap_at(idx), x) > _base_exact(x, d):
                failures.append(f"cell {idx}: cap above base in cell {other}")
            below_checks += 1

    return CapPropertyReport(affine_checks, corner_checks, above_checks,
                             below_checks, tuple(failures))
