"""Inequality checks, ramp closed forms, and the assembled bounds."""

import math

import pytest

from convexcover import (
    Affine,
    GridSpec,
    Hinge,
    LipschitzVector,
    ParameterError,
    Rect,
    check_l1_bound,
    check_pointwise_gap,
    check_sup_bound,
    entropy_bounds,
    gradient_mass,
    hinge_family,
    hinge_hausdorff_closed_form,
    hinge_lp_closed_form,
    lp_distance,
    make_random_convex,
    scaling_identity_report,
    slice_gradient_mass,
    unit_rect,
)
from convexcover.verify import _hausdorff_bias

LOG2 = math.log(2.0)


# -- distance-vs-Hausdorff checks ---------------------------------------------


def _random_pair(d, seed, bound=0.9, pieces=6):
    f = make_random_convex(d, bound, pieces, seed)
    g = make_random_convex(d, bound, pieces, seed + 1)
    return f, g


def test_sup_bound_on_a_random_pair():
    f, g = _random_pair(1, seed=100)
    rep = check_sup_bound(f, g, 1.0, n_directions=1024, grid=GridSpec(501))
    assert rep.ok
    assert rep.name == "sup_vs_hausdorff"
    assert rep.slack >= 0.0
    assert rep.refinements == 0


def test_sup_bound_with_explicit_budgets():
    r = unit_rect(1)
    f = Affine(r, (0.5,), -0.25)
    g = Affine(r, (0.0,), 0.0)
    rep = check_sup_bound(f, g, 1.0, gammas=LipschitzVector((0.5,)),
                          n_directions=64, grid=GridSpec(65))
    assert rep.ok


def test_sup_bound_with_infinite_budget_is_vacuous():
    f, g = _random_pair(1, seed=102)
    rep = check_sup_bound(f, g, 1.0, gammas=LipschitzVector((math.inf,)),
                          n_directions=16, grid=GridSpec(17))
    assert rep.ok
    assert math.isinf(rep.rhs)


def test_sup_bound_requires_a_dominating_bound():
    f, g = _random_pair(1, seed=104)
    with pytest.raises(ParameterError):
        check_sup_bound(f, g, -2.0)
    other = make_random_convex(2, 0.9, 4, seed=0)
    with pytest.raises(ParameterError):
        check_sup_bound(f, other, 1.0)


def test_sup_bound_tolerance_carries_the_sampling_bias():
    # the Hausdorff side samples directions, so its one-sided bias must
    # appear in the tolerance and shrink as the direction count grows
    f, g = _random_pair(1, seed=106)
    coarse = check_sup_bound(f, g, 1.0, n_directions=64, grid=GridSpec(501))
    fine = check_sup_bound(f, g, 1.0, n_directions=1024, grid=GridSpec(501))
    bias = _hausdorff_bias(f, g, 1.0, 64)
    assert coarse.tolerance >= bias
    assert fine.tolerance < coarse.tolerance


def test_l1_bound_on_random_pairs():
    for d in (1, 2):
        f, g = _random_pair(d, seed=200 + d)
        rep = check_l1_bound(f, g, n_directions=256, grid=GridSpec(101))
        assert rep.ok
        assert rep.name == "l1_vs_hausdorff"


def test_l1_bound_requires_normalized_inputs():
    r = unit_rect(1)
    f = Affine(r, (0.0,), 1.5)
    g = Affine(r, (0.0,), 0.0)
    with pytest.raises(ParameterError):
        check_l1_bound(f, g)


def test_pointwise_gap_at_interior_points():
    f, g = _random_pair(1, seed=300)
    pts = [[0.2], [0.5], [0.8]]
    rep = check_pointwise_gap(f, g, 1.0, pts, n_directions=256,
                              grid=GridSpec(101))
    assert rep.ok
    assert rep.name == "pointwise_gap"


# -- slope-mass facts ----------------------------------------------------------


def test_gradient_mass_of_a_ramp():
    f = Hinge(unit_rect(1), 0.5)
    mass = gradient_mass(f, 0.05, GridSpec(2001))
    # slope -2 on [0.05, 0.5] and 0 beyond: mass 0.9 up to the kink cell
    assert abs(mass - 0.9) < 2e-3
    assert mass <= 8.0
    # a ramp that climbs entirely inside the trimmed-away margin
    steep = Hinge(unit_rect(1), 2.0**-6)
    assert gradient_mass(steep, 0.05, GridSpec(2001)) == 0.0
    with pytest.raises(ParameterError):
        gradient_mass(f, 0.5)
    with pytest.raises(ParameterError):
        gradient_mass(f, 0.0)


def test_gradient_mass_of_random_functions():
    for d in (1, 2):
        f = make_random_convex(d, 0.9, 6, seed=40 + d)
        assert gradient_mass(f, 0.05) <= 8.0 * d


def test_slice_gradient_mass_measures_the_climb():
    f = Hinge(unit_rect(1), 0.5)
    mass = slice_gradient_mass(f, 0, [0.0], 0.05)
    # slope -2 on [0.05, 0.5]: integral 0.9, up to the straddling cell
    assert abs(mass - 0.9) < 2e-3
    assert mass <= 4.0


def test_slice_gradient_mass_validation():
    f = Hinge(unit_rect(2), 0.5)
    with pytest.raises(ParameterError):
        slice_gradient_mass(f, 2, [0.5, 0.5], 0.05)
    with pytest.raises(ParameterError):
        slice_gradient_mass(f, 0, [0.5], 0.05)
    with pytest.raises(ParameterError):
        slice_gradient_mass(f, 0, [0.5, 0.5], 0.7)


# -- ramp closed forms ----------------------------------------------------------


def test_hinge_lp_closed_form_matches_quadrature():
    r = unit_rect(1)
    zero = Affine(r, (0.0,), 0.0)
    for alpha in (1.0, 0.25):
        for p in (1.0, 2.0):
            f = Hinge(r, alpha)
            want = hinge_lp_closed_form(alpha, p)
            got = lp_distance(f, zero, p, GridSpec(4001)).value
            assert abs(got - want) < 1e-5


def test_hinge_closed_form_validation():
    with pytest.raises(ParameterError):
        hinge_lp_closed_form(0.0, 1.0)
    with pytest.raises(ParameterError):
        hinge_lp_closed_form(1.5, 1.0)
    with pytest.raises(ParameterError):
        hinge_lp_closed_form(0.5, 0.5)
    with pytest.raises(ParameterError):
        hinge_hausdorff_closed_form(2.0)


def test_hinge_hausdorff_closed_form_values():
    assert hinge_hausdorff_closed_form(1.0) == pytest.approx(math.sqrt(0.5))
    a = 0.25
    assert hinge_hausdorff_closed_form(a) == pytest.approx(
        a / math.sqrt(1 + a * a), rel=1e-15)


def test_hinge_family_sup_separation_is_exact():
    fam = hinge_family(6)
    assert [h.alpha for h in fam] == [2.0**-j for j in range(1, 7)]
    for k in range(2, 7):
        x = (2.0**-k,)
        assert fam[k - 1].value(x) == 0.0
        for j in range(1, k):
            assert fam[j - 1].value(x) == 1.0 - 2.0 ** (j - k)
    with pytest.raises(ParameterError):
        hinge_family(0)
    with pytest.raises(ParameterError):
        hinge_family(51)


# -- normalization identity -------------------------------------------------------


def test_scaling_identity_hand_case():
    dom = Rect((0.0,), (2.0,))
    f = Affine(dom, (1.0,), 0.0)
    g = Affine(dom, (0.0,), 0.0)
    rep = scaling_identity_report(f, g, 1.0, 3.0)
    assert rep.lhs == pytest.approx(1.0 / 3.0, rel=1e-14)
    assert rep.difference <= 1e-8


def test_scaling_identity_random_pairs():
    dom = Rect((0.0, 0.0), (2.0, 2.0))
    for seed in range(3):
        f = make_random_convex(2, 2.0, 5, seed=500 + 2 * seed, rect=dom)
        g = make_random_convex(2, 2.0, 5, seed=501 + 2 * seed, rect=dom)
        rep = scaling_identity_report(f, g, 2.0, 2.0, GridSpec(51))
        assert rep.difference <= 1e-6


def test_scaling_identity_validation():
    dom = Rect((0.0,), (2.0,))
    f = Affine(dom, (1.0,), 0.0)
    g = Affine(unit_rect(1), (1.0,), 0.0)
    with pytest.raises(ParameterError):
        scaling_identity_report(f, g, 1.0, 1.0)
    nc = Rect((0.0, 0.0), (1.0, 2.0))
    h = Affine(nc, (0.0, 0.0), 0.0)
    with pytest.raises(ParameterError):
        scaling_identity_report(h, h, 1.0, 1.0)
    with pytest.raises(ParameterError):
        scaling_identity_report(f, f, 1.0, 0.0)


# -- assembled bounds ---------------------------------------------------------------


def test_entropy_bounds_in_range():
    eb = entropy_bounds(2.0**-30, 1.0, unit_rect(1), 1.0,
                        LipschitzVector((2.0,)))
    assert eb.log_upper is not None and eb.log_lower is not None
    assert eb.log_upper >= eb.log_lower > 0.0
    assert eb.log_lipschitz_upper == pytest.approx(
        math.sqrt(4.0 * 2.0**30), rel=1e-12)


def test_entropy_bounds_out_of_range_fields_are_none():
    eb = entropy_bounds(0.5, 1.0, unit_rect(1), 1.0)
    assert eb.log_upper is None
    assert eb.log_lower is None
    assert eb.log_lipschitz_upper is None


def test_entropy_bounds_normalizes_by_bound_and_side():
    # eta_lp = eps / (bound * side^(d/p)) = 2^-21 here, too big for p = 2
    eb = entropy_bounds(2.0**-20, 2.0, Rect((0.0, 0.0), (1.0, 1.0)), 2.0)
    assert eb.log_upper is None
    assert eb.log_lower == pytest.approx(65.0**2 / 8.0, rel=1e-15)


def test_entropy_bounds_infinite_budget():
    eb = entropy_bounds(2.0**-30, 1.0, unit_rect(1), 1.0,
                        LipschitzVector((math.inf,)))
    assert math.isinf(eb.log_lipschitz_upper)


def test_entropy_bounds_validation():
    with pytest.raises(ParameterError):
        entropy_bounds(0.0, 1.0, unit_rect(1), 1.0)
    with pytest.raises(ParameterError):
        entropy_bounds(0.1, 0.5, unit_rect(1), 1.0)
    with pytest.raises(ParameterError):
        entropy_bounds(0.1, 1.0, Rect((0.0, 0.0), (1.0, 2.0)), 1.0)
    with pytest.raises(ParameterError):
        entropy_bounds(0.1, 1.0, unit_rect(2), 1.0, LipschitzVector((1.0,)))
