"""Construction, evaluation, and serialization of the convex forms."""

import json
import math

import numpy as np
import pytest

from convexcover import (
    Affine,
    ConvexFunction,
    DomainError,
    Hinge,
    LipschitzVector,
    MaxAffine,
    MaxWith,
    ParameterError,
    Rect,
    Rescaled,
    SeparableQuadratic,
    coordinate_lipschitz_estimate,
    function_from_json,
    lipschitz_budget,
    make_random_convex,
    rescale_to_unit,
    tensor_points,
    unit_rect,
)


# -- boxes and grids --------------------------------------------------------


def test_rect_basics():
    r = Rect((0.0, -1.0), (2.0, 3.0))
    assert r.dim == 2
    assert r.widths == (2.0, 4.0)
    assert not r.is_cube()
    assert unit_rect(3).is_cube()


@pytest.mark.parametrize("lo,hi", [
    ((0.0,), (0.0,)),
    ((1.0,), (0.0,)),
    ((0.0, 0.0), (1.0,)),
    ((), ()),
    ((0.0,) * 9, (1.0,) * 9),
    ((math.nan,), (1.0,)),
    ((0.0,), (math.inf,)),
])
def test_rect_rejects_bad_boxes(lo, hi):
    with pytest.raises(ParameterError):
        Rect(lo, hi)


def test_rect_json_round_trip_is_exact():
    r = Rect((0.1, -1.0 / 3.0), (2.7, 11.0 / 7.0))
    back = Rect.from_json(json.loads(json.dumps(r.to_json())))
    assert back == r


def test_tensor_points_row_major():
    pts = tensor_points([np.array([0.0, 1.0]), np.array([0.0, 1.0])])
    expected = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
    assert [tuple(p) for p in pts] == expected


def test_tensor_points_size_guard():
    axes = [np.linspace(0.0, 1.0, 400)] * 3
    with pytest.raises(ParameterError):
        tensor_points(axes)


def test_lipschitz_vector():
    v = LipschitzVector((1.5, math.inf, 2.0))
    assert v.finite_sum() == 3.5
    assert v.sum_squares() == math.inf
    with pytest.raises(ParameterError):
        LipschitzVector((1.0, 0.0))
    with pytest.raises(ParameterError):
        LipschitzVector(())


# -- individual forms -------------------------------------------------------


def test_affine_evaluation_and_subgradient():
    f = Affine(unit_rect(2), (2.0, -1.0), 0.5)
    assert f.value((0.25, 0.5)) == 2.0 * 0.25 - 0.5 + 0.5
    assert f.subgradient((0.5, 0.5)) == (2.0, -1.0)
    vals = f.values([[0.0, 0.0], [1.0, 1.0]])
    assert vals.tolist() == [0.5, 1.5]


def test_affine_validation():
    with pytest.raises(ParameterError):
        Affine(unit_rect(2), (1.0,), 0.0)
    with pytest.raises(ParameterError):
        Affine(unit_rect(1), (math.inf,), 0.0)
    f = Affine(unit_rect(1), (1.0,), 0.0)
    with pytest.raises(ParameterError):
        f.values([0.5])  # not an (N, d) array
    with pytest.raises(DomainError):
        f.value((1.5,))
    with pytest.raises(DomainError):
        f.subgradient((1.0,))  # boundary is not strictly interior


def test_max_affine_matches_manual_max():
    r = unit_rect(1)
    f = MaxAffine(r, (Affine(r, (1.0,), 0.0), Affine(r, (-1.0,), 1.0)))
    xs = np.linspace(0.0, 1.0, 11).reshape(-1, 1)
    manual = np.maximum(xs[:, 0], 1.0 - xs[:, 0])
    assert np.array_equal(f.values(xs), manual)


def test_max_affine_tie_breaks_to_first_piece():
    r = unit_rect(1)
    f = MaxAffine(r, (Affine(r, (1.0,), 0.0), Affine(r, (-1.0,), 1.0)))
    assert f.value((0.5,)) == 0.5
    assert f.subgradient((0.5,)) == (1.0,)


def test_max_affine_validation():
    r = unit_rect(1)
    with pytest.raises(ParameterError):
        MaxAffine(r, ())
    other = Affine(unit_rect(2), (0.0, 0.0), 0.0)
    with pytest.raises(ParameterError):
        MaxAffine(r, (other,))


def test_separable_quadratic():
    f = SeparableQuadratic(Rect((-1.0, -1.0), (1.0, 1.0)))
    assert f.value((0.5, -0.5)) == 0.25
    assert f.subgradient((0.5, -0.5)) == (0.5, -0.5)


def test_hinge_values_and_kink():
    f = Hinge(unit_rect(1), 0.25)
    assert f.value((0.0,)) == 1.0
    assert f.value((0.125,)) == 0.5
    assert f.value((0.5,)) == 0.0
    assert f.subgradient((0.125,)) == (-4.0,)
    # the zero piece wins the tie exactly at the kink
    assert f.subgradient((0.25,)) == (0.0,)


def test_hinge_validation():
    with pytest.raises(ParameterError):
        Hinge(unit_rect(1), 0.0)
    with pytest.raises(ParameterError):
        Hinge(unit_rect(1), 0.5, axis=1)


def test_max_with_mixed_parts():
    r = unit_rect(1)
    f = MaxWith(r, (SeparableQuadratic(r), Hinge(r, 0.5)))
    assert f.value((0.0,)) == 1.0  # hinge dominates at the left edge
    assert f.value((1.0,)) == 1.0  # quadratic dominates at the right edge
    with pytest.raises(ParameterError):
        MaxWith(r, ())
    with pytest.raises(ParameterError):
        MaxWith(r, (SeparableQuadratic(unit_rect(2)),))


def test_max_with_tie_breaks_to_first_part():
    r = unit_rect(1)
    f = MaxWith(r, (Affine(r, (0.5,), 0.0), Affine(r, (-0.5,), 0.5)))
    assert f.subgradient((0.5,)) == (0.5,)


def test_rescaled_view():
    base = SeparableQuadratic(Rect((0.0, 0.0), (2.0, 2.0)))
    g = Rescaled(unit_rect(2), base, 3.0)
    # g(x) = 3 * |2x|^2 / 2 = 6 |x|^2
    assert g.value((0.5, 0.25)) == 1.875
    assert g.subgradient((0.5, 0.25)) == (6.0, 3.0)
    with pytest.raises(ParameterError):
        Rescaled(unit_rect(2), base, 0.0)
    with pytest.raises(ParameterError):
        Rescaled(unit_rect(1), base, 1.0)


def test_rescale_to_unit():
    f = Affine(Rect((0.0,), (2.0,)), (1.0,), 0.0)
    g = rescale_to_unit(f, 3.0)
    assert g.domain == unit_rect(1)
    assert g.value((1.0,)) == 2.0 / 3.0
    h = Affine(unit_rect(1), (1.0,), 0.0)
    assert rescale_to_unit(h, 1.0) is h
    with pytest.raises(ParameterError):
        rescale_to_unit(f, 0.0)


# -- serialization ----------------------------------------------------------


def _sample_forms():
    r1, r2 = unit_rect(1), Rect((0.0, -1.0), (1.0, 1.0))
    affine = Affine(r2, (0.1, -1.0 / 3.0), 0.7)
    return [
        affine,
        MaxAffine(r2, (affine, Affine(r2, (0.0, 0.2), -0.1)), 0.9),
        SeparableQuadratic(r2),
        Hinge(r1, 2.0**-7),
        MaxWith(r2, (affine, SeparableQuadratic(r2))),
        Rescaled(r1, Hinge(Rect((0.0,), (4.0,)), 0.5), 1.0 / 3.0),
    ]


@pytest.mark.parametrize("f", _sample_forms(),
                         ids=lambda f: type(f).__name__)
def test_json_round_trip_preserves_values_exactly(f):
    back = function_from_json(json.loads(json.dumps(f.to_json())))
    assert type(back) is type(f)
    assert back.domain == f.domain
    rng = np.random.default_rng(7)
    lo = np.asarray(f.domain.lo)
    hi = np.asarray(f.domain.hi)
    pts = lo + rng.random((50, f.domain.dim)) * (hi - lo)
    assert np.array_equal(back.values(pts), f.values(pts))


def test_from_json_rejects_unknown_kind():
    obj = {"domain": unit_rect(1).to_json(), "form": {"kind": "cubic"}}
    with pytest.raises(ParameterError):
        function_from_json(obj)


# -- random generation and slope budgets ------------------------------------


def test_make_random_convex_is_seeded_and_bounded():
    f = make_random_convex(2, 0.9, 6, seed=11)
    g = make_random_convex(2, 0.9, 6, seed=11)
    assert f.to_json() == g.to_json()
    assert len(f.pieces) == 6
    assert f.bound_on_grid is not None and f.bound_on_grid <= 0.9
    axes = [np.linspace(0.0, 1.0, 17)] * 2
    vals = f.values(tensor_points(axes))
    assert float(np.abs(vals).max()) <= 0.9
    assert make_random_convex(2, 0.9, 6, seed=12).to_json() != f.to_json()


def test_make_random_convex_validation():
    with pytest.raises(ParameterError):
        make_random_convex(1, 0.9, 0, seed=0)
    with pytest.raises(ParameterError):
        make_random_convex(1, 0.0, 3, seed=0)
    with pytest.raises(ParameterError):
        make_random_convex(2, 0.9, 3, seed=0, rect=unit_rect(1))


def test_lipschitz_budget_per_form():
    r = unit_rect(2)
    assert lipschitz_budget(Affine(r, (2.0, -3.0), 0.0)).gamma == (2.0, 3.0)
    ma = MaxAffine(r, (Affine(r, (1.0, 0.5), 0.0), Affine(r, (-2.0, 0.25), 0.0)))
    assert lipschitz_budget(ma).gamma == (2.0, 0.5)
    sq = SeparableQuadratic(Rect((-1.0, 0.0), (1.0, 2.0)))
    assert lipschitz_budget(sq).gamma == (1.0, 2.0)
    h = Hinge(r, 0.25, axis=1)
    assert lipschitz_budget(h).gamma == (1e-300, 4.0)
    mw = MaxWith(r, (ma, Affine(r, (0.0, 4.0), 0.0)))
    assert lipschitz_budget(mw).gamma == (2.0, 4.0)


def test_lipschitz_budget_rescaled_applies_the_chain_rule():
    base = SeparableQuadratic(Rect((0.0, 0.0), (2.0, 2.0)))
    g = Rescaled(unit_rect(2), base, 3.0)
    assert lipschitz_budget(g).gamma == (12.0, 12.0)


def test_lipschitz_budget_rejects_unknown_form():
    with pytest.raises(ParameterError):
        lipschitz_budget(ConvexFunction(unit_rect(1)))


def test_coordinate_lipschitz_estimate_stays_within_budget():
    f = make_random_convex(2, 0.9, 5, seed=3)
    est = coordinate_lipschitz_estimate(f)
    bud = lipschitz_budget(f)
    # equality up to quotient rounding when a grid edge hits the steep piece
    assert all(e <= b * (1.0 + 1e-12) for e, b in zip(est.gamma, bud.gamma))
    aff = Affine(unit_rect(1), (1.5,), 0.0)
    assert coordinate_lipschitz_estimate(aff).gamma == (1.5,)
    with pytest.raises(ParameterError):
        coordinate_lipschitz_estimate(aff, n=1)
