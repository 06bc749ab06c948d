import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.domain import build_domain, region_set
from core.geometry import (
    ConvexHullSet,
    affine_hull,
    affine_hull_product,
    make_cloud,
    product_subspace,
    relative_boundary_of_line_slice,
    relative_closure_member,
    relative_interior_member,
    same_subspace,
    segment_point,
)
from shared.errors import InputError
from shared.models import DEFAULT_TOLERANCES, AffineSubspace, Status


# ----------------------------
# Affine hulls
# ----------------------------

@pytest.mark.parametrize(
    "points, dim",
    [
        ([[1.0, 2.0]], 0),
        ([[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]], 0),
        ([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]], 1),
        ([[0, 0, 0], [1, 0, 0], [0, 1, 0], [3, 5, 0]], 2),
        ([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], 3),
    ],
)
def test_affine_hull_dimension(points, dim, tol):
    hull = affine_hull(make_cloud(points), tol)
    assert hull.dim == dim
    assert np.allclose(hull.base, points[0])


def test_affine_hull_basis_is_orthonormal_and_spans_the_cloud(tol):
    points = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [3, 5, 0]], dtype=float)
    hull = affine_hull(make_cloud(points), tol)
    assert np.allclose(hull.basis @ hull.basis.T, np.eye(2), atol=1e-10)
    assert np.allclose(hull.basis[:, 2], 0.0)
    assert np.all(hull.residuals(points) <= tol.aff)


def test_affine_hull_is_deterministic(tol):
    cloud = make_cloud(np.random.default_rng(3).normal(size=(20, 4)))
    a, b = affine_hull(cloud, tol), affine_hull(cloud, tol)
    assert np.array_equal(a.basis, b.basis)


def test_make_cloud_rejects_mixed_dimensions():
    with pytest.raises(InputError):
        make_cloud([[0.0, 1.0], [1.0]])
    with pytest.raises(InputError):
        make_cloud([])


integer_clouds = st.integers(1, 3).flatmap(
    lambda n: st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=1, max_size=5)
)


@given(a=integer_clouds, b=integer_clouds)
@settings(max_examples=60, deadline=None)
def test_hull_of_product_is_product_of_hulls(a, b):
    cloud_a, cloud_b = make_cloud(a), make_cloud(b)
    hull_a, hull_b = affine_hull(cloud_a), affine_hull(cloud_b)
    joint = affine_hull_product(cloud_a, cloud_b)
    assert joint.dim == hull_a.dim + hull_b.dim
    assert same_subspace(joint, product_subspace(hull_a, hull_b))


# ----------------------------
# Segments and relative topology
# ----------------------------

def test_segment_point_endpoints_and_range():
    a, b = [0.0, 0.0], [2.0, 4.0]
    assert np.array_equal(segment_point(a, b, 0.0), a)
    assert np.array_equal(segment_point(a, b, 1.0), b)
    assert np.allclose(segment_point(a, b, 0.25), [0.5, 1.0])
    with pytest.raises(InputError):
        segment_point(a, b, 1.5)
    with pytest.raises(InputError):
        segment_point(a, [1.0, 2.0, 3.0], 0.5)


def test_segment_body_relative_interior(tol):
    # a segment in R^3 has a nonempty relative interior but an empty interior
    body = ConvexHullSet(make_cloud([[0, 0, 0], [1, 1, 1]]), tol)
    assert body.hull.dim == 1
    assert relative_interior_member([0.5, 0.5, 0.5], body, tol) is Status.CERTIFIED
    assert relative_interior_member([1.0, 1.0, 1.0], body, tol) is Status.REFUTED
    assert relative_interior_member([0.5, 0.5, 0.6], body, tol) is Status.REFUTED


def test_square_body_interior_and_vertices(tol):
    body = ConvexHullSet(make_cloud([[0, 0], [1, 0], [1, 1], [0, 1]]), tol)
    assert relative_interior_member([0.5, 0.5], body, tol) is Status.CERTIFIED
    assert relative_interior_member([1.0, 1.0], body, tol) is Status.REFUTED
    assert relative_interior_member([0.5, 0.0], body, tol) is Status.REFUTED


def test_single_point_is_its_own_relative_interior(tol):
    body = ConvexHullSet(make_cloud([[2.0, -1.0]]), tol)
    assert relative_interior_member([2.0, -1.0], body, tol) is Status.CERTIFIED
    assert relative_interior_member([2.0, -0.5], body, tol) is Status.REFUTED


def test_relative_closure_by_approach_paths(tol):
    body = ConvexHullSet(make_cloud([[0, 0], [1, 0], [1, 1], [0, 1]]), tol)
    assert relative_closure_member([1.0, 0.5], body, tol=tol) is Status.CERTIFIED
    # outside points are never refuted by sampling
    assert relative_closure_member([3.0, 3.0], body, tol=tol) is Status.INCONCLUSIVE


def test_unknown_set_handle_is_an_input_error(tol):
    with pytest.raises(InputError):
        relative_interior_member([0.0], object(), tol)


# ----------------------------
# Line slices
# ----------------------------

def test_disc_line_slice_endpoints():
    disc = build_domain(2, ["x^2 + y^2 - 1"], "-2:2,-2:2")
    line = AffineSubspace(np.array([0.0, 0.5]), np.array([[1.0, 0.0]]))
    sliced = relative_boundary_of_line_slice(disc, line)
    half_chord = np.sqrt(0.75)
    assert not sliced.missed
    assert sliced.lower == pytest.approx(-half_chord, abs=1e-6)
    assert sliced.upper == pytest.approx(half_chord, abs=1e-6)


def test_half_plane_slice_is_unbounded_on_one_side():
    half = build_domain(2, ["-x"], "-5:5,-5:5")
    line = AffineSubspace(np.array([1.0, 0.0]), np.array([[1.0, 0.0]]))
    sliced = relative_boundary_of_line_slice(half, line)
    assert sliced.lower == pytest.approx(-1.0, abs=1e-6)
    assert sliced.upper_unbounded


def test_line_missing_the_region():
    disc = build_domain(2, ["x^2 + y^2 - 1"], "-2:2,-2:2")
    line = AffineSubspace(np.array([0.0, 1.5]), np.array([[1.0, 0.0]]))
    assert relative_boundary_of_line_slice(disc, line).missed


def test_line_slice_needs_a_line():
    disc = build_domain(2, ["x^2 + y^2 - 1"], "-2:2,-2:2")
    with pytest.raises(InputError):
        relative_boundary_of_line_slice(disc, AffineSubspace(np.zeros(2), np.eye(2)))


SLICE_REGIONS = [
    # region, centre, spread of the base points, angle range of the lines
    (build_domain(2, ["x^2 + y^2 - 1"], "-2:2,-2:2"), (0.0, 0.0), 0.35, (0.0, np.pi)),
    (build_domain(2, ["x^2 - 1; y^2 - 1"], "-2:2,-2:2"), (0.0, 0.0), 0.5, (0.0, np.pi)),
    (build_domain(2, ["-x"], "-2:2,-2:2"), (0.5, 0.0), 0.1, (-1.0, 1.0)),
    (build_domain(2, ["x^2/4 + y^2 - 1; -y"], "-3:3,-2:2"), (0.0, 0.5), 0.25, (0.0, np.pi)),
]


def slice_cases():
    rng = np.random.default_rng(77)
    for domain, centre, spread, (lo, hi) in SLICE_REGIONS:
        for _ in range(5):
            angle = rng.uniform(lo, hi)
            base = np.asarray(centre) + rng.uniform(-spread, spread, size=2)
            yield domain, AffineSubspace(base, np.array([[np.cos(angle), np.sin(angle)]]))


@pytest.mark.parametrize("domain, line", list(slice_cases()))
def test_slice_ends_are_boundary_points_of_the_region(domain, line, tol):
    region = region_set(domain, tol)
    sliced = relative_boundary_of_line_slice(domain, line)
    assert not sliced.missed
    ends = [(t, -1.0) for t in [sliced.upper] if t is not None]
    ends += [(t, 1.0) for t in [sliced.lower] if t is not None]
    assert ends
    for t, inward in ends:
        point = line.base + t * line.basis[0]
        assert relative_interior_member(point, region, tol) is Status.REFUTED
        approach = inward * line.basis[0][None, :]
        assert relative_closure_member(point, region, approach, tol) is Status.CERTIFIED


# ----------------------------
# Hull laws on random clouds
# ----------------------------

planar_clouds = st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=8)
GRID = np.array([[x, y] for x in np.arange(-5.0, 5.5, 0.5) for y in np.arange(-5.0, 5.5, 0.5)])


@given(cloud=planar_clouds, seed=st.integers(0, 2**16))
@settings(max_examples=60, deadline=None)
def test_hull_of_a_hull_is_the_hull(cloud, seed):
    points = np.array(cloud, dtype=float)
    rng = np.random.default_rng(seed)
    combos = rng.dirichlet(np.ones(points.shape[0]), size=6) @ points
    once = ConvexHullSet(make_cloud(points), DEFAULT_TOLERANCES)
    twice = ConvexHullSet(make_cloud(np.vstack([points, combos])), DEFAULT_TOLERANCES)
    assert np.array_equal(once.contains_many(GRID), twice.contains_many(GRID))


@given(cloud=planar_clouds, extra=planar_clouds)
@settings(max_examples=60, deadline=None)
def test_hull_is_monotone(cloud, extra):
    small = ConvexHullSet(make_cloud(cloud), DEFAULT_TOLERANCES)
    large = ConvexHullSet(make_cloud(cloud + extra), DEFAULT_TOLERANCES)
    inside = small.contains_many(GRID)
    assert large.contains_many(GRID)[inside].all()


@given(cloud=planar_clouds, i=st.integers(0, 7), j=st.integers(0, 7), t=st.floats(0.0, 1.0))
@settings(max_examples=80, deadline=None)
def test_segment_points_stay_in_the_hull(cloud, i, j, t):
    body = ConvexHullSet(make_cloud(cloud), DEFAULT_TOLERANCES)
    a, b = cloud[i % len(cloud)], cloud[j % len(cloud)]
    assert body.contains_many(segment_point(a, b, t)[None, :])[0]
