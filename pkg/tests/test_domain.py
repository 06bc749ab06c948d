import numpy as np
import pytest

from core.domain import (
    build_domain,
    classify_point,
    domain_hull,
    domain_member,
    member_mask,
    parse_box,
    region_mask,
    sample_domain,
)
from shared.errors import InputError, RegionTooThinError
from shared.models import Membership

DISC = "x^2 + y^2 - 1"


# ----------------------------
# Construction
# ----------------------------

def test_parse_box_broadcasts_a_single_interval():
    assert parse_box("-1:2", 3) == ((-1.0, 2.0),) * 3
    assert parse_box("0:1, −2:−1", 2) == ((0.0, 1.0), (-2.0, -1.0))


@pytest.mark.parametrize("text", ["", "1:0", "0:1:2", "a:1", "0:inf", "0:1,0:1,0:1"])
def test_parse_box_rejects_malformed_intervals(text):
    with pytest.raises(InputError):
        parse_box(text, 2)


def test_build_domain_needs_a_box():
    with pytest.raises(InputError):
        build_domain(2, [DISC], "")


def test_constraints_split_on_semicolons():
    domain = build_domain(2, ["x - 1; y - 1", "-x"], "-2:2")
    assert domain.constraint_sources == ("x - 1", "y - 1", "-x")


# ----------------------------
# Membership
# ----------------------------

@pytest.mark.parametrize(
    "point, expected",
    [
        ([0.0, 0.0], Membership.MEMBER),
        ([1.0, 0.0], Membership.NEAR_BOUNDARY),
        ([1.5, 0.0], Membership.OUTSIDE),
        ([3.0, 0.0], Membership.OUTSIDE),
    ],
)
def test_classify_point_on_disc(point, expected, tol):
    domain = build_domain(2, [DISC], "-2:2")
    assert classify_point(domain, point, tol) is expected


def test_failed_constraint_evaluation_is_not_membership(tol):
    domain = build_domain(1, ["log(x)"], "-2:2")
    assert classify_point(domain, [-1.0], tol) is Membership.UNDEFINED
    assert not domain_member(domain, [-1.0], tol)
    assert domain_member(domain, [0.5], tol)


def test_region_ignores_box_but_member_does_not(tol):
    domain = build_domain(1, ["-x"], "0:1")
    points = np.array([[0.5], [5.0], [-1.0]])
    assert region_mask(domain, points, tol).tolist() == [True, True, False]
    assert member_mask(domain, points, tol).tolist() == [True, False, False]


def test_classify_point_checks_dimension(tol):
    with pytest.raises(InputError):
        classify_point(build_domain(2, [DISC], "-2:2"), [0.0], tol)


# ----------------------------
# Affine equalities
# ----------------------------

def test_affine_equalities_define_the_hull(tol):
    domain = build_domain(3, [], "-1:1", ["x + y + z"])
    hull = domain_hull(domain)
    assert hull.dim == 2
    assert hull.contains(np.zeros(3))
    assert domain_member(domain, [0.2, -0.1, -0.1], tol)
    assert not domain_member(domain, [0.2, 0.1, 0.1], tol)


@pytest.mark.parametrize("equalities", [["x^2 - y"], ["x - 1; x - 2"], ["0*x"]])
def test_bad_equalities_are_rejected(equalities):
    with pytest.raises(InputError):
        build_domain(2, [], "-3:3", equalities)


# ----------------------------
# Sampling
# ----------------------------

def test_samples_are_members_and_reproducible(tol):
    domain = build_domain(2, [DISC], "-1:1")
    a = sample_domain(domain, 300, seed=5, tol=tol)
    b = sample_domain(domain, 300, seed=5, tol=tol)
    c = sample_domain(domain, 300, seed=6, tol=tol)
    assert len(a) == 300
    assert member_mask(domain, a.points, tol).all()
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)


def test_samples_on_an_affine_domain_stay_on_it(tol):
    domain = build_domain(3, ["x^2 + y^2 + z^2 - 1"], "-1:1", ["x - y"])
    cloud = sample_domain(domain, 100, seed=2, tol=tol)
    assert np.all(np.abs(cloud.points[:, 0] - cloud.points[:, 1]) <= tol.aff)


def test_thin_region_raises(tol):
    domain = build_domain(2, ["x^2 + y^2 - 1e-12"], "-1:1")
    with pytest.raises(RegionTooThinError):
        sample_domain(domain, 10, seed=0, tol=tol)


def test_sample_count_must_be_positive(tol):
    with pytest.raises(InputError):
        sample_domain(build_domain(1, [], "0:1"), 0, seed=0, tol=tol)
