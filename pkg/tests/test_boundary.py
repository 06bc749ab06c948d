import numpy as np
import pytest

from core.boundary import approach_ladders, cast_boundary_rays, classify_ladder, ladder_along
from core.domain import region_mask
from core.functions import build_function_spec
from shared.models import Status

DISTANCES = np.array([1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6])


@pytest.mark.parametrize(
    "values, expected",
    [
        (1.0 / DISTANCES, Status.CERTIFIED),
        (1.0 / np.sqrt(DISTANCES[:4]), Status.CERTIFIED),
        (1.0 - DISTANCES, Status.REFUTED),
        (np.log(1.0 / DISTANCES), Status.INCONCLUSIVE),
        ([1.0, 2.0], Status.INCONCLUSIVE),
        ([1.0, np.nan, 3.0, 4.0], Status.INCONCLUSIVE),
    ],
)
def test_classify_ladder(values, expected, tol):
    assert classify_ladder(values, tol) is expected


def test_ladder_escalating_downwards_is_refuted(tol):
    assert classify_ladder(-1.0 / DISTANCES[:4], tol) is Status.REFUTED


def test_escalation_below_the_threshold_is_certified(tol):
    ladder = 0.5 / DISTANCES
    assert ladder[-1] < tol.blowup_threshold
    assert classify_ladder(ladder, tol) is Status.CERTIFIED

    # the product barrier itself approaching (1, 0) along the x axis
    x = 1.0 - DISTANCES
    values = 1.0 / (1.0 - x**2)
    assert values[-1] < tol.blowup_threshold
    assert classify_ladder(values, tol) is Status.CERTIFIED


def test_boundary_rays_land_on_the_circle(disc_spec, tol):
    rays = cast_boundary_rays(disc_spec.domain, 50, seed=3, tol=tol)
    assert len(rays) > 0
    radii = np.linalg.norm(rays.boundary, axis=1)
    assert np.allclose(radii, 1.0, atol=1e-6)
    assert not region_mask(disc_spec.domain, rays.boundary, tol).any()


def test_unconstrained_domain_has_no_boundary_rays(parabola_spec, tol):
    rays = cast_boundary_rays(parabola_spec.domain, 20, seed=1, tol=tol)
    assert len(rays) == 0


def test_barrier_blows_up_and_quadratic_does_not(example_spec, disc_spec, tol):
    certified = approach_ladders(example_spec, cast_boundary_rays(example_spec.domain, 40, 7, tol), tol)
    refuted = approach_ladders(disc_spec, cast_boundary_rays(disc_spec.domain, 40, 7, tol), tol)
    assert certified and all(o.status is Status.CERTIFIED for o in certified)
    assert refuted and all(o.status is Status.REFUTED for o in refuted)
    witness = refuted[0].witness(tol)
    assert witness.values[-1] == pytest.approx(1.0, abs=1e-3)


def test_single_ladder_towards_inverse_barrier(tol):
    spec = build_function_spec("1/x", 1, ["-x"], "-1:1")
    outcome = ladder_along(spec, np.array([0.0]), np.array([-1.0]), reach=0.5, tol=tol)
    assert outcome.status is Status.CERTIFIED
    assert outcome.values == pytest.approx(list(1.0 / DISTANCES))
