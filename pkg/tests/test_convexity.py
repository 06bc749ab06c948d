import numpy as np
import pytest

from core.convexity import (
    check_boundary_blowup,
    check_continuity,
    check_domain_convex_open,
    check_strict_convexity,
    hull_bound_probe,
    jensen_probe,
    main_theorem_verdict,
)
from core.domain import sample_domain
from core.functions import build_function_spec, grid_function_spec
from shared.models import ConditionId, Mode, Status, WitnessKind

K = 400


# ----------------------------
# Full verdicts
# ----------------------------

def test_example_is_certified(example_spec, tol):
    verdict = main_theorem_verdict(example_spec, K, seed=11, tol=tol)
    assert verdict.mode is Mode.MAIN_THEOREM
    assert verdict.overall is Status.CERTIFIED
    assert [c.condition for c in verdict.conditions] == [
        ConditionId.DOMAIN_CONVEX_OPEN,
        ConditionId.F_STRICTLY_CONVEX,
        ConditionId.F_CONTINUOUS,
        ConditionId.BOUNDARY_BLOWUP,
    ]
    assert verdict.witness is None


def test_disc_fails_only_the_blowup(disc_spec, tol):
    verdict = main_theorem_verdict(disc_spec, K, seed=11, tol=tol)
    assert verdict.overall is Status.REFUTED
    assert verdict.first_failing is ConditionId.BOUNDARY_BLOWUP
    assert verdict.condition(ConditionId.F_STRICTLY_CONVEX).status is Status.CERTIFIED
    assert verdict.witness.kind is WitnessKind.BOUNDED_AT_BOUNDARY


def test_affine_function_is_not_strictly_convex(affine_spec, tol):
    verdict = main_theorem_verdict(affine_spec, K, seed=11, tol=tol)
    assert verdict.first_failing is ConditionId.F_STRICTLY_CONVEX
    witness = verdict.witness
    assert witness.kind is WitnessKind.MIDPOINT_VIOLATION
    assert not witness.breaks_convexity


def test_annulus_is_not_convex(annulus_spec, tol):
    verdict = main_theorem_verdict(annulus_spec, K, seed=11, tol=tol)
    assert verdict.first_failing is ConditionId.DOMAIN_CONVEX_OPEN
    assert verdict.witness.kind is WitnessKind.NONCONVEX_DOMAIN


def test_later_conditions_run_after_a_failure(annulus_spec, tol):
    verdict = main_theorem_verdict(annulus_spec, K, seed=11, tol=tol)
    assert len(verdict.conditions) == 4
    assert verdict.condition(ConditionId.F_STRICTLY_CONVEX).status is Status.CERTIFIED


def test_verdict_is_reproducible(disc_spec, tol):
    a = main_theorem_verdict(disc_spec, 200, seed=4, tol=tol)
    b = main_theorem_verdict(disc_spec, 200, seed=4, tol=tol)
    assert a.witness.to_dict() == b.witness.to_dict()


# ----------------------------
# Single conditions
# ----------------------------

def test_nonconvex_quartic_breaks_convexity(tol):
    spec = build_function_spec("x^4 - x^2", 1, [], "-2:2")
    report = check_strict_convexity(spec, K, seed=3, tol=tol)
    assert report.status is Status.REFUTED
    assert report.witness.breaks_convexity


def test_flat_direction_is_caught(tol):
    spec = build_function_spec("x^2", 2, [], "-1:1")
    report = check_strict_convexity(spec, K, seed=3, tol=tol)
    assert report.status is Status.REFUTED


def test_step_function_is_discontinuous(tol):
    spec = grid_function_spec([0.0], [0.0, 1.0], "-1:1")
    report = check_continuity(spec, K, seed=3, tol=tol)
    assert report.status is Status.REFUTED
    assert report.witness.kind is WitnessKind.DISCONTINUITY


def test_smooth_function_is_continuous(tol):
    smooth = check_continuity(build_function_spec("exp(x)", 1, [], "-1:1"), K, seed=3, tol=tol)
    assert smooth.status is Status.CERTIFIED
    assert any("sampled region" in note for note in smooth.notes)


def test_open_square_is_convex_and_open(example_spec, tol):
    report = check_domain_convex_open(example_spec.domain, K, seed=3, tol=tol)
    assert report.status is Status.CERTIFIED
    assert report.certificates[0]["hull_dim"] == 2


def test_unconstrained_blowup_is_vacuous(parabola_spec, tol):
    report = check_boundary_blowup(parabola_spec, 100, seed=3, tol=tol)
    assert report.status is Status.CERTIFIED
    assert any("vacuous" in note for note in report.notes)


def test_log_barrier_is_inconclusive(tol):
    spec = build_function_spec("-log(x)", 1, ["-x"], "-1:1")
    report = check_boundary_blowup(spec, 100, seed=3, tol=tol)
    assert report.status is Status.INCONCLUSIVE


# ----------------------------
# Jensen and hull bound
# ----------------------------

def test_jensen_inequality(parabola_spec, tol):
    points = np.linspace(-3.0, 3.0, 13)[:, None]
    assert jensen_probe(parabola_spec, points, seed=1, tol=tol) is Status.CERTIFIED
    concave = build_function_spec("-x^2", 1, [], "-10:10")
    assert jensen_probe(concave, np.array([[-1.0], [1.0]]), seed=1, tol=tol) is Status.REFUTED


def test_hull_bound(parabola_spec, tol):
    points = np.array([[-2.0], [0.5], [2.0]])
    assert hull_bound_probe(parabola_spec, points, seed=1, tol=tol) is Status.CERTIFIED
    concave = build_function_spec("-x^2", 1, [], "-10:10")
    assert hull_bound_probe(concave, np.array([[-1.0], [1.0]]), seed=1, tol=tol) is Status.REFUTED


CONVEX_BUT_NOT_STRICT = {"affine_line", "affine_plane", "abs_line", "flat_direction_quadratic", "flat_direction_barrier"}


def _convex_entries():
    from shared.registry import load_corpus

    return [
        e
        for e in load_corpus()
        if e.expected is Status.CERTIFIED
        or e.expected_failing is ConditionId.BOUNDARY_BLOWUP
        or e.name in CONVEX_BUT_NOT_STRICT
    ]


@pytest.mark.parametrize("entry", _convex_entries(), ids=lambda e: e.name)
def test_jensen_and_hull_bound_on_convex_corpus_entries(entry, tol):
    points = sample_domain(entry.spec.domain, 40, seed=21, tol=tol).points
    assert jensen_probe(entry.spec, points, seed=21, tol=tol) is Status.CERTIFIED
    assert hull_bound_probe(entry.spec, points, seed=21, tol=tol) is Status.CERTIFIED
