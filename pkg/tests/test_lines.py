import numpy as np
import pytest

from core.functions import build_function_spec
from core.lines import analyze_1d, line_restriction_verdict, restrict_to_line, sample_lines
from shared.models import ConditionId, Mode, Status, WitnessKind


def test_restriction_of_disc_to_a_diameter(disc_spec, tol):
    restriction = restrict_to_line(disc_spec, np.zeros(2), np.array([3.0, 0.0]), tol)
    lo, hi = restriction.interval
    assert lo == pytest.approx(-1.0, abs=1e-6)
    assert hi == pytest.approx(1.0, abs=1e-6)
    assert np.allclose(restriction.direction, [1.0, 0.0])
    assert restriction.describe()["index"] == 0


def test_line_missing_the_domain(tol):
    spec = build_function_spec("x^2 + y^2", 2, ["x^2 + y^2 - 0.25"], "-1:1")
    assert restrict_to_line(spec, np.array([0.0, 0.9]), np.array([1.0, 0.0]), tol) is None


def test_analyze_1d_certifies_the_barrier(example_spec, tol):
    restriction = restrict_to_line(example_spec, np.zeros(2), np.array([1.0, 2.0]), tol)
    verdict = analyze_1d(restriction, seed=5, tol=tol)
    assert verdict.mode is Mode.LINES
    assert verdict.overall is Status.CERTIFIED


def test_analyze_1d_finds_bounded_ends(disc_spec, tol):
    restriction = restrict_to_line(disc_spec, np.zeros(2), np.array([1.0, 0.0]), tol)
    verdict = analyze_1d(restriction, seed=5, tol=tol)
    assert verdict.first_failing is ConditionId.BOUNDARY_BLOWUP
    assert verdict.witness.kind is WitnessKind.BOUNDED_AT_BOUNDARY


def test_analyze_1d_sees_a_disconnected_slice(annulus_spec, tol):
    restriction = restrict_to_line(annulus_spec, np.array([0.75, 0.0]), np.array([1.0, 0.0]), tol)
    verdict = analyze_1d(restriction, seed=5, tol=tol)
    assert verdict.first_failing is ConditionId.DOMAIN_CONVEX_OPEN
    assert verdict.witness.kind is WitnessKind.NONCONVEX_DOMAIN


def test_affine_restriction_is_flat(affine_spec, tol):
    restriction = restrict_to_line(affine_spec, np.zeros(1), np.ones(1), tol)
    verdict = analyze_1d(restriction, seed=5, tol=tol)
    assert verdict.first_failing is ConditionId.F_STRICTLY_CONVEX


def test_sample_lines_adds_axis_lines(example_spec, tol):
    lines, dropped = sample_lines(example_spec, 10, 50, seed=2, tol=tol)
    assert len(lines) + dropped == 10 + 2 * 2


def test_line_verdicts(parabola_spec, disc_spec, tol):
    assert line_restriction_verdict(parabola_spec, 8, 64, seed=1, tol=tol).overall is Status.CERTIFIED
    refuted = line_restriction_verdict(disc_spec, 8, 64, seed=1, tol=tol)
    assert refuted.first_failing is ConditionId.BOUNDARY_BLOWUP
    assert any("refuted on line" in note for note in refuted.condition(ConditionId.BOUNDARY_BLOWUP).notes)


def test_workers_do_not_change_the_verdict(example_spec, tol):
    serial = line_restriction_verdict(example_spec, 12, 64, seed=9, tol=tol, workers=1)
    pooled = line_restriction_verdict(example_spec, 12, 64, seed=9, tol=tol, workers=3)
    assert serial.overall is pooled.overall
    assert serial.stats == pooled.stats
    assert [c.status for c in serial.conditions] == [c.status for c in pooled.conditions]
