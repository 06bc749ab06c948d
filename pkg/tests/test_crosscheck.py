from core.crosscheck import (
    ENGINE_ORDER,
    agreement_matrix,
    combined_status,
    crosscheck,
    engines_disagree,
    expectation_met,
    run_engines,
)
from shared.models import ConditionId, Mode, Status
from shared.registry import load_corpus

SMALL = """\
name = parabola
function = x^2
dim = 1
box = -3:3
expected = certified
provenance = TRIVIAL: positive second derivative on R

name = disc
function = x^2 + y^2
dim = 2
constraints = x^2 + y^2 - 1
box = -1:1,-1:1
expected = refuted
failing = boundary_blowup
provenance = PAPER: bounded on the unit circle
"""

C, R, I = Status.CERTIFIED, Status.REFUTED, Status.INCONCLUSIVE


def small_corpus(tmp_path, text=SMALL):
    path = tmp_path / "corpus.txt"
    path.write_text(text, encoding="utf-8")
    return load_corpus(path)


def test_disagreement_needs_two_decided_verdicts():
    assert not engines_disagree([C, C, C])
    assert not engines_disagree([C, I, C])
    assert engines_disagree([C, R, I])


def test_combined_status_is_unanimous():
    assert combined_status([R, R, R]) is R
    assert combined_status([C, C, I]) is I
    assert combined_status([C, R]) is I
    assert combined_status([]) is I


def test_run_engines_respects_modes(parabola_spec, tol):
    verdicts = run_engines(parabola_spec, k=100, m_lines=4, trials=100, seed=1, tol=tol, modes=(Mode.LINES,))
    assert list(verdicts) == [Mode.LINES]


def test_crosscheck_small_corpus(tmp_path, tol):
    corpus = small_corpus(tmp_path)
    report = crosscheck(corpus, k=300, trials=300, seed=3, tol=tol, m_lines=8)
    assert report.ok
    assert report.disagreements == 0
    parabola, disc = report.rows
    assert all(v.overall is C for v in parabola.verdicts.values())
    assert disc.verdicts[Mode.MAIN_THEOREM].first_failing is ConditionId.BOUNDARY_BLOWUP
    assert list(disc.verdicts) == list(ENGINE_ORDER)


def test_wrong_expectation_is_reported(tmp_path, tol):
    corpus = small_corpus(tmp_path, SMALL.replace("failing = boundary_blowup", "failing = f_continuous"))
    report = crosscheck(corpus, k=300, trials=300, seed=3, tol=tol, m_lines=8)
    assert not report.ok
    assert report.expectation_mismatches == 1
    assert not expectation_met(corpus[1], report.rows[1].verdicts)


def test_entry_verdicts_do_not_depend_on_order(tmp_path, tol):
    corpus = small_corpus(tmp_path)
    forward = crosscheck(corpus, k=200, trials=200, seed=3, tol=tol, m_lines=4)
    backward = crosscheck(corpus[::-1], k=200, trials=200, seed=3, tol=tol, m_lines=4)
    for row in forward.rows:
        twin = next(r for r in backward.rows if r.entry.name == row.entry.name)
        assert {m: v.overall for m, v in row.verdicts.items()} == {m: v.overall for m, v in twin.verdicts.items()}


def test_agreement_matrix_diagonal_counts_entries(tmp_path, tol):
    report = crosscheck(small_corpus(tmp_path), k=200, trials=200, seed=3, tol=tol, m_lines=4)
    matrix = agreement_matrix(report)
    for mode in ENGINE_ORDER:
        assert matrix[mode.value][mode.value] == 2


def test_builtin_corpus_engines_agree():
    report = crosscheck(load_corpus(), seed=42)
    assert report.disagreements == 0, [row.entry.name for row in report.rows if row.disagreement]
