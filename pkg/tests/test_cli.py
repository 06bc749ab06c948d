import json

import pytest

import main
from shared import config

EXAMPLE = ["--function", "1/((1-x^2)*(1-y^2))", "--dim", "2", "--domain", "x^2 - 1; y^2 - 1", "--box", "-1:1,-1:1"]
DISC = ["--function", "x^2 + y^2", "--dim", "2", "--domain", "x^2 + y^2 - 1", "--box", "-1:1,-1:1"]
FAST = ["--samples", "300", "--trials", "300", "--lines", "8", "--seed", "5"]

CORPUS = """\
name = parabola
function = x^2
dim = 1
box = -3:3
expected = certified
provenance = TRIVIAL: positive second derivative on R
"""


def run(capsys, *argv):
    code = main.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# ----------------------------
# analyze
# ----------------------------

def test_analyze_certifies_the_example(capsys):
    code, out, _ = run(capsys, "analyze", *EXAMPLE, "--mode", "main-theorem", *FAST)
    assert code == config.EXIT_CERTIFIED
    assert "[x] C is convex and open in Aff(C)" in out
    assert "CERTIFIED" in out


def test_analyze_json_schema(capsys):
    code, out, _ = run(capsys, "analyze", *DISC, "--mode", "main-theorem", "--json", *FAST)
    assert code == config.EXIT_REFUTED
    payload = json.loads(out)
    assert payload["verdict"] == "refuted"
    assert payload["mode"] == "main_theorem"
    assert [c["id"] for c in payload["conditions"]] == [
        "domain_convex_open",
        "f_strictly_convex",
        "f_continuous",
        "boundary_blowup",
    ]
    assert payload["conditions"][3]["witness"]["kind"] == "bounded_at_boundary"
    assert payload["stats"] == {"seed": 5, "k": 300, "trials": 300, "elapsed_ms": None}


def test_json_output_is_deterministic(capsys):
    first = run(capsys, "analyze", *DISC, "--mode", "lines", "--json", *FAST)[1]
    second = run(capsys, "analyze", *DISC, "--mode", "lines", "--json", *FAST)[1]
    assert first == second


def test_timing_fills_elapsed(capsys):
    _, out, _ = run(capsys, "analyze", *DISC, "--mode", "main-theorem", "--json", "--timing", *FAST)
    assert json.loads(out)["stats"]["elapsed_ms"] >= 0.0


def test_seed_from_environment_wins(capsys, monkeypatch):
    monkeypatch.setenv(config.SEED_ENV_VAR, "77")
    _, out, _ = run(capsys, "analyze", *DISC, "--mode", "main-theorem", "--json", *FAST)
    assert json.loads(out)["stats"]["seed"] == 77


def test_config_file_supplies_defaults(capsys, tmp_path):
    path = tmp_path / "run.env"
    path.write_text("MODE=lines\nSAMPLES=200\n", encoding="utf-8")
    _, out, _ = run(capsys, "analyze", *DISC, "--json", "--config", str(path), "--lines", "8")
    payload = json.loads(out)
    assert payload["mode"] == "lines"
    assert payload["stats"]["k"] == 200


@pytest.mark.parametrize(
    "argv",
    [
        ["analyze", "--function", "x + * 2", "--dim", "1", "--box=0:1"],
        ["analyze", "--dim", "1", "--box=0:1"],
        ["analyze", "--function", "x", "--dim", "1"],
        ["analyze", "--function", "x", "--dim", "1", "--box=0:1", "--samples", "0"],
        ["analyze", "--function", "x", "--dim", "1", "--box=0:1", "--tol", "bogus=1"],
        ["analyze", "--function", "x", "--dim", "1", "--box=0:1", "--tol", "strict=-1"],
        ["analyze", "--function", "x", "--dim", "1", "--box=0:1", "--config", "/nonexistent.env"],
        ["analyze", "--function", "x", "--dim", "1", "--box", "0:1", "--mode", "bogus"],
        ["analyze", "--function", "x", "--dim", "1", "--box"],
        ["analyze", "--function", "x", "--dim", "one", "--box", "0:1"],
        ["hull", "--json"],
        ["frobnicate"],
        [],
    ],
)
def test_input_errors_exit_with_three(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == config.EXIT_INPUT_ERROR
    assert err.startswith("error:")


def test_syntax_errors_point_at_the_token(capsys):
    _, _, err = run(capsys, "analyze", "--function", "x + * 2", "--dim", "1", "--box=0:1")
    assert "^" in err


def test_values_may_start_with_a_minus_sign(capsys):
    code, out, _ = run(
        capsys, "analyze", "--function", "-x", "--dim", "1", "--box", "-10:10",
        "--mode", "main-theorem", "--json", *FAST,
    )
    payload = json.loads(out)
    assert code == config.EXIT_REFUTED
    statuses = {c["id"]: c["status"] for c in payload["conditions"]}
    assert statuses["f_strictly_convex"] == "refuted"


def test_attach_dash_values_leaves_other_tokens_alone():
    argv = ["analyze", "--box", "-1:1", "--function", "x", "--domain", "-x", "--mode", "all", "--box"]
    assert main.attach_dash_values(argv) == [
        "analyze", "--box=-1:1", "--function", "x", "--domain=-x", "--mode", "all", "--box",
    ]
    assert main.attach_dash_values(["analyze", "--box", "--json"]) == ["analyze", "--box", "--json"]


def test_bad_mode_names_the_choices(capsys):
    code, _, err = run(capsys, "analyze", "--function", "x", "--dim", "1", "--box", "0:1", "--mode", "bogus")
    assert code == config.EXIT_INPUT_ERROR
    assert "invalid choice" in err


# ----------------------------
# hull
# ----------------------------

def test_hull_of_collinear_points(capsys, tmp_path):
    path = tmp_path / "points.csv"
    path.write_text("# x,y,z\n0,0,0\n1,1,1\n\n2,2,2\n", encoding="utf-8")
    code, out, _ = run(capsys, "hull", "--csv", str(path), "--json")
    assert code == config.EXIT_CERTIFIED
    payload = json.loads(out)
    assert payload["dim"] == 1
    assert payload["base"] == [0.0, 0.0, 0.0]


def test_hull_strict_refutes_a_square(capsys, tmp_path):
    path = tmp_path / "square.csv"
    path.write_text("0,0\n1,0\n1,1\n0,1\n", encoding="utf-8")
    code, out, _ = run(capsys, "hull", "--csv", str(path), "--strict", "--json", "--trials", "200")
    assert code == config.EXIT_REFUTED
    assert json.loads(out)["oracle"]["verdict"] == "refuted"


@pytest.mark.parametrize("text", ["0,0\n1\n", "0,zero\n", "# header only\n"])
def test_bad_csv_exits_with_three(capsys, tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text, encoding="utf-8")
    assert run(capsys, "hull", "--csv", str(path))[0] == config.EXIT_INPUT_ERROR


def test_missing_csv_exits_with_three(capsys, tmp_path):
    assert run(capsys, "hull", "--csv", str(tmp_path / "absent.csv"))[0] == config.EXIT_INPUT_ERROR


# ----------------------------
# crosscheck
# ----------------------------

def test_crosscheck_passes(capsys, tmp_path):
    path = tmp_path / "corpus.txt"
    path.write_text(CORPUS, encoding="utf-8")
    code, out, _ = run(capsys, "crosscheck", "--corpus", str(path), "--json", *FAST)
    assert code == config.EXIT_CERTIFIED
    payload = json.loads(out)
    assert payload["entries"][0]["expectation_met"]
    assert payload["stats"]["disagreements"] == 0


def test_crosscheck_wrong_expectation_exits_with_two(capsys, tmp_path):
    path = tmp_path / "corpus.txt"
    path.write_text(CORPUS.replace("certified", "refuted"), encoding="utf-8")
    code, out, _ = run(capsys, "crosscheck", "--corpus", str(path), *FAST)
    assert code == config.EXIT_INCONCLUSIVE
    assert "MISMATCH" in out


def test_empty_corpus_exits_with_three(capsys, tmp_path):
    path = tmp_path / "corpus.txt"
    path.write_text("", encoding="utf-8")
    assert run(capsys, "crosscheck", "--corpus", str(path))[0] == config.EXIT_INPUT_ERROR


def test_log_records_carry_the_run():
    import logging

    from shared.logger import RunContextFilter, set_run_context

    set_run_context("analyze", 9)
    record = logging.LogRecord("core.lines", logging.INFO, __file__, 1, "line verdict", None, None)
    assert RunContextFilter().filter(record)
    assert record.run == "analyze:seed=9"


# ----------------------------
# golden runs at default settings
# ----------------------------

def test_example_is_certified_by_every_engine(capsys):
    code, out, _ = run(capsys, "analyze", *EXAMPLE, "--json")
    payload = json.loads(out)
    assert code == config.EXIT_CERTIFIED
    assert payload["agreement"] is True
    assert {e["verdict"] for e in payload["engines"].values()} == {"certified"}


def test_disc_is_refuted_by_every_engine(capsys):
    code, out, _ = run(capsys, "analyze", *DISC, "--json")
    payload = json.loads(out)
    assert code == config.EXIT_REFUTED
    assert {e["verdict"] for e in payload["engines"].values()} == {"refuted"}
    statuses = {c["id"]: c["status"] for c in payload["conditions"]}
    assert statuses == {
        "domain_convex_open": "certified",
        "f_strictly_convex": "certified",
        "f_continuous": "certified",
        "boundary_blowup": "refuted",
    }
    oracle_witness = payload["engines"]["oracle"]["conditions"][0]["witness"]
    assert oracle_witness["kind"] == "boundary_segment"
