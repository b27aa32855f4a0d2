import json

import numpy as np
import pytest

from freedilation.cli import main
from freedilation.dilation import BudgetError
from freedilation.harness import (
    IngestError,
    Scenario,
    build_model,
    emit,
    evaluate_product,
    ingest,
    moment_budget_check,
    ordered_words,
    parse_product,
    render_text,
    report_fingerprint,
    run_theorem_suite,
    scenario_from_obj,
    signed_alternating_words,
)
from freedilation.ncprob import Word
from freedilation.operator_core import State
from freedilation.serialization import matrix_to_obj, state_to_obj


def _scalar(value):
    return np.array([[value]], dtype=complex)


def _scalar_factor(value):
    return (_scalar(value), State.basis_vector(1, 0))


def _free_obj(degree=3, trunc=4, **extra):
    obj = {
        "mode": "free",
        "factors": [
            {"matrix": matrix_to_obj(_scalar(0.5)), "state": None},
            {"matrix": matrix_to_obj(_scalar(0.3 + 0.2j)), "state": None},
        ],
        "degree": degree,
        "trunc": trunc,
    }
    obj.update(extra)
    return obj


# ---------------------------------------------------------------------------
# scenario ingestion


def test_emit_ingest_round_trip(tmp_path):
    sc = Scenario(
        mode="free",
        factors=[_scalar_factor(0.5), _scalar_factor(0.3 + 0.2j)],
        degree=2,
        trunc=3,
        samples=7,
        tol=1e-7,
        seed=11,
    )
    path = tmp_path / "sc.json"
    emit(sc, path)
    back = ingest(path)
    assert back.to_obj() == sc.to_obj()
    assert back == Scenario(**{**back.__dict__, "sources": ()})  # sources excluded from eq
    assert len(back.sources) == 1
    assert len(back.sources[0][1]) == 64  # sha256 hex


def test_default_mode_by_factor_count():
    assert scenario_from_obj({"factors": [{"matrix": matrix_to_obj(_scalar(0.5))}]}).mode == "single"
    assert scenario_from_obj(_free_obj()).mode == "free"


def test_default_state_is_first_basis_vector():
    sc = scenario_from_obj({"factors": [{"matrix": matrix_to_obj(np.eye(3) * 0.5)}]})
    st = sc.factors[0][1]
    assert st.kind == "vector" and st.vector[0] == 1.0


def test_ingest_rejects_bad_mode():
    with pytest.raises(IngestError, match="mode"):
        scenario_from_obj({**_free_obj(), "mode": "sideways"})


def test_ingest_rejects_empty_factors():
    with pytest.raises(IngestError, match="factors"):
        scenario_from_obj({"mode": "free", "factors": []})


def test_ingest_rejects_single_mode_with_two_factors():
    with pytest.raises(IngestError, match="exactly one factor"):
        scenario_from_obj({**_free_obj(), "mode": "single"})


def test_ingest_rejects_non_unit_state():
    bad = state_to_obj(State.basis_vector(1, 0))
    bad["data"][0][0] = [2.0, 0.0]
    with pytest.raises(IngestError, match="factors\\[0\\].state"):
        scenario_from_obj(
            {"factors": [{"matrix": matrix_to_obj(_scalar(0.5)), "state": bad}]}
        )


def test_ingest_rejects_dim_mismatch():
    with pytest.raises(IngestError, match="does not match state dim"):
        scenario_from_obj(
            {
                "factors": [
                    {
                        "matrix": matrix_to_obj(np.eye(2) * 0.5),
                        "state": state_to_obj(State.basis_vector(3, 0)),
                    }
                ]
            }
        )


def test_ingest_rejects_noninteger_budget():
    with pytest.raises(IngestError, match="degree"):
        scenario_from_obj(_free_obj(degree="three"))
    with pytest.raises(IngestError, match="trunc"):
        scenario_from_obj(_free_obj(trunc=True))


def test_ingest_rejects_doubly_dim_mismatch():
    obj = {
        "mode": "doubly",
        "factors": [
            {"matrix": matrix_to_obj(_scalar(0.5))},
            {"matrix": matrix_to_obj(np.eye(2) * 0.5)},
        ],
    }
    with pytest.raises(IngestError, match="common space"):
        scenario_from_obj(obj)


def test_ingest_reports_json_position(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{"factors": [}')
    with pytest.raises(IngestError, match=r"broken\.json:1:14"):
        ingest(p)


def test_ingest_file_referenced_parts(tmp_path):
    mat_path = tmp_path / "t.json"
    mat_path.write_text(json.dumps(matrix_to_obj(_scalar(0.5))))
    sc_path = tmp_path / "sc.json"
    sc_path.write_text(json.dumps({"factors": [{"matrix": "t.json"}]}))
    sc = ingest(sc_path)
    assert sc.factors[0][0][0, 0] == 0.5
    paths = [p for p, _ in sc.sources]
    assert str(sc_path.resolve()) in paths and str(mat_path.resolve()) in paths


def test_ingest_overrides(tmp_path):
    path = tmp_path / "sc.json"
    path.write_text(json.dumps(_free_obj()))
    sc = ingest(path, {"tol": 1e-6, "seed": 5, "samples": None})
    assert sc.tol == 1e-6 and sc.seed == 5 and sc.samples == 100


# ---------------------------------------------------------------------------
# product parsing and budgets


def test_parse_product_groups_plain_tokens():
    parts = parse_product("1^1 2^1 1^1")
    assert len(parts) == 1
    assert parts[0] == (False, Word.from_runs([(1, 1), (2, 1), (1, 1)]))


def test_parse_product_centers_are_separate():
    parts = parse_product("c(1^1) 2^1 1^-1 c(2^2)")
    assert [c for c, _ in parts] == [True, False, True]
    assert parts[1][1] == Word.from_runs([(2, 1), (1, -1)])


def test_parse_product_empty_is_unit():
    assert parse_product("  ") == [(False, Word(()))]


def test_evaluate_product_centered_mean_is_zero(tmp_path):
    sc = Scenario(mode="single", factors=[_scalar_factor(0.5)])
    model = build_model(sc)
    assert abs(evaluate_product("c(1^1)", model)) < 1e-12
    assert evaluate_product("1^1", model) == pytest.approx(0.5)


def test_moment_budget_check_refuses_deep_alternation():
    sc = Scenario(mode="free", factors=[_scalar_factor(0.5), _scalar_factor(0.4)], trunc=4)
    with pytest.raises(BudgetError, match="factor blocks"):
        moment_budget_check(sc, Word.from_runs([(1, 1), (2, 1), (1, 1), (2, 1), (1, 1)]))
    moment_budget_check(sc, Word.from_runs([(1, 1), (2, 1), (1, 1), (2, 1)]))  # in budget
    # non-free modes have no truncation to respect
    sc2 = Scenario(mode="single", factors=[_scalar_factor(0.5)])
    moment_budget_check(sc2, Word.from_runs([(1, 9)]))


def test_signed_alternating_words_structure():
    words = signed_alternating_words(2, 2, 2, 2)
    assert all(sum(abs(k) for _, k in w) <= 2 for w in words)
    for w in words:
        for a, b in zip(w, w[1:]):
            assert a[0] != b[0] or (a[1] > 0) != (b[1] > 0)
    assert ((1, 1), (2, 1)) in words
    assert ((1, 1), (1, -1)) in words  # same factor, opposite sign is a new run
    assert all(len({f for f, _ in w}) <= 2 for w in words)


def test_ordered_words_shape():
    words = ordered_words(2, 1)
    assert () in words
    assert ((1, 1), (2, -1)) in words
    assert ((2, 1), (1, 1)) not in words  # factors stay in ascending order
    assert len(words) == 9  # 3 choices per factor, squared


# ---------------------------------------------------------------------------
# the suite


def test_suite_single_scalar_passes():
    sc = Scenario(mode="single", factors=[_scalar_factor(0.5)], samples=10)
    report = run_theorem_suite(sc)
    names = [c["name"] for c in report.checks]
    assert names == ["construction", "unitarity", "power_dilation", "faithfulness"]
    assert report.overall_pass
    assert all(c["passed"] for c in report.checks)
    assert report.checks[0]["details"]["ambient_dim"] == 4


def test_suite_doubly_includes_commutation():
    t = np.diag([0.5, 0.3]).astype(complex)
    s = State.basis_vector(2, 0)
    sc = Scenario(mode="doubly", factors=[(t, s), (t * 0.5, s)], degree=2, samples=5)
    report = run_theorem_suite(sc)
    names = [c["name"] for c in report.checks]
    assert "double_commutation" in names
    assert report.overall_pass


def test_suite_construction_failure_is_a_failing_entry():
    t = np.array([[0.3, 0.1], [0.0, 0.4]], dtype=complex)
    s = State.from_vector(np.array([1.0, 0.0]))
    sc = Scenario(mode="free", factors=[(t, s), (t, s)], degree=3, trunc=4)
    report = run_theorem_suite(sc)  # 5601-dimensional space exceeds the cap
    assert not report.overall_pass
    assert report.checks[0]["name"] == "construction"
    assert not report.checks[0]["passed"]
    assert "error" in report.checks[0]["witness"]


def test_suite_subset_restriction():
    sc = Scenario(mode="single", factors=[_scalar_factor(0.5)])
    report = run_theorem_suite(sc, subset=["unitarity"])
    assert [c["name"] for c in report.checks] == ["construction", "unitarity"]


def test_report_fingerprint_ignores_timing():
    sc = Scenario(mode="single", factors=[_scalar_factor(0.5)], samples=5)
    a = run_theorem_suite(sc).to_obj()
    b = run_theorem_suite(sc).to_obj()
    assert report_fingerprint(a) == report_fingerprint(b)
    mutated = json.loads(json.dumps(a))
    mutated["checks"][0]["seconds"] = 99.0
    assert report_fingerprint(mutated) == report_fingerprint(a)
    mutated["checks"][0]["residual"] = 1.0
    assert report_fingerprint(mutated) != report_fingerprint(a)


def test_render_text_table():
    sc = Scenario(mode="single", factors=[_scalar_factor(0.5)], samples=5)
    text = render_text(run_theorem_suite(sc).to_obj())
    assert "unitarity" in text
    assert "overall: pass" in text
    assert "FAIL" not in text


# ---------------------------------------------------------------------------
# CLI


def _write_scenario(tmp_path, obj, name="sc.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_cli_suite_single(tmp_path, capsys):
    path = _write_scenario(
        tmp_path, {"factors": [{"matrix": matrix_to_obj(_scalar(0.5))}], "samples": 5}
    )
    out_path = tmp_path / "report.json"
    code = main(["suite", "--input", path, "--output", str(out_path)])
    assert code == 0
    report = json.loads(out_path.read_text())
    assert report["overall_pass"] is True
    assert report["inputs"][0]["path"].endswith("sc.json")


def test_cli_dilate_refuses_multiple_factors(tmp_path, capsys):
    path = _write_scenario(tmp_path, _free_obj())
    code = main(["dilate", "--input", path])
    assert code == 2
    assert "exactly one factor" in capsys.readouterr().err


def test_cli_moments_and_budget_refusal(tmp_path, capsys):
    path = _write_scenario(tmp_path, _free_obj(degree=2, trunc=3, samples=2))
    code = main(["moments", "--input", path, "--word", "1^1 2^1"])
    assert code == 0
    obj = json.loads(capsys.readouterr().out)
    got = complex(*obj["results"][0]["moment"])
    assert got == pytest.approx(0.5 * (0.3 + 0.2j), abs=1e-12)

    code = main(["moments", "--input", path, "--word", "1^1 2^1 1^1 2^1"])
    assert code == 2
    assert "factor blocks" in capsys.readouterr().err


def test_cli_check_trace_on_single(tmp_path, capsys):
    path = _write_scenario(
        tmp_path,
        {"factors": [{"matrix": matrix_to_obj(_scalar(0.5))}], "samples": 5},
    )
    code = main(["check", "--input", path, "--property", "trace", "--format", "text"])
    assert code == 0
    capsys.readouterr()


def test_cli_cumulants_semicircle(tmp_path, capsys):
    p = tmp_path / "moments.json"
    p.write_text(json.dumps({"moments": [0, 1, 0, 2, 0, 5]}))
    code = main(["cumulants", "--input", str(p)])
    assert code == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["pass"] is True
    kappas = [complex(*k) for k in obj["cumulants"]]
    assert kappas[0] == 0 and kappas[1] == 1
    assert all(abs(k) < 1e-12 for k in kappas[2:])


def test_cli_ncpartitions(tmp_path, capsys):
    code = main(["ncpartitions", "--size", "4", "--list"])
    assert code == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["count"] == 14
    assert len(obj["partitions"]) == 14
    code = main(["ncpartitions", "--size", "40"])
    assert code == 2
    capsys.readouterr()


def test_cli_missing_and_invalid_input(tmp_path, capsys):
    assert main(["suite", "--input", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["suite", "--input", str(bad)]) == 2
    capsys.readouterr()


def test_cli_failing_suite_exits_one(tmp_path, capsys):
    # a free scenario whose truncated space overflows the cap yields a clean
    # failing report (exit 1), not a crash and not an input refusal (exit 2)
    mat = matrix_to_obj(np.array([[0.3, 0.1], [0.0, 0.4]], dtype=complex))
    path = _write_scenario(
        tmp_path, {"mode": "free", "factors": [{"matrix": mat}, {"matrix": mat}]}
    )
    code = main(["suite", "--input", path])
    assert code == 1
    obj = json.loads(capsys.readouterr().out)
    assert obj["overall_pass"] is False
    assert obj["checks"][0]["name"] == "construction"
    assert "error" in obj["checks"][0]["witness"]


def test_cli_oracle_strict_tolerance_exits_one(tmp_path, capsys):
    # an impossible tolerance turns a healthy cross-check into a clean failure
    path = _write_scenario(tmp_path, _free_obj())
    code = main(["oracle", "--input", path, "--word", "1^1 2^1", "--tol", "1e-300"])
    assert code in (0, 1)
    obj = json.loads(capsys.readouterr().out)
    if obj["max_residual"] > 0:
        assert code == 1 and obj["pass"] is False
    code = main(["oracle", "--input", path, "--word", "1^1 2^1"])
    assert code == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["pass"] is True and obj["max_residual"] <= 1e-8


def test_cli_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    capsys.readouterr()
