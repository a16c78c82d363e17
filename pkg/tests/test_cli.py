from __future__ import annotations

import json
import pathlib

import pytest

from qeqlog.cli import main


WS = str(pathlib.Path(__file__).parent / "fixtures" / "workspace.json")
WS_NOOPS = str(pathlib.Path(__file__).parent / "fixtures" / "workspace_noops.json")


def run(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *args):
    code, out, err = run(capsys, *args)
    assert out, f"no stdout; stderr was {err!r}"
    return code, json.loads(out)


class TestCheckModel:
    def test_model_exit_zero(self, capsys):
        code, report = run_json(
            capsys, "--workspace", WS, "check-model", "--algebra", "swap",
            "--theory", "EMPTY",
        )
        assert code == 0 and report["model"] is True
        assert report["grid"] == 4 and "skipped_overflow" in report

    def test_swap_models_quarter_theory(self, capsys):
        code, report = run_json(
            capsys, "--workspace", WS, "check-model", "--algebra", "stay",
            "--theory", "QUARTER",
        )
        assert code == 0 and report["model"] is True

    def test_counterexample_exit_one(self, capsys):
        code, report = run_json(
            capsys, "--workspace", WS, "check-model", "--algebra", "swap",
            "--theory", "PHI1",
        )
        assert code == 1
        assert report["model"] is False
        assert report["counterexample"]["interpretation"] == {"a": "p", "b": "q"}

    def test_missing_name_exit_two(self, capsys):
        code, out, err = run(
            capsys, "--workspace", WS, "check-model", "--algebra", "nope",
            "--theory", "EMPTY",
        )
        assert code == 2 and "nope" in err


class TestDerive:
    def test_derivable_judgment(self, capsys):
        j = json.dumps({"context": "AB", "lhs": "a", "rhs": "b", "eps": None})
        code, report = run_json(
            capsys, "--workspace", WS, "derive", "--theory", "PHI1",
            "--target", "AB", "--judgment", j,
        )
        assert code == 0
        assert report["derivable"] is True and report["distance"] == "0"

    def test_not_derivable_exit_one(self, capsys):
        j = json.dumps({"context": "AB", "lhs": "u(a)", "rhs": "b", "eps": "1/2"})
        code, report = run_json(
            capsys, "--workspace", WS, "derive", "--theory", "QUARTER",
            "--target", "AB", "--judgment", j,
        )
        assert code == 1
        assert report["derivable"] is False and report["distance"] == "3/4"

    def test_trace_output(self, capsys):
        j = json.dumps({"context": "AB", "lhs": "u(a)", "rhs": "b", "eps": "3/4"})
        code, report = run_json(
            capsys, "--workspace", WS, "derive", "--theory", "QUARTER",
            "--target", "AB", "--judgment", j, "--trace",
        )
        assert code == 0
        assert report["trace"][0]["rule"] == "HORN"

    def test_judgment_from_file(self, capsys, tmp_path):
        p = tmp_path / "j.json"
        p.write_text(json.dumps({"context": "AB", "lhs": "a", "rhs": "a", "eps": "0"}))
        code, report = run_json(
            capsys, "--workspace", WS, "derive", "--theory", "EMPTY",
            "--target", "AB", "--judgment", str(p),
        )
        assert code == 0 and report["derivable"] is True


class TestDistance:
    def test_collapsed_distance_is_zero(self, capsys):
        code, report = run_json(
            capsys, "--workspace", WS_NOOPS, "distance", "--theory", "PHI1",
            "--target", "AB", "--lhs", "a", "--rhs", "b",
        )
        assert code == 0 and report["distance"] == "0"

    def test_usevar_distance(self, capsys):
        code, report = run_json(
            capsys, "--workspace", WS_NOOPS, "distance", "--theory", "EMPTY",
            "--target", "AB", "--lhs", "a", "--rhs", "b",
        )
        assert code == 0 and report["distance"] == "1/2"

    def test_exact_fraction_strings(self, capsys):
        code, report = run_json(
            capsys, "--workspace", WS, "distance", "--theory", "QUARTER",
            "--target", "AB", "--lhs", "u(a)", "--rhs", "b",
        )
        assert report["distance"] == "3/4"


class TestFree:
    def test_classes_and_tables(self, capsys):
        code, report = run_json(
            capsys, "--workspace", WS, "--depth", "2", "free",
            "--theory", "EMPTY", "--space", "AB",
        )
        assert code == 0
        assert report["classes"] == ["a", "b", "u(a)", "u(b)"]
        assert report["ops"]["u"]["a"] == "u(a)"
        assert report["ops"]["u"]["u(a)"] == "overflow"
        assert report["unit"] == {"a": "a", "b": "b"}
        assert report["delta"][0][1] == "1/2"
        assert report["model_check"]["failed"] == 0

    def test_collapse(self, capsys):
        code, report = run_json(
            capsys, "--workspace", WS_NOOPS, "free", "--theory", "PHI1",
            "--space", "AB",
        )
        assert code == 0 and report["classes"] == ["a"]


class TestEntail:
    def test_vacuous_and_refuted(self, capsys):
        j = json.dumps({"context": "AB", "lhs": "u(a)", "rhs": "a", "eps": None})
        code, _ = run_json(
            capsys, "--workspace", WS, "entail", "--theory", "EMPTY",
            "--judgment", j, "--catalog", "stay",
        )
        assert code == 0
        code, report = run_json(
            capsys, "--workspace", WS, "entail", "--theory", "EMPTY",
            "--judgment", j, "--catalog", "swap,stay",
        )
        assert code == 1 and report["entailed"] is False


class TestMonadLaws:
    def test_no_ops_full_coverage(self, capsys):
        code, report = run_json(
            capsys, "--workspace", WS_NOOPS, "monad-laws", "--theory", "EMPTY",
            "--space", "AB",
        )
        assert code == 0
        for law in report["laws"]:
            assert law["failed"] == 0 and law["skipped_overflow"] == 0

    def test_unary_depth_three_reports_skips(self, capsys):
        code, report = run_json(
            capsys, "--workspace", WS, "monad-laws", "--theory", "EMPTY",
            "--space", "AB",
        )
        assert code == 0
        assert all(law["failed"] == 0 for law in report["laws"])
        assert report["skipped_overflow"] > 0


class TestUmp:
    def test_swap_fixture(self, capsys):
        code, report = run_json(
            capsys, "--workspace", WS, "--depth", "2", "ump",
            "--theory", "EMPTY", "--space", "AB", "--algebra", "swap",
            "--map", '{"a": "p", "b": "q"}',
        )
        assert code == 0
        assert report["exists"] is True and report["unique"] is True

    def test_non_model_target_errors(self, capsys):
        code, out, err = run(
            capsys, "--workspace", WS, "--depth", "2", "ump",
            "--theory", "PHI1", "--space", "AB", "--algebra", "swap",
            "--map", '{"a": "p", "b": "q"}',
        )
        assert code == 2 and "model" in err


class TestEmCheck:
    def test_swap_round_trip(self, capsys):
        code, report = run_json(
            capsys, "--workspace", WS, "--depth", "2", "em-check",
            "--theory", "EMPTY", "--algebra", "swap",
        )
        assert code == 0
        assert report["round_trip"] is True
        assert all(law["failed"] == 0 for law in report["laws"])


class TestDeterminism:
    @pytest.mark.parametrize(
        "args",
        [
            ("distance", "--theory", "QUARTER", "--target", "AB", "--lhs", "u(a)", "--rhs", "b"),
            ("free", "--theory", "QUARTER", "--space", "AB"),
            ("monad-laws", "--theory", "EMPTY", "--space", "AB"),
        ],
    )
    def test_byte_identical_reruns(self, capsys, args):
        code1, out1, _ = run(capsys, "--workspace", WS, *args)
        code2, out2, _ = run(capsys, "--workspace", WS, *args)
        assert code1 == code2
        assert out1 == out2


class TestErrors:
    def test_bad_workspace_path(self, capsys):
        code, out, err = run(capsys, "--workspace", "/nonexistent.json",
                             "check-model", "--algebra", "a", "--theory", "t")
        assert code == 2

    def test_off_grid_override(self, capsys):
        # grid 3 cannot represent 1/2 distances from the workspace
        code, out, err = run(
            capsys, "--workspace", WS, "--grid", "3", "distance",
            "--theory", "EMPTY", "--target", "AB", "--lhs", "a", "--rhs", "b",
        )
        assert code == 2 and "grid" in err.lower()
