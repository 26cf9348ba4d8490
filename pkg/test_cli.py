"""
Tests for the ddwpr command line: table output, error exits and run metadata
"""
import io
import json

import pandas as pd
import pytest

from ddwpr import __version__
from ddwpr import ddwpr_dist as dd
from ddwpr.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from ddwpr.services.golden_tables import COMPANION_HEADERS, STATUS_DEVIATES, STATUS_ERRATA

STATUS = COMPANION_HEADERS.index("status")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_csv(capsys, *argv) -> pd.DataFrame:
    code, out, err = run(capsys, *argv)
    assert code == EXIT_OK, err
    return pd.read_csv(io.StringIO(out.split("\n\n")[0]))


def run_json(capsys, *argv) -> dict:
    code, out, err = run(capsys, *argv, "--format", "json")
    assert code in (EXIT_OK, EXIT_FAIL), err
    return json.loads(out)


# -------------------------------------------------------
# dist / tdist
# -------------------------------------------------------
def test_dist_cdf_table(capsys):
    frame = run_csv(capsys, "dist", "--T", "25", "--measure", "cdf", "--r-min", "0", "--r-max", "10")
    assert list(frame.columns) == ["r", "cdf"]
    assert frame["r"].tolist() == list(range(11))
    assert frame.loc[frame["r"] == 5, "cdf"].item() == pytest.approx(0.2075564212, rel=1e-2)


def test_dist_survival_at_zero(capsys):
    frame = run_csv(capsys, "dist", "--T", "25", "--measure", "survival", "--r-min", "0", "--r-max", "0")
    assert frame["survival"].tolist() == [1]


def test_dist_hazard_at_origin(capsys):
    frame = run_csv(capsys, "dist", "--T", "1", "--measure", "hazard", "--r-min", "0", "--r-max", "0")
    assert frame["hazard"].item() == pytest.approx(0.063364, abs=1e-6)


def test_undefined_cells_do_not_fail_the_run(capsys):
    frame = run_csv(capsys, "dist", "--T", "1", "--measure", "hazard", "--r-min", "30", "--r-max", "31")
    assert frame["hazard"].tolist() == ["undefined", "undefined"]


def test_dist_pmf_column_is_the_pmf_table(capsys):
    payload = run_json(capsys, "dist", "--T", "25", "--measure", "pmf", "--r-min", "-1", "--r-max", "12")
    assert payload["rows"][0] == [-1, "undefined"]
    expected = dd.pmf_table(dd.DdwprSpec(T=25.0), 12)
    assert [row[1] for row in payload["rows"][1:]] == pytest.approx(expected.tolist(), rel=1e-9, abs=1e-300)


def test_dist_continuous_density_grid(capsys):
    frame = run_csv(capsys, "dist", "--T", "1", "--measure", "cpdf", "--r-min", "0", "--r-max", "2",
                    "--r-step", "0.5")
    assert frame["r"].tolist() == [0.0, 0.5, 1.0, 1.5, 2.0]
    assert frame["cpdf"].iloc[0] == 0.0
    assert (frame["cpdf"] >= 0).all()


def test_dist_rejects_inverted_range(capsys):
    code, out, err = run(capsys, "dist", "--T", "1", "--r-min", "5", "--r-max", "2")
    assert code == EXIT_USAGE
    assert out == ""
    assert "r-min" in err


def test_dist_rejects_bad_horizon(capsys):
    code, _, _ = run(capsys, "dist", "--T", "-1")
    assert code == EXIT_USAGE


def test_csv_and_json_carry_the_same_numbers(capsys):
    argv = ("dist", "--T", "3", "--measure", "pmf", "--r-min", "0", "--r-max", "8")
    frame = run_csv(capsys, *argv)
    payload = run_json(capsys, *argv)
    assert payload["headers"] == ["r", "pmf"]
    assert [row[1] for row in payload["rows"]] == pytest.approx(frame["pmf"].tolist(), rel=1e-12)


def test_tdist_window_table(capsys):
    frame = run_csv(capsys, "tdist", "--T", "25", "--a", "3", "--b", "10", "--measure", "cdf")
    assert frame["r"].tolist() == list(range(3, 11))
    assert frame.loc[frame["r"] == 10, "cdf"].item() == 1.0
    assert frame.loc[frame["r"] == 3, "cdf"].item() == 0.0


def test_tdist_meta_reports_the_normalizer(capsys):
    payload = run_json(capsys, "tdist", "--T", "25", "--a", "3", "--b", "10")
    assert payload["meta"]["normalizer"] == pytest.approx(0.8828953549, rel=1e-8)
    assert payload["meta"]["command"] == "tdist"
    assert payload["meta"]["version"] == __version__


def test_tdist_rejects_empty_window(capsys):
    code, _, err = run(capsys, "tdist", "--T", "25", "--a", "5", "--b", "5")
    assert code == EXIT_USAGE
    assert err


# -------------------------------------------------------
# Printed-table reproduction
# -------------------------------------------------------
def test_table1_matches_or_documents_every_cell(capsys):
    payload = run_json(capsys, "table1")
    assert payload["headers"][0] == "T"
    assert [row[0] for row in payload["rows"]] == [1.0, 2.0, 3.0]
    means = {row[0]: row[1] for row in payload["rows"]}
    assert means[1.0] == pytest.approx(1.129581778, rel=1e-3)
    assert means[2.0] == pytest.approx(1.747634563, rel=1e-3)
    statuses = [row[STATUS] for row in payload["companion"]["rows"]]
    assert len(statuses) == 27
    assert STATUS_DEVIATES not in statuses


def test_table1_with_window_grades_the_truncated_moments(capsys):
    payload = run_json(capsys, "table1", "--a", "3", "--b", "10")
    assert payload["meta"]["table"] == "table2"
    assert [row[0] for row in payload["rows"]] == [15.0, 20.0, 25.0]
    statuses = {row[STATUS] for row in payload["companion"]["rows"]}
    assert statuses <= {STATUS_ERRATA, "ok"}
    assert STATUS_ERRATA in statuses


def test_table1_window_needs_both_bounds(capsys):
    code, _, err = run(capsys, "table1", "--a", "3")
    assert code == EXIT_USAGE
    assert "--b" in err


def test_table3_matches_or_documents_every_cell(capsys):
    payload = run_json(capsys, "table3")
    headers = payload["headers"]
    assert headers == ["T", "r", "pmf", "cdf", "t_pmf", "t_cdf"]
    assert len(payload["rows"]) == 28
    row = next(r for r in payload["rows"] if r[0] == 25.0 and r[1] == 4)
    assert row[2] == pytest.approx(0.05767745832, rel=1e-2)
    low = next(r for r in payload["rows"] if r[0] == 25.0 and r[1] == 1)
    assert low[4] == "undefined" and low[5] == "undefined"
    statuses = [r[STATUS] for r in payload["companion"]["rows"]]
    assert len(statuses) == 112
    assert STATUS_DEVIATES not in statuses


def test_table3_csv_has_a_companion_block(capsys):
    code, out, _ = run(capsys, "table3", "--T-list", "25")
    assert code == EXIT_OK
    primary, companion = out.split("\n\n")
    assert primary.splitlines()[0] == "T,r,pmf,cdf,t_pmf,t_cdf"
    assert companion.splitlines()[0] == ",".join(COMPANION_HEADERS)
    assert len(companion.strip().splitlines()) == 1 + 28


def test_table3_keeps_going_when_the_window_is_empty(capsys):
    code, out, err = run(capsys, "table3", "--T-list", "1e-6,25", "--format", "json")
    assert code == EXIT_OK, err
    payload = json.loads(out)
    tiny = [row for row in payload["rows"] if row[0] == 1e-6]
    assert len(tiny) == 7
    assert all(row[4] == "undefined" and row[5] == "undefined" for row in tiny)
    assert all(row[2] == 0.0 and row[3] == 1.0 for row in tiny)
    wide = next(row for row in payload["rows"] if row[0] == 25.0 and row[1] == 4)
    assert wide[4] == pytest.approx(0.06501441242, rel=1e-8)


def test_empty_horizon_list_gives_header_only_table(capsys):
    payload = run_json(capsys, "table1", "--T-list", "")
    assert payload["rows"] == []
    assert payload["companion"]["rows"] == []


def test_missing_golden_file_is_a_usage_error(capsys, tmp_path):
    missing = tmp_path / "nowhere.csv"
    code, out, err = run(capsys, "table3", "--golden", str(missing))
    assert code == EXIT_USAGE
    assert out == ""
    assert "nowhere.csv" in err


# -------------------------------------------------------
# sample
# -------------------------------------------------------
def test_sample_is_deterministic(capsys):
    first = run(capsys, "sample", "--T", "1", "--n", "5", "--seed", "42")
    second = run(capsys, "sample", "--T", "1", "--n", "5", "--seed", "42")
    assert first[0] == EXIT_OK
    assert first[1] == second[1]


def test_sample_summary_rows(capsys):
    code, out, _ = run(capsys, "sample", "--T", "1", "--n", "100000", "--seed", "7")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert len(lines) == 1 + 100_000 + 2
    summary = dict(line.split(",") for line in lines[-2:])
    assert float(summary["mean"]) == pytest.approx(1.129581778, abs=0.02)
    assert float(summary["variance"]) == pytest.approx(0.2607, abs=0.02)


def test_sample_with_window(capsys):
    frame = run_csv(capsys, "sample", "--T", "25", "--n", "500", "--a", "3", "--b", "10", "--seed", "1")
    values = frame["value"].iloc[:-2].astype(int)
    assert len(values) == 500
    assert values.min() >= 4 and values.max() <= 10


def test_sample_rejects_zero_draws(capsys):
    code, _, _ = run(capsys, "sample", "--T", "1", "--n", "0")
    assert code == EXIT_USAGE


# -------------------------------------------------------
# oracle
# -------------------------------------------------------
def test_oracle_rejects_zero_paths(capsys):
    code, _, _ = run(capsys, "oracle", "--T", "1", "--paths", "0")
    assert code == EXIT_USAGE


def test_oracle_resource_cap(capsys):
    code, out, err = run(capsys, "oracle", "--T", "1", "--paths", "1000000", "--steps", "100000")
    assert code == EXIT_USAGE
    assert out == ""
    assert "cap" in err


def test_oracle_output_ignores_worker_count(capsys):
    argv = ("oracle", "--T", "1", "--paths", "2000", "--steps", "256", "--format", "json")
    code_one, out_one, _ = run(capsys, *argv, "--workers", "1")
    code_three, out_three, _ = run(capsys, *argv, "--workers", "3")
    assert code_one == code_three
    assert code_one in (EXIT_OK, EXIT_FAIL)
    assert out_one == out_three
    payload = json.loads(out_one)
    assert "workers" not in payload["meta"]["flags"]
    assert payload["meta"]["seed"] == 7
    fields = {row[0]: row[1] for row in payload["rows"]}
    assert fields["n"] == 2000
    assert fields["discretization_bias_bound"] == pytest.approx(1.2 / 16)
    assert fields["verdict"] in ("PASS", "FAIL")
    assert payload["meta"]["passed"] == (fields["verdict"] == "PASS")


def test_oracle_verdict_sets_the_exit_code(capsys):
    code, out, _ = run(capsys, "oracle", "--T", "1", "--paths", "500", "--steps", "4", "--format", "json")
    payload = json.loads(out)
    fields = {row[0]: row[1] for row in payload["rows"]}
    assert fields["discretization_bias_bound"] == pytest.approx(0.6)
    assert code == (EXIT_OK if payload["meta"]["passed"] else EXIT_FAIL)


# -------------------------------------------------------
# Entry point
# -------------------------------------------------------
def test_out_flag_writes_file(capsys, tmp_path):
    target = tmp_path / "cdf.csv"
    code, out, _ = run(capsys, "dist", "--T", "25", "--measure", "cdf", "--out", str(target))
    assert code == EXIT_OK
    assert out == ""
    assert target.read_text(encoding="utf-8").startswith("r,cdf\n")


def test_version_and_usage_errors(capsys):
    assert run(capsys, "--version")[0] == EXIT_OK
    assert run(capsys, "frobnicate")[0] == EXIT_USAGE
    assert run(capsys)[0] == EXIT_USAGE
