"""
Tests for the bundled printed-table values and the cell grading rules
"""
import math

import mpmath
import pandas as pd
import pytest

from ddwpr import ddwpr_dist as dd
from ddwpr import tddwpr_dist as td
from ddwpr.core.errors import GoldenDataError
from ddwpr.services.golden_tables import (
    GOLDEN_COLUMNS,
    STATUS_DEVIATES,
    STATUS_ERRATA,
    STATUS_OK,
    compare_cells,
    golden_cells,
    grade_cell,
    load_golden_table,
)


def printed_range_cdf(h: float, T: float, pi: float = 3.14) -> mpmath.mpf:
    """The odd-square cdf series evaluated with a rounded pi, as the printed tables were."""
    if h <= 0:
        return mpmath.mpf(0)
    with mpmath.workdps(40):
        pi = mpmath.mpf(pi)
        x = pi ** 2 * T / (2 * mpmath.mpf(h) ** 2)
        total = mpmath.mpf(0)
        for m in range(1, 100_000, 2):
            term = (8 / (m * m * pi ** 2) + 16 * x / pi ** 2) * mpmath.exp(-m * m * x)
            total += term
            if term <= total * mpmath.mpf("1e-40"):
                break
        return total


# -------------------------------------------------------
# Loading
# -------------------------------------------------------
def test_bundled_table_loads():
    frame = load_golden_table()
    assert list(frame.columns) == GOLDEN_COLUMNS
    assert len(golden_cells(frame, "table1")) == 27
    assert len(golden_cells(frame, "table2")) == 27
    assert len(golden_cells(frame, "table3")) == 112
    assert len(golden_cells(frame, "table3", [25.0, 50.0])) == 56


def test_missing_file_names_the_path(tmp_path):
    missing = tmp_path / "absent.csv"
    with pytest.raises(GoldenDataError, match="absent.csv") as info:
        load_golden_table(str(missing))
    assert info.value.path == str(missing)


def test_file_without_required_columns(tmp_path):
    path = tmp_path / "golden.csv"
    pd.DataFrame({"table_id": ["table1"], "T": [1.0]}).to_csv(path, index=False)
    with pytest.raises(GoldenDataError, match="lacks columns"):
        load_golden_table(str(path))


def test_empty_file_is_rejected(tmp_path):
    path = tmp_path / "golden.csv"
    path.write_text("", encoding="utf-8")
    with pytest.raises(GoldenDataError):
        load_golden_table(str(path))


# -------------------------------------------------------
# Grading
# -------------------------------------------------------
def test_grade_within_tolerance():
    abs_dev, rel_dev, status = grade_cell(1.0005, 1.0, 1e-3, 0.0)
    assert status == STATUS_OK
    assert abs_dev == pytest.approx(5e-4)
    assert rel_dev == pytest.approx(5e-4)


def test_grade_absolute_floor():
    assert grade_cell(5.29e-52, 6.0e-52, 0.01, 1e-9)[2] == STATUS_OK


def test_grade_outside_tolerance():
    assert grade_cell(1.1, 1.0, 1e-3, 0.0)[2] == STATUS_DEVIATES
    assert grade_cell(1.1, 1.0, 1e-3, 0.0, "known misprint")[2] == STATUS_ERRATA


def test_grade_undefined_cells():
    assert grade_cell("undefined", 0.5, 0.01, 0.0) == ("undefined", "undefined", STATUS_DEVIATES)
    assert grade_cell(math.nan, 0.5, 0.01, 0.0, "outside window")[2] == STATUS_ERRATA


def test_grade_zero_printed_value():
    abs_dev, rel_dev, status = grade_cell(0.0, 0.0, 0.01, 1e-9)
    assert status == STATUS_OK and abs_dev == 0.0 and rel_dev == "undefined"


def test_compare_cells_rows():
    frame = load_golden_table()
    cells = golden_cells(frame, "table1", [1.0])
    rows = compare_cells(cells, lambda cell: float(cell["paper_value"]))
    assert len(rows) == 9
    assert all(row[10] == STATUS_OK for row in rows)
    assert rows[0][:6] == ["table1", 1.0, "", "", "", "raw1"]


# -------------------------------------------------------
# Where the printed values come from
# -------------------------------------------------------
@pytest.mark.parametrize("T,r,printed", [
    (100.0, 1, 6.000188914e-52),
    (25.0, 5, 0.2075564212),
])
def test_printed_cdf_cells_use_rounded_pi(T, r, printed):
    assert float(printed_range_cdf(r + 1, T)) == pytest.approx(printed, rel=1e-6)


def test_printed_pmf_cell_uses_rounded_pi():
    value = printed_range_cdf(3, 25.0) - printed_range_cdf(2, 25.0)
    assert float(value) == pytest.approx(2.601247475e-5, rel=1e-6)


def test_printed_mean_uses_rounded_pi():
    masses = [printed_range_cdf(r + 1, 1.0) - printed_range_cdf(r, 1.0) for r in range(0, 20)]
    mean = mpmath.fsum(r * m for r, m in enumerate(masses))
    assert float(mean) == pytest.approx(1.129581778, rel=1e-6)
    # exact pi moves the mean by about 4e-4
    assert dd.moments(dd.DdwprSpec(T=1.0)).mean == pytest.approx(1.129581778, rel=1e-3)


def test_rounded_pi_gap_grows_with_horizon_over_level():
    exact = dd.cdf(dd.DdwprSpec(T=100.0), 1)
    printed = float(printed_range_cdf(2, 100.0))
    assert printed / exact - 1.0 == pytest.approx(math.expm1(0.005 * 100.0 / 4.0), rel=0.05)


def test_transposed_cells_belong_to_the_neighbouring_row():
    frame = load_golden_table()
    cells = golden_cells(frame, "table3", [75.0])
    printed = cells[cells["quantity"] == "t_cdf"].set_index("r")["paper_value"]
    spec = td.TddwprSpec(base=dd.DdwprSpec(T=75.0), a=3, b=10)
    assert printed[4] > printed[5]
    assert td.t_cdf(spec, 4) < td.t_cdf(spec, 5)
    assert printed[4] == pytest.approx(td.t_cdf(spec, 5), rel=0.04)
    assert printed[5] == pytest.approx(td.t_cdf(spec, 4), rel=0.04)
