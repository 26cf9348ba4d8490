"""
Golden Table Service
Loads the bundled printed-table values and grades computed cells against them
Provides: load_golden_table, golden_cells, grade_cell, compare_cells
"""
import logging
import math
import os
from typing import Callable, Dict, List, Optional, Tuple, Union

import pandas as pd

from ddwpr.core.errors import GoldenDataError

logger = logging.getLogger(__name__)

GOLDEN_PATH_DEFAULT = os.path.join(os.path.dirname(__file__), "..", "data", "golden_tables.csv")

GOLDEN_COLUMNS = [
    "table_id", "T", "r", "a", "b", "quantity",
    "paper_value", "tolerance_rel", "tolerance_abs", "errata_note",
]

COMPANION_HEADERS = [
    "table_id", "T", "r", "a", "b", "quantity",
    "computed", "paper_value", "abs_deviation", "rel_deviation", "status", "errata_note",
]

STATUS_OK = "ok"
STATUS_DEVIATES = "deviates"
STATUS_ERRATA = "errata"

Cell = Union[float, str]


def load_golden_table(path: Optional[str] = None) -> pd.DataFrame:
    """Read the golden-value CSV; raises GoldenDataError naming the path when it is unusable."""
    path = os.path.abspath(path or GOLDEN_PATH_DEFAULT)
    if not os.path.exists(path):
        raise GoldenDataError("golden data file not found", path)
    try:
        frame = pd.read_csv(path, dtype={"table_id": str, "quantity": str, "errata_note": str})
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise GoldenDataError(f"golden data file is not valid CSV ({e})", path)

    missing = [c for c in GOLDEN_COLUMNS if c not in frame.columns]
    if missing:
        raise GoldenDataError(f"golden data file lacks columns {missing}", path)
    frame["errata_note"] = frame["errata_note"].fillna("")
    logger.info(f"loaded {len(frame)} golden cells from {path}")
    return frame


def golden_cells(frame: pd.DataFrame, table_id: str, T_values: Optional[List[float]] = None) -> pd.DataFrame:
    """Rows of one table, optionally restricted to the requested horizons, in file order."""
    cells = frame[frame["table_id"] == table_id]
    if T_values is not None:
        cells = cells[cells["T"].astype(float).isin([float(t) for t in T_values])]
    return cells


def grade_cell(computed: Cell, paper_value: float, tolerance_rel: float, tolerance_abs: float,
               errata_note: str = "") -> Tuple[Cell, Cell, str]:
    """
    Return (abs_deviation, rel_deviation, status) for one cell.

    A cell is ok when |computed - printed| <= max(tolerance_rel * |printed|, tolerance_abs).
    Cells outside tolerance are errata when the file documents them, deviates otherwise.
    """
    if isinstance(computed, str) or computed is None or math.isnan(computed):
        return "undefined", "undefined", STATUS_ERRATA if errata_note else STATUS_DEVIATES
    abs_dev = abs(computed - paper_value)
    rel_dev: Cell = abs_dev / abs(paper_value) if paper_value != 0 else "undefined"
    if abs_dev <= max(tolerance_rel * abs(paper_value), tolerance_abs):
        return abs_dev, rel_dev, STATUS_OK
    return abs_dev, rel_dev, STATUS_ERRATA if errata_note else STATUS_DEVIATES


def _optional_int(value) -> Cell:
    return "" if pd.isna(value) else int(value)


def compare_cells(cells: pd.DataFrame, lookup: Callable[[pd.Series], Cell]) -> List[List[Cell]]:
    """Grade each golden row against lookup(row); rows follow COMPANION_HEADERS."""
    rows: List[List[Cell]] = []
    counts: Dict[str, int] = {STATUS_OK: 0, STATUS_DEVIATES: 0, STATUS_ERRATA: 0}
    for _, cell in cells.iterrows():
        computed = lookup(cell)
        abs_dev, rel_dev, status = grade_cell(computed, float(cell["paper_value"]),
                                              float(cell["tolerance_rel"]), float(cell["tolerance_abs"]),
                                              cell["errata_note"])
        counts[status] += 1
        if status == STATUS_DEVIATES:
            logger.warning(f"{cell['table_id']} T={cell['T']} {cell['quantity']}: "
                           f"computed {computed} vs printed {cell['paper_value']}")
        rows.append([
            cell["table_id"], float(cell["T"]), _optional_int(cell["r"]), _optional_int(cell["a"]),
            _optional_int(cell["b"]), cell["quantity"], computed, float(cell["paper_value"]),
            abs_dev, rel_dev, status, cell["errata_note"],
        ])
    logger.info(f"golden comparison: {counts}")
    return rows
