from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel

from mzkit.models.report import TableRecord
from mzkit.repositories.base import PathLike, render_csv, write_csv, write_json

Row = Union[TableRecord, dict[str, Any]]


def _plain(rows: Sequence[Row]) -> list[dict[str, Any]]:
    return [r.csv_row() if isinstance(r, TableRecord) else r for r in rows]


class ReportRepository:
    """Writes reports and ledgers as JSON and tables as CSV under an output path.

    The file format follows the suffix of the path: ``.csv`` gives a table,
    anything else JSON.
    """

    def write_report(self, path: PathLike, report: Union[BaseModel, dict[str, Any]], header: dict[str, Any]) -> Path:
        return write_json(path, report, header)

    def write_table(self, path: PathLike, rows: Sequence[Row], header: dict[str, Any]) -> Path:
        return write_csv(path, _plain(rows), header)

    def render_table(self, rows: Sequence[Row], header: dict[str, Any]) -> str:
        """Same text as ``write_table``, for standard output."""
        return render_csv(_plain(rows), header)

    def write_rows(
        self,
        path: PathLike,
        rows: Sequence[TableRecord],
        header: dict[str, Any],
        key: str = "rows",
        extra: Optional[dict[str, Any]] = None,
    ) -> Path:
        """Table rows to CSV, or to JSON under ``key`` together with ``extra`` fields."""
        if Path(path).suffix.lower() == ".csv":
            return self.write_table(path, rows, header)
        payload = {key: [r.model_dump(mode="json") for r in rows], **(extra or {})}
        return write_json(path, payload, header)

    def write_coefficients(self, path: PathLike, labels: Sequence[str], coeffs: np.ndarray, header: dict[str, Any]) -> Path:
        """One row per basis function, one column per monomial (graded-lex)."""
        rows = [
            {"basis": j, **{label: float(c) for label, c in zip(labels, coeffs[j])}} for j in range(coeffs.shape[0])
        ]
        return write_csv(path, rows, header, columns=["basis", *labels])
