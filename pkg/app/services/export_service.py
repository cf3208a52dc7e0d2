"""Service for exporting convergence records and equilibrium reports."""

import os
from typing import Dict, List, Optional

import pandas as pd
import polars as pl
from openpyxl import Workbook
from openpyxl.styles import Font, PatternFill, Alignment, Border, Side
from openpyxl.utils.dataframe import dataframe_to_rows
from pydantic import BaseModel
import logging

from app.config import get_settings
from app.models.schemas import ConvergenceRecord, EquilibriumReport

logger = logging.getLogger(__name__)
settings = get_settings()

RECORD_COLUMNS = ["n", "exact_log", "predicted_log", "rel_error", "error"]

HEADER_FONT = Font(bold=True, color="FFFFFF")
HEADER_FILL = PatternFill(start_color="366092", end_color="366092", fill_type="solid")
THIN_BORDER = Border(
    left=Side(style='thin'),
    right=Side(style='thin'),
    top=Side(style='thin'),
    bottom=Side(style='thin')
)


def _row_errors(record: ConvergenceRecord) -> List[Optional[str]]:
    return list(record.errors) or [None] * len(record.n_grid)


def record_frame(record: ConvergenceRecord) -> pl.DataFrame:
    """ConvergenceRecord as a polars frame with the fixed CSV columns; failed rows carry a message."""
    return pl.DataFrame({
        "n": record.n_grid,
        "exact_log": record.exact_log,
        "predicted_log": record.predicted_log,
        "rel_error": record.rel_error,
        "error": _row_errors(record),
    }, schema={
        "n": pl.Int64, "exact_log": pl.Float64, "predicted_log": pl.Float64,
        "rel_error": pl.Float64, "error": pl.Utf8,
    })


class ExportService:
    """Service for writing CSV, xlsx and JSON artifacts."""

    def __init__(self, export_dir: Optional[str] = None):
        self.export_dir = export_dir or settings.export_dir

    def _ensure_export_directory(self):
        """Ensure export directory exists."""
        if not os.path.exists(self.export_dir):
            os.makedirs(self.export_dir, exist_ok=True)

    def _resolve(self, path: Optional[str], default_name: str) -> str:
        if path:
            parent = os.path.dirname(path)
            if parent:
                os.makedirs(parent, exist_ok=True)
            return path
        self._ensure_export_directory()
        return os.path.join(self.export_dir, default_name)

    @staticmethod
    def _result(filepath: str) -> Dict:
        file_size_mb = os.path.getsize(filepath) / (1024 * 1024)
        return {
            "success": True,
            "file_path": filepath,
            "file_size_mb": round(file_size_mb, 2)
        }

    def record_csv(self, record: ConvergenceRecord) -> str:
        """CSV text of a record, rows in grid order."""
        return record_frame(record).write_csv()

    def export_record_csv(self, record: ConvergenceRecord, path: Optional[str] = None) -> Dict:
        filepath = self._resolve(path, f"{record.law}_sweep.csv")
        record_frame(record).write_csv(filepath)
        logger.info(f"Wrote {len(record.n_grid)} rows for {record.law} to {filepath}")
        return self._result(filepath)

    def export_record_xlsx(self, record: ConvergenceRecord, params: Optional[Dict[str, float]] = None,
                           path: Optional[str] = None) -> Dict:
        """Export a convergence record to a styled workbook."""
        filepath = self._resolve(path, f"{record.law}_sweep.xlsx")
        logger.info(f"Exporting {record.law} sweep to {filepath}")

        evaluated = [r for r, err in zip(record.rel_error, _row_errors(record)) if err is None]
        wb = Workbook()
        wb.remove(wb.active)
        self._add_record_sheet(wb, record)
        self._add_summary_sheet(wb, f"Convergence sweep: {record.law}", [
            ("Law:", record.law),
            ("Grid points:", len(record.n_grid)),
            ("First n:", record.n_grid[0] if record.n_grid else None),
            ("Last n:", record.n_grid[-1] if record.n_grid else None),
            ("Final relative error:", evaluated[-1] if evaluated else None),
            ("Failed rows:", len(record.n_grid) - len(evaluated)),
            ("Monotone decay:", "yes" if record.monotone else "no"),
        ] + [(f"{key}:", value) for key, value in sorted((params or {}).items())])
        wb.save(filepath)
        return self._result(filepath)

    def export_equilibrium_xlsx(self, report: EquilibriumReport, path: Optional[str] = None) -> Dict:
        """Export an equilibrium report to a styled workbook."""
        filepath = self._resolve(path, f"equilibrium_{len(report.gammas)}_bars.xlsx")
        logger.info(f"Exporting equilibrium for {len(report.gammas)} bar(s) to {filepath}")

        wb = Workbook()
        wb.remove(wb.active)

        ws = wb.create_sheet("Bars")
        df = pd.DataFrame({
            "Bar": list(range(1, len(report.gammas) + 1)),
            "Length (gamma)": report.gammas,
            "Gap before (alpha)": report.alphas,
        })
        self._write_frame(ws, df, widths=[8, 18, 20])

        ws = wb.create_sheet("Hessian")
        df = pd.DataFrame({
            "Index": list(range(1, len(report.hessian_eigs) + 1)),
            "Eigenvalue": report.hessian_eigs,
        })
        self._write_frame(ws, df, widths=[8, 22])

        rows = [
            ("Free energy F:", report.F),
            ("Gradient norm:", report.grad_norm),
            ("Starts:", report.starts),
            ("Multi-start spread:", report.multistart_spread),
            ("Starts agree:", "yes" if report.agreement else "no"),
            ("Last gap:", 1.0 - sum(report.alphas)),
        ]
        if report.lambda_gap is not None:
            rows.append(("lambda (F0 - F):", report.lambda_gap))
        self._add_summary_sheet(wb, "Equilibrium of bars of charge", rows)
        wb.save(filepath)
        return self._result(filepath)

    def write_json(self, model: BaseModel, path: str) -> Dict:
        filepath = self._resolve(path, "")
        with open(filepath, "w", encoding="utf-8") as fh:
            fh.write(model.model_dump_json(by_alias=True, indent=2))
        logger.info(f"Wrote {type(model).__name__} to {filepath}")
        return self._result(filepath)

    def _add_record_sheet(self, wb: Workbook, record: ConvergenceRecord):
        ws = wb.create_sheet("Sweep")
        df = pd.DataFrame({
            "n": record.n_grid,
            "Exact log": record.exact_log,
            "Predicted log": record.predicted_log,
            "Relative error": record.rel_error,
            "Error": _row_errors(record),
        })
        # empty cells for rows that failed to evaluate
        df = df.astype(object).where(df.notna(), None)
        self._write_frame(ws, df, widths=[10, 20, 20, 18, 40])
        for row in ws.iter_rows(min_row=2):
            for cell in row[1:3]:
                cell.number_format = '0.000000000'
            row[3].number_format = '0.00E+00'

    def _write_frame(self, ws, df: pd.DataFrame, widths):
        for r in dataframe_to_rows(df, index=False, header=True):
            ws.append(r)

        # Apply header formatting
        for cell in ws[1]:
            cell.font = HEADER_FONT
            cell.fill = HEADER_FILL
            cell.alignment = Alignment(horizontal="center")

        for column, width in zip("ABCDEFGH", widths):
            ws.column_dimensions[column].width = width

    def _add_summary_sheet(self, wb: Workbook, title: str, rows):
        """Add summary sheet as the first sheet."""
        ws = wb.create_sheet("Summary", 0)

        ws.merge_cells('A1:E1')
        ws['A1'] = f"{settings.app_name}: {title}"
        ws['A1'].font = Font(size=16, bold=True)
        ws['A1'].alignment = Alignment(horizontal="center")

        first = 3
        for offset, (label, value) in enumerate(rows):
            ws.cell(row=first + offset, column=1, value=label)
            ws.cell(row=first + offset, column=2, value=value)

        ws.column_dimensions['A'].width = 25
        ws.column_dimensions['B'].width = 22

        for row in ws.iter_rows(min_row=first, max_row=first + len(rows) - 1, min_col=1, max_col=2):
            for cell in row:
                if cell.value is not None:
                    cell.border = THIN_BORDER


# Global service instance
export_service = ExportService()
