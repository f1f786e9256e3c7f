"""Baseline-relative score scaling and table aggregation.

Raw metric scores are divided by the baseline model's score on the same
(metric, task, split) and multiplied by 100, making metrics directly
comparable. Each (model, method) row reduces to four task-split cells
(mean of its scaled metrics), an overall mean of the four cells, and
deltas against the model's base-method row.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import IO, Iterable, Mapping, Sequence

from .errors import ScoreValidationError

TASKS = ("report", "diagnosis")
SPLITS = ("alpha", "beta")
#: (task, split) column order for every emitted document
COLUMN_ORDER = (
    ("report", "alpha"),
    ("report", "beta"),
    ("diagnosis", "alpha"),
    ("diagnosis", "beta"),
)
SCORES_CSV_COLUMNS = ("model_id", "method_id", "metric_id", "task", "split", "value")


@dataclass(frozen=True)
class RawScore:
    model_id: str
    method_id: str
    metric_id: str
    task: str
    split: str
    value: float

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}, got {self.split!r}")
        if not math.isfinite(self.value) or self.value < 0:
            raise ValueError(f"value must be finite and >= 0, got {self.value}")

    @property
    def key(self) -> tuple[str, str, str, str, str]:
        return (self.model_id, self.method_id, self.metric_id, self.task, self.split)


@dataclass(frozen=True)
class ScaledCell:
    model_id: str
    method_id: str
    metric_id: str
    task: str
    split: str
    scaled: float


@dataclass(frozen=True)
class TableRow:
    model_id: str
    method_id: str
    cells: Mapping[tuple[str, str], float]
    overall: float
    deltas: Mapping[tuple[str, str], float] | None = None
    overall_delta: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "cells", dict(self.cells))
        if self.deltas is not None:
            object.__setattr__(self, "deltas", dict(self.deltas))


@dataclass(frozen=True)
class ScoreTable:
    rows: tuple[TableRow, ...]
    base_method_id: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(self.rows))


def read_scores_csv(source: str | IO[str]) -> list[RawScore]:
    """Parse the scores CSV; duplicate keys are a validation error."""
    stream = io.StringIO(source) if isinstance(source, str) else source
    reader = csv.DictReader(stream)
    header = reader.fieldnames or []
    for column in SCORES_CSV_COLUMNS:
        if column not in header:
            raise ScoreValidationError(f"scores CSV is missing required column {column!r}")
    scores: list[RawScore] = []
    seen: set[tuple[str, str, str, str, str]] = set()
    for line_no, row in enumerate(reader, start=2):
        try:
            score = RawScore(
                model_id=row["model_id"].strip(),
                method_id=row["method_id"].strip(),
                metric_id=row["metric_id"].strip(),
                task=row["task"].strip(),
                split=row["split"].strip(),
                value=float(row["value"]),
            )
        except (ValueError, AttributeError, KeyError) as exc:
            raise ScoreValidationError(f"scores CSV line {line_no}: {exc}") from exc
        if score.key in seen:
            raise ScoreValidationError(f"scores CSV line {line_no}: duplicate key {score.key}")
        seen.add(score.key)
        scores.append(score)
    return scores


def scale_scores(raw: Iterable[RawScore], baseline_model_id: str) -> list[ScaledCell]:
    """Scale every raw score by the baseline model's score on the same metric.

    The baseline must cover every (metric, task, split) present, with
    positive values; its own cells scale to exactly 100.
    """
    raw = list(raw)
    baseline: dict[tuple[str, str, str], float] = {}
    for score in raw:
        if score.model_id != baseline_model_id:
            continue
        key = (score.metric_id, score.task, score.split)
        if key in baseline and baseline[key] != score.value:
            raise ScoreValidationError(
                f"baseline model {baseline_model_id!r} has conflicting values for {key}"
            )
        baseline[key] = score.value
    missing = sorted(
        {(s.metric_id, s.task, s.split) for s in raw} - set(baseline)
    )
    if missing:
        raise ScoreValidationError(
            f"baseline model {baseline_model_id!r} is missing scores for: "
            + ", ".join(f"(metric={m}, task={t}, split={s})" for m, t, s in missing)
        )
    zeros = sorted(key for key, value in baseline.items() if value == 0)
    if zeros:
        raise ScoreValidationError(
            f"baseline model {baseline_model_id!r} has zero scores (scaling undefined) for: "
            + ", ".join(f"(metric={m}, task={t}, split={s})" for m, t, s in zeros)
        )
    return [
        ScaledCell(
            model_id=s.model_id,
            method_id=s.method_id,
            metric_id=s.metric_id,
            task=s.task,
            split=s.split,
            scaled=s.value / baseline[(s.metric_id, s.task, s.split)] * 100.0,
        )
        for s in raw
    ]


def aggregate_table(cells: Iterable[ScaledCell], base_method_id: str = "base") -> ScoreTable:
    """Reduce scaled cells to one row per (model, method).

    Each task-split cell is the mean of that row's scaled metrics; overall
    is the mean of the four cells; deltas compare against the model's
    ``base_method_id`` row when one exists. Rows keep first-appearance
    order.
    """
    cells = list(cells)
    grouped: dict[tuple[str, str], dict[tuple[str, str], list[float]]] = {}
    order: list[tuple[str, str]] = []
    for cell in cells:
        row_key = (cell.model_id, cell.method_id)
        if row_key not in grouped:
            grouped[row_key] = {}
            order.append(row_key)
        grouped[row_key].setdefault((cell.task, cell.split), []).append(cell.scaled)

    reduced: dict[tuple[str, str], dict[tuple[str, str], float]] = {}
    for row_key, by_column in grouped.items():
        missing = [col for col in COLUMN_ORDER if col not in by_column]
        if missing:
            model, method = row_key
            raise ScoreValidationError(
                f"row (model={model}, method={method}) is missing cells: "
                + ", ".join(f"(task={t}, split={s})" for t, s in missing)
            )
        reduced[row_key] = {col: sum(vals) / len(vals) for col, vals in by_column.items()}

    rows: list[TableRow] = []
    for model_id, method_id in order:
        row_cells = reduced[(model_id, method_id)]
        overall = sum(row_cells[col] for col in COLUMN_ORDER) / len(COLUMN_ORDER)
        base_cells = reduced.get((model_id, base_method_id))
        deltas = None
        overall_delta = None
        if base_cells is not None:
            deltas = {col: row_cells[col] - base_cells[col] for col in COLUMN_ORDER}
            base_overall = sum(base_cells[col] for col in COLUMN_ORDER) / len(COLUMN_ORDER)
            overall_delta = overall - base_overall
        rows.append(
            TableRow(
                model_id=model_id,
                method_id=method_id,
                cells=row_cells,
                overall=overall,
                deltas=deltas,
                overall_delta=overall_delta,
            )
        )
    return ScoreTable(rows=tuple(rows), base_method_id=base_method_id)


def round_half_up(value: float, places: int = 1) -> Decimal:
    quantum = Decimal(1).scaleb(-places)
    return Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP)


def _fmt(value: float) -> str:
    return str(round_half_up(value))


def _fmt_delta(value: float) -> str:
    rounded = round_half_up(value)
    if rounded == 0:
        rounded = abs(rounded)  # avoid "-0.0"
    sign = "+" if rounded >= 0 else ""
    return f"{sign}{rounded}"


def _best_by_column(table: ScoreTable, exclude: Sequence[str]) -> dict[object, tuple[str, str] | None]:
    """Row key holding the max value per column among non-excluded models."""
    best: dict[object, tuple[str, str] | None] = {col: None for col in COLUMN_ORDER}
    best["overall"] = None
    candidates = [row for row in table.rows if row.model_id not in exclude]
    for col in COLUMN_ORDER:
        winner = max(candidates, key=lambda r: r.cells[col], default=None)
        best[col] = (winner.model_id, winner.method_id) if winner else None
    winner = max(candidates, key=lambda r: r.overall, default=None)
    best["overall"] = (winner.model_id, winner.method_id) if winner else None
    return best


def emit_markdown(table: ScoreTable, exclude_from_best: Sequence[str] = ()) -> str:
    """Markdown table with display rounding; best per column in bold."""
    best = _best_by_column(table, exclude_from_best)
    header = "| Model | Method | Report Alpha | Report Beta | Diagnosis Alpha | Diagnosis Beta | Overall |"
    separator = "| --- | --- | ---: | ---: | ---: | ---: | ---: |"
    lines = [header, separator]
    for row in table.rows:
        row_key = (row.model_id, row.method_id)
        values = []
        for col in COLUMN_ORDER:
            text = _fmt(row.cells[col])
            if best[col] == row_key:
                text = f"**{text}**"
            if row.deltas is not None and row.method_id != table.base_method_id:
                text += f" ({_fmt_delta(row.deltas[col])})"
            values.append(text)
        overall_text = _fmt(row.overall)
        if best["overall"] == row_key:
            overall_text = f"**{overall_text}**"
        if row.overall_delta is not None and row.method_id != table.base_method_id:
            overall_text += f" ({_fmt_delta(row.overall_delta)})"
        lines.append(
            "| " + " | ".join([row.model_id, row.method_id, *values, overall_text]) + " |"
        )
    return "\n".join(lines) + "\n"


def emit_csv(table: ScoreTable) -> str:
    """Full-precision CSV so emitted values re-parse identically."""
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(
        [
            "model_id",
            "method_id",
            "report_alpha",
            "report_beta",
            "diagnosis_alpha",
            "diagnosis_beta",
            "overall",
        ]
    )
    for row in table.rows:
        writer.writerow(
            [
                row.model_id,
                row.method_id,
                *(repr(row.cells[col]) for col in COLUMN_ORDER),
                repr(row.overall),
            ]
        )
    return out.getvalue()


def parse_table_csv(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for record in reader:
        rows.append(
            {
                "model_id": record["model_id"],
                "method_id": record["method_id"],
                "cells": {
                    col: float(record[f"{col[0]}_{col[1]}"]) for col in COLUMN_ORDER
                },
                "overall": float(record["overall"]),
            }
        )
    return rows


def emit_report(table: ScoreTable, format: str, exclude_from_best: Sequence[str] = ()) -> str:
    if format == "markdown":
        return emit_markdown(table, exclude_from_best)
    if format == "csv":
        return emit_csv(table)
    raise ValueError(f"format must be 'csv' or 'markdown', got {format!r}")
