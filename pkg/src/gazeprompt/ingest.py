"""Fixation CSV ingestion.

Rows are grouped into one scanpath per (image_id, reader_id), ordered by
start time, with duration = end_time - start_time. Bad rows are skipped
and counted rather than failing the whole file; out-of-bounds coordinates
are clamped and counted.
"""

from __future__ import annotations

import csv
import io
import logging
from typing import IO, Iterable, Mapping

from .errors import CsvSchemaError
from .types import Fixation, ImageRecord, IngestConfig, IngestReport, ScanPath

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = ("image_id", "reader_id", "x", "y", "start_time", "end_time")


def _as_text_stream(source: IO[bytes] | IO[str] | str) -> IO[str]:
    if isinstance(source, str):
        return io.StringIO(source)
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8")


def clamp(value: float, lo: float, hi: float) -> float:
    return min(max(value, lo), hi)


def ingest_fixation_csv(
    csv_source: IO[bytes] | IO[str] | str,
    image_index: Mapping[str, ImageRecord],
    config: IngestConfig | None = None,
) -> tuple[list[ScanPath], IngestReport]:
    """Parse a fixation CSV into scanpaths plus a row-accounting report.

    Raises CsvSchemaError when a required column is absent. Row-level
    problems (unparseable numbers, non-positive durations, unknown image
    ids) skip the row and bump the matching report counter.
    """
    config = config or IngestConfig()
    stream = _as_text_stream(csv_source)
    reader = csv.DictReader(stream)
    header = reader.fieldnames or []
    columns = {field: config.columns[field] for field in REQUIRED_FIELDS}
    for field, column in columns.items():
        if column not in header:
            raise CsvSchemaError(column)

    report = IngestReport()
    # (image_id, reader_id) -> list of (start, end, x, y) sort rows
    groups: dict[tuple[str, str], list[tuple[float, float, float, float]]] = {}
    for line_no, row in enumerate(reader, start=2):
        report.rows += 1
        image_id = (row.get(columns["image_id"]) or "").strip()
        reader_id = (row.get(columns["reader_id"]) or "").strip()
        try:
            x = float(row[columns["x"]])
            y = float(row[columns["y"]])
            start = float(row[columns["start_time"]])
            end = float(row[columns["end_time"]])
        except (TypeError, ValueError, KeyError):
            logger.warning("line %d: non-numeric cell, row skipped", line_no)
            report.skipped_parse += 1
            continue
        image = image_index.get(image_id)
        if image is None:
            logger.warning("line %d: unknown image_id %r, row skipped", line_no, image_id)
            report.skipped_unknown_image += 1
            continue
        duration = end - start
        if duration <= 0:
            logger.warning("line %d: non-positive duration %s, row skipped", line_no, duration)
            report.skipped_duration += 1
            continue
        if config.normalized_coordinates:
            x *= image.width
            y *= image.height
        clamped_x = clamp(x, 0.0, image.width - 1.0)
        clamped_y = clamp(y, 0.0, image.height - 1.0)
        if clamped_x != x or clamped_y != y:
            report.clamped += 1
        report.kept += 1
        groups.setdefault((image_id, reader_id), []).append((start, end, clamped_x, clamped_y))

    scanpaths = []
    for (image_id, reader_id), rows in sorted(groups.items()):
        # full-tuple sort so equal start times still order deterministically
        rows.sort()
        fixations = tuple(
            Fixation(x=x, y=y, duration=end - start, seq=seq)
            for seq, (start, end, x, y) in enumerate(rows, start=1)
        )
        scanpaths.append(
            ScanPath(image_id=image_id, reader_id=reader_id, fixations=fixations, split=config.split)
        )
    return scanpaths, report


def scanpaths_to_csv(scanpaths: Iterable[ScanPath], config: IngestConfig | None = None) -> str:
    """Serialize scanpaths back to the fixation CSV layout.

    Start times restart at 0 per scanpath and accumulate durations, so the
    round trip is exact only when the cumulative sums are exactly
    representable (e.g. dyadic durations).
    """
    config = config or IngestConfig()
    cols = config.columns
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(
        [cols["image_id"], cols["reader_id"], cols["x"], cols["y"], cols["start_time"], cols["end_time"]]
    )
    for sp in scanpaths:
        start = 0.0
        for fix in sp.fixations:
            end = start + fix.duration
            writer.writerow([sp.image_id, sp.reader_id, repr(fix.x), repr(fix.y), repr(start), repr(end)])
            start = end
    return out.getvalue()
