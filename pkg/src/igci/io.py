"""File formats, lag alignment, and manifest evaluation.

Data files are plain text: one row per observation, columns separated by
whitespace or commas, '#' starts a comment line. Manifests are CSV with
columns id, path, x_col, y_col, truth, weight (the last two optional);
paths are resolved relative to the manifest's directory.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import Direction, ReferenceFamily, SamplePair
from .errors import (
    ConstantInputError,
    EmptyManifestError,
    IgciError,
    ParseError,
    TooFewRowsError,
)
from .estimators import EstimatorKind, IgciReport, igci_score

__all__ = [
    "LagAlignment",
    "ManifestEntry",
    "PairsManifest",
    "EntryReport",
    "ManifestSummary",
    "load_table",
    "load_pair",
    "write_pair",
    "align_lag",
    "load_manifest",
    "evaluate_manifest",
    "format_json_lines",
    "format_tsv",
]


def _tokenize(line: str) -> list:
    return [t for t in (line.split(",") if "," in line else line.split()) if t != ""]


def load_table(path) -> np.ndarray:
    """Read a whole numeric table; every data row must have the same width."""
    path = Path(path)
    rows = []
    width = None
    try:
        handle = path.open("r", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from None
    with handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = _tokenize(line)
            if width is None:
                width = len(tokens)
            elif len(tokens) != width:
                raise ParseError(f"{path}:{lineno}: expected {width} columns, found {len(tokens)}")
            try:
                rows.append([float(t) for t in tokens])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise TooFewRowsError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def load_pair(path, x_col: int = 0, y_col: int = 1) -> SamplePair:
    """Load two columns as a SamplePair.

    Rows with a non-finite value in either chosen column are dropped; a
    single warning reports how many. Raises ParseError when a column is
    missing and TooFewRowsError when fewer than 3 usable rows remain.
    """
    table = load_table(path)
    ncols = table.shape[1]
    for col in (x_col, y_col):
        if not 0 <= col < ncols:
            raise ParseError(f"{path}: column {col} not present (rows have {ncols} columns)")
    x = table[:, x_col]
    y = table[:, y_col]
    keep = np.isfinite(x) & np.isfinite(y)
    dropped = int(keep.size - np.count_nonzero(keep))
    if dropped:
        warnings.warn(f"{path}: dropped {dropped} rows with non-finite values", stacklevel=2)
        x = x[keep]
        y = y[keep]
    if x.size < 3:
        raise TooFewRowsError(f"{path}: only {x.size} usable rows")
    return SamplePair(x, y)


def write_pair(path, pair: SamplePair) -> None:
    """Write a pair as two tab-separated columns, 17 significant digits.

    That precision makes the round trip through text bit-exact for float64.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for a, b in zip(pair.x, pair.y):
            handle.write(f"{a:.17g}\t{b:.17g}\n")


@dataclass(frozen=True)
class LagAlignment:
    lag: int
    correlation: float
    overlap_length: int


def align_lag(a, b, max_lag: int) -> LagAlignment:
    """Find the integer shift of b that best correlates the two series.

    Candidate lags L in [-max_lag, max_lag] compare a[i] against b[i + L];
    a positive result means b lags behind a. The winner maximizes Pearson
    correlation, with ties broken toward the smallest |L| (then the
    smaller signed L). Lags whose overlap is constant or shorter than 3
    are skipped; if every lag is skipped the series cannot be aligned.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise ParseError("series must be one-dimensional")
    max_lag = int(max_lag)
    if max_lag < 0:
        raise ValueError("max_lag must be nonnegative")
    if a.size < max_lag + 3 or b.size < max_lag + 3:
        raise TooFewRowsError(
            f"series of lengths {a.size} and {b.size} are too short for max_lag {max_lag}"
        )
    best: Optional[LagAlignment] = None
    for lag in sorted(range(-max_lag, max_lag + 1), key=lambda L: (abs(L), L)):
        start = max(0, -lag)
        stop = min(a.size, b.size - lag)
        if stop - start < 3:
            continue
        seg_a = a[start:stop]
        seg_b = b[start + lag : stop + lag]
        if seg_a.std() == 0.0 or seg_b.std() == 0.0:
            continue
        corr = float(np.corrcoef(seg_a, seg_b)[0, 1])
        if best is None or corr > best.correlation:
            best = LagAlignment(lag=lag, correlation=corr, overlap_length=stop - start)
    if best is None:
        raise ConstantInputError("every candidate overlap is constant; alignment undefined")
    return best


_TRUTH_TOKENS = {
    "x->y": Direction.X_TO_Y,
    "y->x": Direction.Y_TO_X,
    "?": None,
    "unknown": None,
    "": None,
}


@dataclass(frozen=True)
class ManifestEntry:
    entry_id: str
    path: Path
    x_col: int
    y_col: int
    truth: Optional[Direction] = None
    weight: float = 1.0

    def __post_init__(self) -> None:
        if not (self.weight > 0.0 and math.isfinite(self.weight)):
            raise ParseError(f"entry {self.entry_id}: weight must be positive, got {self.weight!r}")


@dataclass(frozen=True)
class PairsManifest:
    entries: tuple


def load_manifest(path) -> PairsManifest:
    path = Path(path)
    entries = []
    try:
        with path.open("r", encoding="utf-8", newline="") as handle:
            lines = [ln for ln in handle if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from None
    for lineno, row in enumerate(csv.reader(lines), start=1):
        row = [field.strip() for field in row]
        if len(row) < 4 or len(row) > 6:
            raise ParseError(f"{path}: entry {lineno}: expected 4 to 6 fields, got {len(row)}")
        entry_id, rel_path, x_col, y_col = row[:4]
        truth_token = row[4].lower() if len(row) > 4 else ""
        if truth_token not in _TRUTH_TOKENS:
            raise ParseError(f"{path}: entry {lineno}: unknown truth {row[4]!r}")
        try:
            weight = float(row[5]) if len(row) > 5 else 1.0
            entries.append(
                ManifestEntry(
                    entry_id=entry_id,
                    path=(path.parent / rel_path).resolve(),
                    x_col=int(x_col),
                    y_col=int(y_col),
                    truth=_TRUTH_TOKENS[truth_token],
                    weight=weight,
                )
            )
        except ValueError as exc:
            raise ParseError(f"{path}: entry {lineno}: {exc}") from None
    if not entries:
        raise EmptyManifestError(f"{path}: manifest has no entries")
    return PairsManifest(entries=tuple(entries))


@dataclass(frozen=True)
class EntryReport:
    entry: ManifestEntry
    report: Optional[IgciReport]
    error: Optional[str]
    correct: Optional[bool]

    @property
    def decided(self) -> bool:
        return self.report is not None and self.report.direction is not Direction.UNDECIDED

    def to_record(self) -> dict:
        rec = {
            "record": "pair",
            "id": self.entry.entry_id,
            "c_xy": None,
            "c_yx": None,
            "direction": None,
            "m_used": None,
            "truth": self.entry.truth.value if self.entry.truth else None,
            "weight": self.entry.weight,
            "correct": self.correct,
            "error": self.error,
        }
        if self.report is not None:
            rec.update(
                c_xy=self.report.c_xy,
                c_yx=self.report.c_yx,
                direction=self.report.direction.value,
                m_used=self.report.m_used,
            )
        return rec


@dataclass(frozen=True)
class ManifestSummary:
    reports: tuple
    decisions_pct: float
    accuracy_pct: Optional[float]

    def to_records(self) -> list:
        records = [r.to_record() for r in self.reports]
        records.append(
            {
                "record": "summary",
                "entries": len(self.reports),
                "decisions_pct": self.decisions_pct,
                "accuracy_pct": self.accuracy_pct,
            }
        )
        return records


def evaluate_manifest(
    manifest: PairsManifest,
    reference: ReferenceFamily = ReferenceFamily.UNIFORM_UNIT,
    estimator: EstimatorKind = EstimatorKind.ENTROPY_SPACING,
) -> ManifestSummary:
    """Score every manifest entry and summarize weighted performance.

    decisions_pct is the weighted share of entries that produced a
    direction; accuracy_pct is the weighted share of correct calls among
    decided entries with known ground truth (None when no entry qualifies).
    Per-entry failures are recorded, not raised. fsum keeps both summary
    numbers invariant under entry reordering.
    """
    if not manifest.entries:
        raise EmptyManifestError("manifest has no entries")
    reports = []
    for entry in manifest.entries:
        try:
            pair = load_pair(entry.path, entry.x_col, entry.y_col)
            result = igci_score(pair, reference=reference, estimator=estimator)
        except IgciError as exc:
            reports.append(EntryReport(entry=entry, report=None, error=str(exc), correct=None))
            continue
        correct: Optional[bool] = None
        if entry.truth is not None and result.direction is not Direction.UNDECIDED:
            correct = result.direction is entry.truth
        reports.append(EntryReport(entry=entry, report=result, error=None, correct=correct))
    total_w = math.fsum(r.entry.weight for r in reports)
    decided_w = math.fsum(r.entry.weight for r in reports if r.decided)
    known_w = math.fsum(r.entry.weight for r in reports if r.correct is not None)
    correct_w = math.fsum(r.entry.weight for r in reports if r.correct)
    decisions_pct = 100.0 * decided_w / total_w
    accuracy_pct = 100.0 * correct_w / known_w if known_w > 0.0 else None
    return ManifestSummary(reports=tuple(reports), decisions_pct=decisions_pct, accuracy_pct=accuracy_pct)


def _tsv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_json_lines(records: Sequence[dict]) -> str:
    return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in records)


def format_tsv(records: Sequence[dict]) -> str:
    """Tab-separated rendering: config records become '#' comment lines,
    remaining records share a header taken from the first of them."""
    out = []
    body = []
    for rec in records:
        if rec.get("record") == "config":
            items = [f"{k}={_tsv_cell(v)}" for k, v in rec.items() if k != "record"]
            out.append("# " + " ".join(items) + "\n")
        else:
            body.append(rec)
    if body:
        header = [k for k in body[0] if k != "record"]
        out.append("\t".join(header) + "\n")
        for rec in body:
            out.append("\t".join(_tsv_cell(rec.get(k)) for k in header) + "\n")
    return "".join(out)
