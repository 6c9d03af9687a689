"""Upload pipeline: CSV parsing, batch validation + location attachment,
and cross-source validation correlation.

CSV contract: UTF-8, comma-separated, first row is the header. Required
columns `timestamp,parameter,value,unit,source`; either `location_id` or
both `latitude,longitude` (`altitude` optional); any `meta.<key>` column
becomes metadata key `<key>`. One bad row never fails the batch.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional, Sequence

from .model import (
    GeoPoint,
    Location,
    Measurement,
    RawMeasurement,
    SourceMethod,
    ValidationError,
    haversine_m,
    validate_measurement,
)
from .standards import StandardsConfig
from .store import MeasurementStore, StoreError

REQUIRED_COLUMNS = ("timestamp", "parameter", "value", "unit", "source")
LOCATION_MATCH_RADIUS_M = 100.0
DEFAULT_PAIR_TOLERANCE_S = 3600.0


class IngestError(Exception):
    def __init__(self, code: str, detail: str = ""):
        self.code = code
        self.detail = detail
        super().__init__(f"{code}: {detail}" if detail else code)


@dataclass
class RowError:
    row: int  # 1-based data row number (header excluded)
    code: str
    detail: str = ""


@dataclass
class IngestReport:
    accepted: int = 0
    rejected: int = 0
    rejections: list[RowError] = field(default_factory=list)
    inserted: int = 0
    replaced: int = 0
    new_locations: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "rejected": self.rejected,
            "rejections": [
                {"row": r.row, "code": r.code, "detail": r.detail} for r in self.rejections
            ],
            "inserted": self.inserted,
            "replaced": self.replaced,
            "new_locations": list(self.new_locations),
        }


@dataclass
class CorrelationReport:
    location_id: str
    parameter: str
    source_a: SourceMethod
    source_b: SourceMethod
    tolerance_s: float
    n_pairs: int
    r: Optional[float] = None
    reason: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "location_id": self.location_id,
            "parameter": self.parameter,
            "source_a": self.source_a.value,
            "source_b": self.source_b.value,
            "tolerance_s": self.tolerance_s,
            "n_pairs": self.n_pairs,
            "r": self.r,
            "reason": self.reason,
        }


def parse_csv(data: bytes) -> tuple[list[tuple[int, RawMeasurement]], list[RowError]]:
    """Parse an upload document into raw measurements plus row errors.

    Returns ((row_number, raw), ...) for parseable rows. Raises
    IngestError(FATAL_NO_HEADER) only when the header itself is missing
    or lacks required columns.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise IngestError("FATAL_NO_HEADER", "document is not UTF-8")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("FATAL_NO_HEADER", "empty document")
    header = [h.strip() for h in header]
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    if missing:
        raise IngestError("FATAL_NO_HEADER", f"missing columns: {', '.join(missing)}")
    idx = {name: i for i, name in enumerate(header)}
    meta_cols = [(name[len("meta.") :], i) for name, i in idx.items() if name.startswith("meta.")]

    def cell(row: list[str], name: str) -> str:
        i = idx.get(name)
        if i is None or i >= len(row):
            return ""
        return row[i].strip()

    rows: list[tuple[int, RawMeasurement]] = []
    errors: list[RowError] = []
    for n, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            value_text = cell(row, "value")
            try:
                value = float(value_text)
            except ValueError:
                raise IngestError("BAD_VALUE", f"not a number: {value_text!r}")
            source_text = cell(row, "source")
            try:
                source = SourceMethod(source_text)
            except ValueError:
                raise IngestError("BAD_SOURCE", f"unknown source: {source_text!r}")

            def coord(name: str) -> Optional[float]:
                t = cell(row, name)
                if not t:
                    return None
                try:
                    return float(t)
                except ValueError:
                    raise IngestError("BAD_COORDINATES", f"{name} is not a number: {t!r}")

            metadata = {}
            for key, i in meta_cols:
                if i < len(row) and row[i].strip():
                    metadata[key] = row[i].strip()
            rows.append(
                (
                    n,
                    RawMeasurement(
                        timestamp=cell(row, "timestamp"),
                        parameter=cell(row, "parameter"),
                        value=value,
                        unit=cell(row, "unit"),
                        source=source,
                        location_id=cell(row, "location_id") or None,
                        latitude=coord("latitude"),
                        longitude=coord("longitude"),
                        altitude=coord("altitude"),
                        metadata=metadata,
                    ),
                )
            )
        except IngestError as exc:
            errors.append(RowError(n, exc.code, exc.detail))
    return rows, errors


def serialize_csv(rows: Sequence[dict], registry: Optional[dict] = None) -> str:
    """Render measurement dicts (wire form) back into the CSV contract.

    The value column carries the canonical-unit value; the unit column is
    the parameter's canonical unit when a registry is given, else the
    recorded original unit.
    """
    meta_keys = sorted({k for r in rows for k in (r.get("metadata") or {})})
    header = ["timestamp", "parameter", "value", "unit", "source", "location_id"]
    header += [f"meta.{k}" for k in meta_keys]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        unit = r["original_unit"]
        if registry is not None and r["parameter"] in registry:
            unit = registry[r["parameter"]].canonical_unit
        meta = r.get("metadata") or {}
        w.writerow(
            [
                r["timestamp"],
                r["parameter"],
                repr(r["value"]) if isinstance(r["value"], float) else r["value"],
                unit,
                r["source"],
                r.get("location_id", ""),
            ]
            + [meta.get(k, "") for k in meta_keys]
        )
    return buf.getvalue()


class LocationResolver:
    """Attaches measurements to locations, creating one when no existing
    location lies within 100 m of the reading's point."""

    def __init__(self, store: MeasurementStore):
        self.store = store
        self._known = store.locations()
        self.created: list[Location] = []

    def resolve(self, m: Measurement) -> Measurement:
        if m.location_id is not None:
            if m.location_id not in self._known:
                if m.point is None:
                    raise ValidationError("UNKNOWN_LOCATION", m.location_id)
                self._create(m.location_id, m.point)
            return m
        assert m.point is not None
        nearest = None
        for loc in self._known.values():
            d = haversine_m(loc.point, m.point)
            if d < LOCATION_MATCH_RADIUS_M and (nearest is None or d < nearest[0]):
                nearest = (d, loc)
        if nearest is not None:
            m.location_id = nearest[1].id
        else:
            lid = self._next_auto_id()
            self._create(lid, m.point)
            m.location_id = lid
        return m

    def _create(self, lid: str, point: GeoPoint) -> None:
        loc = Location(
            id=lid,
            name=f"Station {lid} ({point.latitude:.4f}, {point.longitude:.4f})",
            point=point,
        )
        self._known[lid] = loc
        self.created.append(loc)

    def _next_auto_id(self) -> str:
        n = len(self._known) + 1
        while f"loc-{n:04d}" in self._known:
            n += 1
        return f"loc-{n:04d}"


def ingest_batch(
    rows: Sequence[tuple[int, RawMeasurement]],
    parse_errors: Sequence[RowError],
    config: StandardsConfig,
    store: MeasurementStore,
    now: Optional[datetime] = None,
) -> IngestReport:
    """Validate rows, resolve locations, and write the accepted set as one
    atomic batch."""
    if now is None:
        now = datetime.now(timezone.utc)
    report = IngestReport(rejections=list(parse_errors))
    resolver = LocationResolver(store)
    accepted: list[Measurement] = []
    for n, raw in rows:
        try:
            m = validate_measurement(raw, config.registry, config.unit_rules, now=now)
            m = resolver.resolve(m)
        except ValidationError as exc:
            report.rejections.append(RowError(n, exc.code, exc.detail))
            continue
        accepted.append(m)
    report.accepted = len(accepted)
    report.rejected = len(report.rejections)
    report.rejections.sort(key=lambda r: r.row)
    try:
        inserted, replaced = store.put_batch(accepted, resolver.created)
    except StoreError as exc:
        return IngestReport(
            accepted=0,
            rejected=len(rows) + len(parse_errors),
            rejections=list(parse_errors)
            + [RowError(n, exc.code, exc.detail) for n, _ in rows],
        )
    report.inserted = inserted
    report.replaced = replaced
    report.new_locations = [loc.id for loc in resolver.created]
    return report


def ingest_csv(
    data: bytes,
    config: StandardsConfig,
    store: MeasurementStore,
    now: Optional[datetime] = None,
) -> IngestReport:
    rows, errors = parse_csv(data)
    return ingest_batch(rows, errors, config, store, now=now)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    """Pearson correlation coefficient; None when either side has zero
    variance."""
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0 or syy == 0:
        return None
    return sxy / math.sqrt(sxx * syy)


def pair_readings(
    a: Sequence[tuple[datetime, float]],
    b: Sequence[tuple[datetime, float]],
    tolerance_s: float,
) -> list[tuple[float, float]]:
    """Greedy nearest-in-time pairing: walk the first series chronologically,
    matching each reading to the closest still-unmatched reading of the
    second within tolerance. No reading is used twice."""
    used = [False] * len(b)
    pairs = []
    for ta, va in a:
        best = None
        for j, (tb, vb) in enumerate(b):
            if used[j]:
                continue
            gap = abs((ta - tb).total_seconds())
            if gap > tolerance_s:
                continue
            if best is None or gap < best[0]:
                best = (gap, j, vb)
        if best is not None:
            used[best[1]] = True
            pairs.append((va, best[2]))
    return pairs


def correlate(
    store: MeasurementStore,
    location_id: str,
    parameter: str,
    source_a: SourceMethod,
    source_b: SourceMethod,
    t_from: Optional[datetime] = None,
    t_to: Optional[datetime] = None,
    tolerance_s: float = DEFAULT_PAIR_TOLERANCE_S,
) -> CorrelationReport:
    """Cross-source validation: Pearson correlation of time-matched pairs."""
    if source_a == source_b:
        raise IngestError("SAME_SOURCE", "source_a and source_b must differ")
    if tolerance_s < 0:
        raise IngestError("BAD_TOLERANCE", "tolerance must be >= 0")
    a = store.readings(location_id, parameter, source=source_a, t_from=t_from, t_to=t_to)
    b = store.readings(location_id, parameter, source=source_b, t_from=t_from, t_to=t_to)
    pairs = pair_readings(a, b, tolerance_s)
    report = CorrelationReport(
        location_id=location_id,
        parameter=parameter,
        source_a=source_a,
        source_b=source_b,
        tolerance_s=tolerance_s,
        n_pairs=len(pairs),
    )
    if len(pairs) < 2:
        report.reason = "INSUFFICIENT_PAIRS"
        return report
    r = pearson([p[0] for p in pairs], [p[1] for p in pairs])
    if r is None:
        report.reason = "ZERO_VARIANCE"
    else:
        report.r = r
    return report
