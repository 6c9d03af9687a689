"""Embedded persistent measurement store.

Layout: append-only segment logs plus in-memory indexes rebuilt on open by
log replay. Each record is a 4-byte big-endian length, the UTF-8 JSON
payload (same structured form as the API wire format), and a 4-byte
big-endian CRC32 of the payload. A batch is terminated by a zero-length
commit marker; records after the last complete marker are discarded on
open, which gives crash consistency at batch granularity.

Single writer, many readers: callers serialize writes through one store
instance; a lock file refuses a second opener.
"""

from __future__ import annotations

import json
import os
import struct
import zlib
from bisect import insort
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional

from filelock import FileLock, Timeout

from .model import Location, Measurement, SourceMethod, SOURCE_PRIORITY, parse_rfc3339
from .wire import location_from_dict, location_to_dict, measurement_from_dict, measurement_to_dict

SEGMENT_MAX_BYTES = 8 * 1024 * 1024
_LEN = struct.Struct(">I")


class StoreError(Exception):
    def __init__(self, code: str, detail: str = ""):
        self.code = code
        self.detail = detail
        super().__init__(f"{code}: {detail}" if detail else code)


@dataclass(frozen=True)
class BoundingBox:
    min_lat: float
    min_lon: float
    max_lat: float
    max_lon: float

    def __post_init__(self):
        if not (-90 <= self.min_lat <= self.max_lat <= 90):
            raise ValueError("bad latitude bounds")
        if not (-180 <= self.min_lon <= self.max_lon <= 180):
            raise ValueError("bad longitude bounds")

    def contains(self, lat: float, lon: float) -> bool:
        return self.min_lat <= lat <= self.max_lat and self.min_lon <= lon <= self.max_lon


@dataclass(frozen=True)
class SeriesPoint:
    t: datetime
    value: float
    count: int


@dataclass
class LocationSummary:
    location: Location
    parameter_count: int
    latest_timestamp: Optional[datetime]


def _segment_name(index: int) -> str:
    return f"segment-{index:06d}.log"


class MeasurementStore:
    """Measurement log store with location/parameter/time indexes.

    Dedup identity is (location_id, parameter, timestamp, source);
    re-writing an existing key is a last-write-wins replace.
    """

    def __init__(self, directory: str | os.PathLike, lock: bool = True):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self._lock = FileLock(self.dir / "LOCK") if lock else None
        if self._lock is not None:
            try:
                self._lock.acquire(timeout=0)
            except Timeout:
                raise StoreError("STORE_LOCKED", f"{self.dir} is in use by another process")

        self._locations: dict[str, Location] = {}
        # (location_id, parameter) -> {(timestamp, source): measurement dict}
        self._readings: dict[tuple[str, str], dict[tuple[datetime, SourceMethod], dict]] = {}
        self._sorted_keys: dict[tuple[str, str], list] = {}
        self._fh = None
        self._segment_index = 0
        self._replay()
        self._open_tail()

    # -- lifecycle ---------------------------------------------------------

    def close(self) -> None:
        if self._fh:
            self._fh.close()
            self._fh = None
        if self._lock is not None and self._lock.is_locked:
            self._lock.release()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    @property
    def segment_count(self) -> int:
        return len(self._segments())

    def _segments(self) -> list[Path]:
        return sorted(self.dir.glob("segment-*.log"))

    def _replay(self) -> None:
        segments = self._segments()
        for i, seg in enumerate(segments):
            committed = self._replay_segment(seg)
            size = seg.stat().st_size
            if committed < size:
                # incomplete tail: drop it, and ignore any later segments
                with open(seg, "r+b") as fh:
                    fh.truncate(committed)
                for later in segments[i + 1 :]:
                    later.unlink()
                break
        segments = self._segments()
        if segments:
            last = segments[-1]
            self._segment_index = int(last.stem.split("-")[1])

    def _replay_segment(self, path: Path) -> int:
        """Apply committed batches from one segment; return the byte offset
        just past the last complete commit marker."""
        committed = 0
        pending: list[dict] = []
        with open(path, "rb") as fh:
            while True:
                head = fh.read(4)
                if len(head) < 4:
                    break
                (length,) = _LEN.unpack(head)
                if length == 0:
                    crc_raw = fh.read(4)
                    if len(crc_raw) < 4 or _LEN.unpack(crc_raw)[0] != 0:
                        break
                    for rec in pending:
                        self._apply(rec)
                    pending = []
                    committed = fh.tell()
                    continue
                payload = fh.read(length)
                crc_raw = fh.read(4)
                if len(payload) < length or len(crc_raw) < 4:
                    break
                if zlib.crc32(payload) != _LEN.unpack(crc_raw)[0]:
                    break
                try:
                    rec = json.loads(payload.decode("utf-8"))
                except ValueError:
                    break
                pending.append(rec)
        return committed

    def _open_tail(self) -> None:
        if self._segment_index == 0 and not self._segments():
            self._segment_index = 1
        path = self.dir / _segment_name(self._segment_index)
        self._fh = open(path, "ab")
        if self._fh.tell() >= SEGMENT_MAX_BYTES:
            self._roll()

    def _roll(self) -> None:
        self._fh.close()
        self._segment_index += 1
        self._fh = open(self.dir / _segment_name(self._segment_index), "ab")

    # -- writes ------------------------------------------------------------

    def put_batch(
        self,
        measurements: Iterable[Measurement],
        locations: Iterable[Location] = (),
    ) -> tuple[int, int]:
        """Durably upsert one batch; returns (inserted, replaced).

        The batch is atomic: either every record is committed or, after a
        crash, none are visible. New/updated locations ride in the same
        batch.
        """
        measurements = list(measurements)
        locations = list(locations)
        if not measurements and not locations:
            return (0, 0)

        frames = bytearray()
        for loc in locations:
            payload = json.dumps(location_to_dict(loc), ensure_ascii=False).encode("utf-8")
            frames += _LEN.pack(len(payload)) + payload + _LEN.pack(zlib.crc32(payload))
        meas_dicts = [measurement_to_dict(m) for m in measurements]
        for d in meas_dicts:
            payload = json.dumps(d, ensure_ascii=False).encode("utf-8")
            frames += _LEN.pack(len(payload)) + payload + _LEN.pack(zlib.crc32(payload))
        frames += _LEN.pack(0) + _LEN.pack(0)  # commit marker

        start = self._fh.tell()
        try:
            self._fh.write(frames)
            self._fh.flush()
            os.fsync(self._fh.fileno())
        except OSError as exc:
            try:
                self._fh.truncate(start)
            except OSError:
                pass
            raise StoreError("STORAGE_IO", str(exc))

        inserted = replaced = 0
        for loc in locations:
            self._locations[loc.id] = loc
        for m, d in zip(measurements, meas_dicts):
            if self._apply_measurement(m.location_id, d):
                inserted += 1
            else:
                replaced += 1

        if self._fh.tell() >= SEGMENT_MAX_BYTES:
            self._roll()
        return (inserted, replaced)

    def _apply(self, rec: dict) -> None:
        if rec.get("kind") == "location":
            loc = location_from_dict(rec)
            self._locations[loc.id] = loc
        else:
            self._apply_measurement(rec.get("location_id"), rec)

    def _apply_measurement(self, location_id: Optional[str], rec: dict) -> bool:
        """Index one measurement dict; True if the key was new."""
        key = (location_id, rec["parameter"])
        ts = parse_rfc3339(rec["timestamp"])
        source = SourceMethod(rec["source"])
        bucket = self._readings.setdefault(key, {})
        fresh = (ts, source) not in bucket
        bucket[(ts, source)] = rec
        if fresh:
            cache = self._sorted_keys.get(key)
            if cache is not None:
                insort(cache, (ts, SOURCE_PRIORITY[source], source))
        return fresh

    # -- reads -------------------------------------------------------------

    def locations(self) -> dict[str, Location]:
        return dict(self._locations)

    def has_location(self, location_id: str) -> bool:
        return location_id in self._locations

    def list_locations(self, bbox: Optional[BoundingBox] = None) -> list[LocationSummary]:
        out = []
        for loc in self._locations.values():
            if bbox is not None and not bbox.contains(loc.point.latitude, loc.point.longitude):
                continue
            params = 0
            latest_ts: Optional[datetime] = None
            for (lid, _param), bucket in self._readings.items():
                if lid != loc.id or not bucket:
                    continue
                params += 1
                top = max(ts for ts, _src in bucket)
                if latest_ts is None or top > latest_ts:
                    latest_ts = top
            out.append(LocationSummary(loc, params, latest_ts))
        out.sort(key=lambda s: (s.location.name, s.location.id))
        return out

    def _keys_sorted(self, key: tuple[str, str]) -> list:
        cache = self._sorted_keys.get(key)
        if cache is None:
            bucket = self._readings.get(key, {})
            cache = sorted((ts, SOURCE_PRIORITY[src], src) for ts, src in bucket)
            self._sorted_keys[key] = cache
        return cache

    def latest(
        self,
        location_id: str,
        parameter: Optional[str] = None,
        source: Optional[SourceMethod] = None,
    ) -> dict[str, tuple[float, datetime, SourceMethod]]:
        """Newest reading per parameter; timestamp ties go to the higher
        priority source (LAB > SENSOR > MOBILE_APP)."""
        if location_id not in self._locations:
            raise StoreError("UNKNOWN_LOCATION", location_id)
        out: dict[str, tuple[float, datetime, SourceMethod]] = {}
        for (lid, param), bucket in self._readings.items():
            if lid != location_id or not bucket:
                continue
            if parameter is not None and param != parameter:
                continue
            best = None
            for (ts, src), rec in bucket.items():
                if source is not None and src != source:
                    continue
                rank = (ts, SOURCE_PRIORITY[src])
                if best is None or rank > best[0]:
                    best = (rank, rec["value"], ts, src)
            if best is not None:
                out[param] = (best[1], best[2], best[3])
        return out

    def series(
        self,
        location_id: str,
        parameter: str,
        t_from: datetime,
        t_to: datetime,
        max_points: int,
    ) -> list[SeriesPoint]:
        """Chronological readings in [t_from, t_to), merged across sources.

        When the raw count exceeds max_points the window is split into
        max_points equal-width buckets; each non-empty bucket yields its
        midpoint, mean value, and reading count.
        """
        if location_id not in self._locations:
            raise StoreError("UNKNOWN_LOCATION", location_id)
        if t_from >= t_to:
            raise StoreError("BAD_RANGE", "from must precede to")
        if max_points < 1:
            raise StoreError("BAD_RANGE", "max_points must be >= 1")

        bucket = self._readings.get((location_id, parameter), {})
        raw = sorted(
            ((ts, rec["value"]) for (ts, _src), rec in bucket.items() if t_from <= ts < t_to),
            key=lambda p: p[0],
        )
        if len(raw) <= max_points:
            return [SeriesPoint(ts, float(v), 1) for ts, v in raw]

        width = (t_to - t_from) / max_points
        sums = [0.0] * max_points
        counts = [0] * max_points
        for ts, v in raw:
            i = int((ts - t_from) / width)
            if i >= max_points:  # float edge at the upper boundary
                i = max_points - 1
            sums[i] += float(v)
            counts[i] += 1
        points = []
        for i in range(max_points):
            if counts[i]:
                mid = t_from + width * (i + 0.5)
                points.append(SeriesPoint(mid, sums[i] / counts[i], counts[i]))
        return points

    def readings(
        self,
        location_id: str,
        parameter: str,
        source: Optional[SourceMethod] = None,
        t_from: Optional[datetime] = None,
        t_to: Optional[datetime] = None,
    ) -> list[tuple[datetime, float]]:
        """Time-sorted (timestamp, value) pairs, optionally filtered."""
        if location_id not in self._locations:
            raise StoreError("UNKNOWN_LOCATION", location_id)
        bucket = self._readings.get((location_id, parameter), {})
        out = []
        for (ts, src), rec in bucket.items():
            if source is not None and src != source:
                continue
            if t_from is not None and ts < t_from:
                continue
            if t_to is not None and ts >= t_to:
                continue
            out.append((ts, float(rec["value"])))
        out.sort(key=lambda p: p[0])
        return out

    def export_rows(
        self,
        location_id: str,
        parameter: Optional[str] = None,
        t_from: Optional[datetime] = None,
        t_to: Optional[datetime] = None,
    ) -> list[dict]:
        """Full measurement dicts for CSV export, time-sorted."""
        if location_id not in self._locations:
            raise StoreError("UNKNOWN_LOCATION", location_id)
        rows = []
        for (lid, param), bucket in self._readings.items():
            if lid != location_id:
                continue
            if parameter is not None and param != parameter:
                continue
            for (ts, src), rec in bucket.items():
                if t_from is not None and ts < t_from:
                    continue
                if t_to is not None and ts >= t_to:
                    continue
                rows.append((ts, SOURCE_PRIORITY[src], rec))
        rows.sort(key=lambda r: (r[0], -r[1], r[2]["parameter"]))
        return [r[2] for r in rows]

    def latest_overall_timestamp(self, location_id: str) -> Optional[datetime]:
        """Newest reading timestamp at a location, across all parameters."""
        best = None
        for (lid, _param), bucket in self._readings.items():
            if lid != location_id or not bucket:
                continue
            top = max(ts for ts, _src in bucket)
            if best is None or top > best:
                best = top
        return best
