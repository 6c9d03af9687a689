"""Shared serialization: the JSON wire format used by the API, the CLI's
JSON output, and the store's on-disk log payloads.

Dicts are built in a fixed field order so that serializing the same state
twice yields byte-identical output.
"""

from __future__ import annotations

import json
from typing import Any, Optional

from .model import GeoPoint, Location, Measurement, SourceMethod, format_rfc3339, parse_rfc3339
from .standards import Assessment, PurposeProfile, ReconciledRange


def json_bytes(obj: Any) -> bytes:
    """Canonical JSON encoding for HTTP bodies and CLI --format=json."""
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def measurement_to_dict(m: Measurement) -> dict:
    d: dict[str, Any] = {
        "timestamp": format_rfc3339(m.timestamp),
        "parameter": m.parameter,
        "value": m.value,
        "original_unit": m.original_unit,
        "source": m.source.value,
    }
    if m.location_id is not None:
        d["location_id"] = m.location_id
    if m.point is not None:
        d["latitude"] = m.point.latitude
        d["longitude"] = m.point.longitude
        if m.point.altitude is not None:
            d["altitude"] = m.point.altitude
    if m.metadata:
        d["metadata"] = dict(m.metadata)
    return d


def measurement_from_dict(d: dict) -> Measurement:
    point = None
    if "latitude" in d:
        point = GeoPoint(d["latitude"], d["longitude"], d.get("altitude"))
    return Measurement(
        timestamp=parse_rfc3339(d["timestamp"]),
        parameter=d["parameter"],
        value=float(d["value"]),
        original_unit=d["original_unit"],
        source=SourceMethod(d["source"]),
        location_id=d.get("location_id"),
        point=point,
        metadata=dict(d.get("metadata") or {}),
    )


def location_to_dict(loc: Location) -> dict:
    d: dict[str, Any] = {
        "kind": "location",
        "id": loc.id,
        "name": loc.name,
        "latitude": loc.point.latitude,
        "longitude": loc.point.longitude,
    }
    if loc.point.altitude is not None:
        d["altitude"] = loc.point.altitude
    if loc.basin is not None:
        d["basin"] = loc.basin
    return d


def location_from_dict(d: dict) -> Location:
    return Location(
        id=d["id"],
        name=d["name"],
        point=GeoPoint(d["latitude"], d["longitude"], d.get("altitude")),
        basin=d.get("basin"),
    )


def range_to_dict(r: Optional[ReconciledRange]) -> Optional[dict]:
    if r is None:
        return None
    return {
        "parameter": r.parameter,
        "purpose": r.purpose,
        "min": r.min,
        "max": r.max,
        "contributing_authorities": list(r.contributing_authorities),
    }


def assessment_to_dict(a: Assessment) -> dict:
    return {
        "location_id": a.location_id,
        "purpose": a.purpose,
        "as_of": format_rfc3339(a.as_of) if a.as_of else None,
        "entries": [
            {
                "parameter": e.parameter,
                "relevant": e.relevant,
                "status": e.status.value,
                "value": e.value,
                "timestamp": format_rfc3339(e.timestamp) if e.timestamp else None,
                "range": range_to_dict(e.range),
            }
            for e in a.entries
        ],
    }


def purpose_to_dict(p: PurposeProfile, default: bool) -> dict:
    return {
        "id": p.id,
        "name": p.display_name,
        "relevant_parameters": list(p.relevant_parameters),
        "default": default,
    }
