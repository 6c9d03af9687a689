"""Core domain types, validation, and unit normalization.

Everything here is a pure value type or a pure function; no I/O, no shared
mutable state. Measurements are standardized on time (UTC instants) and
space (latitude, longitude, altitude); all other context rides along as
free-form string metadata.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from enum import Enum
from typing import Optional

EARTH_RADIUS_M = 6_371_000.0

#: Canonical unit codes used by the bundled registry.
CANONICAL_UNITS = ("mg/L", "MPN/100mL", "°C", "µS/cm", "pH-units")


class SourceMethod(str, Enum):
    """Collection technique of a reading."""

    LAB = "LAB"
    SENSOR = "SENSOR"
    MOBILE_APP = "MOBILE_APP"


#: Tie-break priority when two readings share a timestamp: lab samples are
#: the validation ground truth, deployed sensors next, field-app entry last.
SOURCE_PRIORITY = {
    SourceMethod.LAB: 3,
    SourceMethod.SENSOR: 2,
    SourceMethod.MOBILE_APP: 1,
}


class ValidationError(Exception):
    """A measurement failed validation; carries a machine-readable code."""

    def __init__(self, code: str, detail: str = ""):
        self.code = code
        self.detail = detail
        super().__init__(f"{code}: {detail}" if detail else code)


@dataclass(frozen=True)
class GeoPoint:
    latitude: float
    longitude: float
    altitude: Optional[float] = None

    def __post_init__(self):
        if not (-90.0 <= self.latitude <= 90.0):
            raise ValueError(f"latitude out of range: {self.latitude}")
        if not (-180.0 <= self.longitude <= 180.0):
            raise ValueError(f"longitude out of range: {self.longitude}")
        if self.altitude is not None and not math.isfinite(self.altitude):
            raise ValueError("altitude must be finite")


@dataclass(frozen=True)
class Parameter:
    """Registry entry for a measurable water-quality parameter."""

    code: str
    display_name: str
    canonical_unit: str
    plausible_min: Optional[float] = None
    plausible_max: Optional[float] = None
    description: str = ""

    def __post_init__(self):
        if not self.code:
            raise ValueError("parameter code must be non-empty")
        if (
            self.plausible_min is not None
            and self.plausible_max is not None
            and self.plausible_min > self.plausible_max
        ):
            raise ValueError(f"{self.code}: plausible_min > plausible_max")


@dataclass(frozen=True)
class Location:
    id: str
    name: str
    point: GeoPoint
    basin: Optional[str] = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("location id must be non-empty")
        if not self.name:
            raise ValueError("location name must be non-empty")


@dataclass(frozen=True)
class UnitRule:
    """Direct conversion rule from one unit into a canonical unit."""

    from_unit: str
    to_unit: str
    scale: float

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("unit rule scale must be positive")


@dataclass
class Measurement:
    """One validated reading, value already in the parameter's canonical unit."""

    timestamp: datetime
    parameter: str
    value: float
    original_unit: str
    source: SourceMethod
    location_id: Optional[str] = None
    point: Optional[GeoPoint] = None
    metadata: dict[str, str] = field(default_factory=dict)


@dataclass
class RawMeasurement:
    """Unvalidated reading as it arrives from an upload, fields still loose."""

    timestamp: str
    parameter: str
    value: float
    unit: str
    source: SourceMethod
    location_id: Optional[str] = None
    latitude: Optional[float] = None
    longitude: Optional[float] = None
    altitude: Optional[float] = None
    metadata: dict[str, str] = field(default_factory=dict)


def parse_rfc3339(text: str) -> datetime:
    """Parse an RFC 3339 timestamp into a UTC-aware datetime.

    Inputs carrying an offset are converted to UTC; a trailing ``Z`` is
    accepted. Naive timestamps are rejected.
    """
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    # datetime.fromisoformat on 3.10 only takes 3- or 6-digit fractions
    m = re.search(r"\.(\d+)", s)
    if m and len(m.group(1)) not in (3, 6):
        frac = (m.group(1) + "000000")[:6]
        s = s[: m.start(1)] + frac + s[m.end(1) :]
    try:
        dt = datetime.fromisoformat(s)
    except ValueError as exc:
        raise ValueError(f"bad timestamp {text!r}") from exc
    if dt.tzinfo is None:
        raise ValueError(f"timestamp {text!r} has no UTC offset")
    return dt.astimezone(timezone.utc)


def format_rfc3339(dt: datetime) -> str:
    """Render a UTC instant as RFC 3339 text, ``Z``-suffixed."""
    dt = dt.astimezone(timezone.utc)
    if dt.microsecond:
        return dt.strftime("%Y-%m-%dT%H:%M:%S.%f").rstrip("0") + "Z"
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance between two points in meters."""
    phi1, phi2 = math.radians(a.latitude), math.radians(b.latitude)
    dphi = phi2 - phi1
    dlam = math.radians(b.longitude - a.longitude)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(math.sqrt(h))


def normalize_unit(
    value: float,
    unit: str,
    parameter: Parameter,
    rules: dict[tuple[str, str], float],
) -> float:
    """Convert ``value`` from ``unit`` into the parameter's canonical unit.

    Raises ValidationError(UNKNOWN_UNIT) when the unit is neither canonical
    nor covered by a direct rule.
    """
    if unit == parameter.canonical_unit:
        return value
    scale = rules.get((unit, parameter.canonical_unit))
    if scale is None:
        raise ValidationError(
            "UNKNOWN_UNIT",
            f"no rule {unit!r} -> {parameter.canonical_unit!r} for {parameter.code}",
        )
    return value * scale


def validate_measurement(
    raw: RawMeasurement,
    registry: dict[str, Parameter],
    rules: dict[tuple[str, str], float],
    now: Optional[datetime] = None,
) -> Measurement:
    """Validate one raw reading and return it in canonical units.

    Failures raise ValidationError with one reason code; the first failing
    field wins, checked in order: timestamp, location, parameter, unit, value.
    """
    if now is None:
        now = datetime.now(timezone.utc)

    try:
        ts = parse_rfc3339(raw.timestamp)
    except ValueError as exc:
        raise ValidationError("BAD_TIMESTAMP", str(exc)) from exc
    if ts > now + timedelta(hours=24):
        raise ValidationError("BAD_TIMESTAMP", f"{raw.timestamp} is more than 24h in the future")

    point = None
    if raw.latitude is not None or raw.longitude is not None:
        if raw.latitude is None or raw.longitude is None:
            raise ValidationError("BAD_COORDINATES", "latitude and longitude must come together")
        try:
            point = GeoPoint(raw.latitude, raw.longitude, raw.altitude)
        except ValueError as exc:
            raise ValidationError("BAD_COORDINATES", str(exc)) from exc
    if raw.location_id is None and point is None:
        raise ValidationError("MISSING_LOCATION", "need location_id or latitude/longitude")

    param = registry.get(raw.parameter)
    if param is None:
        raise ValidationError("UNKNOWN_PARAMETER", f"{raw.parameter!r} not in registry")

    value = normalize_unit(raw.value, raw.unit, param, rules)

    if not math.isfinite(value):
        raise ValidationError("OUT_OF_PLAUSIBLE_RANGE", f"value {value} is not finite")
    if param.plausible_min is not None and value < param.plausible_min:
        raise ValidationError(
            "OUT_OF_PLAUSIBLE_RANGE",
            f"{param.code}={value} below plausible minimum {param.plausible_min}",
        )
    if param.plausible_max is not None and value > param.plausible_max:
        raise ValidationError(
            "OUT_OF_PLAUSIBLE_RANGE",
            f"{param.code}={value} above plausible maximum {param.plausible_max}",
        )

    for key in raw.metadata:
        if not key:
            raise ValidationError("BAD_METADATA", "metadata keys must be non-empty")

    return Measurement(
        timestamp=ts,
        parameter=param.code,
        value=value,
        original_unit=raw.unit,
        source=raw.source,
        location_id=raw.location_id,
        point=point,
        metadata=dict(raw.metadata),
    )
