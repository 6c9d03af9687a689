import math
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, strategies as st

from aquamon.model import (
    GeoPoint,
    Parameter,
    RawMeasurement,
    SourceMethod,
    ValidationError,
    format_rfc3339,
    haversine_m,
    normalize_unit,
    parse_rfc3339,
    validate_measurement,
)

NOW = datetime(2016, 6, 1, tzinfo=timezone.utc)

REGISTRY = {
    "PH": Parameter("PH", "pH", "pH-units", 0, 14),
    "DO": Parameter("DO", "Dissolved Oxygen", "mg/L", 0, 20),
    "CHROMIUM": Parameter("CHROMIUM", "Chromium", "mg/L", 0, 10),
}
RULES = {("µg/L", "mg/L"): 0.001}


def raw(**kw):
    base = dict(
        timestamp="2016-03-01T10:00:00Z",
        parameter="PH",
        value=7.0,
        unit="pH-units",
        source=SourceMethod.LAB,
        latitude=25.3,
        longitude=83.0,
    )
    base.update(kw)
    return RawMeasurement(**base)


class TestValidate:
    def test_accepts_clean_row_unchanged(self):
        m = validate_measurement(raw(), REGISTRY, RULES, now=NOW)
        assert m.parameter == "PH"
        assert m.value == 7.0
        assert m.source is SourceMethod.LAB
        assert m.point.latitude == 25.3

    def test_bad_latitude(self):
        with pytest.raises(ValidationError) as e:
            validate_measurement(raw(latitude=95.0), REGISTRY, RULES, now=NOW)
        assert e.value.code == "BAD_COORDINATES"

    def test_above_plausible_ceiling(self):
        with pytest.raises(ValidationError) as e:
            validate_measurement(raw(value=15.2), REGISTRY, RULES, now=NOW)
        assert e.value.code == "OUT_OF_PLAUSIBLE_RANGE"

    def test_below_plausible_floor(self):
        with pytest.raises(ValidationError) as e:
            validate_measurement(raw(value=-1.0), REGISTRY, RULES, now=NOW)
        assert e.value.code == "OUT_OF_PLAUSIBLE_RANGE"

    def test_unknown_parameter(self):
        with pytest.raises(ValidationError) as e:
            validate_measurement(raw(parameter="XX"), REGISTRY, RULES, now=NOW)
        assert e.value.code == "UNKNOWN_PARAMETER"

    def test_unknown_unit(self):
        with pytest.raises(ValidationError) as e:
            validate_measurement(raw(unit="furlongs"), REGISTRY, RULES, now=NOW)
        assert e.value.code == "UNKNOWN_UNIT"

    def test_missing_location(self):
        with pytest.raises(ValidationError) as e:
            validate_measurement(
                raw(latitude=None, longitude=None), REGISTRY, RULES, now=NOW
            )
        assert e.value.code == "MISSING_LOCATION"

    def test_bad_timestamp_text(self):
        with pytest.raises(ValidationError) as e:
            validate_measurement(raw(timestamp="yesterday"), REGISTRY, RULES, now=NOW)
        assert e.value.code == "BAD_TIMESTAMP"

    def test_timestamp_too_far_in_future(self):
        with pytest.raises(ValidationError) as e:
            validate_measurement(raw(timestamp="2016-06-03T00:00:00Z"), REGISTRY, RULES, now=NOW)
        assert e.value.code == "BAD_TIMESTAMP"

    def test_timestamp_within_24h_future_ok(self):
        m = validate_measurement(raw(timestamp="2016-06-01T23:00:00Z"), REGISTRY, RULES, now=NOW)
        assert m.timestamp == NOW + timedelta(hours=23)

    def test_first_failure_wins_timestamp_before_value(self):
        # both timestamp and value are bad; timestamp is checked first
        with pytest.raises(ValidationError) as e:
            validate_measurement(raw(timestamp="nope", value=99.0), REGISTRY, RULES, now=NOW)
        assert e.value.code == "BAD_TIMESTAMP"

    def test_validate_is_idempotent(self):
        m = validate_measurement(raw(value=1500.0, parameter="DO", unit="µg/L"), REGISTRY, RULES, now=NOW)
        assert m.value == pytest.approx(1.5, abs=1e-9)
        again = validate_measurement(
            raw(
                timestamp=format_rfc3339(m.timestamp),
                parameter=m.parameter,
                value=m.value,
                unit=REGISTRY[m.parameter].canonical_unit,
            ),
            REGISTRY,
            RULES,
            now=NOW,
        )
        assert again.value == m.value
        assert again.timestamp == m.timestamp


class TestNormalizeUnit:
    def test_microgram_to_milligram(self):
        assert normalize_unit(1500, "µg/L", REGISTRY["DO"], RULES) == pytest.approx(1.5, abs=1e-9)

    def test_identity_when_canonical(self):
        assert normalize_unit(6.2, "mg/L", REGISTRY["DO"], RULES) == 6.2

    def test_zero_fixed_point(self):
        assert normalize_unit(0.0, "µg/L", REGISTRY["DO"], RULES) == 0.0

    def test_unknown_unit(self):
        with pytest.raises(ValidationError) as e:
            normalize_unit(1.0, "bogus", REGISTRY["DO"], RULES)
        assert e.value.code == "UNKNOWN_UNIT"

    @given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
    def test_canonical_is_fixed_point(self, v):
        once = normalize_unit(v, "mg/L", REGISTRY["DO"], RULES)
        assert normalize_unit(once, "mg/L", REGISTRY["DO"], RULES) == once


class TestTimestamps:
    def test_offset_converted_to_utc(self):
        dt = parse_rfc3339("2016-03-01T15:30:00+05:30")
        assert dt == datetime(2016, 3, 1, 10, 0, tzinfo=timezone.utc)

    def test_naive_rejected(self):
        with pytest.raises(ValueError):
            parse_rfc3339("2016-03-01T10:00:00")

    def test_round_trip(self):
        for text in ("2016-03-01T10:00:00Z", "2016-03-01T10:00:00.25Z"):
            assert format_rfc3339(parse_rfc3339(text)) == text


class TestHaversine:
    def test_zero_distance(self):
        p = GeoPoint(25.3, 83.0)
        assert haversine_m(p, p) == 0.0

    def test_one_degree_latitude(self):
        d = haversine_m(GeoPoint(0, 0), GeoPoint(1, 0))
        assert d == pytest.approx(111_195, rel=0.01)

    def test_symmetry(self):
        a, b = GeoPoint(25.3, 83.0), GeoPoint(25.4, 83.1)
        assert haversine_m(a, b) == pytest.approx(haversine_m(b, a), abs=1e-6)


def test_geopoint_bounds():
    with pytest.raises(ValueError):
        GeoPoint(-91, 0)
    with pytest.raises(ValueError):
        GeoPoint(0, 181)
    with pytest.raises(ValueError):
        GeoPoint(0, 0, math.inf)
