"""Public HTTP interface.

Reads are open; writes require the configured bearer token. Response
bodies are produced by the payload builders below, which the CLI reuses so
that `--format=json` output is byte-identical to the API body for the same
store state.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from . import ingest as ingest_mod
from .model import SourceMethod, RawMeasurement, format_rfc3339, parse_rfc3339
from .standards import StandardsConfig, assess
from .store import BoundingBox, MeasurementStore, StoreError
from .wire import assessment_to_dict, json_bytes, purpose_to_dict, range_to_dict

DEFAULT_MAX_POINTS = 500


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail=None):
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail
        super().__init__(f"{code}: {message}")

    def body(self) -> dict:
        d = {"code": self.code, "message": self.message}
        if self.detail is not None:
            d["detail"] = self.detail
        return d


# -- payload builders (shared with the CLI) --------------------------------


def build_locations_payload(store: MeasurementStore, bbox: Optional[BoundingBox]) -> list:
    out = []
    for s in store.list_locations(bbox):
        loc = s.location
        d = {
            "id": loc.id,
            "name": loc.name,
            "latitude": loc.point.latitude,
            "longitude": loc.point.longitude,
        }
        if loc.point.altitude is not None:
            d["altitude"] = loc.point.altitude
        if loc.basin is not None:
            d["basin"] = loc.basin
        d["parameter_count"] = s.parameter_count
        d["latest_timestamp"] = (
            format_rfc3339(s.latest_timestamp) if s.latest_timestamp else None
        )
        out.append(d)
    return out


def build_assessment_payload(
    store: MeasurementStore,
    config: StandardsConfig,
    location_id: str,
    purpose_id: Optional[str],
) -> dict:
    if not store.has_location(location_id):
        raise ApiError(404, "UNKNOWN_LOCATION", f"no location {location_id!r}")
    if purpose_id is None:
        purpose_id = config.default_purpose
    profile = config.purposes.get(purpose_id or "")
    if profile is None:
        raise ApiError(
            400,
            "UNKNOWN_PURPOSE",
            f"no purpose {purpose_id!r}",
            detail={"purposes": list(config.purposes)},
        )
    latest = {
        code: (value, ts)
        for code, (value, ts, _src) in store.latest(location_id).items()
    }
    as_of = store.latest_overall_timestamp(location_id)
    a = assess(latest, profile, config.registry, as_of, location_id=location_id)
    return assessment_to_dict(a)


def build_series_payload(
    store: MeasurementStore,
    location_id: str,
    parameter: str,
    t_from: str,
    t_to: str,
    max_points: int,
) -> list:
    try:
        start = parse_rfc3339(t_from)
        end = parse_rfc3339(t_to)
    except ValueError as exc:
        raise ApiError(400, "BAD_RANGE", str(exc))
    try:
        points = store.series(location_id, parameter, start, end, max_points)
    except StoreError as exc:
        raise _store_error(exc)
    return [{"t": format_rfc3339(p.t), "value": p.value, "count": p.count} for p in points]


def build_purposes_payload(config: StandardsConfig) -> list:
    return [
        purpose_to_dict(p, default=(pid == config.default_purpose))
        for pid, p in config.purposes.items()
    ]


def build_parameters_payload(config: StandardsConfig) -> list:
    return [
        {
            "code": p.code,
            "name": p.display_name,
            "unit": p.canonical_unit,
            "plausible_min": p.plausible_min,
            "plausible_max": p.plausible_max,
            "description": p.description,
        }
        for p in config.registry.values()
    ]


def build_standards_payload(config: StandardsConfig, purpose_id: Optional[str]) -> list:
    if purpose_id is not None:
        profile = config.purposes.get(purpose_id)
        if profile is None:
            raise ApiError(400, "UNKNOWN_PURPOSE", f"no purpose {purpose_id!r}")
        profiles = [profile]
    else:
        profiles = list(config.purposes.values())
    out = []
    for profile in profiles:
        for code in profile.relevant_parameters:
            rng = profile.ranges.get(code)
            if rng is not None:
                out.append(range_to_dict(rng))
    return out


def build_correlation_payload(
    store: MeasurementStore,
    location_id: str,
    parameter: str,
    source_a: str,
    source_b: str,
    t_from: Optional[str],
    t_to: Optional[str],
    tolerance_s: float,
) -> dict:
    try:
        sa = SourceMethod(source_a)
        sb = SourceMethod(source_b)
    except ValueError as exc:
        raise ApiError(400, "BAD_SOURCE", str(exc))
    try:
        start = parse_rfc3339(t_from) if t_from else None
        end = parse_rfc3339(t_to) if t_to else None
    except ValueError as exc:
        raise ApiError(400, "BAD_RANGE", str(exc))
    try:
        report = ingest_mod.correlate(
            store, location_id, parameter, sa, sb, t_from=start, t_to=end, tolerance_s=tolerance_s
        )
    except ingest_mod.IngestError as exc:
        raise ApiError(400, exc.code, exc.detail)
    except StoreError as exc:
        raise _store_error(exc)
    return report.to_dict()


def _store_error(exc: StoreError) -> ApiError:
    status = {"UNKNOWN_LOCATION": 404, "BAD_RANGE": 400}.get(exc.code, 500)
    return ApiError(status, exc.code, exc.detail or exc.code)


# -- app -------------------------------------------------------------------


def create_app(
    store: MeasurementStore,
    config: StandardsConfig,
    upload_token: str,
) -> FastAPI:
    app = FastAPI(title="aquamon", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET"],
        allow_headers=["*"],
    )

    def ok(payload) -> Response:
        return Response(content=json_bytes(payload), media_type="application/json")

    @app.exception_handler(ApiError)
    async def handle_api_error(_req: Request, exc: ApiError):
        return Response(
            status_code=exc.status,
            content=json_bytes(exc.body()),
            media_type="application/json",
        )

    def check_token(request: Request) -> None:
        auth = request.headers.get("authorization", "")
        if auth != f"Bearer {upload_token}":
            raise ApiError(401, "UNAUTHORIZED", "missing or invalid bearer token")

    @app.get("/healthz")
    def healthz():
        return ok(
            {
                "status": "ok",
                "store_segments": store.segment_count,
                "config_version": config.version,
            }
        )

    @app.get("/v1/locations")
    def list_locations(bbox: Optional[str] = None):
        box = None
        if bbox is not None:
            try:
                parts = [float(x) for x in bbox.split(",")]
                if len(parts) != 4:
                    raise ValueError("bbox needs 4 numbers")
                box = BoundingBox(parts[0], parts[1], parts[2], parts[3])
            except ValueError as exc:
                raise ApiError(400, "BAD_BBOX", str(exc))
        return ok(build_locations_payload(store, box))

    @app.get("/v1/locations/{location_id}/assessment")
    def assessment(location_id: str, purpose: Optional[str] = None):
        return ok(build_assessment_payload(store, config, location_id, purpose))

    @app.get("/v1/locations/{location_id}/series")
    def series(
        location_id: str,
        parameter: str,
        request: Request = None,
        max_points: int = DEFAULT_MAX_POINTS,
    ):
        t_from = request.query_params.get("from")
        t_to = request.query_params.get("to")
        if not t_from or not t_to:
            raise ApiError(400, "BAD_RANGE", "from and to are required")
        return ok(
            build_series_payload(store, location_id, parameter, t_from, t_to, max_points)
        )

    @app.get("/v1/purposes")
    def purposes():
        return ok(build_purposes_payload(config))

    @app.get("/v1/parameters")
    def parameters():
        return ok(build_parameters_payload(config))

    @app.get("/v1/standards")
    def standards(purpose: Optional[str] = None):
        return ok(build_standards_payload(config, purpose))

    @app.get("/v1/locations/{location_id}/correlation")
    def correlation(
        location_id: str,
        parameter: str,
        source_a: str,
        source_b: str,
        request: Request = None,
        tolerance_s: float = ingest_mod.DEFAULT_PAIR_TOLERANCE_S,
    ):
        t_from = request.query_params.get("from")
        t_to = request.query_params.get("to")
        return ok(
            build_correlation_payload(
                store, location_id, parameter, source_a, source_b, t_from, t_to, tolerance_s
            )
        )

    @app.post("/v1/measurements")
    async def post_measurements(request: Request):
        check_token(request)
        try:
            body = await request.json()
            items = body["measurements"]
        except Exception:
            raise ApiError(400, "PARSE_ERROR", "body must be JSON with a measurements list")
        rows = []
        errors = []
        for i, item in enumerate(items, start=1):
            try:
                raw = RawMeasurement(
                    timestamp=str(item.get("timestamp", "")),
                    parameter=str(item.get("parameter", "")),
                    value=float(item["value"]),
                    unit=str(item.get("unit", "")),
                    source=SourceMethod(item.get("source")),
                    location_id=item.get("location_id"),
                    latitude=item.get("latitude"),
                    longitude=item.get("longitude"),
                    altitude=item.get("altitude"),
                    metadata={str(k): str(v) for k, v in (item.get("metadata") or {}).items()},
                )
                rows.append((i, raw))
            except (KeyError, TypeError, ValueError):
                errors.append(ingest_mod.RowError(i, "BAD_VALUE", "unparseable measurement"))
        report = ingest_mod.ingest_batch(rows, errors, config, store)
        return ok(report.to_dict())

    @app.post("/v1/upload")
    async def upload_csv(request: Request):
        check_token(request)
        data = await request.body()
        try:
            report = ingest_mod.ingest_csv(data, config, store)
        except ingest_mod.IngestError as exc:
            raise ApiError(400, exc.code, exc.detail)
        return ok(report.to_dict())

    return app
