"""Operator CLI: run the service, ingest files offline, assess, correlate,
export.

Exit codes: 0 success, 1 domain error (bad data, unknown location/purpose),
2 configuration error (unloadable or conflicting standards, bad flags).
"""

from __future__ import annotations

import os
import sys
from typing import Optional

import click

from . import api as api_mod
from . import ingest as ingest_mod
from .model import SourceMethod, parse_rfc3339
from .standards import ConfigError, ConflictError, load_default_standards, load_standards_file
from .store import MeasurementStore, StoreError
from .wire import json_bytes

STATUS_MARKS = {
    "SAFE": ("ok", "green"),
    "UNSAFE_LOW": ("LOW !", "red"),
    "UNSAFE_HIGH": ("HIGH !", "red"),
    "NO_DATA": ("no reading", "yellow"),
    "NOT_APPLICABLE": ("-", None),
}


def _load_config(path: Optional[str]):
    try:
        if path:
            return load_standards_file(path)
        return load_default_standards()
    except ConflictError as exc:
        raise click.exceptions.Exit(_config_fail(str(exc)))
    except (ConfigError, OSError) as exc:
        raise click.exceptions.Exit(_config_fail(f"standards config failed to load: {exc}"))


def _config_fail(msg: str) -> int:
    click.echo(msg, err=True)
    return 2


def _fail(msg: str) -> None:
    click.echo(msg, err=True)
    sys.exit(1)


def _open_store(store_dir: str) -> MeasurementStore:
    try:
        return MeasurementStore(store_dir)
    except StoreError as exc:
        _fail(str(exc))


@click.group()
@click.option("--store-dir", default="./data", show_default=True, help="Store directory.")
@click.option("--standards", "standards_path", default=None, help="Standards config file (default: bundled).")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table", show_default=True)
@click.pass_context
def main(ctx, store_dir, standards_path, fmt):
    """Water-quality data platform."""
    ctx.obj = {"store_dir": store_dir, "standards": standards_path, "format": fmt}


@main.command()
@click.option("--listen", default="127.0.0.1:8080", show_default=True, help="host:port to bind.")
@click.option("--token", default=None, help="Upload bearer token (or AQUAMON_TOKEN env).")
@click.pass_context
def serve(ctx, listen, token):
    """Run the HTTP API service."""
    import uvicorn

    config = _load_config(ctx.obj["standards"])
    token = token or os.environ.get("AQUAMON_TOKEN") or "dev-token"
    store = _open_store(ctx.obj["store_dir"])
    host, _, port = listen.partition(":")
    app = api_mod.create_app(store, config, token)
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8080), log_level="info")
    finally:
        store.close()


@main.command("ingest-file")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def ingest_file(ctx, path):
    """Ingest a CSV file into the store; exits 1 if any row was rejected."""
    config = _load_config(ctx.obj["standards"])
    with open(path, "rb") as fh:
        data = fh.read()
    store = _open_store(ctx.obj["store_dir"])
    try:
        report = ingest_mod.ingest_csv(data, config, store)
    except ingest_mod.IngestError as exc:
        store.close()
        _fail(str(exc))
    store.close()
    if ctx.obj["format"] == "json":
        click.echo(json_bytes(report.to_dict()).decode("utf-8"))
    else:
        click.echo(f"accepted:  {report.accepted}")
        click.echo(f"rejected:  {report.rejected}")
        click.echo(f"inserted:  {report.inserted}")
        click.echo(f"replaced:  {report.replaced}")
        if report.new_locations:
            click.echo(f"new locations: {', '.join(report.new_locations)}")
        for r in report.rejections:
            click.echo(f"  row {r.row}: {r.code} {r.detail}")
    sys.exit(0 if report.accepted > 0 and report.rejected == 0 else 1)


@main.command()
@click.option("--location", "location_id", required=True)
@click.option("--purpose", default=None, help="Purpose id (default: configured default).")
@click.pass_context
def assess(ctx, location_id, purpose):
    """Assess a location against a purpose's reconciled safe ranges."""
    config = _load_config(ctx.obj["standards"])
    store = _open_store(ctx.obj["store_dir"])
    try:
        payload = api_mod.build_assessment_payload(store, config, location_id, purpose)
    except api_mod.ApiError as exc:
        store.close()
        if exc.code == "UNKNOWN_PURPOSE":
            _fail(f"{exc.message}; available: {', '.join(config.purposes)}")
        _fail(exc.message)
    store.close()
    if ctx.obj["format"] == "json":
        click.echo(json_bytes(payload).decode("utf-8"))
        return
    click.echo(f"location: {payload['location_id']}  purpose: {payload['purpose']}")
    click.echo(f"as of:    {payload['as_of']}")
    use_color = sys.stdout.isatty()
    for e in payload["entries"]:
        mark, color = STATUS_MARKS[e["status"]]
        if use_color and color:
            mark = click.style(mark, fg=color)
        star = "*" if e["relevant"] else " "
        value = "" if e["value"] is None else f"{e['value']}"
        rng = e["range"]
        bounds = ""
        if rng:
            lo = "" if rng["min"] is None else rng["min"]
            hi = "" if rng["max"] is None else rng["max"]
            bounds = f"[{lo}, {hi}]"
        click.echo(f" {star} {e['parameter']:<12} {value:>12}  {bounds:<16} {mark}")


@main.command()
@click.option("--location", "location_id", required=True)
@click.option("--parameter", required=True)
@click.option("--source-a", required=True, type=click.Choice([s.value for s in SourceMethod]))
@click.option("--source-b", required=True, type=click.Choice([s.value for s in SourceMethod]))
@click.option("--from", "t_from", default=None)
@click.option("--to", "t_to", default=None)
@click.option("--tolerance-s", default=ingest_mod.DEFAULT_PAIR_TOLERANCE_S, show_default=True)
@click.option("--plot", "plot_path", default=None, type=click.Path(), help="Write a scatter figure here.")
@click.pass_context
def correlate(ctx, location_id, parameter, source_a, source_b, t_from, t_to, tolerance_s, plot_path):
    """Cross-source validation correlation for one location and parameter."""
    _load_config(ctx.obj["standards"])  # fail fast on broken config
    store = _open_store(ctx.obj["store_dir"])
    try:
        payload = api_mod.build_correlation_payload(
            store, location_id, parameter, source_a, source_b, t_from, t_to, tolerance_s
        )
        if plot_path:
            sa, sb = SourceMethod(source_a), SourceMethod(source_b)
            start = parse_rfc3339(t_from) if t_from else None
            end = parse_rfc3339(t_to) if t_to else None
            a = store.readings(location_id, parameter, source=sa, t_from=start, t_to=end)
            b = store.readings(location_id, parameter, source=sb, t_from=start, t_to=end)
            pairs = ingest_mod.pair_readings(a, b, tolerance_s)
            from .plotting import save_correlation_figure

            save_correlation_figure(pairs, plot_path, source_a, source_b, payload["r"])
    except api_mod.ApiError as exc:
        store.close()
        _fail(exc.message)
    store.close()
    if ctx.obj["format"] == "json":
        click.echo(json_bytes(payload).decode("utf-8"))
    else:
        click.echo(f"{parameter} at {location_id}: {source_a} vs {source_b}")
        click.echo(f"pairs: {payload['n_pairs']}")
        if payload["r"] is not None:
            click.echo(f"r = {payload['r']:.6f}")
        else:
            click.echo(f"r unavailable: {payload['reason']}")
        if plot_path:
            click.echo(f"figure written to {plot_path}")


@main.command()
@click.option("--location", "location_id", required=True)
@click.option("--parameter", default=None)
@click.option("--from", "t_from", default=None)
@click.option("--to", "t_to", default=None)
@click.option("--plot", "plot_path", default=None, type=click.Path(), help="Write a series figure here.")
@click.pass_context
def export(ctx, location_id, parameter, t_from, t_to, plot_path):
    """Export measurements as CSV (ingest contract) on standard output."""
    config = _load_config(ctx.obj["standards"])
    store = _open_store(ctx.obj["store_dir"])
    try:
        start = parse_rfc3339(t_from) if t_from else None
        end = parse_rfc3339(t_to) if t_to else None
        if start and end and start >= end:
            raise StoreError("BAD_RANGE", "from must precede to")
        rows = store.export_rows(location_id, parameter, start, end)
    except (StoreError, ValueError) as exc:
        store.close()
        _fail(str(exc))
    if plot_path:
        by_param: dict[str, list] = {}
        for r in rows:
            by_param.setdefault(r["parameter"], []).append(
                (parse_rfc3339(r["timestamp"]), float(r["value"]))
            )
        from .plotting import save_series_figure

        save_series_figure(by_param, plot_path, title=f"{location_id}")
    store.close()
    sys.stdout.write(ingest_mod.serialize_csv(rows, config.registry))
    if plot_path:
        click.echo(f"figure written to {plot_path}", err=True)


@main.group()
def standards():
    """Standards configuration tools."""


@standards.command("check")
@click.argument("path", required=False, type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def standards_check(ctx, path):
    """Load a standards config and report what it contains."""
    config = _load_config(path or ctx.obj["standards"])
    ranged = {c for p in config.purposes.values() for c in p.ranges}
    click.echo(f"parameters: {len(config.registry)}")
    click.echo(f"parameters with reconciled ranges: {len(ranged)}")
    click.echo(f"unit rules: {len(config.unit_rules)}")
    click.echo(f"purposes: {len(config.purposes)} ({', '.join(config.purposes)})")
    if config.default_purpose:
        click.echo(f"default purpose: {config.default_purpose}")
    for w in config.warnings:
        click.echo(f"warning: {w}")


if __name__ == "__main__":
    main()
