import random
from datetime import datetime, timedelta, timezone

import pytest

from aquamon.model import GeoPoint, Location, Measurement, SourceMethod
from aquamon.standards import load_default_standards
from aquamon.store import MeasurementStore

BASE_T = datetime(2016, 3, 1, tzinfo=timezone.utc)


@pytest.fixture(scope="session")
def config():
    return load_default_standards()


@pytest.fixture
def store(tmp_path):
    s = MeasurementStore(tmp_path / "store")
    yield s
    s.close()


def make_locations(n=60):
    """Grid of locations far enough apart (>100 m) to never merge."""
    locs = []
    for i in range(n):
        lat = 24.0 + 0.05 * (i // 10)
        lon = 80.0 + 0.05 * (i % 10)
        locs.append(Location(id=f"fix-{i:03d}", name=f"Station {i:03d}", point=GeoPoint(lat, lon)))
    return locs


def make_measurements(config, locations, readings_per_location=30, seed=7):
    """Synthetic plausible readings across all sources and many parameters."""
    rng = random.Random(seed)
    params = list(config.registry.values())
    sources = list(SourceMethod)
    out = []
    for loc in locations:
        for k in range(readings_per_location):
            p = params[(k + rng.randrange(3)) % len(params)]
            lo = p.plausible_min if p.plausible_min is not None else 0.0
            hi = p.plausible_max if p.plausible_max is not None else 100.0
            hi = min(hi, lo + 1000)
            out.append(
                Measurement(
                    timestamp=BASE_T + timedelta(hours=k, minutes=rng.randrange(60)),
                    parameter=p.code,
                    value=round(rng.uniform(lo, hi), 6),
                    original_unit=p.canonical_unit,
                    source=sources[k % 3],
                    location_id=loc.id,
                )
            )
    return out


class ReplayOracle:
    """In-memory reference model of the store: a dict keyed by the dedup
    identity, replayed batch by batch."""

    def __init__(self):
        self.data = {}

    def put_batch(self, measurements):
        inserted = replaced = 0
        for m in measurements:
            key = (m.location_id, m.parameter, m.timestamp, m.source)
            if key in self.data:
                replaced += 1
            else:
                inserted += 1
            self.data[key] = m.value
        return inserted, replaced

    def latest(self, location_id, parameter=None):
        from aquamon.model import SOURCE_PRIORITY

        best = {}
        for (lid, param, ts, src), value in self.data.items():
            if lid != location_id:
                continue
            if parameter is not None and param != parameter:
                continue
            rank = (ts, SOURCE_PRIORITY[src])
            if param not in best or rank > best[param][0]:
                best[param] = (rank, value, ts, src)
        return {p: (v, ts, src) for p, (_rank, v, ts, src) in best.items()}

    def raw_window(self, location_id, parameter, t_from, t_to):
        pts = [
            (ts, v)
            for (lid, param, ts, _src), v in self.data.items()
            if lid == location_id and param == parameter and t_from <= ts < t_to
        ]
        pts.sort(key=lambda p: p[0])
        return pts
