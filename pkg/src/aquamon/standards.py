"""Safety-range reconciliation and purpose-based assessment.

Authorities (CPCB, BIS, ...) publish overlapping and sometimes conflicting
safe ranges per parameter and use purpose. We merge them by interval
intersection: the strictest combined range wins, and an empty intersection
is a hard configuration error rather than a silent priority choice.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from importlib import resources
from typing import Optional, Sequence

import yaml

from .model import Parameter, UnitRule

DEFAULT_CONFIG_RESOURCE = "standards.yaml"


class SafetyStatus(str, Enum):
    SAFE = "SAFE"
    UNSAFE_LOW = "UNSAFE_LOW"
    UNSAFE_HIGH = "UNSAFE_HIGH"
    NO_DATA = "NO_DATA"
    NOT_APPLICABLE = "NOT_APPLICABLE"


class ConflictError(Exception):
    """Authorities' ranges for one parameter+purpose do not intersect."""

    def __init__(self, parameter: str, purpose: str, authorities: Sequence[str]):
        self.parameter = parameter
        self.purpose = purpose
        self.authorities = list(authorities)
        super().__init__(
            f"CONFLICT: irreconcilable ranges for {parameter}/{purpose} "
            f"from {', '.join(self.authorities)}"
        )


class ConfigError(Exception):
    """Standards configuration failed to load; carries a reason code."""

    def __init__(self, code: str, detail: str = ""):
        self.code = code
        self.detail = detail
        super().__init__(f"{code}: {detail}" if detail else code)


@dataclass(frozen=True)
class RangeSpec:
    """One authority's safe interval for a (parameter, purpose) pair."""

    parameter: str
    purpose: str
    authority: str
    min: Optional[float] = None
    max: Optional[float] = None

    def __post_init__(self):
        if self.min is None and self.max is None:
            raise ValueError(f"{self.parameter}/{self.purpose}: range needs min or max")
        if self.min is not None and self.max is not None and self.min > self.max:
            raise ValueError(f"{self.parameter}/{self.purpose}: min > max")


@dataclass(frozen=True)
class ReconciledRange:
    parameter: str
    purpose: str
    min: Optional[float] = None
    max: Optional[float] = None
    contributing_authorities: tuple[str, ...] = ()


@dataclass
class PurposeProfile:
    id: str
    display_name: str
    relevant_parameters: list[str]
    ranges: dict[str, ReconciledRange]


@dataclass
class AssessmentEntry:
    parameter: str
    relevant: bool
    status: SafetyStatus
    value: Optional[float] = None
    timestamp: Optional[datetime] = None
    range: Optional[ReconciledRange] = None


@dataclass
class Assessment:
    location_id: str
    purpose: str
    as_of: Optional[datetime]
    entries: list[AssessmentEntry]


@dataclass
class StandardsConfig:
    """Everything loaded from one standards document, reconciled and frozen."""

    registry: dict[str, Parameter]
    unit_rules: dict[tuple[str, str], float]
    purposes: dict[str, PurposeProfile]  # insertion order = declaration order
    warnings: list[str] = field(default_factory=list)
    version: str = ""

    @property
    def default_purpose(self) -> Optional[str]:
        return next(iter(self.purposes), None)


def reconcile(specs: Sequence[RangeSpec]) -> ReconciledRange:
    """Intersect all authorities' intervals for one parameter+purpose.

    Absent bounds are unbounded sides. Raises ConflictError when the
    intersection is empty.
    """
    if not specs:
        raise ValueError("reconcile needs at least one RangeSpec")
    parameter, purpose = specs[0].parameter, specs[0].purpose
    for s in specs:
        if (s.parameter, s.purpose) != (parameter, purpose):
            raise ValueError("all specs must share parameter and purpose")

    mins = [s.min for s in specs if s.min is not None]
    maxes = [s.max for s in specs if s.max is not None]
    lo = max(mins) if mins else None
    hi = min(maxes) if maxes else None
    if lo is not None and hi is not None and lo > hi:
        raise ConflictError(parameter, purpose, [s.authority for s in specs])
    return ReconciledRange(
        parameter=parameter,
        purpose=purpose,
        min=lo,
        max=hi,
        contributing_authorities=tuple(s.authority for s in specs),
    )


def evaluate(value: float, range_: ReconciledRange) -> SafetyStatus:
    """Classify a value against a reconciled range; bounds are inclusive."""
    if range_.min is not None and value < range_.min:
        return SafetyStatus.UNSAFE_LOW
    if range_.max is not None and value > range_.max:
        return SafetyStatus.UNSAFE_HIGH
    return SafetyStatus.SAFE


def assess(
    latest: dict[str, tuple[float, datetime]],
    purpose: PurposeProfile,
    registry: dict[str, Parameter],
    as_of: Optional[datetime],
    location_id: str = "",
) -> Assessment:
    """Build the per-parameter verdict for one location and purpose.

    One entry per registered parameter; relevant parameters first in the
    purpose's declared order, the rest alphabetically. A parameter without
    a reconciled range for this purpose is NOT_APPLICABLE regardless of data.
    """
    ordered = [c for c in purpose.relevant_parameters if c in registry]
    ordered += sorted(c for c in registry if c not in purpose.relevant_parameters)

    entries = []
    for code in ordered:
        relevant = code in purpose.relevant_parameters
        rng = purpose.ranges.get(code)
        reading = latest.get(code)
        value, ts = reading if reading else (None, None)
        if rng is None:
            status = SafetyStatus.NOT_APPLICABLE
        elif value is None:
            status = SafetyStatus.NO_DATA
        else:
            status = evaluate(value, rng)
        entries.append(
            AssessmentEntry(
                parameter=code,
                relevant=relevant,
                status=status,
                value=value,
                timestamp=ts,
                range=rng,
            )
        )
    return Assessment(location_id=location_id, purpose=purpose.id, as_of=as_of, entries=entries)


def _opt_float(obj: dict, key: str, where: str) -> Optional[float]:
    v = obj.get(key)
    if v is None:
        return None
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError("PARSE_ERROR", f"{where}: {key} is not a number: {v!r}")


def load_standards(text: str) -> StandardsConfig:
    """Parse and reconcile one standards document (YAML).

    The load is atomic: any parse error, unknown parameter reference,
    duplicate purpose, or range conflict fails the whole load.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("PARSE_ERROR", str(exc))
    if not isinstance(doc, dict):
        raise ConfigError("PARSE_ERROR", "top level must be a mapping")

    warnings: list[str] = []

    registry: dict[str, Parameter] = {}
    for p in doc.get("parameters") or []:
        code = str(p.get("code", "")).strip()
        if not code:
            raise ConfigError("PARSE_ERROR", "parameter without code")
        if code in registry:
            raise ConfigError("PARSE_ERROR", f"duplicate parameter {code}")
        try:
            registry[code] = Parameter(
                code=code,
                display_name=str(p.get("name", code)),
                canonical_unit=str(p.get("unit", "")),
                plausible_min=_opt_float(p, "plausible_min", code),
                plausible_max=_opt_float(p, "plausible_max", code),
                description=str(p.get("description", "")),
            )
        except ValueError as exc:
            raise ConfigError("PARSE_ERROR", str(exc))

    unit_rules: dict[tuple[str, str], float] = {}
    for r in doc.get("unit_rules") or []:
        try:
            rule = UnitRule(str(r["from"]), str(r["to"]), float(r["scale"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("PARSE_ERROR", f"bad unit rule {r!r}: {exc}")
        key = (rule.from_unit, rule.to_unit)
        if key in unit_rules:
            raise ConfigError("PARSE_ERROR", f"duplicate unit rule {key}")
        unit_rules[key] = rule.scale

    purposes: dict[str, PurposeProfile] = {}
    purpose_docs = doc.get("purposes")
    if not purpose_docs:
        warnings.append("no purposes configured")
        purpose_docs = []
    for pd in purpose_docs:
        pid = str(pd.get("id", "")).strip()
        if not pid:
            raise ConfigError("PARSE_ERROR", "purpose without id")
        if pid in purposes:
            raise ConfigError("DUPLICATE_PURPOSE", pid)
        relevant = [str(c) for c in pd.get("parameters") or []]
        if not relevant:
            raise ConfigError("PARSE_ERROR", f"purpose {pid} has no parameters")
        for c in relevant:
            if c not in registry:
                raise ConfigError("UNKNOWN_PARAMETER_IN_RANGE", f"{pid} lists unknown {c}")

        by_param: dict[str, list[RangeSpec]] = {}
        for rd in pd.get("ranges") or []:
            code = str(rd.get("parameter", ""))
            if code not in registry:
                raise ConfigError("UNKNOWN_PARAMETER_IN_RANGE", f"{pid} range for unknown {code}")
            try:
                spec = RangeSpec(
                    parameter=code,
                    purpose=pid,
                    authority=str(rd.get("authority", "")),
                    min=_opt_float(rd, "min", f"{pid}/{code}"),
                    max=_opt_float(rd, "max", f"{pid}/{code}"),
                )
            except ValueError as exc:
                raise ConfigError("PARSE_ERROR", str(exc))
            by_param.setdefault(code, []).append(spec)

        ranges = {code: reconcile(specs) for code, specs in by_param.items()}
        for code in ranges:
            if code not in relevant:
                raise ConfigError(
                    "PARSE_ERROR", f"purpose {pid} has a range for non-relevant {code}"
                )
        purposes[pid] = PurposeProfile(
            id=pid,
            display_name=str(pd.get("name", pid)),
            relevant_parameters=relevant,
            ranges=ranges,
        )

    version = hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
    return StandardsConfig(
        registry=registry,
        unit_rules=unit_rules,
        purposes=purposes,
        warnings=warnings,
        version=version,
    )


def load_standards_file(path) -> StandardsConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return load_standards(fh.read())


def load_default_standards() -> StandardsConfig:
    """Load the bundled default configuration."""
    text = resources.files("aquamon.data").joinpath(DEFAULT_CONFIG_RESOURCE).read_text("utf-8")
    return load_standards(text)
