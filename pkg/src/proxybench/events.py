"""Hardware-event vocabulary, ratio metrics, and the linear count model.

A program's hardware-event counts are modeled as a linear combination of
per-block event profiles: running block ``j`` a total of ``N_j`` times
contributes ``counts_j * N_j / n0`` to every event, where ``counts_j`` are
the block's occurrences per ``n0`` executions.  Connecting programs adds
their counts; scaling a program scales its counts.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import (
    DocumentFormatError,
    IncompleteProfileError,
    UndefinedMetricError,
    UnknownEventError,
    UnresolvedBlockError,
)
from .jsonutil import dumps_canonical, loads_document

# Occurrences per this many block executions is the calibration convention.
N0_DEFAULT = 10_000_000

# Canonical hardware-event names.  Everything else is rejected at parse time.
EVENTS = (
    "cycles",
    "instructions",
    "branch_insts",
    "branch_misses",
    "l1d_accesses",
    "l1d_misses",
    "l1i_accesses",
    "l1i_misses",
    "l2_accesses",
    "l2_misses",
    "l3_accesses",
    "l3_misses",
    "dtlb_accesses",
    "dtlb_misses",
    "itlb_accesses",
    "itlb_misses",
    "load_insts",
    "store_insts",
    "fp_insts",
    "int_insts",
    "vec_insts",
)

_EVENT_SET = frozenset(EVENTS)

# miss events may never exceed their access events (branch misses pair with
# retired branch instructions the same way)
MISS_ACCESS_PAIRS = (
    ("l1d_misses", "l1d_accesses"),
    ("l1i_misses", "l1i_accesses"),
    ("l2_misses", "l2_accesses"),
    ("l3_misses", "l3_accesses"),
    ("dtlb_misses", "dtlb_accesses"),
    ("itlb_misses", "itlb_accesses"),
    ("branch_misses", "branch_insts"),
)

CATEGORIES = (
    "processor_performance",
    "branch_prediction",
    "cache_behavior",
    "tlb_behavior",
    "instruction_mix",
)


def require_event(name: str) -> str:
    if name not in _EVENT_SET:
        raise UnknownEventError(f"unknown event name: {name!r}")
    return name


@dataclass(frozen=True)
class MetricDefinition:
    """A ratio metric: numerator event over denominator event."""

    id: str
    numerator: str
    denominator: str
    category: str

    def __post_init__(self):
        require_event(self.numerator)
        require_event(self.denominator)
        if self.numerator == self.denominator:
            raise DocumentFormatError(
                f"metric {self.id}: numerator and denominator must differ"
            )
        if self.category not in CATEGORIES:
            raise DocumentFormatError(
                f"metric {self.id}: unknown category {self.category!r}"
            )


# The 14 built-in metrics: CPI, branch misprediction rate, local miss rates
# for both L1 caches, L2, L3 and both TLBs, and six instruction-mix ratios
# over total retired instructions.
METRICS = (
    MetricDefinition("cpi", "cycles", "instructions", "processor_performance"),
    MetricDefinition("branch_miss_rate", "branch_misses", "branch_insts", "branch_prediction"),
    MetricDefinition("l1d_miss_rate", "l1d_misses", "l1d_accesses", "cache_behavior"),
    MetricDefinition("l1i_miss_rate", "l1i_misses", "l1i_accesses", "cache_behavior"),
    MetricDefinition("l2_miss_rate", "l2_misses", "l2_accesses", "cache_behavior"),
    MetricDefinition("l3_miss_rate", "l3_misses", "l3_accesses", "cache_behavior"),
    MetricDefinition("dtlb_miss_rate", "dtlb_misses", "dtlb_accesses", "tlb_behavior"),
    MetricDefinition("itlb_miss_rate", "itlb_misses", "itlb_accesses", "tlb_behavior"),
    MetricDefinition("load_ratio", "load_insts", "instructions", "instruction_mix"),
    MetricDefinition("store_ratio", "store_insts", "instructions", "instruction_mix"),
    MetricDefinition("branch_ratio", "branch_insts", "instructions", "instruction_mix"),
    MetricDefinition("fp_ratio", "fp_insts", "instructions", "instruction_mix"),
    MetricDefinition("int_ratio", "int_insts", "instructions", "instruction_mix"),
    MetricDefinition("vec_ratio", "vec_insts", "instructions", "instruction_mix"),
)

METRICS_BY_ID = {definition.id: definition for definition in METRICS}

# Categories whose metric values are rates/shares bounded by 1.
_BOUNDED_CATEGORIES = frozenset(
    ("branch_prediction", "cache_behavior", "tlb_behavior", "instruction_mix")
)


def _validate_counts(counts: Mapping[str, float], *, what: str) -> dict[str, float]:
    clean: dict[str, float] = {}
    for name, value in counts.items():
        require_event(name)
        value = float(value)
        if not math.isfinite(value) or value < 0:
            raise DocumentFormatError(f"{what}: count for {name} must be finite and >= 0")
        clean[name] = value
    for miss, access in MISS_ACCESS_PAIRS:
        if miss in clean and access in clean and clean[miss] > clean[access]:
            raise DocumentFormatError(
                f"{what}: {miss}={clean[miss]} exceeds {access}={clean[access]}"
            )
    # canonical key order so downstream serialization is stable
    return {name: clean[name] for name in EVENTS if name in clean}


@dataclass(frozen=True)
class EventProfile:
    """Per-block event occurrences, normalized to ``n0`` block executions."""

    counts: Mapping[str, float]
    n0: int = N0_DEFAULT

    def __post_init__(self):
        if int(self.n0) <= 0:
            raise DocumentFormatError("profile n0 must be a positive integer")
        object.__setattr__(self, "n0", int(self.n0))
        clean = _validate_counts(self.counts, what="profile")
        if clean.get("instructions", 0.0) <= 0:
            raise DocumentFormatError("profile must have instructions > 0")
        object.__setattr__(self, "counts", clean)


@dataclass(frozen=True)
class MeasurementResult:
    """Event counts observed (or simulated) for one run of a program."""

    counts: Mapping[str, float]
    provenance: str = "simulated"

    def __post_init__(self):
        if self.provenance not in ("simulated", "imported"):
            raise DocumentFormatError(
                f"provenance must be 'simulated' or 'imported', got {self.provenance!r}"
            )
        object.__setattr__(self, "counts", _validate_counts(self.counts, what="measurement"))

    def __getitem__(self, event: str) -> float:
        return self.counts[require_event(event)]


@dataclass(frozen=True)
class TargetMetrics:
    """Target values for a set of built-in metrics."""

    targets: Mapping[str, float]

    def __post_init__(self):
        clean: dict[str, float] = {}
        for metric_id, value in self.targets.items():
            definition = METRICS_BY_ID.get(metric_id)
            if definition is None:
                raise DocumentFormatError(f"no metric definition for {metric_id!r}")
            value = float(value)
            if not math.isfinite(value) or value <= 0:
                raise DocumentFormatError(f"target {metric_id} must be finite and > 0")
            if definition.category in _BOUNDED_CATEGORIES and value > 1:
                raise DocumentFormatError(f"target {metric_id} must be in (0, 1]")
            clean[metric_id] = value
        object.__setattr__(self, "targets", clean)

    def definitions(self) -> tuple[MetricDefinition, ...]:
        return tuple(METRICS_BY_ID[m] for m in self.targets)


@dataclass(frozen=True)
class ProxyProgram:
    """Ordered (block id, execution count) pairs; the synthesized artifact."""

    entries: tuple[tuple[str, int], ...] = field(default_factory=tuple)

    def __post_init__(self):
        clean = []
        for block_id, executions in self.entries:
            if isinstance(executions, float):
                if not executions.is_integer():
                    raise DocumentFormatError(
                        f"block {block_id}: executions must be an integer, got {executions}"
                    )
                executions = int(executions)
            try:
                executions = operator.index(executions)
            except TypeError:
                raise DocumentFormatError(
                    f"block {block_id}: executions must be an integer, got {executions!r}"
                ) from None
            if executions < 0:
                raise DocumentFormatError(
                    f"block {block_id}: executions must be >= 0, got {executions}"
                )
            clean.append((str(block_id), executions))
        object.__setattr__(self, "entries", tuple(clean))

    def merged(self) -> "ProxyProgram":
        """Collapse duplicate block ids by summing execution counts."""
        totals: dict[str, int] = {}
        for block_id, executions in self.entries:
            totals[block_id] = totals.get(block_id, 0) + executions
        return ProxyProgram(tuple(totals.items()))

    def scaled(self, k: int) -> "ProxyProgram":
        try:
            k = operator.index(k)
        except TypeError:
            raise DocumentFormatError("scale factor must be a nonnegative integer") from None
        if k < 0:
            raise DocumentFormatError("scale factor must be a nonnegative integer")
        return ProxyProgram(tuple((b, n * k) for b, n in self.entries))

    def __add__(self, other: "ProxyProgram") -> "ProxyProgram":
        return ProxyProgram(self.entries + other.entries)

    @property
    def runnable(self) -> bool:
        return any(n > 0 for _, n in self.entries)

    def block_ids(self) -> tuple[str, ...]:
        return tuple(b for b, _ in self.entries)


def predict_events(program: ProxyProgram, library) -> MeasurementResult:
    """Predicted counts of ``program``: sum of profile counts scaled by N_j/n0.

    Duplicate entries are merged first.  The per-event sum is accumulated with
    ``math.fsum`` and divided by ``n0`` once, so programs whose contributions
    are exactly representable predict exactly.
    """
    merged = program.merged()
    profiles = []
    for block_id, executions in merged.entries:
        spec = library.blocks.get(block_id)
        if spec is None:
            raise UnresolvedBlockError(f"program references unknown block {block_id!r}")
        if spec.profile is None:
            raise IncompleteProfileError(f"block {block_id} has no calibrated profile")
        profiles.append((spec.profile, executions))

    n0 = float(library.n0)
    seen: set[str] = set()
    for profile, _ in profiles:
        seen.update(profile.counts)
    counts = {
        event: math.fsum(profile.counts.get(event, 0.0) * executions for profile, executions in profiles) / n0
        for event in EVENTS
        if event in seen
    }
    return MeasurementResult(counts, provenance="simulated")


def compute_metric(counts: MeasurementResult, definition: MetricDefinition) -> float:
    numerator = counts.counts.get(definition.numerator)
    denominator = counts.counts.get(definition.denominator)
    if numerator is None:
        raise UndefinedMetricError(
            f"metric {definition.id}: event {definition.numerator} not measured"
        )
    if denominator is None or denominator == 0:
        raise UndefinedMetricError(
            f"metric {definition.id}: denominator {definition.denominator} is zero or missing"
        )
    return numerator / denominator


def compute_all_metrics(
    counts: MeasurementResult, definitions: Iterable[MetricDefinition]
) -> dict[str, float]:
    return {d.id: compute_metric(counts, d) for d in definitions}


# ---------------------------------------------------------------------------
# document formats


def _require_keys(doc: dict, allowed: set[str], required: set[str], what: str) -> None:
    if not isinstance(doc, dict):
        raise DocumentFormatError(f"{what}: expected a JSON object")
    unknown = set(doc) - allowed
    if unknown:
        raise DocumentFormatError(f"{what}: unknown keys {sorted(unknown)}")
    missing = required - set(doc)
    if missing:
        raise DocumentFormatError(f"{what}: missing keys {sorted(missing)}")


def profile_to_doc(profile: EventProfile) -> dict:
    return {"n0": profile.n0, "counts": dict(profile.counts)}


def profile_from_doc(doc: dict) -> EventProfile:
    _require_keys(doc, {"n0", "counts"}, {"n0", "counts"}, "profile")
    if not isinstance(doc["counts"], dict):
        raise DocumentFormatError("profile: 'counts' must be an object")
    return EventProfile(doc["counts"], doc["n0"])


def dump_profile(profile: EventProfile) -> str:
    return dumps_canonical(profile_to_doc(profile))


def load_profile(text: str) -> EventProfile:
    return profile_from_doc(loads_document(text))


def targets_to_doc(targets: TargetMetrics) -> dict:
    return {"metrics": dict(targets.targets)}


def targets_from_doc(doc: dict) -> TargetMetrics:
    _require_keys(doc, {"metrics"}, {"metrics"}, "targets")
    if not isinstance(doc["metrics"], dict):
        raise DocumentFormatError("targets: 'metrics' must be an object")
    return TargetMetrics(doc["metrics"])


def dump_targets(targets: TargetMetrics) -> str:
    return dumps_canonical(targets_to_doc(targets))


def load_targets(text: str) -> TargetMetrics:
    return targets_from_doc(loads_document(text))


def program_to_doc(program: ProxyProgram) -> dict:
    return {
        "entries": [
            {"block": block_id, "executions": executions}
            for block_id, executions in program.entries
        ]
    }


def program_from_doc(doc: dict) -> ProxyProgram:
    _require_keys(doc, {"entries"}, {"entries"}, "program")
    if not isinstance(doc["entries"], list):
        raise DocumentFormatError("program: 'entries' must be a list")
    entries = []
    for entry in doc["entries"]:
        _require_keys(entry, {"block", "executions"}, {"block", "executions"}, "program entry")
        entries.append((entry["block"], entry["executions"]))
    return ProxyProgram(tuple(entries))


def dump_program(program: ProxyProgram) -> str:
    return dumps_canonical(program_to_doc(program))


def load_program(text: str) -> ProxyProgram:
    return program_from_doc(loads_document(text))
