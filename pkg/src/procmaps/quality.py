"""Model quality scoring: replay fitness and graph complexity measures.

Fitness replays each trace against the model.  A trace scores its event
coverage minus two penalties: a flat one if any event had to be skipped
(its activity is not a model node) and one per forced transition (a
consecutive pair of represented events with no model edge, counting the
start and end connections).  Scores are clipped to [0, 1] and averaged.

Complexity reduces the model to node/edge counts.  Four measures are
available: average degree (``AD``), binary Shannon entropy of the
flattened adjacency matrix (``H``), the complete-graph edge ratio
(``Kn``), and the displayed share of the log's elements (``R``).  Scaled
complexity divides by the same measure on the unfiltered model, i.e. the
one discovered at rates (100, 100).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .discovery import ProcessModel, RateParams, discover
from .errors import QualityError
from .eventlog import END, START, EventLog, Trace

MEASURE_KINDS = ("AD", "H", "Kn", "R")

FULL_RATES = RateParams(100, 100)


@dataclass(frozen=True)
class TraceReplay:
    """Replay outcome for one trace."""

    coverage: float
    skipped: int
    forced: int
    represented: tuple[str, ...]
    score: float


@dataclass(frozen=True)
class ReplayResult:
    """Per-trace replays plus their mean, the model's fitness."""

    per_trace: tuple[TraceReplay, ...]
    fitness: float


def replay_trace(
    model: ProcessModel, trace: Trace | tuple[str, ...], num_unique_activities: int
) -> TraceReplay:
    """Replay one trace; ``num_unique_activities`` is the log-level count
    that scales both penalties."""
    events = trace.events if isinstance(trace, Trace) else tuple(trace)
    if not events:
        raise QualityError("cannot replay an empty trace")
    n = len(model.activity_nodes)
    if n == 0:
        raise QualityError("cannot replay against a model with no activity nodes")
    nodes = model.activity_nodes
    edges = model.replay_edges()
    represented = tuple(e for e in events if e in nodes)
    coverage = len(represented) / len(events)
    skipped = 1 if len(represented) < len(events) else 0
    forced = 0
    if represented:
        if (START, represented[0]) not in edges:
            forced += 1
        for u, v in zip(represented, represented[1:]):
            if (u, v) not in edges:
                forced += 1
        if (represented[-1], END) not in edges:
            forced += 1
    alpha = 0.5 / num_unique_activities
    beta = 1.0 / num_unique_activities
    score = max(0.0, coverage - alpha * skipped - beta * forced / n)
    return TraceReplay(coverage, skipped, forced, represented, score)


def replay(model: ProcessModel, log: EventLog) -> ReplayResult:
    """Replay the whole log; fitness is the mean trace score."""
    if log.num_traces == 0:
        raise QualityError("cannot compute fitness over an empty log")
    n_act = log.num_unique_activities
    cache: dict[tuple[str, ...], TraceReplay] = {}
    per_trace = []
    for trace in log.traces:
        hit = cache.get(trace.events)
        if hit is None:
            hit = cache[trace.events] = replay_trace(model, trace, n_act)
        per_trace.append(hit)
    total = math.fsum(r.score for r in per_trace)
    return ReplayResult(tuple(per_trace), total / log.num_traces)


def fitness(model: ProcessModel, log: EventLog) -> float:
    return replay(model, log).fitness


def binary_entropy(p: float, base: float = 2.0) -> float:
    """Entropy of a {0,1} variable with P(1)=p; 0*log(0) taken as 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    h = 0.0
    for q in (p, 1.0 - p):
        if q > 0.0:
            h -= q * math.log(q, base)
    return h


def complexity(
    model: ProcessModel,
    kind: str,
    log: EventLog | None = None,
    base: float = 2.0,
) -> float:
    """Raw complexity of a model.

    ``AD``, ``H`` and ``Kn`` count the sentinels and their edges; ``Kn``
    drops self-loops from the edge count so a complete loop-free graph
    scores 1.  ``R`` compares activity-only counts against the log's
    unique activity/transition totals and needs ``log``.
    """
    if kind not in MEASURE_KINDS:
        raise ValueError(f"unknown complexity measure {kind!r}")
    n = model.num_nodes
    m = model.num_edges
    if kind == "AD":
        return m / n
    if kind == "H":
        return binary_entropy(m / (n * n), base)
    if kind == "Kn":
        if n <= 1:
            raise QualityError("complete-graph ratio needs at least two nodes")
        loopless = sum(1 for u, v in model.edges if u != v)
        return loopless / (n * (n - 1))
    # R: sentinels and their edges are excluded; ratios are against the log
    if log is None:
        raise QualityError("the displayed-share measure needs the log")
    if log.num_unique_transitions == 0:
        raise QualityError("the displayed-share measure needs a log with transitions")
    interior = sum(1 for u, v in model.edges if u != START and v != END)
    return 0.5 * (
        interior / log.num_unique_transitions
        + len(model.activity_nodes) / log.num_unique_activities
    )


def scaled_complexity(
    model: ProcessModel,
    kind: str,
    log: EventLog,
    reference: ProcessModel | None = None,
    base: float = 2.0,
) -> float:
    """Complexity relative to the unfiltered (rates 100/100) model."""
    if reference is None:
        reference = discover(log, FULL_RATES)
    ref_value = complexity(reference, kind, log, base)
    if ref_value == 0.0:
        raise QualityError(f"reference model has zero {kind} complexity")
    return complexity(model, kind, log, base) / ref_value


class ComplexityScorer:
    """Scores models against one log, computing the reference model once."""

    def __init__(self, log: EventLog, base: float = 2.0):
        self.log = log
        self.base = base
        self._reference: ProcessModel | None = None
        self._reference_values: dict[str, float] = {}

    @property
    def reference(self) -> ProcessModel:
        if self._reference is None:
            self._reference = discover(self.log, FULL_RATES)
        return self._reference

    def raw(self, model: ProcessModel, kind: str) -> float:
        return complexity(model, kind, self.log, self.base)

    def scaled(self, model: ProcessModel, kind: str) -> float:
        ref_value = self._reference_values.get(kind)
        if ref_value is None:
            ref_value = complexity(self.reference, kind, self.log, self.base)
            self._reference_values[kind] = ref_value
        if ref_value == 0.0:
            raise QualityError(f"reference model has zero {kind} complexity")
        return self.raw(model, kind) / ref_value
