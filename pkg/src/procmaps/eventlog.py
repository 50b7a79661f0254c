"""Flat event logs: parsing, in-memory representation, synthetic generation.

A log is a list of traces; a trace is one case's ordered activity labels.
Events are atomic: timestamps, when present in the input, are used only to
order events within a case and are then discarded.
"""
from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Mapping, Sequence, TextIO

from .errors import EmptyLogError, GenerationError, LogFormatError

# Reserved node labels for the model's entry/exit sentinels.  Activities may
# not use them, otherwise serialized models would be ambiguous.
START = "__start__"
END = "__end__"
RESERVED_LABELS = frozenset({START, END})


@dataclass(frozen=True)
class Trace:
    """One process execution: a case id and its ordered activity labels."""

    case_id: str
    events: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.events:
            raise ValueError(f"trace {self.case_id!r} has no events")

    def __len__(self) -> int:
        return len(self.events)


@dataclass(frozen=True)
class EventLog:
    """An immutable event log with derived element counts.

    ``num_traces`` is the number of cases.  ``num_unique_activities`` and
    ``num_unique_transitions`` count the distinct activity labels and the
    distinct directly-follows pairs observed anywhere in the log; the
    complexity measures use them as the "possible elements" baseline.
    """

    traces: tuple[Trace, ...]
    alphabet: frozenset[str] = field(init=False)
    num_traces: int = field(init=False)
    num_unique_activities: int = field(init=False)
    num_unique_transitions: int = field(init=False)
    total_events: int = field(init=False)

    def __post_init__(self) -> None:
        alphabet: set[str] = set()
        transitions: set[tuple[str, str]] = set()
        total = 0
        for trace in self.traces:
            alphabet.update(trace.events)
            transitions.update(zip(trace.events, trace.events[1:]))
            total += len(trace.events)
        bad = alphabet & RESERVED_LABELS
        if bad:
            raise LogFormatError(
                f"activity label(s) {sorted(bad)} are reserved for the start/end sentinels"
            )
        object.__setattr__(self, "alphabet", frozenset(alphabet))
        object.__setattr__(self, "num_traces", len(self.traces))
        object.__setattr__(self, "num_unique_activities", len(alphabet))
        object.__setattr__(self, "num_unique_transitions", len(transitions))
        object.__setattr__(self, "total_events", total)

    def transitions(self) -> set[tuple[str, str]]:
        """Distinct directly-follows pairs observed in the log."""
        pairs: set[tuple[str, str]] = set()
        for trace in self.traces:
            pairs.update(zip(trace.events, trace.events[1:]))
        return pairs


def from_traces(sequences: Iterable[Sequence[str]], case_ids: Sequence[str] | None = None) -> EventLog:
    """Build a log from plain activity sequences (mostly for tests and demos)."""
    seqs = [tuple(s) for s in sequences]
    if case_ids is None:
        case_ids = [f"case_{i + 1}" for i in range(len(seqs))]
    return EventLog(tuple(Trace(cid, events) for cid, events in zip(case_ids, seqs)))


@dataclass(frozen=True)
class LogFormat:
    """Column configuration for delimiter-separated log files.

    The case and activity columns are required.  The timestamp column is
    used for within-case ordering when it appears in the header, otherwise
    row order is kept; set ``timestamp_col=None`` to ignore timestamps even
    when the column exists.
    """

    case_col: str = "case_id"
    activity_col: str = "activity"
    timestamp_col: str | None = "timestamp"
    delimiter: str = ","


def _parse_timestamp(text: str, line_no: int) -> datetime:
    value = text.strip()
    # fromisoformat() in 3.10 does not accept a trailing Z
    if value.endswith(("Z", "z")):
        value = value[:-1] + "+00:00"
    try:
        return datetime.fromisoformat(value)
    except ValueError:
        raise LogFormatError(f"line {line_no}: unparsable timestamp {text!r}") from None


def parse_log(source: TextIO | str, fmt: LogFormat | None = None) -> EventLog:
    """Parse delimiter-separated text with a header row into an event log.

    Rows are grouped by case id; within a case events are ordered by the
    timestamp column when configured and present (ties broken by row order),
    else by row order.  Activity labels and case ids are stripped of
    surrounding whitespace and compared exactly.
    """
    fmt = fmt or LogFormat()
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source, delimiter=fmt.delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyLogError("log source is empty") from None
    header = [h.strip() for h in header]
    columns = {name: idx for idx, name in enumerate(header)}
    for required in (fmt.case_col, fmt.activity_col):
        if required not in columns:
            raise LogFormatError(f"missing required column {required!r} in header {header}")
    case_idx = columns[fmt.case_col]
    act_idx = columns[fmt.activity_col]
    ts_idx = columns.get(fmt.timestamp_col) if fmt.timestamp_col else None

    # case id -> list of (timestamp or None, row order, activity)
    cases: dict[str, list[tuple[datetime | None, int, str]]] = {}
    row_no = 1
    got_rows = False
    for row in reader:
        row_no += 1
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) <= max(case_idx, act_idx, ts_idx if ts_idx is not None else 0):
            raise LogFormatError(f"line {row_no}: expected {len(header)} fields, got {len(row)}")
        got_rows = True
        case_id = row[case_idx].strip()
        activity = row[act_idx].strip()
        if not activity:
            raise LogFormatError(f"line {row_no}: empty activity label")
        stamp = _parse_timestamp(row[ts_idx], row_no) if ts_idx is not None else None
        cases.setdefault(case_id, []).append((stamp, row_no, activity))
    if not got_rows:
        raise EmptyLogError("log source contains no event rows")

    traces = []
    for case_id, events in cases.items():  # insertion order = first appearance
        if ts_idx is not None:
            try:
                events.sort(key=lambda item: (item[0], item[1]))
            except TypeError:
                raise LogFormatError(
                    f"case {case_id!r} mixes timezone-aware and naive timestamps"
                ) from None
        traces.append(Trace(case_id, tuple(activity for _, _, activity in events)))
    return EventLog(tuple(traces))


def to_rows(log: EventLog) -> list[tuple[str, str]]:
    """Flatten a log back to (case_id, activity) rows in trace order."""
    return [(trace.case_id, event) for trace in log.traces for event in trace.events]


def write_log(log: EventLog, sink: TextIO, fmt: LogFormat | None = None) -> None:
    """Serialize a log as delimiter-separated rows with a header.

    Timestamps are not emitted (they are discarded at parse time), so
    re-parsing relies on row order and reproduces the log exactly.
    """
    fmt = fmt or LogFormat()
    writer = csv.writer(sink, delimiter=fmt.delimiter, lineterminator="\n")
    writer.writerow([fmt.case_col, fmt.activity_col])
    writer.writerows(to_rows(log))


def generate_synthetic(
    model: Mapping[str, Sequence[tuple[str, float]]],
    seed: int,
    num_cases: int,
) -> EventLog:
    """Generate a log by random walks over a weighted directed graph.

    ``model`` maps each node to its weighted successors and must contain the
    keys ``"start"`` and (as a successor somewhere) ``"end"``; every walk
    starts at ``"start"``, picks successors with probability proportional to
    weight, and stops at ``"end"``.  Fixed seeds give identical logs.
    """
    if num_cases <= 0:
        raise EmptyLogError("num_cases must be positive")
    if "start" not in model:
        raise GenerationError("model has no 'start' node")
    for node, successors in model.items():
        if node == "end" and successors:
            raise GenerationError("'end' must not have outgoing edges")
        if node != "end" and not successors:
            raise GenerationError(f"node {node!r} has no successors")
        for succ, weight in successors:
            if weight <= 0:
                raise GenerationError(f"edge {node!r} -> {succ!r} has non-positive weight")
            if node == "start" and succ == "end":
                raise GenerationError("a direct start -> end edge would produce empty traces")

    # Every node reachable from start must reach end, otherwise a walk can
    # get trapped and never terminate.
    reachable = {"start"}
    frontier = ["start"]
    while frontier:
        node = frontier.pop()
        for succ, _ in model.get(node, ()):
            if succ not in reachable:
                reachable.add(succ)
                frontier.append(succ)
    if "end" not in reachable:
        raise GenerationError("'end' is not reachable from 'start'")
    terminating = {"end"}
    changed = True
    while changed:
        changed = False
        for node in reachable:
            if node in terminating:
                continue
            if any(succ in terminating for succ, _ in model.get(node, ())):
                terminating.add(node)
                changed = True
    stuck = sorted(reachable - terminating)
    if stuck:
        raise GenerationError(f"node(s) {stuck} cannot reach 'end'")

    rng = random.Random(seed)
    traces = []
    for case_no in range(1, num_cases + 1):
        events: list[str] = []
        node = "start"
        while True:
            successors = model[node]
            total = sum(weight for _, weight in successors)
            pick = rng.random() * total
            acc = 0.0
            succ = successors[-1][0]
            for candidate, weight in successors:
                acc += weight
                if pick < acc:
                    succ = candidate
                    break
            if succ == "end":
                break
            events.append(succ)
            node = succ
        traces.append(Trace(f"case_{case_no}", tuple(events)))
    return EventLog(tuple(traces))
