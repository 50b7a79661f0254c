"""Frequency statistics over an event log.

Significance of an element (activity or directly-follows transition) is its
case frequency: the fraction of traces that contain it at least once.
Absolute frequencies count every occurrence and are kept for rendering.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .errors import EmptyLogError
from .eventlog import EventLog


@dataclass(frozen=True)
class SignificanceTable:
    """Case and absolute frequencies for activities, transitions and trace
    start/end positions.

    Case frequencies lie in (0, 1]: elements that never occur simply have no
    entry.  ``start_case_freq`` / ``end_case_freq`` give the fraction of
    traces beginning/ending with an activity; each sums to 1 over the
    activities that ever open/close a trace.
    """

    num_traces: int
    activity_case_freq: dict[str, float]
    transition_case_freq: dict[tuple[str, str], float]
    activity_abs_freq: dict[str, int]
    transition_abs_freq: dict[tuple[str, str], int]
    start_case_freq: dict[str, float]
    end_case_freq: dict[str, float]


def compute_significance(log: EventLog) -> SignificanceTable:
    """Count case and absolute frequencies for every element of the log."""
    if log.num_traces == 0:
        raise EmptyLogError("cannot compute significance of an empty log")
    k = log.num_traces
    activity_cases: Counter[str] = Counter()
    transition_cases: Counter[tuple[str, str]] = Counter()
    activity_abs: Counter[str] = Counter()
    transition_abs: Counter[tuple[str, str]] = Counter()
    starts: Counter[str] = Counter()
    ends: Counter[str] = Counter()
    for trace in log.traces:
        events = trace.events
        activity_abs.update(events)
        activity_cases.update(set(events))
        pairs = list(zip(events, events[1:]))
        transition_abs.update(pairs)
        transition_cases.update(set(pairs))
        starts[events[0]] += 1
        ends[events[-1]] += 1
    return SignificanceTable(
        num_traces=k,
        activity_case_freq={a: c / k for a, c in activity_cases.items()},
        transition_case_freq={t: c / k for t, c in transition_cases.items()},
        activity_abs_freq=dict(activity_abs),
        transition_abs_freq=dict(transition_abs),
        start_case_freq={a: c / k for a, c in starts.items()},
        end_case_freq={a: c / k for a, c in ends.items()},
    )


def conflict_pairs(table: SignificanceTable) -> dict[tuple[str, str], tuple[float, float]]:
    """Two-way activity pairs: both a->b and b->a were observed.

    Returns ``{(a, b): (sig(a->b), sig(b->a))}`` with ``a < b``; self-loops
    are not conflicts.  Discovery keeps both directions (cycles carry the
    aggregation machinery), so this report is informational.
    """
    pairs: dict[tuple[str, str], tuple[float, float]] = {}
    freq = table.transition_case_freq
    for (a, b) in freq:
        if a < b and (b, a) in freq:
            pairs[(a, b)] = (freq[(a, b)], freq[(b, a)])
    return dict(sorted(pairs.items()))
