"""Directly-follows model discovery with rate-based filtering and repair.

An element survives filtering iff its case frequency is at least
``(100 - rate) / 100``, so rate 100 keeps everything observed and rate 0
keeps only elements present in every trace.  Filtering alone may leave
nodes that cannot be reached from the start sentinel or cannot reach the
end sentinel; a greedy repair pass re-inserts observed transitions, most
significant first, until the graph is fully traversable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import EmptyLogError, RepairError
from .eventlog import END, START, EventLog
from .stats import SignificanceTable, compute_significance

Edge = tuple[str, str]


@dataclass(frozen=True)
class RateParams:
    """Activity and transition rates, both in [0, 100]."""

    activity_rate: float
    transition_rate: float

    def __post_init__(self) -> None:
        for name, value in (("activity_rate", self.activity_rate),
                            ("transition_rate", self.transition_rate)):
            if not 0 <= value <= 100:
                raise ValueError(f"{name} must be in [0, 100], got {value}")

    @property
    def activity_threshold(self) -> float:
        return (100 - self.activity_rate) / 100

    @property
    def transition_threshold(self) -> float:
        return (100 - self.transition_rate) / 100


@dataclass
class ProcessModel:
    """A discovered process map.

    ``activity_nodes`` excludes the start/end sentinels; ``edges`` is over
    activities plus sentinels.  ``repair_edges`` flags the edges added by
    reachability repair; their significance is the true case frequency of
    the underlying transition, not the threshold.
    """

    activity_nodes: frozenset[str]
    edges: frozenset[Edge]
    node_significance: dict[str, float]
    edge_significance: dict[Edge, float]
    repair_edges: frozenset[Edge]
    params: RateParams
    node_abs_freq: dict[str, int] = field(default_factory=dict)
    edge_abs_freq: dict[Edge, int] = field(default_factory=dict)

    start: str = START
    end: str = END

    @property
    def num_nodes(self) -> int:
        """Node count including the two sentinels."""
        return len(self.activity_nodes) + 2

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def replay_edges(self) -> frozenset[Edge]:
        """Edge set used by replay; aggregated models expand theirs."""
        return self.edges


def filter_elements(
    table: SignificanceTable, params: RateParams
) -> tuple[set[str], set[Edge]]:
    """Apply the rate thresholds to activities and transitions.

    Returns the retained activity set and the candidate edge set, including
    start/end sentinel edges for retained activities whose start/end case
    frequency passes the transition threshold.
    """
    a_thr = params.activity_threshold
    t_thr = params.transition_threshold
    nodes = {a for a, f in table.activity_case_freq.items() if f >= a_thr}
    edges = {
        (u, v)
        for (u, v), f in table.transition_case_freq.items()
        if f >= t_thr and u in nodes and v in nodes
    }
    edges.update((START, a) for a, f in table.start_case_freq.items()
                 if f >= t_thr and a in nodes)
    edges.update((a, END) for a, f in table.end_case_freq.items()
                 if f >= t_thr and a in nodes)
    return nodes, edges


def _reachable(sources: Iterable[str], adjacency: Mapping[str, list[str]]) -> set[str]:
    seen = set(sources)
    frontier = list(seen)
    while frontier:
        node = frontier.pop()
        for nxt in adjacency.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def greedy_connect(
    nodes: set[str],
    edges: set[Edge],
    transition_freq: Mapping[Edge, float],
    start_freq: Mapping[str, float],
    end_freq: Mapping[str, float],
) -> tuple[set[Edge], set[Edge]]:
    """Add observed edges until every node lies on a start-to-end path.

    Forward pass: while a node is unreachable from start, add, among all
    observed transitions from the reachable region into the unreachable one
    (start-position edges included), the one with the highest case
    frequency, ties broken by lexicographic (source, target).  Backward
    pass: the mirror image towards end.  Returns (all edges, added edges).
    """
    edges = set(edges)
    added: set[Edge] = set()

    def candidate_pool(forward: bool) -> list[tuple[float, str, str]]:
        pool = [
            (f, u, v)
            for (u, v), f in transition_freq.items()
            if u in nodes and v in nodes
        ]
        if forward:
            pool.extend((f, START, a) for a, f in start_freq.items() if a in nodes)
        else:
            pool.extend((f, a, END) for a, f in end_freq.items() if a in nodes)
        return pool

    def connect(forward: bool) -> None:
        pool = candidate_pool(forward)
        adjacency: dict[str, list[str]] = {}
        for u, v in edges:
            src, dst = (u, v) if forward else (v, u)
            adjacency.setdefault(src, []).append(dst)
        covered = _reachable([START if forward else END], adjacency)
        missing = nodes - covered
        while missing:
            best: tuple[float, str, str] | None = None
            for f, u, v in pool:
                src_ok = (u in covered) if forward else (v in covered)
                dst_missing = (v in missing) if forward else (u in missing)
                if not (src_ok and dst_missing) or (u, v) in edges:
                    continue
                if best is None or (-f, u, v) < (-best[0], best[1], best[2]):
                    best = (f, u, v)
            if best is None:
                side = "start" if forward else "end"
                stranded = min(missing)
                raise RepairError(
                    f"cannot connect node {stranded!r} to {side}: "
                    f"no observed transition leads {'into' if forward else 'out of'} it"
                )
            _, u, v = best
            edges.add((u, v))
            added.add((u, v))
            src, dst = (u, v) if forward else (v, u)
            adjacency.setdefault(src, []).append(dst)
            stack = [dst]
            while stack:
                node = stack.pop()
                if node in covered:
                    continue
                covered.add(node)
                missing.discard(node)
                stack.extend(adjacency.get(node, ()))

    connect(forward=True)
    connect(forward=False)
    return edges, added


def repair_reachability(
    nodes: set[str], edges: set[Edge], table: SignificanceTable
) -> tuple[set[Edge], set[Edge]]:
    """Greedy reachability repair against the log's observed transitions."""
    return greedy_connect(
        nodes,
        edges,
        table.transition_case_freq,
        table.start_case_freq,
        table.end_case_freq,
    )


def build_model(
    nodes: set[str],
    edges: set[Edge],
    repair: set[Edge],
    params: RateParams,
    node_sig: Mapping[str, float],
    edge_sig: Mapping[Edge, float],
    node_abs: Mapping[str, int],
    edge_abs: Mapping[Edge, int],
) -> ProcessModel:
    """Assemble a ProcessModel, restricting annotation maps to its elements."""
    return ProcessModel(
        activity_nodes=frozenset(nodes),
        edges=frozenset(edges),
        node_significance={a: node_sig[a] for a in sorted(nodes)},
        edge_significance={e: edge_sig[e] for e in sorted(edges)},
        repair_edges=frozenset(repair),
        params=params,
        node_abs_freq={a: node_abs.get(a, 0) for a in sorted(nodes)},
        edge_abs_freq={e: edge_abs.get(e, 0) for e in sorted(edges)},
    )


def _edge_universe(
    table: SignificanceTable,
) -> tuple[dict[Edge, float], dict[Edge, int]]:
    """Significance and absolute counts for all edges incl. sentinel ones."""
    sig = dict(table.transition_case_freq)
    abs_freq = dict(table.transition_abs_freq)
    for a, f in table.start_case_freq.items():
        sig[(START, a)] = f
        abs_freq[(START, a)] = round(f * table.num_traces)
    for a, f in table.end_case_freq.items():
        sig[(a, END)] = f
        abs_freq[(a, END)] = round(f * table.num_traces)
    return sig, abs_freq


def discover_from_table(table: SignificanceTable, params: RateParams) -> ProcessModel:
    """Discovery against a precomputed table (shared across grid cells)."""
    nodes, candidate_edges = filter_elements(table, params)
    edges, repair = repair_reachability(nodes, candidate_edges, table)
    edge_sig, edge_abs = _edge_universe(table)
    return build_model(
        nodes, edges, repair, params,
        table.activity_case_freq, edge_sig, table.activity_abs_freq, edge_abs,
    )


def discover(log: EventLog, params: RateParams) -> ProcessModel:
    """Discover the process model of ``log`` at the given rates."""
    if log.num_traces == 0:
        raise EmptyLogError("cannot discover a model from an empty log")
    return discover_from_table(compute_significance(log), params)
