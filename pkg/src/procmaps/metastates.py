"""Cycle mining and meta-state aggregation.

A simple cycle is a trace segment that starts at some activity, runs up to
(but not including) that activity's next occurrence, and repeats no
activity.  Cycles frequent enough across cases (and longer than one
activity) are meta-states: stable loops of behaviour that can be collapsed
into a single node to abstract the model.

Aggregation comes in two flavours.  "Outer" keeps the constituent
activities next to the new meta-state nodes.  "Inner" hides every
activity that belongs to some meta-state and redirects its remaining
relations to the meta-states containing it: either all of them
(``inner_all``) or only the most significant one (``inner_freq``).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .discovery import (
    Edge,
    ProcessModel,
    RateParams,
    discover_from_table,
    filter_elements,
)
from .eventlog import EventLog, Trace
from .stats import SignificanceTable, compute_significance

AGGREGATION_MODES = ("none", "outer", "inner_all", "inner_freq")


def token_label(body: tuple[str, ...]) -> str:
    """Canonical rendering of a cycle body, used in every output."""
    return "[" + "·".join(body) + "]"


@dataclass(frozen=True)
class Cycle:
    """A simple cycle with its log frequencies."""

    body: tuple[str, ...]
    abs_freq: int
    case_count: int
    num_traces: int

    @property
    def significance(self) -> float:
        return self.case_count / self.num_traces

    @property
    def token(self) -> str:
        return token_label(self.body)


@dataclass(frozen=True)
class MetaState:
    """A significant cycle of length > 1, collapsible into one node."""

    body: tuple[str, ...]
    abs_freq: int
    case_count: int
    significance: float

    @property
    def token(self) -> str:
        return token_label(self.body)


def cycles_search(log: EventLog) -> dict[tuple[str, ...], Cycle]:
    """Mine every simple cycle of the log with absolute and case counts.

    For each activity of a trace, every segment between two consecutive
    occurrences is a cycle candidate; it is recorded iff it repeats no
    activity.  The absolute count increments per occurrence, the case count
    once per trace.  Rotations (e.g. ``B,C`` vs ``C,B``) are distinct.
    """
    abs_freq: dict[tuple[str, ...], int] = {}
    case_count: dict[tuple[str, ...], int] = {}
    for trace in log.traces:
        events = trace.events
        positions: dict[str, list[int]] = {}
        for i, activity in enumerate(events):
            positions.setdefault(activity, []).append(i)
        seen_in_case: set[tuple[str, ...]] = set()
        for anchor_positions in positions.values():
            for p, q in zip(anchor_positions, anchor_positions[1:]):
                segment = events[p:q]
                if len(segment) != len(set(segment)):
                    continue
                abs_freq[segment] = abs_freq.get(segment, 0) + 1
                if segment not in seen_in_case:
                    seen_in_case.add(segment)
                    case_count[segment] = case_count.get(segment, 0) + 1
    return {
        body: Cycle(body, abs_freq[body], case_count[body], log.num_traces)
        for body in abs_freq
    }


def find_states(
    cycles: dict[tuple[str, ...], Cycle] | list[Cycle],
    num_traces: int,
    threshold: float = 0.5,
) -> tuple[MetaState, ...]:
    """Keep cycles longer than one activity whose case significance reaches
    the threshold; sorted by significance (desc) then body."""
    if not 0 < threshold <= 1:
        raise ValueError(f"meta-state threshold must be in (0, 1], got {threshold}")
    pool = cycles.values() if isinstance(cycles, dict) else cycles
    states = [
        MetaState(c.body, c.abs_freq, c.case_count, c.case_count / num_traces)
        for c in pool
        if len(c.body) > 1 and c.case_count / num_traces >= threshold
    ]
    states.sort(key=lambda s: (-s.significance, s.body))
    return tuple(states)


def _match_at(events: tuple[str, ...], i: int, body: tuple[str, ...]) -> int | None:
    """Longest span of ``body`` repeated then closed by its first activity.

    Returns the span length (repetitions plus the closing anchor) or None.
    """
    k = len(body)
    reps = 0
    while events[i + reps * k : i + (reps + 1) * k] == body:
        reps += 1
    for j in range(reps, 0, -1):
        anchor = i + j * k
        if anchor < len(events) and events[anchor] == body[0]:
            return j * k + 1
    return None


def rebuild_log(log: EventLog, states: tuple[MetaState, ...] | list[MetaState]) -> EventLog:
    """Collapse meta-state occurrences into single token events.

    Traces are scanned left to right; at each position candidate states are
    tried longest body first (then higher significance, then lexicographic
    body) and the matched span, anchor included, becomes one token event.
    """
    if not states:
        return log
    ordered = sorted(states, key=lambda s: (-len(s.body), -s.significance, s.body))
    traces = []
    for trace in log.traces:
        events = trace.events
        out: list[str] = []
        i = 0
        while i < len(events):
            for state in ordered:
                span = _match_at(events, i, state.body)
                if span is not None:
                    out.append(state.token)
                    i += span
                    break
            else:
                out.append(events[i])
                i += 1
        traces.append(Trace(trace.case_id, tuple(out)))
    return EventLog(tuple(traces))


def surviving_states(
    states: tuple[MetaState, ...],
    nodes: set[str],
    edges: set[Edge],
) -> tuple[MetaState, ...]:
    """States whose body activities and transitions (closing one included)
    all survive filtering."""
    kept = []
    for state in states:
        body = state.body
        ring = list(zip(body, body[1:])) + [(body[-1], body[0])]
        if set(body) <= nodes and all(e in edges for e in ring):
            kept.append(state)
    return tuple(kept)


def _redirect_map(
    states: tuple[MetaState, ...], mode: str
) -> dict[str, tuple[str, ...]]:
    """Hidden activity -> tokens of the meta-states its relations move to."""
    containing: dict[str, list[MetaState]] = {}
    for state in states:
        for activity in state.body:
            containing.setdefault(activity, []).append(state)
    redirect: dict[str, tuple[str, ...]] = {}
    for activity, holders in containing.items():
        if mode == "inner_all":
            redirect[activity] = tuple(sorted(s.token for s in holders))
        else:  # inner_freq: most significant state, ties to smallest body
            best = min(holders, key=lambda s: (-s.significance, s.body))
            redirect[activity] = (best.token,)
    return redirect


def _inner_table(
    rebuilt: EventLog, states: tuple[MetaState, ...], mode: str
) -> SignificanceTable:
    """Significance table of the rebuilt log with hidden activities folded
    into their meta-states.

    Stand-alone occurrences of activities that belong to some meta-state
    are dropped as elements; every transition (and trace start/end
    position) touching one is re-attributed to the mapped meta-state
    tokens.  Case frequencies count a trace once per resulting element even
    when token adjacency and redirected transitions coincide.
    """
    redirect = _redirect_map(states, mode)
    k = rebuilt.num_traces

    def images(element: str) -> tuple[str, ...]:
        return redirect.get(element, (element,))

    node_case: dict[str, int] = {}
    node_abs: dict[str, int] = {}
    edge_case: dict[Edge, int] = {}
    edge_abs: dict[Edge, int] = {}
    start_case: dict[str, int] = {}
    end_case: dict[str, int] = {}
    for trace in rebuilt.traces:
        events = trace.events
        trace_nodes: set[str] = set()
        trace_edges: set[Edge] = set()
        for event in events:
            if event not in redirect:
                trace_nodes.add(event)
                node_abs[event] = node_abs.get(event, 0) + 1
        for u, v in zip(events, events[1:]):
            for iu in images(u):
                for iv in images(v):
                    trace_edges.add((iu, iv))
                    edge_abs[(iu, iv)] = edge_abs.get((iu, iv), 0) + 1
        for node in trace_nodes:
            node_case[node] = node_case.get(node, 0) + 1
        for edge in trace_edges:
            edge_case[edge] = edge_case.get(edge, 0) + 1
        for opener in set(images(events[0])):
            start_case[opener] = start_case.get(opener, 0) + 1
        for closer in set(images(events[-1])):
            end_case[closer] = end_case.get(closer, 0) + 1
    return SignificanceTable(
        num_traces=k,
        activity_case_freq={a: c / k for a, c in node_case.items()},
        transition_case_freq={e: c / k for e, c in edge_case.items()},
        activity_abs_freq=node_abs,
        transition_abs_freq=edge_abs,
        start_case_freq={a: c / k for a, c in start_case.items()},
        end_case_freq={a: c / k for a, c in end_case.items()},
    )


@dataclass
class AggregatedModel(ProcessModel):
    """A process model whose nodes may include meta-state tokens."""

    meta_states: tuple[MetaState, ...] = ()
    mode: str = "none"
    inside_activities: frozenset[str] = frozenset()

    def replay_edges(self) -> frozenset[Edge]:
        return expanded_edges(self)


def expanded_edges(model: ProcessModel) -> frozenset[Edge]:
    """Edge set for replaying the original log against an aggregated model.

    Every edge incident to a meta-state token is replaced by edges to each
    constituent activity, and each token node contributes its internal
    transitions plus the closing one.  Models without meta-states are
    returned unchanged.
    """
    states = getattr(model, "meta_states", ())
    if not states:
        return model.edges
    constituents = {s.token: s.body for s in states}
    expanded: set[Edge] = set()
    for u, v in model.edges:
        for iu in constituents.get(u, (u,)):
            for iv in constituents.get(v, (v,)):
                expanded.add((iu, iv))
    for node in model.activity_nodes:
        body = constituents.get(node)
        if body:
            expanded.update(zip(body, body[1:]))
            expanded.add((body[-1], body[0]))
    return frozenset(expanded)


def _as_aggregated(
    model: ProcessModel,
    states: tuple[MetaState, ...],
    mode: str,
) -> AggregatedModel:
    inside = frozenset(a for s in states for a in s.body)
    return AggregatedModel(
        activity_nodes=model.activity_nodes,
        edges=model.edges,
        node_significance=model.node_significance,
        edge_significance=model.edge_significance,
        repair_edges=model.repair_edges,
        params=model.params,
        node_abs_freq=model.node_abs_freq,
        edge_abs_freq=model.edge_abs_freq,
        meta_states=states,
        mode=mode,
        inside_activities=inside,
    )


def aggregate(
    log: EventLog,
    params: RateParams,
    mode: str = "none",
    threshold: float = 0.5,
    table: SignificanceTable | None = None,
) -> AggregatedModel:
    """Discover a model at fixed rates with the chosen cycle aggregation.

    Meta-states are the significant cycles whose activities and transitions
    survive filtering at ``params``; with none found (or mode ``none``) the
    result is the plain model.
    """
    if mode not in AGGREGATION_MODES:
        raise ValueError(f"unknown aggregation mode {mode!r}")
    if table is None:
        table = compute_significance(log)
    if mode == "none":
        return _as_aggregated(discover_from_table(table, params), (), "none")
    cycles = cycles_search(log)
    nodes_f, edges_f = filter_elements(table, params)
    states = surviving_states(
        find_states(cycles, log.num_traces, threshold), nodes_f, edges_f
    )
    if not states:
        return _as_aggregated(discover_from_table(table, params), (), mode)
    rebuilt = rebuild_log(log, states)
    if mode == "outer":
        model = discover_from_table(compute_significance(rebuilt), params)
    else:
        model = discover_from_table(_inner_table(rebuilt, states, mode), params)
    return _as_aggregated(model, states, mode)


@dataclass(frozen=True)
class Combination:
    """A distinct meta-state set observed somewhere on the rate grid."""

    combo_id: str
    states: tuple[MetaState, ...]
    coverage: float
    cells: tuple[tuple[float, float], ...]

    @property
    def label(self) -> str:
        return " ".join(s.token for s in self.states) if self.states else "∅"


@dataclass(frozen=True)
class CombinationMap:
    """Meta-state sets per grid cell, grouped into combinations."""

    cells: dict[tuple[float, float], frozenset[tuple[str, ...]]]
    combinations: tuple[Combination, ...]
    threshold: float

    def combination_at(self, cell: tuple[float, float]) -> Combination:
        states = self.cells[cell]
        for combo in self.combinations:
            if frozenset(s.body for s in combo.states) == states:
                return combo
        raise KeyError(cell)


def combination_map(
    log: EventLog,
    grid: list[RateParams],
    threshold: float = 0.5,
) -> CombinationMap:
    """Meta-state set at every grid point, grouped into combinations.

    A cycle counts at a point iff its body activities and transitions all
    survive filtering there.  Coverage is the fraction of grid cells
    showing the combination.
    """
    if not grid:
        raise ValueError("grid must contain at least one rate pair")
    table = compute_significance(log)
    states = find_states(cycles_search(log), log.num_traces, threshold)
    by_body = {s.body: s for s in states}
    cells: dict[tuple[float, float], frozenset[tuple[str, ...]]] = {}
    for params in grid:
        nodes_f, edges_f = filter_elements(table, params)
        kept = surviving_states(states, nodes_f, edges_f)
        cells[(params.activity_rate, params.transition_rate)] = frozenset(
            s.body for s in kept
        )
    groups: dict[frozenset[tuple[str, ...]], list[tuple[float, float]]] = {}
    for cell in sorted(cells):
        groups.setdefault(cells[cell], []).append(cell)
    ordered = sorted(
        groups.items(),
        key=lambda item: (-len(item[1]), sorted(item[0])),
    )
    combos = tuple(
        Combination(
            combo_id=f"C{i + 1}",
            states=tuple(sorted((by_body[b] for b in bodies), key=lambda s: s.body)),
            coverage=len(cell_list) / len(cells),
            cells=tuple(cell_list),
        )
        for i, (bodies, cell_list) in enumerate(ordered)
    )
    return CombinationMap(cells=cells, combinations=combos, threshold=threshold)


@dataclass(frozen=True)
class ComboEdge:
    source: str
    target: str
    added: tuple[MetaState, ...]

    @property
    def label(self) -> str:
        return "+" + "|".join(s.token for s in self.added)


@dataclass(frozen=True)
class CombinationGraph:
    """Transitions between combinations across adjacent grid cells."""

    combinations: tuple[Combination, ...]
    edges: tuple[ComboEdge, ...]
    centrality: dict[str, float]


def combination_graph(cmap: CombinationMap) -> CombinationGraph:
    """Edges link adjacent grid regions whose meta-state sets are nested.

    Adjacency is 4-neighbourhood on the grid; an edge goes from the smaller
    set to the strictly larger one and is labelled with the added states.
    Degree centrality is (in+out degree) / (number of combinations - 1).
    """
    combos = cmap.combinations
    combo_of = {frozenset(s.body for s in c.states): c for c in combos}
    state_of = {s.body: s for c in combos for s in c.states}
    ras = sorted({cell[0] for cell in cmap.cells})
    rts = sorted({cell[1] for cell in cmap.cells})
    ra_next = {a: b for a, b in zip(ras, ras[1:])}
    rt_next = {a: b for a, b in zip(rts, rts[1:])}
    edges: dict[tuple[str, str], frozenset[tuple[str, ...]]] = {}
    for cell in cmap.cells:
        ra, rt = cell
        neighbours = []
        if ra in ra_next and (ra_next[ra], rt) in cmap.cells:
            neighbours.append((ra_next[ra], rt))
        if rt in rt_next and (ra, rt_next[rt]) in cmap.cells:
            neighbours.append((ra, rt_next[rt]))
        for other in neighbours:
            s1, s2 = cmap.cells[cell], cmap.cells[other]
            if s1 < s2:
                small, large = s1, s2
            elif s2 < s1:
                small, large = s2, s1
            else:
                continue
            key = (combo_of[small].combo_id, combo_of[large].combo_id)
            edges.setdefault(key, large - small)
    combo_edges = tuple(
        ComboEdge(src, dst, tuple(sorted((state_of[b] for b in added), key=lambda s: s.body)))
        for (src, dst), added in sorted(edges.items())
    )
    degree: dict[str, int] = {c.combo_id: 0 for c in combos}
    for edge in combo_edges:
        degree[edge.source] += 1
        degree[edge.target] += 1
    scale = len(combos) - 1
    centrality = {
        cid: (deg / scale if scale else 0.0) for cid, deg in sorted(degree.items())
    }
    return CombinationGraph(combos, combo_edges, centrality)
