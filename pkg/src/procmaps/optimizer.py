"""Grid-search optimization of the fitness/complexity trade-off.

Each grid cell discovers a model at its rate pair and scores
``Q = (1 - lam) * F + lam * (1 - C)`` where ``F`` is replay fitness and
``C`` the scaled complexity under the configured measure.  The search is
exhaustive: the landscapes are rugged once aggregation enters the picture,
so gradient methods are a poor fit.  Cells sharing a filtered element set
share their model and scores, which keeps full sweeps cheap.
"""
from __future__ import annotations

from dataclasses import dataclass

from .discovery import (
    ProcessModel,
    RateParams,
    build_model,
    discover_from_table,
    filter_elements,
    greedy_connect,
    _edge_universe,
)
from .eventlog import EventLog
from .metastates import (
    AGGREGATION_MODES,
    AggregatedModel,
    MetaState,
    _as_aggregated,
    _inner_table,
    aggregate,
    cycles_search,
    find_states,
    rebuild_log,
    surviving_states,
)
from .quality import MEASURE_KINDS, ComplexityScorer, fitness
from .stats import SignificanceTable, compute_significance


@dataclass(frozen=True)
class ObjectiveConfig:
    """Settings for one optimization run.

    ``lam`` weights complexity against fitness.  ``aggregate_cells``
    switches the per-cell model to the aggregated one (for landscape views
    of each aggregation type); by default aggregation happens only after
    the optimum is fixed.
    """

    lam: float = 0.6
    measure: str = "AD"
    grid_step: int = 5
    aggregation: str = "none"
    meta_threshold: float = 0.5
    aggregate_cells: bool = False

    def __post_init__(self) -> None:
        if not 0 <= self.lam <= 1:
            raise ValueError(f"lam must be in [0, 1], got {self.lam}")
        if self.measure not in MEASURE_KINDS:
            raise ValueError(f"unknown complexity measure {self.measure!r}")
        if not (isinstance(self.grid_step, int) and 1 <= self.grid_step <= 50
                and 100 % self.grid_step == 0):
            raise ValueError(f"grid step must be an integer divisor of 100 in 1..50, "
                             f"got {self.grid_step}")
        if self.aggregation not in AGGREGATION_MODES:
            raise ValueError(f"unknown aggregation mode {self.aggregation!r}")
        if not 0 < self.meta_threshold <= 1:
            raise ValueError(f"meta threshold must be in (0, 1], got {self.meta_threshold}")


@dataclass(frozen=True)
class LandscapeCell:
    """Scores and element counts at one rate pair (sentinels included)."""

    activity_rate: float
    transition_rate: float
    fitness: float
    complexity_raw: float
    complexity_scaled: float
    objective: float
    num_nodes: int
    num_edges: int
    num_meta_states: int


@dataclass(frozen=True)
class Landscape:
    """All grid cells (activity rate ascending, then transition rate) and
    the optimum under the tie-breaking rule."""

    config: ObjectiveConfig
    cells: tuple[LandscapeCell, ...]
    optimum: LandscapeCell

    def cell_at(self, activity_rate: float, transition_rate: float) -> LandscapeCell:
        for cell in self.cells:
            if (cell.activity_rate, cell.transition_rate) == (activity_rate, transition_rate):
                return cell
        raise KeyError((activity_rate, transition_rate))


class _GridContext:
    """Shared per-log state: significance table, reference scorer, mined
    cycles, and caches keyed by filtered element sets."""

    def __init__(self, log: EventLog, config: ObjectiveConfig):
        self.log = log
        self.config = config
        self.table = compute_significance(log)
        self.scorer = ComplexityScorer(log)
        self.states = find_states(
            cycles_search(log), log.num_traces, config.meta_threshold
        )
        self._models: dict = {}
        self._universes: dict = {}

    def plain_model(self, params: RateParams) -> tuple[ProcessModel, float]:
        nodes, candidates = filter_elements(self.table, params)
        key = (frozenset(nodes), frozenset(candidates))
        hit = self._models.get(key)
        if hit is not None:
            return hit
        edges, repair = greedy_connect(
            nodes, candidates,
            self.table.transition_case_freq,
            self.table.start_case_freq,
            self.table.end_case_freq,
        )
        edge_sig, edge_abs = _edge_universe(self.table)
        model = build_model(
            nodes, edges, repair, params,
            self.table.activity_case_freq, edge_sig,
            self.table.activity_abs_freq, edge_abs,
        )
        result = (model, fitness(model, self.log))
        self._models[key] = result
        return result

    def aggregated_model(
        self, params: RateParams, states: tuple[MetaState, ...]
    ) -> tuple[AggregatedModel, float]:
        mode = self.config.aggregation
        key = (frozenset(s.body for s in states), mode)
        universe = self._universes.get(key)
        if universe is None:
            rebuilt = rebuild_log(self.log, states)
            if mode == "outer":
                universe = compute_significance(rebuilt)
            else:
                universe = _inner_table(rebuilt, states, mode)
            self._universes[key] = universe
        model = _as_aggregated(discover_from_table(universe, params), states, mode)
        return model, fitness(model, self.log)


def _evaluate(ctx: _GridContext, params: RateParams) -> LandscapeCell:
    config = ctx.config
    nodes_f, edges_f = filter_elements(ctx.table, params)
    surviving = surviving_states(ctx.states, nodes_f, edges_f)
    if config.aggregate_cells and config.aggregation != "none" and surviving:
        model, fit = ctx.aggregated_model(params, surviving)
    else:
        model, fit = ctx.plain_model(params)
    raw = ctx.scorer.raw(model, config.measure)
    scaled = ctx.scorer.scaled(model, config.measure)
    objective = (1 - config.lam) * fit + config.lam * (1 - scaled)
    return LandscapeCell(
        activity_rate=params.activity_rate,
        transition_rate=params.transition_rate,
        fitness=fit,
        complexity_raw=raw,
        complexity_scaled=scaled,
        objective=objective,
        num_nodes=model.num_nodes,
        num_edges=model.num_edges,
        num_meta_states=len(surviving),
    )


def evaluate_point(
    log: EventLog, params: RateParams, config: ObjectiveConfig
) -> LandscapeCell:
    """Score a single rate pair (builds its own per-log context)."""
    return _evaluate(_GridContext(log, config), params)


def _pick_optimum(cells: tuple[LandscapeCell, ...]) -> LandscapeCell:
    # Highest Q; ties prefer the lower transition rate (simpler maps), then
    # the higher activity rate (longer, more explicit paths).
    return min(
        cells,
        key=lambda c: (-c.objective, c.transition_rate, -c.activity_rate),
    )


def grid_search(log: EventLog, config: ObjectiveConfig | None = None) -> Landscape:
    """Evaluate the full rate grid and locate the optimum."""
    config = config or ObjectiveConfig()
    ctx = _GridContext(log, config)
    step = config.grid_step
    cells = tuple(
        _evaluate(ctx, RateParams(ra, rt))
        for ra in range(0, 101, step)
        for rt in range(0, 101, step)
    )
    return Landscape(config=config, cells=cells, optimum=_pick_optimum(cells))


def optimize_and_aggregate(
    log: EventLog, config: ObjectiveConfig | None = None
) -> tuple[Landscape, AggregatedModel]:
    """Grid-search the rates, then aggregate at the optimal pair."""
    config = config or ObjectiveConfig()
    landscape = grid_search(log, config)
    best = landscape.optimum
    model = aggregate(
        log,
        RateParams(best.activity_rate, best.transition_rate),
        config.aggregation,
        config.meta_threshold,
    )
    return landscape, model
