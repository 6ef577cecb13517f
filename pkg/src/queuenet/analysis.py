"""Solution quality diagnostics and model comparison utilities."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cost as _cost
from .net import PathSet
from .solver import (
    VARIANTS,
    ConvergenceReport,
    SolutionState,
    SolverOptions,
    solve,
    solve_variant,
)
from .cost import CostParams

__all__ = [
    "EquilibriumReport",
    "ComparisonRow",
    "path_generalized_cost",
    "kkt_report",
    "compare_models",
    "uniqueness_probe",
]

#: a link counts as congested when its queue exceeds this share of capacity
CONGESTION_THRESHOLD = 1e-6


def path_generalized_cost(state: SolutionState, path_index: int) -> float:
    """Generalized cost of one path: sum of its link times at (v, Q)."""
    idx = state.path_set.path_link_idx[path_index]
    return float(state.link_times[idx].sum())


@dataclass
class EquilibriumReport:
    relative_gap: float
    min_od_costs: np.ndarray  # cheapest used-or-not path cost per OD pair
    max_complementarity_residual: float
    max_capacity_residual: float
    congested_links: tuple[str, ...]
    complementarity_residuals: np.ndarray = field(repr=False, default=None)
    capacity_residuals: np.ndarray = field(repr=False, default=None)


def kkt_report(state: SolutionState) -> EquilibriumReport:
    """Equilibrium-condition audit of a solution.

    The relative gap is total excess path cost over the cheapest path of
    each OD pair, normalized by total demand-weighted minimum cost; zero at
    exact user equilibrium.  The complementarity residual per link is
    |Q * ((C_max - v)/gamma - Q)| (|Q * (C_max - v)| for gamma = 0): a
    queue may persist only when it has choked capacity down to the
    throughflow.  The capacity residual is max(0, v - C(Q)).
    """
    ps = state.path_set
    costs = state.path_costs()
    gap_num = 0.0
    gap_den = 0.0
    min_costs = np.full(len(ps.network.od_pairs), np.nan)
    for i, group in enumerate(ps.od_groups):
        if len(group) == 0:
            continue
        w = float(costs[group].min())
        min_costs[i] = w
        gap_num += float(np.sum(state.path_flows[group] * (costs[group] - w)))
        gap_den += ps.network.od_pairs[i].demand * w
    relative_gap = gap_num / gap_den if gap_den > 0 else 0.0

    c_max = state.c_max
    gamma = np.broadcast_to(
        np.asarray(state.params.gamma, dtype=float), c_max.shape
    )
    q, v = state.link_queues, state.throughflows
    with np.errstate(divide="ignore", invalid="ignore"):
        slack = np.where(
            gamma > 0,
            (c_max - v) / np.where(gamma > 0, gamma, 1.0) - q,
            c_max - v,
        )
    comp = np.abs(q * slack)
    cap = np.maximum(0.0, v - _cost.capacity(q, c_max, state.params))
    congested = tuple(
        link.id
        for link, qa, cm in zip(ps.network.links, q, c_max)
        if qa > CONGESTION_THRESHOLD * cm
    )
    return EquilibriumReport(
        relative_gap=relative_gap,
        min_od_costs=min_costs,
        max_complementarity_residual=float(comp.max()) if comp.size else 0.0,
        max_capacity_residual=float(cap.max()) if cap.size else 0.0,
        congested_links=congested,
        complementarity_residuals=comp,
        capacity_residuals=cap,
    )


@dataclass
class ComparisonRow:
    variant: str
    state: SolutionState
    report: ConvergenceReport
    total_generalized_cost: float  # sum over paths of flow * path cost
    total_queue: float

    @property
    def link_flows(self) -> np.ndarray:
        return self.state.link_flows

    @property
    def link_queues(self) -> np.ndarray:
        return self.state.link_queues

    @property
    def link_times(self) -> np.ndarray:
        return self.state.link_times


def compare_models(
    path_set: PathSet,
    params: CostParams | None = None,
    options: SolverOptions | None = None,
    variants: tuple[str, ...] = VARIANTS,
) -> list[ComparisonRow]:
    """Solve the same scenario under several model variants."""
    rows = []
    for variant in variants:
        state, report = solve_variant(path_set, variant, params, options)
        costs = state.path_costs()
        rows.append(
            ComparisonRow(
                variant=variant,
                state=state,
                report=report,
                total_generalized_cost=float(state.path_flows @ costs),
                total_queue=float(state.link_queues.sum()),
            )
        )
    return rows


def uniqueness_probe(
    path_set: PathSet,
    params: CostParams | None = None,
    options: SolverOptions | None = None,
    n_starts: int = 8,
    seed: int = 0,
) -> tuple[float, float, list[SolutionState]]:
    """Re-solve from random demand splits and measure solution spread.

    Initial path flows are Dirichlet-random splits of each OD demand.
    Returns (link-flow spread, path-flow spread, states): the max pairwise
    infinity-norm differences.  Link flows should agree across starts;
    path flows need not when paths overlap.
    """
    rng = np.random.default_rng(seed)
    states: list[SolutionState] = []
    for _ in range(n_starts):
        f0 = np.zeros(path_set.n_paths)
        for i, group in enumerate(path_set.od_groups):
            if len(group) == 0:
                continue
            share = rng.dirichlet(np.ones(len(group)))
            f0[group] = share * path_set.network.od_pairs[i].demand
        state, _ = solve(path_set, params, options, initial_flows=f0)
        states.append(state)
    link_spread = 0.0
    path_spread = 0.0
    for a in range(len(states)):
        for b in range(a + 1, len(states)):
            link_spread = max(
                link_spread,
                float(np.max(np.abs(states[a].link_flows - states[b].link_flows))),
            )
            path_spread = max(
                path_spread,
                float(np.max(np.abs(states[a].path_flows - states[b].path_flows))),
            )
    return link_spread, path_spread, states
