"""Alternating path-flow / queue solver for equilibrium with residual queues.

The solver alternates two blocks until neither moves:

* a path-based gradient-projection step that shifts flow from costlier
  paths to the cheapest path of each OD pair, scaled by the local cost
  curvature on the non-shared links; and
* a queue update, either the complementarity fixed point (default) that
  sets each link's queue so inflow net of held-back traffic matches the
  queue-reduced capacity, or a projected-gradient descent step on the
  smoothed objective.

Queues are carried per (link, path) so that a queue at one link shelters
the links downstream of it on the same path.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Literal, Sequence

import networkx as nx
import numpy as np

from . import cost as _cost
from .cost import CostParams
from .net import Network, PathSet

__all__ = [
    "SolverOptions",
    "SolutionState",
    "ConvergenceReport",
    "assemble_link_state",
    "solve",
    "solve_variant",
    "VARIANTS",
]

VARIANTS = (
    "queue_dependent",
    "fixed_capacity_queue",
    "traditional_ue",
    "system_optimum",
)

#: queues may not eat more than this share of a link's base capacity
QUEUE_CAP_FRACTION = 0.999

#: curvature floor in the gradient-projection step denominator
CURVATURE_FLOOR = 1e-6


@dataclass(frozen=True)
class SolverOptions:
    queue_mode: Literal["fixed_point", "smoothed_gradient"] = "fixed_point"
    variant: str = "queue_dependent"
    epsilon: float = 1e-3
    max_outer_iterations: int = 2000
    step_scale: float = 1.0
    max_inner_passes: int = 50
    queue_relaxation: float | None = None  # None = auto from gamma

    def __post_init__(self) -> None:
        if self.queue_mode not in ("fixed_point", "smoothed_gradient"):
            raise ValueError(f"unknown queue_mode: {self.queue_mode}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant: {self.variant}")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be >= 1")
        if self.step_scale <= 0:
            raise ValueError("step_scale must be > 0")
        if self.queue_relaxation is not None and not (
            0 < self.queue_relaxation <= 1
        ):
            raise ValueError("queue_relaxation must be in (0, 1]")


@dataclass
class ConvergenceReport:
    converged: bool
    iterations: int
    flow_change: float
    queue_change: float
    wall_time: float = 0.0
    #: per-iteration rows
    #: (iteration, J after flow step, J after queue step, max |df|, max |dQ|, gap)
    history: list[tuple[int, float, float, float, float, float]] = field(
        default_factory=list
    )


@dataclass
class SolutionState:
    """Equilibrium state: path flows plus per-(link, path) queues."""

    path_set: PathSet
    params: CostParams  # per-link arrays, variant already applied
    variant: str
    path_flows: np.ndarray  # (n_paths,)
    queue_alloc: np.ndarray  # (n_links, n_paths)
    link_flows: np.ndarray  # x: inflow assigned to each link
    link_queues: np.ndarray  # Q: residual queue at each link entrance
    upstream_queues: np.ndarray  # Q': traffic held upstream of each link
    throughflows: np.ndarray  # v = x - Q - Q'
    link_times: np.ndarray  # generalized link times at (v, Q)

    @property
    def t_f(self) -> np.ndarray:
        return np.array([l.free_flow_time for l in self.path_set.network.links])

    @property
    def c_max(self) -> np.ndarray:
        return np.array([l.capacity for l in self.path_set.network.links])

    def path_costs(self) -> np.ndarray:
        return self.path_set.incidence.T @ self.link_times

    def completing_flows(self) -> np.ndarray:
        """Trip-completing path flows f_p = f~_p - sum of queues along p."""
        return self.path_flows - self.queue_alloc.sum(axis=0)

    def objective(self) -> float:
        return _cost.objective(
            self.throughflows, self.link_queues, self.t_f, self.c_max, self.params
        )


def assemble_link_state(
    path_set: PathSet, path_flows: np.ndarray, queue_alloc: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Derive (x, Q, Q', v) from path flows and per-path queues.

    x is assigned inflow, Q the link's own queue, Q' the traffic held in
    queues upstream of the link on each of its paths, and v = x - Q - Q'
    the flow that actually traverses the link.
    """
    x = path_set.incidence @ path_flows
    q = queue_alloc.sum(axis=1)
    q_prime = np.zeros(path_set.n_links)
    for j, idx in enumerate(path_set.path_link_idx):
        held = queue_alloc[idx, j]
        q_prime[idx[1:]] += np.cumsum(held[:-1])
    v = x - q - q_prime
    if np.any(v < -1e-9):
        worst = int(np.argmin(v))
        raise ValueError(
            f"infeasible state: negative throughflow {v[worst]:.3g} on link "
            f"{path_set.network.links[worst].id}"
        )
    return x, q, q_prime, np.maximum(v, 0.0)


def _link_precedence_order(path_set: PathSet) -> np.ndarray:
    """Link indices ordered so every upstream-on-a-path link comes first.

    Falls back to ordering by earliest path position if the precedence
    relation is cyclic (possible with overlapping paths on a cyclic graph).
    """
    g = nx.DiGraph()
    g.add_nodes_from(range(path_set.n_links))
    for idx in path_set.path_link_idx:
        g.add_edges_from(zip(idx[:-1], idx[1:]))
    try:
        return np.array(list(nx.topological_sort(g)), dtype=np.intp)
    except nx.NetworkXUnfeasible:
        first_pos = np.full(path_set.n_links, np.inf)
        for idx in path_set.path_link_idx:
            for pos, a in enumerate(idx):
                first_pos[a] = min(first_pos[a], pos)
        return np.argsort(first_pos, kind="stable")


class _LinkArrays:
    """Per-link parameter arrays unpacked once per solve for the hot path."""

    def __init__(self, params: CostParams, t_f: np.ndarray, c_max: np.ndarray):
        shape = c_max.shape
        as_arr = lambda x: np.ascontiguousarray(
            np.broadcast_to(np.asarray(x, dtype=float), shape)
        )
        self.t_f = t_f
        self.c_max = c_max
        self.alpha = as_arr(params.alpha)
        self.beta = as_arr(params.beta)
        self.m = as_arr(params.m)
        self.n = as_arr(params.n)
        self.gamma = as_arr(params.gamma)
        self.phi = as_arr(params.phi)
        self.params = params

    def sub(self, idx: np.ndarray) -> "_LinkArrays":
        out = object.__new__(_LinkArrays)
        for name in ("t_f", "c_max", "alpha", "beta", "m", "n", "gamma", "phi"):
            setattr(out, name, getattr(self, name)[idx])
        out.params = CostParams(
            alpha=out.alpha,
            beta=out.beta,
            m=out.m,
            n=out.n,
            gamma=out.gamma,
            phi=out.phi,
        )
        return out


def _flow_marginals(
    v: np.ndarray,
    q: np.ndarray,
    la: "_LinkArrays",
    options: SolverOptions,
) -> np.ndarray:
    """Per-link marginals driving the path-flow step.

    The fixed-point queue mode equilibrates the generalized link times
    themselves; the smoothed mode descends the objective, whose flow
    gradient is the smoothed link time.  The system-optimum variant prices
    each link at its marginal (externality-inclusive) time.
    """
    if options.queue_mode == "smoothed_gradient" and options.variant != "system_optimum":
        return _cost.smoothed_link_time(v, q, la.t_f, la.c_max, la.params)
    t = _cost._generalized_time_fast(
        v, q, la.t_f, la.c_max, la.beta, la.n, la.alpha, la.m, la.gamma
    )
    if options.variant == "system_optimum":
        slope = _cost._running_slope_fast(
            v, q, la.t_f, la.c_max, la.beta, la.n, la.gamma
        )
        return t + (v + q) * slope
    return t


def _gp_flow_pass(
    path_set: PathSet,
    f: np.ndarray,
    queue_alloc: np.ndarray,
    la: "_LinkArrays",
    la_subs: list["_LinkArrays"],
    options: SolverOptions,
) -> np.ndarray:
    """One gradient-projection sweep over all OD pairs (returns new flows).

    Queues are frozen for the whole pass; link flows are updated
    incrementally between OD groups (Gauss-Seidel), and each group only
    ever touches the links its own paths use.
    """
    f = f.copy()
    queue_alloc = _repair_path_queues(path_set, f, queue_alloc)
    x, q, q_prime, _ = assemble_link_state(path_set, f, queue_alloc)
    held = queue_alloc.sum(axis=0)  # queued traffic per path, immovable

    for gi, group in enumerate(path_set.od_groups):
        if len(group) < 2:
            continue
        glinks = path_set.od_group_links[gi]
        positions = path_set.od_group_positions[gi]
        la_g = la_subs[gi]
        q_g = q[glinks]
        base_g = (x - q - q_prime)[glinks]  # before this group's shifts

        x_g0 = x[glinks]

        def eval_costs(xg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            # throughflow = base throughflow plus this group's own deltas
            vg = np.maximum(base_g + (xg - x_g0), 0.0)
            marg = _flow_marginals(vg, q_g, la_g, options)
            return np.array([marg[pos].sum() for pos in positions]), vg

        costs, v_g = eval_costs(x_g0)
        local_best = int(np.argmin(costs))
        best = group[local_best]
        best_pos = set(positions[local_best].tolist())
        slope = _cost._running_slope_fast(
            v_g, q_g, la_g.t_f, la_g.c_max, la_g.beta, la_g.n, la_g.gamma
        )
        # on queued links extra inflow feeds the queue (amplified by
        # 1/(1-gamma)), so the equilibrium cost responds through the
        # queuing-delay term as well; fold that into the curvature so
        # steps stay small where the queue, not the running time, reacts
        c_g = la_g.c_max - la_g.gamma * q_g
        with np.errstate(divide="ignore", invalid="ignore"):
            queue_slope = (
                la_g.alpha
                * la_g.m
                * (q_g / c_g) ** (la_g.m - 1.0)
                * (c_g + la_g.gamma * q_g)
                / (c_g**2 * np.maximum(1.0 - la_g.gamma, 1e-3))
            )
        slope = slope + np.where(q_g > 0, np.nan_to_num(queue_slope), 0.0)
        c_min = float(costs.min())
        # below this, a costlier path's remnant flow is noise relative to
        # the OD demand: flush it entirely instead of letting the
        # curvature-scaled step shrink it geometrically forever
        flush_floor = 1e-3 * float(f[group].sum())
        delta = np.zeros(len(group))
        for local, j in enumerate(group):
            if local == local_best or f[j] <= 0:
                continue
            gap = costs[local] - c_min
            if gap <= 0:
                continue
            own = set(positions[local].tolist())
            distinct = list(own ^ best_pos)  # non-shared links of both paths
            curvature = max(float(np.sum(slope[distinct])), CURVATURE_FLOOR)
            movable = max(f[j] - held[j], 0.0)
            if movable <= flush_floor:
                delta[local] = movable
            else:
                delta[local] = min(movable, gap / (options.step_scale * curvature))
        if not np.any(delta > 0):
            continue
        # backtrack the whole shift until the used-path cost spread does not
        # widen; guards against overshoot when curvature is near zero (e.g.
        # an empty path whose running-time slope vanishes at v = 0)
        spread_old = _group_spread(f, group, costs)
        scale = 1.0
        for _ in range(30):
            x_trial = x_g0.copy()
            moved = 0.0
            for local in np.flatnonzero(delta):
                x_trial[positions[local]] -= scale * delta[local]
                moved += scale * delta[local]
            x_trial[positions[local_best]] += moved
            f_trial = f.copy()
            f_trial[group] -= scale * delta
            f_trial[best] += moved
            costs_t, _ = eval_costs(x_trial)
            if _group_spread(f_trial, group, costs_t) <= spread_old + 1e-12:
                f = f_trial
                x[glinks] = x_trial
                break
            scale /= 2.0
    return f


def _flush_remnants(
    path_set: PathSet,
    f: np.ndarray,
    queue_alloc: np.ndarray,
    t_f: np.ndarray,
    c_max: np.ndarray,
    params: CostParams,
) -> tuple[np.ndarray, np.ndarray]:
    """Zero out costlier paths whose flow is noise relative to OD demand.

    The curvature-scaled step can leave a geometrically decaying remnant on
    a path that should carry nothing, especially when a sliver of queue is
    attributed to it (flow and held queue then chase each other downward).
    Reassigning the remnant (bounded by 1e-3 of the OD demand) to the
    cheapest path perturbs link flows by less than the solve tolerance.
    """
    f = f.copy()
    queue_alloc = queue_alloc.copy()
    x, q, _, v = assemble_link_state(path_set, f, queue_alloc)
    times = _cost.link_travel_time(v, q, t_f, c_max, params)
    costs = path_set.incidence.T @ times
    for group in path_set.od_groups:
        if len(group) < 2:
            continue
        floor = 1e-3 * float(f[group].sum())
        best = group[int(np.argmin(costs[group]))]
        c_min = float(costs[group].min())
        for j in group:
            if j != best and 0.0 < f[j] <= floor and costs[j] > c_min + 1e-9:
                f[best] += f[j]
                f[j] = 0.0
                queue_alloc[:, j] = 0.0
    return f, queue_alloc


def _group_spread(f: np.ndarray, group: np.ndarray, costs: np.ndarray) -> float:
    """Max used-path cost excess over the group's cheapest path."""
    used = costs[f[group] > 1e-9]
    if used.size == 0:
        return 0.0
    return float(used.max() - costs.min())


def _repair_path_queues(
    path_set: PathSet, f: np.ndarray, queue_alloc: np.ndarray
) -> np.ndarray:
    """Scale a path's queues down so they never exceed its (new) flow.

    Keeps the trip-completing flow f_p = f~_p - sum_a Q_ap nonnegative after
    the flow step moves flow off a path whose queues were sized for more.
    """
    held = queue_alloc.sum(axis=0)
    over = held > f
    if not np.any(over):
        return queue_alloc
    scale = np.where(over, f / np.maximum(held, 1e-300), 1.0)
    return queue_alloc * scale[None, :]


def _relative_gap(
    path_set: PathSet, f: np.ndarray, costs: np.ndarray
) -> float:
    num = den = 0.0
    for i, group in enumerate(path_set.od_groups):
        if len(group) == 0:
            continue
        w = float(costs[group].min())
        num += float(np.sum(f[group] * (costs[group] - w)))
        den += path_set.network.od_pairs[i].demand * w
    return num / den if den > 0 else 0.0


def _queue_targets_fixed_point(
    path_set: PathSet,
    f: np.ndarray,
    queue_alloc: np.ndarray,
    c_max: np.ndarray,
    params: CostParams,
    relaxation: float,
    order: np.ndarray | None = None,
) -> np.ndarray:
    """Complementarity fixed-point queue sweep (returns new queue_alloc).

    Per link, in upstream-first order: the inflow that survives upstream
    queues is x - Q'; if it exceeds the base capacity, the steady queue
    solves x - Q' - Q = C_max - gamma*Q, i.e. Q = (x - Q' - C_max)/(1 -
    gamma); otherwise the queue vanishes.  The link queue is attributed to
    its paths in proportion to their assigned flow.
    """
    gamma = np.broadcast_to(np.asarray(params.gamma, dtype=float), c_max.shape)
    new_alloc = queue_alloc.copy()
    if order is None:
        order = _link_precedence_order(path_set)
    for a in order:
        # per-path flow still arriving at a after upstream queues (this sweep)
        through = path_set.paths_through[a]
        arriving = np.empty(len(through))
        for k, (j, pos) in enumerate(through):
            idx = path_set.path_link_idx[j]
            arriving[k] = max(f[j] - float(new_alloc[idx[:pos], j].sum()), 0.0)
        inflow = float(arriving.sum())  # = x_a - Q'_a
        g = gamma[a]
        surplus = inflow - c_max[a]
        if g >= 1.0:
            target = np.inf if surplus > 0 else 0.0
        else:
            target = max(0.0, surplus / (1.0 - g))
        # never hold back more than arrives, nor beyond the capacity cap
        target = min(target, inflow)
        if g > 0:
            target = min(target, QUEUE_CAP_FRACTION * c_max[a] / g)
        # relax per (link, path): sudden re-attribution between paths is as
        # destabilizing downstream as a sudden change in the link total
        if target > 0 and inflow > 0:
            share = arriving / inflow
        else:
            share = np.zeros(len(through))
        for k, (j, _pos) in enumerate(through):
            new_alloc[a, j] = max(
                0.0,
                new_alloc[a, j]
                + relaxation * (target * share[k] - new_alloc[a, j]),
            )
    return new_alloc


def _queue_step_smoothed(
    path_set: PathSet,
    f: np.ndarray,
    queue_alloc: np.ndarray,
    t_f: np.ndarray,
    c_max: np.ndarray,
    params: CostParams,
) -> np.ndarray:
    """Projected-gradient queue step with backtracking on the objective."""
    x, q, q_prime, v = assemble_link_state(path_set, f, queue_alloc)
    j0 = _cost.objective(v, q, t_f, c_max, params)
    _, grad_q = _cost.objective_gradient(path_set, v, q, t_f, c_max, params)
    gamma = np.broadcast_to(np.asarray(params.gamma, dtype=float), c_max.shape)
    with np.errstate(divide="ignore"):
        q_cap = np.where(gamma > 0, QUEUE_CAP_FRACTION * c_max / np.where(gamma > 0, gamma, 1.0), np.inf)
    step = 1.0
    for _ in range(40):
        trial = np.where(
            path_set.incidence > 0, queue_alloc - step * grad_q, 0.0
        )
        trial = np.maximum(trial, 0.0)
        # keep each link's total queue inside the capacity cap
        totals = trial.sum(axis=1)
        over = totals > q_cap
        if np.any(over):
            scale = np.where(over, q_cap / np.maximum(totals, 1e-300), 1.0)
            trial = trial * scale[:, None]
        xt, qt, _, vt = assemble_link_state(path_set, f, trial)
        if _cost.objective(vt, qt, t_f, c_max, params) <= j0 + 1e-12:
            return trial
        step /= 2.0
    return queue_alloc


def _aon_initial_flows(path_set: PathSet) -> np.ndarray:
    """All-or-nothing start: full OD demand on its free-flow cheapest path."""
    t_f = np.array([l.free_flow_time for l in path_set.network.links])
    f = np.zeros(path_set.n_paths)
    for i, group in enumerate(path_set.od_groups):
        if len(group) == 0:
            continue
        ff_costs = [
            (float(t_f[path_set.path_link_idx[j]].sum()), path_set.paths[j].links, j)
            for j in group
        ]
        _, _, best = min(ff_costs)
        f[best] = path_set.network.od_pairs[i].demand
    return f


def _apply_variant(params: CostParams, variant: str) -> CostParams:
    if variant == "fixed_capacity_queue":
        # capacity never degrades, and the smoothing base collapses so the
        # running-time exponent is insensitive to queues
        return params.replace(
            gamma=np.zeros_like(np.asarray(params.gamma, dtype=float)),
            phi=np.ones_like(np.asarray(params.phi, dtype=float)),
        )
    return params


def solve(
    path_set: PathSet,
    params: CostParams | None = None,
    options: SolverOptions | None = None,
    demands: Sequence[float] | None = None,
    initial_flows: np.ndarray | None = None,
) -> tuple[SolutionState, ConvergenceReport]:
    """Solve for equilibrium path flows and residual queues.

    `demands` optionally overrides the OD demands (same order as the
    network's OD pairs) without rebuilding the network.
    """
    options = options or SolverOptions()
    network = path_set.network
    base = (params or CostParams()).for_links(network.links)
    base = _apply_variant(base, options.variant)
    t_f = np.array([l.free_flow_time for l in network.links])
    c_max = np.array([l.capacity for l in network.links])

    if demands is not None:
        if len(demands) != len(network.od_pairs):
            raise ValueError("demands override must match the OD pair count")
        network = network.with_demands(
            [
                od.__class__(od.origin, od.destination, float(d))
                for od, d in zip(network.od_pairs, demands)
            ]
        )
        path_set = PathSet(
            network,
            [p.__class__(p.od_index, p.links) for p in path_set.paths],
        )

    if initial_flows is not None:
        f = np.asarray(initial_flows, dtype=float).copy()
        if f.shape != (path_set.n_paths,):
            raise ValueError("initial_flows must have one entry per path")
        if np.any(f < 0):
            raise ValueError("initial_flows must be >= 0")
        for i, group in enumerate(path_set.od_groups):
            want = path_set.network.od_pairs[i].demand
            got = float(f[group].sum()) if len(group) else 0.0
            if abs(got - want) > 1e-6 * max(1.0, want):
                raise ValueError(
                    f"initial_flows violate demand conservation for OD {i}"
                )
    else:
        f = _aon_initial_flows(path_set)

    queue_alloc = np.zeros((path_set.n_links, path_set.n_paths))
    la = _LinkArrays(base, t_f, c_max)
    la_subs = [la.sub(g) for g in path_set.od_group_links]
    order = _link_precedence_order(path_set)
    gamma_arr = np.broadcast_to(np.asarray(base.gamma, dtype=float), c_max.shape)
    if options.queue_relaxation is not None:
        theta = options.queue_relaxation
    else:
        theta = float(np.clip(0.5 * (1.0 - gamma_arr.max()), 0.05, 0.5))

    update_queues = options.variant != "traditional_ue"
    backtrack_flows = (
        options.queue_mode == "smoothed_gradient"
        and options.variant != "system_optimum"
    )
    history: list[tuple[int, float, float, float, float, float]] = []
    flow_change = queue_change = np.inf
    converged = False
    it = 0
    damping = np.ones(len(path_set.od_groups))
    delta_prev: np.ndarray | None = None
    t_start = time.perf_counter()
    for it in range(1, options.max_outer_iterations + 1):
        f_prev = f.copy()
        q_prev = queue_alloc.sum(axis=1)

        for _ in range(options.max_inner_passes):
            f_new = _gp_flow_pass(path_set, f, queue_alloc, la, la_subs, options)
            if backtrack_flows:
                # halve the whole pass until the objective does not increase
                _, q0, _, v0 = assemble_link_state(path_set, f, _repair_path_queues(path_set, f, queue_alloc))
                j_before = _cost.objective(v0, q0, t_f, c_max, base)
                for _bt in range(40):
                    trial_q = _repair_path_queues(path_set, f_new, queue_alloc)
                    _, qt, _, vt = assemble_link_state(path_set, f_new, trial_q)
                    if _cost.objective(vt, qt, t_f, c_max, base) <= j_before + 1e-9:
                        break
                    f_new = f + 0.5 * (f_new - f)
                else:
                    f_new = f
            inner_change = float(np.max(np.abs(f_new - f))) if f.size else 0.0
            f = f_new
            queue_alloc = _repair_path_queues(path_set, f, queue_alloc)
            if inner_change <= 0.1 * options.epsilon:
                break

        # near-degenerate path sets can sustain a flow<->queue limit cycle:
        # the iterate swings between two flow splits of identical cost.
        # Detect the reversal (successive flow deltas pointing in opposite
        # directions) and damp the outer flow update; averaging a two-cycle
        # lands on its fixed point.  Recover the step size once the
        # iteration behaves monotonically again.
        delta = f - f_prev
        if delta_prev is not None:
            damped_any = False
            for i, group in enumerate(path_set.od_groups):
                if float(delta_prev[group] @ delta[group]) < 0.0:
                    damping[i] = max(0.05, 0.5 * damping[i])
                else:
                    damping[i] = min(1.0, 1.25 * damping[i])
                if damping[i] < 1.0:
                    f[group] = f_prev[group] + damping[i] * delta[group]
                    damped_any = True
            if damped_any:
                queue_alloc = _repair_path_queues(path_set, f, queue_alloc)
        delta_prev = f - f_prev

        x, q, q_prime, v = assemble_link_state(path_set, f, queue_alloc)
        j_half = _cost.objective(v, q, t_f, c_max, base)

        if update_queues:
            if options.queue_mode == "fixed_point":
                queue_alloc = _queue_targets_fixed_point(
                    path_set, f, queue_alloc, c_max, base, theta, order
                )
            else:
                queue_alloc = _queue_step_smoothed(
                    path_set, f, queue_alloc, t_f, c_max, base
                )

        flow_change = float(np.max(np.abs(f - f_prev))) if f.size else 0.0
        queue_change = float(
            np.max(np.abs(queue_alloc.sum(axis=1) - q_prev))
        )
        x, q, q_prime, v = assemble_link_state(path_set, f, queue_alloc)
        j_full = _cost.objective(v, q, t_f, c_max, base)
        times = _cost.link_travel_time(v, q, t_f, c_max, base)
        gap = _relative_gap(path_set, f, path_set.incidence.T @ times)
        history.append((it, j_half, j_full, flow_change, queue_change, gap))
        if max(flow_change, queue_change) <= options.epsilon:
            converged = True
            break

    f, queue_alloc = _flush_remnants(path_set, f, queue_alloc, t_f, c_max, base)
    if update_queues and options.queue_mode == "fixed_point":
        # one exact (unrelaxed) sweep so queued links satisfy v = C(Q) to
        # machine precision rather than to the relaxed tolerance
        queue_alloc = _queue_targets_fixed_point(
            path_set, f, queue_alloc, c_max, base, 1.0, order
        )

    x, q, q_prime, v = assemble_link_state(path_set, f, queue_alloc)
    times = _cost.link_travel_time(v, q, t_f, c_max, base)
    state = SolutionState(
        path_set=path_set,
        params=base,
        variant=options.variant,
        path_flows=f,
        queue_alloc=queue_alloc,
        link_flows=x,
        link_queues=q,
        upstream_queues=q_prime,
        throughflows=v,
        link_times=times,
    )
    report = ConvergenceReport(
        converged=converged,
        iterations=it,
        flow_change=flow_change,
        queue_change=queue_change,
        wall_time=time.perf_counter() - t_start,
        history=history,
    )
    return state, report


def solve_variant(
    path_set: PathSet,
    variant: str,
    params: CostParams | None = None,
    options: SolverOptions | None = None,
    **kwargs,
) -> tuple[SolutionState, ConvergenceReport]:
    """`solve` with the variant swapped into the options."""
    options = options or SolverOptions()
    from dataclasses import replace as _replace

    return solve(path_set, params, _replace(options, variant=variant), **kwargs)
