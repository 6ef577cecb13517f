"""Command-line front end: solve, compare, sweep, validate.

Scenarios are described by a flat key=value config file (paths resolved
relative to the config file) with command-line flags taking precedence:

    nodes=nodes.csv        links=links.csv
    demands=demands.csv    paths=paths.csv   (or k=3 for enumeration)
    alpha=0.5 beta=0.5 m=1 n=4 gamma=0.5 phi=2.718281828459045
    mode=fixed_point variant=queue_dependent epsilon=1e-3 max_iter=2000

Exit codes: 0 converged/clean, 1 input error, 2 not converged (or a
declared sweep trend failed).
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path as FsPath

import numpy as np

from . import cost as _cost
from .analysis import compare_models, kkt_report
from .cost import CostParams
from .net import Network, NetworkError, PathSet, enumerate_paths, load_demands, load_network, load_path_set
from .solver import VARIANTS, SolverOptions, assemble_link_state, solve
from .sweep import SweepSpec, run_sweep, trend_check

_COST_KEYS = ("alpha", "beta", "m", "n", "gamma", "phi")


def _fmt(value: float) -> str:
    return f"{value:.6g}"


class ConfigError(ValueError):
    pass


def _read_config(path: str) -> dict[str, str]:
    cfg_path = FsPath(path)
    if not cfg_path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cfg: dict[str, str] = {"_dir": str(cfg_path.parent)}
    for line_no, raw in enumerate(cfg_path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected key=value")
        key, _, value = line.partition("=")
        cfg[key.strip()] = value.strip()
    return cfg


def _resolve(cfg: dict[str, str], key: str) -> FsPath:
    if key not in cfg:
        raise ConfigError(f"config is missing '{key}'")
    p = FsPath(cfg[key])
    if not p.is_absolute():
        p = FsPath(cfg["_dir"]) / p
    if not p.is_file():
        raise ConfigError(f"{key} file not found: {p}")
    return p


def _build_scenario(cfg: dict[str, str]) -> tuple[Network, PathSet]:
    with open(_resolve(cfg, "nodes")) as nf, open(_resolve(cfg, "links")) as lf:
        network = load_network(nf, lf)
    with open(_resolve(cfg, "demands")) as df:
        network = load_demands(df, network)
    if "paths" in cfg:
        with open(_resolve(cfg, "paths")) as pf:
            path_set = load_path_set(pf, network)
    elif "k" in cfg:
        path_set = enumerate_paths(network, int(cfg["k"]))
    else:
        raise ConfigError("config needs 'paths' (file) or 'k' (enumeration depth)")
    return network, path_set


def _build_params(cfg: dict[str, str]) -> CostParams:
    kwargs = {}
    for key in _COST_KEYS:
        if key in cfg:
            try:
                kwargs[key] = float(cfg[key])
            except ValueError as exc:
                raise ConfigError(f"config field '{key}' is not numeric") from exc
    return CostParams(**kwargs)


def _build_options(cfg: dict[str, str], args: argparse.Namespace) -> SolverOptions:
    mode = args.mode or cfg.get("mode", "fixed_point")
    variant = args.variant or cfg.get("variant", "queue_dependent")
    epsilon = args.epsilon if args.epsilon is not None else float(cfg.get("epsilon", 1e-3))
    max_iter = args.max_iter if args.max_iter is not None else int(cfg.get("max_iter", 2000))
    try:
        return SolverOptions(
            queue_mode=mode,
            variant=variant,
            epsilon=epsilon,
            max_outer_iterations=max_iter,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _out_dir(cfg: dict[str, str], args: argparse.Namespace) -> FsPath:
    out = FsPath(args.out or cfg.get("out", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_result_bundle(out: FsPath, state, report) -> None:
    network = state.path_set.network
    rep = kkt_report(state)
    congested = set(rep.congested_links)
    with open(out / "links.csv", "w") as fh:
        fh.write(
            "link_id,flow,queue,capacity,travel_time,queuing_delay,"
            "generalized_cost,congested\n"
        )
        caps = _cost.capacity(state.link_queues, state.c_max, state.params)
        delays = _cost.queuing_delay(state.link_queues, state.c_max, state.params)
        for i, link in enumerate(network.links):
            fh.write(
                ",".join(
                    [
                        link.id,
                        _fmt(state.throughflows[i]),
                        _fmt(state.link_queues[i]),
                        _fmt(caps[i]),
                        _fmt(state.link_times[i] - delays[i]),
                        _fmt(delays[i]),
                        _fmt(state.link_times[i]),
                        "1" if link.id in congested else "0",
                    ]
                )
                + "\n"
            )
    costs = state.path_costs()
    completing = state.completing_flows()
    with open(out / "paths.csv", "w") as fh:
        fh.write(
            "origin,destination,links,oversaturated_flow,completing_flow,"
            "generalized_cost\n"
        )
        for j, p in enumerate(state.path_set.paths):
            od = network.od_pairs[p.od_index]
            fh.write(
                f"{od.origin},{od.destination},{';'.join(p.links)},"
                f"{_fmt(state.path_flows[j])},{_fmt(completing[j])},"
                f"{_fmt(costs[j])}\n"
            )
    with open(out / "convergence.csv", "w") as fh:
        fh.write("iteration,objective_half,objective,flow_change,queue_change,gap\n")
        for it, j_half, j_full, df, dq, gap in report.history:
            fh.write(
                f"{it},{_fmt(j_half)},{_fmt(j_full)},{_fmt(df)},{_fmt(dq)},"
                f"{_fmt(gap)}\n"
            )
    total_cost = float(
        np.sum((state.throughflows + state.link_queues) * state.link_times)
    )
    with open(out / "summary.txt", "w") as fh:
        fh.write(
            f"status: {'converged' if report.converged else 'iteration_limit'}\n"
            f"iterations: {report.iterations}\n"
            f"total_generalized_cost: {_fmt(total_cost)}\n"
            f"congested_links: {len(congested)}\n"
            f"relative_gap: {_fmt(rep.relative_gap)}\n"
        )


def cmd_solve(args: argparse.Namespace) -> int:
    cfg = _read_config(args.config)
    network, path_set = _build_scenario(cfg)
    params = _build_params(cfg)
    options = _build_options(cfg, args)
    state, report = solve(path_set, params, options)
    out = _out_dir(cfg, args)
    _write_result_bundle(out, state, report)
    print(
        f"{'converged' if report.converged else 'iteration limit'} after "
        f"{report.iterations} iterations; outputs in {out}"
    )
    return 0 if report.converged else 2


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = _read_config(args.config)
    network, path_set = _build_scenario(cfg)
    params = _build_params(cfg)
    options = _build_options(cfg, args)
    track = args.track.split(",") if args.track else [l.id for l in network.links]
    known = {l.id for l in network.links}
    for lid in track:
        if lid not in known:
            raise ConfigError(f"unknown link id in --track: {lid}")
    variants = tuple(args.variants.split(",")) if args.variants else VARIANTS
    for v in variants:
        if v not in VARIANTS:
            raise ConfigError(f"unknown variant: {v}")
    rows = compare_models(path_set, params, options, variants)
    out = _out_dir(cfg, args)
    all_converged = True
    with open(out / "compare.csv", "w") as fh:
        fh.write("variant,link_id,flow,capacity,queue,queuing_delay,generalized_cost\n")
        for row in rows:
            all_converged &= row.report.converged
            st = row.state
            caps = _cost.capacity(st.link_queues, st.c_max, st.params)
            delays = _cost.queuing_delay(st.link_queues, st.c_max, st.params)
            for lid in track:
                i = path_set.link_index(lid)
                fh.write(
                    f"{row.variant},{lid},{_fmt(st.throughflows[i])},"
                    f"{_fmt(caps[i])},{_fmt(st.link_queues[i])},"
                    f"{_fmt(delays[i])},{_fmt(st.link_times[i])}\n"
                )
    print(f"wrote {out / 'compare.csv'} ({len(rows)} variants x {len(track)} links)")
    return 0 if all_converged else 2


def _parse_range(spec: str) -> tuple[float, ...]:
    try:
        lo, hi, step = (float(s) for s in spec.split(":"))
    except ValueError as exc:
        raise ConfigError(f"--range must be lo:hi:step, got {spec!r}") from exc
    if step <= 0 or hi < lo:
        raise ConfigError("--range requires step > 0 and hi >= lo")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(lo + i * step for i in range(count))


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _read_config(args.config)
    network, path_set = _build_scenario(cfg)
    params = _build_params(cfg)
    options = _build_options(cfg, args)
    if not args.param:
        raise ConfigError("--param is required for sweep")
    if args.values:
        try:
            values = tuple(float(s) for s in args.values.split(",") if s.strip())
        except ValueError as exc:
            raise ConfigError("--values must be comma-separated numbers") from exc
    elif args.range:
        values = _parse_range(args.range)
    else:
        raise ConfigError("sweep needs --values or --range")
    if not values:
        raise ConfigError("empty sweep value list")
    od_index = 0
    if args.param == "demand":
        if args.od:
            want = tuple(s.strip() for s in args.od.split(","))
            if len(want) != 2:
                raise ConfigError("--od must be origin,destination")
            matches = [
                i
                for i, od in enumerate(network.od_pairs)
                if (od.origin, od.destination) == want
            ]
            if not matches:
                raise ConfigError(f"no OD pair {want[0]}->{want[1]} in the scenario")
            od_index = matches[0]
    try:
        spec = SweepSpec(args.param, values, od_index)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    workers = max(1, int(os.environ.get("QUEUELIB_THREADS", "1")))
    if workers > 1:
        # each point is an independent solve on shared read-only inputs
        with ThreadPoolExecutor(max_workers=workers) as pool:
            point_rows = list(
                pool.map(
                    lambda v: run_sweep(
                        path_set, SweepSpec(args.param, (v,), od_index), params, options
                    )[0],
                    values,
                )
            )
    else:
        point_rows = run_sweep(path_set, spec, params, options)

    track = args.track.split(",") if args.track else [l.id for l in network.links]
    known = {l.id for l in network.links}
    for lid in track:
        if lid not in known:
            raise ConfigError(f"unknown link id in --track: {lid}")
    idx = {lid: path_set.link_index(lid) for lid in track}
    out = _out_dir(cfg, args)
    with open(out / "sweep.csv", "w") as fh:
        cols = [args.param, "converged"]
        for lid in track:
            cols += [
                f"flow_{lid}",
                f"queue_{lid}",
                f"delay_{lid}",
                f"time_{lid}",
                f"cost_{lid}",
            ]
        fh.write(",".join(cols) + "\n")
        for row in point_rows:
            cells = [_fmt(row.value), "1" if row.converged else "0"]
            for lid in track:
                i = idx[lid]
                cells += [
                    _fmt(row.throughflows[i]),
                    _fmt(row.link_queues[i]),
                    _fmt(row.queue_delays[i]),
                    _fmt(row.link_times[i] - row.queue_delays[i]),
                    _fmt(row.link_times[i]),
                ]
            fh.write(",".join(cells) + "\n")

    all_converged = all(r.converged for r in point_rows)
    trends_ok = True
    if args.trend:
        lid = track[0]
        i = idx[lid]
        series = {
            "flow": [r.throughflows[i] for r in point_rows],
            "queue": [r.link_queues[i] for r in point_rows],
            "cost": [r.link_times[i] for r in point_rows],
        }
        expectations = {}
        for item in args.trend.split(","):
            name, _, direction = item.partition(":")
            expectations[name.strip()] = direction.strip()
        result = trend_check(series, expectations)
        trends_ok = result.passed
        for violation in result.violations:
            print(f"trend violation on link {lid}: {violation}", file=sys.stderr)
    print(f"wrote {out / 'sweep.csv'} ({len(point_rows)} points)")
    return 0 if (all_converged and trends_ok) else 2


def cmd_validate(args: argparse.Namespace) -> int:
    cfg = _read_config(args.config)
    network, path_set = _build_scenario(cfg)
    params = _build_params(cfg).for_links(network.links)
    t_f = np.array([l.free_flow_time for l in network.links])
    c_max = np.array([l.capacity for l in network.links])
    rng = np.random.default_rng(args.seed if args.seed is not None else 42)

    f = np.zeros(path_set.n_paths)
    for i, group in enumerate(path_set.od_groups):
        if len(group):
            f[group] = rng.dirichlet(np.ones(len(group))) * network.od_pairs[i].demand
    q_ap = np.where(path_set.incidence > 0, rng.uniform(0.0, 1.0, path_set.incidence.shape), 0.0)
    q_ap = _scale_feasible(path_set, f, q_ap)
    x, q, q_prime, v = assemble_link_state(path_set, f, q_ap)

    grad_f, grad_q = _cost.objective_gradient(path_set, v, q, t_f, c_max, params)
    max_rel = 0.0

    def j_of(f_trial, q_trial):
        _, qq, _, vv = assemble_link_state(path_set, f_trial, q_trial)
        return _cost.objective(vv, qq, t_f, c_max, params)

    for j in range(path_set.n_paths):
        h = 1e-4 * max(1.0, abs(f[j]))
        fp, fm = f.copy(), f.copy()
        fp[j] += h
        fm[j] -= h
        fd = (j_of(fp, q_ap) - j_of(fm, q_ap)) / (2 * h)
        denom = max(abs(fd), 1e-8)
        max_rel = max(max_rel, abs(grad_f[j] - fd) / denom)
    for a in range(path_set.n_links):
        for j, _pos in path_set.paths_through[a]:
            h = 1e-4 * max(1.0, abs(q_ap[a, j]))
            qp, qm = q_ap.copy(), q_ap.copy()
            qp[a, j] += h
            qm[a, j] = max(0.0, qm[a, j] - h)
            fd = (j_of(f, qp) - j_of(f, qm)) / (qp[a, j] - qm[a, j])
            denom = max(abs(fd), 1e-8)
            max_rel = max(max_rel, abs(grad_q[a, j] - fd) / denom)

    ok = max_rel <= 1e-5
    print(
        f"validation: {len(network.links)} links, {path_set.n_paths} paths; "
        f"gradient max relative error {max_rel:.2e} "
        f"({'ok' if ok else 'FAIL'})"
    )
    return 0 if ok else 1


def _scale_feasible(path_set, f, q_ap):
    held = q_ap.sum(axis=0)
    cap = 0.5 * f  # keep queues well inside the feasible interior
    scale = np.where(held > cap, cap / np.maximum(held, 1e-300), 1.0)
    return q_ap * scale[None, :]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="queuenet",
        description="Traffic assignment with residual queues and "
        "queue-dependent link capacity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="scenario config file")
    common.add_argument("--out", help="output directory (default from config or 'out')")
    common.add_argument("--variant", help=f"model variant: {', '.join(VARIANTS)}")
    common.add_argument("--mode", help="queue mode: fixed_point | smoothed_gradient")
    common.add_argument("--epsilon", type=float, help="convergence tolerance (veh/hr)")
    common.add_argument("--max-iter", type=int, help="outer iteration limit")
    common.add_argument("--seed", type=int, help="seed for randomized elements")

    sub.add_parser("solve", parents=[common], help="solve one scenario")
    p_cmp = sub.add_parser("compare", parents=[common], help="compare model variants")
    p_cmp.add_argument("--track", help="comma-separated link ids (default: all)")
    p_cmp.add_argument("--variants", help="comma-separated variant subset")
    p_sw = sub.add_parser("sweep", parents=[common], help="parameter/demand sweep")
    p_sw.add_argument("--param", help="alpha|beta|m|n|gamma|phi|demand")
    p_sw.add_argument("--values", help="comma-separated sweep values")
    p_sw.add_argument("--range", help="lo:hi:step (alternative to --values)")
    p_sw.add_argument("--od", help="origin,destination for demand sweeps")
    p_sw.add_argument("--track", help="comma-separated link ids (default: all)")
    p_sw.add_argument(
        "--trend",
        help="declared trends for the first tracked link, e.g. "
        "'flow:decreasing,queue:increasing'",
    )
    sub.add_parser("validate", parents=[common], help="input + gradient checks")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "solve": cmd_solve,
        "compare": cmd_compare,
        "sweep": cmd_sweep,
        "validate": cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, NetworkError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
