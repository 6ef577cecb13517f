"""Link performance functions with queue-dependent capacity.

A residual queue Q at a link entrance reduces the discharge capacity to
C(Q) = C_max - gamma*Q.  Generalized link time is a polynomial running-time
term evaluated against C(Q) plus an explicit queuing-delay term

    t(v, Q) = t_f * (1 + beta * (v / C(Q))**n) + alpha * (Q / C(Q))**m.

For the optimization objective the running-time exponent is smoothed in the
queue, n~ = n * phi**(-Q), which makes the potential function below convex
in (path flows, path queues) and recovers the equilibrium conditions from
its stationarity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .net import Link, PathSet

__all__ = [
    "CostParams",
    "gamma_of_flow",
    "gamma_inverse",
    "capacity",
    "link_travel_time",
    "queuing_delay",
    "smoothed_link_time",
    "queue_delay_marginal",
    "running_time_slope",
    "marginal_link_time",
    "objective",
    "objective_gradient",
]

ArrayLike = "float | np.ndarray"


@dataclass(frozen=True)
class CostParams:
    """Generalized-cost parameters; fields may be scalars or per-link arrays.

    alpha  weight of the queuing-delay term (hours at Q/C = 1)
    beta   running-time congestion coefficient
    m      queuing-delay exponent
    n      running-time exponent
    gamma  capacity loss per unit queue (dimensionless)
    phi    smoothing base for the queue-dependent running-time exponent
    """

    alpha: float | np.ndarray = 0.5
    beta: float | np.ndarray = 0.5
    m: float | np.ndarray = 1.0
    n: float | np.ndarray = 4.0
    gamma: float | np.ndarray = 0.5
    phi: float | np.ndarray = math.e

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma"):
            if np.any(np.asarray(getattr(self, name)) < 0):
                raise ValueError(f"{name} must be >= 0")
        if np.any(np.asarray(self.m) <= 0) or np.any(np.asarray(self.n) <= 0):
            raise ValueError("m and n must be > 0")
        if np.any(np.asarray(self.phi) < 1):
            raise ValueError("phi must be >= 1")

    def replace(self, **kwargs) -> "CostParams":
        return replace(self, **kwargs)

    def for_links(self, links: Sequence["Link"]) -> "CostParams":
        """Expand to per-link arrays, applying any per-link overrides."""
        fields = {}
        for name in ("alpha", "beta", "m", "n", "gamma", "phi"):
            base = np.broadcast_to(
                np.asarray(getattr(self, name), dtype=float), (len(links),)
            ).copy()
            for i, link in enumerate(links):
                ov = link.override_map()
                if name in ov:
                    base[i] = ov[name]
            fields[name] = base
        return CostParams(**fields)


def gamma_of_flow(v: ArrayLike, c_max: ArrayLike, params: CostParams) -> np.ndarray:
    """Queue at which discharge capacity would equal the flow v.

    Solves C_max - gamma*Q = v for Q; infinite where gamma = 0 and v < C_max
    (a fixed-capacity link never chokes down to its inflow).
    """
    v = np.asarray(v, dtype=float)
    c_max = np.asarray(c_max, dtype=float)
    gamma = np.asarray(params.gamma, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(gamma > 0, (c_max - v) / np.where(gamma > 0, gamma, 1.0), np.inf)
    return np.where((gamma == 0) & (v >= c_max), 0.0, out)


def gamma_inverse(q: ArrayLike, c_max: ArrayLike, params: CostParams) -> np.ndarray:
    """Flow sustained when the link runs at queue q: C_max - gamma*q."""
    return np.asarray(c_max, dtype=float) - np.asarray(params.gamma, dtype=float) * np.asarray(q, dtype=float)


def capacity(q: ArrayLike, c_max: ArrayLike, params: CostParams) -> np.ndarray:
    """Queue-dependent discharge capacity C(Q) = C_max - gamma*Q (> 0)."""
    q = np.asarray(q, dtype=float)
    if np.any(q < 0):
        raise ValueError("queue must be >= 0")
    c = gamma_inverse(q, c_max, params)
    if np.any(c <= 0):
        raise ValueError("queue exhausts link capacity (C_max - gamma*Q <= 0)")
    return c


def queuing_delay(q: ArrayLike, c_max: ArrayLike, params: CostParams) -> np.ndarray:
    """Delay term alpha * (Q / C(Q))**m."""
    q = np.asarray(q, dtype=float)
    c = capacity(q, c_max, params)
    return np.asarray(params.alpha) * (q / c) ** np.asarray(params.m)


def link_travel_time(
    v: ArrayLike, q: ArrayLike, t_f: ArrayLike, c_max: ArrayLike, params: CostParams
) -> np.ndarray:
    """Generalized link time: running time against C(Q) plus queuing delay."""
    v = np.asarray(v, dtype=float)
    t_f = np.asarray(t_f, dtype=float)
    c = capacity(q, c_max, params)
    running = t_f * (1.0 + np.asarray(params.beta) * (v / c) ** np.asarray(params.n))
    return running + queuing_delay(q, c_max, params)


def running_time_slope(
    v: ArrayLike, q: ArrayLike, t_f: ArrayLike, c_max: ArrayLike, params: CostParams
) -> np.ndarray:
    """d/dv of the running-time term: t_f * beta * n * v**(n-1) / C(Q)**n."""
    v = np.asarray(v, dtype=float)
    c = capacity(q, c_max, params)
    n = np.asarray(params.n, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        slope = np.asarray(t_f) * np.asarray(params.beta) * n * (v / c) ** (n - 1.0) / c
    # v = 0 with n < 1 gives 0**negative; the slope limit there is +inf but
    # we only use this as local curvature, so flush to 0 like the n > 1 case.
    return np.where(v > 0, slope, np.where(n == 1.0, np.asarray(t_f) * np.asarray(params.beta) / c, 0.0))


def marginal_link_time(
    v: ArrayLike, q: ArrayLike, t_f: ArrayLike, c_max: ArrayLike, params: CostParams
) -> np.ndarray:
    """System-optimum marginal cost: t + (v + Q) * dt/dv."""
    v = np.asarray(v, dtype=float)
    q = np.asarray(q, dtype=float)
    return link_travel_time(v, q, t_f, c_max, params) + (v + q) * running_time_slope(
        v, q, t_f, c_max, params
    )


def _generalized_time_fast(
    v: np.ndarray,
    q: np.ndarray,
    t_f: np.ndarray,
    c_max: np.ndarray,
    beta: np.ndarray,
    n: np.ndarray,
    alpha: np.ndarray,
    m: np.ndarray,
    gamma: np.ndarray,
) -> np.ndarray:
    """Validation-free generalized-cost evaluation with capacity computed once.

    Solver hot path; inputs are already-feasible solver state arrays.
    """
    c = c_max - gamma * q
    return t_f * (1.0 + beta * (v / c) ** n) + alpha * (q / c) ** m


def _running_slope_fast(
    v: np.ndarray,
    q: np.ndarray,
    t_f: np.ndarray,
    c_max: np.ndarray,
    beta: np.ndarray,
    n: np.ndarray,
    gamma: np.ndarray,
) -> np.ndarray:
    c = c_max - gamma * q
    with np.errstate(invalid="ignore", divide="ignore"):
        slope = t_f * beta * n * (v / c) ** (n - 1.0) / c
    return np.where(v > 0, slope, np.where(n == 1.0, t_f * beta / c, 0.0))


def _smoothed_exponent(q: ArrayLike, params: CostParams) -> np.ndarray:
    """n~ = n * phi**(-Q); hardware underflow flushes huge queues to n~ = 0."""
    q = np.asarray(q, dtype=float)
    n = np.asarray(params.n, dtype=float)
    log_phi = np.log(np.asarray(params.phi, dtype=float))
    return n * np.exp(-q * log_phi)


def smoothed_link_time(
    v: ArrayLike, q: ArrayLike, t_f: ArrayLike, c_max: ArrayLike, params: CostParams
) -> np.ndarray:
    """Running time with the queue-smoothed exponent, against C_max.

    This is the flow derivative of the optimization objective; at Q = 0 it
    coincides with the plain running time t_f * (1 + beta*(v/C_max)**n).
    """
    v = np.asarray(v, dtype=float)
    t_f = np.asarray(t_f, dtype=float)
    c_max = np.asarray(c_max, dtype=float)
    n_t = _smoothed_exponent(q, params)
    r = v / c_max
    with np.errstate(invalid="ignore"):
        pow_term = np.where((r == 0) & (n_t == 0), 1.0, r**n_t)
    return t_f * (1.0 + np.asarray(params.beta) * pow_term)


def queue_delay_marginal(
    q: ArrayLike, t_f: ArrayLike, c_max: ArrayLike, params: CostParams
) -> np.ndarray:
    """Queue derivative of the objective's queue term.

    t_f*(1+beta) is the congested-branch running time at v = C_max with the
    smoothed exponent flushed; alpha*(Q/C(Q))**m is the queuing delay.
    """
    q = np.asarray(q, dtype=float)
    t_f = np.asarray(t_f, dtype=float)
    return t_f * (1.0 + np.asarray(params.beta)) + np.asarray(params.alpha) * (
        q / capacity(q, c_max, params)
    ) ** np.asarray(params.m)


def _queue_integral(q: np.ndarray, c_max: np.ndarray, params: CostParams) -> np.ndarray:
    """integral_0^Q (y / (C_max - gamma*y))**m dy, per link.

    Closed forms for m = 1 and for gamma = 0; adaptive fixed-order
    Gauss-Legendre (panel doubling to 1e-8 relative) otherwise.
    """
    q = np.asarray(q, dtype=float)
    c_max, gamma, m = np.broadcast_arrays(
        np.asarray(c_max, dtype=float),
        np.asarray(params.gamma, dtype=float),
        np.asarray(params.m, dtype=float),
    )
    q = np.broadcast_to(q, c_max.shape).astype(float)
    out = np.zeros_like(q)

    flat = gamma == 0
    if np.any(flat):
        out[flat] = q[flat] ** (m[flat] + 1.0) / ((m[flat] + 1.0) * c_max[flat] ** m[flat])

    linear = (~flat) & (m == 1.0)
    if np.any(linear):
        g, c, qq = gamma[linear], c_max[linear], q[linear]
        with np.errstate(divide="ignore", invalid="ignore"):
            val = -qq / g - (c / g**2) * np.log1p(-g * qq / c)
        out[linear] = np.where(qq > 0, val, 0.0)

    general = (~flat) & (m != 1.0)
    for idx in np.flatnonzero(general):
        out.flat[idx] = _gl_integral(
            q.flat[idx], c_max.flat[idx], gamma.flat[idx], m.flat[idx]
        )
    return out


def _gl_integral(q: float, c_max: float, gamma: float, m: float) -> float:
    if q <= 0:
        return 0.0
    nodes, weights = np.polynomial.legendre.leggauss(32)
    prev = math.inf
    panels = 1
    while panels <= 256:
        edges = np.linspace(0.0, q, panels + 1)
        half = np.diff(edges) / 2.0
        mid = (edges[:-1] + edges[1:]) / 2.0
        y = mid[:, None] + half[:, None] * nodes[None, :]
        f = (y / (c_max - gamma * y)) ** m
        total = float(np.sum(half[:, None] * weights[None, :] * f))
        if abs(total - prev) <= 1e-8 * max(abs(total), 1.0):
            return total
        prev = total
        panels *= 2
    return prev


def objective(
    v: ArrayLike, q: ArrayLike, t_f: ArrayLike, c_max: ArrayLike, params: CostParams
) -> float:
    """Smoothed equilibrium potential, summed over links.

    Per link: the running-time primitive with the queue-smoothed exponent,
        t_f*v + t_f*beta*C_max*(v/C_max)**(n~+1) / (n~+1),
    plus the queue term
        t_f*(1+beta)*Q + alpha * integral_0^Q (y/C(y))**m dy.
    """
    v = np.asarray(v, dtype=float)
    q = np.asarray(q, dtype=float)
    t_f = np.asarray(t_f, dtype=float)
    c_max = np.asarray(c_max, dtype=float)
    if np.any(v < -1e-9) or np.any(q < -1e-9):
        raise ValueError("flows and queues must be >= 0")
    v = np.maximum(v, 0.0)
    q = np.maximum(q, 0.0)
    n_t = _smoothed_exponent(q, params)
    r = v / c_max
    with np.errstate(invalid="ignore"):
        pow_term = np.where((r == 0) & (n_t + 1.0 == 0), 1.0, r ** (n_t + 1.0))
    running = t_f * v + t_f * np.asarray(params.beta) * c_max * pow_term / (n_t + 1.0)
    queue = t_f * (1.0 + np.asarray(params.beta)) * q + np.asarray(
        params.alpha
    ) * _queue_integral(q, c_max, params)
    return float(np.sum(running + queue))


def _exponent_sensitivity(
    v: np.ndarray, q: np.ndarray, t_f: np.ndarray, c_max: np.ndarray, params: CostParams
) -> np.ndarray:
    """dF/dQ through the smoothed exponent n~(Q), per link.

    dF/dn~ = t_f*beta*C_max * r**(n~+1) * (ln r/(n~+1) - 1/(n~+1)**2),
    dn~/dQ = -n * ln(phi) * phi**(-Q); zero where v = 0 or phi = 1.
    """
    n_t = _smoothed_exponent(q, params)
    log_phi = np.log(np.asarray(params.phi, dtype=float))
    r = v / c_max
    with np.errstate(divide="ignore", invalid="ignore"):
        df_dn = (
            np.asarray(t_f)
            * np.asarray(params.beta)
            * c_max
            * r ** (n_t + 1.0)
            * (np.log(r) / (n_t + 1.0) - 1.0 / (n_t + 1.0) ** 2)
        )
    df_dn = np.where(r > 0, df_dn, 0.0)
    dn_dq = -np.asarray(params.n) * log_phi * np.exp(-q * log_phi)
    return df_dn * dn_dq


def objective_gradient(
    path_set: "PathSet",
    v: np.ndarray,
    q: np.ndarray,
    t_f: np.ndarray,
    c_max: np.ndarray,
    params: CostParams,
) -> tuple[np.ndarray, np.ndarray]:
    """Gradient of the objective in (path flows, per-path link queues).

    Returns (grad_f, grad_q) with grad_f of shape (n_paths,) and grad_q of
    shape (n_links, n_paths); grad_q is zero off the incidence pattern.

    A unit of path flow adds flow to every link of the path, so grad_f is
    the path sum of smoothed link times.  A unit of queue Q_ap removes a
    unit of flow from link a and from every link downstream of a on path p
    (held back traffic never reaches them), and adds the queue-term
    marginal plus the exponent-smoothing sensitivity on link a.
    """
    v = np.asarray(v, dtype=float)
    q = np.asarray(q, dtype=float)
    t_s = smoothed_link_time(v, q, t_f, c_max, params)
    grad_f = path_set.incidence.T @ t_s

    g_q = queue_delay_marginal(q, t_f, c_max, params) + _exponent_sensitivity(
        v, q, np.asarray(t_f, dtype=float), np.asarray(c_max, dtype=float), params
    )
    grad_q = np.zeros((path_set.n_links, path_set.n_paths))
    for j, idx in enumerate(path_set.path_link_idx):
        # suffix sums of smoothed times along the path: link a plus all
        # links after it lose the unit of flow held in the queue at a
        suffix = np.cumsum(t_s[idx][::-1])[::-1]
        grad_q[idx, j] = -suffix + g_q[idx]
    return grad_f, grad_q
