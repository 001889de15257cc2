"""Belief-sharing distributed online primal-dual algorithm (dopbc).

Every agent carries a full-dimensional belief of the joint decision plus a
multiplier estimate. Rounds are synchronous: mix beliefs and duals over the
graph, act on the own block of the mixed belief, take one projected
pseudo-gradient step on that block, and one projected ascent step on the
multipliers using the constraint values observed at the mixed belief.
"""

from dataclasses import dataclass

import numpy as np

from . import geometry
from ._backend import resolve_backend, run_dopbc_compiled
from .errors import ConnectivityError
from .netgraph import MixingMatrix
from .trace import RunTrace


@dataclass(frozen=True)
class AlgoParams:
    """Step-size exponent c, realized step alpha, and the dual cap."""

    c: float
    alpha: float
    lambda_max: float
    alpha_schedule: np.ndarray = None  # optional per-round steps; outside the
                                       # constant-step guarantees

    def __post_init__(self):
        if not 0.0 < self.c < 1.0:
            raise ValueError("c must lie in (0, 1)")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if self.lambda_max <= 0.0:
            raise ValueError("lambda_max must be positive")

    @classmethod
    def for_horizon(cls, T, c, lambda_max):
        return cls(c=c, alpha=float(T) ** (-c), lambda_max=lambda_max)

    def steps(self, T):
        if self.alpha_schedule is not None:
            sched = np.asarray(self.alpha_schedule, dtype=float)
            if sched.shape != (T,):
                raise ValueError("alpha_schedule length must equal the horizon")
            if np.any(sched <= 0):
                raise ValueError("alpha_schedule must be positive")
            return np.ascontiguousarray(sched)
        return np.full(T, self.alpha)


@dataclass
class AgentState:
    """One agent's belief of the joint decision and its multiplier estimate."""

    belief: np.ndarray
    dual: np.ndarray


@dataclass
class RoundOutput:
    executed_action: np.ndarray
    beliefs_hat: list
    duals_hat: list
    next_states: list
    consensus_error: float
    average_belief: np.ndarray
    average_dual: np.ndarray
    dual_clip_count: int
    mean_g_at_beliefs: np.ndarray


def _w_array(w):
    return w.w if isinstance(w, MixingMatrix) else np.asarray(w, dtype=float)


def consensus_step(states, w):
    """Mix beliefs and duals with the weight matrix; preserves network averages."""
    w = _w_array(w)
    n = len(states)
    if w.shape != (n, n):
        raise ValueError(f"weight matrix {w.shape} does not match {n} agents")
    beliefs = np.stack([s.belief for s in states])
    duals = np.stack([s.dual for s in states])
    bh = w @ beliefs
    dh = w @ duals
    return [bh[i] for i in range(n)], [dh[i] for i in range(n)]


def pseudo_gradient(p, t, i, x_hat, lambda_hat):
    """Own-block partial gradient of the round-t Lagrangian at the mixed belief."""
    lambda_hat = np.asarray(lambda_hat, dtype=float)
    if np.any(lambda_hat < 0):
        raise ValueError("dual estimate must be nonnegative")
    full = p.cost_grad(t, x_hat) + p.constraint_jac(t, x_hat).T @ lambda_hat
    return full[p.product_set.block_slice(i)]


def primal_update(pset, i, x_hat, d_i, alpha):
    """Projected step on block i only; all other blocks are kept as mixed."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    out = np.array(x_hat, dtype=float)
    sl = pset.block_slice(i)
    out[sl] = pset.blocks[i].project(out[sl] - alpha * np.asarray(d_i, dtype=float))
    return out

def dual_update(p, t, lambda_hat, x_hat, alpha, lambda_max, g_value=None):
    """Projected ascent on the multipliers using g_t at the mixed belief.

    Returns (new_dual, upper_clip_mask); the mask flags coordinates that hit
    the cap, which the telescoping diagnostic skips.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    g = p.constraint(t, x_hat) if g_value is None else g_value
    raw = np.asarray(lambda_hat, dtype=float) + alpha * g
    clipped_hi = raw > lambda_max
    return np.clip(raw, 0.0, lambda_max), clipped_hi


def run_round(p, t, states, w, params):
    """One synchronous round against a frozen snapshot of all agent states."""
    n = len(states)
    pset = p.product_set
    beliefs = np.stack([s.belief for s in states])
    xbar = beliefs.mean(axis=0)
    delta = float(np.sqrt(np.sum((beliefs - xbar) ** 2)))
    lbar = np.stack([s.dual for s in states]).mean(axis=0)

    bh, dh = consensus_step(states, w)
    alpha = params.steps(p.T)[t - 1] if params.alpha_schedule is not None else params.alpha

    action = np.empty(pset.dim)
    next_states = []
    clip_count = 0
    mean_g = np.zeros(p.m)
    for i in range(n):
        action[pset.block_slice(i)] = geometry.project_block(pset, i, bh[i])
        g_i = p.constraint(t, bh[i])
        mean_g += g_i / n
        d_i = pseudo_gradient(p, t, i, bh[i], dh[i])
        belief_next = primal_update(pset, i, bh[i], d_i, alpha)
        dual_next, hi = dual_update(p, t, dh[i], bh[i], alpha, params.lambda_max,
                                    g_value=g_i)
        clip_count += int(np.sum(hi))
        next_states.append(AgentState(belief_next, dual_next))
    return RoundOutput(
        executed_action=action,
        beliefs_hat=bh,
        duals_hat=dh,
        next_states=next_states,
        consensus_error=delta,
        average_belief=xbar,
        average_dual=lbar,
        dual_clip_count=clip_count,
        mean_g_at_beliefs=mean_g,
    )


def initial_states(p, n, init=None):
    """Default: all agents share the projection of the origin onto the joint
    set (zero consensus error); ("random", seed) draws one belief per agent."""
    pset = p.product_set
    zero_dual = np.zeros(p.m)
    if init is None or init == "zero" or init == ("zero", None):
        common = pset.project(np.zeros(pset.dim))
        return [AgentState(common.copy(), zero_dual.copy()) for _ in range(n)]
    kind, seed = init
    if kind != "random":
        raise ValueError(f"unknown init spec: {init!r}")
    rng = np.random.default_rng(np.random.SeedSequence([0x1A17, int(seed)]))
    return [AgentState(pset.sample(rng), zero_dual.copy()) for _ in range(n)]


def _python_run(p, w_arr, params, X, L, alphas):
    n, d = X.shape
    m = L.shape[1]
    T = p.T
    pset = p.product_set
    cost_a = np.empty(T)
    g_a = np.empty((T, m))
    cost_avg = np.empty(T)
    g_avg = np.empty((T, m))
    delta = np.empty(T + 1)
    lam_bar = np.empty((T + 1, m))
    mean_g = np.empty((T, m))
    clips = np.zeros(T, dtype=np.int64)
    actions = np.empty((T, d))

    slices = [pset.block_slice(i) for i in range(n)]
    for tt in range(T):
        t = tt + 1
        alpha = alphas[tt]
        xbar = X.mean(axis=0)
        delta[tt] = np.sqrt(np.sum((X - xbar) ** 2))
        lam_bar[tt] = L.mean(axis=0)

        Xh = w_arr @ X
        Lh = w_arr @ L

        a = np.empty(d)
        for i in range(n):
            a[slices[i]] = pset.blocks[i].project(Xh[i, slices[i]])
        actions[tt] = a
        cost_a[tt] = p.cost(t, a)
        g_a[tt] = p.constraint(t, a)
        cost_avg[tt] = p.cost(t, xbar)
        g_avg[tt] = p.constraint(t, xbar)

        acc_g = np.zeros(m)
        newX = np.empty_like(X)
        newL = np.empty_like(L)
        for i in range(n):
            g_i = p.constraint(t, Xh[i])
            acc_g += g_i
            d_i = pseudo_gradient(p, t, i, Xh[i], Lh[i])
            newX[i] = primal_update(pset, i, Xh[i], d_i, alpha)
            dual_next, hi = dual_update(p, t, Lh[i], Xh[i], alpha,
                                        params.lambda_max, g_value=g_i)
            newL[i] = dual_next
            clips[tt] += int(np.sum(hi))
        mean_g[tt] = acc_g / n
        X, L = newX, newL

    xbar = X.mean(axis=0)
    delta[T] = np.sqrt(np.sum((X - xbar) ** 2))
    lam_bar[T] = L.mean(axis=0)
    return cost_a, g_a, cost_avg, g_avg, delta, lam_bar, mean_g, clips, actions


def run(p, mixing, params, init=None, backend="auto"):
    """Run the belief-sharing primal-dual algorithm for the full horizon.

    `mixing` is a MixingMatrix built from a connected graph. Duals start at
    zero; beliefs per `init` (common projected origin by default). The
    compiled round loop is used when available and the problem exposes raw
    quadratic parameters, otherwise the numpy loop runs.
    """
    if not isinstance(mixing, MixingMatrix):
        raise TypeError("run() expects a MixingMatrix (see netgraph.build_mixing)")
    if not mixing.sigma < 1.0:
        raise ConnectivityError("mixing matrix has sigma >= 1 (disconnected graph?)")
    w_arr = np.ascontiguousarray(mixing.w)
    n = mixing.n
    T = p.T
    states = initial_states(p, n, init)
    X = np.ascontiguousarray(np.stack([s.belief for s in states]))
    L = np.ascontiguousarray(np.stack([s.dual for s in states]))
    alphas = params.steps(T)

    spec = p.kernel_spec()
    chosen = resolve_backend(backend, spec is not None)
    if chosen == "compiled":
        out = run_dopbc_compiled(p, spec, w_arr, X, L, alphas, params.lambda_max)
    else:
        out = _python_run(p, w_arr, params, X, L, alphas)
    cost_a, g_a, cost_avg, g_avg, delta, lam_bar, mean_g, clips, actions = out

    meta = {
        "algo": "dopbc",
        "backend": chosen,
        "primary_sequence": "action",
        "T": T,
        "n": n,
        "m": p.m,
        "d": p.d,
        "c": params.c,
        "alpha": params.alpha,
        "lambda_max": params.lambda_max,
        "sigma": mixing.sigma,
        "G_f": p.G_f,
        "G_g": p.G_g,
        "L_g": p.L_g,
        "D": p.D,
    }
    return RunTrace(
        cost_action=cost_a, g_action=g_a, cost_avg=cost_avg, g_avg=g_avg,
        delta_x=delta, lambda_bar=lam_bar, mean_g_at_beliefs=mean_g,
        dual_clips=clips, actions=actions, alphas=alphas, meta=meta,
    )
