"""Decision-sharing consensus primal-dual baseline for separable problems.

Each agent keeps only its own decision block and a multiplier estimate.
Multipliers are mixed over the graph; the ascent step scales the local
constraint share by the agent count so the stationary multiplier tracks the
joint constraint. Decisions of neighbors are cached in an assembled copy of
the joint vector for disagreement diagnostics only. This realizes the
decision-sharing scheme whose disagreement is driven by the violation-
proportional multipliers, the structural weakness the belief-sharing
algorithm removes.
"""

from dataclasses import dataclass

import numpy as np

from ._backend import resolve_backend, run_baseline_compiled
from .errors import CapabilityError, ConnectivityError
from .netgraph import MixingMatrix
from .trace import RunTrace


@dataclass
class LocalState:
    decision: np.ndarray       # own block, in X_i
    dual: np.ndarray           # (m,) in [0, lambda_max]
    neighbor_copy: np.ndarray  # assembled joint vector, diagnostics only


def _neighbor_csr(graph):
    ptr = [0]
    idx = []
    for i in range(graph.n):
        nb = graph.neighbors(i)
        idx.extend(nb)
        ptr.append(len(idx))
    return np.asarray(ptr, dtype=np.int64), np.asarray(idx, dtype=np.int64)


def _python_baseline(p, w_arr, graph, alphas, lambda_max, x, L, Z):
    n = graph.n
    d = x.shape[0]
    T = p.T
    pset = p.product_set
    slices = [pset.block_slice(i) for i in range(n)]
    neighbors = [graph.neighbors(i) for i in range(n)]

    cost_a = np.empty(T)
    g_a = np.empty((T, 1))
    cost_avg = np.empty(T)
    g_avg = np.empty((T, 1))
    delta = np.empty(T + 1)
    lam_bar = np.empty((T + 1, 1))
    clips = np.zeros(T, dtype=np.int64)
    actions = np.empty((T, d))
    viol_sum = np.empty(T)

    def exchange():
        for i in range(n):
            Z[i, slices[i]] = x[slices[i]]
            for j in neighbors[i]:
                Z[i, slices[j]] = x[slices[j]]

    for tt in range(T):
        t = tt + 1
        alpha = alphas[tt]
        exchange()
        zbar = Z.mean(axis=0)
        delta[tt] = np.sqrt(np.sum((Z - zbar) ** 2))
        lam_bar[tt] = L.mean(axis=0)

        Lh = w_arr @ L

        actions[tt] = x
        cost_a[tt] = p.cost(t, x)
        g_a[tt] = p.constraint(t, x)
        cost_avg[tt] = p.cost(t, zbar)
        g_avg[tt] = p.constraint(t, zbar)

        vs = 0.0
        xnew = np.empty_like(x)
        for i in range(n):
            xi = x[slices[i]]
            gloc = p.local_constraint(i, t, xi)
            vs += float(np.sum(np.maximum(gloc, 0.0)))
            d_i = (p.local_cost_grad(i, t, xi)
                   + p.local_constraint_jac(i, t, xi).T @ Lh[i])
            xnew[slices[i]] = pset.blocks[i].project(xi - alpha * d_i)
            # Leaky ascent: the stationary multiplier tracks the N-scaled
            # local violation instead of integrating it away.
            pre = Lh[i] + alpha * (n * gloc - Lh[i])
            clips[tt] += int(np.sum(pre > lambda_max))
            L[i] = np.clip(pre, 0.0, lambda_max)
        x[:] = xnew
        viol_sum[tt] = vs

    exchange()
    zbar = Z.mean(axis=0)
    delta[T] = np.sqrt(np.sum((Z - zbar) ** 2))
    lam_bar[T] = L.mean(axis=0)
    return cost_a, g_a, cost_avg, g_avg, delta, lam_bar, clips, actions, viol_sum


def run_baseline(p, mixing, graph, params, backend="auto"):
    """Run the decision-sharing baseline; requires per-agent sub-oracles."""
    if not p.separable:
        raise CapabilityError(
            "decision-sharing baseline needs a separable problem with per-agent "
            "sub-oracles; nonseparable instances cannot be decomposed"
        )
    if not isinstance(mixing, MixingMatrix):
        raise TypeError("run_baseline() expects a MixingMatrix")
    if not mixing.sigma < 1.0:
        raise ConnectivityError("mixing matrix has sigma >= 1 (disconnected graph?)")
    if p.m != 1:
        raise CapabilityError("baseline currently supports a single coupled constraint")
    n = mixing.n
    T = p.T
    w_arr = np.ascontiguousarray(mixing.w)
    pset = p.product_set
    alphas = params.steps(T)

    x = np.ascontiguousarray(pset.project(np.zeros(pset.dim)))
    L = np.zeros((n, 1))
    Z = np.tile(x, (n, 1))
    ptr, idx = _neighbor_csr(graph)

    spec = getattr(p, "baseline_kernel_spec", lambda: None)()
    chosen = resolve_backend(backend, spec is not None)
    if chosen == "compiled":
        out = run_baseline_compiled(p, spec, w_arr, x, L, Z, ptr, idx,
                                    alphas, params.lambda_max)
    else:
        out = _python_baseline(p, w_arr, graph, alphas, params.lambda_max, x, L, Z)
    cost_a, g_a, cost_avg, g_avg, delta, lam_bar, clips, actions, viol_sum = out

    mean_g = g_a.copy()  # the sum of local shares equals the joint constraint
    meta = {
        "algo": "baseline-dspd",
        "backend": chosen,
        "primary_sequence": "action",
        "T": T, "n": n, "m": p.m, "d": p.d,
        "c": params.c, "alpha": params.alpha, "lambda_max": params.lambda_max,
        "sigma": mixing.sigma,
        "G_f": p.G_f, "G_g": p.G_g, "L_g": p.L_g, "D": p.D,
    }
    return RunTrace(
        cost_action=cost_a, g_action=g_a, cost_avg=cost_avg, g_avg=g_avg,
        delta_x=delta, lambda_bar=lam_bar, mean_g_at_beliefs=mean_g,
        dual_clips=clips, actions=actions, alphas=alphas, meta=meta,
        local_violation_sum=viol_sum,
    )


@dataclass
class CouplingReport:
    """Disagreement vs violation coupling summary for a baseline run.

    lhs is the cumulative decision disagreement, s_alpha the step-size sum,
    s_violation the step-weighted sum of positive local constraint parts.
    ratio_full = lhs / (s_alpha + s_violation); window_ratios holds the same
    ratio over the two halves of the run; cv is their coefficient of
    variation (stable ratios evidence the coupling bound's shape).
    """

    lhs: float
    s_alpha: float
    s_violation: float
    ratio_full: float
    window_ratios: tuple
    cv: float


def coupling_diagnostic(trace):
    """Disagreement/violation coupling accumulators for a baseline trace."""
    if trace.local_violation_sum is None:
        raise ValueError("coupling diagnostic needs a trace from run_baseline")
    T = trace.horizon
    disagreement = trace.delta_x[:T]
    alphas = trace.alphas
    lhs = float(np.sum(disagreement))
    s_alpha = float(np.sum(alphas))
    s_v = float(np.sum(alphas * trace.local_violation_sum))

    def _ratio(sel):
        denom = float(np.sum(alphas[sel]) + np.sum(alphas[sel] * trace.local_violation_sum[sel]))
        num = float(np.sum(disagreement[sel]))
        return num / denom if denom > 0 else float("nan")

    half = T // 2
    windows = (_ratio(slice(0, half)), _ratio(slice(half, T))) if half else (float("nan"),) * 2
    arr = np.array([w for w in windows if np.isfinite(w)])
    cv = float(np.std(arr) / np.mean(arr)) if arr.size and np.mean(arr) > 0 else float("nan")
    ratio_full = lhs / (s_alpha + s_v) if (s_alpha + s_v) > 0 else float("nan")
    return CouplingReport(lhs, s_alpha, s_v, ratio_full, windows, cv)
