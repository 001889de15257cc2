"""Regret, cumulative constraint violation, growth-exponent fits, and the
per-round inequality diagnostics used by the acceptance suite."""

from dataclasses import dataclass

import numpy as np

from .trace import RunTrace  # noqa: F401  (re-exported: traces feed every metric)


def _series(trace, sequence):
    if sequence == "action":
        return trace.cost_action, trace.g_action
    if sequence == "average":
        return trace.cost_avg, trace.g_avg
    raise ValueError(f"unknown sequence: {sequence!r} (use 'action' or 'average')")


def static_regret(trace, comparator, p, sequence="action"):
    """Cumulative cost minus the best fixed feasible action's cumulative cost.

    May come out negative for a suboptimal comparator; reported as-is.
    """
    if comparator.feasibility_margin > 1e-6:
        raise ValueError("comparator is not certified feasible (margin > 1e-6)")
    if trace.horizon != p.T:
        raise ValueError("trace and problem horizons differ")
    costs, _ = _series(trace, sequence)
    return float(np.sum(costs) - comparator.objective_value)


def ccv(trace, k, sequence="action"):
    """Sum over rounds of the positive part of constraint component k.

    Accumulates sequentially so the value is exactly the last entry of
    ccv_prefix and matches a round-by-round recomputation bit for bit.
    """
    _, g = _series(trace, sequence)
    if not 0 <= k < g.shape[1]:
        raise IndexError(f"constraint index {k} out of range [0, {g.shape[1]})")
    return float(np.cumsum(np.maximum(g[:, k], 0.0))[-1])


def ccv_prefix(trace, k, sequence="action"):
    """Running cumulative violation; monotone nondecreasing by construction."""
    _, g = _series(trace, sequence)
    return np.cumsum(np.maximum(g[:, k], 0.0))


@dataclass
class SlopeFit:
    """Least-squares line through (log T, log metric) points."""

    exponent: float
    intercept: float
    r_squared: float
    points: tuple
    degenerate: bool = False


def fit_growth_exponent(pairs):
    """OLS fit of log(metric) against log(T) over a horizon grid.

    Requires at least 4 horizons. Nonpositive metric values make the fit
    degenerate: exponent 0 with the degenerate flag set.
    """
    pairs = [(int(T), float(v)) for T, v in pairs]
    if len(pairs) < 4:
        raise ValueError(f"need at least 4 horizons for a slope fit, got {len(pairs)}")
    if any(v <= 0.0 for _, v in pairs):
        return SlopeFit(0.0, 0.0, 0.0, (), degenerate=True)
    x = np.log([T for T, _ in pairs])
    y = np.log([v for _, v in pairs])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return SlopeFit(float(slope), float(intercept), float(r2),
                    tuple(zip(x.tolist(), y.tolist())))


def declared_gd(trace):
    """Pseudo-gradient norm bound from the declared problem constants."""
    meta = trace.meta
    return meta["G_f"] + meta["lambda_max"] * meta["G_g"]


def consensus_error_sum(trace):
    """(measured sum of consensus errors, theoretical ceiling).

    The ceiling sqrt(N) * G_d / (1 - sigma) * sum_t alpha_t uses only declared
    constants; for the constant step alpha = T^-c the step sum is T^(1-c).
    """
    T = trace.horizon
    measured = float(np.sum(trace.delta_x[:T]))
    meta = trace.meta
    ceiling = (np.sqrt(meta["n"]) * declared_gd(trace) / (1.0 - meta["sigma"])
               * float(np.sum(trace.alphas)))
    return measured, float(ceiling)


@dataclass
class RecursionCheck:
    violations: int
    max_excess: float
    rounds: int


def consensus_recursion_check(trace, tol=1e-9):
    """Per-round contraction of the squared consensus error.

    Checks delta_{t+1}^2 <= (1+beta) sigma^2 delta_t^2 + (1+1/beta) alpha_t^2
    N G_d^2 with beta = (1-sigma)/(1+sigma) on every round, using declared
    constants.
    """
    meta = trace.meta
    sigma = meta["sigma"]
    beta = (1.0 - sigma) / (1.0 + sigma)
    gd = declared_gd(trace)
    T = trace.horizon
    d2 = trace.delta_x ** 2
    bound = (1.0 + beta) * sigma ** 2 * d2[:T] + (1.0 + 1.0 / beta) * trace.alphas ** 2 * meta["n"] * gd ** 2
    excess = d2[1:T + 1] - bound
    return RecursionCheck(int(np.sum(excess > tol)), float(np.max(excess)), T)


@dataclass
class TelescopingCheck:
    rounds_checked: int
    violations: int
    min_slack: float
    unclipped_fraction: float


def dual_telescoping_check(trace, tol=1e-12):
    """Average-dual growth against the integrated constraint signal.

    On rounds without an upper dual clip, lambda_bar_{t+1} must exceed
    lambda_bar_t + alpha_t * mean_i g_t(belief_i) up to tolerance; lower clips
    only help since clamping at zero raises the average.
    """
    T = trace.horizon
    unclipped = trace.dual_clips == 0
    slack = (trace.lambda_bar[1:T + 1] - trace.lambda_bar[:T]
             - trace.alphas[:, None] * trace.mean_g_at_beliefs)
    checked = slack[unclipped]
    violations = int(np.sum(checked < -tol))
    min_slack = float(np.min(checked)) if checked.size else float("inf")
    return TelescopingCheck(int(np.sum(unclipped)), violations, min_slack,
                            float(np.mean(unclipped)))
