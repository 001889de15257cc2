"""Experiment execution: per-horizon runs, CSV artifacts, and slope fits.

Each horizon is an independent job (the step size depends on the horizon), so
sweeps parallelize across horizons. Per-horizon randomness (only the optional
random initialization uses any) is seeded from (master_seed, T) so worker
scheduling cannot change results.
"""

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import baseline, dopbc, metrics, netgraph, problems
from .errors import ConfigError

WORKERS_ENV = "DOCOSIM_WORKERS"


def build_network(cfg):
    graph = netgraph.build_graph(cfg.topology_kind, cfg.topology_n,
                                 radius=cfg.topology_radius, seed=cfg.topology_seed)
    mixing = netgraph.build_mixing(graph, cfg.mixing_scheme)
    return graph, mixing


def build_problem(cfg, T):
    if cfg.problem_kind == "coupled-quadratic":
        return problems.make_coupled_quadratic(
            cfg.topology_n, cfg.problem_d_i, cfg.problem_m, T, cfg.problem_seed,
            drift=cfg.problem_drift, constraint_drift=cfg.problem_constraint_drift)
    return problems.make_separable_quadratic(
        cfg.topology_n, cfg.problem_d_i, T, cfg.problem_seed,
        drift=cfg.problem_drift, rho=cfg.problem_rho)


def horizon_seed(master_seed, T):
    """Stable per-horizon seed; independent of execution order."""
    return int(np.random.SeedSequence([int(master_seed), int(T)]).generate_state(1)[0])


@dataclass
class HorizonResult:
    T: int
    alpha: float
    sigma: float
    regret_action: float
    regret_average: float
    ccv_action: np.ndarray     # (m,)
    ccv_average: np.ndarray    # (m,)
    delta_sum: float
    runtime_ms: float
    trace: object = None
    comparator: object = None


def run_one_horizon(cfg, T, algo_kind=None, keep_trace=False, comparator=None):
    """Build the instance for horizon T, run the configured algorithm, and
    compute summary metrics against a certified comparator."""
    start = time.perf_counter()
    graph, mixing = build_network(cfg)
    p = build_problem(cfg, T)
    params = dopbc.AlgoParams.for_horizon(T, cfg.algo_c, cfg.algo_lambda_max)
    algo = algo_kind or cfg.algo_kind
    if algo == "dopbc":
        trace = dopbc.run(p, mixing, params, backend=cfg.runtime_backend)
    elif algo == "baseline-dspd":
        trace = baseline.run_baseline(p, mixing, graph, params,
                                      backend=cfg.runtime_backend)
    else:
        raise ConfigError(f"unknown algorithm {algo!r}", field="algo.kind")
    if comparator is None:
        comparator = problems.hindsight_comparator(p, cfg.comparator_method)
    m = p.m
    res = HorizonResult(
        T=T,
        alpha=params.alpha,
        sigma=mixing.sigma,
        regret_action=metrics.static_regret(trace, comparator, p, "action"),
        regret_average=metrics.static_regret(trace, comparator, p, "average"),
        ccv_action=np.array([metrics.ccv(trace, k, "action") for k in range(m)]),
        ccv_average=np.array([metrics.ccv(trace, k, "average") for k in range(m)]),
        delta_sum=float(np.sum(trace.delta_x[:T])),
        runtime_ms=(time.perf_counter() - start) * 1e3,
        trace=trace if keep_trace else None,
        comparator=comparator,
    )
    return res, p


# CSV artifacts ----------------------------------------------------------------

def _fmt(x):
    return format(float(x), ".17g")


def trace_header(m):
    cols = ["t", "cost_inst", "cum_regret_a", "cum_regret_xbar"]
    cols += [f"ccv_{k + 1}" for k in range(m)]
    cols += ["delta_x"]
    cols += [f"lambda_bar_{k + 1}" for k in range(m)]
    cols += ["dual_clips"]
    return cols


def summary_header(m):
    return (["T", "alpha", "sigma", "regret_a", "regret_xbar"]
            + [f"ccv_{k + 1}" for k in range(m)] + ["delta_sum", "runtime_ms"])


SLOPES_HEADER = ["metric", "exponent", "intercept", "r_squared", "n_points", "degenerate"]


def write_trace_csv(path, trace, comparator, p):
    T, m = trace.horizon, trace.m
    comp_costs = p.cost_series(comparator.x_star)
    cum_a = np.cumsum(trace.cost_action) - np.cumsum(comp_costs)
    cum_avg = np.cumsum(trace.cost_avg) - np.cumsum(comp_costs)
    ccv_cols = [metrics.ccv_prefix(trace, k, "action") for k in range(m)]
    with open(path, "w") as f:
        f.write(",".join(trace_header(m)) + "\n")
        for tt in range(T):
            row = [str(tt + 1), _fmt(trace.cost_action[tt]), _fmt(cum_a[tt]),
                   _fmt(cum_avg[tt])]
            row += [_fmt(col[tt]) for col in ccv_cols]
            row += [_fmt(trace.delta_x[tt])]
            row += [_fmt(trace.lambda_bar[tt, k]) for k in range(m)]
            row += [str(int(trace.dual_clips[tt]))]
            f.write(",".join(row) + "\n")


def write_summary_csv(path, rows, m):
    with open(path, "w") as f:
        f.write(",".join(summary_header(m)) + "\n")
        for r in rows:
            vals = [str(r.T), _fmt(r.alpha), _fmt(r.sigma), _fmt(r.regret_action),
                    _fmt(r.regret_average)]
            vals += [_fmt(v) for v in r.ccv_action]
            vals += [_fmt(r.delta_sum), _fmt(r.runtime_ms)]
            f.write(",".join(vals) + "\n")


def slope_fits(rows, m):
    """Growth-exponent fits per metric over the horizon grid."""
    fits = {}
    if len(rows) < 4:
        return fits
    Ts = [r.T for r in rows]
    fits["regret_a"] = metrics.fit_growth_exponent(zip(Ts, [r.regret_action for r in rows]))
    fits["regret_xbar"] = metrics.fit_growth_exponent(zip(Ts, [r.regret_average for r in rows]))
    for k in range(m):
        fits[f"ccv_a_{k + 1}"] = metrics.fit_growth_exponent(
            zip(Ts, [r.ccv_action[k] for r in rows]))
        fits[f"ccv_xbar_{k + 1}"] = metrics.fit_growth_exponent(
            zip(Ts, [r.ccv_average[k] for r in rows]))
    return fits


def write_slopes_csv(path, fits):
    with open(path, "w") as f:
        f.write(",".join(SLOPES_HEADER) + "\n")
        for name, fit in fits.items():
            f.write(",".join([name, _fmt(fit.exponent), _fmt(fit.intercept),
                              _fmt(fit.r_squared), str(len(fit.points)),
                              str(int(fit.degenerate))]) + "\n")


# experiment drivers -----------------------------------------------------------

def _horizon_job(args):
    cfg, T, out_dir = args
    res, p = run_one_horizon(cfg, T, keep_trace=True)
    if out_dir is not None:
        write_trace_csv(os.path.join(out_dir, f"trace_T{T}.csv"),
                        res.trace, res.comparator, p)
    res.trace = None  # traces are large; files carry the per-round record
    res.comparator = None
    return res


@dataclass
class ExperimentResult:
    out_dir: str
    rows: list
    fits: dict
    trace_paths: list
    summary_path: str
    slopes_path: str


def default_workers(n_jobs):
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, min(n_jobs, os.cpu_count() or 1))


def run_experiment(cfg, out_dir=None, workers=None):
    """Run every configured horizon and write trace/summary/slopes CSVs."""
    out_dir = out_dir or cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    jobs = [(cfg, T, out_dir) for T in cfg.horizons]
    workers = workers if workers is not None else default_workers(len(jobs))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_horizon_job, jobs))
    else:
        rows = [_horizon_job(j) for j in jobs]
    rows.sort(key=lambda r: r.T)
    m = len(rows[0].ccv_action)
    summary_path = os.path.join(out_dir, "summary.csv")
    write_summary_csv(summary_path, rows, m)
    fits = slope_fits(rows, m)
    slopes_path = os.path.join(out_dir, "slopes.csv")
    write_slopes_csv(slopes_path, fits)
    return ExperimentResult(
        out_dir=out_dir,
        rows=rows,
        fits=fits,
        trace_paths=[os.path.join(out_dir, f"trace_T{T}.csv") for T in cfg.horizons],
        summary_path=summary_path,
        slopes_path=slopes_path,
    )


def sweep_rows(cfg, algo_kind=None, keep_traces=False, comparators=None):
    """In-memory sweep over the horizon grid; returns HorizonResult list.

    `comparators` may map T -> Comparator to reuse hindsight solutions across
    sweeps on the same instance.
    """
    rows = []
    for T in cfg.horizons:
        comp = comparators.get(T) if comparators else None
        res, p = run_one_horizon(cfg, T, algo_kind=algo_kind,
                                 keep_trace=keep_traces, comparator=comp)
        if comparators is not None:
            comparators[T] = res.comparator
        rows.append(res)
    return rows


def compare_algorithms(cfg):
    """Run dopbc and the decision-sharing baseline on the same separable
    instance and fit both growth exponents."""
    if cfg.problem_kind != "separable-quadratic":
        raise ConfigError("compare requires a separable problem", field="problem.kind")
    comparators = {}
    out = {}
    for algo in ("dopbc", "baseline-dspd"):
        rows = sweep_rows(cfg, algo_kind=algo, comparators=comparators)
        out[algo] = {"rows": rows, "fits": slope_fits(rows, 1)}
    return out


def run_checks(cfg):
    """Gradient validation, convexity probes, bound audit, mixing invariants,
    and oracle-determinism checks on the configured instance."""
    results = []
    T = cfg.horizons[0]
    graph, mixing = build_network(cfg)
    p = build_problem(cfg, T)

    rep = problems.validate_gradients(p, samples=100, tol=1e-6, seed=cfg.master_seed)
    results.append(("gradient-validation", rep.passed,
                    f"max_rel_err={rep.max_rel_error:.3e} tol={rep.tol:g}"))

    worst = problems.convexity_probe(p, trials=200, seed=cfg.master_seed)
    results.append(("convexity-probe", worst <= 1e-9, f"max_chord_gap={worst:.3e}"))

    audit = problems.bound_audit(p, samples=200, seed=cfg.master_seed)
    results.append(("declared-bounds", audit["ok"],
                    f"max|grad f|={audit['max_cost_grad']:.4g} G_f={audit['G_f']:.4g} "
                    f"max|jac|_F={audit['max_jac_fro']:.4g} G_g={audit['G_g']:.4g}"))

    try:
        netgraph.validate_mixing(mixing, graph)
        results.append(("mixing-invariants", True, f"sigma={mixing.sigma:.6g}"))
    except ValueError as e:
        results.append(("mixing-invariants", False, str(e)))

    p2 = build_problem(cfg, T)
    rng = np.random.default_rng(cfg.master_seed)
    same = True
    for _ in range(20):
        t = int(rng.integers(1, T + 1))
        x = p.product_set.sample(rng)
        same &= p.cost(t, x) == p2.cost(t, x)
        same &= bool(np.all(p.constraint(t, x) == p2.constraint(t, x)))
    results.append(("oracle-determinism", same, "bit-identical rebuild" if same else "mismatch"))

    if p.separable:
        rng = np.random.default_rng(cfg.master_seed + 1)
        ok = True
        for _ in range(100):
            t = int(rng.integers(1, T + 1))
            x = p.product_set.sample(rng)
            total = sum(p.local_cost(i, t, p.product_set.extract(i, x))
                        for i in range(cfg.topology_n))
            ok &= abs(total - p.cost(t, x)) <= 1e-12 * max(1.0, abs(total))
            gsum = sum(p.local_constraint(i, t, p.product_set.extract(i, x))[0]
                       for i in range(cfg.topology_n))
            ok &= abs(gsum - p.constraint(t, x)[0]) <= 1e-12
        results.append(("separable-consistency", ok,
                        "joint oracle equals sum of sub-oracles" if ok else "mismatch"))
    return results
