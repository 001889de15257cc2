"""Selection between the compiled round loop and the numpy fallback.

The extension is built at install time; importing it can still fail (pure
source checkout, missing compiler), in which case every run transparently
uses the numpy loop. An explicit backend="compiled" request fails loudly
instead of silently degrading.
"""

import numpy as np

try:
    from . import _kernel
    HAS_COMPILED = True
except ImportError:  # pragma: no cover - depends on the install
    _kernel = None
    HAS_COMPILED = False


def resolve_backend(requested, kernel_capable):
    if requested == "auto":
        return "compiled" if (HAS_COMPILED and kernel_capable) else "python"
    if requested == "python":
        return "python"
    if requested == "compiled":
        if not HAS_COMPILED:
            raise RuntimeError("compiled kernel unavailable (extension not built)")
        if not kernel_capable:
            raise RuntimeError("problem exposes no raw parameters for the compiled path")
        return "compiled"
    raise ValueError(f"unknown backend: {requested!r}")


def run_dopbc_compiled(p, spec, w, X, L, alphas, lambda_max):
    from .geometry import kernel_set_arrays

    kinds, offs, lo, hi, cen, rad = kernel_set_arrays(p.product_set)
    T = alphas.shape[0]
    n, d = X.shape
    m = L.shape[1]
    cost_a = np.empty(T)
    g_a = np.empty((T, m))
    cost_avg = np.empty(T)
    g_avg = np.empty((T, m))
    delta = np.empty(T + 1)
    lam_bar = np.empty((T + 1, m))
    mean_g = np.empty((T, m))
    clips = np.zeros(T, dtype=np.int64)
    actions = np.empty((T, d))
    _kernel.run_dopbc_quadratic(
        w, X, L,
        spec["A"], spec["b0"], spec["bamp"], spec["jb"],
        spec["Q"], spec["q0"], spec["qamp"], spec["jq"],
        spec["rho0"], spec["rhoamp"], spec["jr"], spec["sin_table"],
        kinds, offs, lo, hi, cen, rad,
        alphas, lambda_max,
        cost_a, g_a, cost_avg, g_avg, delta, lam_bar, mean_g, clips, actions,
    )
    return cost_a, g_a, cost_avg, g_avg, delta, lam_bar, mean_g, clips, actions


def run_baseline_compiled(p, spec, w, x0, L, Z, nbr_ptr, nbr_idx, alphas, lambda_max):
    from .geometry import kernel_set_arrays

    kinds, offs, lo, hi, cen, rad = kernel_set_arrays(p.product_set)
    T = alphas.shape[0]
    d = x0.shape[0]
    cost_a = np.empty(T)
    g_a = np.empty((T, 1))
    cost_avg = np.empty(T)
    g_avg = np.empty((T, 1))
    delta = np.empty(T + 1)
    lam_bar = np.empty((T + 1, 1))
    clips = np.zeros(T, dtype=np.int64)
    actions = np.empty((T, d))
    viol_sum = np.empty(T)
    _kernel.run_baseline_separable(
        w, x0, L, Z,
        spec["b0"], spec["bamp"], spec["jb"], spec["rho"], spec["sin_table"],
        kinds, offs, lo, hi, cen, rad,
        nbr_ptr, nbr_idx,
        alphas, lambda_max,
        cost_a, g_a, cost_avg, g_avg, delta, lam_bar, clips, actions, viol_sum,
    )
    return cost_a, g_a, cost_avg, g_avg, delta, lam_bar, clips, actions, viol_sum
