import numpy as np
import pytest

import docosim._backend as backend_mod
from docosim import AlgoParams, build_graph, build_mixing, coupling_diagnostic, \
    run_baseline
from docosim.errors import CapabilityError
from docosim.problems import make_coupled_quadratic, make_separable_quadratic


def setup_network(n=4, kind="ring"):
    g = build_graph(kind, n)
    return g, build_mixing(g)


def params_for(T, c=0.5, lam=5.0):
    return AlgoParams.for_horizon(T, c, lam)


class TestRunBaseline:
    def test_rejects_nonseparable(self):
        g, mix = setup_network()
        p = make_coupled_quadratic(4, 2, 1, 16, seed=0)
        with pytest.raises(CapabilityError):
            run_baseline(p, mix, g, params_for(16))

    def test_feasible_always_reduces_to_gradient_descent(self):
        T = 64
        g, mix = setup_network()
        p = make_separable_quadratic(4, 2, T, seed=3, rho=1000.0)  # never binds
        params = params_for(T)
        trace = run_baseline(p, mix, g, params, backend="python")
        assert np.all(trace.lambda_bar == 0.0)
        # independent decentralized gradient descent on the local trackers
        pset = p.product_set
        x = pset.project(np.zeros(pset.dim))
        for t in range(1, T + 1):
            np.testing.assert_allclose(trace.actions[t - 1], x, rtol=0, atol=1e-12)
            nxt = np.empty_like(x)
            for i in range(4):
                sl = pset.block_slice(i)
                xi = x[sl]
                nxt[sl] = pset.blocks[i].project(
                    xi - params.alpha * p.local_cost_grad(i, t, xi))
            x = nxt

    def test_single_agent_matches_leaky_reference(self):
        T = 100
        g = build_graph("complete", 1)
        mix = build_mixing(g)
        p = make_separable_quadratic(1, 3, T, seed=11)
        params = params_for(T)
        trace = run_baseline(p, mix, g, params, backend="python")
        pset = p.product_set
        x = pset.project(np.zeros(3))
        lam = 0.0
        for t in range(1, T + 1):
            np.testing.assert_allclose(trace.actions[t - 1], x, rtol=0, atol=1e-12)
            gloc = p.local_constraint(0, t, x)[0]
            grad = p.local_cost_grad(0, t, x) + lam * np.ones(3)
            x = pset.blocks[0].project(x - params.alpha * grad)
            lam = min(max(lam + params.alpha * (1 * gloc - lam), 0.0), params.lambda_max)

    def test_states_stay_feasible(self):
        T = 256
        g, mix = setup_network(5)
        p = make_separable_quadratic(5, 2, T, seed=5)
        trace = run_baseline(p, mix, g, params_for(T), backend="python")
        pset = p.product_set
        for tt in range(T):
            assert pset.contains(trace.actions[tt], tol=1e-12)
        assert np.all(trace.lambda_bar >= 0.0)
        assert np.all(trace.lambda_bar <= params_for(T).lambda_max)

    def test_deterministic(self):
        T = 64
        g, mix = setup_network()
        p = make_separable_quadratic(4, 2, T, seed=8)
        t1 = run_baseline(p, mix, g, params_for(T))
        t2 = run_baseline(p, mix, g, params_for(T))
        np.testing.assert_array_equal(t1.actions, t2.actions)
        np.testing.assert_array_equal(t1.g_action, t2.g_action)


@pytest.mark.skipif(not backend_mod.HAS_COMPILED, reason="extension not built")
def test_backend_equivalence():
    T = 2048
    g, mix = setup_network(8)
    p = make_separable_quadratic(8, 2, T, seed=6)
    params = params_for(T)
    tc = run_baseline(p, mix, g, params, backend="compiled")
    tp = run_baseline(p, mix, g, params, backend="python")
    np.testing.assert_allclose(tc.actions, tp.actions, rtol=0, atol=1e-9)
    np.testing.assert_allclose(tc.g_action, tp.g_action, rtol=0, atol=1e-9)
    np.testing.assert_allclose(tc.delta_x, tp.delta_x, rtol=0, atol=1e-9)
    np.testing.assert_allclose(tc.lambda_bar, tp.lambda_bar, rtol=0, atol=1e-9)
    np.testing.assert_allclose(tc.local_violation_sum, tp.local_violation_sum,
                               rtol=0, atol=1e-9)
    np.testing.assert_array_equal(tc.dual_clips, tp.dual_clips)


class TestCouplingDiagnostic:
    def test_zero_duals_zero_violation_accumulator(self):
        T = 64
        g, mix = setup_network()
        p = make_separable_quadratic(4, 2, T, seed=3, rho=1000.0)
        trace = run_baseline(p, mix, g, params_for(T))
        rep = coupling_diagnostic(trace)
        assert rep.s_violation == 0.0
        assert rep.lhs <= rep.ratio_full * rep.s_alpha + 1e-9

    def test_single_round_lhs_is_first_disagreement(self):
        g, mix = setup_network()
        p = make_separable_quadratic(4, 2, 1, seed=3)
        trace = run_baseline(p, mix, g, params_for(1))
        rep = coupling_diagnostic(trace)
        assert rep.lhs == trace.delta_x[0]

    def test_ratio_stable_on_seeded_run(self):
        T = 4096
        g, mix = setup_network(8)
        p = make_separable_quadratic(8, 2, T, seed=6)
        trace = run_baseline(p, mix, g, params_for(T))
        rep = coupling_diagnostic(trace)
        r = np.array(rep.window_ratios)
        assert np.all(np.isfinite(r))
        assert rep.cv < 0.5

    def test_requires_baseline_trace(self):
        from docosim import run
        g, mix = setup_network()
        p = make_separable_quadratic(4, 2, 16, seed=3)
        trace = run(p, mix, params_for(16))
        with pytest.raises(ValueError):
            coupling_diagnostic(trace)
