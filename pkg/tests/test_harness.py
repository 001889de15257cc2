import os

import numpy as np
import pytest

from docosim.config import load_config
from docosim.harness import (SLOPES_HEADER, build_problem, compare_algorithms,
                             horizon_seed, run_checks, run_experiment,
                             run_one_horizon, summary_header, sweep_rows,
                             trace_header)


def read_lines(path):
    with open(path) as f:
        return f.read().splitlines()


def mask_runtime(summary_lines):
    # runtime_ms is wall-clock and excluded from the determinism contract
    out = []
    for line in summary_lines:
        cols = line.split(",")
        out.append(",".join(cols[:-1]))
    return out


class TestRunExperiment:
    def test_file_contract(self, minimal_config_file):
        cfg = load_config(minimal_config_file)
        result = run_experiment(cfg, workers=1)
        for T in cfg.horizons:
            assert os.path.exists(os.path.join(result.out_dir, f"trace_T{T}.csv"))
        assert os.path.exists(result.summary_path)
        assert os.path.exists(result.slopes_path)
        assert len(result.trace_paths) == 4

    def test_headers_golden(self, minimal_config_file):
        cfg = load_config(minimal_config_file)
        result = run_experiment(cfg, workers=1)
        trace_lines = read_lines(result.trace_paths[0])
        assert trace_lines[0] == ("t,cost_inst,cum_regret_a,cum_regret_xbar,"
                                  "ccv_1,delta_x,lambda_bar_1,dual_clips")
        assert trace_lines[0] == ",".join(trace_header(1))
        assert read_lines(result.summary_path)[0] == (
            "T,alpha,sigma,regret_a,regret_xbar,ccv_1,delta_sum,runtime_ms")
        assert read_lines(result.summary_path)[0] == ",".join(summary_header(1))
        assert read_lines(result.slopes_path)[0] == ",".join(SLOPES_HEADER)

    def test_byte_identical_rerun(self, minimal_config_file, tmp_path):
        cfg = load_config(minimal_config_file)
        r1 = run_experiment(cfg, out_dir=tmp_path / "a", workers=1)
        r2 = run_experiment(cfg, out_dir=tmp_path / "b", workers=1)
        for p1, p2 in zip(r1.trace_paths, r2.trace_paths):
            assert open(p1, "rb").read() == open(p2, "rb").read()
        assert open(r1.slopes_path, "rb").read() == open(r2.slopes_path, "rb").read()
        assert mask_runtime(read_lines(r1.summary_path)) == \
            mask_runtime(read_lines(r2.summary_path))

    def test_parallel_matches_serial(self, minimal_config_file, tmp_path):
        cfg = load_config(minimal_config_file)
        serial = run_experiment(cfg, out_dir=tmp_path / "serial", workers=1)
        par = run_experiment(cfg, out_dir=tmp_path / "par", workers=2)
        for p1, p2 in zip(serial.trace_paths, par.trace_paths):
            assert open(p1, "rb").read() == open(p2, "rb").read()
        assert mask_runtime(read_lines(serial.summary_path)) == \
            mask_runtime(read_lines(par.summary_path))

    def test_trace_rows_and_t_column(self, minimal_config_file):
        cfg = load_config(minimal_config_file)
        result = run_experiment(cfg, workers=1)
        lines = read_lines(result.trace_paths[0])
        assert len(lines) == cfg.horizons[0] + 1
        assert lines[1].split(",")[0] == "1"
        assert lines[-1].split(",")[0] == str(cfg.horizons[0])

    def test_summary_sorted_by_horizon(self, minimal_config_file):
        cfg = load_config(minimal_config_file)
        result = run_experiment(cfg, workers=1)
        Ts = [int(line.split(",")[0]) for line in read_lines(result.summary_path)[1:]]
        assert Ts == sorted(Ts) == list(cfg.horizons)


def test_horizon_seed_stable():
    assert horizon_seed(42, 1024) == horizon_seed(42, 1024)
    assert horizon_seed(42, 1024) != horizon_seed(42, 2048)
    assert horizon_seed(41, 1024) != horizon_seed(42, 1024)


def test_run_one_horizon_reuses_comparator(minimal_config_file):
    cfg = load_config(minimal_config_file)
    res1, p = run_one_horizon(cfg, 64, keep_trace=True)
    res2, _ = run_one_horizon(cfg, 64, comparator=res1.comparator)
    assert res1.regret_action == res2.regret_action
    assert res1.trace.meta["T"] == 64


def test_sweep_rows_caches_comparators(separable_config_file):
    cfg = load_config(separable_config_file)
    comps = {}
    rows = sweep_rows(cfg, comparators=comps)
    assert set(comps) == set(cfg.horizons)
    assert [r.T for r in rows] == list(cfg.horizons)


def test_compare_algorithms(separable_config_file):
    cfg = load_config(separable_config_file)
    out = compare_algorithms(cfg)
    assert set(out) == {"dopbc", "baseline-dspd"}
    for algo in out:
        assert "ccv_a_1" in out[algo]["fits"]


def test_compare_requires_separable(minimal_config_file):
    from docosim.errors import ConfigError
    cfg = load_config(minimal_config_file)
    with pytest.raises(ConfigError):
        compare_algorithms(cfg)


def test_run_checks_all_pass(separable_config_file):
    cfg = load_config(separable_config_file)
    results = run_checks(cfg)
    names = [name for name, _, _ in results]
    assert "gradient-validation" in names and "separable-consistency" in names
    for name, passed, detail in results:
        assert passed, f"{name}: {detail}"


def test_build_problem_dispatch(minimal_config_file, separable_config_file):
    coupled = build_problem(load_config(minimal_config_file), 32)
    assert not coupled.separable
    sep = build_problem(load_config(separable_config_file), 32)
    assert sep.separable
