import dataclasses

import pytest

from docosim.config import (ExperimentConfig, parse_config, serialize_config,
                            validate_config)
from docosim.errors import ConfigError


def test_parse_minimal(minimal_config_text):
    cfg = parse_config(minimal_config_text)
    assert cfg.topology_kind == "complete"
    assert cfg.horizons == (64, 128, 256, 512)
    assert cfg.runtime_backend == "auto"      # documented default
    assert cfg.problem_constraint_drift == 0.001


def test_round_trip_identity(minimal_config_text):
    cfg = parse_config(minimal_config_text)
    again = parse_config(serialize_config(cfg))
    assert cfg == again


def test_round_trip_with_optionals():
    text = """\
topology.kind = random-geometric
topology.n = 6
topology.radius = 0.4
topology.seed = 9
mixing.scheme = lazy-metropolis
problem.kind = coupled-quadratic
problem.d_i = 2
problem.m = 2
problem.drift = 0.25
problem.seed = 1
problem.constraint_drift = 0.01
algo.kind = dopbc
algo.c = 0.75
algo.lambda_max = 3.5
horizons = 32,64,128,256
comparator.method = grid
output.dir = /tmp/x
master_seed = 7
runtime.backend = python
"""
    cfg = parse_config(text)
    assert cfg.topology_radius == 0.4 and cfg.runtime_backend == "python"
    assert parse_config(serialize_config(cfg)) == cfg


class TestValidation:
    def base(self, **overrides):
        cfg = parse_config(
            "\n".join([
                "topology.kind = ring", "topology.n = 4",
                "mixing.scheme = lazy-metropolis",
                "problem.kind = coupled-quadratic", "problem.d_i = 1",
                "problem.m = 1", "problem.drift = 0.5", "problem.seed = 1",
                "algo.kind = dopbc", "algo.c = 0.5", "algo.lambda_max = 5.0",
                "horizons = 8,16,32,64", "comparator.method = subgradient",
                "output.dir = out", "master_seed = 1",
            ]))
        return dataclasses.replace(cfg, **overrides)

    def test_c_out_of_range_names_field(self):
        with pytest.raises(ConfigError, match="algo.c"):
            validate_config(self.base(algo_c=1.2))

    def test_bad_topology(self):
        with pytest.raises(ConfigError, match="topology.kind"):
            validate_config(self.base(topology_kind="hypercube"))

    def test_horizons_not_increasing(self):
        with pytest.raises(ConfigError, match="horizons"):
            validate_config(self.base(horizons=(8, 8, 16, 32)))

    def test_separable_m_must_be_one(self):
        with pytest.raises(ConfigError, match="problem.m"):
            validate_config(self.base(problem_kind="separable-quadratic",
                                      problem_m=2))

    def test_baseline_needs_separable(self):
        with pytest.raises(ConfigError, match="algo.kind"):
            validate_config(self.base(algo_kind="baseline-dspd"))

    def test_rgg_needs_radius(self):
        with pytest.raises(ConfigError, match="topology.radius"):
            validate_config(self.base(topology_kind="random-geometric"))

    def test_backend_values(self):
        with pytest.raises(ConfigError, match="runtime.backend"):
            validate_config(self.base(runtime_backend="gpu"))


class TestParsing:
    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config("bogus.key = 1")

    def test_duplicate_key_rejected(self, minimal_config_text):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config(minimal_config_text + "\nmaster_seed = 1\n")

    def test_missing_required_reports_keys(self):
        with pytest.raises(ConfigError, match="missing required"):
            parse_config("topology.kind = ring\n")

    def test_comments_and_blank_lines(self, minimal_config_text):
        noisy = "# header\n\n" + minimal_config_text.replace(
            "topology.n = 2", "topology.n = 2   # inline comment")
        assert parse_config(noisy).topology_n == 2

    def test_bad_number(self):
        with pytest.raises(ConfigError, match="topology.n"):
            parse_config("topology.n = two\n")

    def test_malformed_line(self):
        with pytest.raises(ConfigError, match="key = value"):
            parse_config("just some words\n")
