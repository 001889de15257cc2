import pytest


MINIMAL_CONFIG = """\
# minimal experiment: complete pair, short horizons
topology.kind = complete
topology.n = 2
mixing.scheme = uniform-average
problem.kind = coupled-quadratic
problem.d_i = 1
problem.m = 1
problem.drift = 0.5
problem.seed = 3
algo.kind = dopbc
algo.c = 0.5
algo.lambda_max = 5.0
horizons = 64,128,256,512
comparator.method = subgradient
output.dir = out
master_seed = 42
"""

SEPARABLE_CONFIG = """\
topology.kind = ring
topology.n = 4
mixing.scheme = lazy-metropolis
problem.kind = separable-quadratic
problem.d_i = 2
problem.m = 1
problem.drift = 0.5
problem.seed = 6
algo.kind = dopbc
algo.c = 0.5
algo.lambda_max = 5.0
horizons = 64,128,256,512
comparator.method = subgradient
output.dir = out
master_seed = 42
"""


@pytest.fixture
def minimal_config_text():
    return MINIMAL_CONFIG


@pytest.fixture
def minimal_config_file(tmp_path):
    path = tmp_path / "exp.cfg"
    out = tmp_path / "out"
    text = MINIMAL_CONFIG.replace("output.dir = out", f"output.dir = {out}")
    path.write_text(text)
    return path


@pytest.fixture
def separable_config_file(tmp_path):
    path = tmp_path / "sep.cfg"
    out = tmp_path / "out"
    text = SEPARABLE_CONFIG.replace("output.dir = out", f"output.dir = {out}")
    path.write_text(text)
    return path
