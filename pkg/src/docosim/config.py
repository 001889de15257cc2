"""Flat dotted-key experiment configuration: parsing, validation, round-trip.

Grammar: one `key = value` per line; blank lines and `#` comments ignored.
Unknown keys are rejected. Optional keys and their defaults are documented in
the README; everything else is required.
"""

from dataclasses import dataclass, fields

from .errors import ConfigError
from .netgraph import MIXING_SCHEMES, TOPOLOGIES

PROBLEM_KINDS = ("coupled-quadratic", "separable-quadratic")
ALGO_KINDS = ("dopbc", "baseline-dspd")
COMPARATOR_METHODS = ("analytic", "grid", "subgradient")
BACKENDS = ("auto", "python", "compiled")


@dataclass(frozen=True)
class ExperimentConfig:
    topology_kind: str
    topology_n: int
    mixing_scheme: str
    problem_kind: str
    problem_d_i: int
    problem_m: int
    problem_drift: float
    problem_seed: int
    algo_kind: str
    algo_c: float
    algo_lambda_max: float
    horizons: tuple
    comparator_method: str
    output_dir: str
    master_seed: int
    topology_radius: float = None
    topology_seed: int = None
    problem_constraint_drift: float = 0.001
    problem_rho: float = 1.0
    runtime_backend: str = "auto"


def _parse_int(s, key):
    try:
        return int(s)
    except ValueError:
        raise ConfigError(f"expected an integer, got {s!r}", field=key) from None


def _parse_float(s, key):
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"expected a number, got {s!r}", field=key) from None


def _parse_horizons(s, key):
    try:
        hs = tuple(int(tok) for tok in s.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {s!r}", field=key) from None
    return hs


# key -> (attribute, parser, required, default_sentinel)
_KEYS = {
    "topology.kind": ("topology_kind", lambda s, k: s, True),
    "topology.n": ("topology_n", _parse_int, True),
    "topology.radius": ("topology_radius", _parse_float, False),
    "topology.seed": ("topology_seed", _parse_int, False),
    "mixing.scheme": ("mixing_scheme", lambda s, k: s, True),
    "problem.kind": ("problem_kind", lambda s, k: s, True),
    "problem.d_i": ("problem_d_i", _parse_int, True),
    "problem.m": ("problem_m", _parse_int, True),
    "problem.drift": ("problem_drift", _parse_float, True),
    "problem.seed": ("problem_seed", _parse_int, True),
    "problem.constraint_drift": ("problem_constraint_drift", _parse_float, False),
    "problem.rho": ("problem_rho", _parse_float, False),
    "algo.kind": ("algo_kind", lambda s, k: s, True),
    "algo.c": ("algo_c", _parse_float, True),
    "algo.lambda_max": ("algo_lambda_max", _parse_float, True),
    "horizons": ("horizons", _parse_horizons, True),
    "comparator.method": ("comparator_method", lambda s, k: s, True),
    "output.dir": ("output_dir", lambda s, k: s, True),
    "master_seed": ("master_seed", _parse_int, True),
    "runtime.backend": ("runtime_backend", lambda s, k: s, False),
}

_ATTR_TO_KEY = {attr: key for key, (attr, _, _) in _KEYS.items()}


def parse_config(text):
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", field=key)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r}", field=key)
        attr, parser, _ = _KEYS[key]
        seen[key] = (attr, parser(value, key))
    kwargs = {}
    missing = []
    for key, (attr, _, required) in _KEYS.items():
        if key in seen:
            kwargs[attr] = seen[key][1]
        elif required:
            missing.append(key)
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}", field=missing[0])
    cfg = ExperimentConfig(**kwargs)
    validate_config(cfg)
    return cfg


def load_config(path):
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path!r}: {e}") from None
    return parse_config(text)


def validate_config(cfg):
    if cfg.topology_kind not in TOPOLOGIES:
        raise ConfigError(f"must be one of {TOPOLOGIES}, got {cfg.topology_kind!r}",
                          field="topology.kind")
    if cfg.topology_n < 1:
        raise ConfigError("agent count must be >= 1", field="topology.n")
    if cfg.topology_kind == "random-geometric" and cfg.topology_radius is None:
        raise ConfigError("random-geometric topology requires a radius",
                          field="topology.radius")
    if cfg.mixing_scheme not in MIXING_SCHEMES:
        raise ConfigError(f"must be one of {MIXING_SCHEMES}, got {cfg.mixing_scheme!r}",
                          field="mixing.scheme")
    if cfg.problem_kind not in PROBLEM_KINDS:
        raise ConfigError(f"must be one of {PROBLEM_KINDS}, got {cfg.problem_kind!r}",
                          field="problem.kind")
    if cfg.problem_d_i < 1:
        raise ConfigError("block dimension must be >= 1", field="problem.d_i")
    if cfg.problem_m < 1:
        raise ConfigError("constraint count must be >= 1", field="problem.m")
    if cfg.problem_kind == "separable-quadratic" and cfg.problem_m != 1:
        raise ConfigError("separable-quadratic has exactly one coupled constraint",
                          field="problem.m")
    if cfg.problem_drift < 0:
        raise ConfigError("drift must be nonnegative", field="problem.drift")
    if cfg.problem_constraint_drift < 0:
        raise ConfigError("constraint drift must be nonnegative",
                          field="problem.constraint_drift")
    if cfg.problem_rho <= 0:
        raise ConfigError("rho must be positive", field="problem.rho")
    if cfg.algo_kind not in ALGO_KINDS:
        raise ConfigError(f"must be one of {ALGO_KINDS}, got {cfg.algo_kind!r}",
                          field="algo.kind")
    if not 0.0 < cfg.algo_c < 1.0:
        raise ConfigError(f"algo.c must lie in (0, 1), got {cfg.algo_c}", field="algo.c")
    if cfg.algo_lambda_max <= 0:
        raise ConfigError("lambda_max must be positive", field="algo.lambda_max")
    if not cfg.horizons:
        raise ConfigError("need at least one horizon", field="horizons")
    if any(T < 1 for T in cfg.horizons):
        raise ConfigError("horizons must be positive", field="horizons")
    if any(b <= a for a, b in zip(cfg.horizons, cfg.horizons[1:])):
        raise ConfigError("horizons must be strictly increasing", field="horizons")
    if cfg.comparator_method not in COMPARATOR_METHODS:
        raise ConfigError(f"must be one of {COMPARATOR_METHODS}, got "
                          f"{cfg.comparator_method!r}", field="comparator.method")
    if cfg.runtime_backend not in BACKENDS:
        raise ConfigError(f"must be one of {BACKENDS}, got {cfg.runtime_backend!r}",
                          field="runtime.backend")
    if cfg.algo_kind == "baseline-dspd" and cfg.problem_kind != "separable-quadratic":
        raise ConfigError("baseline-dspd requires a separable problem", field="algo.kind")


def _format_value(v):
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(cfg):
    """Canonical text form; parse(serialize(cfg)) == cfg."""
    defaults = {f.name: f.default for f in fields(ExperimentConfig)}
    lines = []
    for key, (attr, _, required) in _KEYS.items():
        v = getattr(cfg, attr)
        if not required and v == defaults[attr]:
            continue
        lines.append(f"{key} = {_format_value(v)}")
    return "\n".join(lines) + "\n"
