"""Per-round run records shared by the algorithms and the metrics layer."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RunTrace:
    """Round-by-round record of one run.

    Arrays are indexed by round (0-based row tt holds round t = tt + 1).
    `delta_x` and `lambda_bar` carry one extra trailing row with the
    post-horizon state (t = T + 1) so one-step recursions can be checked on
    every round. `g_*` rows are full constraint vectors; `*_avg` entries are
    evaluated at the network-average belief. `mean_g_at_beliefs[tt]` is the
    across-agent mean of the constraint vector at the post-consensus beliefs,
    which is what the dual step integrates. `local_violation_sum` is only
    populated by the decision-sharing baseline.
    """

    cost_action: np.ndarray          # (T,)   cost of the executed joint action
    g_action: np.ndarray             # (T,m)  constraints at the executed action
    cost_avg: np.ndarray             # (T,)   cost at the average belief
    g_avg: np.ndarray                # (T,m)  constraints at the average belief
    delta_x: np.ndarray              # (T+1,) consensus error of pre-round beliefs
    lambda_bar: np.ndarray           # (T+1,m) average dual, pre-round
    mean_g_at_beliefs: np.ndarray    # (T,m)
    dual_clips: np.ndarray           # (T,)   upper-cap clip count per round
    actions: np.ndarray              # (T,d)  executed joint actions
    alphas: np.ndarray               # (T,)   step size used each round
    meta: dict = field(default_factory=dict)
    local_violation_sum: np.ndarray = None  # (T,) baseline only

    @property
    def horizon(self):
        return self.cost_action.shape[0]

    @property
    def m(self):
        return self.g_action.shape[1]

    @property
    def d(self):
        return self.actions.shape[1]

    def __post_init__(self):
        T = self.cost_action.shape[0]
        if self.delta_x.shape[0] != T + 1 or self.lambda_bar.shape[0] != T + 1:
            raise ValueError("delta_x and lambda_bar must have length T + 1")
        if not np.all(np.isfinite(self.cost_action)):
            raise ValueError("non-finite cost in trace")
        if np.min(self.delta_x) < 0:
            raise ValueError("negative consensus error in trace")
