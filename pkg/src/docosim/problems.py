"""Time-varying quadratic cost/constraint families, hindsight comparators, and
gradient validation.

Both built-in families drift sinusoidally on a fixed integer period, so every
time-aggregate (total cost, worst-case constraint value, cumulative positive
part) reduces exactly to a weighted sum over the 64 drift residues. That keeps
hindsight comparators exact and cheap at any horizon.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import geometry
from .errors import CapabilityError, InfeasibleError

DRIFT_PERIOD = 64
_SIN = np.sin(2.0 * np.pi * np.arange(DRIFT_PERIOD) / DRIFT_PERIOD)
_SIN.setflags(write=False)

# Coupled-instance shape knobs (see make_coupled_quadratic): relative size of
# the Gaussian part of the coupling matrix, and the gradient scale of the
# constraints (larger scale -> smaller stationary multipliers).
_COUPLING_NOISE = 0.6
_CONSTRAINT_SCALE = 2.0


def residue_counts(T, period=DRIFT_PERIOD):
    """How often each value of (t mod period) occurs for t = 1..T."""
    cnt = np.full(period, T // period, dtype=np.int64)
    rem = T % period
    if rem:
        cnt[np.arange(1, rem + 1) % period] += 1
    return cnt


@dataclass
class Comparator:
    """Best fixed feasible joint action in hindsight."""

    x_star: np.ndarray
    objective_value: float
    feasibility_margin: float
    method: str


class ProblemSequence:
    """Oracle for a T-round sequence of costs and coupled constraints.

    Subclasses implement cost/cost_grad/constraint/constraint_jac; the
    aggregate helpers default to explicit loops over rounds and may be
    overridden with closed forms.
    """

    separable = False

    def __init__(self, T, product_set, m, G_f, G_g, L_g):
        if T < 1:
            raise ValueError("horizon must be positive")
        self.T = int(T)
        self.product_set = product_set
        self.m = int(m)
        self.G_f = float(G_f)
        self.G_g = float(G_g)
        self.L_g = float(L_g)

    @property
    def d(self):
        return self.product_set.dim

    @property
    def D(self):
        return self.product_set.diameter()

    # per-round oracles -----------------------------------------------------
    def cost(self, t, x):
        raise NotImplementedError

    def cost_grad(self, t, x):
        raise NotImplementedError

    def constraint(self, t, x):
        raise NotImplementedError

    def constraint_jac(self, t, x):
        raise NotImplementedError

    # aggregates over the whole horizon -------------------------------------
    def total_cost(self, x):
        return float(sum(self.cost(t, x) for t in range(1, self.T + 1)))

    def total_cost_grad(self, x):
        g = np.zeros(self.d)
        for t in range(1, self.T + 1):
            g += self.cost_grad(t, x)
        return g

    def max_constraint(self, x):
        """Elementwise max over rounds of the constraint vector."""
        worst = np.full(self.m, -np.inf)
        for t in range(1, self.T + 1):
            worst = np.maximum(worst, self.constraint(t, x))
        return worst

    def feasibility_margin(self, x):
        return float(np.max(self.max_constraint(x)))

    def violation_aggregate(self, x):
        """(sum over t,k of positive constraint parts, one subgradient of it)."""
        total = 0.0
        sub = np.zeros(self.d)
        for t in range(1, self.T + 1):
            g = self.constraint(t, x)
            pos = g > 0
            if np.any(pos):
                total += float(g[pos].sum())
                sub += self.constraint_jac(t, x)[pos].sum(axis=0)
        return total, sub

    def feasibility_functions(self):
        """Stacked smooth constraints whose nonpositivity means always-feasible.

        Returns (fun, jac) with fun(x) -> (K,) and jac(x) -> (K, d); the default
        stacks every round.
        """

        def fun(x):
            return np.concatenate([self.constraint(t, x) for t in range(1, self.T + 1)])

        def jac(x):
            return np.vstack([self.constraint_jac(t, x) for t in range(1, self.T + 1)])

        return fun, jac

    def total_cost_batch(self, X):
        return np.array([self.total_cost(x) for x in X])

    def feasibility_margin_batch(self, X):
        return np.array([self.feasibility_margin(x) for x in X])

    def cost_series(self, x):
        """Per-round costs of holding the fixed action x; (T,)."""
        return np.array([self.cost(t, x) for t in range(1, self.T + 1)])

    def analytic_comparator(self):
        """Closed-form hindsight optimum if this instance registers one."""
        return None

    def kernel_spec(self):
        """Raw parameter arrays for the compiled round loop, or None."""
        return None


class QuadraticSequence(ProblemSequence):
    """cost_t(x) = ||A x - b_t||^2, g_{k,t}(x) = x'Q_k x + q_{k,t}'x - rho_{k,t}.

    b_t, q_{k,t}, rho_{k,t} follow bounded sinusoidal paths sampled on the
    shared drift period: b_t[j] = b0[j] + sin_table[(t + jb[j]) % P] * bamp[j]
    and analogously per constraint with scalar phases jq[k], jr[k].
    """

    def __init__(self, T, product_set, A, b0, bamp, jb, Q, q0, qamp, jq,
                 rho0, rhoamp, jr, G_f, G_g, L_g):
        m = Q.shape[0]
        super().__init__(T, product_set, m, G_f, G_g, L_g)
        self.A = np.ascontiguousarray(A, dtype=float)
        self.b0 = np.ascontiguousarray(b0, dtype=float)
        self.bamp = np.ascontiguousarray(bamp, dtype=float)
        self.jb = np.ascontiguousarray(jb, dtype=np.int64)
        self.Q = np.ascontiguousarray(Q, dtype=float)
        self.q0 = np.ascontiguousarray(q0, dtype=float)
        self.qamp = np.ascontiguousarray(qamp, dtype=float)
        self.jq = np.ascontiguousarray(jq, dtype=np.int64)
        self.rho0 = np.ascontiguousarray(rho0, dtype=float)
        self.rhoamp = np.ascontiguousarray(rhoamp, dtype=float)
        self.jr = np.ascontiguousarray(jr, dtype=np.int64)
        self._cache = None

    # drift paths ------------------------------------------------------------
    def _b(self, t):
        return self.b0 + _SIN[(t + self.jb) % DRIFT_PERIOD] * self.bamp

    def _q(self, t):
        s = _SIN[(t + self.jq) % DRIFT_PERIOD]
        return self.q0 + s[:, None] * self.qamp

    def _rho(self, t):
        return self.rho0 + _SIN[(t + self.jr) % DRIFT_PERIOD] * self.rhoamp

    # oracles ----------------------------------------------------------------
    def cost(self, t, x):
        r = self.A @ x - self._b(t)
        return float(r @ r)

    def cost_grad(self, t, x):
        return 2.0 * (self.A.T @ (self.A @ x - self._b(t)))

    def constraint(self, t, x):
        y = self.Q @ x
        return y @ x + self._q(t) @ x - self._rho(t)

    def constraint_jac(self, t, x):
        return 2.0 * (self.Q @ x) + self._q(t)

    # exact horizon aggregates via residue counts -----------------------------
    def _agg(self):
        if self._cache is not None:
            return self._cache
        P = DRIFT_PERIOD
        cnt = residue_counts(self.T)
        r = np.arange(P)
        sb = _SIN[(r[None, :] + self.jb[:, None]) % P]      # (d, P)
        s1 = sb @ cnt                                        # sum_t s_t per coord
        s2 = (sb ** 2) @ cnt
        sum_b = self.T * self.b0 + s1 * self.bamp
        sum_b_sq = float(
            np.sum(self.T * self.b0 ** 2 + 2 * self.b0 * self.bamp * s1
                   + self.bamp ** 2 * s2)
        )
        cq = _SIN[(r[None, :] + self.jq[:, None]) % P]       # (m, P)
        cr = _SIN[(r[None, :] + self.jr[:, None]) % P]
        self._cache = {
            "cnt": cnt,
            "active": cnt > 0,
            "sum_b": sum_b,
            "sum_b_sq": sum_b_sq,
            "cq": cq,
            "cr": cr,
        }
        return self._cache

    def total_cost(self, x):
        c = self._agg()
        ax = self.A @ x
        return float(self.T * (ax @ ax) - 2.0 * (ax @ c["sum_b"]) + c["sum_b_sq"])

    def total_cost_grad(self, x):
        c = self._agg()
        return 2.0 * (self.A.T @ (self.T * (self.A @ x) - c["sum_b"]))

    def _residue_constraints(self, x):
        """g values for every (constraint, residue) pair; (m, P)."""
        c = self._agg()
        base = (self.Q @ x) @ x + self.q0 @ x - self.rho0     # (m,)
        lin = self.qamp @ x                                    # (m,)
        return base[:, None] + c["cq"] * lin[:, None] - c["cr"] * self.rhoamp[:, None]

    def max_constraint(self, x):
        c = self._agg()
        vals = self._residue_constraints(x)
        return np.max(np.where(c["active"][None, :], vals, -np.inf), axis=1)

    def violation_aggregate(self, x):
        c = self._agg()
        vals = self._residue_constraints(x)
        pos = (vals > 0) & c["active"][None, :]
        w = pos * c["cnt"][None, :]
        total = float(np.sum(w * vals))
        w0 = w.sum(axis=1).astype(float)                      # (m,)
        w1 = (w * c["cq"]).sum(axis=1)
        sub = (2.0 * self.Q @ x + self.q0).T @ w0 + self.qamp.T @ w1
        return total, sub

    def feasibility_functions(self):
        c = self._agg()
        act = np.where(c["active"])[0]

        def fun(x):
            return self._residue_constraints(x)[:, act].ravel(order="C")

        def jac(x):
            grad0 = 2.0 * (self.Q @ x) + self.q0              # (m, d)
            rows = grad0[:, None, :] + c["cq"][:, act, None] * self.qamp[:, None, :]
            return rows.reshape(-1, self.d)

        return fun, jac

    def total_cost_batch(self, X):
        c = self._agg()
        R = X @ self.A.T
        return self.T * np.sum(R * R, axis=1) - 2.0 * (R @ c["sum_b"]) + c["sum_b_sq"]

    def feasibility_margin_batch(self, X):
        c = self._agg()
        act = np.where(c["active"])[0]
        out = np.full(X.shape[0], -np.inf)
        base = np.einsum("nd,kde,ne->nk", X, self.Q, X) + X @ self.q0.T - self.rho0
        lin = X @ self.qamp.T                                  # (n, m)
        for ridx in act:
            vals = base + lin * c["cq"][:, ridx] - self.rhoamp * c["cr"][:, ridx]
            out = np.maximum(out, vals.max(axis=1))
        return out

    def cost_series(self, x):
        P = DRIFT_PERIOD
        r = np.arange(P)
        b_resid = self.b0[None, :] + _SIN[(r[:, None] + self.jb[None, :]) % P] * self.bamp[None, :]
        resid = (self.A @ x)[None, :] - b_resid                # (P, d)
        cost_by_residue = np.sum(resid * resid, axis=1)
        return cost_by_residue[np.arange(1, self.T + 1) % P]

    def analytic_comparator(self):
        gram = self.T * (self.A.T @ self.A)
        rhs = self.A.T @ self._agg()["sum_b"]
        x_u, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
        if not self.product_set.contains(x_u, tol=1e-12):
            return None
        margin = self.feasibility_margin(x_u)
        if margin > 0.0:
            return None
        return Comparator(x_u, self.total_cost(x_u), margin, "analytic")

    def kernel_spec(self):
        return {
            "A": self.A, "b0": self.b0, "bamp": self.bamp, "jb": self.jb,
            "Q": self.Q, "q0": self.q0, "qamp": self.qamp, "jq": self.jq,
            "rho0": self.rho0, "rhoamp": self.rhoamp, "jr": self.jr,
            "sin_table": np.asarray(_SIN),
        }


class CoupledQuadratic(QuadraticSequence):
    """Nonseparable family: dense A couples all blocks in the cost and PSD Q_k
    with dense off-diagonal blocks couple them in every constraint."""


class SeparableQuadratic(QuadraticSequence):
    """Separable family: per-agent tracking costs and one linear budget
    constraint, exposed both jointly and through per-agent sub-oracles."""

    separable = True

    def __init__(self, *args, rho, n_agents, **kwargs):
        super().__init__(*args, **kwargs)
        self.rho = float(rho)
        self.n_agents = int(n_agents)

    def _local_b(self, i, t):
        sl = self.product_set.block_slice(i)
        return self._b(t)[sl]

    def local_cost(self, i, t, x_i):
        r = x_i - self._local_b(i, t)
        return float(r @ r)

    def local_cost_grad(self, i, t, x_i):
        return 2.0 * (x_i - self._local_b(i, t))

    def local_constraint(self, i, t, x_i):
        return np.array([float(np.sum(x_i)) - self.rho / self.n_agents])

    def local_constraint_jac(self, i, t, x_i):
        return np.ones((1, x_i.size))

    def baseline_kernel_spec(self):
        return {
            "b0": self.b0, "bamp": self.bamp, "jb": self.jb,
            "rho": self.rho, "sin_table": np.asarray(_SIN),
        }


def _unit(v):
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def make_coupled_quadratic(n_agents, d_i, m, T, seed, drift=0.5,
                           constraint_drift=0.001):
    """Nonseparable instance on the box product ([-1,1]^d_i)^n_agents.

    The cost pulls the joint decision toward a point that violates every
    constraint, so the hindsight optimum sits on the constraint boundary and
    multipliers stay active. The origin is strictly feasible with margin 0.1
    at every round, which keeps bounded multipliers justified.
    `constraint_drift` scales the constraint-path oscillation; it is kept small
    by default so the step-size-driven violation scaling stays visible at
    desk-scale horizons.
    """
    if min(n_agents, d_i, m, T) < 1:
        raise ValueError("n_agents, d_i, m, T must all be positive")
    if drift < 0 or constraint_drift < 0:
        raise ValueError("drift amplitudes must be nonnegative")
    rng = np.random.default_rng(seed)
    blocks = [geometry.Box(-np.ones(d_i), np.ones(d_i)) for _ in range(n_agents)]
    pset = geometry.ProductSet(blocks)
    d = pset.dim

    # Dense coupling with controlled conditioning: random rotation plus a
    # Gaussian perturbation, then row-normalized. A raw Gaussian would leave
    # the smallest curvature direction so flat that desk-scale horizons never
    # exit the transient.
    basis, _ = np.linalg.qr(rng.standard_normal((d, d)))
    A = basis + _COUPLING_NOISE * rng.standard_normal((d, d)) / np.sqrt(d)
    A /= np.linalg.norm(A, axis=1, keepdims=True)

    signs = rng.integers(0, 2, size=d) * 2.0 - 1.0
    x_pull = 0.6 * signs
    b0 = A @ x_pull
    u = _unit(rng.standard_normal(d))
    bamp = drift * u
    jb = np.full(d, rng.integers(DRIFT_PERIOD), dtype=np.int64)

    center = pset.center()
    scale = _CONSTRAINT_SCALE
    Q = np.empty((m, d, d))
    q0 = np.empty((m, d))
    qamp = np.empty((m, d))
    jq = np.empty(m, dtype=np.int64)
    jr = np.empty(m, dtype=np.int64)
    rho0 = np.empty(m)
    rhoamp = np.full(m, constraint_drift)
    for k in range(m):
        C = rng.standard_normal((d, d))
        Qk = C.T @ C
        Q[k] = scale * Qk / np.linalg.norm(Qk, 2)
        q0[k] = scale * _unit(_unit(x_pull) + 0.25 * rng.standard_normal(d))
        qamp[k] = constraint_drift * _unit(rng.standard_normal(d))
        jq[k] = rng.integers(DRIFT_PERIOD)
        jr[k] = rng.integers(DRIFT_PERIOD)
        # Slater margin of at least 0.1 at the set center for every round.
        rho0[k] = (center @ Q[k] @ center + q0[k] @ center
                   + abs(qamp[k] @ center) + rhoamp[k] + 0.1 * scale)

    Rx = pset.max_norm()
    sA = np.linalg.norm(A, 2)
    bmax = np.linalg.norm(b0) + np.linalg.norm(bamp)
    G_f = 2.0 * sA * (sA * Rx + bmax)
    Lk = np.array([
        2.0 * np.linalg.norm(Q[k], 2) * Rx
        + np.linalg.norm(q0[k]) + np.linalg.norm(qamp[k])
        for k in range(m)
    ])
    return CoupledQuadratic(
        T, pset, A, b0, bamp, jb, Q, q0, qamp, jq, rho0, rhoamp, jr,
        G_f=G_f, G_g=float(np.sqrt(np.sum(Lk ** 2))), L_g=float(np.max(Lk)),
    )


def make_separable_quadratic(n_agents, d_i, T, seed, drift=0.5, rho=1.0):
    """Separable instance: f_t = sum_i ||x_i - b_{i,t}||^2 and a single budget
    constraint sum(x) <= rho split as per-agent shares sum(x_i) - rho/n.

    Targets sit well above the budget so the constraint binds the hindsight
    optimum for every agent.
    """
    if min(n_agents, d_i, T) < 1:
        raise ValueError("n_agents, d_i, T must all be positive")
    if drift < 0:
        raise ValueError("drift must be nonnegative")
    if rho <= 0:
        raise ValueError("rho must be positive (the origin must stay feasible)")
    rng = np.random.default_rng(seed)
    blocks = [geometry.Box(-np.ones(d_i), np.ones(d_i)) for _ in range(n_agents)]
    pset = geometry.ProductSet(blocks)
    d = pset.dim

    b0 = np.empty(d)
    bamp = np.empty(d)
    jb = np.empty(d, dtype=np.int64)
    for i in range(n_agents):
        sl = pset.block_slice(i)
        b0[sl] = 0.5 + 0.15 * rng.standard_normal(d_i)
        bamp[sl] = drift * _unit(rng.standard_normal(d_i))
        jb[sl] = rng.integers(DRIFT_PERIOD)

    A = np.eye(d)
    Q = np.zeros((1, d, d))
    q0 = np.ones((1, d))
    qamp = np.zeros((1, d))
    jq = np.zeros(1, dtype=np.int64)
    jr = np.zeros(1, dtype=np.int64)
    rho0 = np.array([float(rho)])
    rhoamp = np.zeros(1)

    Rx = pset.max_norm()
    bmax = np.linalg.norm(b0) + np.linalg.norm(bamp)
    G_f = 2.0 * (Rx + bmax)
    G_g = float(np.sqrt(d))
    return SeparableQuadratic(
        T, pset, A, b0, bamp, jb, Q, q0, qamp, jq, rho0, rhoamp, jr,
        G_f=G_f, G_g=G_g, L_g=G_g, rho=rho, n_agents=n_agents,
    )


# hindsight comparators -------------------------------------------------------

def _grid_axes(pset, h):
    axes = []
    for i, b in enumerate(pset.blocks):
        if isinstance(b, geometry.Box):
            lo, hi = b.lo, b.hi
        else:
            c = b.center()
            lo, hi = c - b.radius, c + b.radius
        for j in range(b.dim):
            span = hi[j] - lo[j]
            npts = max(2, int(np.floor(span / h)) + 1)
            axes.append(np.linspace(lo[j], hi[j], npts))
    return axes


def _grid_scan(p, axes):
    pset = p.product_set
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    if any(isinstance(b, geometry.Ball) for b in pset.blocks):
        keep = np.array([pset.contains(x) for x in pts])
        pts = pts[keep]
    best_x = None
    best_val = np.inf
    for lo in range(0, pts.shape[0], 65536):
        chunk = pts[lo:lo + 65536]
        margins = p.feasibility_margin_batch(chunk)
        ok = margins <= 1e-9
        if not np.any(ok):
            continue
        vals = p.total_cost_batch(chunk[ok])
        j = int(np.argmin(vals))
        if vals[j] < best_val:
            best_val = float(vals[j])
            best_x = chunk[ok][j]
    return best_x, best_val


def _axis_bounds(pset):
    lo = np.empty(pset.dim)
    hi = np.empty(pset.dim)
    for i, b in enumerate(pset.blocks):
        sl = pset.block_slice(i)
        if isinstance(b, geometry.Box):
            lo[sl], hi[sl] = b.lo, b.hi
        else:
            c = b.center()
            lo[sl], hi[sl] = c - b.radius, c + b.radius
    return lo, hi


def _grid_comparator(p, resolution, refine_stages=3, refine_points=25):
    """Dense feasible scan at resolution h, then multiscale local rescans.

    A single coarse pass lands within one cell of a boundary optimum, whose
    objective gap decays only linearly in h; the refinement passes shrink the
    cell around the incumbent while staying pure enumeration.
    """
    pset = p.product_set
    d = pset.dim
    if d > 4:
        raise ValueError(f"grid comparator supports at most 4 dimensions, got {d}")
    h = resolution if resolution is not None else 1e-2 * p.D
    best_x, best_val = _grid_scan(p, _grid_axes(pset, h))
    if best_x is None:
        raise InfeasibleError("no grid point satisfies every round's constraints")
    lo, hi = _axis_bounds(pset)
    half = 1.5 * h
    for _ in range(refine_stages):
        axes = [np.linspace(max(lo[j], best_x[j] - half),
                            min(hi[j], best_x[j] + half), refine_points)
                for j in range(d)]
        cand_x, cand_val = _grid_scan(p, axes)
        if cand_x is not None and cand_val < best_val:
            best_x, best_val = cand_x, cand_val
        half *= 2.0 * 1.5 / (refine_points - 1)  # next stage spans ~3 old cells
    return Comparator(best_x, best_val, p.feasibility_margin(best_x), "grid")


def _projected_subgradient(p, x0, mu, iters, stall=5000):
    """Penalty-form warm start: best iterate of normalized projected subgradient
    with diminishing steps diam/sqrt(s)."""
    pset = p.product_set
    Dm = p.D
    T = p.T
    x = x0.copy()

    def value(z):
        viol, _ = p.violation_aggregate(z)
        return (p.total_cost(z) + mu * viol) / T

    best_x, best_v = x.copy(), value(x)
    last_check = best_v
    for s in range(1, iters + 1):
        _, vsub = p.violation_aggregate(x)
        g = (p.total_cost_grad(x) + mu * vsub) / T
        ng = np.linalg.norm(g)
        if ng == 0.0:
            break
        x = pset.project(x - (Dm / np.sqrt(s)) * (g / ng))
        v = value(x)
        if v < best_v:
            best_v, best_x = v, x.copy()
        if s % stall == 0:
            if last_check - best_v <= 1e-12 * max(1.0, abs(last_check)):
                break
            last_check = best_v
    return best_x


def _smooth_polish(p, x0):
    """Constrained smooth solve over the stacked feasibility snapshots."""
    pset = p.product_set
    fun, jac = p.feasibility_functions()
    T = p.T
    cons = [{"type": "ineq", "fun": lambda x: -fun(x), "jac": lambda x: -jac(x)}]
    bounds = []
    for i, b in enumerate(pset.blocks):
        if isinstance(b, geometry.Box):
            bounds.extend(zip(b.lo, b.hi))
        else:
            bounds.extend((None, None) for _ in range(b.dim))
            c = b.center()
            sl = pset.block_slice(i)
            cons.append({
                "type": "ineq",
                "fun": lambda x, sl=sl, c=c, r=b.radius: np.array([r ** 2 - np.sum((x[sl] - c) ** 2)]),
                "jac": lambda x, sl=sl, c=c: _ball_jac(x, sl, c, pset.dim),
            })
    res = minimize(
        lambda x: (p.total_cost(x) / T, p.total_cost_grad(x) / T),
        x0, jac=True, method="SLSQP", bounds=bounds, constraints=cons,
        options={"maxiter": 300, "ftol": 1e-14},
    )
    return pset.project(res.x)


def _ball_jac(x, sl, c, d):
    row = np.zeros((1, d))
    row[0, sl] = -2.0 * (x[sl] - c)
    return row


def _shrink_to_feasible(p, x, target=1e-7):
    """Pull x toward the strictly feasible set center until the margin clears."""
    center = p.product_set.center()
    if p.feasibility_margin(center) >= 0:
        raise InfeasibleError("set center is not strictly feasible; cannot repair")
    lo_t, hi_t = 0.0, 1.0
    for _ in range(80):
        mid = (lo_t + hi_t) / 2.0
        cand = x + mid * (center - x)
        if p.feasibility_margin(cand) <= -target:
            hi_t = mid
        else:
            lo_t = mid
    return x + hi_t * (center - x)


def _subgradient_comparator(p, warm_iters):
    x = p.product_set.center()
    mu = 10.0
    for _ in range(6):
        x = _projected_subgradient(p, x, mu, warm_iters)
        x = _smooth_polish(p, x)
        margin = p.feasibility_margin(x)
        if margin <= 1e-6:
            return Comparator(x, p.total_cost(x), margin, "subgradient")
        mu *= 10.0
    x = _shrink_to_feasible(p, x)
    margin = p.feasibility_margin(x)
    if margin > 1e-6:
        raise InfeasibleError("penalty comparator could not certify feasibility")
    return Comparator(x, p.total_cost(x), margin, "subgradient")


def hindsight_comparator(p, method="subgradient", resolution=None, warm_iters=20000):
    """Best fixed feasible joint action for the whole sequence.

    analytic: only when the instance registers a closed form. grid: brute
    force over an axis grid (d <= 4), feasible at every round within 1e-9.
    subgradient: penalty-escalation warm start plus a smooth constrained
    polish; certified feasible within 1e-6.
    """
    if method == "analytic":
        comp = p.analytic_comparator()
        if comp is None:
            raise CapabilityError("instance registers no closed-form hindsight optimum")
        return comp
    if method == "grid":
        return _grid_comparator(p, resolution)
    if method == "subgradient":
        return _subgradient_comparator(p, warm_iters)
    raise ValueError(f"unknown comparator method: {method!r}")


# validation helpers ----------------------------------------------------------

@dataclass
class GradientCheckReport:
    max_rel_error: float
    samples: int
    tol: float

    @property
    def passed(self):
        return self.max_rel_error <= self.tol


def _rel_err(analytic, numeric):
    denom = max(1.0, float(np.linalg.norm(numeric)))
    return float(np.linalg.norm(analytic - numeric)) / denom


def validate_gradients(p, samples=100, tol=1e-6, seed=0, step=1e-5):
    """Compare analytic gradients/Jacobians against central finite differences
    at random (round, point) pairs."""
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    worst = 0.0
    d = p.d
    for _ in range(samples):
        t = int(rng.integers(1, p.T + 1))
        x = p.product_set.sample(rng)
        fd_cost = np.empty(d)
        fd_jac = np.empty((p.m, d))
        for j in range(d):
            e = np.zeros(d)
            e[j] = step
            fd_cost[j] = (p.cost(t, x + e) - p.cost(t, x - e)) / (2 * step)
            fd_jac[:, j] = (p.constraint(t, x + e) - p.constraint(t, x - e)) / (2 * step)
        worst = max(worst, _rel_err(p.cost_grad(t, x), fd_cost))
        worst = max(worst, _rel_err(p.constraint_jac(t, x), fd_jac))
    return GradientCheckReport(worst, samples, tol)


def convexity_probe(p, trials=200, seed=0):
    """Max violation of the chord inequality over random segments; should be
    <= ~1e-9 for convex instances."""
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(trials):
        t = int(rng.integers(1, p.T + 1))
        x = p.product_set.sample(rng)
        y = p.product_set.sample(rng)
        th = rng.uniform()
        z = th * x + (1 - th) * y
        worst = max(worst, p.cost(t, z) - (th * p.cost(t, x) + (1 - th) * p.cost(t, y)))
        gap = p.constraint(t, z) - (th * p.constraint(t, x) + (1 - th) * p.constraint(t, y))
        worst = max(worst, float(np.max(gap)))
    return worst


def bound_audit(p, samples=200, seed=0):
    """Largest sampled gradient norms relative to the declared bounds."""
    rng = np.random.default_rng(seed)
    max_gf = 0.0
    max_gg = 0.0
    for _ in range(samples):
        t = int(rng.integers(1, p.T + 1))
        x = p.product_set.sample(rng)
        max_gf = max(max_gf, float(np.linalg.norm(p.cost_grad(t, x))))
        max_gg = max(max_gg, float(np.linalg.norm(p.constraint_jac(t, x))))
    return {"max_cost_grad": max_gf, "G_f": p.G_f,
            "max_jac_fro": max_gg, "G_g": p.G_g,
            "ok": max_gf <= p.G_f and max_gg <= p.G_g}
