"""Communication graphs, doubly stochastic PSD mixing matrices, and their spectra."""

from dataclasses import dataclass, field

import numpy as np

from .errors import CompatibilityError, ConnectivityError

TOPOLOGIES = ("complete", "ring", "path", "star", "random-geometric")
MIXING_SCHEMES = ("lazy-metropolis", "uniform-average")


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on agents 0..n-1."""

    n: int
    edges: frozenset
    geo_radius: float = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one agent")
        norm = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop at agent {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i},{j}) out of range for n={self.n}")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))

    def degrees(self):
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def neighbors(self, i):
        out = []
        for a, b in self.edges:
            if a == i:
                out.append(b)
            elif b == i:
                out.append(a)
        return tuple(sorted(out))

    def adjacency(self):
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i, j] = 1.0
            a[j, i] = 1.0
        return a

    def is_connected(self):
        if self.n == 1:
            return True
        adj = {i: [] for i in range(self.n)}
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n

    def is_complete(self):
        return len(self.edges) == self.n * (self.n - 1) // 2


def build_graph(kind, n, radius=None, seed=None):
    """Build a named topology on n agents.

    random-geometric places n points uniformly in the unit square (seeded),
    connects pairs within `radius`, and grows the radius by 1.2x (at most 50
    times) until the graph is connected; the final radius is recorded on the
    returned Graph.
    """
    if n < 1:
        raise ValueError("graph needs at least one agent")
    if kind == "complete":
        edges = {(i, j) for i in range(n) for j in range(i + 1, n)}
        return Graph(n, frozenset(edges))
    if kind == "ring":
        edges = {(min(i, (i + 1) % n), max(i, (i + 1) % n)) for i in range(n) if n > 1}
        return Graph(n, frozenset(edges))
    if kind == "path":
        return Graph(n, frozenset((i, i + 1) for i in range(n - 1)))
    if kind == "star":
        return Graph(n, frozenset((0, i) for i in range(1, n)))
    if kind == "random-geometric":
        if radius is None:
            raise ValueError("random-geometric topology requires a radius")
        if not 0.0 < radius <= np.sqrt(2.0):
            raise ValueError("random-geometric radius must lie in (0, sqrt(2)]")
        rng = np.random.default_rng(seed)
        pts = rng.random((n, 2))
        r = float(radius)
        for _ in range(50):
            edges = set()
            for i in range(n):
                for j in range(i + 1, n):
                    if np.linalg.norm(pts[i] - pts[j]) <= r:
                        edges.add((i, j))
            g = Graph(n, frozenset(edges), geo_radius=r)
            if g.is_connected():
                return g
            r *= 1.2
        raise ConnectivityError(
            f"random-geometric graph still disconnected after 50 radius growths (r={r:.3g})"
        )
    raise ValueError(f"unknown topology kind: {kind!r}")


@dataclass(frozen=True)
class MixingMatrix:
    """Doubly stochastic, PSD weight matrix with its second-largest eigenvalue."""

    w: np.ndarray
    sigma: float

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("mixing matrix must be square")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def n(self):
        return self.w.shape[0]


def build_mixing(g, scheme="lazy-metropolis"):
    """Construct a mixing matrix compatible with graph g.

    lazy-metropolis: Metropolis weights 1/(1+max(deg_i,deg_j)) on edges with
    residual diagonal, then averaged with the identity to make the matrix
    positive semi-definite. uniform-average: all entries 1/n; only valid on
    complete graphs.
    """
    if not g.is_connected():
        raise ConnectivityError("mixing matrices require a connected graph")
    n = g.n
    if scheme == "lazy-metropolis":
        deg = g.degrees()
        m = np.zeros((n, n))
        for i, j in g.edges:
            m[i, j] = m[j, i] = 1.0 / (1.0 + max(deg[i], deg[j]))
        np.fill_diagonal(m, 1.0 - m.sum(axis=1))
        w = (np.eye(n) + m) / 2.0
    elif scheme == "uniform-average":
        if not g.is_complete():
            raise CompatibilityError("uniform-average mixing requires a complete graph")
        w = np.full((n, n), 1.0 / n)
    else:
        raise ValueError(f"unknown mixing scheme: {scheme!r}")
    mix = MixingMatrix(w=w, sigma=spectral_sigma(w))
    validate_mixing(mix, g)
    return mix


def spectral_sigma(w, method="auto", tol=1e-10, max_iter=100_000):
    """Second-largest eigenvalue of a symmetric doubly stochastic matrix.

    Equivalently the operator norm of w - (1/n) * ones for doubly stochastic
    PSD w. Dense symmetric eigendecomposition for n <= 512 (or method="dense"),
    otherwise power iteration on the deflated matrix.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("matrix must be square")
    n = w.shape[0]
    if np.max(np.abs(w - w.T)) > 1e-12:
        raise ValueError("matrix must be symmetric")
    if n == 1:
        return 0.0
    if method == "auto":
        method = "dense" if n <= 512 else "power"
    if method == "dense":
        val = float(np.linalg.eigvalsh(w)[-2])
        return 0.0 if abs(val) < 1e-13 else val  # eigendecomposition noise floor
    if method == "power":
        b = w - 1.0 / n
        rng = np.random.default_rng(0xD15C0)
        v = rng.standard_normal(n)
        v -= v.mean()
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return 0.0
        v /= nv
        lam = 0.0
        for _ in range(max_iter):
            u = b @ v
            nu = np.linalg.norm(u)
            if nu < 1e-300:
                return 0.0
            u /= nu
            lam = float(u @ (b @ u))
            if np.linalg.norm(b @ u - lam * u) <= tol:
                break
            v = u
        return 0.0 if abs(lam) < 1e-13 else abs(lam)
    raise ValueError(f"unknown method: {method!r}")


def validate_mixing(mix, g=None, sum_tol=1e-12, psd_tol=1e-10):
    """Check double stochasticity, symmetry, PSD, and graph compatibility."""
    w = mix.w
    n = w.shape[0]
    if np.min(w) < 0:
        raise ValueError("mixing matrix has negative entries")
    if np.max(np.abs(w.sum(axis=1) - 1.0)) > sum_tol:
        raise ValueError("row sums deviate from 1")
    if np.max(np.abs(w.sum(axis=0) - 1.0)) > sum_tol:
        raise ValueError("column sums deviate from 1")
    if np.max(np.abs(w - w.T)) > sum_tol:
        raise ValueError("mixing matrix not symmetric")
    if np.linalg.eigvalsh(w)[0] < -psd_tol:
        raise ValueError("mixing matrix not positive semi-definite")
    if g is not None:
        allowed = g.adjacency() + np.eye(n)
        if np.any((allowed == 0) & (np.abs(w) > 0)):
            raise CompatibilityError("nonzero weight on a non-edge")
        if g.is_connected() and not mix.sigma < 1.0:
            raise ValueError("connected graph must give sigma < 1")


def save_matrix_csv(mix, path):
    """Write the mixing matrix row-major as CSV with 17 significant digits."""
    with open(path, "w") as f:
        for row in np.asarray(mix.w):
            f.write(",".join(format(v, ".17g") for v in row) + "\n")
