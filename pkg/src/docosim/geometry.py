"""Convex action sets (boxes, balls, block products) and Euclidean projections."""

from dataclasses import dataclass

import numpy as np


def _lock_vector(a):
    arr = np.array(a, dtype=float)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D vector")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Box:
    """Axis-aligned box {x : lo <= x <= hi}."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", _lock_vector(self.lo))
        object.__setattr__(self, "hi", _lock_vector(self.hi))
        if self.lo.shape != self.hi.shape:
            raise ValueError("lo and hi must have the same length")
        if np.any(self.lo > self.hi):
            raise ValueError("box requires lo <= hi elementwise")

    @property
    def dim(self):
        return self.lo.size

    def diameter(self):
        return float(np.linalg.norm(self.hi - self.lo))

    def center(self):
        return (self.lo + self.hi) / 2.0

    def max_norm(self):
        """Largest Euclidean norm attained on the set."""
        return float(np.linalg.norm(np.maximum(np.abs(self.lo), np.abs(self.hi))))

    def project(self, p):
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            raise ValueError(f"point has dimension {p.size}, set has {self.dim}")
        return np.clip(p, self.lo, self.hi)

    def contains(self, p, tol=1e-12):
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.lo - tol) and np.all(p <= self.hi + tol))

    def sample(self, rng):
        return rng.uniform(self.lo, self.hi)


@dataclass(frozen=True)
class Ball:
    """Euclidean ball {x : ||x - center|| <= radius}."""

    center_point: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center_point", _lock_vector(self.center_point))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius < 0:
            raise ValueError("ball radius must be nonnegative")

    @property
    def dim(self):
        return self.center_point.size

    def diameter(self):
        return 2.0 * self.radius

    def center(self):
        return self.center_point.copy()

    def max_norm(self):
        return float(np.linalg.norm(self.center_point)) + self.radius

    def project(self, p):
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            raise ValueError(f"point has dimension {p.size}, set has {self.dim}")
        r = p - self.center_point
        nr = float(np.linalg.norm(r))
        if nr <= self.radius:
            return p.copy()
        scale = self.radius / nr
        q = self.center_point + r * scale
        # rounding can leave q one ulp outside, which would break exact
        # idempotence; shrink by ulps until membership is exact
        while float(np.linalg.norm(q - self.center_point)) > self.radius:
            scale = np.nextafter(scale, 0.0)
            q = self.center_point + r * scale
        return q

    def contains(self, p, tol=1e-12):
        p = np.asarray(p, dtype=float)
        return bool(np.linalg.norm(p - self.center_point) <= self.radius + tol)

    def sample(self, rng):
        # Uniform in the ball: random direction times radius * U^(1/dim).
        v = rng.standard_normal(self.dim)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return self.center_point.copy()
        u = rng.uniform() ** (1.0 / self.dim)
        return self.center_point + v * (self.radius * u / nv)


class ProductSet:
    """Block product of per-agent sets; block i owns one slice of the joint vector."""

    def __init__(self, blocks):
        blocks = tuple(blocks)
        if not blocks:
            raise ValueError("product set needs at least one block")
        self.blocks = blocks
        offsets = [0]
        for b in blocks:
            offsets.append(offsets[-1] + b.dim)
        self.offsets = tuple(offsets)
        self.dim = offsets[-1]

    @property
    def n_blocks(self):
        return len(self.blocks)

    def block_slice(self, i):
        return slice(self.offsets[i], self.offsets[i + 1])

    def extract(self, i, joint):
        joint = np.asarray(joint, dtype=float)
        if joint.shape != (self.dim,):
            raise ValueError(f"joint vector has dimension {joint.size}, expected {self.dim}")
        return joint[self.block_slice(i)]

    def diameter(self):
        return float(np.sqrt(sum(b.diameter() ** 2 for b in self.blocks)))

    def max_norm(self):
        return float(np.sqrt(sum(b.max_norm() ** 2 for b in self.blocks)))

    def center(self):
        return np.concatenate([b.center() for b in self.blocks])

    def project(self, joint):
        joint = np.asarray(joint, dtype=float)
        if joint.shape != (self.dim,):
            raise ValueError(f"joint vector has dimension {joint.size}, expected {self.dim}")
        out = np.empty(self.dim)
        for i, b in enumerate(self.blocks):
            sl = self.block_slice(i)
            out[sl] = b.project(joint[sl])
        return out

    def project_block(self, i, joint):
        if not 0 <= i < self.n_blocks:
            raise IndexError(f"agent index {i} out of range [0, {self.n_blocks})")
        return self.blocks[i].project(self.extract(i, joint))

    def contains(self, joint, tol=1e-12):
        joint = np.asarray(joint, dtype=float)
        return all(
            b.contains(joint[self.block_slice(i)], tol) for i, b in enumerate(self.blocks)
        )

    def sample(self, rng):
        return np.concatenate([b.sample(rng) for b in self.blocks])


def project(s, p):
    """Euclidean projection of p onto the convex set s."""
    return s.project(p)


def project_block(s, i, joint):
    """Extract block i of the joint vector and project it onto block i's set."""
    return s.project_block(i, joint)


def project_dual(lambda_max, v):
    """Clamp a multiplier vector to the dual box [0, lambda_max]^m."""
    if lambda_max <= 0:
        raise ValueError("lambda_max must be positive")
    return np.clip(np.asarray(v, dtype=float), 0.0, lambda_max)


def kernel_set_arrays(pset):
    """Flatten a ProductSet into plain arrays for the compiled round loop.

    Returns (kinds, offsets, lo, hi, center, radius) where kinds[i] is 0 for a
    box block and 1 for a ball block; unused entries are zero.
    """
    n, d = pset.n_blocks, pset.dim
    kinds = np.zeros(n, dtype=np.int64)
    offs = np.asarray(pset.offsets, dtype=np.int64)
    lo = np.zeros(d)
    hi = np.zeros(d)
    cen = np.zeros(d)
    rad = np.zeros(n)
    for i, b in enumerate(pset.blocks):
        sl = pset.block_slice(i)
        if isinstance(b, Box):
            kinds[i] = 0
            lo[sl] = b.lo
            hi[sl] = b.hi
        elif isinstance(b, Ball):
            kinds[i] = 1
            cen[sl] = b.center_point
            rad[i] = b.radius
        else:
            raise TypeError(f"unsupported block type for compiled path: {type(b)!r}")
    return kinds, offs, lo, hi, cen, rad
