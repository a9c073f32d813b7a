"""Euclidean domains: membership, boundary distance and seeded sampling.

Every domain exposes a vectorised signed distance ``sdist`` (positive inside,
negative outside, magnitude equal to the distance to the boundary).  The
public helpers below are thin wrappers that add the interior checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree

INTERIOR_TOL = 1e-12
TRUNCATION_R = 10.0
TRUNCATION_DELTA = 1e-3
LOG2 = math.log(2.0)


class DomainError(ValueError):
    pass


class PointNotInDomain(DomainError):
    pass


class SamplingExhausted(DomainError):
    pass


def as_points(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(a)):
        raise DomainError("non-finite coordinates")
    return a


def _box_sdist(q: Sequence[np.ndarray]) -> np.ndarray:
    # q_i <= 0 inside along axis i; standard box SDF from per-axis excess
    Q = np.stack(q, axis=-1)
    outside = np.linalg.norm(np.maximum(Q, 0.0), axis=-1)
    inside = np.minimum(Q.max(axis=-1), 0.0)
    return -(outside + inside)


def _even_odd(X: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Even-odd point-in-polygon test for a closed vertex loop V."""
    x, y = X[..., 0], X[..., 1]
    inside = np.zeros(x.shape, dtype=bool)
    for (x1, y1), (x2, y2) in zip(V, np.roll(V, -1, axis=0)):
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (x < xc)
    return inside


def _segment_distance(P: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    t = np.clip(((P - a) @ ab) / (ab @ ab), 0.0, 1.0)
    return np.linalg.norm(P - (a + t[..., None] * ab), axis=-1)


@dataclass(frozen=True)
class Domain:
    interior_tol: float = field(default=INTERIOR_TOL, kw_only=True)

    dim: int = field(init=False, default=2)

    def sdist(self, X) -> np.ndarray:
        raise NotImplementedError

    def bbox(self, R: float = TRUNCATION_R, delta: float = TRUNCATION_DELTA):
        raise NotImplementedError

    @property
    def spec(self) -> str:
        raise NotImplementedError

    def contains(self, X) -> np.ndarray:
        X = as_points(X)
        if X.shape[-1] != self.dim:
            raise DomainError(f"dimension mismatch: {X.shape[-1]} != {self.dim}")
        return self.sdist(X) > self.interior_tol

    def dist(self, X) -> np.ndarray:
        """Boundary distance of interior points; raises for any exterior point."""
        X = as_points(X)
        d = self.sdist(X)
        if np.any(~(d > self.interior_tol)):
            raise PointNotInDomain(f"point(s) not interior to {self.spec}")
        return d

    def sdist_grad(self, X, rel_step: float = 1e-7):
        """Signed distance and its gradient by central differences (step relative to d)."""
        X = as_points(X)
        d = self.sdist(X)
        h = rel_step * np.maximum(np.abs(d), 1e-300)
        g = np.empty(X.shape)
        for i in range(self.dim):
            E = np.zeros(self.dim)
            E[i] = 1.0
            step = h[..., None] * E
            g[..., i] = (self.sdist(X + step) - self.sdist(X - step)) / (2 * h)
        return d, g


@dataclass(frozen=True)
class Ball(Domain):
    center: tuple = (0.0, 0.0)
    radius: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "dim", len(self.center))
        if self.dim < 2 or not self.radius > 0:
            raise DomainError("degenerate ball")

    def sdist(self, X):
        X = np.asarray(X, dtype=float)
        return self.radius - np.linalg.norm(X - np.array(self.center), axis=-1)

    def bbox(self, R=TRUNCATION_R, delta=TRUNCATION_DELTA):
        c = np.array(self.center)
        return c - self.radius, c + self.radius

    @property
    def spec(self):
        return "ball " + " ".join(_fmt(v) for v in (*self.center, self.radius))


@dataclass(frozen=True)
class HalfSpace(Domain):
    """{x : x_n > 0}."""

    n: int = 2

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("half-space needs n >= 2")
        object.__setattr__(self, "dim", int(self.n))

    def sdist(self, X):
        return np.asarray(X, dtype=float)[..., -1]

    def bbox(self, R=TRUNCATION_R, delta=TRUNCATION_DELTA):
        lo = np.full(self.dim, -R)
        hi = np.full(self.dim, R)
        lo[-1] = delta
        return lo, hi

    @property
    def spec(self):
        return f"halfspace {self.n}"


@dataclass(frozen=True)
class PuncturedDisk(Domain):
    def sdist(self, X):
        X = np.asarray(X, dtype=float)
        r = np.hypot(X[..., 0], X[..., 1])
        inside = np.minimum(r, 1.0 - r)
        return np.where(r < 1.0, inside, 1.0 - r)

    def bbox(self, R=TRUNCATION_R, delta=TRUNCATION_DELTA):
        return np.array([-1.0, -1.0]), np.array([1.0, 1.0])

    @property
    def spec(self):
        return "punctured-disk"


@dataclass(frozen=True)
class StripV(Domain):
    """V = {x > 1, 0 < y < 1}, or V_s = {1 < x < s, 0 < y < 1} when s is given."""

    s: float | None = None

    def __post_init__(self):
        if self.s is not None and not self.s > 1:
            raise DomainError("strip-v needs s > 1")

    def sdist(self, X):
        X = np.asarray(X, dtype=float)
        x, y = X[..., 0], X[..., 1]
        qx = 1.0 - x if self.s is None else np.maximum(1.0 - x, x - self.s)
        qy = np.abs(y - 0.5) - 0.5
        return _box_sdist([qx, qy])

    def bbox(self, R=TRUNCATION_R, delta=TRUNCATION_DELTA):
        right = R if self.s is None else self.s
        return np.array([1.0, 0.0]), np.array([right, 1.0])

    @property
    def spec(self):
        return "strip-v" if self.s is None else f"strip-v {_fmt(self.s)}"


def _log_curve(v):
    return np.log1p(v * v / 4.0)


@dataclass(frozen=True)
class ImageOfV(Domain):
    """fV = {(u, v) : u > log(1 + v^2/4), 0 < v < 2}, the image of V under the log-map.

    Boundary pieces: fA = {(x, 0): x >= 0}, fB = {(x, 2): x >= log 2} and the
    curve u = log(1 + v^2/4), 0 <= v <= 2, which is exactly f[1, 1+i].
    """

    def curve_distance(self, X):
        X = np.asarray(X, dtype=float)
        u, v = X[..., 0], X[..., 1]
        grid = np.linspace(0.0, 2.0, 129)
        du = u[..., None] - _log_curve(grid)
        dv = v[..., None] - grid
        t = grid[np.argmin(du * du + dv * dv, axis=-1)]
        for _ in range(30):
            # Newton on the squared distance in the curve parameter
            phi = _log_curve(t)
            p1 = 2 * t / (4 + t * t)
            p2 = (8 - 2 * t * t) / (4 + t * t) ** 2
            g = (phi - u) * p1 + (t - v)
            H = p1 * p1 + (phi - u) * p2 + 1.0
            t = np.clip(t - g / np.where(H > 0.1, H, 0.1), 0.0, 2.0)
        return np.hypot(u - _log_curve(t), v - t)

    def boundary_distances(self, X):
        X = np.asarray(X, dtype=float)
        u, v = X[..., 0], X[..., 1]
        dA = np.where(u >= 0, np.abs(v), np.hypot(u, v))
        dB = np.where(u >= LOG2, np.abs(v - 2.0), np.hypot(u - LOG2, v - 2.0))
        return dA, dB, self.curve_distance(X)

    def sdist(self, X):
        X = np.asarray(X, dtype=float)
        u, v = X[..., 0], X[..., 1]
        d = np.minimum.reduce(self.boundary_distances(X))
        inside = (v > 0) & (v < 2) & (u > _log_curve(np.clip(v, 0, 2)))
        return np.where(inside, d, -d)

    def bbox(self, R=TRUNCATION_R, delta=TRUNCATION_DELTA):
        return np.array([0.0, 0.0]), np.array([R, 2.0])

    @property
    def spec(self):
        return "image-of-v"


@dataclass(frozen=True)
class ArgImage(Domain):
    """{(u, v) : 0 < u < pi, v > 0}."""

    def sdist(self, X):
        X = np.asarray(X, dtype=float)
        qu = np.abs(X[..., 0] - math.pi / 2) - math.pi / 2
        return _box_sdist([qu, -X[..., 1]])

    def bbox(self, R=TRUNCATION_R, delta=TRUNCATION_DELTA):
        return np.array([0.0, delta]), np.array([math.pi, R])

    @property
    def spec(self):
        return "arg-image"


@dataclass(frozen=True)
class Polygon2D(Domain):
    vertices: tuple = ()

    def __post_init__(self):
        V = tuple(tuple(float(c) for c in p) for p in self.vertices)
        if len(V) < 3 or any(len(p) != 2 for p in V):
            raise DomainError("polygon needs >= 3 planar vertices")
        object.__setattr__(self, "vertices", V)

    def sdist(self, X):
        X = np.asarray(X, dtype=float)
        V = np.array(self.vertices)
        W = np.roll(V, -1, axis=0)
        d = np.min([_segment_distance(X, a, b) for a, b in zip(V, W)], axis=0)
        return np.where(_even_odd(X, V), d, -d)

    def bbox(self, R=TRUNCATION_R, delta=TRUNCATION_DELTA):
        V = np.array(self.vertices)
        return V.min(axis=0), V.max(axis=0)

    @property
    def spec(self):
        return "polygon " + " ".join(_fmt(c) for p in self.vertices for c in p)


@dataclass(frozen=True, eq=False)
class Generic(Domain):
    """Domain given by a membership predicate and its boundary.

    The boundary is a list of parametric curves t in [0, 1] -> R^n, sampled into
    a cloud of at least ``cloud_size`` points; nearest cloud points are refined
    by a vectorised golden-section search in the curve parameter.  Without an
    ``inside`` predicate, planar membership is the even-odd test against the
    cloud taken as a closed polygon (curves listed in boundary order).
    """

    inside: Callable = None
    curves: tuple = ()
    box: tuple = None
    name: str = "generic"
    cloud_size: int = 4096
    n_dim: int = 2

    def __post_init__(self):
        object.__setattr__(self, "dim", self.n_dim)
        per = max(2, -(-self.cloud_size // max(len(self.curves), 1)))
        ts = np.linspace(0.0, 1.0, per)
        pts, owner = [], []
        for k, c in enumerate(self.curves):
            pts.append(np.asarray(c(ts), dtype=float))
            owner.append(np.full(per, k))
        cloud = np.concatenate(pts)
        object.__setattr__(self, "_cloud", cloud)
        object.__setattr__(self, "_owner", np.concatenate(owner))
        object.__setattr__(self, "_param", np.tile(ts, len(self.curves)))
        object.__setattr__(self, "_dt", 1.0 / (per - 1))
        object.__setattr__(self, "_tree", cKDTree(cloud))
        if self.inside is None:
            object.__setattr__(self, "_loop", np.concatenate([p[:-1] for p in pts]))

    def nearest_boundary(self, X):
        """(distance, nearest boundary point) for points of shape (..., n)."""
        X = np.asarray(X, dtype=float)
        flat = X.reshape(-1, self.dim)
        _, idx = self._tree.query(flat)
        near = self._cloud[idx].copy()
        best = np.linalg.norm(flat - near, axis=-1)
        for k, c in enumerate(self.curves):
            sel = np.flatnonzero(self._owner[idx] == k)
            if not sel.size:
                continue
            P = flat[sel]
            t0 = self._param[idx[sel]]
            lo = np.clip(t0 - self._dt, 0.0, 1.0)
            hi = np.clip(t0 + self._dt, 0.0, 1.0)
            t = t0.copy()
            e = 1e-3 * self._dt
            # safeguarded Newton on |P - c(t)|^2 / 2 with finite-difference curve derivatives
            for _ in range(8):
                c0 = np.asarray(c(t))
                cp = np.asarray(c(t + e))
                cm = np.asarray(c(t - e))
                d1 = (cp - cm) / (2 * e)
                d2 = (cp - 2 * c0 + cm) / (e * e)
                R = P - c0
                g = -(R * d1).sum(-1)
                H = (d1 * d1).sum(-1) - (R * d2).sum(-1)
                step = np.where(H > 0, g / np.where(H > 0, H, 1.0), np.sign(g) * self._dt * 0.5)
                t = np.clip(t - step, lo, hi)
            Q = np.asarray(c(t))
            dq = np.linalg.norm(P - Q, axis=-1)
            better = dq < best[sel]
            best[sel[better]] = dq[better]
            near[sel[better]] = Q[better]
        return best.reshape(X.shape[:-1]), near.reshape(X.shape)

    def boundary_distance(self, X):
        return self.nearest_boundary(X)[0]

    def _inside(self, X):
        return self.inside(X) if self.inside is not None else _even_odd(X, self._loop)

    def sdist(self, X):
        X = np.asarray(X, dtype=float)
        return np.where(self._inside(X), 1.0, -1.0) * self.boundary_distance(X)

    def sdist_grad(self, X, rel_step: float = 1e-7):
        """Signed distance with the gradient (x - nearest)/d, up to the sign."""
        X = as_points(X)
        d, Q = self.nearest_boundary(X)
        sign = np.where(self._inside(X), 1.0, -1.0)
        g = (X - Q) / np.maximum(d, 1e-300)[..., None]
        return sign * d, sign[..., None] * g

    def bbox(self, R=TRUNCATION_R, delta=TRUNCATION_DELTA):
        if self.box is not None:
            return np.array(self.box[0], float), np.array(self.box[1], float)
        return self._cloud.min(axis=0), self._cloud.max(axis=0)

    @property
    def spec(self):
        return self.name


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


# -- public operations -------------------------------------------------------


def dist_to_boundary(domain: Domain, x) -> float:
    x = as_points(x)
    return float(domain.dist(x))


def contains(domain: Domain, x) -> bool:
    return bool(domain.contains(x))


def sample_interior(domain: Domain, count: int, seed: int, R: float = TRUNCATION_R,
                    delta: float = TRUNCATION_DELTA) -> np.ndarray:
    """Rejection sampling from the domain's (truncated) bounding box."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    lo, hi = domain.bbox(R, delta)
    out, drawn, got = [], 0, 0
    batch = 4096  # fixed so that smaller counts are prefixes of larger ones
    while got < count:
        P = rng.uniform(lo, hi, size=(batch, domain.dim))
        drawn += batch
        P = P[domain.contains(P)]
        out.append(P)
        got += len(P)
        if drawn >= 10**6 and got / drawn < 1e-6:
            raise SamplingExhausted(f"acceptance rate below 1e-6 for {domain.spec}")
    return np.concatenate(out)[:count]


def r_quantity_arrays(domain: Domain, X, Y) -> np.ndarray:
    X, Y = as_points(X), as_points(Y)
    return np.linalg.norm(X - Y, axis=-1) / np.minimum(domain.dist(X), domain.dist(Y))


def _uniform_ball(rng, count, n):
    g = rng.standard_normal((count, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * rng.uniform(size=(count, 1)) ** (1.0 / n)


def sample_pairs_with_r_bound(domain: Domain, r_max: float, count: int, seed: int,
                              R: float = TRUNCATION_R, delta: float = TRUNCATION_DELTA):
    """Pairs (x, y) with r_G(x, y) <= r_max; returns two (count, n) arrays."""
    if not r_max > 0:
        raise ValueError("r_max must be positive")
    rng = np.random.default_rng(seed)
    xs, ys, got, rounds = [], [], 0, 0
    while got < count:
        rounds += 1
        if rounds > 1000:
            raise SamplingExhausted("could not produce enough admissible pairs")
        X = sample_interior(domain, count, int(rng.integers(2**31)), R, delta)
        dX = domain.dist(X)
        Y = X + r_max * dX[:, None] * _uniform_ball(rng, count, domain.dim)
        ok = domain.contains(Y)
        X, Y = X[ok], Y[ok]
        ok = r_quantity_arrays(domain, X, Y) <= r_max
        xs.append(X[ok])
        ys.append(Y[ok])
        got += int(ok.sum())
    return np.concatenate(xs)[:count], np.concatenate(ys)[:count]


def sample_near_boundary(domain: Domain, d_lo: float, d_hi: float, count: int, seed: int,
                         R: float = TRUNCATION_R, delta: float = TRUNCATION_DELTA):
    """Interior points with boundary distance log-uniform in [d_lo, d_hi).

    Points are drawn in the truncation box and pushed along the distance
    gradient toward their nearest boundary point; misses are redrawn.
    """
    rng = np.random.default_rng(seed)
    out, got, rounds = [], 0, 0
    while got < count:
        rounds += 1
        if rounds > 200:
            raise SamplingExhausted(f"no points at distance [{d_lo}, {d_hi})")
        X = sample_interior(domain, 2 * count, int(rng.integers(2**31)), R, delta)
        target = np.exp(rng.uniform(math.log(d_lo), math.log(d_hi), size=len(X)))
        for _ in range(8):
            d, g = domain.sdist_grad(X)
            X = X - (d - target)[:, None] * g
        d = domain.sdist(X)
        ok = (d >= d_lo) & (d < d_hi) & (d > domain.interior_tol)
        out.append(X[ok])
        got += int(ok.sum())
    return np.concatenate(out)[:count]


# -- domain grammar ----------------------------------------------------------


def parse_domain(text: str) -> Domain:
    """Parse ``ball cx cy [cz] r``, ``halfspace n``, ``punctured-disk``,
    ``strip-v [s]``, ``image-of-v``, ``arg-image`` or ``polygon x1 y1 ...``."""
    parts = text.split()
    if not parts:
        raise DomainError("empty domain spec")
    kind, args = parts[0], parts[1:]
    try:
        nums = [float(a) for a in args]
    except ValueError as exc:
        raise DomainError(f"bad number in domain spec {text!r}") from exc
    if kind == "ball" and len(nums) >= 3:
        return Ball(tuple(nums[:-1]), nums[-1])
    if kind == "halfspace" and len(nums) == 1 and nums[0].is_integer():
        return HalfSpace(int(nums[0]))
    if kind == "punctured-disk" and not nums:
        return PuncturedDisk()
    if kind == "strip-v" and len(nums) <= 1:
        return StripV(nums[0] if nums else None)
    if kind == "image-of-v" and not nums:
        return ImageOfV()
    if kind == "arg-image" and not nums:
        return ArgImage()
    if kind == "polygon" and len(nums) >= 6 and len(nums) % 2 == 0:
        return Polygon2D(tuple(zip(nums[::2], nums[1::2])))
    raise DomainError(f"cannot parse domain spec {text!r}")


# -- deterministic point sets ---------------------------------------------------


def unit_ball_qmc(n: int, count: int, seed: int) -> np.ndarray:
    """Scrambled Sobol points pushed to the unit ball (radius u^(1/n), uniform direction)."""
    from scipy.stats import qmc

    m = max(1, math.ceil(math.log2(max(count, 2))))
    U = qmc.Sobol(d=n, scramble=True, seed=seed).random_base2(m)[:count]
    U = np.clip(U, 1e-12, 1 - 1e-12)
    r = U[:, 0] ** (1.0 / n)
    return r[:, None] * _directions(U[:, 1:], n)


def _directions(U, n):
    if n == 2:
        th = 2 * math.pi * U[:, 0]
        return np.column_stack([np.cos(th), np.sin(th)])
    if n == 3:
        z = 2 * U[:, 0] - 1
        ph = 2 * math.pi * U[:, 1]
        s = np.sqrt(np.maximum(0.0, 1 - z * z))
        return np.column_stack([s * np.cos(ph), s * np.sin(ph), z])
    from scipy.stats import norm

    G = norm.ppf(U)
    G = np.column_stack([G, np.ones(len(G))]) if G.shape[1] < n else G
    return G / np.linalg.norm(G, axis=1, keepdims=True)


def unit_sphere_points(n: int, count: int) -> np.ndarray:
    """Deterministic, nearly uniform points on S^{n-1} (equispaced circle, Fibonacci sphere)."""
    if n == 2:
        th = 2 * math.pi * np.arange(count) / count
        return np.column_stack([np.cos(th), np.sin(th)])
    if n == 3:
        k = np.arange(count) + 0.5
        z = 1 - 2 * k / count
        ph = math.pi * (1 + math.sqrt(5)) * k
        s = np.sqrt(1 - z * z)
        return np.column_stack([s * np.cos(ph), s * np.sin(ph), z])
    raise ValueError("sphere point sets implemented for n in {2, 3}")
