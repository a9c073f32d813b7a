"""Distance-ratio, hyperbolic and quasihyperbolic distances.

The quasihyperbolic distance has no closed form on general domains, so it is
computed by a seed-then-refine solver: a shortest path in a k-nearest-neighbour
graph over seeded interior samples, followed by polyline refinement (vertex
insertion at rho-midpoints plus L-BFGS descent on the interior vertices).
Every reported value is the accurately integrated rho-length of an admissible
polyline, hence an upper bound on k_G.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from . import geometry as geo
from .geometry import Ball, Domain, HalfSpace, DomainError
from .reports import PASS, VIOLATION, VerificationReport, witness


class SegmentExitsDomain(DomainError):
    pass


class NoPathFound(RuntimeError):
    pass


class MetricKind(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    J = "distance-ratio-j"
    K = "quasihyperbolic-k"
    HYP_BALL = "hyperbolic-ball"
    HYP_HALFSPACE = "hyperbolic-halfspace"


# -- closed forms --------------------------------------------------------------


def r_quantity(domain: Domain, x, y) -> float:
    """|x - y| / min(d(x), d(y))."""
    return float(geo.r_quantity_arrays(domain, x, y))


def j_dist(domain: Domain, x, y) -> float:
    return math.log1p(r_quantity(domain, x, y))


def hyp_dist_ball(x, y) -> float:
    x, y = np.asarray(x, float), np.asarray(y, float)
    nx, ny = x @ x, y @ y
    if not (nx < 1 and ny < 1):
        raise DomainError("point outside unit ball")
    s = np.linalg.norm(x - y) / math.sqrt((1 - nx) * (1 - ny))
    return 2.0 * math.asinh(s)


def hyp_dist_halfspace(x, y) -> float:
    x, y = np.asarray(x, float), np.asarray(y, float)
    if not (x[-1] > 0 and y[-1] > 0):
        raise DomainError("point outside half-space")
    diff = x - y
    # arccosh(1 + a) written to keep precision for small a
    a = (diff @ diff) / (2 * x[-1] * y[-1])
    return math.log1p(a + math.sqrt(a * (a + 2)))


# -- densities ---------------------------------------------------------------


def _check_kind(domain: Domain, kind: MetricKind):
    kind = MetricKind(kind)
    if kind is MetricKind.HYP_BALL and not isinstance(domain, Ball):
        raise DomainError("hyperbolic-ball density needs a Ball domain")
    if kind is MetricKind.HYP_HALFSPACE and not isinstance(domain, HalfSpace):
        raise DomainError("hyperbolic-halfspace density needs a HalfSpace domain")
    if kind is MetricKind.J:
        raise DomainError("distance-ratio metric has no density")
    return kind


def density_and_grad(domain: Domain, kind: MetricKind, X, with_grad=True):
    """Density values (and gradients) at an array of points; d <= tol gives nan."""
    X = np.asarray(X, float)
    if kind is MetricKind.EUCLIDEAN:
        return np.ones(X.shape[:-1]), np.zeros(X.shape)
    if kind is MetricKind.K:
        if with_grad:
            d, g = domain.sdist_grad(X)
        else:
            d, g = domain.sdist(X), None
        bad = ~(d > domain.interior_tol)
        d = np.where(bad, np.nan, d)
        rho = 1.0 / d
        return rho, (None if g is None else -(g / d[..., None]) / d[..., None])
    if kind is MetricKind.HYP_BALL:
        c = np.array(domain.center)
        r = domain.radius
        Y = X - c
        q = r * r - (Y * Y).sum(-1)
        q = np.where(q > 0, q, np.nan)
        rho = 2 * r / q
        return rho, 4 * r * Y / (q * q)[..., None]
    # half-space: 1 / x_n
    xn = np.where(X[..., -1] > 0, X[..., -1], np.nan)
    g = np.zeros(X.shape)
    g[..., -1] = -1.0 / (xn * xn)
    return 1.0 / xn, g


def density(domain: Domain, kind: MetricKind, x) -> float:
    kind = _check_kind(domain, kind)
    x = np.asarray(x, float)
    domain.dist(x)
    rho, _ = density_and_grad(domain, kind, x[None], with_grad=False)
    return float(rho[0])


# -- rho-length quadrature -----------------------------------------------------

_GL_ORDER = 6
_STEP_FACTOR = 0.2
_MAX_STEPS = 200_000


def _gauss(order):
    s, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (s + 1.0), 0.5 * w


def _march(domain: Domain, kind: MetricKind, A, B, factor=_STEP_FACTOR, order=_GL_ORDER,
           panels=False):
    """Integrate the density along segments A[i] -> B[i].

    Panels are laid out by marching: a panel starting at p has length at most
    factor * d(p), so each panel sits inside the ball B(p, d(p)) and the
    whole segment is certified interior.  Each segment is marched from both
    ends towards its midpoint, so that points close to either endpoint are
    represented with full relative precision.  Returns (integrals, ok[, panel
    table with columns segment, t0, h, integral]).
    """
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    m = len(A)
    M = 0.5 * (A + B)
    res = _march_half(domain, kind, np.concatenate([A, B]), np.concatenate([M, M]),
                      factor, order, panels)
    total = res[0][:m] + res[0][m:]
    ok = res[1][:m] & res[1][m:]
    if not panels:
        return total, ok
    tab = res[2].copy()
    first = tab[:, 0] < m
    tab[:, 2] *= 0.5
    tab[first, 1] *= 0.5
    tab[~first, 1] = 1.0 - 0.5 * tab[~first, 1] - tab[~first, 2]
    tab[~first, 0] -= m
    return total, ok, tab


def _march_half(domain, kind, A, B, factor, order, panels):
    D = B - A
    L = np.linalg.norm(D, axis=-1)
    m = len(A)
    total = np.zeros(m)
    ok = np.ones(m, dtype=bool)
    t = np.zeros(m)
    s_gl, w_gl = _gauss(order)
    active = np.flatnonzero(L > 0)
    table = [] if panels else None
    steps = 0
    while active.size:
        steps += 1
        P = A[active] + t[active, None] * D[active]
        d = domain.sdist(P)
        bad = ~(d > domain.interior_tol)
        if steps > _MAX_STEPS:
            bad[:] = True
        if np.any(bad):
            ok[active[bad]] = False
            total[active[bad]] = np.nan
            active = active[~bad]
            d = d[~bad]
            if not active.size:
                break
        Lm = L[active]
        rest = 1.0 - t[active]
        last = factor * d / Lm >= rest
        h = np.where(last, rest, factor * d / Lm)
        nodes = t[active, None] + h[:, None] * s_gl
        X = A[active, None, :] + nodes[..., None] * D[active, None, :]
        rho, _ = density_and_grad(domain, kind, X, with_grad=False)
        piece = Lm * h * (rho @ w_gl)
        total[active] += piece
        if panels:
            table.append(np.column_stack([active, t[active], h, piece]))
        t[active] += h
        active = active[~last]
    bad = ~np.isfinite(total)
    ok &= ~bad
    if panels:
        tab = np.concatenate(table) if table else np.zeros((0, 4))
        return total, ok, tab
    return total, ok


def segment_rho_lengths(domain: Domain, kind: MetricKind, A, B, strict=True):
    vals, ok = _march(domain, MetricKind(kind), A, B)
    if strict and not np.all(ok):
        raise SegmentExitsDomain("segment leaves the domain or touches its boundary")
    return np.where(ok, vals, np.inf)


@dataclass(frozen=True)
class Polyline:
    vertices: np.ndarray

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vertices, float))
        if len(V) < 1:
            raise ValueError("polyline needs at least one vertex")
        object.__setattr__(self, "vertices", V)

    def validate(self, domain: Domain, samples: int = 16):
        V = self.vertices
        if not np.all(domain.contains(V)):
            raise SegmentExitsDomain("polyline vertex outside the domain")
        if len(V) > 1:
            t = (np.arange(samples) + 1.0) / (samples + 1.0)
            P = V[:-1, None, :] + t[:, None] * (V[1:] - V[:-1])[:, None, :]
            if not np.all(domain.contains(P)):
                raise SegmentExitsDomain("polyline segment leaves the domain")
            # sampling alone misses isolated boundary points such as a puncture
            if not np.all(_march(domain, MetricKind.K, V[:-1], V[1:])[1]):
                raise SegmentExitsDomain("polyline segment touches the boundary")
        return self

    @property
    def euclidean_length(self) -> float:
        return float(np.linalg.norm(np.diff(self.vertices, axis=0), axis=1).sum())


def rho_length(domain: Domain, kind: MetricKind, path) -> float:
    """Integral of the density along a polyline (relative quadrature error <= 1e-6)."""
    kind = _check_kind(domain, kind)
    V = path.vertices if isinstance(path, Polyline) else np.atleast_2d(np.asarray(path, float))
    domain.dist(V)
    if len(V) < 2:
        return 0.0
    return float(segment_rho_lengths(domain, kind, V[:-1], V[1:]).sum())


# -- quasihyperbolic solver ------------------------------------------------------


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-4
    max_iters: int = 200
    seeding: str = "graph"
    nodes: int | None = None
    knn: int = 12
    seed: int = 0
    max_vertices: int = 129
    descent_iters: int = 200
    R: float = geo.TRUNCATION_R
    delta: float = geo.TRUNCATION_DELTA

    def graph_nodes(self, dim):
        if self.nodes is not None:
            return self.nodes
        return 2000 if dim == 2 else 8000


@dataclass
class GeodesicResult:
    distance: float
    path: Polyline
    iterations: int
    converged: bool
    residual: float

    def to_record(self, with_path=False):
        rec = {"value": self.distance, "converged": self.converged,
               "residual": self.residual, "iterations": self.iterations}
        if with_path:
            rec["path"] = self.path.vertices.tolist()
        return rec


_GRAPH_CACHE: dict = {}


def _seed_graph(domain: Domain, kind: MetricKind, opts: SolverOptions):
    key = (domain, kind, opts.graph_nodes(domain.dim), opts.knn, opts.seed, opts.R, opts.delta)
    try:
        return _GRAPH_CACHE[key]
    except (KeyError, TypeError):
        pass
    nodes = geo.sample_interior(domain, opts.graph_nodes(domain.dim), opts.seed, opts.R, opts.delta)
    tree = cKDTree(nodes)
    k = min(opts.knn + 1, len(nodes))
    _, nb = tree.query(nodes, k=k)
    I = np.repeat(np.arange(len(nodes)), k - 1)
    J = nb[:, 1:].ravel()
    lo, hi = np.minimum(I, J), np.maximum(I, J)
    pairs = np.unique(np.column_stack([lo, hi]), axis=0)
    w, ok = _edge_weights(domain, kind, nodes[pairs[:, 0]], nodes[pairs[:, 1]])
    graph = (nodes, tree, pairs[ok], w[ok])
    try:
        _GRAPH_CACHE[key] = graph
    except TypeError:
        pass
    return graph


def _edge_weights(domain, kind, A, B, samples=16):
    t = (np.arange(samples) + 1.0) / (samples + 1.0)
    P = A[:, None, :] + t[:, None] * (B - A)[:, None, :]
    ok = domain.contains(P).all(axis=1)
    w = np.full(len(A), np.inf)
    if np.any(ok):
        vals, good = _march(domain, kind, A[ok], B[ok])
        idx = np.flatnonzero(ok)
        w[idx] = vals
        ok[idx[~good]] = False
    return w, ok


def _graph_path(domain, kind, x, y, opts):
    nodes, tree, pairs, w = _seed_graph(domain, kind, opts)
    N = len(nodes)
    k = min(opts.knn, N)
    extra_i, extra_j, extra_w = [], [], []
    for idx, p in ((N, x), (N + 1, y)):
        _, nb = tree.query(p, k=k)
        nb = np.atleast_1d(nb)
        ew, ok = _edge_weights(domain, kind, np.repeat(p[None], len(nb), 0), nodes[nb])
        extra_i += [idx] * int(ok.sum())
        extra_j += list(nb[ok])
        extra_w += list(ew[ok])
    ew, ok = _edge_weights(domain, kind, x[None], y[None])
    if ok[0]:
        extra_i.append(N)
        extra_j.append(N + 1)
        extra_w.append(ew[0])
    I = np.concatenate([pairs[:, 0], extra_i]).astype(int)
    J = np.concatenate([pairs[:, 1], extra_j]).astype(int)
    W = np.concatenate([w, extra_w])
    G = coo_matrix((W, (I, J)), shape=(N + 2, N + 2)).tocsr()
    dist, pred = dijkstra(G, directed=False, indices=N, return_predecessors=True)
    if not np.isfinite(dist[N + 1]):
        raise NoPathFound("seed graph disconnected; enlarge sampling")
    allpts = np.vstack([nodes, x, y])
    path = [N + 1]
    while path[-1] != N:
        path.append(pred[path[-1]])
    return allpts[path[::-1]]


def _energy_grad(domain, kind, Q, ia, ib, sid, s, w):
    A, B = Q[ia], Q[ib]
    D = B - A
    L = np.linalg.norm(D, axis=1)
    U = np.divide(D, L[:, None], out=np.zeros_like(D), where=L[:, None] > 0)
    X = A[sid] + s[:, None] * D[sid]
    with np.errstate(over="ignore"):
        rho, grho = density_and_grad(domain, kind, X)
    # at extreme scales (d ~ 1e-300) the density gradient overflows; skip descent there
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(grho))):
        return None, None
    S = np.bincount(sid, w * rho, minlength=len(ia))
    E = float(L @ S)
    Wg = (w * L[sid])[:, None] * grho
    nd = Q.shape[1]
    gA = -U * S[:, None]
    gB = U * S[:, None]
    for c in range(nd):
        gA[:, c] += np.bincount(sid, (1 - s) * Wg[:, c], minlength=len(ia))
        gB[:, c] += np.bincount(sid, s * Wg[:, c], minlength=len(ia))
    G = np.zeros_like(Q)
    np.add.at(G, ia, gA)
    np.add.at(G, ib, gB)
    return E, G


def _descend(domain, kind, Q, free, ia, ib, maxiter):
    """L-BFGS on the free vertices with panels frozen at the starting geometry."""
    _, ok, tab = _march(domain, kind, Q[ia], Q[ib], factor=0.25, order=4, panels=True)
    if not np.all(ok) or not np.any(free) or maxiter <= 0:
        return Q
    s_gl, w_gl = _gauss(4)
    sid = np.repeat(tab[:, 0].astype(int), len(s_gl))
    s = (tab[:, 1:2] + tab[:, 2:3] * s_gl).ravel()
    w = (tab[:, 2:3] * w_gl).ravel()
    F = np.flatnonzero(free)
    scale = np.maximum(domain.sdist(Q[F]), 1e-300)
    nd = Q.shape[1]
    E0, _ = _energy_grad(domain, kind, Q, ia, ib, sid, s, w)
    if E0 is None:
        return Q
    big = 1e6 * (abs(E0) + 1.0)

    def fun(u):
        P = Q.copy()
        P[F] = Q[F] + scale[:, None] * u.reshape(-1, nd)
        E, G = _energy_grad(domain, kind, P, ia, ib, sid, s, w)
        if E is None:
            return big, np.zeros_like(u)
        return E, (G[F] * scale[:, None]).ravel()

    res = minimize(fun, np.zeros(len(F) * nd), jac=True, method="L-BFGS-B",
                   options={"maxiter": maxiter, "ftol": 1e-13, "gtol": 1e-12})
    P = Q.copy()
    P[F] = Q[F] + scale[:, None] * res.x.reshape(-1, nd)
    return P


def _rho_midpoints(tab, nseg):
    """Parameter along each segment where half of its rho-length is reached."""
    order = np.lexsort((tab[:, 1], tab[:, 0]))
    tab = tab[order]
    seg = tab[:, 0].astype(int)
    tot = np.bincount(seg, tab[:, 3], minlength=nseg)
    cum = np.cumsum(tab[:, 3])
    start = np.concatenate([[0.0], cum[:-1]])
    first = np.searchsorted(seg, np.arange(nseg))
    base = start[np.minimum(first, len(start) - 1)] if len(start) else np.zeros(nseg)
    local = start - base[seg]
    half = 0.5 * tot[seg]
    hit = (local <= half) & (local + tab[:, 3] >= half)
    mid = np.full(nseg, 0.5)
    frac = np.divide(half - local, tab[:, 3], out=np.zeros(len(tab)), where=tab[:, 3] > 0)
    tm = tab[:, 1] + np.clip(frac, 0, 1) * tab[:, 2]
    idx = np.flatnonzero(hit)
    # first panel that crosses the half-way mark
    seen = np.zeros(nseg, dtype=bool)
    for i in idx:
        if not seen[seg[i]]:
            mid[seg[i]] = tm[i]
            seen[seg[i]] = True
    return mid


def _assemble(polys):
    counts = [len(p) for p in polys]
    Q = np.vstack(polys)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    ia, ib, free = [], [], np.zeros(len(Q), dtype=bool)
    for st, c in zip(starts, counts):
        ia.extend(range(st, st + c - 1))
        ib.extend(range(st + 1, st + c))
        free[st + 1: st + c - 1] = True
    return Q, np.array(ia, int), np.array(ib, int), free, starts, counts


def _lengths(domain, kind, polys):
    Q, ia, ib, _, starts, counts = _assemble(polys)
    vals, ok = _march(domain, kind, Q[ia], Q[ib])
    out = []
    pos = 0
    for c in counts:
        seg = slice(pos, pos + c - 1)
        out.append(float(vals[seg].sum()) if np.all(ok[seg]) else math.inf)
        pos += c - 1
    return out


def _insert(domain, kind, polys, cap):
    Q, ia, ib, _, starts, counts = _assemble(polys)
    _, ok, tab = _march(domain, kind, Q[ia], Q[ib], panels=True)
    mid = _rho_midpoints(tab, len(ia))
    M = Q[ia] + mid[:, None] * (Q[ib] - Q[ia])
    out, pos = [], 0
    for P, c in zip(polys, counts):
        if c >= cap or c < 2:
            out.append(P)
        else:
            V = np.empty((2 * c - 1, P.shape[1]))
            V[0::2] = P
            V[1::2] = M[pos: pos + c - 1]
            out.append(V)
        pos += c - 1
    return out


def refine_polylines(domain: Domain, kind: MetricKind, polys, opts: SolverOptions):
    """Jointly refine independent polylines; returns a GeodesicResult per polyline."""
    polys = [np.array(p, float) for p in polys]
    L = _lengths(domain, kind, polys)
    if any(not math.isfinite(v) for v in L):
        raise SegmentExitsDomain("seed polyline leaves the domain")
    iters = [0] * len(polys)
    resid = [math.inf] * len(polys)
    done = [len(p) < 2 or L[i] == 0.0 for i, p in enumerate(polys)]
    for i in range(len(polys)):
        if done[i]:
            resid[i] = 0.0
    for _ in range(opts.max_iters):
        act = [i for i in range(len(polys)) if not done[i]]
        if not act:
            break
        cand = _insert(domain, kind, [polys[i] for i in act], opts.max_vertices)
        Q, ia, ib, free, starts, counts = _assemble(cand)
        Q = _descend(domain, kind, Q, free, ia, ib, opts.descent_iters)
        cand = [Q[st: st + c] for st, c in zip(starts, counts)]
        Lc = _lengths(domain, kind, cand)
        for i, P, lc in zip(act, cand, Lc):
            iters[i] += 1
            if math.isfinite(lc) and lc <= L[i]:
                resid[i] = (L[i] - lc) / lc if lc > 0 else 0.0
                polys[i], L[i] = P, lc
            else:
                resid[i] = 0.0
            if resid[i] < opts.tol:
                done[i] = True
    return [GeodesicResult(L[i], Polyline(polys[i]), iters[i], bool(done[i]), float(resid[i]))
            for i in range(len(polys))]


def quasihyp_dist(domain: Domain, x, y, opts: SolverOptions | None = None,
                  kind: MetricKind = MetricKind.K) -> GeodesicResult:
    """Upper bound on the quasihyperbolic (or other density) distance with its polyline."""
    opts = opts or SolverOptions()
    kind = _check_kind(domain, kind)
    x, y = np.asarray(x, float), np.asarray(y, float)
    domain.dist(np.vstack([x, y]))
    if np.array_equal(x, y):
        return GeodesicResult(0.0, Polyline(x[None]), 0, True, 0.0)
    if opts.seeding == "straight":
        seed = np.vstack([x, y])
        if not np.all(_march(domain, kind, x[None], y[None])[1]):
            seed = _graph_path(domain, kind, x, y, opts)
    else:
        seed = _graph_path(domain, kind, x, y, opts)
    return refine_polylines(domain, kind, [seed], opts)[0]


def quasihyp_dist_many(domain: Domain, X, Y, opts: SolverOptions | None = None,
                       kind: MetricKind = MetricKind.K, chunk: int = 512):
    """Batch version of quasihyp_dist.

    Straight segments are used as seeds wherever admissible (always for convex
    domains); other pairs fall back to graph seeding.  Polylines are refined
    jointly in chunks, which is what makes 10^4-pair suites affordable.
    """
    opts = opts or SolverOptions(seeding="straight")
    kind = _check_kind(domain, kind)
    X, Y = np.atleast_2d(np.asarray(X, float)), np.atleast_2d(np.asarray(Y, float))
    domain.dist(X)
    domain.dist(Y)
    _, ok = _march(domain, kind, X, Y)
    seeds = []
    for i in range(len(X)):
        if np.array_equal(X[i], Y[i]):
            seeds.append(X[i][None])
        elif ok[i]:
            seeds.append(np.vstack([X[i], Y[i]]))
        else:
            seeds.append(_graph_path(domain, kind, X[i], Y[i], opts))
    out = []
    for st in range(0, len(seeds), chunk):
        out.extend(refine_polylines(domain, kind, seeds[st: st + chunk], opts))
    return out


# -- k versus j inequality suite ----------------------------------------------


def check_jk_inequalities(domain: Domain, X, Y, opts: SolverOptions | None = None,
                          margin: float = 1e-9) -> VerificationReport:
    """k >= j >= log(1 + |y-x|/d(x)) on all pairs; k <= 2j when |y-x| <= d(x)/2."""
    opts = opts or SolverOptions(seeding="straight", max_iters=3, descent_iters=30)
    X, Y = np.atleast_2d(np.asarray(X, float)), np.atleast_2d(np.asarray(Y, float))
    res = quasihyp_dist_many(domain, X, Y, opts)
    k = np.array([r.distance for r in res])
    rq = np.array([r.residual for r in res])
    dx = domain.dist(X)
    dy = domain.dist(Y)
    e = np.linalg.norm(X - Y, axis=1)
    j = np.log1p(e / np.minimum(dx, dy))
    low = np.log1p(e / dx)
    viol_b = (k < j - margin * np.maximum(j, 1)) | (j < low - margin * np.maximum(low, 1))
    near = e <= dx / 2
    viol_a = near & (k > 2 * j * (1 + rq) + margin)
    wit = [witness(X[i], Y[i], k=k[i], j=j[i], lower=low[i], kind="b")
           for i in np.flatnonzero(viol_b)[:10]]
    wit += [witness(X[i], Y[i], k=k[i], two_j=2 * j[i], kind="a")
            for i in np.flatnonzero(viol_a)[:10]]
    ratio_a = np.where(near & (j > 0), k / np.where(j > 0, 2 * j, 1), 0)
    nv = int(viol_a.sum() + viol_b.sum())
    return VerificationReport(
        check_name="jk-inequalities",
        params={"domain": domain.spec, "pairs": len(X), "near_pairs": int(near.sum())},
        n_samples=len(X),
        sup=float(ratio_a.max()) if len(X) else math.nan,
        inf=float(np.min(k - j)) if len(X) else math.nan,
        witnesses=wit,
        residuals={"max_solver_residual": float(rq.max()) if len(rq) else 0.0,
                   "violations_a": int(viol_a.sum()), "violations_b": int(viol_b.sum())},
        verdict="no-violations" if nv == 0 else f"{nv} violations",
        status=PASS if nv == 0 else VIOLATION,
    )
