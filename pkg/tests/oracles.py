"""Independent reference implementations used only by the tests.

Nothing here imports the package's geometry code: hulls come from scipy or
from brute force, projections are rebuilt from the matrix formula, and mu
is found by bisection on containment.
"""
from __future__ import annotations

import itertools

import numpy as np
from scipy.spatial import ConvexHull


def proj(theta, phi):
    return np.array(
        [
            [np.sin(phi), np.sin(theta) * np.cos(phi), np.cos(theta) * np.cos(phi)],
            [0.0, np.cos(theta), -np.sin(theta)],
        ]
    )


def rot(alpha):
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([[c, -s], [s, c]])


def shadows(V, x):
    u, v, tp, pp, a, tq, pq = x
    inner = V @ (rot(a) @ proj(tp, pp)).T + np.array([u, v])
    outer = V @ proj(tq, pq).T
    return inner, outer


def halfplanes(outer):
    """(A, b) with A z <= b describing the scipy hull of ``outer``."""
    hull = ConvexHull(outer)
    return hull.equations[:, :2], -hull.equations[:, 2]


def inside(A, b, pts, slack=0.0):
    return np.all(pts @ A.T <= b + slack, axis=1)


def mu_bisection(V, x, iters=60):
    """Largest t with t * inner inside outer, by bisection; inf if unbounded."""
    inner, outer = shadows(V, x)
    A, b = halfplanes(outer)
    lo, hi = 0.0, 1.0
    while np.all(inside(A, b, hi * inner)):
        lo, hi = hi, 2 * hi
        if hi > 1e12:
            return np.inf
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.all(inside(A, b, mid * inner)):
            lo = mid
        else:
            hi = mid
    return lo


def _cross2(a, b):
    return a[0] * b[1] - a[1] * b[0]


def brute_hull_area(pts, tol=1e-12):
    """Hull area from extreme points found by the O(k^3) triangle test."""
    pts = np.unique(np.round(pts, 14), axis=0)
    k = len(pts)
    extreme = []
    for p in range(k):
        covered = False
        others = [q for q in range(k) if q != p]
        for a, b, c in itertools.combinations(others, 3):
            T = pts[[a, b, c]]
            d1 = _cross2(T[1] - T[0], pts[p] - T[0])
            d2 = _cross2(T[2] - T[1], pts[p] - T[1])
            d3 = _cross2(T[0] - T[2], pts[p] - T[2])
            if (d1 >= -tol and d2 >= -tol and d3 >= -tol) or (d1 <= tol and d2 <= tol and d3 <= tol):
                area = abs(_cross2(T[1] - T[0], T[2] - T[0]))
                if area > tol:
                    covered = True
                    break
        if not covered:
            extreme.append(p)
    E = pts[extreme]
    c = E.mean(axis=0)
    E = E[np.argsort(np.arctan2(E[:, 1] - c[1], E[:, 0] - c[0]))]
    x, y = E[:, 0], E[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def central_diff(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    out = np.empty(len(x))
    for k in range(len(x)):
        e = np.zeros(len(x))
        e[k] = h
        out[k] = (f(x + e) - f(x - e)) / (2 * h)
    return out


def random_direction_lower_bound(c, G, delta, n, rng):
    """max over n random directions (plus s = 0) of min_k c_k + g_k^T s: a lower bound on the subproblem."""
    best = float(np.min(c))
    d = G.shape[1]
    for chunk in range(0, n, 100_000):
        m = min(100_000, n - chunk)
        S = rng.standard_normal((m, d))
        S *= delta / np.linalg.norm(S, axis=1, keepdims=True)
        vals = (c[None, :] + S @ G.T).min(axis=1)
        best = max(best, float(vals.max()))
    return best


def point_in_polygon(poly, pts):
    """Strict winding test for a CCW convex polygon; returns min signed edge distance per point."""
    nxt = np.roll(poly, -1, axis=0)
    e = nxt - poly
    lens = np.linalg.norm(e, axis=1)
    out = []
    for p in np.atleast_2d(pts):
        cr = (e[:, 0] * (p[1] - poly[:, 1]) - e[:, 1] * (p[0] - poly[:, 0])) / lens
        out.append(cr.min())
    return np.array(out)
