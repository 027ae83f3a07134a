"""High-precision recertification of passages and the explicit tetrahedron construction."""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import mpmath
from mpmath import mp

from .catalog import Polyhedron, builtin
from .projection import silhouette

DEFAULT_DIGITS = 50


class CertificationError(ArithmeticError):
    pass


class CombinatoricsMismatchWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PrecisionContext:
    digits: int = DEFAULT_DIGITS

    def __post_init__(self):
        if self.digits < 30:
            raise ValueError("need at least 30 digits")

    @property
    def tol(self):
        return mpmath.mpf(10) ** (-self.digits + 5)


@dataclass(frozen=True)
class SlackCertificate:
    mu: mpmath.mpf
    slacks: list  # (i, j, 1 - mu * w_j^T v_i)
    min_slack_index: tuple[int, int]


@dataclass(frozen=True)
class Recheck:
    mu: mpmath.mpf
    mu_12: str
    certificate: SlackCertificate
    hull_matches: bool


def floor_decimal(value, places: int = 12) -> str:
    """Round a positive value down to ``places`` decimals, exactly (floats are read exactly)."""
    with mpmath.workdps(60):
        v = mpmath.mpf(value)
        if v < 0:
            raise ValueError("expected a nonnegative value")
        q = int(mpmath.floor(v * mpmath.mpf(10) ** places))
    whole, frac = divmod(q, 10**places)
    return f"{whole}.{frac:0{places}d}"


def _proj_matrix(theta, phi):
    st, ct, sp, cp = mpmath.sin(theta), mpmath.cos(theta), mpmath.sin(phi), mpmath.cos(phi)
    return [[sp, st * cp, ct * cp], [mpmath.mpf(0), ct, -st]]


def _apply(M, pts):
    return [[M[0][0] * p[0] + M[0][1] * p[1] + M[0][2] * p[2], M[1][0] * p[0] + M[1][1] * p[1] + M[1][2] * p[2]] for p in pts]


def hull_mp(points, tol) -> list[int]:
    """Monotone-chain hull in mpmath; turns below ``tol * scale**2`` are treated as collinear."""
    scale = max(max(abs(p[0]), abs(p[1])) for p in points)
    eps = tol * scale * scale
    order = sorted(range(len(points)), key=lambda i: (points[i][0], points[i][1]))

    def chain(seq):
        out = []
        for i in seq:
            while len(out) >= 2:
                o, a = points[out[-2]], points[out[-1]]
                p = points[i]
                cross = (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0])
                if cross > eps:
                    break
                out.pop()
            out.append(i)
        return out

    lower = chain(order)
    upper = chain(list(reversed(order)))
    hull = lower[:-1] + upper[:-1]
    dedup = []
    for i in hull:
        if not dedup or abs(points[i][0] - points[dedup[-1]][0]) + abs(points[i][1] - points[dedup[-1]][1]) > eps:
            dedup.append(i)
    while len(dedup) > 1 and abs(points[dedup[0]][0] - points[dedup[-1]][0]) + abs(points[dedup[0]][1] - points[dedup[-1]][1]) <= eps:
        dedup.pop()
    return dedup


def _faces(points, idx):
    faces = []
    for a, b in zip(idx, idx[1:] + idx[:1]):
        pa, pb = points[a], points[b]
        det = pa[0] * pb[1] - pa[1] * pb[0]
        faces.append(((pb[1] - pa[1]) / det, (pa[0] - pb[0]) / det))
    return faces


def _mu_from(inner, outer_points, hull_idx, tol):
    faces = _faces(outer_points, hull_idx)
    dots = [[w[0] * v[0] + w[1] * v[1] for w in faces] for v in inner]
    best = None
    for i, row in enumerate(dots):
        for j, d in enumerate(row):
            if d > 0 and (best is None or d > best[0]):
                best = (d, (i, j))
    if best is None:
        raise CertificationError("mu is infinite at this passage")
    mu = 1 / best[0]
    slacks = [(i, j, 1 - mu * d) for i, row in enumerate(dots) for j, d in enumerate(row)]
    return mu, SlackCertificate(mu, slacks, best[1])


def recheck(P: Polyhedron, x, ctx: PrecisionContext = PrecisionContext()) -> Recheck:
    """Recompute mu(x) from scratch at ``ctx.digits`` digits.

    ``x`` may hold floats (read exactly), decimal strings, or mpf values.
    """
    with mpmath.workdps(ctx.digits):
        V = [[mpmath.mpf(c) for c in v] for v in P.vertices]
        xs = [mpmath.mpf(c) for c in x]
        u, v, tp, pp, alpha, tq, pq = xs
        outer = _apply(_proj_matrix(tq, pq), V)
        idx = hull_mp(outer, ctx.tol)
        if len(idx) < 3:
            raise CertificationError("degenerate silhouette")
        ca, sa = mpmath.cos(alpha), mpmath.sin(alpha)
        inner = [[ca * p[0] - sa * p[1] + u, sa * p[0] + ca * p[1] + v] for p in _apply(_proj_matrix(tp, pp), V)]
        mu, cert = _mu_from(inner, outer, idx, ctx.tol)
        # values within the working tolerance of a 12-decimal boundary are taken to sit on it
        mu_12 = floor_decimal(mu + ctx.tol)

    matches = True
    try:
        double_idx = silhouette(P, (float(tq), float(pq))).provenance.tolist()
        matches = sorted(double_idx) == sorted(idx)
    except Exception:  # noqa: BLE001 - a failing double hull is itself a mismatch
        matches = False
    if not matches:
        warnings.warn("high-precision silhouette differs from the double-precision one", CombinatoricsMismatchWarning)
    return Recheck(mu, mu_12, cert, matches)


# ------------------------------------------------------------ explicit tetrahedra

def theorem2_tetrahedra():
    s2, s3, s6 = mpmath.sqrt(2), mpmath.sqrt(3), mpmath.sqrt(6)
    z = -mpmath.sqrt(mpmath.mpf(1) / 8)
    T1 = [
        [mpmath.mpf(0), mpmath.mpf(1), z],
        [mpmath.sqrt(mpmath.mpf(3) / 4), mpmath.mpf(-1) / 2, z],
        [-mpmath.sqrt(mpmath.mpf(3) / 4), mpmath.mpf(-1) / 2, z],
        [mpmath.mpf(0), mpmath.mpf(0), mpmath.sqrt(mpmath.mpf(9) / 8)],
    ]
    a, b = (2 - s2) / 4, (2 + s2) / 4
    y1, y2 = (5 * s6 - 2 * s3) / 12, -(2 * s3 + s6) / 12
    T2 = [[a, y1, b], [-a, y1, -b], [b, y2, -a], [-b, y2, a]]
    return T1, T2


def tetra_ratio():
    return mpmath.sqrt(6) / (1 + mpmath.sqrt(2))


@dataclass(frozen=True)
class Theorem2Result:
    mu: mpmath.mpf
    margin: mpmath.mpf
    target: mpmath.mpf
    passage: tuple


def _cross(a, b):
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def theorem2_passage(T1, T2):
    """Passage (u, v, theta_p, phi_p, alpha, theta_q, phi_q) that reproduces the T1/T2 configuration.

    The outer pose (0, pi/2) projects onto the xy-plane; the inner pose and
    in-plane rotation come from the orthogonal map carrying T1 onto the
    centred T2.
    """
    c = [mpmath.fsum(p[k] for p in T2) / 4 for k in range(3)]
    T2c = [[p[k] - c[k] for k in range(3)] for p in T2]
    A = mpmath.matrix(T1[:3]).T
    tol = mpmath.mpf(10) ** (-mp.dps + 10)
    for perm in itertools.permutations(range(4)):
        B = mpmath.matrix([T2c[perm[k]] for k in range(3)]).T
        Q = B * mpmath.inverse(A)
        if mpmath.mnorm(Q * Q.T - mpmath.eye(3), 1) > tol:
            continue
        img = Q * mpmath.matrix(T1[3])
        if max(abs(img[k] - T2c[perm[3]][k]) for k in range(3)) < tol:
            break
    else:
        raise CertificationError("no orthogonal map between the tetrahedra")
    q1 = [Q[0, k] for k in range(3)]
    q2 = [Q[1, k] for k in range(3)]
    d = _cross(q1, q2)
    phi = mpmath.atan2(mpmath.sqrt(d[1] ** 2 + d[2] ** 2), -d[0])
    theta = mpmath.atan2(d[1], d[2])
    M = _proj_matrix(theta, phi)
    r00 = sum(q1[k] * M[0][k] for k in range(3))
    r10 = sum(q2[k] * M[0][k] for k in range(3))
    alpha = mpmath.atan2(r10, r00)
    return (c[0], c[1], theta, phi, alpha, mpmath.mpf(0), mpmath.pi / 2)


def verify_theorem2(ctx: PrecisionContext = PrecisionContext()) -> Theorem2Result:
    """Check that sqrt(6)/(1+sqrt(2)) times T2's shadow lies in T1's shadow (xy-plane)."""
    with mpmath.workdps(ctx.digits):
        T1, T2 = theorem2_tetrahedra()
        outer = [[p[0], p[1]] for p in T1]
        inner = [[p[0], p[1]] for p in T2]
        idx = hull_mp(outer, ctx.tol)
        mu, cert = _mu_from(inner, outer, idx, ctx.tol)
        target = tetra_ratio()
        faces = _faces(outer, idx)
        margin = min(1 - target * (w[0] * v[0] + w[1] * v[1]) for v in inner for w in faces)
        if margin < -ctx.tol:
            raise CertificationError(f"scaled point outside the shadow by {mpmath.nstr(-margin, 5)}")
        if abs(margin) <= ctx.tol:
            margin = mpmath.mpf(0)  # touching, to working precision
        passage = theorem2_passage(T1, T2)
        return Theorem2Result(+mu, +margin, +target, passage)


def theorem2_polyhedron() -> Polyhedron:
    """The outer tetrahedron T1 (identical to the built-in tetrahedron)."""
    return builtin("tetrahedron")


# ------------------------------------------------------------ conjectured values

def rho_poly(x):
    x2 = x * x
    return (((2025 * x2 - 11970) * x2 + 17009) * x2 - 9000) * x2 + 2000


def rho_poly_derivative(x):
    x2 = x * x
    return x * (((16200 * x2 - 71820) * x2 + 68036) * x2 - 18000)


def rho(ctx: PrecisionContext = PrecisionContext()):
    """Smallest positive root of the icosahedron/dodecahedron polynomial."""
    with mpmath.workdps(ctx.digits + 10):
        return mpmath.findroot(rho_poly, mpmath.mpf("1.0108230607529"))


def check_conjecture_values(mu, target: str, ctx: PrecisionContext = PrecisionContext()):
    with mpmath.workdps(ctx.digits):
        mu = mpmath.mpf(mu)
        if mu <= 0:
            raise ValueError("mu must be positive")
        if target == "tetra_ratio":
            return abs(mu - tetra_ratio())
        if target == "cube_ratio":
            return abs(mu - 3 * mpmath.sqrt(2) / 4)
        if target == "rho_poly":
            return abs(rho_poly(mu))
    raise ValueError(f"unknown target {target!r}")
