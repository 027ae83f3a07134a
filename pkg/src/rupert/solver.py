"""Nonsmooth trust-region ascent on mu(x) and min-norm stationarity certificates.

Each iteration linearizes every finite term mu_ij at x_k and maximizes the
resulting piecewise-linear model over the ball ||s|| <= delta_k.  The step
x_k + 2^-n s_k uses the smallest n that does not decrease mu, and the radius
becomes 2 * 2^-n * delta_k, so it grows after full steps and shrinks when
backtracking is needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .catalog import Polyhedron
from .mu import TAU_TIE, evaluate, mu_value, term_gradients
from .projection import DegenerateSilhouetteError, SingularFaceError


class SubproblemError(ArithmeticError):
    """The subproblem did not reach its duality-gap tolerance."""


@dataclass(frozen=True)
class SolverConfig:
    delta0: float = 0.1
    delta_min: float = 1e-12
    n_max: int = 50
    dual_tol: float = 1e-14
    max_iters: int = 20000
    tau_model: float = math.inf
    tau_tie: float = TAU_TIE
    stall_limit: int = 20

    def __post_init__(self):
        if not self.delta0 > self.delta_min > 0:
            raise ValueError("need delta0 > delta_min > 0")
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")


@dataclass(frozen=True)
class Iterate:
    x: np.ndarray
    mu: float
    delta: float
    k: int = 0
    stall: int = 0
    status: str = "running"


@dataclass(frozen=True)
class Certificate:
    norm: float
    lam: np.ndarray
    active_count: int
    direction: np.ndarray = field(repr=False, default=None)
    gradient_norms: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class SubproblemResult:
    s: np.ndarray
    model_value: float
    lam: np.ndarray
    dual_value: float

    def __iter__(self):
        return iter((self.s, self.model_value, self.lam))


# ------------------------------------------------------------ subproblem

def dual_objective(c, G, lam, delta) -> float:
    return float(c @ lam + delta * np.linalg.norm(G.T @ lam))


def _null_space(D: np.ndarray, d: int) -> np.ndarray:
    if len(D) == 0:
        return np.eye(d)
    _, sv, vt = np.linalg.svd(D)
    rank = int(np.sum(sv > 1e-12 * max(1.0, sv[0])))
    return vt[rank:].T


def _multipliers(G_W: np.ndarray, s: np.ndarray, on_ball: bool) -> np.ndarray:
    """lambda on the working set with sum 1 and G_W^T lambda parallel to s."""
    k = len(G_W)
    if on_ball:
        A = np.zeros((G_W.shape[1] + 1, k + 1))
        A[:-1, :k] = G_W.T
        A[:-1, k] = -s
        A[-1, :k] = 1.0
    else:
        A = np.zeros((G_W.shape[1] + 1, k))
        A[:-1] = G_W.T
        A[-1] = 1.0
    b = np.zeros(A.shape[0])
    b[-1] = 1.0
    sol = np.linalg.lstsq(A, b, rcond=None)[0]
    return sol[:k]


def _active_set(c: np.ndarray, G: np.ndarray, delta: float, max_iter: int):
    K, d = G.shape
    s = np.zeros(d)
    W = [int(np.argmin(c))]
    lam_W = np.ones(1)
    for _ in range(max_iter):
        k0 = W[0]
        D = G[W[1:]] - G[k0]
        N = _null_space(D, d)
        s_p = s - N @ (N.T @ s)
        h = N @ (N.T @ G[k0])
        hn = np.linalg.norm(h)
        if hn > 1e-15 * max(1.0, np.linalg.norm(G[k0])):
            r = math.sqrt(max(delta * delta - s_p @ s_p, 0.0))
            target = s_p + (r / hn) * h
        else:
            target = s
        p = target - s

        tau = c[k0] + G[k0] @ s
        slack = np.maximum(c + G @ s - tau, 0.0)
        rate = (G - G[k0]) @ p
        rate[W] = 0.0
        scale = np.abs(G).max() * max(np.linalg.norm(p), 1e-300)
        blocking = rate < -1e-14 * scale
        t, hit = 1.0, -1
        if blocking.any():
            cand = np.flatnonzero(blocking)
            ts = slack[cand] / -rate[cand]
            m = int(np.argmin(ts))
            if ts[m] < 1.0:
                t, hit = float(ts[m]), int(cand[m])
        s = s + t * p
        nrm = np.linalg.norm(s)
        if nrm > delta:
            s *= delta / nrm
        if hit >= 0:
            W.append(hit)
            continue

        on_ball = np.linalg.norm(s) >= delta * (1 - 1e-10) and hn > 0
        lam_W = _multipliers(G[W], s, on_ball)
        worst = int(np.argmin(lam_W))
        if lam_W[worst] < -1e-12 and len(W) > 1:
            W.pop(worst)
            continue
        break
    else:
        raise SubproblemError("active-set iteration limit reached")
    lam = np.zeros(K)
    lam[W] = np.maximum(lam_W, 0.0)
    lam /= lam.sum()
    return s, lam


def subproblem(c, G, delta: float, dual_tol: float = 1e-14, max_iter: int | None = None) -> SubproblemResult:
    """Maximize min_k (c_k + g_k^T s) over ||s|| <= delta.

    Returns the maximizer, its model value, and simplex weights lambda whose
    dual value c^T lambda + delta ||G^T lambda|| brackets the model value from
    above.  Raises :class:`SubproblemError` if the bracket is wider than
    ``dual_tol * max(1, |dual|, delta * max|g|)``.
    """
    c = np.asarray(c, dtype=float)
    G = np.atleast_2d(np.asarray(G, dtype=float))
    if len(c) == 0:
        raise ValueError("subproblem needs at least one term")
    if delta <= 0:
        raise ValueError("delta must be positive")

    # terms that exceed the best upper bound everywhere on the ball never bind
    gn = np.linalg.norm(G, axis=1)
    upper = np.min(c + delta * gn)
    keep = np.flatnonzero(c - delta * gn <= upper + 1e-12 * max(1.0, abs(upper)))
    cs, Gs = c[keep], G[keep]

    max_iter = max_iter or 50 + 10 * len(keep)
    s, lam_k = _active_set(cs, Gs, delta, max_iter)
    lam = np.zeros(len(c))
    lam[keep] = lam_k
    model = float(np.min(c + G @ s))
    dual = dual_objective(c, G, lam, delta)
    # the model sums terms of size delta*|g|, so rounding alone reaches eps times that
    if dual - model > dual_tol * max(1.0, abs(dual), delta * gn.max()):
        raise SubproblemError(f"duality gap {dual - model:.3e} above tolerance")
    return SubproblemResult(s, model, lam, dual)


# ------------------------------------------------------------ min-norm point

def min_norm_point(points, tol: float = 1e-14, max_iter: int = 1000) -> tuple[np.ndarray, np.ndarray]:
    """Wolfe's algorithm: the point of smallest norm in conv(points).

    Returns (x, lam) with x = lam @ points and lam on the simplex.
    """
    Pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(Pts)
    sq = np.einsum("ij,ij->i", Pts, Pts)
    big = max(sq.max(), 1e-300)
    S = [int(np.argmin(sq))]
    lam = np.ones(1)
    x = Pts[S[0]].copy()
    for _ in range(max_iter):
        proj = Pts @ x
        k = int(np.argmin(proj))
        if x @ x - proj[k] <= tol * big or k in S:
            break
        S.append(k)
        lam = np.append(lam, 0.0)
        while True:
            Q = Pts[S]
            m = len(S)
            A = np.zeros((m + 1, m + 1))
            A[:m, :m] = Q @ Q.T
            A[:m, m] = 1.0
            A[m, :m] = 1.0
            b = np.zeros(m + 1)
            b[m] = 1.0
            mu = np.linalg.lstsq(A, b, rcond=None)[0][:m]
            if np.all(mu > 1e-15):
                lam = mu
                break
            neg = mu <= 1e-15
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(neg, lam / (lam - mu), np.inf)
            theta = min(1.0, float(np.min(ratios)))
            lam = lam + theta * (mu - lam)
            drop = lam <= 1e-15
            drop[int(np.argmin(np.where(neg, ratios, np.inf)))] = True
            S = [s for s, dr in zip(S, drop) if not dr]
            lam = lam[~drop]
            lam /= lam.sum()
            if len(S) == 1:
                lam = np.ones(1)
                break
        x = lam @ Pts[S]
    full = np.zeros(n)
    full[S] = lam
    return full @ Pts, full


# ------------------------------------------------------------ iterations

def stationarity(P: Polyhedron, x, tau_tie: float = TAU_TIE) -> Certificate:
    table = evaluate(P, x, tau_tie)
    G = term_gradients(P, x, table, table.active)
    direction, lam = min_norm_point(G)
    return Certificate(float(np.linalg.norm(direction)), lam, len(table.active), direction, np.linalg.norm(G, axis=1))


def _line_search(P: Polyhedron, x: np.ndarray, mu: float, s: np.ndarray, n_max: int, floor: float = 0.0):
    """Smallest n <= n_max with mu(x + 2^-n s) >= mu; returns (n, x_new, mu_new) or None."""
    t = 1.0
    for n in range(n_max + 1):
        if t * np.linalg.norm(s) < floor:
            return None
        x_new = x + t * s
        m = mu_value(P, x_new)
        if math.isfinite(m) and m >= mu:
            return n, x_new, m
        t *= 0.5
    return None


def step(P: Polyhedron, it: Iterate, cfg: SolverConfig = SolverConfig()) -> Iterate:
    x = np.asarray(it.x, dtype=float)
    shrink = replace(it, delta=it.delta / 2, k=it.k + 1, stall=0)
    try:
        table = evaluate(P, x, cfg.tau_tie)
        sel = None if math.isinf(cfg.tau_model) else table.window(cfg.tau_model)
        G = term_gradients(P, x, table, sel)
        c = table.values if sel is None else table.values[sel]
        res = subproblem(c, G, it.delta, cfg.dual_tol)
    except (SubproblemError, SingularFaceError, DegenerateSilhouetteError):
        return shrink
    if not np.any(res.s):
        return shrink
    found = _line_search(P, x, it.mu, res.s, cfg.n_max)
    if found is None:
        return shrink
    n, x_new, mu_new = found
    delta = 2.0 * 2.0**-n * it.delta
    stall = 0
    if mu_new == it.mu:
        # equal-value steps never grow the radius; a long streak shrinks it
        stall = it.stall + 1
        delta = min(delta, it.delta)
        if stall >= cfg.stall_limit:
            delta = it.delta / 2
    return Iterate(x_new, mu_new, delta, it.k + 1, stall)


def run(P: Polyhedron, x0, cfg: SolverConfig = SolverConfig(), callback=None) -> tuple[Iterate, Certificate]:
    x0 = np.asarray(x0, dtype=float)
    mu0 = mu_value(P, x0)
    if not math.isfinite(mu0):
        raise ValueError("starting passage has no finite mu")
    it = Iterate(x0, mu0, cfg.delta0)
    if callback is not None:
        callback(it)
    while it.delta >= cfg.delta_min and it.k < cfg.max_iters:
        it = step(P, it, cfg)
        if callback is not None:
            callback(it)
    status = "converged" if it.delta < cfg.delta_min else "budget"
    it = replace(it, status=status)
    return it, stationarity(P, it.x, cfg.tau_tie)


def simple_ascent(P: Polyhedron, x0, cfg: SolverConfig = SolverConfig(), callback=None) -> Iterate:
    """Steepest ascent along the min-norm convex combination of tight gradients."""
    x = np.asarray(x0, dtype=float)
    mu = mu_value(P, x)
    if not math.isfinite(mu):
        raise ValueError("starting passage has no finite mu")
    it = Iterate(x, mu, cfg.delta0)
    k = 0
    while k < cfg.max_iters:
        try:
            cert = stationarity(P, x, cfg.tau_tie)
        except (SingularFaceError, DegenerateSilhouetteError):
            break
        if cert.norm <= cfg.dual_tol * max(1.0, cert.gradient_norms.max()):
            break
        found = _line_search(P, x, mu, cert.direction, cfg.n_max, floor=cfg.delta_min)
        if found is None:
            break
        n, x, mu_new = found
        k += 1
        it = Iterate(x, mu_new, 2.0**-n * float(np.linalg.norm(cert.direction)), k)
        mu = mu_new
        if callback is not None:
            callback(it)
    return replace(it, status="converged" if k < cfg.max_iters else "budget")
