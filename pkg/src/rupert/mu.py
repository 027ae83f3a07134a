"""The passage objective mu(x) = min_{i,j} 1 / (w_j^T v_i) and its term gradients."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .catalog import Polyhedron
from .projection import (
    COLLINEAR_TOL,
    DegenerateSilhouetteError,
    PlanarPolygon,
    SingularFaceError,
    face_pose_jacobians,
    projection_derivatives,
    projection_matrix,
    rotation,
    rotation_derivative,
    silhouette,
)

TAU_TIE = 1e-9


class Passage(NamedTuple):
    u: float
    v: float
    theta_p: float
    phi_p: float
    alpha: float
    theta_q: float
    phi_q: float

    @classmethod
    def identity(cls, theta: float = 0.0, phi: float = 0.0) -> "Passage":
        """Inner and outer copies in the same pose: mu == 1."""
        return cls(0.0, 0.0, theta, phi, 0.0, theta, phi)


class UnboundedPassageError(ValueError):
    """No inner vertex has a positive product with any outer face (mu is infinite)."""


@dataclass
class TermTable:
    outer: PlanarPolygon
    inner: np.ndarray
    i: np.ndarray
    j: np.ndarray
    values: np.ndarray
    mu: float
    active: np.ndarray
    tau_tie: float

    @property
    def terms(self) -> list[tuple[int, int, float]]:
        return list(zip(self.i.tolist(), self.j.tolist(), self.values.tolist()))

    def window(self, tau: float) -> np.ndarray:
        """Indices of terms with value <= mu * (1 + tau)."""
        return np.flatnonzero(self.values <= self.mu * (1.0 + tau))


def inner_points(P: Polyhedron, x) -> np.ndarray:
    A = rotation(x[4]) @ projection_matrix(x[2], x[3])
    return P.points @ A.T + np.array([x[0], x[1]])


def evaluate(P: Polyhedron, x, tau_tie: float = TAU_TIE, tol: float = COLLINEAR_TOL) -> TermTable:
    x = np.asarray(x, dtype=float)
    outer = silhouette(P, (x[5], x[6]), tol)
    inner = inner_points(P, x)
    dots = inner @ outer.faces.T  # (m, n)
    ii, jj = np.nonzero(dots > 0)
    if len(ii) == 0:
        raise UnboundedPassageError("mu is infinite at this passage")
    values = 1.0 / dots[ii, jj]
    mu = float(values.min())
    active = np.flatnonzero(values <= mu * (1.0 + tau_tie))
    return TermTable(outer, inner, ii, jj, values, mu, active, tau_tie)


def mu_value(P: Polyhedron, x, tol: float = COLLINEAR_TOL) -> float:
    """mu(x) as a float; ``inf`` when unbounded, ``nan`` when the silhouette degenerates."""
    try:
        outer = silhouette(P, (x[5], x[6]), tol)
    except DegenerateSilhouetteError:
        return float("nan")
    top = (inner_points(P, x) @ outer.faces.T).max()
    return 1.0 / top if top > 0 else float("inf")


def term_gradients(P: Polyhedron, x, table: TermTable, which=None) -> np.ndarray:
    """Gradients of the selected terms (all by default), shape (k, 7)."""
    x = np.asarray(x, dtype=float)
    sel = np.arange(len(table.values)) if which is None else np.asarray(which, dtype=int)
    ii, jj = table.i[sel], table.j[sel]
    vals = table.values[sel]
    w = table.outer.faces[jj]
    V = P.points[ii]

    R = rotation(x[4])
    M = projection_matrix(x[2], x[3])
    dMt, dMp = projection_derivatives(x[2], x[3])
    dR = rotation_derivative(x[4])

    faces_used, inverse = np.unique(jj, return_inverse=True)
    jac = face_pose_jacobians(P, (x[5], x[6]), table.outer.face_pairs[faces_used], table.outer.faces[faces_used])
    jac = jac[inverse]  # (k, 2, 2)

    d = np.empty((len(sel), 7))
    d[:, 0] = w[:, 0]
    d[:, 1] = w[:, 1]
    d[:, 2] = np.einsum("kj,kj->k", w, V @ (R @ dMt).T)
    d[:, 3] = np.einsum("kj,kj->k", w, V @ (R @ dMp).T)
    d[:, 4] = np.einsum("kj,kj->k", w, V @ (dR @ M).T)
    v_i = table.inner[ii]
    d[:, 5] = np.einsum("kj,kj->k", jac[:, :, 0], v_i)
    d[:, 6] = np.einsum("kj,kj->k", jac[:, :, 1], v_i)
    return -(vals**2)[:, None] * d


def term_gradient(P: Polyhedron, x, i: int, j: int, table: TermTable | None = None) -> np.ndarray:
    table = evaluate(P, x) if table is None else table
    hit = np.flatnonzero((table.i == i) & (table.j == j))
    if len(hit) == 0:
        raise KeyError(f"term ({i}, {j}) is not finite at this passage")
    return term_gradients(P, x, table, hit)[0]


def directional_derivative(P: Polyhedron, x, d, tau_tie: float = TAU_TIE) -> float:
    table = evaluate(P, x, tau_tie)
    g = term_gradients(P, x, table, table.active)
    return float((g @ np.asarray(d, dtype=float)).min())


__all__ = [
    "Passage",
    "TermTable",
    "UnboundedPassageError",
    "DegenerateSilhouetteError",
    "SingularFaceError",
    "evaluate",
    "mu_value",
    "term_gradient",
    "term_gradients",
    "directional_derivative",
    "inner_points",
]
