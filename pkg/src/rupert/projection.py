"""Orthogonal projections of polyhedra onto the plane and their silhouettes."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .catalog import Polyhedron

COLLINEAR_TOL = 1e-12


class DegenerateSilhouetteError(ValueError):
    pass


class SingularFaceError(ArithmeticError):
    pass


class Pose(NamedTuple):
    theta: float
    phi: float


def projection_matrix(theta: float, phi: float) -> np.ndarray:
    """Rotate R^3 by (theta, phi) and keep the first two coordinates."""
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    return np.array([[sp, st * cp, ct * cp], [0.0, ct, -st]])


def projection_derivatives(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Entrywise d/dtheta and d/dphi of :func:`projection_matrix`."""
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    d_theta = np.array([[0.0, ct * cp, -st * cp], [0.0, -st, -ct]])
    d_phi = np.array([[cp, -st * sp, -ct * sp], [0.0, 0.0, 0.0]])
    return d_theta, d_phi


def rotation(alpha: float) -> np.ndarray:
    ca, sa = np.cos(alpha), np.sin(alpha)
    return np.array([[ca, -sa], [sa, ca]])


def rotation_derivative(alpha: float) -> np.ndarray:
    ca, sa = np.cos(alpha), np.sin(alpha)
    return np.array([[-sa, -ca], [ca, -sa]])


def apply_inner(P: Polyhedron, x) -> np.ndarray:
    """Image of every vertex under translate . rotate . project, in catalog order."""
    u, v, theta_p, phi_p, alpha = x[:5]
    A = rotation(alpha) @ projection_matrix(theta_p, phi_p)
    return P.points @ A.T + np.array([u, v])


def convex_hull_2d(points: np.ndarray, tol: float = COLLINEAR_TOL) -> list[int]:
    """Counter-clockwise indices of the strictly extreme points (Graham scan, monotone chain).

    A turn counts only if its cross product exceeds ``tol * scale**2``, so
    points on or near an edge are dropped.
    """
    pts = np.asarray(points, dtype=float)
    scale = np.abs(pts).max() if len(pts) else 0.0
    eps = tol * scale * scale
    order = sorted(range(len(pts)), key=lambda i: (pts[i, 0], pts[i, 1]))
    xs = pts[:, 0].tolist()
    ys = pts[:, 1].tolist()

    def chain(seq):
        out: list[int] = []
        for i in seq:
            while len(out) >= 2:
                o, a = out[-2], out[-1]
                cross = (xs[a] - xs[o]) * (ys[i] - ys[o]) - (ys[a] - ys[o]) * (xs[i] - xs[o])
                if cross > eps:
                    break
                out.pop()
            out.append(i)
        return out

    lower = chain(order)
    upper = chain(reversed(order))
    hull = lower[:-1] + upper[:-1]
    # duplicates of the extreme points (coincident projections) collapse here
    dedup: list[int] = []
    for i in hull:
        if not dedup or abs(xs[i] - xs[dedup[-1]]) + abs(ys[i] - ys[dedup[-1]]) > eps:
            dedup.append(i)
    while len(dedup) > 1 and abs(xs[dedup[0]] - xs[dedup[-1]]) + abs(ys[dedup[0]] - ys[dedup[-1]]) <= eps:
        dedup.pop()
    return dedup


@dataclass(frozen=True)
class PlanarPolygon:
    """Silhouette of a polyhedron: CCW hull, source vertex per hull point, and face normals.

    ``faces[j]`` satisfies ``faces[j] @ hull[j] == faces[j] @ hull[j+1] == 1``;
    ``face_pairs[j]`` names the two 3D vertices defining that edge.
    """

    hull: np.ndarray
    provenance: np.ndarray
    faces: np.ndarray
    face_pairs: np.ndarray

    def __len__(self):
        return len(self.hull)

    def contains(self, pts: np.ndarray, strict: bool = True) -> np.ndarray:
        vals = np.atleast_2d(pts) @ self.faces.T
        return np.all(vals < 1, axis=1) if strict else np.all(vals <= 1, axis=1)


def faces_from_hull(hull: np.ndarray) -> np.ndarray:
    nxt = np.roll(hull, -1, axis=0)
    # solve [p_a; p_b] w = 1 for every edge
    det = hull[:, 0] * nxt[:, 1] - hull[:, 1] * nxt[:, 0]
    if np.any(np.abs(det) <= 1e-300):
        raise DegenerateSilhouetteError("edge passes through the origin")
    wx = (nxt[:, 1] - hull[:, 1]) / det
    wy = (hull[:, 0] - nxt[:, 0]) / det
    return np.column_stack([wx, wy])


def silhouette_of_points(proj: np.ndarray, tol: float = COLLINEAR_TOL) -> PlanarPolygon:
    idx = convex_hull_2d(proj, tol)
    if len(idx) < 3:
        raise DegenerateSilhouetteError(f"silhouette has {len(idx)} extreme points")
    prov = np.array(idx)
    hull = proj[prov]
    faces = faces_from_hull(hull)
    pairs = np.column_stack([prov, np.roll(prov, -1)])
    return PlanarPolygon(hull, prov, faces, pairs)


def silhouette(P: Polyhedron, pose, tol: float = COLLINEAR_TOL) -> PlanarPolygon:
    M = projection_matrix(*pose)
    return silhouette_of_points(P.points @ M.T, tol)


def face_pose_jacobians(P: Polyhedron, pose, pairs: np.ndarray, faces: np.ndarray | None = None) -> np.ndarray:
    """dw/d(theta, phi) for every face, shape (n, 2, 2); column k is dw/ds_k.

    With K w = 1 and K rows the projected edge endpoints, dw = -K^{-1} dK w.
    """
    M = projection_matrix(*pose)
    dMt, dMp = projection_derivatives(*pose)
    A = P.points[pairs[:, 0]]
    B = P.points[pairs[:, 1]]
    K = np.stack([A @ M.T, B @ M.T], axis=1)  # (n, 2, 2), rows are projected points
    det = K[:, 0, 0] * K[:, 1, 1] - K[:, 0, 1] * K[:, 1, 0]
    scale = np.abs(K).max(axis=(1, 2)) ** 2
    if np.any(np.abs(det) <= 1e-14 * scale):
        raise SingularFaceError("face endpoints are parallel as vectors from the origin")
    if faces is None:
        faces = np.column_stack([(K[:, 1, 1] - K[:, 0, 1]) / det, (K[:, 0, 0] - K[:, 1, 0]) / det])
    Kinv = np.empty_like(K)
    Kinv[:, 0, 0] = K[:, 1, 1] / det
    Kinv[:, 0, 1] = -K[:, 0, 1] / det
    Kinv[:, 1, 0] = -K[:, 1, 0] / det
    Kinv[:, 1, 1] = K[:, 0, 0] / det
    out = np.empty((len(pairs), 2, 2))
    for k, dM in enumerate((dMt, dMp)):
        dK = np.stack([A @ dM.T, B @ dM.T], axis=1)
        rhs = np.einsum("nij,nj->ni", dK, faces)
        out[:, :, k] = -np.einsum("nij,nj->ni", Kinv, rhs)
    return out


def face_pose_jacobian(P: Polyhedron, pose, face) -> np.ndarray:
    """2x2 matrix whose columns are dw/dtheta and dw/dphi for the edge between 3D vertices ``face``."""
    pairs = np.array([face], dtype=int)
    return face_pose_jacobians(P, pose, pairs)[0]
