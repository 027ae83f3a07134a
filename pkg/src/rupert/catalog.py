"""Convex polyhedra: built-in Platonic/Archimedean/Catalan solids and mesh loading.

Vertices are kept as decimal strings (up to 50 significant digits) so the
double-precision pipeline and the high-precision verifier read the same
numbers.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path

import mpmath
import numpy as np
from scipy.spatial import ConvexHull, QhullError

DIGITS = 50
REDUNDANCY_TOL = 1e-12


class CatalogError(ValueError):
    pass


class UnknownShapeError(CatalogError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown shape {name!r}; available: {', '.join(available())}")


class DegenerateGeometryError(CatalogError):
    pass


class MeshParseError(CatalogError):
    def __init__(self, path, line: int, msg: str):
        self.line = line
        super().__init__(f"{path}:{line}: {msg}")


def fmt_decimal(x, digits: int = DIGITS) -> str:
    x = mpmath.mpf(x)
    if x == 0:
        return "0.0"
    return mpmath.nstr(x, digits, strip_zeros=False, min_fixed=-mpmath.inf, max_fixed=mpmath.inf)


@dataclass(frozen=True)
class Polyhedron:
    """A named convex body given by its extreme points.

    The origin is strictly interior and no listed vertex is redundant; both
    are checked by :func:`validate`.
    """

    name: str
    vertices: tuple[tuple[str, str, str], ...]
    tags: frozenset[str] = field(default_factory=frozenset)

    @cached_property
    def points(self) -> np.ndarray:
        pts = np.array([[float(c) for c in v] for v in self.vertices])
        pts.setflags(write=False)
        return pts

    def points_mp(self, digits: int = DIGITS) -> list[list[mpmath.mpf]]:
        with mpmath.workdps(digits + 10):
            return [[mpmath.mpf(c) for c in v] for v in self.vertices]

    def __len__(self):
        return len(self.vertices)

    def scaled(self, c) -> "Polyhedron":
        with mpmath.workdps(DIGITS + 10):
            c = mpmath.mpf(c)
            verts = tuple(tuple(fmt_decimal(mpmath.mpf(s) * c) for s in v) for v in self.vertices)
        return Polyhedron(self.name, verts, self.tags)


def _as_strings(points) -> tuple[tuple[str, str, str], ...]:
    out = []
    for p in points:
        if len(p) != 3:
            raise DegenerateGeometryError(f"vertex {p!r} is not 3-dimensional")
        out.append(tuple(c if isinstance(c, str) else repr(float(c)) for c in p))
    return tuple(out)


def extreme_point_indices(points: np.ndarray, tol: float = REDUNDANCY_TOL) -> list[int]:
    """Indices of points that lie farther than ``tol * scale`` outside the hull of the rest."""
    points = np.asarray(points, dtype=float)
    if len(points) < 4:
        raise DegenerateGeometryError(f"need at least 4 points, got {len(points)}")
    centred = points - points.mean(axis=0)
    if np.linalg.matrix_rank(centred, tol=1e-12 * max(1.0, np.abs(centred).max())) < 3:
        raise DegenerateGeometryError("points are coplanar")
    scale = np.abs(centred).max()
    try:
        candidates = sorted(ConvexHull(points).vertices)
    except QhullError as exc:
        raise DegenerateGeometryError(str(exc)) from None
    keep = []
    for i in candidates:
        others = np.delete(points, i, axis=0)
        try:
            hull = ConvexHull(others)
        except QhullError:
            keep.append(i)
            continue
        dist = hull.equations[:, :3] @ points[i] + hull.equations[:, 3]
        if dist.max() > tol * scale:
            keep.append(i)
    if len(keep) < 4:
        raise DegenerateGeometryError(f"only {len(keep)} extreme points")
    return keep


def validate(P: Polyhedron) -> Polyhedron:
    pts = P.points
    if len(pts) < 4:
        raise DegenerateGeometryError(f"{P.name}: need at least 4 vertices")
    if not np.all(np.isfinite(pts)):
        raise DegenerateGeometryError(f"{P.name}: non-finite coordinate")
    keep = extreme_point_indices(pts)
    if len(keep) != len(pts):
        raise DegenerateGeometryError(f"{P.name}: {len(pts) - len(keep)} redundant vertices")
    if not origin_interior(pts):
        raise DegenerateGeometryError(f"{P.name}: origin is not strictly interior")
    return P


def origin_interior(points: np.ndarray, rel_margin: float = 1e-9) -> bool:
    hull = ConvexHull(points)
    # equations are (n, d) with n unit outward: n^T z + d <= 0 inside
    return bool(np.all(hull.equations[:, 3] < -rel_margin * np.abs(points).max()))


def normalize(P: Polyhedron) -> Polyhedron:
    """Translate so the vertex centroid sits at the origin."""
    with mpmath.workdps(DIGITS + 10):
        pts = P.points_mp()
        m = len(pts)
        centroid = [mpmath.fsum(p[k] for p in pts) / m for k in range(3)]
        scale = max(abs(c) for p in pts for c in p)
        # already centred up to the precision of the stored strings
        if all(abs(c) <= mpmath.mpf(10) ** -(DIGITS - 3) * scale for c in centroid):
            return P
        verts = tuple(tuple(fmt_decimal(p[k] - centroid[k]) for k in range(3)) for p in pts)
    return Polyhedron(P.name, verts, P.tags)


def make_polyhedron(name: str, points, tags=()) -> Polyhedron:
    """Recentre, drop redundant points and validate."""
    verts = _as_strings(points)
    keep = extreme_point_indices(np.array([[float(c) for c in v] for v in verts]))
    P = normalize(Polyhedron(name, tuple(verts[i] for i in keep), frozenset(tags)))
    return validate(P)


# ---------------------------------------------------------------- built-ins

def _platonic(name: str) -> list[tuple]:
    mp = mpmath
    if name == "cube":
        return [tuple(mp.mpf(s) for s in signs) for signs in itertools.product((1, -1), repeat=3)]
    if name == "tetrahedron":
        # edge length sqrt(3), centred at the origin
        z = -mp.sqrt(mp.mpf(1) / 8)
        return [
            (mp.mpf(0), mp.mpf(1), z),
            (mp.sqrt(mp.mpf(3) / 4), mp.mpf(-1) / 2, z),
            (-mp.sqrt(mp.mpf(3) / 4), mp.mpf(-1) / 2, z),
            (mp.mpf(0), mp.mpf(0), mp.sqrt(mp.mpf(9) / 8)),
        ]
    if name == "octahedron":
        pts = []
        for k in range(3):
            for s in (1, -1):
                p = [mp.mpf(0)] * 3
                p[k] = mp.mpf(s)
                pts.append(tuple(p))
        return pts
    phi = (1 + mp.sqrt(5)) / 2
    if name == "icosahedron":
        base = [(0, s1, s2 * phi) for s1 in (1, -1) for s2 in (1, -1)]
    elif name == "dodecahedron":
        base = [(0, s1 / phi, s2 * phi) for s1 in (1, -1) for s2 in (1, -1)]
    else:
        raise KeyError(name)
    pts = []
    for a, b, c in base:
        pts += [(a, b, c), (b, c, a), (c, a, b)]
    if name == "dodecahedron":
        pts += list(itertools.product((1, -1), repeat=3))
    return [tuple(mp.mpf(c) for c in p) for p in pts]


PLATONIC = ("tetrahedron", "cube", "octahedron", "icosahedron", "dodecahedron")


@lru_cache(maxsize=None)
def _bundled() -> dict[str, dict]:
    out = {}
    for fname in ("archimedean.json", "catalan.json"):
        text = resources.files("rupert").joinpath("data").joinpath(fname).read_text()
        for entry in json.loads(text):
            out[entry["name"]] = entry
    return out


def available() -> list[str]:
    return list(PLATONIC) + list(_bundled())


def canonical_name(name: str) -> str:
    return name.strip().lower().replace("-", "_").replace(" ", "_")


@lru_cache(maxsize=None)
def builtin(name: str) -> Polyhedron:
    key = canonical_name(name)
    if key in PLATONIC:
        with mpmath.workdps(DIGITS + 10):
            verts = tuple(tuple(fmt_decimal(c) for c in p) for p in _platonic(key))
        return validate(Polyhedron(key, verts, frozenset({"platonic"})))
    entry = _bundled().get(key)
    if entry is None:
        raise UnknownShapeError(name)
    P = Polyhedron(key, tuple(tuple(v) for v in entry["vertices"]), frozenset(entry["tags"]))
    return validate(normalize(P))


# ---------------------------------------------------------------- files

def serialize(P: Polyhedron) -> dict:
    return {"name": P.name, "tags": sorted(P.tags), "vertices": [list(v) for v in P.vertices]}


def save_json(P: Polyhedron, path) -> None:
    Path(path).write_text(json.dumps(serialize(P), indent=1) + "\n")


def _load_json(path: Path) -> Polyhedron:
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise MeshParseError(path, exc.lineno, exc.msg) from None
    if not isinstance(data, dict) or "vertices" not in data:
        raise MeshParseError(path, 1, "expected an object with a 'vertices' list")
    verts = []
    for v in data["vertices"]:
        if len(v) != 3:
            raise MeshParseError(path, 1, f"vertex {v!r} does not have 3 coordinates")
        verts.append(tuple(c if isinstance(c, str) else repr(float(c)) for c in v))
    name = data.get("name") or path.stem
    return make_polyhedron(name, verts, data.get("tags", ()))


def _off_lines(path: Path):
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _load_off(path: Path) -> Polyhedron:
    lines = _off_lines(path)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise MeshParseError(path, 1, "empty file") from None
    if header.split()[0] != "OFF":
        raise MeshParseError(path, lineno, f"expected 'OFF' header, got {header!r}")
    rest = header.split()[1:]
    if not rest:
        try:
            lineno, counts_line = next(lines)
        except StopIteration:
            raise MeshParseError(path, lineno, "missing counts line") from None
        rest = counts_line.split()
    try:
        nv, nf = int(rest[0]), int(rest[1])
    except (ValueError, IndexError):
        raise MeshParseError(path, lineno, "bad counts line") from None

    verts = []
    for _ in range(nv):
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise MeshParseError(path, lineno, f"expected {nv} vertices, got {len(verts)}") from None
        fields = line.split()
        try:
            [float(c) for c in fields[:3]]
        except ValueError:
            raise MeshParseError(path, lineno, f"bad vertex line {line!r}") from None
        if len(fields) < 3:
            raise MeshParseError(path, lineno, f"bad vertex line {line!r}")
        verts.append(tuple(fields[:3]))

    faces = []
    for _ in range(nf):
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise MeshParseError(path, lineno, f"expected {nf} faces, got {len(faces)}") from None
        try:
            fields = [int(c) for c in line.split()]
            k = fields[0]
            idx = fields[1 : 1 + k]
        except (ValueError, IndexError):
            raise MeshParseError(path, lineno, f"bad face line {line!r}") from None
        if len(idx) != k or k < 3 or any(i < 0 or i >= nv for i in idx):
            raise MeshParseError(path, lineno, f"bad face line {line!r}")
        faces.append((lineno, idx))

    pts = np.array([[float(c) for c in v] for v in verts])
    scale = max(1.0, np.abs(pts).max())
    for lineno, idx in faces:
        # face must be planar and support the whole point set
        a, b, c = pts[idx[0]], pts[idx[1]], pts[idx[2]]
        n = np.cross(b - a, c - a)
        if np.linalg.norm(n) < 1e-12 * scale**2:
            continue
        side = (pts - a) @ n
        tol = 1e-9 * scale * np.linalg.norm(n)
        if np.abs(side[idx]).max() > tol or (side.max() > tol and side.min() < -tol):
            raise DegenerateGeometryError(f"{path}:{lineno}: face is not a convex hull facet")
    return make_polyhedron(path.stem, verts, ())


def load_mesh(path, format: str | None = None) -> Polyhedron:
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    if fmt == "off":
        return _load_off(path)
    if fmt == "json":
        return _load_json(path)
    raise CatalogError(f"unsupported mesh format {fmt!r} (expected off or json)")


def resolve(name: str | None = None, mesh=None) -> Polyhedron:
    if mesh is not None:
        return load_mesh(mesh)
    return builtin(name)
