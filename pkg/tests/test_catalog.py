import itertools

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from rupert import catalog
from rupert.catalog import (
    DegenerateGeometryError,
    MeshParseError,
    UnknownShapeError,
    builtin,
    load_mesh,
    make_polyhedron,
    normalize,
    save_json,
)
from rupert.mu import mu_value


def _as_set(points):
    return {tuple(np.round(p, 12)) for p in np.asarray(points)}


def test_cube_vertices():
    P = builtin("cube")
    assert _as_set(P.points) == set(itertools.product((-1.0, 1.0), repeat=3))


def test_tetrahedron_edges_equal():
    d = [np.linalg.norm(a - b) for a, b in itertools.combinations(builtin("tetrahedron").points, 2)]
    assert len(d) == 6
    assert np.ptp(d) < 1e-14
    # T1 of the explicit construction has edge length sqrt(3)
    assert d[0] == pytest.approx(np.sqrt(3), abs=1e-14)


def test_octahedron_antipodal_units():
    P = builtin("octahedron").points
    assert len(P) == 6
    assert _as_set(P) == _as_set(-P)
    assert np.allclose(np.linalg.norm(P, axis=1), 1.0)


def test_unknown_name_lists_catalog():
    with pytest.raises(UnknownShapeError) as exc:
        builtin("nosuchshape")
    assert "cube" in str(exc.value) and "snub_cube" in str(exc.value)


def test_catalog_counts():
    tags = [builtin(n).tags for n in catalog.available()]
    assert sum("platonic" in t for t in tags) == 5
    assert sum("archimedean" in t for t in tags) == 13
    assert sum("catalan" in t for t in tags) == 13


@pytest.mark.parametrize("name", catalog.available())
def test_builtin_invariants(name):
    P = builtin(name)
    pts = P.points
    hull = ConvexHull(pts)
    assert sorted(hull.vertices) == list(range(len(pts)))  # irredundant
    assert np.all(hull.equations[:, 3] < -1e-6)  # origin strictly inside every facet
    assert np.abs(pts.mean(axis=0)).max() < 1e-12


def test_archimedean_vertex_counts():
    expected = {
        "truncated_tetrahedron": 12,
        "cuboctahedron": 12,
        "truncated_cube": 24,
        "truncated_octahedron": 24,
        "rhombicuboctahedron": 24,
        "truncated_cuboctahedron": 48,
        "icosidodecahedron": 30,
        "truncated_dodecahedron": 60,
        "truncated_icosahedron": 60,
        "rhombicosidodecahedron": 60,
        "truncated_icosidodecahedron": 120,
        "snub_cube": 24,
        "snub_dodecahedron": 60,
    }
    for name, n in expected.items():
        P = builtin(name)
        assert len(P) == n, name
        r = np.linalg.norm(P.points, axis=1)
        assert np.ptp(r) < 1e-13 * r.max(), name  # vertex-transitive: one circumradius


def test_json_roundtrip(tmp_path):
    for name in ("cube", "snub_cube", "rhombic_triacontahedron"):
        P = builtin(name)
        path = tmp_path / f"{name}.json"
        save_json(P, path)
        Q = load_mesh(path)
        assert _as_set(Q.points) == _as_set(P.points)
        # the decimal strings survive exactly
        assert set(Q.vertices) == set(P.vertices)


def test_json_plain_cube(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{"name": "c", "vertices": ' + str([list(p) for p in itertools.product((-1, 1), repeat=3)]) + "}")
    assert _as_set(load_mesh(path).points) == _as_set(builtin("cube").points)


def _j1_points():
    # square pyramid with unit edges: base (+-1/2, +-1/2, 0), apex at height 1/sqrt(2)
    base = [(sx * 0.5, sy * 0.5, 0.0) for sx in (-1, 1) for sy in (-1, 1)]
    return base + [(0.0, 0.0, float(1 / np.sqrt(2)))]


def _brute_extreme_count(pts):
    """A point is extreme iff some plane through it leaves all others strictly on one side.

    Checked by testing it against every tetrahedron of the other points.
    """
    count = 0
    for p in range(len(pts)):
        others = [q for q in range(len(pts)) if q != p]
        covered = False
        for quad in itertools.combinations(others, 4):
            T = pts[list(quad)]
            A = np.column_stack([T[1] - T[0], T[2] - T[0], T[3] - T[0]])
            if abs(np.linalg.det(A)) < 1e-12:
                continue
            lam = np.linalg.solve(A, pts[p] - T[0])
            if lam.min() >= -1e-12 and lam.sum() <= 1 + 1e-12:
                covered = True
                break
        count += not covered
    return count


def test_off_square_pyramid(tmp_path):
    pts = _j1_points()
    # add the base centre, which is not extreme
    raw = pts + [(0.0, 0.0, 0.0)]
    lines = ["OFF", f"{len(raw)} 5 8"]
    lines += [" ".join(repr(c) for c in p) for p in raw]
    lines += ["4 0 1 3 2", "3 0 1 4", "3 1 3 4", "3 3 2 4", "3 2 0 4"]
    path = tmp_path / "j1.off"
    path.write_text("\n".join(lines) + "\n")
    P = load_mesh(path)
    assert len(P) == 5
    assert _brute_extreme_count(np.array(raw)) == 5
    assert np.abs(P.points.mean(axis=0)).max() < 1e-15


def test_off_nonconvex_face_rejected(tmp_path):
    pts = _j1_points()
    lines = ["OFF", "5 1 0"] + [" ".join(repr(c) for c in p) for p in pts] + ["3 0 3 4"]
    path = tmp_path / "bad.off"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DegenerateGeometryError):
        load_mesh(path)


def test_coplanar_rejected(tmp_path):
    path = tmp_path / "flat.off"
    path.write_text("OFF\n4 0 0\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n")
    with pytest.raises(DegenerateGeometryError):
        load_mesh(path)


def test_too_few_points():
    with pytest.raises(DegenerateGeometryError):
        make_polyhedron("x", [(0, 0, 0), (1, 0, 0), (0, 1, 0)])


def test_parse_error_line_number(tmp_path):
    path = tmp_path / "broken.off"
    path.write_text("OFF\n# comment\n4 0 0\n0 0 0\n1 0 zero\n0 1 0\n0 0 1\n")
    with pytest.raises(MeshParseError) as exc:
        load_mesh(path)
    assert exc.value.line == 5
    assert ":5:" in str(exc.value)


def test_unsupported_format(tmp_path):
    path = tmp_path / "x.stl"
    path.write_text("")
    with pytest.raises(catalog.CatalogError):
        load_mesh(path)


def test_normalize_shifted_cube():
    shifted = catalog.Polyhedron("c", tuple(tuple(repr(float(c)) for c in p + np.array([5, 0, 0])) for p in builtin("cube").points))
    assert _as_set(normalize(shifted).points) == _as_set(builtin("cube").points)


def test_normalize_fixed_point():
    P = builtin("tetrahedron")
    assert normalize(P) is P


def test_normalize_random_hull():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(10, 3)) + 2.0
    P = make_polyhedron("r", pts)
    assert np.abs(P.points.mean(axis=0)).max() < 1e-15


def test_scale_invariance():
    rng = np.random.default_rng(5)
    for name in ("tetrahedron", "cube", "truncated_octahedron"):
        P = builtin(name)
        for c in (0.01, 3.7, 1e4):
            Q = P.scaled(c)
            for _ in range(5):
                x = np.concatenate([rng.uniform(-0.1, 0.1, 2), rng.uniform(0, 2 * np.pi, 5)])
                a, b = mu_value(P, x), mu_value(Q, np.concatenate([x[:2] * c, x[2:]]))
                if np.isfinite(a):
                    assert b == pytest.approx(a, rel=1e-12)
