"""Regenerate the bundled Archimedean and Catalan vertex files.

Coordinates come from the standard closed-form constructions evaluated with
mpmath; Catalan solids are polar duals of the Archimedean ones (the polar of
a solid about its centre is homothetic to the canonical dual, and the
passage objective is scale invariant).

    python scripts/build_catalog.py
"""
import itertools
import json
from pathlib import Path

import mpmath as mp
import numpy as np
from scipy.spatial import ConvexHull

mp.mp.dps = 70
DIGITS = 50
OUT = Path(__file__).resolve().parents[1] / "src" / "rupert" / "data"

PHI = (1 + mp.sqrt(5)) / 2


def even_perms(t):
    a, b, c = t
    return [(a, b, c), (b, c, a), (c, a, b)]


def all_perms(t):
    return list(itertools.permutations(t))


def signed(t):
    """All sign flips of the nonzero entries."""
    choices = [(x, -x) if x != 0 else (x,) for x in t]
    return list(itertools.product(*choices))


def dedupe(points):
    out = []
    for p in points:
        if not any(max(abs(p[k] - q[k]) for k in range(3)) < mp.mpf(10) ** -40 for q in out):
            out.append(p)
    return out


def from_groups(groups, perms):
    pts = []
    for g in groups:
        for s in signed(g):
            pts.extend(perms(s))
    return dedupe(pts)


def snub_cube():
    t = mp.findroot(lambda x: x**3 - x**2 - x - 1, 1.8)
    base = (mp.mpf(1), 1 / t, t)
    pts = []
    for signs in itertools.product((1, -1), repeat=3):
        v = tuple(s * b for s, b in zip(signs, base))
        plus = signs.count(1)
        for perm in itertools.permutations(range(3)):
            inversions = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
            if inversions % 2 == plus % 2:
                pts.append(tuple(v[k] for k in perm))
    return dedupe(pts)


def snub_dodecahedron():
    xi = mp.findroot(lambda x: x**3 - 2 * x - PHI, 1.7)
    a = xi - 1 / xi
    b = xi * PHI + PHI**2 + PHI / xi
    groups = [
        (2 * a, mp.mpf(2), 2 * b),
        (a + b / PHI + PHI, -a * PHI + b + 1 / PHI, a / PHI + b * PHI - 1),
        (-a / PHI + b * PHI + 1, -a + b / PHI - PHI, a * PHI + b - 1 / PHI),
        (-a / PHI + b * PHI - 1, a - b / PHI - PHI, a * PHI + b + 1 / PHI),
        (a + b / PHI - PHI, a * PHI - b + 1 / PHI, a / PHI + b * PHI + 1),
    ]
    pts = []
    for g in groups:
        for signs in itertools.product((1, -1), repeat=3):
            if signs.count(1) % 2:
                continue
            v = tuple(s * c for s, c in zip(signs, g))
            pts.extend(even_perms(v))
    return dedupe(pts)


def archimedean():
    s2 = mp.sqrt(2)
    f = PHI
    return {
        "truncated_tetrahedron": (
            [p for p in from_groups([(3, 1, 1)], all_perms) if sum(1 for c in p if c < 0) % 2 == 0],
            18,
        ),
        "cuboctahedron": (from_groups([(1, 1, 0)], all_perms), 24),
        "truncated_cube": (from_groups([(s2 - 1, 1, 1)], all_perms), 36),
        "truncated_octahedron": (from_groups([(0, 1, 2)], all_perms), 36),
        "rhombicuboctahedron": (from_groups([(1, 1, 1 + s2)], all_perms), 48),
        "truncated_cuboctahedron": (from_groups([(1, 1 + s2, 1 + 2 * s2)], all_perms), 72),
        "icosidodecahedron": (
            from_groups([(0, 0, f), (mp.mpf(1) / 2, f / 2, f**2 / 2)], even_perms),
            60,
        ),
        "truncated_dodecahedron": (
            from_groups([(0, 1 / f, 2 + f), (1 / f, f, 2 * f), (f, 2, f + 1)], even_perms),
            90,
        ),
        "truncated_icosahedron": (
            from_groups([(0, 1, 3 * f), (1, 2 + f, 2 * f), (f, 2, f**3)], even_perms),
            90,
        ),
        "rhombicosidodecahedron": (
            from_groups([(1, 1, f**3), (f**2, f, 2 * f), (2 + f, 0, f**2)], even_perms),
            120,
        ),
        "truncated_icosidodecahedron": (
            from_groups(
                [
                    (1 / f, 1 / f, 3 + f),
                    (2 / f, f, 1 + 2 * f),
                    (1 / f, f**2, -1 + 3 * f),
                    (-1 + 2 * f, 2, 2 + f),
                    (f, 3, 2 * f),
                ],
                even_perms,
            ),
            180,
        ),
        "snub_cube": (snub_cube(), 60),
        "snub_dodecahedron": (snub_dodecahedron(), 150),
    }


DUALS = {
    "truncated_tetrahedron": "triakis_tetrahedron",
    "cuboctahedron": "rhombic_dodecahedron",
    "truncated_cube": "triakis_octahedron",
    "truncated_octahedron": "tetrakis_hexahedron",
    "rhombicuboctahedron": "deltoidal_icositetrahedron",
    "truncated_cuboctahedron": "disdyakis_dodecahedron",
    "icosidodecahedron": "rhombic_triacontahedron",
    "truncated_dodecahedron": "triakis_icosahedron",
    "truncated_icosahedron": "pentakis_dodecahedron",
    "rhombicosidodecahedron": "deltoidal_hexecontahedron",
    "truncated_icosidodecahedron": "disdyakis_triacontahedron",
    "snub_dodecahedron": "pentagonal_hexecontahedron",
    "snub_cube": "pentagonal_icositetrahedron",
}


def check_uniform(name, pts, n_edges):
    r = [mp.sqrt(sum(c**2 for c in p)) for p in pts]
    assert max(r) - min(r) < mp.mpf(10) ** -40, name
    d = sorted(
        mp.sqrt(sum((p[k] - q[k]) ** 2 for k in range(3))) for p, q in itertools.combinations(pts, 2)
    )
    edges = sum(1 for x in d if x - d[0] < mp.mpf(10) ** -30)
    assert edges == n_edges, (name, edges, n_edges)


def polar_dual(pts):
    """Face planes w (w^T z = 1) of conv(pts), as high-precision points."""
    arr = np.array([[float(c) for c in p] for p in pts])
    hull = ConvexHull(arr)
    planes = {}
    for simplex, eq in zip(hull.simplices, hull.equations):
        key = tuple(np.round(eq[:3] / -eq[3], 9))
        planes.setdefault(key, set()).update(int(i) for i in simplex)
    duals = []
    for members in planes.values():
        members = sorted(members)
        # three members spanning the face plane
        best = None
        for a, b, c in itertools.combinations(members, 3):
            vol = abs(np.linalg.det(arr[[a, b, c]]))
            if best is None or vol > best[0]:
                best = (vol, (a, b, c))
        a, b, c = best[1]
        K = mp.matrix([list(pts[a]), list(pts[b]), list(pts[c])])
        w = mp.lu_solve(K, mp.matrix([1, 1, 1]))
        duals.append(tuple(w[k] for k in range(3)))
    return duals


def fmt(x):
    s = mp.nstr(mp.mpf(x), DIGITS, strip_zeros=False, min_fixed=-mp.inf, max_fixed=mp.inf)
    return "0.0" if mp.mpf(x) == 0 else s


def dump(path, family, solids):
    data = [
        {"name": name, "tags": [family], "vertices": [[fmt(c) for c in p] for p in pts]}
        for name, pts in solids.items()
    ]
    lines = ["["]
    for n, solid in enumerate(data):
        verts = ",\n".join("    " + json.dumps(v) for v in solid["vertices"])
        head = json.dumps({"name": solid["name"], "tags": solid["tags"]})[:-1]
        sep = "," if n < len(data) - 1 else ""
        lines.append(f'  {head}, "vertices": [\n{verts}\n  ]}}{sep}')
    lines.append("]")
    path.write_text("\n".join(lines) + "\n")


def main():
    arch = archimedean()
    arch_pts, cat_pts = {}, {}
    for name, (pts, n_edges) in arch.items():
        check_uniform(name, pts, n_edges)
        arch_pts[name] = pts
        cat_pts[DUALS[name]] = polar_dual(pts)
        print(f"{name}: {len(pts)} vertices -> {DUALS[name]}: {len(cat_pts[DUALS[name]])}")
    OUT.mkdir(parents=True, exist_ok=True)
    dump(OUT / "archimedean.json", "archimedean", arch_pts)
    dump(OUT / "catalan.json", "catalan", cat_pts)


if __name__ == "__main__":
    main()
