"""Figures of a passage: the outer shadow with the scaled inner shadow drawn as the hole.

``render_svg`` writes a self-contained SVG whose polygon coordinates are the
planar coordinates themselves (y flipped once by the enclosing group), so
the file can be read back and checked numerically.  ``plot_passage`` and
``write_report`` produce the matplotlib versions used by ``rupert report``.
"""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .catalog import Polyhedron
from .mu import evaluate
from .projection import convex_hull_2d


@dataclass(frozen=True)
class RenderSpec:
    outer_stroke: str = "#1b2a49"
    outer_fill: str = "#f2f2f2"
    stroke_px: float = 2.0
    hole_fill: str = "#4f8fd6"
    hole_opacity: float = 0.8
    size: int = 480
    margin: float = 0.08

    def __post_init__(self):
        if self.size <= 0 or self.stroke_px <= 0:
            raise ValueError("image size and stroke width must be positive")
        if not 0 <= self.margin < 0.5:
            raise ValueError("margin must lie in [0, 0.5)")


def passage_geometry(P: Polyhedron, x, scale: float = 1.0):
    """(outer hull, hole polygon, mu): the hole is the inner shadow scaled by mu * scale."""
    table = evaluate(P, x)
    inner = table.inner
    hole = inner[convex_hull_2d(inner)] * (table.mu * scale)
    return table.outer.hull, hole, table.mu


def _pts(poly) -> str:
    return " ".join(f"{x:.15g},{y:.15g}" for x, y in poly)


def render_svg(P: Polyhedron, x, spec: RenderSpec = RenderSpec(), scale: float = 1.0) -> str:
    outer, hole, mu = passage_geometry(P, x, scale)
    both = np.vstack([outer, hole])
    lo, hi = both.min(axis=0), both.max(axis=0)
    extent = float((hi - lo).max())
    s = spec.size * (1 - 2 * spec.margin) / extent
    cx, cy = (lo + hi) / 2
    tx = spec.size / 2 - s * cx
    ty = spec.size / 2 + s * cy
    return "\n".join(
        [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.size}" height="{spec.size}" '
            f'viewBox="0 0 {spec.size} {spec.size}">',
            f"<!-- {P.name}: mu = {mu:.15g}, hole scale = {scale:.15g} -->",
            f'<g transform="matrix({s:.15g} 0 0 {-s:.15g} {tx:.15g} {ty:.15g})">',
            f'<polygon class="outer" points="{_pts(outer)}" fill="{spec.outer_fill}" '
            f'stroke="{spec.outer_stroke}" stroke-width="{spec.stroke_px}" vector-effect="non-scaling-stroke" '
            'stroke-linejoin="round"/>',
            f'<polygon class="hole" points="{_pts(hole)}" fill="{spec.hole_fill}" '
            f'fill-opacity="{spec.hole_opacity}" stroke="none"/>',
            "</g>",
            "</svg>",
            "",
        ]
    )


def read_svg_polygons(text: str) -> dict[str, np.ndarray]:
    """Planar coordinates of the classed polygons in an SVG written by :func:`render_svg`."""
    out = {}
    for cls, pts in re.findall(r'<polygon class="(\w+)" points="([^"]*)"', text):
        out[cls] = np.array([[float(v) for v in p.split(",")] for p in pts.split()])
    return out


# ------------------------------------------------------------ matplotlib report

def plot_passage(ax, P: Polyhedron, x, spec: RenderSpec = RenderSpec(), scale: float = 1.0, title=None):
    from matplotlib.patches import Polygon

    outer, hole, mu = passage_geometry(P, x, scale)
    ax.add_patch(Polygon(outer, closed=True, facecolor=spec.outer_fill, edgecolor=spec.outer_stroke, lw=1.5))
    ax.add_patch(Polygon(hole, closed=True, facecolor=spec.hole_fill, alpha=spec.hole_opacity, lw=0))
    both = np.vstack([outer, hole])
    pad = spec.margin * float((both.max(axis=0) - both.min(axis=0)).max())
    ax.set_xlim(both[:, 0].min() - pad, both[:, 0].max() + pad)
    ax.set_ylim(both[:, 1].min() - pad, both[:, 1].max() + pad)
    ax.set_aspect("equal")
    ax.set_axis_off()
    if title is not None:
        ax.set_title(title, fontsize=10)
    return mu


def write_report(rows, outdir, resolve, spec: RenderSpec = RenderSpec()) -> list[Path]:
    """One PNG per record plus ``summary.csv``; ``resolve(shape)`` returns the Polyhedron.

    ``rows`` are :class:`~rupert.search.BestRecord` objects.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    from .verify import floor_decimal

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    summary = outdir / "summary.csv"
    with open(summary, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["shape", "mu_floor12", "mu_double", "mu_certified", "certificate_norm", "seed", "trial", "iters"])
        for n, rec in enumerate(rows):
            P = resolve(rec.shape)
            fig, ax = plt.subplots(figsize=(4, 4))
            plot_passage(ax, P, rec.x, spec, title=f"{rec.shape.replace('_', ' ')}\n$\\mu \\geq$ {floor_decimal(rec.mu_double)}")
            png = outdir / f"{n:03d}_{rec.shape}.png"
            fig.savefig(png, dpi=150, bbox_inches="tight")
            plt.close(fig)
            written.append(png)
            writer.writerow(
                [
                    rec.shape,
                    floor_decimal(rec.mu_double),
                    repr(rec.mu_double),
                    rec.mu_certified or "",
                    f"{rec.certificate_norm:.3e}",
                    rec.seed,
                    rec.trial,
                    rec.iters,
                ]
            )
    written.append(summary)
    return written
