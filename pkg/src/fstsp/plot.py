"""Static SVG route drawings (truck tour in black, one colour per sortie)."""
from __future__ import annotations

import numpy as np

from .instance import Instance
from .model import Solution

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#17becf", "#8c564b", "#e377c2", "#bcbd22", "#7f7f7f")


def render_svg(instance: Instance, solution: Solution, size: int = 600, margin: int = 20) -> str:
    xy = np.asarray(instance.coords, dtype=float)
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    scale = (size - 2 * margin) / max(float((hi - lo).max()), 1e-12)

    def pt(v):
        x, y = (xy[v] - lo) * scale + margin
        return f"{x:.2f},{size - y:.2f}"     # flip y so north is up

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>',
           '<polyline class="truck" fill="none" stroke="black" stroke-width="1.5" points="'
           + " ".join(pt(v) for v in solution.tour) + '"/>']
    for i, s in enumerate(solution.sorties):
        colour = PALETTE[i % len(PALETTE)]
        out.append(f'<polyline class="sortie" fill="none" stroke="{colour}" stroke-width="1.2" '
                   f'stroke-dasharray="4 3" points="{pt(s.launch)} {pt(s.visit)} {pt(s.return_)}"/>')
    drone = set(solution.drone_customers)
    for v in range(1, instance.n):
        x, y = pt(v).split(",")
        fill = "white" if v in drone else "black"
        out.append(f'<circle class="node" cx="{x}" cy="{y}" r="3" fill="{fill}" stroke="black"/>')
    x, y = (float(c) for c in pt(0).split(","))
    out.append(f'<rect class="depot" x="{x - 5:.2f}" y="{y - 5:.2f}" width="10" height="10" fill="red"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
