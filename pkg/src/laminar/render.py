"""Hand-written SVG output: region maps, tissue snapshots, spectra.

Every number is written with a fixed format so identical input gives
byte-identical files.
"""
import math
from typing import Sequence

from .errors import EmptyData

GREY = "#b4b4b4"
GREEN = "#3a9d4a"
WHITE = "#ffffff"
FAIL = "#d62728"
N_BINS = 21


def _f(v: float) -> str:
    return f"{v:.2f}"


def _header(w: int, h: int, comments: Sequence[str]) -> list:
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">']
    out += [f"<!-- {c} -->" for c in comments]
    out.append(f'<rect x="0" y="0" width="{w}" height="{h}" fill="{WHITE}"/>')
    return out


def _text(x, y, s, size=11, anchor="middle", rotate=None):
    rot = f' transform="rotate({rotate} {_f(x)} {_f(y)})"' if rotate is not None else ""
    s = s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    return (f'<text x="{_f(x)}" y="{_f(y)}" font-family="sans-serif" font-size="{size}" '
            f'text-anchor="{anchor}"{rot}>{s}</text>')


def region_map_svg(grid, log_axes: bool = True) -> str:
    """Polarity-plane map: grey where a pattern exists, green where it converges.

    ``grid`` is a SweepGrid; axis 1 runs horizontally, axis 2 vertically
    (increasing upward).
    """
    xs = list(grid.axis1[1])
    ys = list(grid.axis2[1])
    if not xs or not ys:
        raise EmptyData("region map needs at least one grid point")
    cw = max(4.0, min(40.0, 480.0 / len(xs)))
    ch = max(4.0, min(40.0, 480.0 / len(ys)))
    left, top, bottom, legend_w = 70, 20, 55, 170
    pw, ph = cw * len(xs), ch * len(ys)
    W, H = int(math.ceil(left + pw + legend_w)), int(math.ceil(top + ph + bottom))
    out = _header(W, H, [
        "region map",
        f"colour scale: {GREEN} = existence and convergence, {GREY} = existence only, "
        f"{WHITE} = no pattern predicted, {FAIL} = evaluation failed",
        "marker: black dot = simulated Laminar, open circle = simulated Homogeneous, cross = simulated Other",
        f"x axis: {grid.axis1[0]} ({'log' if log_axes else 'linear'}), y axis: {grid.axis2[0]}",
    ])
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            c = grid.cells[i][j]
            if c.failure is not None:
                fill = FAIL
            elif c.verdict.converges:
                fill = GREEN
            elif c.verdict.exists:
                fill = GREY
            else:
                fill = WHITE
            px = left + i * cw
            py = top + ph - (j + 1) * ch
            out.append(f'<rect x="{_f(px)}" y="{_f(py)}" width="{_f(cw)}" height="{_f(ch)}" fill="{fill}"/>')
            if c.sim_class:
                cx, cy, rr = px + cw / 2, py + ch / 2, max(1.0, min(cw, ch) / 4)
                if c.sim_class == "Laminar":
                    out.append(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(rr)}" fill="#000000"/>')
                elif c.sim_class == "Homogeneous":
                    out.append(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(rr)}" fill="none" stroke="#000000" stroke-width="0.8"/>')
                else:
                    out.append(f'<path d="M{_f(cx - rr)},{_f(cy - rr)} L{_f(cx + rr)},{_f(cy + rr)} '
                               f'M{_f(cx - rr)},{_f(cy + rr)} L{_f(cx + rr)},{_f(cy - rr)}" stroke="#000000" stroke-width="0.8"/>')
    out.append(f'<rect x="{left}" y="{top}" width="{_f(pw)}" height="{_f(ph)}" fill="none" stroke="#000000"/>')
    # ticks: first, middle, last
    for k in sorted({0, len(xs) // 2, len(xs) - 1}):
        px = left + (k + 0.5) * cw
        out.append(_text(px, top + ph + 14, f"{xs[k]:.3g}", 10))
    for k in sorted({0, len(ys) // 2, len(ys) - 1}):
        py = top + ph - (k + 0.5) * ch
        out.append(_text(left - 6, py + 3, f"{ys[k]:.3g}", 10, anchor="end"))
    out.append(_text(left + pw / 2, top + ph + 34, grid.axis1[0], 12))
    out.append(_text(18, top + ph / 2, grid.axis2[0], 12, rotate=-90))
    lx = left + pw + 15
    for k, (fill, label) in enumerate([(GREEN, "convergence"), (GREY, "existence"),
                                       (WHITE, "none"), (FAIL, "failed")]):
        ly = top + 10 + 22 * k
        out.append(f'<rect x="{lx}" y="{ly}" width="14" height="14" fill="{fill}" stroke="#000000" stroke-width="0.5"/>')
        out.append(_text(lx + 20, ly + 11, label, 11, anchor="start"))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _diverging(t: float) -> str:
    """Blue (t=-1) through white (0) to red (+1), quantised to N_BINS levels."""
    t = max(-1.0, min(1.0, t))
    k = int(round((t + 1.0) / 2.0 * (N_BINS - 1)))
    s = 2.0 * k / (N_BINS - 1) - 1.0
    if s >= 0:
        r, g, b = 255, int(round(255 * (1 - s))), int(round(255 * (1 - s)))
    else:
        r, g, b = int(round(255 * (1 + s))), int(round(255 * (1 + s))), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def tissue_svg(rows, reference: float, title: str = "tissue snapshot") -> str:
    """Two rows of disks (layer 1 on top), fill from the deviation to ``reference``.

    ``rows`` are (cell, layer, value) triples.
    """
    rows = list(rows)
    if not rows:
        raise EmptyData("snapshot has no cells")
    dev = [v - reference for _, _, v in rows]
    scale = max(max(abs(d) for d in dev), 0.05 * (1.0 + abs(reference)))
    l1 = [r for r in rows if r[1] == 1]
    l2 = [r for r in rows if r[1] == 2]
    ncol = max(len(l1), len(l2))
    rad, gap = 9.0, 4.0
    left, top = 20.0, 40.0
    W = int(math.ceil(2 * left + ncol * (2 * rad + gap)))
    H = int(math.ceil(top + 2 * (2 * rad + gap) + 40))
    out = _header(W, H, [
        title,
        f"colour scale: fill = deviation of the reporting component from {reference:.12g}, "
        f"{N_BINS} levels from blue (-{scale:.6g}) through white (0) to red (+{scale:.6g})",
        "rows: layer 1 on top, layer 2 below; cells in index order",
    ])
    out.append(_text(W / 2, 18, title, 12))
    for r_i, layer in enumerate((l1, l2)):
        cy = top + rad + r_i * (2 * rad + gap)
        for k, (cell, _, v) in enumerate(layer):
            cx = left + rad + k * (2 * rad + gap)
            out.append(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(rad)}" fill="{_diverging((v - reference) / scale)}" '
                       f'stroke="#333333" stroke-width="0.6"><title>cell {cell}: {v:.12g}</title></circle>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def spectrum_svg(rows, title: str = "spectrum") -> str:
    """Ascending eigenvalues as dots; the flagged quotient eigenvalue in red."""
    rows = list(rows)
    if not rows:
        raise EmptyData("spectrum is empty")
    n = len(rows)
    left, top, pw, ph = 50, 30, 420, 240
    W, H = left + pw + 20, top + ph + 40
    out = _header(W, H, [title, "black = eigenvalue, red = quotient polarity eigenvalue; y range [-1, 1]"])
    out.append(_text(W / 2, 18, title, 12))
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#000000"/>')
    y0 = top + ph / 2
    out.append(f'<line x1="{left}" y1="{_f(y0)}" x2="{left + pw}" y2="{_f(y0)}" stroke="#999999" stroke-width="0.5"/>')
    for v, lab in ((1, "1"), (0, "0"), (-1, "-1")):
        out.append(_text(left - 6, top + ph / 2 * (1 - v) + 3, lab, 10, anchor="end"))
    for idx, val, flag in rows:
        x = left + pw * (idx - 0.5) / n
        y = top + ph / 2 * (1 - val)
        colour = "#d62728" if flag else "#000000"
        out.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{3.5 if flag else 2.0}" fill="{colour}"/>')
    out.append(_text(left + pw / 2, top + ph + 28, "ascending index", 11))
    out.append("</svg>")
    return "\n".join(out) + "\n"
