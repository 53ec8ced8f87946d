"""SVG scatter plots of zeros against node disks."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from .zerofind import LocalizationReport, Rect, region_from_config

IN_DISK = "#1f77b4"
STRAY = "#d62728"
NODE = "#333333"
DISK = "#2ca02c"


def _f(x: float) -> str:
    return f"{x:.2f}"


def exaggeration_for(radii, scale: float, gaps=None, min_px: float = 3.0) -> float:
    """Power of ten that makes the median disk at least ``min_px`` wide on
    screen, without letting any scaled disk reach 0.45 of its node gap."""
    pairs = [(r, g) for r, g in zip(radii, gaps if gaps is not None else [math.inf] * len(radii))
             if r > 0]
    if not pairs:
        return 1.0
    px = float(np.median([r for r, _ in pairs])) * scale
    if px >= min_px:
        return 1.0
    factor = 10 ** math.ceil(math.log10(min_px / px))
    limit = min(0.45 * g / r for r, g in pairs)
    while factor > 1 and factor > limit:
        factor //= 10
    return float(factor)


def render_svg(report: LocalizationReport | None, region=None, width: int = 640,
               exaggeration: float | None = None, title: str = "") -> str:
    """Nodes as crosses, disks as circles (radii scaled by a factor shown in the
    legend), zeros as dots: blue inside a disk, red and labelled when stray.

    With no report, only the frame and axes of ``region`` are drawn.
    """
    if region is None:
        region = report.region if report is not None else Rect(-1, 1, -1, 1)
    box = region_from_config(region).bounding()
    margin, legend_h = 40, 70
    plot_w = width - 2 * margin
    aspect = box.height / box.width
    plot_h = int(min(max(plot_w * aspect, 160), 3 * plot_w))
    height = plot_h + 2 * margin + legend_h
    scale = min(plot_w / box.width, plot_h / box.height)
    ox = margin + (plot_w - box.width * scale) / 2
    oy = margin + (plot_h - box.height * scale) / 2

    def X(x: float) -> float:
        return ox + (x - box.x0) * scale

    def Y(y: float) -> float:
        return oy + (box.y1 - y) * scale

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
           f'height="{height}" viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{_f(X(box.x0))}" y="{_f(Y(box.y1))}" width="{_f(box.width * scale)}" '
           f'height="{_f(box.height * scale)}" fill="none" stroke="#999999"/>']
    if box.y0 <= 0 <= box.y1:
        out.append(f'<line x1="{_f(X(box.x0))}" y1="{_f(Y(0))}" x2="{_f(X(box.x1))}" '
                   f'y2="{_f(Y(0))}" stroke="#bbbbbb"/>')
    if box.x0 <= 0 <= box.x1:
        out.append(f'<line x1="{_f(X(0))}" y1="{_f(Y(box.y0))}" x2="{_f(X(0))}" '
                   f'y2="{_f(Y(box.y1))}" stroke="#bbbbbb"/>')
    ticks = [(box.x0, box.y0, "start"), (box.x1, box.y0, "end")]
    for x, y, anchor in ticks:
        out.append(f'<text x="{_f(X(x))}" y="{_f(Y(y) + 14)}" font-size="10" '
                   f'text-anchor="{anchor}">{x:.4g}</text>')
    out.append(f'<text x="{_f(X(box.x0) - 4)}" y="{_f(Y(box.y0))}" font-size="10" '
               f'text-anchor="end">{box.y0:.4g}</text>')
    out.append(f'<text x="{_f(X(box.x0) - 4)}" y="{_f(Y(box.y1) + 8)}" font-size="10" '
               f'text-anchor="end">{box.y1:.4g}</text>')
    if title:
        out.append(f'<text x="{width / 2:.2f}" y="20" font-size="13" '
                   f'text-anchor="middle">{escape(title)}</text>')

    factor = 1.0
    n_in = n_stray = 0
    if report is not None and report.ns is not None:
        ns = report.ns
        nodes = report.region_nodes
        if exaggeration is None:
            gaps = ns.tree.query(np.column_stack([ns.array.real, ns.array.imag]),
                                 k=2)[0][:, 1] if len(ns) > 1 else np.full(len(ns), np.inf)
            factor = exaggeration_for([report.radii[i] for i in nodes], scale,
                                      [gaps[i] for i in nodes])
        else:
            factor = exaggeration
        for i in nodes:
            t = ns.array[i]
            x, y = X(t.real), Y(t.imag)
            r = report.radii[i] * scale * factor
            out.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(r)}" fill="none" '
                       f'stroke="{DISK}" stroke-width="0.8"/>')
            out.append(f'<path d="M{_f(x - 4)},{_f(y - 4)}L{_f(x + 4)},{_f(y + 4)}'
                       f'M{_f(x - 4)},{_f(y + 4)}L{_f(x + 4)},{_f(y - 4)}" '
                       f'stroke="{NODE}" stroke-width="1"/>')
        for j, zr in enumerate(report.zeros):
            z = zr.z
            stray = report.assignment[j] == "stray"
            color = STRAY if stray else IN_DISK
            out.append(f'<circle cx="{_f(X(z.real))}" cy="{_f(Y(z.imag))}" r="2.5" '
                       f'fill="{color}"/>')
            if stray:
                n_stray += 1
                out.append(f'<text x="{_f(X(z.real) + 4)}" y="{_f(Y(z.imag) - 4)}" '
                           f'font-size="9" fill="{STRAY}">s{n_stray}</text>')
            else:
                n_in += 1
    ly = plot_h + 2 * margin
    legend = [f"nodes: crosses; disks: circles, radius exaggerated x{factor:g}",
              f"zeros in disks: {n_in} (blue); strays: {n_stray} (red)"]
    if report is not None:
        legend.append(f"M = {report.M:g}; exceptional count = {report.exceptional_count}")
    for k, line in enumerate(legend):
        out.append(f'<text x="{margin}" y="{ly + 16 * k}" font-size="11">{escape(line)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"

