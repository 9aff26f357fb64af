"""Minimal SVG line charts: one polyline per curve, linear axes."""
from __future__ import annotations

import xml.etree.ElementTree as ET

from hetcache.harness import SweepResult

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 40, 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_AXIS_LABEL = {"n": "number of files n", "k": "rich-cache capacity k", "m1": "rich caches m1"}


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def _num(x: float) -> str:
    return f"{x:.4g}"


def sweep_svg(result: SweepResult, title: str | None = None) -> str:
    """Mean rate against the sweep axis, one polyline per m1 curve."""
    spec = result.spec
    curves = sorted({r.point.curve for r in result.records})
    xs = [r.point.x for r in result.records]
    ys = [r.mean for r in result.records]
    x0, x1 = min(xs), max(xs)
    y0, y1 = 0.0, max(max(ys), 1.0)
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(x):
        return LEFT + (pw * (x - x0) / (x1 - x0) if x1 > x0 else pw / 2)

    def sy(y):
        return TOP + ph - ph * (y - y0) / (y1 - y0)

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg",
                     width=str(WIDTH), height=str(HEIGHT), viewBox=f"0 0 {WIDTH} {HEIGHT}")
    ET.SubElement(svg, "rect", x="0", y="0", width=str(WIDTH), height=str(HEIGHT), fill="white")
    ET.SubElement(svg, "text", x=str(WIDTH // 2), y="22", **{"text-anchor": "middle"}).text = (
        title or f"{spec.name}: mean rate ({spec.policy}, beta={spec.beta})")

    axes = ET.SubElement(svg, "g", stroke="black")
    ET.SubElement(axes, "line", x1=str(LEFT), y1=str(TOP + ph), x2=str(LEFT + pw), y2=str(TOP + ph))
    ET.SubElement(axes, "line", x1=str(LEFT), y1=str(TOP), x2=str(LEFT), y2=str(TOP + ph))
    labels = ET.SubElement(svg, "g", **{"font-size": "11"})
    for t in _ticks(x0, x1):
        ET.SubElement(labels, "text", x=_num(sx(t)), y=str(TOP + ph + 16),
                      **{"text-anchor": "middle"}).text = _num(t)
    for t in _ticks(y0, y1):
        ET.SubElement(labels, "text", x=str(LEFT - 6), y=_num(sy(t) + 4),
                      **{"text-anchor": "end"}).text = _num(t)
    ET.SubElement(svg, "text", x=str(LEFT + pw // 2), y=str(HEIGHT - 18),
                  **{"text-anchor": "middle"}).text = _AXIS_LABEL.get(spec.axis, spec.axis)
    ET.SubElement(svg, "text", x="16", y=str(TOP + ph // 2), transform=f"rotate(-90 16 {TOP + ph // 2})",
                  **{"text-anchor": "middle"}).text = "mean transmission rate"

    for c in curves:
        recs = sorted((r for r in result.records if r.point.curve == c), key=lambda r: r.point.x)
        color = COLORS[c % len(COLORS)]
        pts = " ".join(f"{_num(sx(r.point.x))},{_num(sy(r.mean))}" for r in recs)
        if spec.axis == "m1":
            label = "rich/poor"
        else:
            div = spec.m1_divisors[c]
            label = "m1 = m" if div == 1 else f"m1 = m/{div}"
        ET.SubElement(svg, "polyline", points=pts, fill="none", stroke=color,
                      **{"stroke-width": "2", "data-curve": label})
        ly = TOP + 18 * (c + 1)
        ET.SubElement(svg, "line", x1=str(WIDTH - RIGHT + 12), y1=str(ly), x2=str(WIDTH - RIGHT + 36),
                      y2=str(ly), stroke=color, **{"stroke-width": "2"})
        ET.SubElement(svg, "text", x=str(WIDTH - RIGHT + 42), y=str(ly + 4),
                      **{"font-size": "12"}).text = label
    return ET.tostring(svg, encoding="unicode", xml_declaration=False)
