"""Minimal self-contained SVG line plots for diagnostic time series.

No rendering dependencies: the document is assembled with the standard
ElementTree API, which also guarantees well-formed XML.  One polyline per
series, axes with tick labels, legend, and the run name as title.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET

__all__ = ["timeseries_svg", "write_timeseries_svg"]

_COLORS = ("#3572a5", "#e07b39", "#2e8b57", "#c0392b", "#7d3f98", "#5d6d7e")

_WIDTH, _HEIGHT = 900, 520
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 80, 30, 50, 55


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return [0.0]
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 0.5 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def _fmt(v: float) -> str:
    if v == 0.0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.2e}"
    return f"{v:.6g}"


def timeseries_svg(title: str, t_values, series: dict, logy: bool = False) -> str:
    """Render the given named series against time as an SVG document string.

    With ``logy`` the y axis is log10 and non-positive points are dropped.
    """
    t = [float(x) for x in t_values]
    plotted = {}
    for name, ys in series.items():
        pts = [(ti, float(yi)) for ti, yi in zip(t, ys)
               if math.isfinite(float(yi)) and (not logy or float(yi) > 0.0)]
        if logy:
            pts = [(ti, math.log10(yi)) for ti, yi in pts]
        if pts:
            plotted[name] = pts

    all_y = [y for pts in plotted.values() for _, y in pts] or [0.0, 1.0]
    all_t = [x for pts in plotted.values() for x, _ in pts] or [0.0, 1.0]
    t_lo, t_hi = min(all_t), max(all_t)
    y_lo, y_hi = min(all_y), max(all_y)
    if t_hi == t_lo:
        t_hi = t_lo + 1.0
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    x0, x1 = _MARGIN_L, _WIDTH - _MARGIN_R
    y0, y1 = _HEIGHT - _MARGIN_B, _MARGIN_T

    def sx(v):
        return x0 + (v - t_lo) / (t_hi - t_lo) * (x1 - x0)

    def sy(v):
        return y0 + (v - y_lo) / (y_hi - y_lo) * (y1 - y0)

    svg = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "width": str(_WIDTH), "height": str(_HEIGHT),
        "viewBox": f"0 0 {_WIDTH} {_HEIGHT}",
    })
    ET.SubElement(svg, "rect", {"x": "0", "y": "0", "width": str(_WIDTH),
                                "height": str(_HEIGHT), "fill": "white"})
    ET.SubElement(svg, "text", {
        "x": str(_WIDTH // 2), "y": "28", "text-anchor": "middle",
        "font-family": "sans-serif", "font-size": "18",
    }).text = title

    axis_style = {"stroke": "#333333", "stroke-width": "1"}
    ET.SubElement(svg, "line", {"x1": str(x0), "y1": str(y0), "x2": str(x1),
                                "y2": str(y0), **axis_style})
    ET.SubElement(svg, "line", {"x1": str(x0), "y1": str(y0), "x2": str(x0),
                                "y2": str(y1), **axis_style})

    for tv in _nice_ticks(t_lo, t_hi):
        if tv < t_lo - 1e-12 or tv > t_hi + 1e-12:
            continue
        px = sx(tv)
        ET.SubElement(svg, "line", {"x1": f"{px:.2f}", "y1": str(y0),
                                    "x2": f"{px:.2f}", "y2": str(y0 + 5), **axis_style})
        ET.SubElement(svg, "text", {
            "x": f"{px:.2f}", "y": str(y0 + 20), "text-anchor": "middle",
            "font-family": "sans-serif", "font-size": "12",
        }).text = _fmt(tv)
    for yv in _nice_ticks(y_lo, y_hi):
        if yv < y_lo - 1e-12 or yv > y_hi + 1e-12:
            continue
        py = sy(yv)
        ET.SubElement(svg, "line", {"x1": str(x0 - 5), "y1": f"{py:.2f}",
                                    "x2": str(x0), "y2": f"{py:.2f}", **axis_style})
        label = _fmt(yv) if not logy else f"1e{yv:g}" if yv == int(yv) else _fmt(10 ** yv)
        ET.SubElement(svg, "text", {
            "x": str(x0 - 9), "y": f"{py + 4:.2f}", "text-anchor": "end",
            "font-family": "sans-serif", "font-size": "12",
        }).text = label

    ET.SubElement(svg, "text", {
        "x": str((x0 + x1) // 2), "y": str(_HEIGHT - 12), "text-anchor": "middle",
        "font-family": "sans-serif", "font-size": "14",
    }).text = "t"

    for i, (name, pts) in enumerate(plotted.items()):
        color = _COLORS[i % len(_COLORS)]
        coords = " ".join(f"{sx(px):.2f},{sy(py):.2f}" for px, py in pts)
        ET.SubElement(svg, "polyline", {
            "points": coords, "fill": "none", "stroke": color,
            "stroke-width": "1.6",
        })
        ly = _MARGIN_T + 16 + 18 * i
        ET.SubElement(svg, "line", {
            "x1": str(x1 - 150), "y1": str(ly - 4), "x2": str(x1 - 120),
            "y2": str(ly - 4), "stroke": color, "stroke-width": "2",
        })
        ET.SubElement(svg, "text", {
            "x": str(x1 - 112), "y": str(ly), "font-family": "sans-serif",
            "font-size": "12",
        }).text = name

    return ET.tostring(svg, encoding="unicode", xml_declaration=True)


def write_timeseries_svg(path, title: str, t_values, series: dict,
                         logy: bool = False) -> None:
    with open(path, "w") as fh:
        fh.write(timeseries_svg(title, t_values, series, logy=logy))
