"""Dependency-free SVG rendering of trajectories and scalar time series.

Every plot uses a fixed 1000x1000 canvas.  The data-to-pixel map is recorded on
the root element (``data-xmin`` .. ``data-ymax``, ``data-margin``) so that the
emitted path data can be mapped back to data coordinates.
"""

from typing import Iterable, Optional, Sequence
from xml.sax.saxutils import quoteattr

import numpy as np

WIDTH = HEIGHT = 1000
MARGIN = 60
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _fmt(v: float) -> str:
    return f"{v:.3f}"


class Canvas:
    def __init__(self, xmin, xmax, ymin, ymax, kind: str, equal_aspect: bool = False):
        xmin, xmax, ymin, ymax = map(float, (xmin, xmax, ymin, ymax))
        if equal_aspect:
            half = max(xmax - xmin, ymax - ymin) / 2
            cx, cy = (xmin + xmax) / 2, (ymin + ymax) / 2
            xmin, xmax, ymin, ymax = cx - half, cx + half, cy - half, cy + half
        if not xmax > xmin:
            xmin, xmax = xmin - 0.5, xmax + 0.5
        if not ymax > ymin:
            ymin, ymax = ymin - 0.5, ymax + 0.5
        self.bounds = (xmin, xmax, ymin, ymax)
        self.kind = kind
        self.items: list = []

    def to_pixels(self, x, y):
        xmin, xmax, ymin, ymax = self.bounds
        span = WIDTH - 2 * MARGIN
        px = MARGIN + (np.asarray(x, float) - xmin) / (xmax - xmin) * span
        py = HEIGHT - MARGIN - (np.asarray(y, float) - ymin) / (ymax - ymin) * span
        return px, py

    def polyline(self, x, y, cls: str, color: str, width: float = 1.5, extra: Optional[dict] = None):
        px, py = self.to_pixels(x, y)
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(px, py))
        attrs = {"class": cls, "fill": "none", "stroke": color, "stroke-width": str(width), "points": pts}
        attrs.update(extra or {})
        self.items.append(_element("polyline", attrs))

    def text(self, x: float, y: float, s: str, anchor: str = "start", size: int = 18):
        self.items.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="sans-serif" font-size="{size}" '
            f'text-anchor="{anchor}">{_escape(s)}</text>'
        )

    def axes(self, xlabel: str, ylabel: str, title: str):
        xmin, xmax, ymin, ymax = self.bounds
        lo, hi = MARGIN, WIDTH - MARGIN
        self.items.append(
            f'<rect class="frame" x="{lo}" y="{lo}" width="{hi - lo}" height="{hi - lo}" '
            f'fill="none" stroke="#000" stroke-width="1"/>'
        )
        self.text(lo, HEIGHT - 20, f"{xmin:.4g}")
        self.text(hi, HEIGHT - 20, f"{xmax:.4g}", "end")
        self.text(WIDTH / 2, HEIGHT - 20, xlabel, "middle")
        self.text(5, hi, f"{ymin:.4g}", size=14)
        self.text(5, lo - 5, f"{ymax:.4g}", size=14)
        self.text(5, WIDTH / 2, ylabel, size=14)
        self.text(WIDTH / 2, 35, title, "middle", 22)

    def render(self) -> str:
        xmin, xmax, ymin, ymax = self.bounds
        head = _element(
            "svg",
            {
                "xmlns": "http://www.w3.org/2000/svg",
                "width": str(WIDTH), "height": str(HEIGHT),
                "viewBox": f"0 0 {WIDTH} {HEIGHT}",
                "data-kind": self.kind,
                "data-xmin": repr(xmin), "data-xmax": repr(xmax),
                "data-ymin": repr(ymin), "data-ymax": repr(ymax),
                "data-margin": str(MARGIN),
            },
            close=False,
        )
        body = "\n".join(self.items)
        return f'<?xml version="1.0" encoding="UTF-8"?>\n{head}\n<rect width="100%" height="100%" fill="#fff"/>\n{body}\n</svg>\n'


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _element(tag: str, attrs: dict, close: bool = True) -> str:
    inner = " ".join(f"{k}={quoteattr(v)}" for k, v in attrs.items())
    return f"<{tag} {inner}{'/' if close else ''}>"


def traces_svg(r: np.ndarray, center: np.ndarray, title: str = "agent traces") -> str:
    """Agent paths (first two coordinates) plus the generalized-center path.

    ``r`` has shape (m, n, d) and ``center`` shape (m, d); 1-D runs are drawn as
    position against sample index.
    """
    r = np.asarray(r, float)
    center = np.asarray(center, float)
    m, n, d = r.shape
    if d == 1:
        idx = np.arange(m, dtype=float)
        r = np.stack([np.broadcast_to(idx[:, None], (m, n)), r[..., 0]], axis=-1)
        center = np.stack([idx, center[:, 0]], axis=-1)
    xs = np.concatenate([r[..., 0].ravel(), center[:, 0]])
    ys = np.concatenate([r[..., 1].ravel(), center[:, 1]])
    cv = Canvas(xs.min(), xs.max(), ys.min(), ys.max(), "traces", equal_aspect=d > 1)
    cv.axes("x1" if d > 1 else "sample", "x2" if d > 1 else "x1", title)
    for k in range(n):
        cv.polyline(r[:, k, 0], r[:, k, 1], "agent", PALETTE[k % len(PALETTE)], extra={"data-agent": str(k + 1)})
    cv.polyline(center[:, 0], center[:, 1], "center", "#000", 2.5)
    return cv.render()


def series_svg(t: Sequence[float], values: Iterable[float], kind: str, ylabel: str, title: str) -> str:
    """One scalar curve; full-precision values are kept in ``data-values``."""
    t = np.asarray(t, float)
    v = np.asarray(list(values), float)
    cv = Canvas(t.min(), t.max(), v.min(), v.max(), kind)
    cv.axes("t", ylabel, title)
    cv.polyline(t, v, kind, PALETTE[0], 2.0, extra={"data-values": " ".join(repr(float(x)) for x in v)})
    return cv.render()
