"""Self-contained SVG line and scatter plots.

Pure text emission with fixed formatting: identical inputs yield
byte-identical files, and nothing here needs an external renderer.
"""

import math

from .errors import ConfigurationError

_PALETTE = ("#c0392b", "#2980b9", "#27ae60", "#8e44ad", "#d68910", "#17202a")
_W, _H = 720, 480
_ML, _MR, _MT, _MB = 72, 24, 40, 56


def _nice_ticks(lo, hi, target=6):
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ConfigurationError("cannot build axis over non-finite range")
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    raw = span / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * span:
        ticks.append(0.0 if abs(t) < 1e-12 * span else t)
        t += step
    return ticks


def _decade_ticks(lo, hi):
    ticks = []
    e = math.floor(math.log10(lo))
    while 10.0**e <= hi * (1 + 1e-12):
        if 10.0**e >= lo * (1 - 1e-12):
            ticks.append(10.0**e)
        e += 1
    return ticks or [lo, hi]


class _Axis:
    def __init__(self, lo, hi, log, pixel_lo, pixel_hi):
        self.log = log
        if log:
            if lo <= 0:
                raise ConfigurationError("log axis requires positive data")
            self.lo, self.hi = math.log10(lo), math.log10(hi)
            if self.lo == self.hi:
                self.lo, self.hi = self.lo - 0.5, self.hi + 0.5
            self.ticks = _decade_ticks(lo, hi)
        else:
            self.ticks = _nice_ticks(lo, hi)
            pad = 0.03 * ((hi - lo) or 1.0)
            self.lo, self.hi = lo - pad, hi + pad
        self.pixel_lo, self.pixel_hi = pixel_lo, pixel_hi

    def to_px(self, v):
        x = math.log10(v) if self.log else v
        frac = (x - self.lo) / (self.hi - self.lo)
        return self.pixel_lo + frac * (self.pixel_hi - self.pixel_lo)


def _finite_points(xs, ys, log_x, log_y):
    pts = []
    for x, y in zip(xs, ys):
        ok = math.isfinite(x) and math.isfinite(y)
        if ok and ((not log_x or x > 0) and (not log_y or y > 0)):
            pts.append((float(x), float(y)))
        else:
            pts.append(None)
    return pts


def render_plot(series, log_x=False, log_y=False, title="", xlabel="", ylabel=""):
    """Render labelled series to an SVG string.

    ``series`` is a list of (label, xs, ys, kind) with kind one of ``line``,
    ``dashed``, ``scatter``. Non-finite points (and non-positive ones on log
    axes) break lines and are dropped from scatters.
    """
    cleaned = [(label, _finite_points(xs, ys, log_x, log_y), kind)
               for label, xs, ys, kind in series]
    flat = [p for _, pts, _ in cleaned for p in pts if p is not None]
    if not flat:
        raise ConfigurationError("nothing to plot: no finite data points")
    xmin = min(p[0] for p in flat)
    xmax = max(p[0] for p in flat)
    ymin = min(p[1] for p in flat)
    ymax = max(p[1] for p in flat)
    ax = _Axis(xmin, xmax, log_x, _ML, _W - _MR)
    ay = _Axis(ymin, ymax, log_y, _H - _MB, _MT)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="Helvetica,Arial,sans-serif">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.2f}" y="22" text-anchor="middle" font-size="15">{title}</text>',
    ]
    for t in ax.ticks:
        px = ax.to_px(t)
        out.append(f'<line x1="{px:.2f}" y1="{_MT}" x2="{px:.2f}" y2="{_H - _MB}" '
                   f'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{px:.2f}" y="{_H - _MB + 18}" text-anchor="middle" '
                   f'font-size="11">{t:g}</text>')
    for t in ay.ticks:
        py = ay.to_px(t)
        out.append(f'<line x1="{_ML}" y1="{py:.2f}" x2="{_W - _MR}" y2="{py:.2f}" '
                   f'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{_ML - 6}" y="{py + 4:.2f}" text-anchor="end" '
                   f'font-size="11">{t:g}</text>')
    out.append(f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
               f'height="{_H - _MT - _MB}" fill="none" stroke="#333333"/>')
    out.append(f'<text x="{(_ML + _W - _MR) / 2:.2f}" y="{_H - 14}" '
               f'text-anchor="middle" font-size="13">{xlabel}</text>')
    out.append(f'<text x="18" y="{(_MT + _H - _MB) / 2:.2f}" text-anchor="middle" '
               f'font-size="13" transform="rotate(-90 18 {(_MT + _H - _MB) / 2:.2f})">'
               f'{ylabel}</text>')

    for idx, (label, pts, kind) in enumerate(cleaned):
        color = _PALETTE[idx % len(_PALETTE)]
        if kind == "scatter":
            for p in pts:
                if p is not None:
                    out.append(f'<circle cx="{ax.to_px(p[0]):.2f}" '
                               f'cy="{ay.to_px(p[1]):.2f}" r="3.5" fill="{color}"/>')
        else:
            dash = ' stroke-dasharray="6,4"' if kind == "dashed" else ""
            run = []
            for p in pts + [None]:
                if p is not None:
                    run.append(f"{ax.to_px(p[0]):.2f},{ay.to_px(p[1]):.2f}")
                elif run:
                    out.append(f'<polyline points="{" ".join(run)}" fill="none" '
                               f'stroke="{color}" stroke-width="1.5"{dash}/>')
                    run = []
        ly = _MT + 16 + 16 * idx
        out.append(f'<rect x="{_W - _MR - 150}" y="{ly - 9}" width="12" height="12" '
                   f'fill="{color}"/>')
        out.append(f'<text x="{_W - _MR - 133}" y="{ly + 1}" font-size="12">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def save_svg(path, svg_text):
    with open(path, "w", newline="") as fh:
        fh.write(svg_text)
