"""Minimal SVG line plots, enough for uplift-curve figures."""

from __future__ import annotations

from dataclasses import dataclass, field

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class Series:
    label: str
    xs: list[float]
    ys: list[float]
    dashed: bool = False
    color: str | None = None


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / n
    return [lo + i * step for i in range(n + 1)]


def line_plot(series: list[Series], title: str = "", x_label: str = "", y_label: str = "",
              width: int = 720, height: int = 480) -> str:
    """Render series as an SVG document string."""
    pad_l, pad_r, pad_t, pad_b = 64, 160, 36, 48
    xs_all = [x for s in series for x in s.xs]
    ys_all = [y for s in series for y in s.ys]
    x_lo, x_hi = min(xs_all, default=0.0), max(xs_all, default=1.0)
    y_lo, y_hi = min(ys_all, default=0.0), max(ys_all, default=1.0)
    y_lo, y_hi = min(y_lo, 0.0), max(y_hi, 0.0)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    plot_w, plot_h = width - pad_l - pad_r, height - pad_t - pad_b

    def px(x: float) -> float:
        return pad_l + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return pad_t + (y_hi - y) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]
    for tx in _ticks(x_lo, x_hi):
        parts.append(f'<line x1="{px(tx):.1f}" y1="{pad_t + plot_h}" x2="{px(tx):.1f}" '
                     f'y2="{pad_t + plot_h + 4}" stroke="black"/>')
        parts.append(f'<text x="{px(tx):.1f}" y="{pad_t + plot_h + 18}" '
                     f'text-anchor="middle">{tx:g}</text>')
    for ty in _ticks(y_lo, y_hi):
        parts.append(f'<line x1="{pad_l - 4}" y1="{py(ty):.1f}" x2="{pad_l}" '
                     f'y2="{py(ty):.1f}" stroke="black"/>')
        parts.append(f'<text x="{pad_l - 8}" y="{py(ty) + 4:.1f}" '
                     f'text-anchor="end">{ty:.3g}</text>')
    parts.append(f'<rect x="{pad_l}" y="{pad_t}" width="{plot_w}" height="{plot_h}" '
                 f'fill="none" stroke="black"/>')
    parts.append(f'<text x="{pad_l + plot_w / 2:.1f}" y="{height - 8}" '
                 f'text-anchor="middle">{x_label}</text>')
    parts.append(f'<text x="16" y="{pad_t + plot_h / 2:.1f}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {pad_t + plot_h / 2:.1f})">{y_label}</text>')

    for i, s in enumerate(series):
        color = s.color or PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(s.xs, s.ys))
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"'
                     f'{dash} points="{pts}"/>')
        ly = pad_t + 16 + 18 * i
        parts.append(f'<line x1="{pad_l + plot_w + 10}" y1="{ly}" '
                     f'x2="{pad_l + plot_w + 34}" y2="{ly}" stroke="{color}"'
                     f' stroke-width="1.5"{dash}/>')
        parts.append(f'<text x="{pad_l + plot_w + 40}" y="{ly + 4}">{s.label}</text>')
    parts.append("</svg>")
    return "\n".join(parts)
