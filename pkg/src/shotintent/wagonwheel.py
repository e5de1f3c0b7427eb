"""Deterministic SVG wagon wheels: eight 45-degree sectors whose radial
extent is proportional to each region's percentage share.

Sector order runs clockwise from the top: third man, point, cover,
mid off, mid on, mid wicket, square leg, fine leg (a conventional
right-hander's wheel). Output carries no timestamps or environment state,
so identical inputs render byte-identical documents.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .casestudy import RegionDistribution
from .data import FieldRegion

SECTOR_ORDER = (
    FieldRegion.THIRD_MAN,
    FieldRegion.POINT,
    FieldRegion.COVER,
    FieldRegion.MID_OFF,
    FieldRegion.MID_ON,
    FieldRegion.MID_WICKET,
    FieldRegion.SQUARE_LEG,
    FieldRegion.FINE_LEG,
)

SECTOR_COLORS = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
    "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
)

_CX = 210.0
_CY = 210.0
_R_MAX = 160.0
_R_GUIDE = 160.0


@dataclass(frozen=True)
class WagonWheel:
    """Eight sector percentages in canonical order plus labeling."""

    sectors: tuple[float, ...]
    title: str
    class_label: str = ""

    def __post_init__(self):
        if len(self.sectors) != 8:
            raise ValueError(f"expected 8 sectors, got {len(self.sectors)}")
        total = sum(self.sectors)
        if abs(total - 100.0) > 1e-6 and abs(total) > 1e-6:
            raise ValueError(f"sectors sum to {total}, expected 100 or 0")


def wheel_from_distribution(
    dist: RegionDistribution, title: str, class_label: str = ""
) -> WagonWheel:
    return WagonWheel(
        sectors=tuple(dist.shares[region] for region in SECTOR_ORDER),
        title=title,
        class_label=class_label,
    )


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _polar(angle_deg: float, radius: float) -> tuple[float, float]:
    # angle measured clockwise from 12 o'clock; SVG y grows downward
    rad = math.radians(angle_deg)
    return (_CX + radius * math.sin(rad), _CY - radius * math.cos(rad))


def _sector_path(index: int, radius: float) -> str:
    a0 = 45.0 * index
    a1 = a0 + 45.0
    x0, y0 = _polar(a0, radius)
    x1, y1 = _polar(a1, radius)
    return (
        f"M {_fmt(_CX)} {_fmt(_CY)} L {_fmt(x0)} {_fmt(y0)} "
        f"A {_fmt(radius)} {_fmt(radius)} 0 0 1 {_fmt(x1)} {_fmt(y1)} Z"
    )


def render_wagon_wheel(dist: RegionDistribution | WagonWheel, title: str = "") -> str:
    """Render one distribution as a standalone SVG document."""
    if isinstance(dist, RegionDistribution):
        wheel = wheel_from_distribution(dist, title)
    else:
        wheel = dist
        title = title or wheel.title

    width, height = 420, 560
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
        f'<text x="{_fmt(_CX)}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{_escape(title)}</text>',
        f'<circle cx="{_fmt(_CX)}" cy="{_fmt(_CY)}" r="{_fmt(_R_GUIDE)}" '
        'fill="none" stroke="#cccccc" stroke-width="1"/>',
    ]
    for i in range(8):
        a = 45.0 * i
        x, y = _polar(a, _R_GUIDE)
        parts.append(
            f'<line x1="{_fmt(_CX)}" y1="{_fmt(_CY)}" x2="{_fmt(x)}" y2="{_fmt(y)}" '
            'stroke="#dddddd" stroke-width="1"/>'
        )
    for i, pct in enumerate(wheel.sectors):
        radius = _R_MAX * pct / 100.0
        if radius > 0.0:
            parts.append(
                f'<path d="{_sector_path(i, radius)}" fill="{SECTOR_COLORS[i]}" '
                'fill-opacity="0.8" stroke="#333333" stroke-width="0.5"/>'
            )
        lx, ly = _polar(45.0 * i + 22.5, _R_GUIDE + 18.0)
        parts.append(
            f'<text x="{_fmt(lx)}" y="{_fmt(ly)}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">'
            f"{_escape(SECTOR_ORDER[i].value)}</text>"
        )
    legend_y = 430
    for i, pct in enumerate(wheel.sectors):
        y = legend_y + 15 * i
        parts.append(
            f'<rect x="40" y="{y - 9}" width="10" height="10" '
            f'fill="{SECTOR_COLORS[i]}"/>'
        )
        parts.append(
            f'<text x="56" y="{y}" font-family="sans-serif" font-size="11">'
            f"{_escape(SECTOR_ORDER[i].value)}: {pct:.1f}%</text>"
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )
