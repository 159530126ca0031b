"""Wall diagrams in the upper half plane as plain SVG 1.1."""

from __future__ import annotations

import math
from typing import List, Optional, Sequence, Tuple

from .walls import Wall

WIDTH = 640
HEIGHT = 360
PAD = 40


def _q(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def auto_viewport(walls: Sequence[Wall]) -> Tuple[float, float, float]:
    lo, hi, top = -1.0, 1.0, 1.0
    for w in walls:
        loc = w.locus
        if loc.kind == "circle" and loc.radius_sq > 0:
            c, R = float(loc.center), math.sqrt(float(loc.radius_sq))
            lo, hi, top = min(lo, c - R), max(hi, c + R), max(top, R)
        elif loc.kind == "line":
            lo, hi = min(lo, float(loc.line_s)), max(hi, float(loc.line_s))
    span = hi - lo
    return lo - 0.1 * span, hi + 0.1 * span, 1.15 * top


def render(walls: Sequence[Wall], viewport: Optional[Sequence] = None, labels: Tuple[str, str] = ("s", "t")) -> str:
    """One path per wall, semicircles clipped to t > 0, plus the two axes.

    Exact centers and radii become floats here and nowhere else.
    """
    s0, s1, tmax = (float(x) for x in viewport) if viewport is not None else auto_viewport(walls)
    if not (s1 > s0 and tmax > 0):
        raise ValueError("viewport needs s_min < s_max and t_max > 0")
    kx = (WIDTH - 2 * PAD) / (s1 - s0)
    ky = (HEIGHT - 2 * PAD) / tmax

    def X(s):
        return PAD + (s - s0) * kx

    def Y(t):
        return HEIGHT - PAD - t * ky

    out: List[str] = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<defs><clipPath id="upper">'
        f'<rect x="{_q(PAD)}" y="{_q(PAD)}" width="{_q(WIDTH - 2 * PAD)}" height="{_q(HEIGHT - 2 * PAD)}"/>'
        "</clipPath></defs>",
        f'<path id="axis-s" d="M {_q(PAD)} {_q(Y(0))} L {_q(WIDTH - PAD)} {_q(Y(0))}" stroke="black" fill="none"/>',
    ]
    if s0 <= 0 <= s1:
        out.append(f'<path id="axis-t" d="M {_q(X(0))} {_q(Y(0))} L {_q(X(0))} {_q(PAD)}" stroke="black" fill="none"/>')
    else:
        out.append(f'<path id="axis-t" d="M {_q(PAD)} {_q(Y(0))} L {_q(PAD)} {_q(PAD)}" stroke="black" fill="none"/>')
    out.append(f'<text x="{_q(WIDTH - PAD + 8)}" y="{_q(Y(0) + 4)}" font-size="12">{labels[0]}</text>')
    out.append(f'<text x="{_q(X(0) if s0 <= 0 <= s1 else PAD)}" y="{_q(PAD - 8)}" font-size="12">{labels[1]}</text>')
    out.append('<g clip-path="url(#upper)" stroke="#1f4e99" fill="none" stroke-width="1.5">')
    for w in walls:
        loc = w.locus
        key = ",".join(str(k) for k in w.v1.ray_key())
        if loc.kind == "circle" and loc.radius_sq > 0:
            c, R = float(loc.center), math.sqrt(float(loc.radius_sq))
            rx, ry = R * kx, R * ky
            d = f"M {_q(X(c - R))} {_q(Y(0))} A {_q(rx)} {_q(ry)} 0 0 1 {_q(X(c + R))} {_q(Y(0))}"
            out.append(f'<path class="wall" data-v1="{key}" d="{d}"/>')
        elif loc.kind == "line":
            x = X(float(loc.line_s))
            out.append(f'<path class="wall" data-v1="{key}" d="M {_q(x)} {_q(Y(0))} L {_q(x)} {_q(PAD)}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
