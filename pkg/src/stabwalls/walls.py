"""Numerical walls: loci, finite enumeration along a ray, chambers."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from .charge import (
    StabilityPoint,
    beta_decompose,
    central_charge,
    d0_closed_form,
    dmin_closed_form,
    large_volume_threshold,
)
from .lattice import (
    CharVector,
    InputError,
    LogicError,
    SurfaceLattice,
    Vec,
    classes_of_degree,
    exp_twist,
    frac,
    lcm,
    mukai_pair,
    primitive_integral,
    proportional,
    vadd,
    vec,
    vscale,
)
from .ximap import UndefinedFiber, xi_vector

NUMERICAL = "numerical"
NECESSARY = "passes-necessary-test"
NESTED = "verified-nested"


@dataclass(frozen=True)
class STChart:
    """beta = beta0 + D_part + s H_dir, omega = t H_dir."""

    beta0: Vec
    H_dir: Vec
    D_part: Vec

    @classmethod
    def make(cls, beta0, H_dir, D_part=None) -> "STChart":
        beta0, H_dir = vec(beta0), vec(H_dir)
        D_part = (Fraction(0),) * len(beta0) if D_part is None else vec(D_part)
        return cls(beta0, H_dir, D_part)

    @classmethod
    def through(cls, beta, L: SurfaceLattice, H=None) -> "STChart":
        """The chart whose s-axis passes through beta; beta sits at s = (beta, H)/(H^2)."""
        H = L.H if H is None else vec(H)
        return cls(L.perp_H(vec(beta), H), H, (Fraction(0),) * L.rho)

    @property
    def base(self) -> Vec:
        return vadd(self.beta0, self.D_part)

    def point(self, s, t_sq) -> StabilityPoint:
        return StabilityPoint(vadd(self.base, vscale(frac(s), self.H_dir)), self.H_dir, frac(t_sq), "st")

    def s_of(self, beta, L: SurfaceLattice) -> Fraction:
        """The s coordinate of a beta lying in this chart's plane."""
        return L.dot(beta, self.H_dir) / L.sq(self.H_dir) - L.dot(self.base, self.H_dir) / L.sq(self.H_dir)


@dataclass(frozen=True)
class WallLocus:
    """Zero set of Im(Z(v1) conj Z(v)) / t in an st-chart.

    ``kind`` is "circle" (t^2 + (s - center)^2 = radius_sq), "line"
    (s = line_s), "everywhere" or "empty".
    """

    kind: str
    chart: STChart
    center: Optional[Fraction] = None
    radius_sq: Optional[Fraction] = None
    line_s: Optional[Fraction] = None
    # Im(Z1 conj Z)/t = scale * (F(s, t)), with F below; kept to read off sides
    scale: Fraction = Fraction(1)

    @property
    def meets_upper_half(self) -> bool:
        if self.kind == "circle":
            return self.radius_sq > 0
        return self.kind in ("line", "everywhere")

    def equation(self, s, t_sq) -> Fraction:
        s, t_sq = frac(s), frac(t_sq)
        if self.center is not None:
            return t_sq + (s - self.center) ** 2 - self.radius_sq
        if self.kind == "line":
            return s - self.line_s
        return Fraction(1) if self.kind == "empty" else Fraction(0)


@dataclass(frozen=True)
class Wall:
    v1: CharVector
    locus: WallLocus
    tags: FrozenSet[str] = frozenset({NUMERICAL})

    def with_tag(self, tag: str) -> "Wall":
        return Wall(self.v1, self.locus, self.tags | {tag})


def on_wall(v: CharVector, v1: CharVector, sp: StabilityPoint, L: SurfaceLattice) -> bool:
    z = central_charge(v, sp, L)
    if z.vanishes:
        raise UndefinedFiber("Z(v) vanishes, the wall condition is undefined")
    if proportional(v1, v):
        return False
    z1 = central_charge(v1, sp, L)
    return z1.re * z.im - z1.im * z.re == 0


def _twisted_triple(x: CharVector, chart: STChart, L: SurfaceLattice):
    y = exp_twist(x, tuple(-b for b in chart.base), L)
    return y.r, L.dot(y.c1, chart.H_dir), y.s


def locus_in_chart(v: CharVector, v1: CharVector, chart: STChart, L: SurfaceLattice) -> WallLocus:
    """Solve Im(Z(v1) conj Z(v)) = 0 exactly on the chart.

    With (r, c, a) the rank, H-degree and ch2 of e^{-base} v, and alpha =
    r c1 - r1 c, one has
        Im(Z(v1) conj Z(v)) / t = (alpha h / 2)(s^2 + t^2) - s h (r a1 - r1 a) - (c1 a - a1 c).
    """
    h = L.sq(chart.H_dir)
    r, c, a = _twisted_triple(v, chart, L)
    r1, c1, a1 = _twisted_triple(v1, chart, L)
    alpha = r * c1 - r1 * c
    lin = r * a1 - r1 * a
    const = c1 * a - a1 * c
    if alpha != 0:
        center = lin / alpha
        radius_sq = center * center + 2 * const / (alpha * h)
        kind = "circle" if radius_sq > 0 else "empty"
        # Im(Z1 conj Z)/t = (alpha h/2) * (t^2 + (s - center)^2 - radius_sq)
        return WallLocus(kind, chart, center, radius_sq, None, alpha * h / 2)
    if lin != 0:
        # Im(Z1 conj Z)/t = -h lin (s - line_s)
        return WallLocus("line", chart, None, None, -const / (h * lin), -h * lin)
    if const == 0:
        return WallLocus("everywhere", chart)
    return WallLocus("empty", chart, scale=-const)


def wall_locus(v: CharVector, v1: CharVector, H_dir, D_part, L: SurfaceLattice, beta0=None) -> Wall:
    """The wall of v1 in the chart (beta0 + s H + D', t H); beta0 defaults to delta."""
    if proportional(v1, v):
        raise InputError("v1 is proportional to v and defines no wall")
    if beta0 is None:
        beta0 = v.delta() if v.r != 0 else (Fraction(0),) * L.rho
    chart = STChart.make(beta0, H_dir, D_part)
    return Wall(v1, locus_in_chart(v, v1, chart, L))


def necessary_test(v: CharVector, v1: CharVector, L: SurfaceLattice) -> bool:
    """(v1^2) >= 0, (v2^2) >= 0 and (v1, v2) > 0 for v2 = v - v1."""
    v2 = v - v1
    return mukai_pair(v1, v1, L) >= 0 and mukai_pair(v2, v2, L) >= 0 and mukai_pair(v1, v2, L) > 0


@dataclass(frozen=True)
class Caps:
    """Enumeration limits.  ``None`` means the bound derived from v and beta."""

    r1: Optional[int] = None
    den: int = 1
    dsq: Optional[Fraction] = None
    ch2: str = "chern"
    max_classes: int = 100000

    def __post_init__(self):
        if self.den < 1:
            raise InputError("den must be a positive integer")
        if self.ch2 not in ("chern", "half"):
            raise InputError("ch2 must be 'chern' or 'half'")
        if self.r1 is not None and self.r1 < 0:
            raise InputError("the r1 cap must be non-negative")
        if self.dsq is not None:
            object.__setattr__(self, "dsq", frac(self.dsq))

    def as_dict(self) -> dict:
        return {
            "r1": self.r1,
            "den": self.den,
            "dsq": None if self.dsq is None else str(self.dsq),
            "ch2": self.ch2,
            "max_classes": self.max_classes,
        }


@dataclass
class Enumeration:
    walls: List[Wall]
    truncated: bool
    bounds: Dict[str, object]
    d_beta: Fraction
    degenerate_pairs: int = 0
    notes: List[str] = field(default_factory=list)


class _Interval:
    """{a : lo <(=) a <(=) hi}, built from linear constraints k a + m > 0 or >= 0."""

    def __init__(self):
        self.lo: Optional[Fraction] = None
        self.lo_open = False
        self.hi: Optional[Fraction] = None
        self.hi_open = False
        self.empty = False

    def add(self, k: Fraction, m: Fraction, strict: bool):
        if k == 0:
            if m < 0 or (strict and m == 0):
                self.empty = True
            return
        x = -m / k
        if k > 0:
            if self.lo is None or x > self.lo or (x == self.lo and strict):
                self.lo, self.lo_open = x, strict
        else:
            if self.hi is None or x < self.hi or (x == self.hi and strict):
                self.hi, self.hi_open = x, strict

    def bounded(self) -> bool:
        return self.lo is not None and self.hi is not None

    def is_empty(self) -> bool:
        if self.empty:
            return True
        if self.bounded():
            if self.lo > self.hi:
                return True
            if self.lo == self.hi and (self.lo_open or self.hi_open):
                return True
        return False

    def contains(self, x: Fraction) -> bool:
        if self.lo is not None and (x < self.lo or (self.lo_open and x == self.lo)):
            return False
        if self.hi is not None and (x > self.hi or (self.hi_open and x == self.hi)):
            return False
        return not self.empty


def _progression(lo: Fraction, hi: Fraction, base: Fraction, step: Fraction):
    """Points base + k step in [lo, hi]."""
    kmin = -floor(-(lo - base) / step)
    kmax = floor((hi - base) / step)
    for k in range(kmin, kmax + 1):
        yield base + k * step


def enumerate_wall_classes(
    v: CharVector,
    beta,
    H,
    L: SurfaceLattice,
    caps: Optional[Caps] = None,
    chart: Optional[STChart] = None,
    candidate_filter: Optional[Callable[[CharVector], bool]] = None,
) -> Enumeration:
    """Classes v1 whose wall meets the ray {(beta, tH) : t > 0}.

    Writing v = e^beta (r + dH + D + a rho) and v1 likewise with
    (r1, d1, D1, a1), the candidates satisfy 0 < d1 < d,
    d1^2 h - 2 r1 a1 >= 0, the same for v2 = v - v1, and
    (v1, v2) - (D1, D2) = d1 d2 h - r1 a2 - r2 a1 > 0, and their wall meets
    the ray: t^2 = 2 (d a1 - d1 a) / (h (d r1 - d1 r)) > 0.  For fixed
    (r1, d1) all four conditions are linear in a1.  Since the three
    quadratic quantities add up to (v^2) - (D^2), |r1 a1| is bounded, and
    a1 lies in (1/(2 B^2 den^2)) Z, which bounds r1.  D1 ranges over classes
    with -(D1^2) <= dsq.
    """
    caps = caps or Caps()
    H = vec(H)
    beta = vec(beta)
    h = L.sq(H)
    L.check(v)
    dec = beta_decompose(v, beta, H, L)
    r, d, a = v.r, dec.d_beta, dec.a_beta
    if d <= 0:
        raise InputError("enumeration needs d_beta(v) > 0")
    if r.denominator != 1:
        raise InputError("v must have integral rank")
    P = d * d * h - 2 * r * a
    B = 1
    for x in beta:
        B = lcm(B, x.denominator)
    den = caps.den
    amin = Fraction(1, 2 * B * B * den * den)
    T = max(d * d * h, P) / 2
    r_bound = floor(T / amin)
    if a != 0:
        r_bound = max(r_bound, floor((abs(r * a) + d * d * h / 2) / abs(a)))
    truncated = False
    r_use = r_bound
    if caps.r1 is not None and caps.r1 < r_bound:
        r_use = caps.r1
        truncated = True
    dsq = P if caps.dsq is None else caps.dsq
    if caps.dsq is not None and caps.dsq < P:
        truncated = True
    mu = L.mu()
    deg_step = Fraction(mu, den)
    bH = L.dot(beta, H)
    b_sq = L.sq(beta)
    chart = chart or STChart.through(beta, L, H)

    found: Dict[Tuple[int, ...], Tuple[Fraction, CharVector]] = {}
    degenerate = 0
    notes: List[str] = []
    stop = False
    for r1 in range(-r_use, r_use + 1):
        if stop:
            break
        lo_e = r1 * bH
        hi_e = lo_e + d * h
        # degrees e = (c1(v1), H) in (lo_e, hi_e) on the lattice deg_step Z
        kmin = floor(lo_e / deg_step) + 1
        kmax = -floor(-hi_e / deg_step) - 1
        for k in range(kmin, kmax + 1):
            e = k * deg_step
            d1 = (e - r1 * bH) / h
            if not 0 < d1 < d:
                continue
            d2 = d - d1
            r2 = r - r1
            w_den = d * r1 - d1 * r
            iv = _Interval()
            iv.add(Fraction(-2 * r1), d1 * d1 * h, False)
            iv.add(Fraction(2 * r2), d2 * d2 * h - 2 * r2 * a, False)
            iv.add(Fraction(2 * r1) - r, d1 * d2 * h - r1 * a, True)
            if w_den == 0:
                # (r1, d1, a1) proportional to (r, d, a) is the only way to
                # sit on this ray identically; such classes give no wall here
                if iv.contains(d1 * a / d):
                    degenerate += 1
                continue
            sgn = 1 if w_den > 0 else -1
            iv.add(sgn * d, -sgn * d1 * a, True)
            if iv.is_empty():
                continue
            if not iv.bounded():
                raise LogicError("unbounded a1 range; the finiteness argument failed")
            for c1 in classes_of_degree(L, e, dsq, den, shift=vscale(r1, beta), H=H):
                # s1 = a1 + (c1, beta) - r1 (beta^2)/2
                off = L.dot(c1, beta) - r1 * b_sq / 2
                if caps.ch2 == "chern":
                    base, step = L.sq(c1) / 2, Fraction(1, den * den)
                else:
                    base, step = Fraction(0), Fraction(1, 2 * den * den)
                for s1 in _progression(iv.lo + off, iv.hi + off, base, step):
                    if not iv.contains(s1 - off):
                        continue
                    v1 = CharVector(Fraction(r1), c1, s1)
                    if proportional(v1, v):
                        continue
                    if candidate_filter is not None and not candidate_filter(v1):
                        continue
                    key, k_scale = primitive_integral(v1.entries())
                    prev = found.get(key)
                    if prev is None or k_scale > prev[0]:
                        found[key] = (k_scale, v1)
                    if len(found) > caps.max_classes:
                        truncated = True
                        stop = True
                        notes.append(f"stopped after {caps.max_classes} classes")
                        break
                if stop:
                    break
            if stop:
                break
    walls = []
    for _, v1 in sorted(found.values(), key=lambda kv: kv[1].entries()):
        w = Wall(v1, locus_in_chart(v, v1, chart, L))
        if necessary_test(v, v1, L):
            w = w.with_tag(NECESSARY)
        walls.append(w)
    walls.sort(key=lambda w: w.v1.entries())
    bounds = {"r1": r_use, "r1_derived": r_bound, "dsq": str(dsq), "den": den, "ch2": caps.ch2, "a1_step": str(amin)}
    if degenerate:
        notes.append(f"{degenerate} (r1, d1) pairs proportional to (r, d, a) along this ray were skipped")
    return Enumeration(walls, truncated, bounds, d, degenerate, notes)


def ray_crossing(v: CharVector, wall: Wall, beta, H, L: SurfaceLattice) -> Optional[Fraction]:
    """t^2 at which the wall meets the ray (beta, tH), or None."""
    dec = beta_decompose(v, beta, H, L)
    d1 = beta_decompose(wall.v1, beta, H, L)
    h = L.sq(vec(H))
    den = dec.d_beta * d1.r - d1.d_beta * dec.r
    if den == 0:
        return None
    t_sq = 2 * (dec.d_beta * d1.a_beta - d1.d_beta * dec.a_beta) / (h * den)
    return t_sq if t_sq > 0 else None


def walls_digest(walls: Sequence[Wall]) -> str:
    keys = sorted(w.v1.ray_key() for w in walls)
    text = ";".join(",".join(str(k) for k in key) for key in keys)
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def _key_str(key: Tuple[int, ...]) -> str:
    return "(" + ",".join(str(k) for k in key) + ")"


@dataclass(frozen=True)
class Chamber:
    id: str
    sample_point: StabilityPoint
    is_gieseker: bool
    signs: Tuple[Tuple[Tuple[int, ...], int], ...]
    digest: str


@dataclass(frozen=True)
class OnWall:
    wall: Wall
    sample_point: StabilityPoint

    @property
    def label(self) -> str:
        return "on wall " + _key_str(self.wall.v1.ray_key())


def _signs(v: CharVector, sp: StabilityPoint, walls: Sequence[Wall], L: SurfaceLattice):
    u = xi_vector(v, sp, L)
    out = []
    for w in walls:
        val = mukai_pair(u, w.v1, L)
        if val == 0:
            return None, w
        out.append((w.v1.ray_key(), 1 if val > 0 else -1))
    out.sort()
    return tuple(out), None


def _label(signs, digest: str) -> str:
    body = ",".join(_key_str(k) + ("+" if s > 0 else "-") for k, s in signs)
    return f"walls:{digest}|{body}"


def gieseker_threshold(v: CharVector, beta, H, L: SurfaceLattice, d0=None, dmin=None) -> Fraction:
    H = vec(H)
    d0 = d0_closed_form(L, H) if d0 is None else frac(d0)
    if dmin is None:
        b = vec(beta) if v.r >= 0 else tuple(-x for x in vec(beta))
        dmin = dmin_closed_form(L, b, H)
    return large_volume_threshold(v, beta, H, L, d0, dmin)


def chamber_of(
    v: CharVector,
    sp: StabilityPoint,
    walls: Sequence[Wall],
    L: SurfaceLattice,
    H=None,
    d0=None,
    dmin=None,
) -> Union[Chamber, OnWall]:
    """Chamber label of sp relative to the given wall list.

    The side of sp against the wall of v1 is the sign of (xi(sp), v1), which
    is constant along xi-fibers.  ``is_gieseker`` holds when omega is on the
    ray R_{>0} H and either (omega^2) exceeds the large-volume threshold or
    the label agrees with a point of the same ray above it.
    """
    H = L.H if H is None else vec(H)
    digest = walls_digest(walls)
    signs, hit = _signs(v, sp, walls, L)
    if hit is not None:
        return OnWall(hit, sp)
    giese = False
    if proportional(sp.omega, H) and L.dot(sp.omega, H) > 0:
        dec = beta_decompose(v, sp.beta, H, L)
        if dec.d_beta > 0:
            thr = gieseker_threshold(v, sp.beta, H, L, d0, dmin)
            if sp.omega_sq(L) > thr:
                giese = True
            else:
                target = max(thr, Fraction(0)) + 1
                q = target / L.sq(H)
                for _ in range(64):
                    ref = StabilityPoint(sp.beta, H, q)
                    ref_signs, ref_hit = _signs(v, ref, walls, L)
                    if ref_hit is None:
                        break
                    q += 1
                giese = ref_hit is None and ref_signs == signs
    return Chamber(_label(signs, digest), sp, giese, signs, digest)


@dataclass
class NestingReport:
    ok: bool
    violations: List[Tuple[CharVector, CharVector]]


def _crosses(a: WallLocus, b: WallLocus) -> bool:
    if a.kind == "circle" and b.kind == "circle":
        if a.radius_sq <= 0 or b.radius_sq <= 0:
            return False
        dd = (a.center - b.center) ** 2
        lhs = (dd - a.radius_sq - b.radius_sq) ** 2
        return lhs < 4 * a.radius_sq * b.radius_sq
    if a.kind == "line" and b.kind == "circle":
        return b.radius_sq > 0 and (a.line_s - b.center) ** 2 < b.radius_sq
    if a.kind == "circle" and b.kind == "line":
        return _crosses(b, a)
    return False


def nested_circles_check(walls: Sequence[Wall]) -> NestingReport:
    """Pairwise test that no two walls cross transversally in t > 0.

    Two circles cross iff |R1 - R2| < |c1 - c2| < R1 + R2, which squares to
    ((c1 - c2)^2 - R1^2 - R2^2)^2 < 4 R1^2 R2^2.  Tangency is allowed.
    """
    bad = []
    for i in range(len(walls)):
        for j in range(i + 1, len(walls)):
            if _crosses(walls[i].locus, walls[j].locus):
                bad.append((walls[i].v1, walls[j].v1))
    return NestingReport(not bad, bad)


def mark_nested(walls: Sequence[Wall]) -> List[Wall]:
    """Tag every wall when the family passes the nesting check."""
    if nested_circles_check(walls).ok:
        return [w.with_tag(NESTED) for w in walls]
    return list(walls)


def window_walls(
    v: CharVector,
    s_lo,
    s_hi,
    L: SurfaceLattice,
    caps: Optional[Caps] = None,
) -> Enumeration:
    """Walls meeting the strip {(delta + sH, tH) : s_lo <= s < s_hi, t > 0} on a
    Picard rank one surface, with s_hi <= 0.

    Numerical walls for fixed v are nested semicircles, and those left of the
    vertical wall s = 0 all enclose the point s* = -sqrt((v^2)/(r^2 (H^2)))
    where Z(v) vanishes on t = 0.  If s* < s_lo, a wall meeting the strip
    must therefore meet the ray at s_lo, so enumerating that ray and keeping
    the walls that reach into the strip is exact.
    """
    if L.rho != 1:
        raise InputError("window enumeration is implemented for Picard rank one")
    if v.r <= 0:
        raise InputError("window enumeration needs positive rank")
    s_lo, s_hi = frac(s_lo), frac(s_hi)
    if not s_lo < s_hi <= 0:
        raise InputError("need s_lo < s_hi <= 0")
    h = L.h
    vsq = mukai_pair(v, v, L)
    # s* < s_lo  <=>  s_lo >= 0 or s_lo^2 < (v^2)/(r^2 h)
    if vsq < 0 or not (s_lo * s_lo * v.r * v.r * h < vsq):
        raise InputError("the window must lie strictly right of the limit point of the nested walls")
    delta = v.delta()
    beta = vadd(delta, vscale(s_lo, L.H))
    chart = STChart.make(delta, L.H)
    res = enumerate_wall_classes(v, beta, L.H, L, caps, chart=chart)
    keep = []
    for w in res.walls:
        loc = w.locus
        if loc.kind == "circle":
            # the open interval (c - R, c + R) meets [s_lo, s_hi)
            right_ok = loc.center >= s_lo or (s_lo - loc.center) ** 2 < loc.radius_sq
            left_ok = loc.center < s_hi or (loc.center - s_hi) ** 2 < loc.radius_sq
            if loc.radius_sq > 0 and right_ok and left_ok:
                keep.append(w)
        elif loc.kind == "line" and s_lo <= loc.line_s < s_hi:
            keep.append(w)
    res.walls = keep
    res.notes.append(f"strip [{s_lo}, {s_hi}) reduced to the ray s = {s_lo}")
    return res
