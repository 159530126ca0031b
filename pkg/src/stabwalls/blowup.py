"""Computations specific to a blow-up X -> Y with exceptional curve C."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor, gcd
from typing import List, Optional, Tuple

from .charge import StabilityPoint, central_charge
from .lattice import (
    CharVector,
    InputError,
    SurfaceLattice,
    Vec,
    exp_class,
    exp_twist,
    frac,
    mukai_pair,
    vadd,
    vec,
    vscale,
    vsub,
)
from .walls import Caps, Chamber, OnWall, STChart, Wall, chamber_of, locus_in_chart, on_wall
from .ximap import FiberCircle, fiber_circle


@dataclass(frozen=True)
class PerverseIndex:
    """l with l - 1/2 < (beta, C) < l + 1/2; on the boundary (beta, C) = l - 1/2
    both adjacent indices l - 1 and l are reported."""

    l: int
    boundary: bool
    value: Fraction

    @property
    def adjacent(self) -> Tuple[int, ...]:
        return (self.l - 1, self.l) if self.boundary else (self.l,)


def _index_of(value: Fraction) -> PerverseIndex:
    shifted = value + Fraction(1, 2)
    if shifted.denominator == 1:
        return PerverseIndex(int(shifted), True, value)
    return PerverseIndex(floor(shifted), False, value)


def category_index(beta, L: SurfaceLattice) -> PerverseIndex:
    C = L.require_C()
    return _index_of(L.dot(vec(beta), C))


def oc_char(a: int, L: SurfaceLattice) -> CharVector:
    """v(O_C(a)) = (0, C, a + 1/2)."""
    C = L.require_C()
    return CharVector(Fraction(0), C, Fraction(a) + Fraction(1, 2))


@dataclass(frozen=True)
class SqChartPoint:
    """xi(delta + sH + pC, H - qC) = (positive) e^delta (H + xC + y(1 + (v^2)/(2r^2) rho))."""

    s: Fraction
    q: Fraction
    p: Fraction
    epsilon: Fraction
    x: Fraction
    y: Fraction

    def stability_point(self, v: CharVector, L: SurfaceLattice) -> StabilityPoint:
        C = L.require_C()
        beta = vadd(vadd(v.delta(), vscale(self.s, L.H)), vscale(self.p, C))
        return StabilityPoint(beta, vsub(L.H, vscale(self.q, C)), Fraction(1), "sq")

    def xi_rep(self, v: CharVector, L: SurfaceLattice) -> CharVector:
        return sq_image(v, self.x, self.y, L)


def sq_image(v: CharVector, x, y, L: SurfaceLattice) -> CharVector:
    """e^delta (H + xC + y(1 + (v^2)/(2 r^2) rho))."""
    C = L.require_C()
    x, y = frac(x), frac(y)
    vsq = mukai_pair(v, v, L)
    inner = CharVector(y, vadd(L.H, vscale(x, C)), y * vsq / (2 * v.r * v.r))
    return exp_twist(inner, v.delta(), L)


def sq_chart(v: CharVector, s, q, p, L: SurfaceLattice) -> SqChartPoint:
    """The (x, y) image of the point (delta + sH + pC, H - qC).

    Requires (H, C) = 0.  With eps = s h + p q and
    N = (1 + s^2) h + p^2 - q^2 + 2 p s q + (v^2)/r^2 > 0,
        x = (q^3 + q (s^2 - 1) h + p^2 q + 2 p s h - (v^2) q / r^2) / N,
        y = 2 eps / N.
    """
    L.require_C()
    if not L.H_is_pullback:
        raise InputError("the (s, q)-chart needs H pulled back from the blown-down surface")
    if v.r <= 0:
        raise InputError("the (s, q)-chart needs positive rank")
    s, q, p = frac(s), frac(q), frac(p)
    h = L.h
    w = mukai_pair(v, v, L) / (v.r * v.r)
    N = (1 + s * s) * h + p * p - q * q + 2 * p * s * q + w
    if N <= 0:
        raise InputError("point is outside the (s, q)-chart: the denominator is not positive")
    eps = s * h + p * q
    x = (q ** 3 + q * (s * s - 1) * h + p * p * q + 2 * p * s * h - w * q) / N
    y = 2 * eps / N
    return SqChartPoint(s, q, p, eps, x, y)


def oc_wall_slope(a: int, v: CharVector, L: SurfaceLattice) -> Fraction:
    """v(O_C(-a))^perp is the line x = (a + (delta, C) - 1/2) y in the (x, y)-plane."""
    C = L.require_C()
    return Fraction(a) + L.dot(v.delta(), C) - Fraction(1, 2)


def beta_prime_index(v: CharVector, sp: StabilityPoint, L: SurfaceLattice) -> Tuple[Fraction, PerverseIndex]:
    """(beta', C) for the point with pullback omega on the xi-fiber of sp."""
    C = L.require_C()
    r = v.r
    if r == 0:
        raise InputError("needs nonzero rank")
    b = vsub(sp.beta, v.delta())
    q = sp.scale_sq
    bw = L.dot(b, sp.omega)
    if bw == 0:
        raise InputError("(beta - delta, omega) = 0: the index is undefined on this fiber")
    num = r * r * (q * L.sq(sp.omega) - L.sq(b)) + mukai_pair(v, v, L)
    # the sqrt(q) factors of (beta - delta, omega) and (omega, C) cancel
    value = num / (2 * r * r * bw) * L.dot(sp.omega, C) + L.dot(sp.beta, C)
    return value, _index_of(value)


def generator_char(beta, L: SurfaceLattice) -> CharVector:
    """ch(G)/rk G = e^{beta - K/2} + ((K^2)/8 - chi(O_X)) rho."""
    lam = vsub(vec(beta), vscale(Fraction(1, 2), L.K))
    e = exp_class(lam, L)
    return CharVector(e.r, e.c1, e.s + L.sq(L.K) / 8 - L.chiO)


def torsion_filter(v1: CharVector, L: SurfaceLattice, index: PerverseIndex) -> bool:
    """False when a positive-rank candidate in the l = 0 category has (c1, C) < 0."""
    C = L.require_C()
    if index.l == 0 and not index.boundary and v1.r > 0:
        return L.dot(v1.c1, C) >= 0
    return True


@dataclass(frozen=True)
class Window:
    lo: Fraction
    hi: Fraction
    lo_closed: bool = True
    hi_closed: bool = False

    def contains(self, s) -> bool:
        s = frac(s)
        above = s >= self.lo if self.lo_closed else s > self.lo
        below = s <= self.hi if self.hi_closed else s < self.hi
        return above and below


def _degree_ratio(v: CharVector, L: SurfaceLattice, H, mu) -> int:
    k = L.dot(v.c1, H) / mu
    if k.denominator != 1 or v.r.denominator != 1:
        raise InputError("(c1(v), H)/mu and r must be integers")
    k = int(k)
    if gcd(int(v.r), k) != 1:
        raise InputError("hypothesis gcd(r, (c1(v), H)/mu) = 1 fails")
    return k


def min_s_window(v: CharVector, H, L: SurfaceLattice, r0: int, mu=None) -> Window:
    """-mu/(r r0 (H^2)) <= s < 0 in the chart (delta + sH + D, tH).

    r0 must admit xi0 in NS with (r xi0 - r0 c1(v), H) = -mu, that is
    r0 (c1(v), H) - mu must lie in r mu Z.
    """
    H = vec(H)
    mu = Fraction(L.mu()) if mu is None else frac(mu)
    if v.r <= 0:
        raise InputError("the window needs positive rank")
    if mu <= 0:
        raise InputError("mu must be positive")
    k = _degree_ratio(v, L, H, mu)
    r0 = int(r0)
    if r0 <= 0:
        raise InputError("r0 must be a positive integer")
    if (r0 * k - 1) % int(v.r) != 0:
        raise InputError("no xi0 with (r xi0 - r0 c1(v), H) = -mu exists for this r0")
    return Window(-mu / (v.r * r0 * L.dot(H, H)), Fraction(0))


def default_r0(v: CharVector, L: SurfaceLattice, H=None) -> int:
    """The least positive r0 with r0 (c1, H)/mu = 1 mod r."""
    H = L.H if H is None else vec(H)
    k = _degree_ratio(v, L, H, Fraction(L.mu()))
    r = int(v.r)
    return pow(k, -1, r) if r > 1 else 1


def oc_wall_point(v: CharVector, a: int, L: SurfaceLattice, q=Fraction(1, 10), y=Fraction(-1, 100)) -> StabilityPoint:
    """A point with omega in R_{>0}(H - qC) whose xi lies on v(O_C(-a))^perp.

    Built from the rational (x, y) = (lambda y, y) on the wall line and the
    fiber circle over it in the (H - qC)-chart.
    """
    C = L.require_C()
    q, y = frac(q), frac(y)
    lam = oc_wall_slope(a, v, L)
    u = sq_image(v, lam * y, y, L)
    Hq = vsub(L.H, vscale(q, C))
    fc = fiber_circle(v, u, Hq, L)
    if not isinstance(fc, FiberCircle) or fc.radius_sq <= 0:
        raise InputError("no point of this wall in the chosen chart")
    return fc.point(fc.center_s)


@dataclass(frozen=True)
class ChainWall:
    n: int
    w: CharVector
    slope: Fraction
    genuine: bool
    witness_p: Optional[int]
    verified: bool


@dataclass
class ChainResult:
    v: CharVector
    twist: int
    k: int
    N: int
    chambers: List[Chamber]
    walls: List[ChainWall]
    annotations: List[str]
    truncated: bool = False
    notes: List[str] = field(default_factory=list)


def _genuine(v: CharVector, w: CharVector, L: SurfaceLattice, p_cap: int) -> Optional[int]:
    """Least p >= 1 with (v - p w)^2 >= 0 and (w, v - p w) > 0, if any."""
    for p in range(1, p_cap + 1):
        rest = v - w.scale(p)
        if mukai_pair(rest, rest, L) >= 0 and mukai_pair(w, rest, L) > 0:
            return p
        if mukai_pair(rest, rest, L) < 0 and p > 1:
            break
    return None


def chamber_chain(v: CharVector, beta0, L: SurfaceLattice, caps: Optional[Caps] = None, max_n: int = 64) -> ChainResult:
    """The chambers C_0, ..., C_N between the walls v(O_C(-n))^perp.

    C_n contains the points (beta, tH) with -n - 1/2 < (beta, C) < -n + 1/2
    near the ample ray; O_C(-n)^perp separates C_{n-1} from C_n.  A wall is
    counted as genuine when some v - p v(O_C(-n)), p >= 1, still has
    non-negative square and positive pairing with v(O_C(-n)); N is the
    largest genuine index.
    """
    C = L.require_C()
    if not L.H_is_pullback:
        raise InputError("the chamber chain needs H pulled back from the blown-down surface")
    if v.r <= 0 or v.r.denominator != 1:
        raise InputError("the chamber chain needs positive integral rank")
    beta0 = vec(beta0)
    if L.dot(beta0, C) != 0:
        raise InputError("beta0 must satisfy (beta0, C) = 0")
    r = int(v.r)
    mu = L.mu()
    r0 = default_r0(v, L)
    k_raw = L.dot(v.c1, C)
    if k_raw.denominator != 1:
        raise InputError("(c1(v), C) must be an integer")
    twist = floor(k_raw / r)
    vn = exp_twist(v, vscale(twist, C), L)
    k = int(L.dot(vn.c1, C))
    notes = []
    if twist:
        notes.append(f"v twisted by {twist}C so that 0 <= k < r")

    walls: List[ChainWall] = []
    N = 0
    truncated = False
    p_cap = max(1, int(mukai_pair(vn, vn, L)) + 2)
    for n in range(0, max_n + 2):
        w = oc_char(-n, L)
        p = _genuine(vn, w, L, p_cap) if n >= 1 else None
        genuine = p is not None
        try:
            sp = oc_wall_point(vn, n, L)
            verified = on_wall(vn, w, sp, L) and not central_charge(w, sp, L).vanishes
        except InputError:
            verified = False
        walls.append(ChainWall(n, w, oc_wall_slope(n, vn, L), genuine, p, verified))
        if n >= 1 and not genuine:
            break
        if n >= 1:
            N = n
    else:
        truncated = True
        notes.append(f"stopped at n = {max_n + 1}")

    h = L.h
    delta = vn.delta()
    s0 = Fraction(-mu, 2 * r * r0) / h
    label_walls = [Wall(cw.w, locus_in_chart(vn, cw.w, STChart.through(beta0, L), L)) for cw in walls]
    chambers = []
    for n in range(0, N + 1):
        shift = L.dot(vsub(delta, beta0), L.H) / h + s0
        beta = vadd(vadd(beta0, vscale(n, C)), vscale(shift, L.H))
        sp = StabilityPoint(beta, L.H, Fraction(1), f"C{n}")
        ch = chamber_of(vn, sp, label_walls, L)
        if isinstance(ch, OnWall):
            raise RuntimeError("chain sample point landed on a wall")
        chambers.append(ch)

    ann = []
    if k == 0:
        ann.append("C0: moduli of semistable sheaves pulled back from the blown-down surface")
        ann.append("across v(O_C)^perp (q < 0): M_(beta0, H-qC)(v) = M_(delta', H')(v'), pullback moduli")
    else:
        ann.append(f"C0: maps to moduli on the blown-down surface with Gr(r, k) = Gr({r}, {k}) general fibers")
        ann.append("across v(O_C)^perp (q < 0): M_(beta0, H-qC)(v) is empty")
    for n in range(1, N + 1):
        ann.append(f"C{n - 1} -> C{n}: Mumford-Thaddeus type flip across v(O_C(-{n}))^perp")
    ann.append(f"C{N}: agrees with M_(H-qC)^(beta-K/2)(v) for small q > 0 and every n >= {N}")
    return ChainResult(vn, twist, k, N, chambers, walls, ann, truncated, notes)
