"""The map xi from stability parameters to the positive cone of v^perp.

xi(beta, omega) is Im(e^{beta + i omega} / Z(v)) up to a positive scalar.
Multiplying by |Z(v)|^2 > 0 gives the representative

    Re Z(v) * Im(e^{beta + i omega}) - Im Z(v) * Re(e^{beta + i omega}),

which is rational whenever beta and omega are, and which we use everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Union

from .charge import StabilityPoint, central_charge
from .lattice import (
    CharVector,
    InputError,
    LogicError,
    SurfaceLattice,
    Vec,
    exp_twist,
    frac,
    mukai_pair,
    primitive_integral,
    proportional,
    vadd,
    vec,
    vscale,
    vsub,
)


class UndefinedFiber(ValueError):
    """xi is undefined because Z(v) vanishes."""


class TransportUndefined(ValueError):
    """The isometry transport denominator vanishes."""


def ample_ray_class(v: CharVector, L: SurfaceLattice, H=None) -> CharVector:
    """H + (H, delta) rho, the image of the degenerate ray beta = delta."""
    H = L.H if H is None else vec(H)
    return CharVector(Fraction(0), H, L.dot(H, v.delta()))


@dataclass(frozen=True)
class XiClass:
    """A point of v^perp up to positive scalar.

    ``rep`` is the primitive integral representative when ``normalized``.
    """

    rep: CharVector
    v_ref: CharVector
    normalized: bool = True

    @classmethod
    def from_vector(cls, rep: CharVector, v: CharVector) -> "XiClass":
        if rep.is_zero():
            return cls(rep, v, False)
        ints, _ = primitive_integral(rep.entries())
        return cls(CharVector(ints[0], ints[1:-1], ints[-1]), v, True)

    def same_ray(self, other: "XiClass") -> bool:
        return self.rep.ray_key() == other.rep.ray_key()

    def in_perp(self, L: SurfaceLattice) -> bool:
        return mukai_pair(self.rep, self.v_ref, L) == 0

    def is_degenerate_ray(self, L: SurfaceLattice, H=None) -> bool:
        if self.v_ref.r == 0:
            return False
        ray = ample_ray_class(self.v_ref, L, H)
        return proportional(self.rep, ray) and mukai_pair(self.rep, ray, L) > 0

    def in_positive_cone(self, L: SurfaceLattice, H=None) -> bool:
        """(u, u) > 0 and (u, H + (H, delta) rho) > 0."""
        if self.v_ref.r == 0:
            H = L.H if H is None else vec(H)
            side = L.dot(self.rep.c1, H)
        else:
            side = mukai_pair(self.rep, ample_ray_class(self.v_ref, L, H), L)
        return mukai_pair(self.rep, self.rep, L) > 0 and side > 0


def xi_vector(v: CharVector, sp: StabilityPoint, L: SurfaceLattice) -> CharVector:
    """The rational representative described in the module docstring.

    With omega = sqrt(q) * w the common factor sqrt(q) is dropped.
    """
    z = central_charge(v, sp, L)
    if z.vanishes:
        raise UndefinedFiber("Z(v) vanishes at this point, so xi is undefined")
    b, w, q = sp.beta, sp.omega, sp.scale_sq
    # Im e = sqrt(q) (0, w, (b, w)); Re e = (1, b, ((b^2) - q (w^2))/2)
    im_e = CharVector(Fraction(0), w, L.dot(b, w))
    re_e = CharVector(Fraction(1), b, (L.sq(b) - q * L.sq(w)) / 2)
    return im_e.scale(z.re) - re_e.scale(z.im)


def xi(v: CharVector, sp: StabilityPoint, L: SurfaceLattice) -> XiClass:
    L.check(v)
    return XiClass.from_vector(xi_vector(v, sp, L), v)


@dataclass(frozen=True)
class FiberCircle:
    """The locus t^2 + (s - center_s)^2 = radius_sq in the chart
    beta = beta0 + s H_dir + D_part, omega = t H_dir."""

    H_dir: Vec
    D_part: Vec
    center_s: Fraction
    radius_sq: Fraction
    beta0: Vec

    def contains(self, s, t_sq) -> bool:
        s, t_sq = frac(s), frac(t_sq)
        return t_sq > 0 and t_sq + (s - self.center_s) ** 2 == self.radius_sq

    def point(self, s, L: Optional[SurfaceLattice] = None) -> StabilityPoint:
        """The chart point over s, with t^2 = radius_sq - (s - center)^2."""
        s = frac(s)
        t_sq = self.radius_sq - (s - self.center_s) ** 2
        if t_sq <= 0:
            raise InputError("s is outside the circle")
        beta = vadd(vadd(self.beta0, vscale(s, self.H_dir)), self.D_part)
        return StabilityPoint(beta, self.H_dir, t_sq, "st")


@dataclass(frozen=True)
class FiberRay:
    """The fiber over u = +-(H + (H, delta) rho): the points
    {beta = delta + D, omega = tH} with D in H^perp and sign(Re Z(v)) equal
    to ``re_sign``.

    ``empty`` is set for classes with y = 0 whose fiber misses the chart.
    """

    beta0: Vec
    H_dir: Vec
    connected: bool
    empty: bool = False
    re_sign: int = 1
    note: str = ""


@dataclass(frozen=True)
class UDecomposition:
    """u = zeta + (zeta, delta) rho + y (e^delta + (v^2)/(2 r^2) rho)."""

    y: Fraction
    zeta: Vec


def decompose_u(v: CharVector, u: CharVector, L: SurfaceLattice) -> UDecomposition:
    if v.r == 0:
        raise InputError("the fiber decomposition needs nonzero rank")
    if mukai_pair(u, v, L) != 0:
        raise InputError("u is not orthogonal to v")
    delta = v.delta()
    y = u.r
    zeta = vsub(u.c1, vscale(y, delta))
    return UDecomposition(y, zeta)


def fiber_circle(v: CharVector, u: Union[XiClass, CharVector], H_dir, L: SurfaceLattice):
    """The fiber of xi over u inside the chart (delta + s H + D', t H)."""
    rep = u.rep if isinstance(u, XiClass) else u
    L.check(rep)
    H = vec(H_dir)
    h = L.sq(H)
    if h <= 0:
        raise InputError("H_dir must have positive square")
    dec = decompose_u(v, rep, L)
    delta = v.delta()
    zh = L.dot(dec.zeta, H)
    D = vsub(dec.zeta, vscale(zh / h, H))
    if dec.y == 0:
        blowup_boundary = L.C is not None and L.dot(H, L.C) == 0
        if any(x != 0 for x in D) or zh == 0:
            return FiberRay(delta, H, False, True, 1, "y = 0 and zeta is not a multiple of H")
        # xi(delta + D', tH) = Re Z(v) * t * e^delta H for every D' in H^perp
        note = "not connected on the blow-up boundary" if blowup_boundary else "connected"
        return FiberRay(delta, H, not blowup_boundary, False, 1 if zh > 0 else -1, note)
    y = dec.y
    center = zh / (y * h)
    radius_sq = mukai_pair(rep, rep, L) / (y * y * h)
    return FiberCircle(H, vscale(1 / y, D), center, radius_sq, delta)


def same_fiber_for(v: CharVector, w: CharVector, u: Union[XiClass, CharVector], L: SurfaceLattice, H_dir=None) -> bool:
    """Whether xi_v^{-1}(u) and xi_w^{-1}(u) coincide in the H_dir chart."""
    rep = u.rep if isinstance(u, XiClass) else u
    if mukai_pair(rep, v, L) != 0 or mukai_pair(rep, w, L) != 0:
        raise InputError("u must lie in both v^perp and w^perp")
    H = L.H if H_dir is None else vec(H_dir)
    a = fiber_circle(v, rep, H, L)
    b = fiber_circle(w, rep, H, L)
    if type(a) is not type(b):
        return False
    h = L.sq(H)
    if isinstance(a, FiberRay):
        # both rays are {beta in delta + H^perp}; they agree iff the H-degrees of delta do
        if a.empty or b.empty:
            return a.empty and b.empty
        return L.dot(a.beta0, H) == L.dot(b.beta0, H)
    # convert to absolute beta = s_abs H + P with P in H^perp
    sa = a.center_s + L.dot(a.beta0, H) / h
    sb = b.center_s + L.dot(b.beta0, H) / h
    pa = vadd(L.perp_H(a.beta0, H), a.D_part)
    pb = vadd(L.perp_H(b.beta0, H), b.D_part)
    if not (sa == sb and pa == pb and a.radius_sq == b.radius_sq):
        return False
    # the circle is the preimage of R u; which half-line it hits depends on v
    return _lands_on(v, rep, a, L) == _lands_on(w, rep, b, L)


def _lands_on(v: CharVector, u: CharVector, f: FiberCircle, L: SurfaceLattice) -> Optional[bool]:
    """Whether xi_v at the top of the circle is a positive multiple of u."""
    if f.radius_sq <= 0:
        return None
    try:
        got = xi_vector(v, f.point(f.center_s), L)
    except UndefinedFiber:
        return None
    return got.ray_key() == u.ray_key()


@dataclass(frozen=True)
class LatticeIsometry:
    """Phi(e^gamma (r + x + a rho)) = e^{gamma'} (r1 a + sigma N x + (r/r1) rho)
    with sigma = -sign(r1), so that Phi(r1 e^gamma) = rho."""

    r1: int
    gamma: Vec
    gamma_prime: Vec
    ns_map: tuple

    def __post_init__(self):
        if self.r1 == 0:
            raise InputError("r1 must be nonzero")
        object.__setattr__(self, "gamma", vec(self.gamma))
        object.__setattr__(self, "gamma_prime", vec(self.gamma_prime))
        object.__setattr__(self, "ns_map", tuple(vec(row) for row in self.ns_map))

    @classmethod
    def identity_part(cls, r1: int, gamma, gamma_prime, rho: int) -> "LatticeIsometry":
        eye = [[1 if i == j else 0 for j in range(rho)] for i in range(rho)]
        return cls(r1, vec(gamma), vec(gamma_prime), eye)

    @property
    def sigma(self) -> int:
        return -1 if self.r1 > 0 else 1

    def apply_ns(self, x: Sequence[Fraction]) -> Vec:
        return tuple(sum(row[j] * x[j] for j in range(len(x))) for row in self.ns_map)

    def check(self, L: SurfaceLattice) -> None:
        n = L.rho
        if len(self.ns_map) != n or any(len(row) != n for row in self.ns_map):
            raise InputError("ns_map has the wrong shape")
        cols = [tuple(self.ns_map[i][j] for i in range(n)) for j in range(n)]
        for i in range(n):
            for j in range(n):
                if L.dot(cols[i], cols[j]) != L.gram[i][j]:
                    raise InputError("ns_map does not preserve the intersection form")

    def apply(self, x: CharVector, L: SurfaceLattice) -> CharVector:
        inner = exp_twist(x, tuple(-g for g in self.gamma), L)
        img = CharVector(
            self.r1 * inner.s,
            vscale(self.sigma, self.apply_ns(inner.c1)),
            inner.r / self.r1,
        )
        return exp_twist(img, self.gamma_prime, L)


def isometry_transport(phi: LatticeIsometry, sp: StabilityPoint, L: SurfaceLattice) -> StabilityPoint:
    """The point (beta~, omega~) with Phi(xi(beta, omega)) = xi(beta~, omega~).

    Phi(e^{beta + i omega}) = r1 (A + iB) e^{beta~ + i omega~} where
    A = ((beta - gamma)^2 - (omega^2))/2 and B = (beta - gamma, omega).
    """
    if sp.scale_sq != 1:
        raise InputError("transport needs a rational omega (scale_sq = 1)")
    b = vsub(sp.beta, phi.gamma)
    w = sp.omega
    A = (L.sq(b) - L.sq(w)) / 2
    B = L.dot(b, w)
    den = A * A + B * B
    if den == 0:
        raise TransportUndefined("((beta-gamma)^2 - (omega^2))^2/4 + (beta-gamma, omega)^2 vanishes")
    bh = phi.apply_ns(b)
    wh = phi.apply_ns(w)
    k = Fraction(phi.sigma, phi.r1) / den  # = -1 / (|r1| (A^2 + B^2))
    beta_t = vadd(phi.gamma_prime, vscale(k, vadd(vscale(A, bh), vscale(B, wh))))
    omega_t = vscale(k, vsub(vscale(A, wh), vscale(B, bh)))
    return StabilityPoint(beta_t, omega_t, Fraction(1), sp.chart_tag)


def transported_omega_sq(phi: LatticeIsometry, sp: StabilityPoint, L: SurfaceLattice) -> Fraction:
    """Closed form (omega~^2) = (omega^2) / (r1^2 (A^2 + B^2))."""
    b = vsub(sp.beta, phi.gamma)
    A = (L.sq(b) - L.sq(sp.omega)) / 2
    B = L.dot(b, sp.omega)
    return L.sq(sp.omega) / (phi.r1 ** 2 * (A * A + B * B))
