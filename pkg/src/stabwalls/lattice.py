"""Exact arithmetic on the algebraic cohomology lattice of a surface.

A class is stored as a triple ``(r, c1, s)``: rank, a first Chern class in
coordinates of a fixed Neron-Severi basis, and the degree-4 part ``ch2``.
The pairing used throughout is

    (x, y) = (x1, y1) - x0*y2 - x2*y0

where ``(x1, y1)`` is the intersection form on NS(X).  Every number is a
``fractions.Fraction``; nothing in this module touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Iterable, Iterator, Optional, Sequence, Tuple

Vec = Tuple[Fraction, ...]


class InputError(ValueError):
    """A precondition on user-supplied data is violated."""


class LogicError(RuntimeError):
    """A request that can never be answered (for example an infinite search)."""


def frac(x) -> Fraction:
    """Coerce ints, strings like ``"3/4"`` and Fractions to a Fraction.

    Floats are refused: they would silently lose exactness.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise InputError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational number: {x!r}") from exc
    raise InputError(f"expected an exact rational, got {type(x).__name__}")


def vec(xs: Iterable) -> Vec:
    return tuple(frac(x) for x in xs)


def vadd(a: Sequence[Fraction], b: Sequence[Fraction]) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Sequence[Fraction], b: Sequence[Fraction]) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def vscale(k, a: Sequence[Fraction]) -> Vec:
    k = frac(k)
    return tuple(k * x for x in a)


def lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b) if a and b else max(a, b)


def primitive_integral(entries: Sequence[Fraction]) -> Tuple[Tuple[int, ...], Fraction]:
    """Scale ``entries`` by a positive rational to a primitive integer tuple.

    Returns the tuple and the positive scale used.  The zero vector is
    returned unchanged with scale 1.
    """
    den = 1
    for x in entries:
        den = lcm(den, x.denominator)
    ints = [int(x * den) for x in entries]
    g = 0
    for n in ints:
        g = gcd(g, abs(n))
    if g == 0:
        return tuple(ints), Fraction(1)
    return tuple(n // g for n in ints), Fraction(den, g)


@dataclass(frozen=True)
class CharVector:
    """A Chern character ``(r, c1, s)``; ``s`` is the degree-4 part ch2."""

    r: Fraction
    c1: Vec
    s: Fraction

    def __post_init__(self):
        object.__setattr__(self, "r", frac(self.r))
        object.__setattr__(self, "c1", vec(self.c1))
        object.__setattr__(self, "s", frac(self.s))

    @classmethod
    def of(cls, r, c1, s) -> "CharVector":
        return cls(frac(r), vec(c1), frac(s))

    @classmethod
    def point(cls, rho: int) -> "CharVector":
        """The class of a point, written varrho in the docs."""
        return cls(Fraction(0), (Fraction(0),) * rho, Fraction(1))

    @classmethod
    def zero(cls, rho: int) -> "CharVector":
        return cls(Fraction(0), (Fraction(0),) * rho, Fraction(0))

    @property
    def rho(self) -> int:
        return len(self.c1)

    def entries(self) -> Vec:
        return (self.r,) + self.c1 + (self.s,)

    def __add__(self, other: "CharVector") -> "CharVector":
        return CharVector(self.r + other.r, vadd(self.c1, other.c1), self.s + other.s)

    def __sub__(self, other: "CharVector") -> "CharVector":
        return CharVector(self.r - other.r, vsub(self.c1, other.c1), self.s - other.s)

    def __neg__(self) -> "CharVector":
        return CharVector(-self.r, tuple(-x for x in self.c1), -self.s)

    def scale(self, k) -> "CharVector":
        k = frac(k)
        return CharVector(k * self.r, vscale(k, self.c1), k * self.s)

    def is_zero(self) -> bool:
        return not any(self.entries())

    def delta(self) -> Vec:
        """c1/r, defined for nonzero rank."""
        if self.r == 0:
            raise InputError("delta = c1/r needs nonzero rank")
        return vscale(1 / self.r, self.c1)

    def ray_key(self) -> Tuple[int, ...]:
        """Primitive integral representative of the ray R_{>0} * self."""
        return primitive_integral(self.entries())[0]

    def __str__(self) -> str:
        c1 = ",".join(str(x) for x in self.c1)
        return f"({self.r}; {c1}; {self.s})"


def proportional(x, y) -> bool:
    """True iff x and y are linearly dependent; accepts CharVectors or tuples."""
    a = x.entries() if isinstance(x, CharVector) else tuple(x)
    b = y.entries() if isinstance(y, CharVector) else tuple(y)
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            if a[i] * b[j] != a[j] * b[i]:
                return False
    return True


def _diagonal_signs(gram: Sequence[Sequence[Fraction]]) -> Tuple[int, int, int]:
    """(positive, negative, zero) counts of a symmetric matrix, by exact
    congruence diagonalization."""
    m = [list(row) for row in gram]
    n = len(m)
    pos = neg = 0
    k = 0
    while k < n:
        piv = next((i for i in range(k, n) if m[i][i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in range(k, n) for j in range(i + 1, n) if m[i][j] != 0), None)
            if pair is None:
                return pos, neg, n - k
            i, j = pair
            # e_i -> e_i + e_j makes the diagonal entry 2*m[i][j] != 0
            for t in range(n):
                m[i][t] += m[j][t]
            for t in range(n):
                m[t][i] += m[t][j]
            piv = i
        m[k], m[piv] = m[piv], m[k]
        for row in m:
            row[k], row[piv] = row[piv], row[k]
        p = m[k][k]
        if p > 0:
            pos += 1
        else:
            neg += 1
        for i in range(k + 1, n):
            f = m[i][k] / p
            if f:
                for t in range(k, n):
                    m[i][t] -= f * m[k][t]
        for i in range(k + 1, n):
            m[k][i] = Fraction(0)
            m[i][k] = Fraction(0)
        k += 1
    return pos, neg, 0


@dataclass(frozen=True)
class SurfaceLattice:
    """Neron-Severi lattice data of a surface X in a chosen basis.

    ``gram`` is the intersection matrix, ``H`` an ample class, ``K`` the
    canonical class, ``chiO`` the holomorphic Euler characteristic.  On a
    blow-up, ``C`` is the exceptional curve and ``pullback`` marks the basis
    vectors pulled back from the blown-down surface.
    """

    gram: Tuple[Tuple[Fraction, ...], ...]
    H: Vec
    K: Vec
    chiO: Fraction
    C: Optional[Vec] = None
    pullback: Optional[Tuple[bool, ...]] = None

    def __post_init__(self):
        gram = tuple(vec(row) for row in self.gram)
        object.__setattr__(self, "gram", gram)
        object.__setattr__(self, "H", vec(self.H))
        object.__setattr__(self, "K", vec(self.K))
        object.__setattr__(self, "chiO", frac(self.chiO))
        if self.C is not None:
            object.__setattr__(self, "C", vec(self.C))
        if self.pullback is not None:
            object.__setattr__(self, "pullback", tuple(bool(b) for b in self.pullback))
        self._validate()

    def _validate(self):
        n = len(self.gram)
        if n == 0:
            raise InputError("the Picard rank must be positive")
        if any(len(row) != n for row in self.gram):
            raise InputError("gram must be a square matrix")
        for i in range(n):
            for j in range(n):
                if self.gram[i][j] != self.gram[j][i]:
                    raise InputError("gram must be symmetric")
                if self.gram[i][j].denominator != 1:
                    raise InputError("gram must have integer entries")
        for name in ("H", "K"):
            if len(getattr(self, name)) != n:
                raise InputError(f"{name} has the wrong length for rank {n}")
        if any(x.denominator != 1 for x in self.H):
            raise InputError("H must be an integral class")
        pos, neg, zero = _diagonal_signs(self.gram)
        if (pos, neg, zero) != (1, n - 1, 0):
            raise InputError(
                f"gram must have signature (1, {n - 1}); found ({pos}, {neg}) with {zero} null directions"
            )
        if self.dot(self.H, self.H) <= 0:
            raise InputError("(H, H) must be positive")
        if self.pullback is not None and len(self.pullback) != n:
            raise InputError("pullback flags have the wrong length")
        if self.C is not None:
            if len(self.C) != n or any(x.denominator != 1 for x in self.C):
                raise InputError("C must be an integral class of the right length")
            if self.dot(self.C, self.C) != -1:
                raise InputError("(C, C) must be -1 for an exceptional curve")
            if self.dot(self.K, self.C) != -1:
                raise InputError("(K, C) must be -1 for an exceptional curve")
            if self.H_is_pullback and self.dot(self.H, self.C) != 0:
                raise InputError("(H, C) must vanish when H is a pullback class")

    @property
    def rho(self) -> int:
        return len(self.gram)

    @property
    def h(self) -> Fraction:
        return self.dot(self.H, self.H)

    @property
    def H_is_pullback(self) -> bool:
        if self.C is None:
            return False
        if self.pullback is not None:
            return all(f or x == 0 for f, x in zip(self.pullback, self.H))
        return self.dot(self.H, self.C) == 0

    def dot(self, a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
        if len(a) != self.rho or len(b) != self.rho:
            raise InputError(f"vector of length {len(a)}/{len(b)} on a rank {self.rho} lattice")
        total = Fraction(0)
        for i, x in enumerate(a):
            if x:
                row = self.gram[i]
                for j, y in enumerate(b):
                    if y:
                        total += x * row[j] * y
        return total

    def sq(self, a: Sequence[Fraction]) -> Fraction:
        return self.dot(a, a)

    def check(self, x: CharVector) -> CharVector:
        if x.rho != self.rho:
            raise InputError(f"class has {x.rho} NS coordinates, lattice has rank {self.rho}")
        return x

    def perp_H(self, a: Sequence[Fraction], H: Optional[Sequence[Fraction]] = None) -> Vec:
        """The component of ``a`` orthogonal to H."""
        H = self.H if H is None else H
        k = self.dot(a, H) / self.dot(H, H)
        return vsub(a, vscale(k, H))

    def mu(self) -> int:
        """Generator of the degree group {(D, H) : D in NS(X)}."""
        g = 0
        for i in range(self.rho):
            g = gcd(g, abs(int(self.dot(_unit(self.rho, i), self.H))))
        return g

    def require_C(self) -> Vec:
        if self.C is None:
            raise InputError("this operation needs an exceptional class C in the lattice")
        return self.C


def _unit(n: int, i: int) -> Vec:
    return tuple(Fraction(1 if j == i else 0) for j in range(n))


def mukai_pair(x: CharVector, y: CharVector, L: SurfaceLattice) -> Fraction:
    L.check(x)
    L.check(y)
    return L.dot(x.c1, y.c1) - x.r * y.s - x.s * y.r


def exp_twist(x: CharVector, lam: Sequence, L: SurfaceLattice) -> CharVector:
    """Multiplication by e^lambda."""
    L.check(x)
    lam = vec(lam)
    return CharVector(
        x.r,
        vadd(x.c1, vscale(x.r, lam)),
        x.s + L.dot(x.c1, lam) + x.r * L.sq(lam) / 2,
    )


def exp_class(lam: Sequence, L: SurfaceLattice) -> CharVector:
    """e^lambda = (1, lambda, (lambda^2)/2)."""
    lam = vec(lam)
    return CharVector(Fraction(1), lam, L.sq(lam) / 2)


def discriminant_and_square(x: CharVector, L: SurfaceLattice) -> Tuple[Optional[Fraction], Fraction]:
    square = mukai_pair(x, x, L)
    if x.r == 0:
        return None, square
    c1sq = L.sq(x.c1)
    c2 = c1sq / 2 - x.s
    disc = c2 - (x.r - 1) / (2 * x.r) * c1sq
    return disc, square


def dual(x: CharVector) -> CharVector:
    """x^vee: the sign of the degree-2 part flips."""
    return CharVector(x.r, tuple(-c for c in x.c1), x.s)


def product(x: CharVector, y: CharVector, L: SurfaceLattice) -> CharVector:
    """Cup product in H^{even}(X, Q)_alg."""
    return CharVector(
        x.r * y.r,
        vadd(vscale(x.r, y.c1), vscale(y.r, x.c1)),
        x.r * y.s + x.s * y.r + L.dot(x.c1, y.c1),
    )


def integral(x: CharVector) -> Fraction:
    return x.s


def todd(L: SurfaceLattice) -> CharVector:
    return CharVector(Fraction(1), vscale(Fraction(-1, 2), L.K), L.chiO)


def todd_inverse(L: SurfaceLattice) -> CharVector:
    return CharVector(Fraction(1), vscale(Fraction(1, 2), L.K), L.sq(L.K) / 4 - L.chiO)


def euler_pair(x: CharVector, y: CharVector, L: SurfaceLattice) -> Fraction:
    """chi(x, y) = integral of x^vee . y . td_X."""
    L.check(x)
    L.check(y)
    return integral(product(product(dual(x), y, L), todd(L), L))


def _ldl(m: Sequence[Sequence[Fraction]]):
    """Exact decomposition q(y) = sum_i d[i] * (y_i + sum_{j>i} u[i][j] y_j)^2."""
    n = len(m)
    d = [Fraction(0)] * n
    u = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        d[i] = m[i][i] - sum(d[k] * u[k][i] ** 2 for k in range(i))
        if d[i] <= 0:
            raise LogicError("quadratic form is not positive definite")
        for j in range(i + 1, n):
            u[i][j] = (m[i][j] - sum(d[k] * u[k][i] * u[k][j] for k in range(i))) / d[i]
    return d, u


def _sqrt_ceil(x: Fraction) -> int:
    """An integer >= sqrt(x) for x >= 0."""
    return isqrt(x.numerator // x.denominator) + 1


def ellipsoid_points(
    form: Sequence[Sequence[Fraction]], center: Sequence[Fraction], bound: Fraction
) -> Iterator[Tuple[int, ...]]:
    """Integer points z with (z - center)^T form (z - center) <= bound.

    ``form`` must be positive definite.  Fincke-Pohst style depth-first
    search with exact rational pruning.
    """
    n = len(form)
    d, u = _ldl(form)
    if bound < 0:
        return
    z = [0] * n

    def rec(i: int, budget: Fraction):
        # shift of coordinate i given the already fixed coordinates j > i
        m = center[i] - sum(u[i][j] * (z[j] - center[j]) for j in range(i + 1, n))
        w = _sqrt_ceil(budget / d[i])
        lo = (m.numerator // m.denominator) - w
        hi = -((-m.numerator) // m.denominator) + w
        for zi in range(lo, hi + 1):
            rest = budget - d[i] * (zi - m) ** 2
            if rest < 0:
                continue
            z[i] = zi
            if i == 0:
                yield tuple(z)
            else:
                yield from rec(i - 1, rest)

    yield from rec(n - 1, bound)


def degree_form(L: SurfaceLattice, H: Optional[Sequence[Fraction]] = None):
    """N(x) = 2 (x, H)^2 / (H^2) - (x, x), positive definite by the Hodge index
    theorem.  It equals -(x, x) on H^perp."""
    H = L.H if H is None else vec(H)
    h = L.dot(H, H)
    gH = [L.dot(_unit(L.rho, i), H) for i in range(L.rho)]
    return [[2 * gH[i] * gH[j] / h - L.gram[i][j] for j in range(L.rho)] for i in range(L.rho)]


def classes_of_degree(
    L: SurfaceLattice,
    degree: Fraction,
    bound: Fraction,
    den: int = 1,
    shift: Optional[Sequence[Fraction]] = None,
    H: Optional[Sequence[Fraction]] = None,
) -> list:
    """All x in (1/den) Z^rho with (x, H) = degree and -(D, D) <= bound, where
    D is the H^perp part of x - shift.  Sorted lexicographically."""
    H = L.H if H is None else vec(H)
    h = L.dot(H, H)
    shift = (Fraction(0),) * L.rho if shift is None else L.perp_H(vec(shift), H)
    degree = frac(degree)
    bound = frac(bound)
    if bound < 0:
        return []
    form = degree_form(L, H)
    # N(den*x - den*shift) = den^2 (degree^2/h - (D, D)) since shift is in H^perp
    center = vscale(den, shift)
    total = den * den * (degree * degree / h + bound)
    out = []
    for z in ellipsoid_points(form, center, total):
        x = tuple(Fraction(zi, den) for zi in z)
        if L.dot(x, H) != degree:
            continue
        D = L.perp_H(vsub(x, shift), H)
        if -L.sq(D) <= bound:
            out.append(x)
    out.sort()
    return out


def bounded_norm_classes(L: SurfaceLattice, B, den: int = 1) -> list:
    """Classes D in (1/den) NS(X) with (D, H) = 0 and -(D, D) <= B.

    H^perp is negative definite, so the list is finite.  Output is sorted
    lexicographically by coordinates.
    """
    B = frac(B)
    if B < 0:
        raise InputError("the norm bound must be non-negative")
    if den < 1:
        raise InputError("the denominator bound must be a positive integer")
    return classes_of_degree(L, Fraction(0), B, den)
