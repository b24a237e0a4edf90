"""Exact exponent arithmetic: anti-lexicographic exponent vectors, grid
certificates for series supports, flat (level) comparisons and real-root
upper bounds.

Exponents live in an effective ordered subfield of the reals; we use exact
rationals (`fractions.Fraction`) throughout.  An *exponent vector* is a plain
tuple of Fractions, ordered anti-lexicographically: the last differing
coordinate decides.  A *grid certificate* is a finite description
``N*g1 + ... + N*gk + offset`` of a superset of a series support; it is the
sole termination witness for bounded valuation queries.

Points of a certificate are either scalars (univariate series in one basis
variable) or exponent vectors (joint supports); the two kinds never mix
inside one certificate.
"""

from __future__ import annotations

import heapq
from fractions import Fraction

from .errors import EnumerationUnbounded, NotInfinitesimal, StructuralError

Scalar = Fraction

LT, EQ, GT = -1, 0, 1

#: Flat-comparison verdicts.
BIG_O, LITTLE_O, NEITHER = "BIG_O", "LITTLE_O", "NEITHER"


class _Infinity:
    """The extended valuation +oo (valuation of the zero series)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "+oo"


INFINITY = _Infinity()


def as_scalar(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int) or isinstance(x, str):
        return Fraction(x)
    raise StructuralError(f"not an exact scalar: {x!r}")


def vec(*coords) -> tuple:
    return tuple(as_scalar(c) for c in coords)


def compare_antilex(a: tuple, b: tuple) -> int:
    """Compare exponent vectors; the last differing coordinate decides."""
    if len(a) != len(b):
        raise StructuralError(f"length mismatch: {len(a)} vs {len(b)}")
    for x, y in zip(reversed(a), reversed(b)):
        if x != y:
            return LT if x < y else GT
    return EQ


def point_cmp(a, b) -> int:
    """Compare two certificate points (scalars or vectors) of the same kind."""
    if isinstance(a, tuple):
        return compare_antilex(a, b)
    if a == b:
        return EQ
    return LT if a < b else GT


def point_add(a, b):
    if isinstance(a, tuple):
        if len(a) != len(b):
            raise StructuralError("length mismatch")
        return tuple(x + y for x, y in zip(a, b))
    return a + b


def point_neg(a):
    if isinstance(a, tuple):
        return tuple(-x for x in a)
    return -a


def point_sub(a, b):
    return point_add(a, point_neg(b))


def point_zero_like(a):
    if isinstance(a, tuple):
        return (Fraction(0),) * len(a)
    return Fraction(0)


def point_is_positive(a) -> bool:
    return point_cmp(a, point_zero_like(a)) == GT


def flat_level(v: tuple) -> int:
    """Index (1-based) of the highest nonzero coordinate; 0 for the origin."""
    for i in range(len(v) - 1, -1, -1):
        if v[i] != 0:
            return i + 1
    return 0


def flat_compare(g, h) -> str:
    """Flat comparison of extended valuations.

    ``LITTLE_O`` iff n|g| < |h| for every n >= 1; ``BIG_O`` iff |g| <= n|h|
    for some n.  On anti-lex vectors both reduce to comparing the index of
    the highest nonzero coordinate of the absolute values.  ``+oo`` is o of
    nothing finite and everything finite is o of ``+oo``.
    """
    g_inf = g is INFINITY
    h_inf = h is INFINITY
    if g_inf and h_inf:
        return BIG_O
    if g_inf:
        return NEITHER
    if h_inf:
        return LITTLE_O
    if isinstance(g, tuple):
        lg, lh = flat_level(g), flat_level(h)
    else:
        lg = 0 if g == 0 else 1
        lh = 0 if h == 0 else 1
    if lg < lh:
        return LITTLE_O
    if lg == lh:
        return BIG_O
    return NEITHER


class GridCertificate:
    """Finite superset description ``N*g1 + ... + N*gk + offset`` of a support.

    ``empty=True`` certifies the empty support (the zero series); its offset
    is still carried for bookkeeping but certifies nothing.
    """

    __slots__ = ("generators", "offset", "empty")

    def __init__(self, generators, offset, empty: bool = False):
        gens = []
        seen = set()
        for g in generators:
            if not point_is_positive(g):
                raise StructuralError(f"certificate generator not positive: {g!r}")
            if g not in seen:
                seen.add(g)
                gens.append(g)
        self.generators = tuple(sorted(gens, key=_sort_key))
        self.offset = offset
        self.empty = empty

    def __repr__(self):
        if self.empty:
            return "GridCertificate(empty)"
        return f"GridCertificate({list(self.generators)}, {self.offset})"

    # -- constructors -------------------------------------------------------

    @staticmethod
    def empty_at(zero_point) -> "GridCertificate":
        return GridCertificate((), zero_point, empty=True)

    @staticmethod
    def single(point) -> "GridCertificate":
        return GridCertificate((), point)

    @staticmethod
    def from_points(points, zero_point=Fraction(0)) -> "GridCertificate":
        """Certificate for a finite support: offset = min, deltas as generators."""
        pts = list(points)
        if not pts:
            return GridCertificate.empty_at(zero_point)
        lo = pts[0]
        for p in pts[1:]:
            if point_cmp(p, lo) == LT:
                lo = p
        gens = [point_sub(p, lo) for p in pts if point_cmp(p, lo) != EQ]
        return GridCertificate(gens, lo)

    # -- combination --------------------------------------------------------

    def union(self, other: "GridCertificate") -> "GridCertificate":
        """Certify supp f | supp g.

        Offset differences are adjoined as generators so that both original
        offsets stay inside the certified set.
        """
        if self.empty:
            return other
        if other.empty:
            return self
        lo = self.offset if point_cmp(self.offset, other.offset) != GT else other.offset
        gens = list(self.generators) + list(other.generators)
        for off in (self.offset, other.offset):
            d = point_sub(off, lo)
            if point_cmp(d, point_zero_like(d)) != EQ:
                gens.append(d)
        return GridCertificate(gens, lo)

    def minkowski(self, other: "GridCertificate") -> "GridCertificate":
        """Certify supp f + supp g (generators unioned, offsets added)."""
        if self.empty or other.empty:
            return GridCertificate.empty_at(self.offset)
        return GridCertificate(
            list(self.generators) + list(other.generators),
            point_add(self.offset, other.offset),
        )

    def star(self) -> "GridCertificate":
        """Certify N * (supp g) for an infinitesimal g (offset > 0)."""
        if self.empty:
            return GridCertificate((), point_zero_like(self.offset))
        if not point_is_positive(self.offset):
            raise NotInfinitesimal(f"certificate offset not positive: {self.offset!r}")
        return GridCertificate(
            list(self.generators) + [self.offset], point_zero_like(self.offset)
        )

    def shifted(self, delta) -> "GridCertificate":
        return GridCertificate(self.generators, point_add(self.offset, delta), self.empty)

    # -- queries ------------------------------------------------------------

    def contains_none_below(self, bound) -> bool:
        return self.empty or point_cmp(self.offset, bound) == GT

    def iter_points(self):
        """Yield certified points in strictly increasing order (may be infinite)."""
        if self.empty:
            return
        heap = [(_sort_key(self.offset), self.offset)]
        seen = {self.offset}
        while heap:
            _, p = heapq.heappop(heap)
            yield p
            for g in self.generators:
                q = point_add(p, g)
                if q not in seen:
                    seen.add(q)
                    heapq.heappush(heap, (_sort_key(q), q))

    def enumerate_below(self, bound) -> list:
        """Exactly the certified points <= bound, increasing, no duplicates.

        For scalar certificates this is always finite.  For vector
        certificates an EnumerationUnbounded error is raised when the query
        provably has infinitely many answers.
        """
        if self.empty:
            return []
        if isinstance(self.offset, tuple):
            return self._enumerate_below_vec(bound)
        out = []
        for p in self.iter_points():
            if p > bound:
                break
            out.append(p)
        return out

    def _enumerate_below_vec(self, bound) -> list:
        if len(bound) != len(self.offset):
            raise StructuralError("bound dimension mismatch")
        gens = list(self.generators)
        points = set()

        def rec(base, start):
            c = compare_antilex(base, bound)
            if c == GT:
                return
            if c == LT:
                # 1-based position of the deciding coordinate
                pos = next(
                    i + 1
                    for i in range(len(base) - 1, -1, -1)
                    if base[i] != bound[i]
                )
                # A generator living strictly below the deciding coordinate
                # can be added arbitrarily often without leaving the bound.
                if any(flat_level(g) < pos for g in gens):
                    raise EnumerationUnbounded(
                        f"infinitely many certified points below {bound!r}"
                    )
            points.add(base)
            for i in range(start, len(gens)):
                rec(point_add(base, gens[i]), i)

        rec(self.offset, 0)
        return sorted(points, key=_sort_key)


def _sort_key(p):
    if isinstance(p, tuple):
        return tuple(reversed(p))
    return p


def enumerate_below(cert: GridCertificate, bound) -> list:
    return cert.enumerate_below(bound)


def cert_combine(c1: GridCertificate, c2, mode: str) -> GridCertificate:
    """Combine grid certificates: UNION / MINKOWSKI / STAR (c2 ignored)."""
    if mode == "UNION":
        return c1.union(c2)
    if mode == "MINKOWSKI":
        return c1.minkowski(c2)
    if mode == "STAR":
        return c1.star()
    raise StructuralError(f"unknown combination mode {mode!r}")


def real_root_upper_bound(coeffs) -> Fraction:
    """Cauchy bound 1 + max |a_i / a_deg| >= every real root of the polynomial
    with coefficient list ``coeffs`` (constant term first).  The polynomial
    must be nonzero."""
    cs = [as_scalar(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    if not cs:
        raise StructuralError("zero polynomial has no root bound")
    lead = cs[-1]
    if len(cs) == 1:
        return Fraction(1)
    return Fraction(1) + max(abs(c / lead) for c in cs[:-1])
