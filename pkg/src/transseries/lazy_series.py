"""Pull-based, memoized, certificate-carrying lazy series.

A series is univariate in one basis variable; iterated structure comes from
the coefficient domain (scalars at the bottom, field elements of the slice
tower above).  Streams are RAW by default: zero coefficients are allowed.
A normalizer removes coefficients that the domain's zero test certifies as
zero; that is the only place a semantic zero test is consulted.

The central access path is ``terms_upto(bound)``: force and return every
term with exponent <= bound.  All stream kinds answer it with a bounded
amount of work, using the grid certificate of each operand as the
termination witness.  Self-referential streams (geometric inverses,
distinguished solutions) compute the coefficient at an exponent from
coefficients at strictly smaller exponents only, which keeps bounded pulls
well founded.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from .errors import DivisionByZero, NotInfinitesimal, StructuralError
from .order_core import GridCertificate, INFINITY, as_scalar


class Term(NamedTuple):
    coeff: object
    exponent: Fraction


#: Sentinel returned by valuation_below when no nonzero coefficient exists
#: at or below the bound.
ALL_ZERO_UP_TO_BOUND = "ALL_ZERO_UP_TO_BOUND"

END = None

PREC, PRECEQ, ASYMP, SIM = "PREC", "PRECEQ", "ASYMP", "SIM"
FLAT_PREC, FLAT_PRECEQ = "FLAT_PREC", "FLAT_PRECEQ"


class RationalDomain:
    """Coefficient domain of exact rationals."""

    zero = Fraction(0)
    one = Fraction(1)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def invert(self, a):
        if a == 0:
            raise DivisionByZero("rational 1/0")
        return 1 / a

    def is_zero(self, a):
        return a == 0

    # Structural (no semantic zero test) hygiene check; may report False
    # for values that a full zero test would kill.
    def is_zero_cheap(self, a):
        return a == 0


RATIONALS = RationalDomain()


class LazySeries:
    """Abstract memoized term stream.

    Subclasses implement ``_force_upto(bound)`` making ``self._terms``
    contain, in increasing exponent order, every term with exponent <=
    bound.  ``self._done`` is the watermark up to which the list is
    complete; a forced prefix is never recomputed differently.
    """

    __slots__ = ("domain", "cert", "_terms", "_done", "_complete", "_completing")

    def __init__(self, domain, cert):
        self.domain = domain
        self.cert = cert
        self._terms = []
        self._done = None
        self._complete = False
        self._completing = False

    # -- forcing ------------------------------------------------------------

    def terms_upto(self, bound):
        """All terms with exponent <= bound, strictly increasing exponents."""
        bound = as_scalar(bound)
        if self.cert.empty:
            return []
        if not self._complete and (self._done is None or bound > self._done):
            self._force_upto(bound)
            self._done = bound if self._done is None else max(self._done, bound)
        if self._done is not None and self._done == bound:
            return list(self._terms)
        return [t for t in self._terms if t[0] <= bound]

    def _force_upto(self, bound):
        raise NotImplementedError

    def coefficient_at(self, exponent):
        exponent = as_scalar(exponent)
        for e, c in self.terms_upto(exponent):
            if e == exponent:
                return c
        return self.domain.zero

    # -- completion ---------------------------------------------------------

    def try_complete(self) -> bool:
        """Force until the term list is provably the whole series; returns
        False when completeness cannot be established.  Self-referential
        streams hit the re-entrancy guard: a cycle cannot prove completion."""
        if self._complete:
            return True
        if self.cert.empty:
            self._complete = True
            return True
        if self._completing:
            return False
        self._completing = True
        try:
            if self._try_complete():
                self._complete = True
                return True
            return False
        finally:
            self._completing = False

    def _try_complete(self) -> bool:
        return False

    def _force_all_past(self, *sources):
        """Helper: force self past the top exponent of completed sources."""
        tops = [s._terms[-1][0] for s in sources if s._terms]
        bound = sum(tops) if len(tops) == len(sources) and tops else Fraction(0)
        if tops:
            bound = max(bound, max(tops))
        self.terms_upto(bound)

    # -- iteration / head-tail ----------------------------------------------

    def candidate_points(self):
        """Increasing stream of exponents where terms may appear."""
        return self.cert.iter_points()

    def iter_terms(self):
        """Yield all terms in increasing exponent order.  May not terminate
        for series that are zero beyond every watermark but not provably so."""
        if self.cert.empty:
            return
        idx = 0
        candidates = self.candidate_points()
        while True:
            while idx < len(self._terms) and (
                self._done is not None and self._terms[idx][0] <= self._done
            ):
                e, c = self._terms[idx]
                idx += 1
                yield Term(c, e)
            if self.try_complete():
                while idx < len(self._terms):
                    e, c = self._terms[idx]
                    idx += 1
                    yield Term(c, e)
                return
            bound = None
            for p in candidates:
                if self._done is None or p > self._done:
                    bound = p
                    break
            if bound is None:
                return
            self.terms_upto(bound)

    def head_tail(self):
        """First term and continuation, or END for the empty stream."""
        for term in self.iter_terms():
            return term, TailSeries(self, term.exponent)
        return END

    def materialize(self):
        """Complete term list of a stream; requires provable completion."""
        if not self.try_complete():
            raise StructuralError("stream cannot prove completion")
        return list(self._terms)


class FiniteSeries(LazySeries):
    __slots__ = ()

    def __init__(self, domain, terms, cert=None):
        acc = {}
        for e, c in terms:
            e = as_scalar(e)
            acc[e] = domain.add(acc[e], c) if e in acc else c
        terms = sorted(
            ((e, c) for e, c in acc.items() if not domain.is_zero_cheap(c)),
            key=lambda t: t[0],
        )
        if cert is None:
            cert = GridCertificate.from_points([e for e, _ in terms])
        super().__init__(domain, cert)
        self._terms = terms
        self._complete = True
        if terms:
            self._done = terms[-1][0]

    def _force_upto(self, bound):
        pass

    def terms_upto(self, bound):
        bound = as_scalar(bound)
        return [t for t in self._terms if t[0] <= bound]

    def iter_terms(self):
        for e, c in self._terms:
            yield Term(c, e)


def zero_series(domain) -> FiniteSeries:
    return FiniteSeries(domain, [])


def const_series(domain, c) -> FiniteSeries:
    return FiniteSeries(domain, [(Fraction(0), c)])


class TailSeries(LazySeries):
    """View of the terms of ``base`` with exponent strictly above ``cut``."""

    __slots__ = ("base", "cut")

    def __init__(self, base, cut, cert=None):
        super().__init__(base.domain, cert if cert is not None else base.cert)
        self.base = base
        self.cut = as_scalar(cut)

    def _force_upto(self, bound):
        self._terms = [t for t in self.base.terms_upto(bound) if t[0] > self.cut]

    def _try_complete(self):
        if not self.base.try_complete():
            return False
        self._force_all_past(self.base)
        return True


class AddSeries(LazySeries):
    """f + g, merging by exponent with the three-way case split."""

    __slots__ = ("f", "g")

    def __init__(self, f, g):
        if f.domain is not g.domain:
            raise StructuralError("coefficient domain mismatch")
        super().__init__(f.domain, f.cert.union(g.cert))
        self.f = f
        self.g = g

    def _force_upto(self, bound):
        fa = self.f.terms_upto(bound)
        ga = self.g.terms_upto(bound)
        dom = self.domain
        out = []
        i = j = 0
        while i < len(fa) and j < len(ga):
            (ea, ca), (eb, cb) = fa[i], ga[j]
            if ea == eb:
                out.append((ea, dom.add(ca, cb)))
                i += 1
                j += 1
            elif ea < eb:
                out.append((ea, ca))
                i += 1
            else:
                out.append((eb, cb))
                j += 1
        out.extend(fa[i:])
        out.extend(ga[j:])
        self._terms = [t for t in out if not dom.is_zero_cheap(t[1])]

    def _try_complete(self):
        if not (self.f.try_complete() and self.g.try_complete()):
            return False
        self._force_all_past(self.f)
        self._force_all_past(self.g)
        return True


class MapSeries(LazySeries):
    """Term-wise coefficient map (exponents unchanged); used for negation,
    derivations, and lifting coefficients into a larger domain."""

    __slots__ = ("f", "fn")

    def __init__(self, f, fn, cert=None, domain=None):
        super().__init__(
            domain if domain is not None else f.domain,
            cert if cert is not None else f.cert,
        )
        self.f = f
        self.fn = fn

    def _force_upto(self, bound):
        dom = self.domain
        self._terms = [
            (e, c2)
            for e, c in self.f.terms_upto(bound)
            for c2 in (self.fn(e, c),)
            if not dom.is_zero_cheap(c2)
        ]

    def _try_complete(self):
        if not self.f.try_complete():
            return False
        self._force_all_past(self.f)
        return True


class ScaleSeries(LazySeries):
    """c * z^lam * f (monomial scaling)."""

    __slots__ = ("f", "c", "lam")

    def __init__(self, f, c, lam):
        lam = as_scalar(lam)
        super().__init__(f.domain, f.cert.shifted(lam))
        self.f = f
        self.c = c
        self.lam = lam

    def _force_upto(self, bound):
        dom = self.domain
        self._terms = [
            (e + self.lam, c2)
            for e, c in self.f.terms_upto(bound - self.lam)
            for c2 in (dom.mul(self.c, c),)
            if not dom.is_zero_cheap(c2)
        ]

    def _try_complete(self):
        if not self.f.try_complete():
            return False
        if self.f._terms:
            self.terms_upto(self.f._terms[-1][0] + self.lam)
        return True


class MulSeries(LazySeries):
    """f * g by bounded convolution; equivalent to iterating the recurrence
    head = (ab) z^(alpha+beta), tail = (a z^alpha) g^tail + f^tail g."""

    __slots__ = ("f", "g")

    def __init__(self, f, g):
        if f.domain is not g.domain:
            raise StructuralError("coefficient domain mismatch")
        super().__init__(f.domain, f.cert.minkowski(g.cert))
        self.f = f
        self.g = g

    def _force_upto(self, bound):
        if self.cert.empty:
            return
        dom = self.domain
        fa = self.f.terms_upto(bound - self.g.cert.offset)
        ga = self.g.terms_upto(bound - self.f.cert.offset)
        acc = {}
        for ea, ca in fa:
            for eb, cb in ga:
                e = ea + eb
                if e > bound:
                    continue
                p = dom.mul(ca, cb)
                acc[e] = dom.add(acc[e], p) if e in acc else p
        self._terms = [
            (e, acc[e]) for e in sorted(acc) if not dom.is_zero_cheap(acc[e])
        ]

    def _try_complete(self):
        if not (self.f.try_complete() and self.g.try_complete()):
            return False
        if not self.f._terms or not self.g._terms:
            self._terms = []
            return True
        self.terms_upto(self.f._terms[-1][0] + self.g._terms[-1][0])
        return True


class StarSeries(LazySeries):
    """h = 1/(1-g) for infinitesimal g, via the self-referential recursion
    h = 1 + g*h: the coefficient at e only needs h-coefficients at e - beta
    for term exponents beta > 0 of g."""

    __slots__ = ("g", "_coeffs", "_cands", "_cand_iter")

    def __init__(self, g):
        if not g.cert.empty and g.cert.offset <= 0:
            raise NotInfinitesimal("1/(1-g) needs v(g) > 0")
        super().__init__(g.domain, g.cert.star())
        self.g = g
        self._coeffs = {}
        self._cands = []
        self._cand_iter = self.cert.iter_points()

    def _force_upto(self, bound):
        dom = self.domain
        while not self._cands or (
            self._cands[-1] is not None and self._cands[-1] <= bound
        ):
            self._cands.append(next(self._cand_iter, None))
            if self._cands[-1] is None:
                break
        for e in self._cands:
            if e is None or e > bound:
                break
            if e in self._coeffs:
                continue
            gterms = self.g.terms_upto(e)
            if gterms and gterms[0][0] <= 0:
                raise NotInfinitesimal("1/(1-g): g has a term at exponent <= 0")
            c = dom.one if e == 0 else dom.zero
            for eb, cb in gterms:
                lower = self._coeffs.get(e - eb)
                if lower is not None and not dom.is_zero_cheap(lower):
                    c = dom.add(c, dom.mul(cb, lower))
            self._coeffs[e] = c
            if not dom.is_zero_cheap(c):
                self._terms.append((e, c))

    def _try_complete(self):
        if not self.g.try_complete():
            return False
        if not self.g._terms:
            self.terms_upto(Fraction(0))
            return True
        return False


class NormalizedSeries(LazySeries):
    """Wrapper dropping coefficients that the domain's zero test kills.

    This is where infinite cancellations are detected: the underlying RAW
    stream may carry coefficients that are zero only semantically.
    """

    __slots__ = ("f",)

    def __init__(self, f):
        super().__init__(f.domain, f.cert)
        self.f = f

    def _force_upto(self, bound):
        dom = self.domain
        self._terms = [
            (e, c) for e, c in self.f.terms_upto(bound) if not dom.is_zero(c)
        ]

    def _try_complete(self):
        if not self.f.try_complete():
            return False
        self._force_all_past(self.f)
        return True


# -- public operations -------------------------------------------------------


def add(f, g):
    return AddSeries(f, g)


def neg(f):
    dom = f.domain
    return MapSeries(f, lambda e, c: dom.neg(c))


def sub(f, g):
    return AddSeries(f, neg(g))


def monomial_scale(c, lam, f):
    return ScaleSeries(f, c, lam)


def mul(f, g):
    return MulSeries(f, g)


def invert_one_minus(g):
    return StarSeries(g)


def normalize(f):
    return NormalizedSeries(f)


def positive_tail_cert(cert: GridCertificate) -> GridCertificate:
    """Sound certificate for the strictly positive part of a scalar
    certificate: all points are multiples of 1/q (q = lcm of denominators),
    so {first positive point + N/q} covers the positive part."""
    if cert.empty:
        return cert
    beta = None
    for p in cert.iter_points():
        if p > 0:
            beta = p
            break
    if beta is None:  # only reachable for certs with no positive point
        return GridCertificate.empty_at(Fraction(0))
    q = beta.denominator
    for g in cert.generators:
        q = q * g.denominator // _gcd(q, g.denominator)
    q = q * cert.offset.denominator // _gcd(q, cert.offset.denominator)
    if not cert.generators:
        return GridCertificate.single(beta)
    return GridCertificate([Fraction(1, q)], beta)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def inverse(f, leading=None):
    """1/f for nonzero f: factor f = c z^alpha (1 - g) with v(g) > 0 and
    return c^-1 z^-alpha / (1 - g).

    The leading term is found with the domain zero test unless supplied as
    ``(coeff, exponent)``.  Diverges on (unprovably) zero input, per the
    valuation contract.
    """
    dom = f.domain
    if leading is None:
        ht = normalize(f).head_tail()
        if ht is END:
            raise DivisionByZero("inverse of zero series")
        head, _ = ht
        c, alpha = head.coeff, head.exponent
    else:
        c, alpha = leading
        alpha = as_scalar(alpha)
    cinv = dom.invert(c)
    # g := 1 - c^-1 z^-alpha f, supported strictly above 0
    scaled = ScaleSeries(f, dom.neg(cinv), -alpha)
    g = TailSeries(scaled, Fraction(0), cert=positive_tail_cert(scaled.cert))
    return ScaleSeries(StarSeries(g), cinv, -alpha)


def valuation_of_nonzero(f) -> Fraction:
    """min supp f for f guaranteed nonzero (may diverge otherwise)."""
    head, _ = normalize(f).head_tail()
    return head.exponent


def valuation_below(f, bound):
    """min supp f when <= bound, else ALL_ZERO_UP_TO_BOUND; always terminates."""
    dom = f.domain
    for e, c in f.terms_upto(as_scalar(bound)):
        if not dom.is_zero(c):
            return e
    return ALL_ZERO_UP_TO_BOUND


def valuation(f):
    """Extended valuation: exponent of the first nonzero term, or INFINITY
    for streams that provably end with no nonzero coefficient."""
    for t in normalize(f).iter_terms():
        return t.exponent
    return INFINITY


def canonical_decompose(f):
    """Split f = f_up + f_const + f_down by exponent sign.

    f_up (exponents < 0) is returned as a finite series, f_const is the
    coefficient at exponent 0, f_down is a lazy view of the rest.
    """
    dom = f.domain
    upto0 = f.terms_upto(Fraction(0))
    up = FiniteSeries(dom, [(e, c) for e, c in upto0 if e < 0])
    const = dom.zero
    for e, c in upto0:
        if e == 0:
            const = c
    down = TailSeries(f, Fraction(0))
    return up, const, down


def relation_on_valuations(vf, vg, relation, vdiff=None):
    """Decide an asymptotic relation from (extended) valuations.

    Shared by the series-level and element-level comparison entry points.
    """
    from .order_core import BIG_O, GT, LITTLE_O, LT, flat_compare, point_cmp

    def cmp_ext(a, b):
        if a is INFINITY and b is INFINITY:
            return 0
        if a is INFINITY:
            return GT
        if b is INFINITY:
            return LT
        return point_cmp(a, b)

    if relation == PREC:
        return cmp_ext(vf, vg) == GT
    if relation == PRECEQ:
        return cmp_ext(vf, vg) != LT
    if relation == ASYMP:
        return cmp_ext(vf, vg) == 0
    if relation == SIM:
        return cmp_ext(vdiff, vg) == GT
    if relation == FLAT_PREC:
        return flat_compare(vf, vg) == LITTLE_O
    if relation == FLAT_PRECEQ:
        return flat_compare(vf, vg) in (LITTLE_O, BIG_O)
    raise StructuralError(f"unknown asymptotic relation {relation!r}")


def cmp_asymptotic(f, g, relation: str) -> bool:
    """Decide an asymptotic relation between two series via valuations.

    PREC: f = o(g); PRECEQ: f = O(g); ASYMP: v(f) = v(g); SIM: f ~ g;
    FLAT_PREC / FLAT_PRECEQ: flat comparisons of the valuations.  Nonzero
    inputs are the caller's contract where exact valuations are needed.
    """
    vf, vg = valuation(f), valuation(g)
    vdiff = valuation(sub(f, g)) if relation == SIM else None
    return relation_on_valuations(vf, vg, relation, vdiff)
