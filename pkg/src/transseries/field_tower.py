"""The monomial-rational base layer of the tower of effective differential
ambient fields.

Elements of the base field are fractions of finite sparse sums
``sum c_a * b^(-a)`` over the monomials of a transbasis ``(b_1, ..., b_n)``;
this gives a canonical form and a syntactic zero test, the induction base of
the whole zero-test tower.  A *level-k* node restricts supports to the first
k basis elements (the slice fields); expanding an element in ``b_k^-1``
yields a lazy series whose coefficients live one level down.

Extension nodes (adjoining distinguished solutions) are built in
``transseries.zerotest``; they share the element protocol used here:
arithmetic, ``derive``, ``expand``, ``zero_test``, joint valuations.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DivisionByZero, StructuralError
from .lazy_series import (
    FiniteSeries,
    MulSeries,
    ScaleSeries,
    StarSeries,
    relation_on_valuations,
)
from .order_core import (
    INFINITY,
    LT,
    as_scalar,
    compare_antilex,
    point_add,
    point_sub,
)

# -- sparse Laurent polynomials over the basis monomials ----------------------
# keys: full-length exponent vectors a, meaning the monomial b^(-a)


def sp_zero():
    return {}

def sp_is_zero(p) -> bool:
    return not p


def sp_add(p, q):
    out = dict(p)
    for k, v in q.items():
        s = out.get(k)
        if s is None:
            out[k] = v
        else:
            s = s + v
            if s == 0:
                del out[k]
            else:
                out[k] = s
    return out


def sp_neg(p):
    return {k: -v for k, v in p.items()}


def sp_scale(p, c: Fraction):
    if c == 0:
        return {}
    return {k: c * v for k, v in p.items()}


def sp_shift(p, delta):
    """Multiply by the monomial b^(-delta)."""
    return {point_add(k, delta): v for k, v in p.items()}


def sp_mul(p, q):
    out = {}
    for ka, va in p.items():
        for kb, vb in q.items():
            k = point_add(ka, kb)
            s = out.get(k)
            s = va * vb if s is None else s + va * vb
            if s == 0:
                out.pop(k, None)
            else:
                out[k] = s
    return out


def sp_min_key(p):
    it = iter(p)
    lo = next(it)
    for k in it:
        if compare_antilex(k, lo) == LT:
            lo = k
    return lo


def sp_level(p) -> int:
    """Highest coordinate position used by any key (0 for scalars)."""
    lvl = 0
    for k in p:
        for i in range(len(k) - 1, lvl - 1, -1):
            if k[i] != 0:
                lvl = max(lvl, i + 1)
                break
    return lvl


def sp_const(n: int, c) -> dict:
    c = Fraction(c)
    if c == 0:
        return {}
    return {(Fraction(0),) * n: c}


# -- tower nodes ---------------------------------------------------------------


class BaseNode:
    """MONOMIAL_BASE tower node: the fraction field of sparse monomial sums
    supported on the first ``level`` basis elements."""

    kind = "monomial_base"

    def __init__(self, basis, level: int):
        if not (0 <= level <= basis.size):
            raise StructuralError("bad node level")
        self.basis = basis
        self.level = level
        self._domain = None

    # nodes are cached per basis so identity comparisons work
    def slice_node(self) -> "BaseNode":
        if self.level == 0:
            raise StructuralError("scalar node has no slice")
        return self.basis.node(self.level - 1)

    def domain(self):
        if self._domain is None:
            self._domain = TowerDomain(self)
        return self._domain

    @property
    def zero(self):
        return BaseElement(self, {}, sp_const(self.basis.size, 1))

    @property
    def one(self):
        return self.from_scalar(1)

    def from_scalar(self, c) -> "BaseElement":
        return BaseElement(
            self, sp_const(self.basis.size, c), sp_const(self.basis.size, 1)
        )

    def from_monomial(self, alpha, c=1) -> "BaseElement":
        """c * b^(-alpha)."""
        alpha = tuple(as_scalar(a) for a in alpha)
        if len(alpha) != self.basis.size:
            raise StructuralError("monomial exponent dimension mismatch")
        return BaseElement(
            self, {alpha: Fraction(c)}, sp_const(self.basis.size, 1)
        )

    def from_sparse(self, num, den=None) -> "BaseElement":
        return BaseElement(
            self, dict(num), sp_const(self.basis.size, 1) if den is None else dict(den)
        )

    def zero_test(self, e) -> bool:
        return sp_is_zero(e.num)

    def lift(self, e) -> "BaseElement":
        """Lift a lower-level element of the same basis to this node."""
        if e.node.basis is not self.basis or e.node.level > self.level:
            raise StructuralError("cannot lift element across bases")
        return BaseElement(self, e.num, e.den)

    def __repr__(self):
        return f"BaseNode({self.basis.names[: self.level]})"


class BaseElement:
    """A fraction of sparse monomial sums, canonicalized so that the
    denominator is monic with valuation 0."""

    __slots__ = ("node", "num", "den", "_expansions")

    def __init__(self, node, num, den):
        num = {k: v for k, v in num.items() if v != 0}
        den = {k: v for k, v in den.items() if v != 0}
        if not den:
            raise DivisionByZero("zero denominator")
        lvl = max(sp_level(num), sp_level(den))
        if lvl > node.level:
            node = node.basis.node(lvl)
        if not num:
            den = sp_const(node.basis.size, 1)
        else:
            g = sp_min_key(den)
            c = den[g]
            zero = (Fraction(0),) * node.basis.size
            if g != zero or c != 1:
                gneg = point_sub(zero, g)
                num = sp_scale(sp_shift(num, gneg), 1 / c)
                den = sp_scale(sp_shift(den, gneg), 1 / c)
            if len(den) == 1:
                den = sp_const(node.basis.size, 1)
        self.node = node
        self.num = num
        self.den = den
        self._expansions = {}

    # -- basic predicates ----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.num

    def syntactic_zero(self) -> bool:
        # for the monomial base, the structural and semantic zero coincide
        return not self.num

    def key(self):
        return (
            tuple(sorted(self.num.items())),
            tuple(sorted(self.den.items())),
        )

    def __repr__(self):
        return f"<{render_element(self)}>"

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).is_zero

    def __hash__(self):
        raise TypeError("BaseElement is unhashable; use .key()")

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, BaseElement):
            if other.node.basis is not self.node.basis:
                return NotImplemented
            return other
        if isinstance(other, (int, Fraction)):
            return self.node.from_scalar(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        node = self._join_node(o)
        return BaseElement(
            node,
            sp_add(sp_mul(self.num, o.den), sp_mul(o.num, self.den)),
            sp_mul(self.den, o.den),
        )

    __radd__ = __add__

    def __neg__(self):
        return BaseElement(self.node, sp_neg(self.num), self.den)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        node = self._join_node(o)
        return BaseElement(node, sp_mul(self.num, o.num), sp_mul(self.den, o.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out = self.node.one
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self) -> "BaseElement":
        if self.is_zero:
            raise DivisionByZero("inverse of zero element")
        return BaseElement(self.node, self.den, self.num)

    def _join_node(self, other):
        return self.node if self.node.level >= other.node.level else other.node

    # -- valuation data ------------------------------------------------------

    def v(self):
        """Joint valuation (exponent vector of the dominant monomial)."""
        if self.is_zero:
            return INFINITY
        return point_sub(sp_min_key(self.num), sp_min_key(self.den))

    def leading_scalar(self) -> Fraction:
        if self.is_zero:
            raise StructuralError("leading scalar of zero")
        return self.num[sp_min_key(self.num)] / self.den[sp_min_key(self.den)]

    def is_positive(self) -> bool:
        return not self.is_zero and self.leading_scalar() > 0

    # -- derivation ----------------------------------------------------------

    def derive(self) -> "BaseElement":
        """delta_1, extended from monomials by the quotient rule."""
        num, den = self.num, self.den
        dnum = _sp_derive(self.node, num)
        if len(den) == 1:
            # canonical form: a one-term denominator is exactly 1
            return BaseElement(self.node, dnum, den)
        dden = _sp_derive(self.node, den)
        return BaseElement(
            self.node,
            sp_add(sp_mul(dnum, den), sp_neg(sp_mul(num, dden))),
            sp_mul(den, den),
        )

    def derive_k(self, k: int) -> "BaseElement":
        """delta_k = (b_k / delta_1 b_k) delta_1."""
        if k == 1:
            return self.derive()
        return self.derive() / self.node.basis.dphi_element(self.node, k)

    # -- expansion -----------------------------------------------------------

    def expand(self, k: int | None = None):
        """Lazy series in b_k^-1 with coefficients one level down."""
        if k is None:
            k = self.node.level
        if k in self._expansions:
            return self._expansions[k]
        if k < 1 or k > self.node.basis.size:
            raise StructuralError("bad expansion variable index")
        if max(sp_level(self.num), sp_level(self.den), 1) > k:
            raise StructuralError(
                "element involves basis elements above the expansion variable"
            )
        s = _expand_fraction(self.node.basis, k, self.num, self.den)
        self._expansions[k] = s
        return s

    def coefficient_at(self, alpha) -> Fraction:
        """Exact scalar coefficient of the monomial b^(-alpha)."""
        alpha = tuple(as_scalar(a) for a in alpha)
        e = self
        for k in range(self.node.basis.size, 0, -1):
            if k > e.node.level:
                if alpha[k - 1] != 0:
                    return Fraction(0)
                continue
            e = e.expand(k).coefficient_at(alpha[k - 1])
            if isinstance(e, Fraction):  # expansion had no term there
                return e if all(a == 0 for a in alpha[: k - 1]) else Fraction(0)
        return e.scalar_value()

    def scalar_value(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        if sp_level(self.num) > 0 or sp_level(self.den) > 0:
            raise StructuralError("not a scalar element")
        zero = (Fraction(0),) * self.node.basis.size
        return self.num[zero] / self.den[zero]


def _sp_derive(node, poly):
    """delta_1 of a sparse sum: delta_1 b^(-a) = -(sum a_i dphi_i) b^(-a)."""
    basis = node.basis
    out = {}
    for key, c in poly.items():
        for i in range(len(key)):
            if key[i] == 0:
                continue
            dphi = basis.dphi_sparse(i + 1)
            out = sp_add(out, sp_shift(sp_scale(dphi, -c * key[i]), key))
    return out


def _expand_fraction(basis, k, num, den):
    """Series of num/den in b_k^-1 with coefficients at level k-1."""
    slice_node = basis.node(k - 1)
    dom = slice_node.domain()

    def group(poly):
        out = {}
        for key, c in poly.items():
            kappa = key[k - 1]
            rest = key[: k - 1] + (Fraction(0),) + key[k:]
            out.setdefault(kappa, {})[rest] = c
        return out

    ngroups = group(num)
    dgroups = group(den)
    nseries = FiniteSeries(
        dom,
        [(kappa, slice_node.from_sparse(p)) for kappa, p in ngroups.items()],
    )
    if len(dgroups) == 1:
        ((kd, dpoly),) = dgroups.items()
        dinv = slice_node.from_sparse(sp_const(basis.size, 1), dpoly)
        return ScaleSeries(nseries, dinv, -kd)
    k0 = min(dgroups)
    d0 = dgroups[k0]
    eps = FiniteSeries(
        dom,
        [
            (kappa - k0, slice_node.from_sparse(sp_neg(p), d0))
            for kappa, p in dgroups.items()
            if kappa != k0
        ],
    )
    d0inv = slice_node.from_sparse(sp_const(basis.size, 1), d0)
    return ScaleSeries(MulSeries(nseries, StarSeries(eps)), d0inv, -k0)


class TowerDomain:
    """Coefficient-domain adapter exposing a tower node to the series layer."""

    def __init__(self, node):
        self.node = node
        self.zero = node.zero
        self.one = node.one

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def invert(self, a):
        return a.inverse()

    def is_zero(self, a):
        if isinstance(a, Fraction):
            return a == 0
        return a.node.zero_test(a)

    def is_zero_cheap(self, a):
        if isinstance(a, Fraction):
            return a == 0
        return a.syntactic_zero() if hasattr(a, "syntactic_zero") else a.is_zero


# -- element-level canonical decomposition and comparisons --------------------


def split_canonical(e):
    """Exact canonical decomposition e = large + const + small.

    The purely large part of a grid-based series always has finite support,
    so it comes out as an exact element; the constant part is a scalar.
    """
    node = e.node
    if node.level == 0:
        return node.zero, e.scalar_value(), node.zero
    k = node.level
    s = e.expand(k)
    large = node.zero
    const = Fraction(0)
    for beta, c in s.terms_upto(Fraction(0)):
        if beta < 0:
            term_vec = tuple(
                beta if i == k - 1 else Fraction(0) for i in range(node.basis.size)
            )
            large = large + node.lift(c) * node.from_monomial(term_vec)
        else:
            l0, c0, _ = split_canonical(c)
            large = large + node.lift(l0)
            const = c0
    small = e - large - const
    return large, const, small


def is_purely_large(e) -> bool:
    large, const, small = split_canonical(e)
    return const == 0 and small.is_zero


def compare_elements(e1, e2, relation: str) -> bool:
    """Asymptotic comparison of tower elements via joint valuations."""
    vdiff = (e1 - e2).v() if relation == "SIM" else None
    return relation_on_valuations(e1.v(), e2.v(), relation, vdiff)


def render_element(e) -> str:
    """Human-readable sparse rendering (used by repr and the CLI)."""
    basis = e.node.basis
    num = _render_sparse(e.num, basis)
    if len(e.den) == 1 and not sp_level(e.den):
        return num
    return f"({num})/({_render_sparse(e.den, basis)})"


def _render_sparse(poly, basis) -> str:
    if not poly:
        return "0"
    keys = sorted(poly, key=lambda k: tuple(reversed(k)))
    parts = []
    for key in keys:
        c = poly[key]
        mono = basis.render_monomial(key)
        if mono == "1":
            text = str(c)
        elif c == 1:
            text = mono
        elif c == -1:
            text = f"-{mono}"
        else:
            text = f"{c}*{mono}"
        if parts and not text.startswith("-"):
            parts.append(f" + {text}")
        elif parts:
            parts.append(f" - {text[1:]}")
        else:
            parts.append(text)
    return "".join(parts)
