"""Ritt reduction, root-separation bounds, the zero-equivalence decision
procedure for differential-polynomial expressions at distinguished
solutions, and the tower nodes adjoining such solutions.

The decision procedure follows six steps on inputs sorted by Ritt rank:
a nonzero element of the coefficient field cannot vanish (1); if the
initial or separant of the first input vanishes at the solution it is
prepended and the test restarts (2, 3); any other input, or the defining
polynomial itself, that does not Ritt-reduce to zero modulo the first input
contributes its remainder instead (4); otherwise a root-separation
threshold is assembled from valuations and an indicial-root bound (5) and
the final verdict is a bounded valuation search (6).  The rank of the first
argument strictly decreases through every recursion from steps 2-4, which
is the termination measure (asserted when ``ASSERT_TERMINATION`` is set).
"""

from __future__ import annotations

from fractions import Fraction

from .diffpoly import DiffPolynomial, QuasiSolution, dsolve_quasilinear
from .errors import DivisionByZero, StructuralError
from .field_tower import BaseElement
from .lazy_series import (
    ALL_ZERO_UP_TO_BOUND,
    FiniteSeries,
    MapSeries,
    MulSeries,
    inverse as series_inverse,
    normalize,
    valuation_below,
)
from .linear_ode import (
    LinearOperator,
    render_indicial,
    stream_derive_top,
)
from .order_core import INFINITY, real_root_upper_bound

#: assert the strict rank decrease at every recursive call (test builds)
ASSERT_TERMINATION = True

BOTTOM = (0,)


# -- Ritt machinery -------------------------------------------------------------


def leader_index(P: DiffPolynomial):
    """Index j of the leader d^j F, or None for P in the coefficient field."""
    r = P.order
    return None if r < 0 else r

def ritt_rank(P: DiffPolynomial):
    """BOTTOM for coefficient-field elements, else (1, leader, degree)."""
    j = leader_index(P)
    if j is None:
        return BOTTOM
    d = max(mi[j] for mi in P.terms if len(mi) == j + 1)
    return (1, j, d)


def initial(P: DiffPolynomial) -> DiffPolynomial:
    """Leading coefficient of P in its leader."""
    j = leader_index(P)
    if j is None:
        raise StructuralError("initial of a coefficient-field element")
    d = ritt_rank(P)[2]
    out = {}
    for mi, c in P.terms.items():
        if len(mi) == j + 1 and mi[j] == d:
            out[mi[:j]] = c
    return DiffPolynomial(P.node, out, P.deriv_index)


def separant(P: DiffPolynomial) -> DiffPolynomial:
    """dP / d(leader)."""
    j = leader_index(P)
    if j is None:
        raise StructuralError("separant of a coefficient-field element")
    return P.partial(j)


def _deg_in(P, j):
    return max((mi[j] if j < len(mi) else 0 for mi in P.terms), default=0)


def _lead_in(P, j):
    d = _deg_in(P, j)
    out = {}
    for mi, c in P.terms.items():
        e = mi[j] if j < len(mi) else 0
        if e == d:
            nmi = list(mi) + [0] * (j + 1 - len(mi))
            nmi[j] = 0
            key = tuple(nmi)
            out[key] = out[key] + c if key in out else c
    return DiffPolynomial(P.node, out, P.deriv_index), d


def _times_var_power(P, j, e):
    if e == 0:
        return P
    out = {}
    for mi, c in P.terms.items():
        nmi = list(mi) + [0] * (j + 1 - len(mi))
        nmi[j] += e
        out[tuple(nmi)] = c
    Q = DiffPolynomial(P.node, {}, P.deriv_index)
    Q.terms = out
    return Q


def _prem(A, B, j):
    """Pseudo-remainder of A by B in the variable d^j F; returns
    (remainder, multiplier count e) with lc(B)^e A = q B + R."""
    lB, dB = _lead_in(B, j)
    e = 0
    A = A.prune()
    while not A.is_zero and _deg_in(A, j) >= dB and dB > 0:
        lA, dA = _lead_in(A, j)
        A = lB * A - _times_var_power(lA * B, j, dA - dB)
        A = A.prune()
        e += 1
    return A, e


class ReductionResult:
    __slots__ = ("remainder", "initial_powers", "separant_powers")

    def __init__(self, remainder, initial_powers, separant_powers):
        self.remainder = remainder
        self.initial_powers = initial_powers
        self.separant_powers = separant_powers


def _reducible_by(P, Q):
    """None, or ('alg'|'diff', m) when the leader of P is the m-th derivative
    of the leader of Q (m = 0 means equal leaders with deg P >= deg Q)."""
    jP = leader_index(P)
    jQ = leader_index(Q)
    if jP is None or jQ is None or jP < jQ:
        return None
    if jP == jQ:
        if ritt_rank(P)[2] >= ritt_rank(Q)[2]:
            return ("alg", 0)
        return None
    return ("diff", jP - jQ)


def ritt_reduce(P: DiffPolynomial, divisors) -> ReductionResult:
    """Ritt-Kolchin reduction of P modulo the divisors.

    Repeatedly eliminates proper derivatives of divisor leaders (pseudo-
    division by the derived divisor, consuming separant powers) and then
    reduces the leader degree (pseudo-division by the divisor itself,
    consuming initial powers).  Divisor selection is deterministic: the
    divisor of highest rank whose leader or a derivative of it matches.
    """
    divisors = [Q.prune() for Q in divisors]
    R = P.prune()
    ipow = [0] * len(divisors)
    spow = [0] * len(divisors)
    while not R.is_zero:
        best = None
        for i, Q in enumerate(divisors):
            how = _reducible_by(R, Q)
            if how is None:
                continue
            key = ritt_rank(Q)
            if best is None or key > best[0]:
                best = (key, i, how)
        if best is None:
            break
        _, i, (kind, m) = best
        Q = divisors[i]
        if kind == "alg":
            R, e = _prem(R, Q, leader_index(Q))
            ipow[i] += e
        else:
            theta = Q
            for _ in range(m):
                theta = theta.total_derive()
            theta = theta.prune()
            R, e = _prem(R, theta, leader_index(theta))
            spow[i] += e
    return ReductionResult(R, ipow, spow)


# -- extension nodes -------------------------------------------------------------


class DsolNode:
    """DSOL_EXT tower node: the field F(delta^N f) for the distinguished
    solution f of a quasi-linear P over the parent F.  Elements are
    fractions of differential polynomials in the generator; the zero test
    runs the decision procedure on numerators."""

    kind = "dsol_ext"

    def __init__(self, parent, P, solution: QuasiSolution, name="f",
                 slice_companion=False):
        self.parent = parent
        self.P = P.prune()
        self.solution = solution
        self.coeff_node = solution.coeff_node
        self.trivial = solution.is_zero
        self.name = name
        # True when coeff_node is the slice extension by this very
        # generator, so its elements lift by re-wrapping the fraction.
        # That is also the case when the solution is concentrated at
        # exponent 0 with the slice generator as its only coefficient.
        if not slice_companion and not self.trivial and isinstance(self.coeff_node, DsolNode):
            ts = getattr(solution.stream, "_terms", None)
            if (
                isinstance(solution.stream, FiniteSeries)
                and ts is not None
                and len(ts) == 1
                and ts[0][0] == 0
                and isinstance(ts[0][1], DsolElement)
                and ts[0][1].node is self.coeff_node
                and ts[0][1].key() == self.coeff_node.generator().key()
            ):
                slice_companion = True
        self.slice_companion = slice_companion
        self._domain = None
        self._zt_memo = {}
        self._sigma_cache = {}
        self._vn_f = None
        self._ind = None

    # -- node protocol -------------------------------------------------------

    @property
    def basis(self):
        return self.parent.basis

    @property
    def level(self):
        return self.parent.level

    def slice_node(self):
        return self.coeff_node

    def domain(self):
        if self._domain is None:
            from .field_tower import TowerDomain

            self._domain = TowerDomain(self)
        return self._domain

    @property
    def zero(self):
        return self.from_scalar(0)

    @property
    def one(self):
        return self.from_scalar(1)

    def from_scalar(self, c):
        return self.lift(self.parent.from_scalar(c))

    def from_monomial(self, alpha, c=1):
        return self.lift(self.parent.from_monomial(alpha, c))

    def lift(self, e) -> "DsolElement":
        """Wrap an element of the parent (or any ancestor) as a constant
        fraction; the wrapped element itself is the coefficient, so the
        generator variables never change meaning.  Elements of a companion
        slice extension share this node's generator and lift by re-wrapping
        their fraction over the parent."""
        if isinstance(e, DsolElement) and e.node is self:
            return e
        if (
            isinstance(e, DsolElement)
            and self.slice_companion
            and e.node is self.coeff_node
        ):
            return DsolElement(
                self,
                _lift_poly(e.num, self.parent),
                _lift_poly(e.den, self.parent),
            )
        if not _element_of(e, self.parent):
            e = self.parent.lift(e)
        num = DiffPolynomial(self.parent, {(): e}, self.P.deriv_index)
        den = DiffPolynomial(self.parent, {(): 1}, self.P.deriv_index)
        return DsolElement(self, num, den)

    def generator(self) -> "DsolElement":
        num = DiffPolynomial(self.parent, {(1,): 1}, self.P.deriv_index)
        den = DiffPolynomial(self.parent, {(): 1}, self.P.deriv_index)
        return DsolElement(self, num, den)

    def solution_stream(self):
        if self.trivial:
            return FiniteSeries(self.coeff_node.domain(), [])
        return self.solution.stream

    def zero_test(self, e) -> bool:
        if isinstance(e, BaseElement):
            return e.is_zero
        if e.num.is_zero:
            return True
        key = e.num.key()
        memo = self._zt_memo
        if key not in memo:
            memo[key] = self._zero_test_poly(e.num)
        return memo[key]

    def _zero_test_poly(self, Q: DiffPolynomial) -> bool:
        Q = Q.prune()
        if Q.is_zero:
            return True
        if self.trivial:
            # f = 0: every monomial with an F-power vanishes; only the
            # constant coefficient survives substitution
            c = Q.terms.get(())
            return c is None or self.parent.zero_test(c)
        return zero_test(self.context(), [Q])

    def context(self) -> "ExtensionContext":
        return ExtensionContext(self)

    def __repr__(self):
        return f"DsolNode({self.name} over {self.parent!r})"


def _element_of(e, node):
    return getattr(e, "node", None) is node


def _is_ancestor(a, b):
    while isinstance(b, DsolNode):
        if a is b:
            return True
        b = b.parent
    return a is b


class DsolElement:
    """Fraction num(f)/den(f) of differential polynomials over the parent."""

    __slots__ = ("node", "num", "den", "_expansions")

    def __init__(self, node, num, den):
        if den.is_zero:
            raise DivisionByZero("zero denominator polynomial")
        self.node = node
        self.num = num
        self.den = den
        self._expansions = {}

    # -- predicates ------------------------------------------------------------

    def syntactic_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def as_base(self):
        """The underlying monomial-base element when the fraction does not
        involve the generator at all; None otherwise."""
        if set(self.num.terms) <= {()} and set(self.den.terms) <= {()}:
            cn = self.num.terms.get(())
            cd = self.den.terms[()]
            if cn is None:
                cn = self.node.parent.from_scalar(0)
            val = cn / cd
            if isinstance(val, BaseElement):
                return val
            return val.as_base()
        return None

    def key(self):
        return (self.num.key(), self.den.key())

    def __repr__(self):
        if self.den.terms == {(): self.node.parent.one} or self._den_is_one():
            return f"<{self.num!r} @ {self.node.name}>"
        return f"<({self.num!r})/({self.den!r}) @ {self.node.name}>"

    def _den_is_one(self):
        if set(self.den.terms) != {()}:
            return False
        c = self.den.terms[()]
        return (c - 1).syntactic_zero() if hasattr(c, "syntactic_zero") else c == 1

    # -- arithmetic ---------------------------------------------------------------

    def _pair(self, other):
        """Coerce both operands into the deeper of the two nodes."""
        if isinstance(other, DsolElement):
            if other.node is self.node:
                return self, other
            if _is_ancestor(other.node, self.node):
                return self, self.node.lift(other)
            if _is_ancestor(self.node, other.node):
                return other.node.lift(self), other
            return None
        if isinstance(other, (int, Fraction)):
            return self, self.node.from_scalar(other)
        if isinstance(other, BaseElement):
            return self, self.node.lift(other)
        return None

    def _coerce(self, other):
        pair = self._pair(other)
        return NotImplemented if pair is None else pair[1]

    def __add__(self, other):
        pair = self._pair(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return DsolElement(
            a.node, a.num * b.den + b.num * a.den, a.den * b.den
        )

    __radd__ = __add__

    def __neg__(self):
        return DsolElement(self.node, -self.num, self.den)

    def __sub__(self, other):
        pair = self._pair(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        pair = self._pair(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return DsolElement(a.node, a.num * b.num, a.den * b.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        pair = self._pair(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return a * b.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return o * self.inverse()

    def __pow__(self, k: int):
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

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.node.zero_test(self - o)

    def __hash__(self):
        raise TypeError("DsolElement is unhashable; use .key()")

    def inverse(self) -> "DsolElement":
        if self.node.zero_test(self):
            raise DivisionByZero("inverse of zero element")
        return DsolElement(self.node, self.den, self.num)

    # -- calculus -------------------------------------------------------------------

    def derive(self) -> "DsolElement":
        dnum = _d1_poly(self.num, self.node)
        dden = _d1_poly(self.den, self.node)
        if dden.is_zero:
            return DsolElement(self.node, dnum, self.den)
        return DsolElement(
            self.node,
            dnum * self.den - self.num * dden,
            self.den * self.den,
        )

    def derive_k(self, k: int) -> "DsolElement":
        if k == 1:
            return self.derive()
        w = self.node.basis.dphi_element(self.node, k)
        return self.derive() / self.node.lift(w)

    # -- expansion ---------------------------------------------------------------

    def expand(self, k=None):
        node = self.node
        n = node.level
        if k is None:
            k = n
        if k != n:
            raise StructuralError(
                "extension elements expand in the top basis variable only"
            )
        if k in self._expansions:
            return self._expansions[k]
        num_s = _poly_on_solution(self.num, node)
        if self._den_is_one():
            s = num_s
        else:
            den_s = _poly_on_solution(self.den, node)
            s = MulSeries(num_s, _stream_inverse(den_s))
        self._expansions[k] = s
        return s

    def v(self):
        """Joint valuation: b_n-leading exponent plus the coefficient's
        joint valuation (the element must be nonzero)."""
        head = normalize(self.expand()).head_tail()
        if head is None:
            return INFINITY
        term, _ = head
        beta = term.exponent
        cvec = term.coeff.v()
        n = self.node.level
        return tuple(
            beta if i == n - 1 else cvec[i] for i in range(len(cvec))
        )

    def leading_scalar(self):
        head = normalize(self.expand()).head_tail()
        if head is None:
            raise StructuralError("leading scalar of zero")
        return head[0].coeff.leading_scalar()

    def is_positive(self):
        return self.leading_scalar() > 0

    def coefficient_at(self, alpha):
        alpha = tuple(Fraction(a) for a in alpha)
        n = self.node.level
        c = self.expand().coefficient_at(alpha[n - 1])
        if isinstance(c, Fraction):
            return c if all(a == 0 for i, a in enumerate(alpha) if i != n - 1) else Fraction(0)
        rest = tuple(Fraction(0) if i == n - 1 else a for i, a in enumerate(alpha))
        return c.coefficient_at(rest)

    def rebase(self, bmap, new_node):
        return DsolElement(
            new_node,
            self.num.rebase(bmap, new_node.parent),
            self.den.rebase(bmap, new_node.parent),
        )


def _lift_poly(P: DiffPolynomial, target_node) -> DiffPolynomial:
    return DiffPolynomial(target_node, dict(P.terms), P.deriv_index)


def _d1_poly(P: DiffPolynomial, node) -> DiffPolynomial:
    """delta_1 of P(f) as a polynomial identity: coefficients derive by
    delta_1 and the variables shift with the weight of the ranking
    derivation (delta_1 = w delta_k on the generator's derivatives)."""
    from .diffpoly import _derive_vars

    k = P.deriv_index
    parent = P.node
    if k == 1:
        w = parent.from_scalar(1)
    else:
        w = parent.lift(parent.basis.dphi_element(parent, k))
    return _derive_vars(P, w, k)


def _poly_on_solution(P: DiffPolynomial, node: DsolNode):
    """Series of P(f) in the top variable, coefficients in node.coeff_node."""
    n = node.level
    Pn = P.to_deriv_index(n)
    coeff_node = node.coeff_node
    dom = coeff_node.domain()
    fstream = node.solution_stream()
    ds = [fstream]
    for _ in range(max(Pn.order, 0)):
        ds.append(stream_derive_top(ds[-1], node))
    total = None
    for mi, c in Pn.terms.items():
        s = _lift_stream(c.expand(n), coeff_node, dom)
        for j, e in enumerate(mi):
            for _ in range(e):
                s = MulSeries(s, ds[j])
        total = s if total is None else _stream_add(total, s)
    if total is None:
        total = FiniteSeries(dom, [])
    return total


def _stream_add(a, b):
    from .lazy_series import AddSeries

    return AddSeries(a, b)


def _lift_stream(s, coeff_node, dom):
    """Lift the coefficients of a slice stream into an extended slice node."""
    if s.domain is dom:
        return s

    def fn(_e, c):
        return coeff_node.lift(c)

    return MapSeries(s, fn, domain=dom)


def _stream_inverse(s):
    return series_inverse(s)


# -- the decision procedure -------------------------------------------------------


class ExtensionContext:
    """Bundle of the defining quasi-linear P, the solution f, the parent
    coefficient field, and cached root-separation data."""

    def __init__(self, node: DsolNode):
        self.node = node
        self.P = node.P
        self.parent = node.parent

    def vn_f(self):
        if self.node._vn_f is None:
            head = normalize(self.node.solution_stream()).head_tail()
            if head is None:
                raise StructuralError("vn(f) of the zero solution")
            self.node._vn_f = head[0].exponent
        return self.node._vn_f

    def indicial_of_P(self):
        """I_{P,f}: shifting P additively by the infinitesimal solution only
        perturbs it above its valuation, so the degree-1 part of P already
        carries the valuation and leading parts of L_{P,f} and no evaluation
        at f is needed."""
        if self.node._ind is None:
            P1 = self.P.homogeneous_part(1).prune()
            if P1.is_zero:
                raise StructuralError("quasi-linear polynomial without linear part")
            # rewrite in the top derivation so the indicial polynomial is the
            # one of L as an operator in delta_n
            P1n = P1.to_deriv_index(self.node.level)
            coeffs_n = {}
            for mi, c in P1n.terms.items():
                j = mi.index(1)
                coeffs_n[j] = coeffs_n.get(j, self.parent.from_scalar(0)) + c
            order = max(coeffs_n)
            L = LinearOperator(
                self.parent,
                [coeffs_n.get(j, self.parent.from_scalar(0)) for j in range(order + 1)],
                deriv_index=self.node.level,
                prune=False,
            )
            self.node._ind = L.indicial()
        return self.node._ind

    def vn_LPf(self):
        """vn(L_{P,f}) = the b_n-coordinate of v(P): the degree-1 shift keeps
        the dominant monomial, and for the normalized polynomial the
        valuation in b_n is zero."""
        vP = self.P.v()
        if vP is INFINITY:
            raise StructuralError("vn(L) of the zero polynomial")
        return vP[self.node.level - 1]

    def z_bound(self):
        ind = self.indicial_of_P()
        if len(ind) == 1:
            return self.vn_f()
        return real_root_upper_bound(ind)


class Trace:
    """Structured step log of the decision procedure.

    Besides the rendered lines, the top-level sigma and step-6 outcome are
    kept in fields for programmatic consumers (the CLI verdict line)."""

    def __init__(self):
        self.lines = []
        self.sigma = None
        self.sigma_parts = None
        self.indicial = None
        self.step6_bound = None
        self.step6_pass = None
        self.step6_next = None
        self.step6_found = None

    def log(self, depth, text):
        self.lines.append(f"{'  ' * depth}{text}")

    def render(self):
        return "\n".join(self.lines)


def _sort_polys(polys):
    def keyfn(Q):
        return (
            ritt_rank(Q),
            Q.degree,
            sorted(Q.terms),
        )

    return sorted(polys, key=keyfn)


def sigma(ctx: ExtensionContext, Q: DiffPolynomial, vn_IQ, vn_SQ):
    """Root-separation threshold max(vn(f), vn(L_{P,f}), Z_{P,f}, vn(I_Q(f)),
    vn(S_Q(f))), with the indicial-root term replaced by a sound rational
    upper bound."""
    parts = {
        "vn(f)": ctx.vn_f(),
        "vn(L_P_f)": ctx.vn_LPf(),
        "Z_P_f": ctx.z_bound(),
        "vn(I_Q(f))": vn_IQ,
        "vn(S_Q(f))": vn_SQ,
    }
    return max(parts.values()), parts


def zero_test(ctx: ExtensionContext, polys, trace: Trace | None = None,
              depth: int = 0, _rank_bound=None) -> bool:
    """True iff every input polynomial vanishes at the distinguished
    solution of the context.

    Inputs must be nonzero as polynomials over the parent field and are
    processed in non-decreasing Ritt rank order (re-sorted here for
    safety).
    """
    polys = [Q.prune() for Q in polys]
    if any(Q.is_zero for Q in polys):
        raise StructuralError("zero polynomial passed to the decision procedure")
    polys = _sort_polys(polys)
    Q = polys[0]
    rank = ritt_rank(Q)
    if ASSERT_TERMINATION and _rank_bound is not None and not rank < _rank_bound:
        raise AssertionError("Ritt rank did not decrease in a recursive call")
    if trace:
        trace.log(depth, f"ZeroTest on {len(polys)} input(s); first rank {rank}")
    # step 1
    if rank == BOTTOM:
        if trace:
            trace.log(depth, "step 1: input lies in the coefficient field -> false")
        return False
    # step 2
    IQ = initial(Q).prune()
    if _test_aux(ctx, IQ, trace, depth, "I_Q", rank):
        if trace:
            trace.log(depth, "step 2: I_Q vanishes; prepending it")
        return zero_test(ctx, [IQ] + polys, trace, depth, rank)
    # step 3
    SQ = separant(Q).prune()
    if _test_aux(ctx, SQ, trace, depth, "S_Q", rank):
        if trace:
            trace.log(depth, "step 3: S_Q vanishes; prepending it")
        return zero_test(ctx, [SQ] + polys, trace, depth, rank)
    # step 4
    for J in list(polys[1:]) + [ctx.P]:
        R = ritt_reduce(J, [Q]).remainder.prune()
        if not R.is_zero:
            if trace:
                trace.log(depth, "step 4: a reduction remainder survives; prepending it")
            return zero_test(ctx, [R] + polys, trace, depth, rank)
    if trace:
        trace.log(depth, "step 4: all inputs and P reduce to 0 modulo Q")
    # step 5
    vn_IQ = _vn_value_at_f(ctx, IQ)
    vn_SQ = vn_IQ if IQ.key() == SQ.key() else _vn_value_at_f(ctx, SQ)
    s, parts = sigma(ctx, Q, vn_IQ, vn_SQ)
    if trace:
        comp = ", ".join(f"{k} = {v}" for k, v in parts.items())
        trace.log(depth, f"step 5: sigma = {s} ({comp})")
        trace.log(
            depth,
            f"step 5: I_P_f(N) = {render_indicial(ctx.indicial_of_P())}",
        )
        if depth == 0:
            trace.sigma = s
            trace.sigma_parts = parts
            trace.indicial = render_indicial(ctx.indicial_of_P())
    # step 6
    LQf = _linear_part_vn(ctx, Q, vn_SQ)
    bound = s + LQf
    Qf = _evaluate_at_solution(ctx, Q)
    got = valuation_below(Qf, bound)
    if trace:
        trace.log(depth, f"step 6: vn(L_Q_f) = {LQf}; testing vn(Q(f)) > {bound}")
        if depth == 0:
            trace.step6_bound = bound
    if got is ALL_ZERO_UP_TO_BOUND:
        nxt = _next_candidate(Qf, bound)
        if trace:
            shown = f">= {nxt}" if nxt is not None else "= +oo"
            trace.log(depth, f"step 6: vn(Q(f)) {shown} > {bound} -> true")
            if depth == 0:
                trace.step6_pass = True
                trace.step6_next = nxt
        return True
    if trace:
        trace.log(depth, f"step 6: vn(Q(f)) = {got} <= {bound} -> false")
        if depth == 0:
            trace.step6_pass = False
            trace.step6_found = got
    return False


def _next_candidate(stream, bound):
    for e, c in stream._terms:
        if e > bound and not stream.domain.is_zero(c):
            return e
    for p in stream.cert.iter_points():
        if p > bound:
            return p
    return None


def _test_aux(ctx, D, trace, depth, label, rank_bound) -> bool:
    """ZeroTest of a derived polynomial (initial or separant)."""
    if D.is_zero:
        return True
    if trace:
        trace.log(depth, f"testing {label} (rank {ritt_rank(D)})")
    return zero_test(ctx, [D], trace, depth + 1, rank_bound)


def _evaluate_at_solution(ctx, Q):
    """Series of Q(f) in the top variable."""
    return _poly_on_solution(Q, ctx.node)


def _vn_value_at_f(ctx, D):
    """vn(D(f)) for D known nonzero at f."""
    s = normalize(_evaluate_at_solution(ctx, D))
    head = s.head_tail()
    if head is None:
        raise StructuralError("vanishing value in a nonzero slot")
    return head[0].exponent


def _linear_part_vn(ctx, Q, vn_SQ):
    """vn(L_{Q,f}): the top coefficient is S_Q(f) with known valuation; the
    other partials are searched only up to that bound."""
    node = ctx.node
    n = node.level
    best = vn_SQ
    r = Q.order
    for j in range(r):
        pj = Q.partial(j).prune()
        if pj.is_zero:
            continue
        got = valuation_below(_evaluate_at_solution(ctx, pj), best)
        if got is not ALL_ZERO_UP_TO_BOUND and got < best:
            best = got
    return best


# -- extension construction -------------------------------------------------------


def extend(parent, P: DiffPolynomial, name="f") -> DsolNode:
    """Adjoin the distinguished solution of the quasi-linear P to the tower."""
    P = P.prune()
    sol = dsolve_quasilinear(P)
    return DsolNode(parent, P, sol, name=name)


def extend_with_solution(parent, P, sol, name="f", slice_companion=False) -> DsolNode:
    return DsolNode(parent, P, sol, name=name, slice_companion=slice_companion)


def extend_tower(node, P, name="g") -> DsolNode:
    return extend(node, P, name=name)


def rebase_tower(node, bmap):
    """Transport a tower node across a basis extension; extension nodes are
    rebuilt by re-solving their (rebased) defining polynomials.  Rebased
    nodes are memoized per basis map so repeated transports share towers."""
    cache = getattr(bmap, "_node_cache", None)
    if cache is None:
        cache = bmap._node_cache = {}
    key = id(node)
    if key in cache:
        return cache[key]
    if isinstance(node, DsolNode):
        new_parent = rebase_tower(node.parent, bmap)
        newP = node.P.rebase(bmap, new_parent)
        out = extend(new_parent, newP, name=node.name)
    else:
        out = bmap.new_basis.node(bmap.new_basis.size)
    cache[key] = out
    return out
