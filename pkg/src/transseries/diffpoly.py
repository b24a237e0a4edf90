"""Differential polynomials over tower coefficients and the distinguished
quasi-linear solver.

A polynomial is a sparse map from multi-indices (i_0, ..., i_r) to
coefficients: the monomial F^i_0 (dF)^i_1 ... (d^r F)^i_r, where d is the
derivation delta_k named by ``deriv_index``.  Additive and multiplicative
conjugation, homogeneous decomposition, dominant parts and the
quasi-linearity test follow the usual valuation calculus.

The solver handles the normalized quasi-linear equation P(f) = 0, f < 1:
split off the slice polynomial H (b_n-valuation-0 parts), recursively solve
H one level down for f_0, shift P by f_0, rewrite in the top derivation and
split the result as L F - g - R with L over the slice, v_n(g) > 0,
v_n(R_[1]) > 0, v_n(R) >= 0.  The remainder f - f_0 is the self-referential
lazy stream L^-1(g + R(f)), well founded because the coefficient at b_n^-a
only needs coefficients at strictly smaller exponents.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from .errors import NotQuasiLinear, StructuralError
from .lazy_series import (
    AddSeries,
    FiniteSeries,
    MulSeries,
    TailSeries,
    positive_tail_cert,
)
from .linear_ode import (
    LinearOperator,
    ZERO_OPERATOR,
    stream_derive_top,
)
from .order_core import GT, INFINITY, LT, point_cmp


def _trim(mi):
    mi = tuple(int(i) for i in mi)
    while mi and mi[-1] == 0:
        mi = mi[:-1]
    return mi


def _mi_mul(a, b):
    n = max(len(a), len(b))
    return tuple(
        (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)
    )


class DiffPolynomial:
    """Sparse differential polynomial with tower-element coefficients."""

    __slots__ = ("node", "terms", "deriv_index")

    def __init__(self, node, terms, deriv_index=1):
        clean = {}
        for mi, c in terms.items():
            mi = _trim(mi)
            c = self._coerce(node, c)
            if mi in clean:
                c = clean[mi] + c
            if c.syntactic_zero():
                clean.pop(mi, None)
            else:
                clean[mi] = c
        self.node = node
        self.terms = clean
        self.deriv_index = deriv_index

    @staticmethod
    def _coerce(node, c):
        if isinstance(c, (int, Fraction)):
            return node.from_scalar(c)
        if c.node is node:
            return c
        return node.lift(c)

    # -- structure ------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def prune(self) -> "DiffPolynomial":
        """Drop coefficients that the node's zero test kills."""
        kept = {
            mi: c for mi, c in self.terms.items() if not self.node.zero_test(c)
        }
        if len(kept) == len(self.terms):
            return self
        out = DiffPolynomial(self.node, {}, self.deriv_index)
        out.terms = kept
        return out

    @property
    def order(self) -> int:
        """Highest derivative index present (-1 for constant polynomials)."""
        return max((len(mi) - 1 for mi in self.terms), default=-1)

    @property
    def degree(self) -> int:
        return max((sum(mi) for mi in self.terms), default=0)

    def key(self):
        return tuple(
            sorted((mi, c.key()) for mi, c in self.terms.items())
        ), self.deriv_index

    def __repr__(self):
        if not self.terms:
            return "<0>"
        bits = []
        for mi in sorted(self.terms):
            mono = "*".join(
                f"d^{j}F^{e}" if e != 1 else f"d^{j}F"
                for j, e in enumerate(mi)
                if e
            )
            bits.append(f"({self.terms[mi]!r})*{mono or '1'}")
        return " + ".join(bits)

    # -- arithmetic -------------------------------------------------------------

    def _wrap(self, terms):
        return DiffPolynomial(self.node, terms, self.deriv_index)

    def __add__(self, other):
        if isinstance(other, DiffPolynomial):
            out = dict(self.terms)
            for mi, c in other.terms.items():
                out[mi] = out[mi] + c if mi in out else c
            return self._wrap(out)
        out = dict(self.terms)
        out[()] = out.get((), self.node.from_scalar(0)) + self._coerce(self.node, other)
        return self._wrap(out)

    __radd__ = __add__

    def __neg__(self):
        out = DiffPolynomial(self.node, {}, self.deriv_index)
        out.terms = {mi: -c for mi, c in self.terms.items()}
        return out

    def __sub__(self, other):
        return self + (-other if isinstance(other, DiffPolynomial) else -self._coerce(self.node, other))

    def __mul__(self, other):
        if isinstance(other, DiffPolynomial):
            out = {}
            for m1, c1 in self.terms.items():
                for m2, c2 in other.terms.items():
                    mi = _mi_mul(m1, m2)
                    p = c1 * c2
                    out[mi] = out[mi] + p if mi in out else p
            return self._wrap(out)
        c = self._coerce(self.node, other)
        out = DiffPolynomial(self.node, {}, self.deriv_index)
        out.terms = {
            mi: cc for mi, cc in ((mi, c0 * c) for mi, c0 in self.terms.items())
            if not cc.syntactic_zero()
        }
        return out

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = DiffPolynomial(self.node, {(): self.node.from_scalar(1)}, self.deriv_index)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def scale_coeffs(self, e) -> "DiffPolynomial":
        return self * e

    def map_coeffs(self, fn, node=None) -> "DiffPolynomial":
        node = node or self.node
        return DiffPolynomial(
            node, {mi: fn(c) for mi, c in self.terms.items()}, self.deriv_index
        )

    # -- calculus ---------------------------------------------------------------

    def partial(self, j: int) -> "DiffPolynomial":
        """Partial derivative with respect to the variable d^j F."""
        out = {}
        for mi, c in self.terms.items():
            if j >= len(mi) or mi[j] == 0:
                continue
            e = mi[j]
            nmi = tuple(v - 1 if t == j else v for t, v in enumerate(mi))
            cc = c * e
            out[nmi] = out[nmi] + cc if nmi in out else cc
        return self._wrap(out)

    def total_derive(self) -> "DiffPolynomial":
        """delta_k P: derive coefficients and shift the variables."""
        k = self.deriv_index
        out = {}

        def acc(mi, c):
            if not c.syntactic_zero():
                out[mi] = out[mi] + c if mi in out else c

        for mi, c in self.terms.items():
            acc(mi, c.derive_k(k))
            for j, e in enumerate(mi):
                if e == 0:
                    continue
                nmi = list(mi) + [0] * (j + 2 - len(mi))
                nmi[j] -= 1
                nmi[j + 1] += 1
                acc(_trim(tuple(nmi)), c * e)
        return self._wrap(out)

    def evaluate(self, f):
        """P(f) for a tower element f (of this node or an extension)."""
        target = f.node
        r = self.order
        ds = [f]
        for _ in range(max(r, 0)):
            ds.append(ds[-1].derive_k(self.deriv_index))
        out = None
        for mi, c in self.terms.items():
            term = target.lift(c) if c.node is not target else c
            for j, e in enumerate(mi):
                for _ in range(e):
                    term = term * ds[j]
            out = term if out is None else out + term
        if out is None:
            out = target.from_scalar(0)
        return out

    def evaluate_stream(self, fstream):
        """P(f) for a lazy series f in the top variable (requires the top
        derivation index)."""
        node = self.node
        n = node.level
        if self.deriv_index != n:
            return self.to_deriv_index(n).evaluate_stream(fstream)
        r = self.order
        ds = [fstream]
        for _ in range(max(r, 0)):
            ds.append(stream_derive_top(ds[-1], node))
        total = None
        for mi, c in self.terms.items():
            s = c.expand(n)
            for j, e in enumerate(mi):
                for _ in range(e):
                    s = MulSeries(s, ds[j])
            total = s if total is None else AddSeries(total, s)
        if total is None:
            total = FiniteSeries(node.slice_node().domain(), [])
        return total

    # -- conjugation ---------------------------------------------------------

    def add_conj(self, phi) -> "DiffPolynomial":
        """P_{+phi}: the polynomial with P_{+phi}(f) = P(phi + f)."""
        phi = self._coerce(self.node, phi)
        r = self.order
        dphi = [phi]
        for _ in range(max(r, 0)):
            dphi.append(dphi[-1].derive_k(self.deriv_index))
        one = DiffPolynomial(self.node, {(): 1}, self.deriv_index)
        out = DiffPolynomial(self.node, {}, self.deriv_index)
        for mi, c in self.terms.items():
            term = DiffPolynomial(self.node, {(): c}, self.deriv_index)
            for j, e in enumerate(mi):
                if e == 0:
                    continue
                var = tuple([0] * j + [1])
                binom = DiffPolynomial(
                    self.node, {var: 1, (): dphi[j]}, self.deriv_index
                )
                term = term * binom ** e
            out = out + term
        return out

    def mul_conj(self, phi) -> "DiffPolynomial":
        """P_{x phi}: the polynomial with P_{x phi}(f) = P(phi f)."""
        phi = self._coerce(self.node, phi)
        r = self.order
        dphi = [phi]
        for _ in range(max(r, 0)):
            dphi.append(dphi[-1].derive_k(self.deriv_index))
        out = DiffPolynomial(self.node, {}, self.deriv_index)
        for mi, c in self.terms.items():
            term = DiffPolynomial(self.node, {(): c}, self.deriv_index)
            for j, e in enumerate(mi):
                if e == 0:
                    continue
                # delta^j (phi F) = sum_m C(j, m) (delta^m phi) (delta^(j-m) F)
                pieces = {}
                for m in range(j + 1):
                    var = tuple([0] * (j - m) + [1])
                    coeff = dphi[m] * comb(j, m)
                    pieces[var] = pieces.get(var, self.node.from_scalar(0)) + coeff
                term = term * DiffPolynomial(self.node, pieces, self.deriv_index) ** e
            out = out + term
        return out

    # -- decomposition and valuations -----------------------------------------

    def homogeneous_part(self, i: int) -> "DiffPolynomial":
        out = DiffPolynomial(self.node, {}, self.deriv_index)
        out.terms = {mi: c for mi, c in self.terms.items() if sum(mi) == i}
        return out

    def degree_parts(self):
        parts = {}
        for mi, c in self.terms.items():
            parts.setdefault(sum(mi), {})[mi] = c
        return {
            d: self._wrap(dict(t)) for d, t in sorted(parts.items())
        }

    def v(self):
        """Joint valuation: min over (semantically nonzero) coefficients."""
        best = INFINITY
        for mi, c in self.terms.items():
            if self.node.zero_test(c):
                continue
            vc = c.v()
            if best is INFINITY or point_cmp(vc, best) == LT:
                best = vc
        return best

    def vn(self):
        """Valuation in the top basis variable: min over coefficients."""
        from .linear_ode import element_vn

        best = INFINITY
        for mi, c in self.terms.items():
            if self.node.zero_test(c):
                continue
            vc = element_vn(c)
            if best is INFINITY or vc < best:
                best = vc
        return best

    def dominant(self):
        """D_P: scalar coefficients of b^-v(P) per monomial, as a dict."""
        vP = self.v()
        if vP is INFINITY:
            return {}
        out = {}
        for mi, c in self.terms.items():
            lead = c.coefficient_at(vP)
            if lead != 0:
                out[mi] = out.get(mi, Fraction(0)) + lead
        return {mi: c for mi, c in out.items() if c != 0}

    def quasilinear_triple(self, alpha=None):
        """(v(P), v(P_[1]), v(P_[0])) of the (conjugated) polynomial."""
        Q = self
        if alpha is not None and any(a != 0 for a in alpha):
            mono = self.node.from_monomial(tuple(alpha))
            Q = self.mul_conj(mono)
        parts = Q.degree_parts()
        v1 = parts[1].v() if 1 in parts else INFINITY
        v0 = parts[0].v() if 0 in parts else INFINITY
        return Q.v(), v1, v0

    def is_quasilinear(self, alpha=None) -> bool:
        """v(P) = v(P_[1]) < v(P_[0]) after multiplicative conjugation by
        b^-alpha (alpha = 0 by default)."""
        vP, v1, v0 = self.quasilinear_triple(alpha)
        if vP is INFINITY or v1 is INFINITY:
            return False
        if point_cmp(vP, v1) != 0:
            return False
        return v0 is INFINITY or point_cmp(v0, vP) == GT

    def newton_degree_positive(self) -> bool:
        """Newton-degree predicate: the constant part of the dominant
        polynomial vanishes iff the equation P(f) = 0, f < 1 has nonzero
        Newton degree."""
        if self.is_zero:
            raise StructuralError("Newton degree predicate of the zero polynomial")
        dom = self.dominant()
        return () not in dom

    def linear_part_at(self, f):
        """L with L F = (P_{+f})_[1], over f's node; ZERO_OPERATOR when the
        shifted linear part vanishes identically."""
        target = f.node
        coeffs = []
        r = self.order
        for j in range(max(r, 0) + 1):
            pj = self.partial(j)
            coeffs.append(pj.evaluate(f) if not pj.is_zero else target.from_scalar(0))
        while coeffs and target.zero_test(coeffs[-1]):
            coeffs.pop()
        if not coeffs:
            return ZERO_OPERATOR
        return LinearOperator(target, coeffs, self.deriv_index, prune=False)

    # -- derivation-variable rewrite -------------------------------------------

    def to_deriv_index(self, k: int) -> "DiffPolynomial":
        """Rewrite the derivative variables from delta_old to delta_k using
        delta_old = (dphi_k / dphi_old) delta_k."""
        if k == self.deriv_index:
            return self
        node = self.node
        basis = node.basis
        w = node.lift(basis.dphi_element(node, k)) * node.lift(
            basis.dphi_element(node, self.deriv_index)
        ).inverse()
        r = self.order
        # X[j] = delta_old^j F written in delta_k variables
        X = [DiffPolynomial(node, {(1,): 1}, k)]
        for _ in range(max(r, 0)):
            X.append(_derive_vars(X[-1], w, k))
        out = DiffPolynomial(node, {}, k)
        for mi, c in self.terms.items():
            term = DiffPolynomial(node, {(): c}, k)
            for j, e in enumerate(mi):
                if e:
                    term = term * X[j] ** e
            out = out + term
        return out

    def rebase(self, bmap, new_node, new_deriv_index=None) -> "DiffPolynomial":
        """Transport across a basis extension; the derivation index follows
        the coordinate injection (delta_k of the old basis is delta_{k'} of
        the new one for the reindexed entry)."""
        k = self.deriv_index
        nk = new_deriv_index if new_deriv_index is not None else bmap.inject[k - 1] + 1
        out = {}
        for mi, c in self.terms.items():
            out[mi] = _rebase_coeff(c, bmap, new_node)
        return DiffPolynomial(new_node, out, nk)


def _rebase_coeff(c, bmap, new_node):
    from .field_tower import BaseElement

    if isinstance(c, BaseElement):
        mapped = bmap.map_element(c)
        return new_node.lift(mapped) if mapped.node is not new_node else mapped
    return c.rebase(bmap, new_node)


def _derive_vars(P: DiffPolynomial, w, k: int) -> DiffPolynomial:
    """delta_old P for P written in delta_k variables, where
    delta_old = w * delta_k: derive coefficients with w*delta_k and shift
    variables by one, multiplied by w."""
    node = P.node
    out = {}

    def acc(mi, c):
        if not c.syntactic_zero():
            out[mi] = out[mi] + c if mi in out else c

    for mi, c in P.terms.items():
        acc(mi, w * c.derive_k(k))
        for j, e in enumerate(mi):
            if e == 0:
                continue
            nmi = list(mi) + [0] * (j + 2 - len(mi))
            nmi[j] -= 1
            nmi[j + 1] += 1
            acc(_trim(tuple(nmi)), w * (c * e))
    return DiffPolynomial(node, out, k)


# -- the quasi-linear solver ---------------------------------------------------


class QuasiSolution:
    """Distinguished solution of a quasi-linear equation as a lazy stream in
    the top basis variable, with exact slice-field coefficients."""

    __slots__ = ("stream", "coeff_node", "node", "f0", "linear_op")

    def __init__(self, stream, coeff_node, node, f0, linear_op):
        self.stream = stream
        self.coeff_node = coeff_node
        self.node = node
        self.f0 = f0
        self.linear_op = linear_op

    @property
    def is_zero(self) -> bool:
        return self.stream is None


def dsolve_quasilinear(P: DiffPolynomial) -> QuasiSolution:
    """Distinguished solution of P(f) = 0, f < 1.

    P must be quasi-linear (the valuation triple is reported otherwise);
    the joint valuation is normalized internally.  The zero solution is
    returned with an empty stream when P_[0] vanishes.
    """
    node = P.node
    P = P.prune()
    if P.is_zero:
        raise NotQuasiLinear("zero polynomial", None)
    triple = P.quasilinear_triple()
    vP, v1, v0 = triple
    if not P.is_quasilinear():
        raise NotQuasiLinear(
            f"not quasi-linear: v(P)={vP}, v(P_[1])={v1}, v(P_[0])={v0}", triple
        )
    if v0 is INFINITY:
        return QuasiSolution(None, node.slice_node() if node.level else node,
                             node, None, None)
    if vP is not INFINITY and any(x != 0 for x in vP):
        mono = node.from_monomial(tuple(-x for x in vP))
        P = P.scale_coeffs(mono)
    return _solve_normalized(P)


def _solve_normalized(P: DiffPolynomial) -> QuasiSolution:
    node = P.node
    n = node.level
    if n == 0:
        p0 = P.homogeneous_part(0).prune()
        if not p0.is_zero:
            raise StructuralError(
                "scalar-level quasi-linear equation with nonzero constant part"
            )
        return QuasiSolution(None, node, node, None, None)
    slice_node = node.slice_node()
    H = DiffPolynomial(
        slice_node,
        {
            mi: c0
            for mi, c in P.terms.items()
            for c0 in (_slice_part(c, node, slice_node),)
            if not c0.syntactic_zero()
        },
        P.deriv_index,
    )
    sub = dsolve_quasilinear(H) if not H.is_zero else None
    work_node = node
    Pt = P
    f0_coeff = None
    if sub is not None and not sub.is_zero:
        from .zerotest import extend_with_solution

        ext_slice = extend_with_solution(slice_node, H, sub, name="f0")
        f0_coeff = ext_slice.generator()
        lifted_H = DiffPolynomial(node, dict(H.terms), H.deriv_index)
        work_node = extend_with_solution(
            node,
            lifted_H,
            QuasiSolution(
                FiniteSeries(ext_slice.domain(), [(Fraction(0), f0_coeff)]),
                ext_slice,
                node,
                None,
                None,
            ),
            name="f0",
            slice_companion=True,
        )
        Pt = DiffPolynomial(work_node, dict(P.terms), P.deriv_index).add_conj(
            work_node.generator()
        )
    Pn = Pt.to_deriv_index(n)
    slice_of_work = work_node.slice_node()
    dom = slice_of_work.domain()

    l_coeffs = {}
    r_terms = {}
    g_elem = None
    for mi, c in Pn.terms.items():
        d = sum(mi)
        if d == 0:
            g_elem = -c if g_elem is None else g_elem - c
            continue
        if d == 1:
            j = mi.index(1)
            c0 = _slice_part(c, work_node, slice_of_work)
            rest = c - work_node.lift(c0)
            if not c0.syntactic_zero():
                l_coeffs[j] = l_coeffs.get(j, slice_of_work.from_scalar(0)) + c0
            if not rest.syntactic_zero():
                r_terms[mi] = r_terms.get(mi, work_node.from_scalar(0)) + rest
        else:
            r_terms[mi] = r_terms.get(mi, work_node.from_scalar(0)) + c
    if not l_coeffs:
        raise StructuralError("quasi-linear split produced no linear slice part")
    order = max(l_coeffs)
    L = LinearOperator(
        work_node,
        [work_node.lift(l_coeffs.get(j, slice_of_work.from_scalar(0))) for j in range(order + 1)],
        deriv_index=n,
        prune=False,
    )

    if g_elem is None:
        g_stream = FiniteSeries(dom, [])
        base = None
    else:
        c0 = _slice_part(g_elem, work_node, slice_of_work)
        if not slice_of_work.zero_test(c0):
            raise StructuralError("degree-0 slice part did not vanish at f0")
        gexp = g_elem.expand(n)
        g_stream = TailSeries(gexp, Fraction(0), cert=positive_tail_cert(gexp.cert))
        base = None if g_stream.cert.empty else g_stream.cert.offset

    linear_certs = []
    high_parts = []
    # the collected raw terms are -R in the split P~ = L F - g - R; the
    # feedback source must be +R evaluated at the solution
    R = DiffPolynomial(work_node, {}, n)
    R.terms = {mi: -c for mi, c in r_terms.items()}
    for mi, c in r_terms.items():
        d = sum(mi)
        cert = c.expand(n).cert
        if d == 1:
            if not cert.empty and cert.offset <= 0:
                raise StructuralError("degree-1 remainder has nonpositive valuation")
            linear_certs.append(cert)
        else:
            high_parts.append((cert, d))
    if g_elem is None or g_stream.cert.empty:
        # no forcing terms: the remainder stream is zero
        if f0_coeff is None:
            return QuasiSolution(None, slice_of_work, work_node, None, L)
        return QuasiSolution(
            FiniteSeries(dom, [(Fraction(0), f0_coeff)]),
            slice_of_work,
            work_node,
            f0_coeff,
            L,
        )

    from .linear_ode import _dsolve_linear_normalized

    f_stream = _dsolve_linear_normalized(
        L, [g_stream], high_parts, base, linear_certs
    )
    # feed back R evaluated at the solution itself
    if R.terms:
        r_stream = R.evaluate_stream(f_stream)
        f_stream._sources.append([r_stream, 0])
    full = f_stream
    if f0_coeff is not None:
        full = AddSeries(FiniteSeries(dom, [(Fraction(0), f0_coeff)]), f_stream)
    return QuasiSolution(full, slice_of_work, work_node, f0_coeff, L)


def _slice_part(c, node, slice_node):
    c0 = c.expand(node.level).coefficient_at(Fraction(0))
    if isinstance(c0, Fraction):
        c0 = slice_node.from_scalar(c0)
    elif c0.node is not slice_node:
        c0 = slice_node.lift(c0)
    return c0


def dsolve_with_log_retries(P: DiffPolynomial, max_retries=None):
    """Solve a quasi-linear equation, inserting iterated logarithms into the
    basis on resonance (up to the order of P, after which the failure is
    genuine per the distinguished-solution existence bound).

    Returns (solution, rebased P, basis maps applied).  Resonance is probed
    at the first solution term; a resonance deeper in the lazy stream
    surfaces later, when the offending coefficient is pulled.
    """
    from .errors import BasisExtensionRequired, LinearResonance

    retries = max(P.order, 1) if max_retries is None else max_retries
    mappers = []
    while True:
        try:
            sol = dsolve_quasilinear(P)
            if sol.stream is not None and not sol.stream.cert.empty:
                sol.stream.terms_upto(sol.stream.cert.offset)
            return sol, P, mappers
        except LinearResonance:
            if retries == 0:
                raise BasisExtensionRequired(
                    "resonance persists after the maximal number of log insertions"
                )
            retries -= 1
            from .zerotest import rebase_tower

            new_basis, bmap = P.node.basis.insert_log()
            P = P.rebase(bmap, rebase_tower(P.node, bmap))
            mappers.append(bmap)
