"""Linear differential operators over tower coefficients and lazy
distinguished solutions.

An operator ``L = L_r d^r + ... + L_0`` is stored with a declared derivation
index k (``d = delta_k``).  The distinguished solve works in the derivation
of the top basis variable: the operator splits as L = H + T with H carrying
the slice parts (valuation 0 in b_n) and T the rest; each incoming term
``phi b_n^-beta`` of the right-hand side is answered by ``psi b_n^-beta``
where psi solves the conjugated slice equation one level down, and the
feedback ``-T(psi b_n^-beta)`` is subtracted lazily.  The recursion bottoms
out at scalar level, where the conjugated operator acts by its indicial
value: a vanishing value against a nonzero right-hand side is resonance
(the distinguished solution would need a log extension) and raises
LinearResonance.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    CrystallizationOverflow,
    LinearResonance,
    StructuralError,
)
from .lazy_series import (
    AddSeries,
    LazySeries,
    MapSeries,
    MulSeries,
    ScaleSeries,
)
from .order_core import GridCertificate, INFINITY, as_scalar


class ZeroOperator:
    """Typed marker for an identically vanishing linear part."""

    def __repr__(self):
        return "ZERO_OPERATOR"


ZERO_OPERATOR = ZeroOperator()


class LinearOperator:
    """Sum L_i delta_k^i with tower-element coefficients, L_r nonzero."""

    __slots__ = ("node", "coeffs", "deriv_index")

    def __init__(self, node, coeffs, deriv_index=1, prune=True):
        coeffs = [self._coerce(node, c) for c in coeffs]
        if prune:
            while coeffs and coeffs[-1].syntactic_zero():
                coeffs.pop()
        if not coeffs:
            raise StructuralError("zero linear operator")
        self.node = node
        self.coeffs = coeffs
        self.deriv_index = deriv_index

    @staticmethod
    def _coerce(node, c):
        if isinstance(c, (int, Fraction)):
            return node.from_scalar(c)
        if c.node is node:
            return c
        return node.lift(c)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __repr__(self):
        k = self.deriv_index
        parts = [f"({c!r})*d{k}^{i}" for i, c in enumerate(self.coeffs)]
        return " + ".join(parts)

    # -- basic calculus -------------------------------------------------------

    def _dk(self, e):
        """delta_k applied to a tower element."""
        return e.derive_k(self.deriv_index)

    def apply(self, f):
        """L(f) for a tower element or a lazy series in the top variable."""
        if isinstance(f, LazySeries):
            return self.apply_stream(f)
        out = None
        d = f
        for i, c in enumerate(self.coeffs):
            if i > 0:
                d = self._dk(d)
            term = c * d
            out = term if out is None else out + term
        return out

    def apply_stream(self, s):
        if self.deriv_index != self.node.level:
            raise StructuralError("stream application expects the top derivation")
        out = None
        d = s
        for i, c in enumerate(self.coeffs):
            if i > 0:
                d = stream_derive_top(d, self.node)
            term = MulSeries(c.expand(self.node.level), d)
            out = term if out is None else AddSeries(out, term)
        return out

    # -- composition and conjugation ------------------------------------------

    def _compose_after(self, a, b):
        """(a*delta_k + b) o self, i.e. apply self first."""
        n = len(self.coeffs)
        zero = self.node.from_scalar(0)
        out = [zero for _ in range(n + 1)]
        for j, m in enumerate(self.coeffs):
            out[j] = out[j] + a * self._dk(m) + b * m
            out[j + 1] = out[j + 1] + a * m
        return LinearOperator(self.node, out, self.deriv_index, prune=False)

    def substitute_deriv(self, a, b) -> "LinearOperator":
        """Operator sum c_j X^j for X := a*delta_k + b (left coefficients)."""
        node = self.node
        # X^0 = identity
        power = LinearOperator(node, [node.from_scalar(1)], self.deriv_index, prune=False)
        acc = [c * self.coeffs[0] for c in power.coeffs]
        for cj in self.coeffs[1:]:
            power = power._compose_after(a, b)
            while len(acc) < len(power.coeffs):
                acc.append(node.from_scalar(0))
            for i, pc in enumerate(power.coeffs):
                acc[i] = acc[i] + cj * pc
        return LinearOperator(node, acc, self.deriv_index, prune=False)

    def conj_top(self, beta) -> "LinearOperator":
        """Normalized conjugate b_n^beta L_{x b_n^-beta} for the top variable:
        substitute delta_n -> delta_n - beta."""
        beta = as_scalar(beta)
        if beta == 0:
            return self
        return self.substitute_deriv(
            self.node.from_scalar(1), self.node.from_scalar(-beta)
        )

    def conj_mul(self, alpha) -> "LinearOperator":
        """Normalized conjugate b^alpha L_{x b^-alpha} for a full exponent
        vector: substitute delta_k -> delta_k - sum_i alpha_i (delta_k b_i / b_i),
        with delta_k b_i / b_i = (delta_1 phi_i) / (delta_1 phi_k)."""
        basis = self.node.basis
        shift = None
        k = self.deriv_index
        wk = self.node.lift(basis.dphi_element(self.node, k))
        for i, a in enumerate(alpha):
            if a == 0:
                continue
            wi = self.node.lift(basis.dphi_element(self.node, i + 1))
            piece = wi * wk.inverse() * (-a)
            shift = piece if shift is None else shift + piece
        if shift is None:
            return self
        return self.substitute_deriv(self.node.from_scalar(1), shift)

    def scaled(self, e) -> "LinearOperator":
        return LinearOperator(
            self.node, [c * e for c in self.coeffs], self.deriv_index, prune=False
        )

    def to_deriv_index(self, k: int) -> "LinearOperator":
        """Rewrite in delta_k via delta_old = (dphi_k / dphi_old) delta_k."""
        if k == self.deriv_index:
            return self
        basis = self.node.basis
        w = self.node.lift(basis.dphi_element(self.node, k)) * self.node.lift(
            basis.dphi_element(self.node, self.deriv_index)
        ).inverse()
        out = LinearOperator(self.node, self.coeffs, k, prune=False)
        return out.substitute_deriv(w, self.node.from_scalar(0))

    # -- derived data ----------------------------------------------------------

    def nonzero_coeff_indices(self):
        return [i for i, c in enumerate(self.coeffs) if not self.node.zero_test(c)]

    def joint_valuation(self):
        """v(L) = min over joint valuations of the nonzero coefficients."""
        vals = [self.coeffs[i].v() for i in self.nonzero_coeff_indices()]
        if not vals:
            return INFINITY
        from .order_core import LT, point_cmp

        lo = vals[0]
        for v in vals[1:]:
            if point_cmp(v, lo) == LT:
                lo = v
        return lo

    def indicial(self):
        """Indicial polynomial I_L(N) = sum (L_i)_{v(L)} (-N)^i as a
        coefficient list, constant term first."""
        vL = self.joint_valuation()
        if vL is INFINITY:
            raise StructuralError("indicial polynomial of the zero operator")
        poly = [Fraction(0)] * (self.order + 1)
        for i, c in enumerate(self.coeffs):
            lead = c.coefficient_at(vL)
            if lead != 0:
                poly[i] += lead * (-1) ** i
        while len(poly) > 1 and poly[-1] == 0:
            poly.pop()
        return poly

    def nu(self, alpha) -> int:
        """Index of the lowest nonzero coefficient of the normalized
        conjugate by b^-alpha."""
        conj = self.conj_mul(alpha)
        idx = conj.nonzero_coeff_indices()
        if not idx:
            raise StructuralError("conjugate operator vanished")
        return idx[0]

    def vn(self):
        """Valuation of L in b_n^-1: exact min over coefficients, searched
        with the top nonzero coefficient's valuation as the bound."""
        node = self.node
        n = node.level
        idx = self.nonzero_coeff_indices()
        if not idx:
            return INFINITY
        from .lazy_series import ALL_ZERO_UP_TO_BOUND, valuation_below

        best = element_vn(self.coeffs[idx[-1]])
        for i in idx[:-1]:
            got = valuation_below(self.coeffs[i].expand(n), best)
            if got is not ALL_ZERO_UP_TO_BOUND and got < best:
                best = got
        return best


def element_vn(e):
    """Valuation of a nonzero tower element in the top basis variable."""
    from .lazy_series import normalize

    head = normalize(e.expand(e.node.level)).head_tail()
    if head is None:
        return INFINITY
    return head[0].exponent


def indicial_eval(poly, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(poly):
        acc = acc * x + c
    return acc


def render_indicial(poly) -> str:
    """Render a coefficient list as a polynomial in N."""
    parts = []
    for i in range(len(poly) - 1, -1, -1):
        c = poly[i]
        if c == 0:
            continue
        if i == 0:
            term = str(c)
        else:
            var = "N" if i == 1 else f"N^{i}"
            if c == 1:
                term = var
            elif c == -1:
                term = f"-{var}"
            else:
                term = f"{c}*{var}"
        if parts and not term.startswith("-"):
            parts.append(f" + {term}")
        elif parts:
            parts.append(f" - {term[1:]}")
        else:
            parts.append(term)
    return "".join(parts) if parts else "0"


def stream_derive_top(s, node):
    """delta_n applied to a lazy series in b_n^-1 with slice coefficients:
    (a, beta) -> (delta_n a - beta a, beta)."""
    basis = node.basis
    n = node.level

    def fn(beta, a):
        return _slice_derive_top(a, basis, n) - beta * a

    return MapSeries(s, fn)


def _slice_derive_top(a, basis, n):
    """delta_n of a slice element (level < n): delta_1 a / delta_1 phi_n."""
    da = a.derive()
    if da.syntactic_zero():
        return da
    return da / basis.dphi_element(a.node, n)


class SolutionSeries(LazySeries):
    """Exponent-driven self-referential stream: candidates come from a
    precomputed certificate closure; the coefficient at an exponent is
    assembled from source streams whose bounded pulls only require strictly
    earlier coefficients of this stream."""

    __slots__ = ("step", "_sources", "_pending", "_cands", "_cand_iter", "_watermark")

    def __init__(self, domain, cert, sources, step):
        super().__init__(domain, cert)
        self.step = step
        self._sources = [[s, 0] for s in sources]
        self._pending = {}
        self._cands = []
        self._cand_iter = cert.iter_points() if not cert.empty else iter(())
        self._watermark = None

    def _pull_sources(self, bound):
        i = 0
        while i < len(self._sources):
            entry = self._sources[i]
            s, done = entry
            if s._complete and done >= len(s._terms):
                i += 1
                continue
            terms = s.terms_upto(bound)
            for e, c in terms[done:]:
                self._pending[e] = (
                    self.domain.add(self._pending[e], c) if e in self._pending else c
                )
            entry[1] = len(terms)
            i += 1

    def _force_upto(self, bound):
        while not self._cands or (
            self._cands[-1] is not None and self._cands[-1] <= bound
        ):
            self._cands.append(next(self._cand_iter, None))
            if self._cands[-1] is None:
                break
        for e in self._cands:
            if e is None or e > bound:
                break
            if self._watermark is not None and e <= self._watermark:
                continue
            self._pull_sources(e)
            if any(k < e for k in self._pending):
                raise StructuralError("solution support left its certificate")
            self._watermark = e
            if e not in self._pending:
                continue
            phi = self._pending.pop(e)
            if self.domain.is_zero_cheap(phi):
                continue
            psi, feedback = self.step(e, phi)
            if not self.domain.is_zero_cheap(psi):
                self._terms.append((e, psi))
            for fb in feedback:
                self._sources.append([fb, 0])

    def _try_complete(self):
        while True:
            for s, _ in self._sources:
                if not s.try_complete():
                    return False
            tops = [s._terms[-1][0] for s, _ in self._sources if s._terms]
            if self._pending:
                tops.append(max(self._pending))
            consumed = all(d >= len(s._terms) for s, d in self._sources)
            bound = max(tops) if tops else None
            if (
                bound is None
                or (self._watermark is not None and self._watermark >= bound)
            ) and consumed and not self._pending:
                return True
            state = (
                len(self._terms),
                len(self._sources),
                self._watermark,
                tuple(d for _, d in self._sources),
            )
            if bound is not None:
                self.terms_upto(bound)
                self._pull_sources(bound)
            if state == (
                len(self._terms),
                len(self._sources),
                self._watermark,
                tuple(d for _, d in self._sources),
            ):
                return not self._pending and all(
                    d >= len(s._terms) for s, d in self._sources
                )


def solution_certificate(g_certs, linear_certs, high_parts, base=None):
    """Sound 1-D certificate closure for a distinguished-solution stream.

    g_certs: right-hand-side certificates; linear_certs: certificates of
    degree-1 feedback coefficients (positive offsets); high_parts: pairs
    (cert, degree) of the degree >= 2 feedback coefficients; base: positive
    lower bound of the solution support (required when high_parts occur).
    """
    offsets = [c.offset for c in g_certs if not c.empty]
    if not offsets:
        return GridCertificate.empty_at(Fraction(0))
    start = min(offsets)
    gens = set()
    for c in list(g_certs) + list(linear_certs) + [c for c, _ in high_parts]:
        if not c.empty:
            gens.update(c.generators)
    for c in linear_certs:
        if not c.empty:
            if c.offset <= 0:
                raise StructuralError("degree-1 feedback must have positive offset")
            gens.add(c.offset)
    if high_parts:
        if base is None or base <= 0:
            raise StructuralError("degree >= 2 feedback needs a positive base")
        gens.add(base)
        for c, d in high_parts:
            if not c.empty:
                gens.add(c.offset + (d - 1) * base)
    return GridCertificate(sorted(gens), start)


MAX_CRYSTAL_TERMS = 512


def crystallize(stream, node, cap=MAX_CRYSTAL_TERMS):
    """Exact tower element from a provably finite stream in b_k^-1 whose
    coefficients live one level down from ``node``."""
    pulls = 0
    cands = stream.candidate_points()
    while not stream.try_complete():
        bound = None
        for p in cands:
            if stream._done is None or p > stream._done:
                bound = p
                break
        if bound is None:
            break
        stream.terms_upto(bound)
        pulls += 1
        if pulls > cap:
            raise CrystallizationOverflow(
                "slice solution stream did not terminate; the solution is not "
                "an exact element of the slice field"
            )
    k = node.level
    out = node.zero
    for e, c in stream._terms:
        if c.syntactic_zero():
            continue
        vec = [Fraction(0)] * node.basis.size
        vec[k - 1] = e
        out = out + node.lift(c) * node.from_monomial(tuple(vec))
    return out


def dsolve_linear(L: LinearOperator, g, *, crystallize_slices=True):
    """Distinguished solution of L f = g, lazily expanded in the top basis
    variable of L's node.

    ``g`` is a tower element or a lazy series in b_n^-1 over the slice
    domain.  vn(L) is normalized to 0 internally (both sides scale by the
    dominant b_n-power).  Resonance raises LinearResonance; the caller may
    insert a logarithm into the basis and retry.
    """
    node = L.node
    n = node.level
    if n < 1:
        raise StructuralError("dsolve_linear needs at least one basis variable")
    L = L.to_deriv_index(n)
    m = L.vn()
    if m is INFINITY:
        raise StructuralError("zero operator")
    if m != 0:
        vec = [Fraction(0)] * node.basis.size
        vec[n - 1] = -m
        mono = node.from_monomial(tuple(vec))
        L = L.scaled(mono)
        if isinstance(g, LazySeries):
            g = ScaleSeries(g, g.domain.one, -m)
        else:
            g = g * mono
    gs = g if isinstance(g, LazySeries) else g.expand(n)
    return _dsolve_linear_normalized(L, [gs], crystallize_slices=crystallize_slices)


def _dsolve_linear_normalized(L, sources, high_parts=(), base=None,
                              extra_linear_certs=(), *, crystallize_slices=True):
    """Core solver: vn(L) = 0; sources are streams over the slice domain."""
    node = L.node
    n = node.level
    slice_node = node.slice_node()
    dom = slice_node.domain()
    H, T = _split_operator(L)
    t_certs = [t.expand(n).cert for _, t in T]
    cert = solution_certificate(
        [s.cert for s in sources],
        t_certs + list(extra_linear_certs),
        list(high_parts),
        base,
    )
    conj_cache = {}

    def step(beta, phi):
        conj = conj_cache.get(beta)
        if conj is None:
            conj = H.conj_top(beta)
            conj_cache[beta] = conj
        psi = solve_slice(conj, phi, crystallize_slices=crystallize_slices)
        feedback = []
        if not psi.syntactic_zero():
            for i, t in T:
                u = _iterated_shifted_derive(psi, beta, i, node)
                if u.syntactic_zero():
                    continue
                prod = t * node.lift(u)
                if prod.syntactic_zero():
                    continue
                fb = ScaleSeries(
                    MapSeries(prod.expand(n), lambda _e, c: -c), dom.one, beta
                )
                feedback.append(fb)
        return psi, feedback

    return SolutionSeries(dom, cert, sources, step)


def _split_operator(L):
    """L = H + T with H the b_n-degree-0 slice parts of the coefficients
    (kept as node-level elements, derivation delta_n) and T the indexed
    positive-valuation remainders."""
    node = L.node
    n = node.level
    slice_node = node.slice_node()
    hs = []
    ts = []
    for i, c in enumerate(L.coeffs):
        c0 = c.expand(n).coefficient_at(Fraction(0))
        if isinstance(c0, Fraction):
            c0 = slice_node.from_scalar(c0)
        rest = c - node.lift(c0)
        hs.append(node.lift(c0))
        if not rest.syntactic_zero():
            ts.append((i, rest))
    if all(h.syntactic_zero() for h in hs):
        raise StructuralError("operator has no slice part at valuation 0")
    return LinearOperator(node, hs, deriv_index=n, prune=False), ts


def _iterated_shifted_derive(psi, beta, i, node):
    """(delta_n - beta)^i psi for a slice element psi."""
    basis = node.basis
    n = node.level
    out = psi
    for _ in range(i):
        out = _slice_derive_top(out, basis, n) - beta * out
    return out


def solve_slice(Hconj, phi, *, crystallize_slices=True):
    """Solve the conjugated slice equation H_conj(psi) = phi one level down.

    At scalar slice level the equation reads I * psi = phi for the indicial
    value I (the constant coefficient of the conjugate); deeper slices
    recurse through the solver and crystallize the stream back into an
    exact element.
    """
    node = Hconj.node
    n = node.level
    slice_node = node.slice_node()
    if slice_node.level == 0:
        c0 = Hconj.coeffs[0]
        scalar = c0.expand(n).coefficient_at(Fraction(0))
        if not isinstance(scalar, Fraction):
            scalar = scalar.scalar_value()
        if scalar == 0:
            if phi.syntactic_zero():
                return phi
            raise LinearResonance(
                "indicial value vanished against a nonzero right-hand side; "
                "log b_1 terms would be required"
            )
        return phi * (Fraction(1) / scalar)
    if Hconj.order == 0:
        # derivative-free equation: exact element division
        c0 = _project_to_slice(Hconj.coeffs[0], node)
        if c0.syntactic_zero():
            if phi.syntactic_zero():
                return phi
            raise LinearResonance(
                "multiplication operator vanished against a nonzero right-hand side"
            )
        return phi / c0
    sub = LinearOperator(
        slice_node,
        [_project_to_slice(c, node) for c in Hconj.coeffs],
        deriv_index=n,
        prune=False,
    )
    sub = sub.to_deriv_index(slice_node.level)
    stream = dsolve_linear(sub, phi, crystallize_slices=crystallize_slices)
    if not crystallize_slices:
        return stream
    return crystallize(stream, slice_node)


def _project_to_slice(c, node):
    n = node.level
    c0 = c.expand(n).coefficient_at(Fraction(0))
    slice_node = node.slice_node()
    if isinstance(c0, Fraction):
        c0 = slice_node.from_scalar(c0)
    elif c0.node is not slice_node:
        c0 = slice_node.lift(c0)
    return c0
