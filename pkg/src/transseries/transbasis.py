"""Transbases: ordered tuples (b_1, ..., b_n) with b_1 an iterated logarithm
of x and every later entry the exponential of a purely large positive series
over its predecessors, ordered by strict asymptotic growth of the logarithms.

The basis owns the derivation data: delta_1 multiplies d/dx by
x log x ... log_l x, so delta_1 b_1 = b_1, and each entry stores
phi_i = log b_i together with delta_1 phi_i as sparse monomial sums over the
prefix.  Entries are restricted to finite monomial sums phi_i; this covers
every basis arising from the exp/log algorithms on such bases.

Extending a basis (inserting an iterated log in front, or a new exponential
at the position dictated by the growth chain) yields a new basis plus a
coordinate injection used to transport elements, polynomials and towers.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    ConstantFieldExtensionNeeded,
    DivisionByZero,
    StructuralError,
    TransbasisViolation,
)
from .field_tower import (
    BaseElement,
    BaseNode,
    _sp_derive,
    sp_level,
    sp_min_key,
    sp_shift,
    split_canonical,
)
from .order_core import GT, LT, compare_antilex


def _iterated_log_name(depth: int) -> str:
    return "log(" * depth + "x" + ")" * depth


def _fmt_power(p: Fraction) -> str:
    if p.denominator == 1 and p >= 0:
        return str(p)
    return f"({p})"


class _Entry:
    __slots__ = ("phi", "dphi", "name", "display")

    def __init__(self, phi, dphi, name, display):
        self.phi = phi  # sparse dict (None for the log root)
        self.dphi = dphi  # sparse dict: delta_1 b_i / b_i
        self.name = name
        self.display = display  # ("logpow", depth) | ("exp", phi_str)

    def render_power(self, power: Fraction) -> str:
        kind, data = self.display
        if kind == "logpow":
            base = _iterated_log_name(data)
            if power == 1:
                return base
            return f"{base}^{_fmt_power(power)}"
        phi_str = data
        wrapped = f"({phi_str})" if " + " in phi_str or " - " in phi_str else phi_str
        if power == 1:
            return f"exp({wrapped})"
        if power == -1:
            return f"exp(-{wrapped})"
        return f"exp({power}*{wrapped})"


class BasisMap:
    """Coordinate injection from an old basis into an extended one."""

    def __init__(self, old_basis, new_basis, inject):
        self.old_basis = old_basis
        self.new_basis = new_basis
        self.inject = tuple(inject)  # 0-based: old coord j -> new coord inject[j]

    def map_vec(self, v):
        out = [Fraction(0)] * self.new_basis.size
        for j, x in enumerate(v):
            out[self.inject[j]] = x
        return tuple(out)

    def map_sparse(self, p):
        return {self.map_vec(k): c for k, c in p.items()}

    def map_element(self, e: BaseElement) -> BaseElement:
        if e.node.basis is not self.old_basis:
            raise StructuralError("element does not belong to the mapped basis")
        return BaseElement(
            self.new_basis.node(0), self.map_sparse(e.num), self.map_sparse(e.den)
        )


class Transbasis:
    """Validated transbasis with cached tower nodes per level."""

    def __init__(self, entries):
        self.entries = list(entries)
        self._nodes = {}
        self._phi_elements = {}
        self._dphi_elements = {}

    # -- structure -----------------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def depth(self) -> int:
        kind, d = self.entries[0].display
        return d if kind == "logpow" else 0

    @property
    def names(self):
        return [e.name for e in self.entries]

    def node(self, level: int) -> BaseNode:
        if level not in self._nodes:
            self._nodes[level] = BaseNode(self, level)
        return self._nodes[level]

    def top_node(self) -> BaseNode:
        return self.node(self.size)

    def zero_vec(self):
        return (Fraction(0),) * self.size

    def unit_vec(self, i: int, value=Fraction(1)):
        """Vector with ``value`` at 1-based coordinate i."""
        return tuple(
            value if j == i - 1 else Fraction(0) for j in range(self.size)
        )

    def phi_sparse(self, i: int):
        return self.entries[i - 1].phi

    def dphi_sparse(self, i: int):
        return self.entries[i - 1].dphi

    def phi_element(self, i: int) -> BaseElement:
        if i not in self._phi_elements:
            if i == 1:
                raise StructuralError("log b_1 is not representable in the basis")
            self._phi_elements[i] = self.node(i - 1).from_sparse(self.phi_sparse(i))
        return self._phi_elements[i]

    def dphi_element(self, node, k: int) -> BaseElement:
        if k not in self._dphi_elements:
            self._dphi_elements[k] = self.node(
                max(sp_level(self.dphi_sparse(k)), 0)
            ).from_sparse(self.dphi_sparse(k))
        return self._dphi_elements[k]

    def render_monomial(self, key) -> str:
        parts = []
        for i, a in enumerate(key):
            if a != 0:
                parts.append(self.entries[i].render_power(-a))
        return "*".join(parts) if parts else "1"

    def __repr__(self):
        return f"Transbasis({', '.join(self.names)})"

    # -- construction ---------------------------------------------------------

    @staticmethod
    def initial(depth: int = 0) -> "Transbasis":
        root = _Entry(
            phi=None,
            dphi={(Fraction(0),): Fraction(1)},
            name=_iterated_log_name(depth),
            display=("logpow", depth),
        )
        return Transbasis([root])

    def extended_with_exp(
        self, phi, name=None, phi_str=None, require_append=False
    ):
        """Insert e^phi at the position required by the growth chain.

        ``phi`` is a sparse dict over this basis (or a BaseElement with
        monomial denominator).  Returns (new_basis, BasisMap, new_index).
        """
        if isinstance(phi, BaseElement):
            if len(phi.den) != 1:
                raise TransbasisViolation(
                    "TB2", "entry logarithm is not a finite monomial sum"
                )
            phi = dict(phi.num)
        if not phi:
            raise TransbasisViolation("TB2", "entry logarithm is zero")
        zero = self.zero_vec()
        for key in phi:
            if compare_antilex(key, zero) != LT:
                raise TransbasisViolation(
                    "TB2", "entry logarithm is not purely large"
                )
        vphi = sp_min_key(phi)
        if phi[vphi] <= 0:
            raise TransbasisViolation("TB2", "entry logarithm is not positive")
        # position in the chain log b_2 < log b_3 < ... (valuations decrease)
        pos = 1
        for i in range(2, self.size + 1):
            vi = sp_min_key(self.phi_sparse(i))
            c = compare_antilex(vi, vphi)
            if c == 0:
                raise TransbasisViolation(
                    "TB3", f"log of new entry has the valuation of log {self.names[i-1]}"
                )
            if c == GT:
                pos = i
        if require_append and pos != self.size:
            raise TransbasisViolation(
                "TB3", f"entry {name or 'e^phi'} is out of growth order"
            )
        if sp_level(phi) > pos:
            raise TransbasisViolation(
                "TB2",
                "entry logarithm involves basis elements above its growth position",
            )
        inject = [j if j < pos else j + 1 for j in range(self.size)]
        dphi = _sp_derive(self.node(self.size), phi)
        if phi_str is None:
            from .field_tower import _render_sparse

            phi_str = _render_sparse(phi, self)
        new_entry_tpl = (phi, dphi, name, phi_str)
        new_basis = Transbasis.__new__(Transbasis)
        entries = []
        old_entries = list(self.entries)
        bmap_tpl = inject

        def remap(p):
            if p is None:
                return None
            out = {}
            for k, c in p.items():
                nk = [Fraction(0)] * (self.size + 1)
                for j, xv in enumerate(k):
                    nk[bmap_tpl[j]] = xv
                out[tuple(nk)] = c
            return out

        for idx, e in enumerate(old_entries):
            entries.append(
                _Entry(remap(e.phi), remap(e.dphi), e.name, e.display)
            )
            if idx + 1 == pos:
                nphi, ndphi, nm, ps = new_entry_tpl
                entries.insert(
                    pos,
                    _Entry(
                        remap(nphi),
                        remap(ndphi),
                        nm if nm is not None else f"exp({ps})",
                        ("exp", ps),
                    ),
                )
        new_basis.entries = entries
        new_basis._nodes = {}
        new_basis._phi_elements = {}
        new_basis._dphi_elements = {}
        return new_basis, BasisMap(self, new_basis, inject), pos + 1

    def insert_log(self):
        """Prepend b_0 = log_{l+1} x; every old element embeds unchanged.

        Returns (new_basis, BasisMap).  The derivation becomes
        delta_0 = b_0 delta_1, so delta_0 b_0 = b_0 and the stored
        dphi data of the old entries is multiplied by the b_0 monomial.
        """
        n = self.size
        b0vec = tuple([Fraction(-1)] + [Fraction(0)] * n)

        def remap(p):
            return {(Fraction(0),) + k: c for k, c in p.items()} if p is not None else None

        root = _Entry(
            phi=None,
            dphi={(Fraction(0),) * (n + 1): Fraction(1)},
            name=_iterated_log_name(self.depth + 1),
            display=("logpow", self.depth + 1),
        )
        entries = [root]
        for idx, e in enumerate(self.entries):
            if idx == 0:
                # old b_1 = exp(b_0); keep its log-power display
                entries.append(
                    _Entry({b0vec: Fraction(1)}, {b0vec: Fraction(1)}, e.name, e.display)
                )
            else:
                entries.append(
                    _Entry(
                        remap(e.phi),
                        sp_shift(remap(e.dphi), b0vec),
                        e.name,
                        e.display,
                    )
                )
        new_basis = Transbasis.__new__(Transbasis)
        new_basis.entries = entries
        new_basis._nodes = {}
        new_basis._phi_elements = {}
        new_basis._dphi_elements = {}
        return new_basis, BasisMap(self, new_basis, [j + 1 for j in range(n)])


def validate(entries) -> Transbasis:
    """Build a transbasis from entry descriptors, naming the violated axiom
    on failure.

    Descriptors: ``("log", depth)`` for iterated logarithms of x, or
    ``("exp", phi_fn, name, phi_str)`` where ``phi_fn(basis)`` returns the
    entry's logarithm over the already-built prefix basis.
    """
    if not entries:
        raise TransbasisViolation("TB1", "empty basis")
    kind = entries[0][0]
    if kind != "log":
        raise TransbasisViolation(
            "TB1", "first entry must be an iterated logarithm of x"
        )
    basis = Transbasis.initial(entries[0][1])
    prev_log_depth = entries[0][1]
    for spec in entries[1:]:
        if spec[0] == "log":
            d = spec[1]
            if d != prev_log_depth - 1:
                raise TransbasisViolation(
                    "TB2",
                    f"log_{d}(x) must follow log_{d+1}(x); its logarithm is not "
                    "representable over the prefix",
                )
            phi = {basis.unit_vec(basis.size, Fraction(-1)): Fraction(1)}
            basis, _, _ = basis.extended_with_exp(
                phi,
                name=_iterated_log_name(d),
                phi_str=_iterated_log_name(d + 1),
                require_append=True,
            )
            basis.entries[-1].display = ("logpow", d)
            prev_log_depth = d
        elif spec[0] == "exp":
            _, phi_fn, name, phi_str = spec
            phi = phi_fn(basis)
            basis, _, _ = basis.extended_with_exp(
                phi, name=name, phi_str=phi_str, require_append=True
            )
        else:
            raise StructuralError(f"unknown basis entry kind {spec[0]!r}")
    return basis


# -- exponentials and logarithms ----------------------------------------------


def decompose_for_exp(phi, node):
    """Strip multiples of log b_i from phi and split the remainder.

    Returns (alphas, psi_large, psi_const, psi_small, position) with
    phi = -sum alphas[i] log b_i + psi_large + psi_const + psi_small and
    position the insertion point for e^|psi_large| in the growth chain
    (None when psi_large = 0).
    """
    basis = node.basis
    alphas = {}
    psi = phi
    for i in range(basis.size, 1, -1):
        vi = sp_min_key(basis.phi_sparse(i))
        c = psi.coefficient_at(vi)
        if c != 0:
            lc = basis.phi_sparse(i)[vi]
            alpha = -c / lc
            alphas[i] = alpha
            psi = psi + alpha * _lift_to(node, basis.phi_element(i))
    large, const, small = split_canonical(psi)
    if getattr(large, "is_zero", False) or _is_zero(large):
        return alphas, large, const, small, None
    lsparse = _large_part_sparse(large)
    vphi = sp_min_key(lsparse)
    pos = 1
    for i in range(2, basis.size + 1):
        if compare_antilex(sp_min_key(basis.phi_sparse(i)), vphi) == GT:
            pos = i
    return alphas, large, const, small, pos


def _is_zero(e):
    return e.node.zero_test(e)


def _lift_to(node, e):
    """Lift a base element into ``node`` (which may be an extension node)."""
    if e.node is node:
        return e
    if hasattr(node, "lift"):
        return node.lift(e)
    raise StructuralError("cannot lift element")


def _large_part_sparse(large):
    """Sparse monomial dict of a purely large element; rejects non-polynomial
    large parts, which would require transbasis entries beyond finite sums."""
    base = large
    if not isinstance(base, BaseElement):
        base = large.as_base() if hasattr(large, "as_base") else None
        if base is None:
            raise TransbasisViolation(
                "TB2", "purely large part does not lie in the monomial base field"
            )
    if len(base.den) != 1:
        raise TransbasisViolation(
            "TB2", "purely large part is not a finite monomial sum"
        )
    return dict(base.num)


def exp_element(phi, node):
    """e^phi as an element of a possibly extended tower.

    Returns (element, node).  The basis acquires e^|psi_large| when the
    stripped remainder keeps a purely large part, and the tower acquires the
    distinguished solution g of  delta_1 g = delta_1 psi_small * (1 + g)
    (i.e. e^psi_small = 1 + g) when the small part is nonzero.
    """
    from .zerotest import extend_tower, rebase_tower

    basis = node.basis
    alphas, large, const, small, pos = decompose_for_exp(phi, node)
    if const != 0:
        raise ConstantFieldExtensionNeeded(
            f"exp needs the constant e^{const} adjoined"
        )
    mono_old = {i: a for i, a in alphas.items() if a != 0}
    mappers = []
    new_coord = None
    sign = 1
    if pos is not None:
        lsparse = _large_part_sparse(large)
        lead = lsparse[sp_min_key(lsparse)]
        sign = 1 if lead > 0 else -1
        if sign < 0:
            lsparse = {k: -c for k, c in lsparse.items()}
        new_basis, bmap, new_index = node.basis.extended_with_exp(lsparse)
        mappers.append(bmap)
        node = rebase_tower(node, bmap)
        basis = new_basis
        mono_old = {bmap.inject[i - 1] + 1: a for i, a in mono_old.items()}
        small = _map_into(small, node, bmap)
        new_coord = new_index
    vecvals = [Fraction(0)] * basis.size
    for i, a in mono_old.items():
        vecvals[i - 1] = a
    if new_coord is not None:
        vecvals[new_coord - 1] = Fraction(-sign)
    mono = basis.node(max(sp_level({tuple(vecvals): Fraction(1)}), 0)).from_monomial(
        tuple(vecvals)
    )
    result = _lift_to(node, mono)
    if not _is_zero(small):
        node, g = _solve_exp_small(small, node)
        result = _lift_to(node, result) * (1 + g)
    return result, node, mappers


def log_element(phi, node):
    """log phi as an element of a possibly extended tower.

    Returns (element, node).  Requires phi > 0 with leading coefficient 1;
    a nonzero alpha_1 exponent triggers a log insertion, and log(1 + eps) is
    the distinguished solution of  delta_1 g * (1 + eps) = delta_1 eps.
    """
    from .zerotest import extend_tower, rebase_tower

    if _is_zero(phi):
        raise DivisionByZero("log of zero")
    if not phi.is_positive():
        raise StructuralError("log of a non-positive element")
    c = phi.leading_scalar()
    if c != 1:
        raise ConstantFieldExtensionNeeded(f"log needs the constant log({c}) adjoined")
    alpha = phi.v()
    basis = node.basis
    mappers = []
    if alpha[0] != 0:
        # log b_1 is not representable; prepend the next iterated logarithm
        new_basis, bmap = basis.insert_log()
        mappers.append(bmap)
        node = rebase_tower(node, bmap)
        phi = _map_into(phi, node, bmap)
        alpha = (Fraction(0),) + tuple(alpha)
        basis = new_basis
    result = _lift_to(node, basis.node(0).from_scalar(0))
    for i in range(2, basis.size + 1):
        if alpha[i - 1] != 0:
            result = result - alpha[i - 1] * _lift_to(node, basis.phi_element(i))
    mono_inv = basis.top_node().from_monomial(
        tuple(-a for a in alpha)
    )
    eps = phi * _lift_to(node, mono_inv) - 1
    if not _is_zero(eps):
        node, g = _solve_log_small(eps, node)
        result = _lift_to(node, result) + g
    return result, node, mappers


def _solve_exp_small(psi, node):
    """Adjoin g with e^psi = 1 + g, via delta_1 F - delta_1 psi * (1 + F)."""
    from .diffpoly import DiffPolynomial
    from .zerotest import extend_tower

    dpsi = psi.derive()
    P = DiffPolynomial(
        node,
        {
            (0, 1): node_one(node),
            (): -dpsi,
            (1,): -dpsi,
        },
    )
    new_node = extend_tower(node, P)
    return new_node, new_node.generator()


def _solve_log_small(eps, node):
    """Adjoin g = log(1 + eps), via (1 + eps) delta_1 F - delta_1 eps."""
    from .diffpoly import DiffPolynomial
    from .zerotest import extend_tower

    deps = eps.derive()
    P = DiffPolynomial(
        node,
        {
            (0, 1): 1 + eps,
            (): -deps,
        },
    )
    new_node = extend_tower(node, P)
    return new_node, new_node.generator()


def node_one(node):
    return node.one if hasattr(node, "one") else node.from_scalar(1)


def _map_into(e, new_node, bmap):
    """Transport an element through a basis map into the rebased node."""
    if isinstance(e, BaseElement):
        mapped = bmap.map_element(e)
        return _lift_to(new_node, mapped) if new_node is not mapped.node else mapped
    return e.rebase(bmap, new_node)
