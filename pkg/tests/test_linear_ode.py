import random
from fractions import Fraction as F

import pytest

from conftest import atoms

from transseries.errors import LinearResonance
from transseries.field_tower import render_element
from transseries.lazy_series import normalize
from transseries.linear_ode import (
    LinearOperator,
    crystallize,
    dsolve_linear,
    indicial_eval,
    render_indicial,
)
from transseries.transbasis import Transbasis


def d2_plus_1(node):
    return LinearOperator(node, [1, 1], deriv_index=2)


def test_apply_examples(xex_node):
    x, ex = atoms(xex_node)
    em2x = xex_node.from_monomial((F(0), F(2)))
    L = d2_plus_1(xex_node)
    assert (L.apply(em2x) + em2x).is_zero  # -e^{-2x}
    D1 = LinearOperator(xex_node, [0, 1], deriv_index=1)
    assert D1.apply(xex_node.from_scalar(5)).is_zero
    # (d2 - 1) x = 1 - x
    M = LinearOperator(xex_node, [-1, 1], deriv_index=2)
    assert (M.apply(x) - (1 - x)).is_zero


def test_conj_mul_examples(xex_node):
    L = d2_plus_1(xex_node)
    C = L.conj_mul((F(0), F(2)))
    assert (C.coeffs[0] + 1).is_zero and (C.coeffs[1] - 1).is_zero  # d2 - 1
    C0 = L.conj_mul((F(0), F(0)))
    assert C0 is L
    D = LinearOperator(xex_node, [0, 1], deriv_index=2).conj_mul((F(0), F(1)))
    assert (D.coeffs[0] + 1).is_zero  # d2 - 1: constant coefficient -1, nu = 0


def test_conjugation_coherence(xex_node):
    # apply(conj_mul(L, a), f) = b^a * apply(L, b^-a f), exactly
    rng = random.Random(31)
    x, ex = atoms(xex_node)
    for _ in range(10):
        coeffs = [
            xex_node.from_monomial((F(rng.randint(-1, 1)), F(rng.randint(-1, 1))),
                                   F(rng.randint(1, 3)))
            for _ in range(rng.randint(2, 3))
        ]
        L = LinearOperator(xex_node, coeffs, deriv_index=2)
        alpha = (F(rng.randint(-2, 2)), F(rng.randint(-2, 2)))
        mono = xex_node.from_monomial(alpha)
        mono_inv = mono.inverse()
        f = x + ex.inverse() * F(rng.randint(1, 4))
        lhs = L.conj_mul(alpha).apply(f)
        rhs = mono.inverse() * L.apply(mono * f)
        assert (lhs - rhs).is_zero


def test_indicial_examples(xex_node):
    L = d2_plus_1(xex_node)
    assert L.indicial() == [F(1), F(-1)]  # 1 - N
    assert render_indicial(L.indicial()) == "-N + 1"
    D2sq = LinearOperator(xex_node, [0, 0, 1], deriv_index=2)
    assert D2sq.indicial() == [F(0), F(0), F(1)]  # N^2


def test_indicial_shift(xex_node):
    # I_{conj(L, (0,..,a_n))}(N) = I_L(N + a_n)
    rng = random.Random(12)
    for _ in range(10):
        coeffs = [xex_node.from_scalar(rng.randint(-3, 3)) for _ in range(3)]
        coeffs[-1] = xex_node.from_scalar(rng.randint(1, 3))
        L = LinearOperator(xex_node, coeffs, deriv_index=2)
        an = F(rng.randint(-3, 3))
        shifted = L.conj_mul((F(0), an)).indicial()
        base = L.indicial()
        for N in (F(-2), F(0), F(1), F(5, 2)):
            assert indicial_eval(shifted, N) == indicial_eval(base, N + an)


def test_nu_examples(xex_node):
    L = d2_plus_1(xex_node)
    assert L.nu((F(0), F(1))) == 1
    assert L.nu((F(0), F(0))) == 0


def test_nu_positive_forces_indicial_root(xex_node):
    # a positive nu forces a root of the indicial polynomial
    rng = random.Random(17)
    found = 0
    for _ in range(200):
        coeffs = [
            xex_node.from_scalar(rng.randint(-2, 2)) for _ in range(rng.randint(2, 3))
        ]
        try:
            L = LinearOperator(xex_node, coeffs, deriv_index=2)
        except Exception:
            continue
        an = F(rng.randint(-3, 3))
        try:
            if L.nu((F(0), an)) > 0:
                found += 1
                assert indicial_eval(L.indicial(), an) == 0
        except Exception:
            continue
    assert found >= 5


def test_dsolve_linear_first_terms(xex_node):
    x, _ = atoms(xex_node)
    em2x = xex_node.from_monomial((F(0), F(2)))
    L = d2_plus_1(xex_node)
    f = dsolve_linear(L, (1 - x) * em2x)
    terms = f.terms_upto(F(6))
    assert len(terms) == 1
    assert terms[0][0] == 2 and (terms[0][1] - x.node.basis.node(1).lift(
        x.node.basis.node(1).from_monomial((F(-1), F(0))))).is_zero


def test_dsolve_linear_zero_rhs(xex_node):
    L = d2_plus_1(xex_node)
    f = dsolve_linear(L, xex_node.zero)
    assert f.terms_upto(F(10)) == []
    assert f.try_complete()


def random_operator(node, rng):
    """First/second order operator with vn(L) = 0: nonzero scalar slice
    parts plus positive-valuation tails (the solvable slice pattern)."""
    order = rng.randint(1, 2)
    coeffs = []
    for j in range(order + 1):
        c = node.from_scalar(rng.randint(-3, 3))
        for _ in range(rng.randint(0, 2)):
            # x-polynomial slice data keeps the slice solves finite
            c = c + node.from_monomial(
                (F(-rng.randint(0, 2)), F(rng.randint(1, 2))),
                F(rng.randint(-3, 3)),
            )
        coeffs.append(c)
    if all(c.coefficient_at((F(0), F(0))) == 0 for c in coeffs):
        coeffs[0] = coeffs[0] + rng.randint(1, 3)
    return LinearOperator(node, coeffs, deriv_index=2)


def random_poly_rhs(node, rng):
    g = node.zero
    for _ in range(rng.randint(1, 3)):
        g = g + node.from_monomial(
            (F(-rng.randint(0, 2)), F(rng.randint(1, 3))),
            F(rng.randint(-4, 4)),
        )
    return g


def roundtrip_once(node, L, g, order=12):
    """Check L(L^-1 g) = g exactly through the given expansion order."""
    from transseries.errors import CrystallizationOverflow

    slice_dom = node.slice_node().domain()
    f = dsolve_linear(L, g)
    back = L.to_deriv_index(2).apply_stream(f)
    acc = {}
    for e, c in back.terms_upto(F(order)):
        acc[e] = acc.get(e, slice_dom.zero) + c
    for e, c in g.expand(2).terms_upto(F(order)):
        acc[e] = acc.get(e, slice_dom.zero) - c
    for e, c in acc.items():
        assert c.is_zero, f"mismatch at {e}: {render_element(c)}"
    return f


def test_dsolve_round_trip_randomized():
    # L(L^-1 g) = g to order 12 for random first/second order operators with
    # vn(L) = 0 and random polynomial right-hand sides
    from conftest import make_xex
    from transseries.errors import CrystallizationOverflow

    rng = random.Random(101)
    _, node = make_xex()
    done = 0
    attempts = 0
    while done < 12 and attempts < 80:
        attempts += 1
        try:
            L = random_operator(node, rng)
        except Exception:
            continue
        g = random_poly_rhs(node, rng)
        if g.is_zero:
            continue
        try:
            roundtrip_once(node, L, g)
        except (LinearResonance, CrystallizationOverflow):
            continue
        done += 1
    assert done >= 12


def test_distinguished_property_d2_plus_1(xex_node):
    # indicial root at N = 1: the e^-x coefficient of L^-1 g vanishes for
    # every g supported at exponents >= 2
    rng = random.Random(77)
    L = d2_plus_1(xex_node)
    for _ in range(10):
        g = xex_node.zero
        for _ in range(rng.randint(1, 3)):
            g = g + xex_node.from_monomial(
                (F(-rng.randint(0, 2)), F(rng.randint(2, 4))),
                F(rng.randint(-4, 4)),
            )
        if g.is_zero:
            continue
        f = dsolve_linear(L, g)
        for e, c in f.terms_upto(F(6)):
            if e == 1:
                assert c.is_zero
        assert f.coefficient_at(F(1)) == f.domain.zero or f.coefficient_at(F(1)).is_zero


def test_resonance_raises_and_log_retry_solves():
    b = Transbasis.initial(0)
    node = b.top_node()
    x = node.from_monomial((F(-1),))
    L = LinearOperator(node, [1, 1], deriv_index=1)
    with pytest.raises(LinearResonance):
        s = dsolve_linear(L, x.inverse())
        s.terms_upto(F(2))
    nb, bmap = b.insert_log()
    nnode = nb.top_node()
    L2 = LinearOperator(nnode, [1, 1], deriv_index=2)
    xinv2 = bmap.map_element(x.inverse())
    s = dsolve_linear(L2, nnode.lift(xinv2))
    terms = s.terms_upto(F(2))
    assert terms[0][0] == 1
    logx = nb.node(1).from_monomial((F(-1), F(0)))
    assert (terms[0][1] - logx).is_zero


def test_crystallize_finite_solution(xex_node):
    x, _ = atoms(xex_node)
    em2x = xex_node.from_monomial((F(0), F(2)))
    L = d2_plus_1(xex_node)
    f = dsolve_linear(L, (1 - x) * em2x)
    e = crystallize(f, xex_node)
    assert (e - x * em2x).is_zero
