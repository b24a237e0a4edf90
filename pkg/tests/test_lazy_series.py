import random
from fractions import Fraction

import pytest

from transseries.errors import DivisionByZero, NotInfinitesimal
from transseries.lazy_series import (
    ALL_ZERO_UP_TO_BOUND,
    END,
    FiniteSeries,
    RATIONALS,
    add,
    canonical_decompose,
    cmp_asymptotic,
    inverse,
    invert_one_minus,
    monomial_scale,
    mul,
    neg,
    normalize,
    sub,
    valuation_below,
    valuation_of_nonzero,
    zero_series,
)

F = Fraction


def fs(*pairs):
    return FiniteSeries(RATIONALS, [(F(e), F(c)) for e, c in pairs])


def terms(series, bound):
    return [(e, c) for e, c in series.terms_upto(F(bound)) if c != 0]


# -- brute-force truncated-polynomial oracle ---------------------------------


def poly_mul(a, b, bound):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = ea + eb
            if e <= bound:
                out[e] = out.get(e, F(0)) + ca * cb
    return {e: c for e, c in out.items() if c != 0}


def poly_add(a, b):
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, F(0)) + c
    return {e: c for e, c in out.items() if c != 0}


def poly_inverse(a, bound, grid):
    """Undetermined coefficients on the exponent grid, up to bound."""
    alpha = min(a)
    c = a[alpha]
    shifted = {e - alpha: v / c for e, v in a.items()}
    inv = {}
    for e in sorted(g for g in grid if 0 <= g <= bound):
        acc = F(1) if e == 0 else F(0)
        for eb, cb in shifted.items():
            if eb > 0 and (e - eb) in inv:
                acc -= cb * inv[e - eb]
        if acc != 0 or e == 0:
            inv[e] = acc
    return {e - alpha: v / c for e, v in inv.items() if v != 0}


def series_dict(series, bound):
    return {e: c for e, c in terms(series, bound)}


def test_head_tail_zero_is_end():
    assert zero_series(RATIONALS).head_tail() is END


def test_head_tail_geometric():
    g = fs((1, 1))
    h = invert_one_minus(g)  # 1/(1-z)
    head, tail = h.head_tail()
    assert (head.exponent, head.coeff) == (0, 1)
    head2, _ = tail.head_tail()
    assert (head2.exponent, head2.coeff) == (1, 1)
    assert terms(h, 5) == [(e, F(1)) for e in range(6)]


def test_memoization_identical_prefixes():
    h = invert_one_minus(fs((1, 1)))
    first = h.terms_upto(F(6))
    second = h.terms_upto(F(6))
    assert first == second
    assert h.terms_upto(F(3)) == first[:4]


def test_add_zero_identity():
    f = fs((0, 1), (2, 3))
    assert terms(add(f, zero_series(RATIONALS)), 10) == terms(f, 10)


def test_add_merges_three_way():
    f = fs((0, 1), (1, 2))
    g = fs((1, 5), (3, 1))
    assert terms(add(f, g), 10) == [(0, F(1)), (1, F(7)), (3, F(1))]
    assert terms(sub(f, g), 10) == [(0, F(1)), (1, F(-3)), (3, F(-1))]


def test_monomial_scale():
    f = fs((0, 1), (1, 1))
    assert terms(monomial_scale(F(2), F("1/2"), f), 10) == [
        (F("1/2"), F(2)),
        (F("3/2"), F(2)),
    ]


def test_mul_cancellation():
    f = fs((0, 1), (1, 1))  # 1 + z
    g = fs((0, 1), (1, -1))  # 1 - z
    assert terms(mul(f, g), 10) == [(0, F(1)), (2, F(-1))]


def test_mul_inverse_normalizes_to_one():
    # (1/(1-z)) * (1-z) = 1; the raw stream needs the zero test to stop
    h = mul(invert_one_minus(fs((1, 1))), fs((0, 1), (1, -1)))
    n = normalize(h)
    got = terms(n, 6)
    assert got == [(0, F(1))]
    expect = poly_mul(
        {F(e): F(1) for e in range(8)}, {F(0): F(1), F(1): F(-1)}, F(6)
    )
    assert series_dict(h, 6) == expect


def test_invert_one_minus_requires_infinitesimal():
    with pytest.raises(NotInfinitesimal):
        invert_one_minus(fs((0, 1)))


def test_inverse_monomial():
    inv = inverse(fs((-1, 2)))  # 1/(2 z^-1) = z/2
    assert terms(inv, 5) == [(1, F(1, 2))]


def test_inverse_of_zero_raises():
    with pytest.raises(DivisionByZero):
        inverse(fs())


def test_inverse_rational_exponents_against_oracle():
    # 1/(1 - z - z^(3/2)), support inside N + (3/2)N
    f = {F(0): F(1), F(1): F(-1), F("3/2"): F(-1)}
    grid = sorted(
        {F(i) + F(3, 2) * j for i in range(8) for j in range(6) if F(i) + F(3, 2) * j <= 4}
    )
    expect = poly_inverse(f, F(4), grid)
    inv = inverse(fs((0, 1), (1, -1), ("3/2", -1)))
    assert series_dict(inv, 4) == {e: c for e, c in expect.items() if e <= 4}
    first6 = [t for t in terms(inv, 3)][:6]
    assert first6 == [
        (F(0), F(1)),
        (F(1), F(1)),
        (F("3/2"), F(1)),
        (F(2), F(1)),
        (F("5/2"), F(2)),
        (F(3), F(2)),
    ]


def test_field_axioms_randomized_to_order_10():
    rng = random.Random(42)

    def rand_series():
        n = rng.randint(1, 5)
        exps = rng.sample(range(0, 8), n)
        return fs(*[(e, rng.randint(-4, 4)) for e in exps])

    for _ in range(30):
        f, g, h = rand_series(), rand_series(), rand_series()
        assert series_dict(add(f, g), 10) == series_dict(add(g, f), 10)
        assert series_dict(mul(f, g), 10) == series_dict(mul(g, f), 10)
        assert series_dict(add(add(f, g), h), 10) == series_dict(add(f, add(g, h)), 10)
        assert series_dict(mul(mul(f, g), h), 10) == series_dict(mul(f, mul(g, h)), 10)
        assert series_dict(mul(f, add(g, h)), 10) == series_dict(
            add(mul(f, g), mul(f, h)), 10
        )
    for _ in range(10):
        f = rand_series()
        if not f._terms:
            continue
        prod = normalize(mul(f, inverse(f)))
        assert series_dict(prod, 10) == {F(0): F(1)}


def test_emitted_exponents_lie_in_certificate():
    rng = random.Random(5)
    for _ in range(20):
        f = fs(*[(rng.randint(0, 5), rng.randint(1, 3)) for _ in range(3)])
        g = fs(*[(rng.randint(1, 4), rng.randint(1, 3)) for _ in range(2)])
        for s in (add(f, g), mul(f, g), invert_one_minus(g)):
            pts = set()
            it = s.cert.iter_points()
            for p in it:
                pts.add(p)
                if p > 12:
                    break
            for e, _ in s.terms_upto(F(12)):
                assert e in pts


def test_valuation_queries():
    f = fs((2, 1), (5, 1))
    assert valuation_below(f, 3) == 2
    assert valuation_below(fs((5, 1)), 3) == ALL_ZERO_UP_TO_BOUND
    assert valuation_of_nonzero(f) == 2
    assert valuation_of_nonzero(invert_one_minus(fs((1, 1)))) == 0


def test_canonical_decompose_roundtrip():
    f = fs((-2, 3), (0, -3), (1, 1), (4, 2))
    up, const, down = canonical_decompose(f)
    assert terms(up, 10) == [(-2, F(3))]
    assert const == F(-3)
    assert terms(down, 10) == [(1, F(1)), (4, F(2))]
    total = add(add(up, fs((0, const))), down)
    assert series_dict(total, 10) == series_dict(f, 10)


def test_cmp_asymptotic_scalars():
    assert cmp_asymptotic(fs((1, 2)), fs((1, 1)), "ASYMP")
    assert not cmp_asymptotic(fs((1, 2)), fs((1, 1)), "SIM")
    assert cmp_asymptotic(fs((0, 1), (1, 1)), fs((0, 1)), "SIM")
    assert cmp_asymptotic(fs((2, 1)), fs((1, 1)), "PREC")
    assert cmp_asymptotic(fs((1, 1)), fs((1, 5)), "PRECEQ")
