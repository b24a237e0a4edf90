import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transseries.errors import EnumerationUnbounded, NotInfinitesimal, StructuralError
from transseries.order_core import (
    BIG_O,
    EQ,
    GT,
    GridCertificate,
    INFINITY,
    LITTLE_O,
    LT,
    NEITHER,
    cert_combine,
    compare_antilex,
    flat_compare,
    real_root_upper_bound,
    vec,
)


def antilex_oracle(a, b):
    """Brute-force oracle: lexicographic order on reversed tuples."""
    ra, rb = tuple(reversed(a)), tuple(reversed(b))
    if ra == rb:
        return EQ
    return LT if ra < rb else GT


def test_compare_antilex_examples():
    assert compare_antilex(vec(2, 0), vec(1, 1)) == LT
    assert compare_antilex(vec(3, 5), vec(3, 5)) == EQ
    # last differing coordinate is the 2nd: 1 > 0
    assert compare_antilex(vec(-1, 1, 0), vec(0, 0, 0)) == GT
    assert compare_antilex(vec(-1, 1, 0), vec(0, 0, 0)) == antilex_oracle(
        vec(-1, 1, 0), vec(0, 0, 0)
    )


def test_compare_antilex_length_mismatch():
    with pytest.raises(StructuralError):
        compare_antilex(vec(1), vec(1, 2))


def test_antilex_total_order_randomized():
    rng = random.Random(7)
    vecs = [
        vec(*(Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(3)))
        for _ in range(120)
    ]
    for a in vecs:
        for b in vecs:
            c = compare_antilex(a, b)
            assert c == antilex_oracle(a, b)
            assert compare_antilex(b, a) == -c
    # transitivity on sampled triples
    for _ in range(400):
        a, b, c = rng.sample(vecs, 3)
        if compare_antilex(a, b) != GT and compare_antilex(b, c) != GT:
            assert compare_antilex(a, c) != GT


_fracs = st.fractions(min_value=-8, max_value=8, max_denominator=4)
_vec3 = st.tuples(_fracs, _fracs, _fracs)


@given(_vec3, _vec3, _vec3)
@settings(max_examples=200)
def test_antilex_matches_oracle_and_is_transitive(a, b, c):
    assert compare_antilex(a, b) == antilex_oracle(a, b)
    assert compare_antilex(a, b) == -compare_antilex(b, a)
    if compare_antilex(a, b) != GT and compare_antilex(b, c) != GT:
        assert compare_antilex(a, c) != GT


@given(
    st.lists(st.fractions(min_value=0, max_value=6, max_denominator=3), min_size=1, max_size=8),
)
@settings(max_examples=100)
def test_finite_point_certificate_covers_its_points(points):
    cert = GridCertificate.from_points(points)
    top = max(points)
    got = set(cert.enumerate_below(top))
    for p in points:
        assert p in got


def test_cert_union_example():
    c1 = GridCertificate([vec(1, 0)], vec(0, 0))
    c2 = GridCertificate([vec(0, 1)], vec(0, 0))
    u = cert_combine(c1, c2, "UNION")
    assert set(u.generators) == {vec(1, 0), vec(0, 1)}
    assert u.offset == vec(0, 0)


def test_cert_union_keeps_both_offsets_certified():
    c1 = GridCertificate([], vec(0, 1))
    c2 = GridCertificate([], vec(1, 0))
    u = cert_combine(c1, c2, "UNION")
    pts = u.enumerate_below(vec(0, 1))
    assert vec(1, 0) in pts and vec(0, 1) in pts


def test_cert_minkowski_example():
    c = GridCertificate([vec(1, 0)], vec(-1, 0))
    m = cert_combine(c, c, "MINKOWSKI")
    assert set(m.generators) == {vec(1, 0)}
    assert m.offset == vec(-2, 0)


def test_cert_star_example():
    c = GridCertificate([vec(1, 0)], vec(0, 1))
    s = cert_combine(c, None, "STAR")
    assert set(s.generators) == {vec(1, 0), vec(0, 1)}
    assert s.offset == vec(0, 0)


def test_cert_star_supports_geometric_inverse():
    # supp 1/(1 - z2(1+z1)) lies inside N*supp(g) for g = z2 + z1 z2:
    # brute-force expansion of the geometric series to 5 levels.
    g = {(0, 1): Fraction(1), (1, 1): Fraction(1)}
    acc = {(0, 0): Fraction(1)}
    power = {(0, 0): Fraction(1)}
    for _ in range(5):
        nxt = {}
        for (a1, a2), ca in power.items():
            for (b1, b2), cb in g.items():
                k = (a1 + b1, a2 + b2)
                nxt[k] = nxt.get(k, Fraction(0)) + ca * cb
        power = nxt
        for k, v in power.items():
            acc[k] = acc.get(k, Fraction(0)) + v
    cert = GridCertificate([vec(1, 0)], vec(0, 1)).star()
    # the certified set is exactly N*(1,0) + N*(0,1) + (0,0) = N^2 here
    assert set(cert.generators) == {vec(1, 0), vec(0, 1)}
    assert cert.offset == vec(0, 0)
    for (a1, a2), cval in acc.items():
        if cval != 0:
            assert a1 >= 0 and a2 >= 0


def test_star_requires_positive_offset():
    with pytest.raises(NotInfinitesimal):
        GridCertificate([vec(1, 0)], vec(0, 0)).star()


def brute_enumerate(gens, offset, bound, depth=30):
    pts = set()

    def rec(p, i):
        if p > bound:
            return
        pts.add(p)
        for j in range(i, len(gens)):
            rec(p + gens[j], j)

    rec(offset, 0)
    return sorted(pts)


def test_enumerate_below_scalar_examples():
    c = GridCertificate([Fraction(1)], Fraction(0))
    assert c.enumerate_below(Fraction(3)) == [0, 1, 2, 3]
    c = GridCertificate([Fraction(1)], Fraction(5))
    assert c.enumerate_below(Fraction(3)) == []
    c = GridCertificate([Fraction(2), Fraction(3)], Fraction(0))
    assert c.enumerate_below(Fraction(7)) == [0, 2, 3, 4, 5, 6, 7]
    assert c.enumerate_below(Fraction(7)) == brute_enumerate(
        [Fraction(2), Fraction(3)], Fraction(0), Fraction(7)
    )


def test_enumerate_below_scalar_randomized():
    rng = random.Random(3)
    for _ in range(40):
        gens = sorted(
            {Fraction(rng.randint(1, 5), rng.randint(1, 3)) for _ in range(rng.randint(1, 3))}
        )
        off = Fraction(rng.randint(-4, 4), rng.randint(1, 2))
        bound = off + Fraction(rng.randint(0, 12), 2)
        c = GridCertificate(gens, off)
        assert c.enumerate_below(bound) == brute_enumerate(gens, off, bound)


def test_enumerate_below_vector_finite():
    # only top-level generators: every bounded query is finite
    c = GridCertificate([vec(0, 1), vec(-1, 1)], vec(-1, 2))
    got = c.enumerate_below(vec(5, 3))
    assert set(got) == {vec(-1, 2), vec(-2, 3), vec(-1, 3)}
    for p in got:
        assert compare_antilex(p, vec(5, 3)) != GT


def test_enumerate_below_vector_freely_roaming_lower_level_raises():
    c = GridCertificate([vec(1, 0), vec(0, 1)], vec(-3, -2))
    with pytest.raises(EnumerationUnbounded):
        c.enumerate_below(vec(0, 0))


def test_enumerate_below_vector_unbounded_raises():
    c = GridCertificate([vec(-1, 1), vec(1, 0)], vec(-1, 1))
    with pytest.raises(EnumerationUnbounded):
        c.enumerate_below(vec(5, 2))


def test_iter_points_increasing():
    c = GridCertificate([Fraction(2), Fraction(3)], Fraction(-1))
    it = c.iter_points()
    pts = [next(it) for _ in range(8)]
    assert pts == sorted(pts)
    assert pts[0] == Fraction(-1)


def test_flat_compare_examples():
    assert flat_compare(vec(1, 0), vec(0, 1)) == LITTLE_O
    assert flat_compare(vec(2, 0), vec(1, 0)) == BIG_O
    assert flat_compare(INFINITY, vec(1, 0)) == NEITHER
    assert flat_compare(vec(0, 1), vec(1, 0)) == NEITHER
    assert flat_compare(vec(0, 0), vec(1, 0)) == LITTLE_O


def test_real_root_upper_bound_examples():
    # p(N) = N
    assert real_root_upper_bound([0, 1]) == 1
    # p(N) = 1 - N, root 1
    assert real_root_upper_bound([1, -1]) == 2
    # p(N) = N^2 + 1, no real roots
    assert real_root_upper_bound([1, 0, 1]) == 2
    with pytest.raises(StructuralError):
        real_root_upper_bound([0, 0])


def test_real_root_upper_bound_dominates_known_roots():
    rng = random.Random(11)
    for _ in range(60):
        roots = [Fraction(rng.randint(-8, 8), rng.randint(1, 3)) for _ in range(rng.randint(1, 4))]
        # expand prod (N - r)
        poly = [Fraction(1)]
        for r in roots:
            poly = [Fraction(0)] + poly
            for i in range(len(poly) - 1):
                poly[i] -= r * poly[i + 1]
        b = real_root_upper_bound(poly)
        assert all(b >= r for r in roots)
