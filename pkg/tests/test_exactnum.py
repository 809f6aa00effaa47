import math
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from exactrng.exactnum import (
    DyadicComplement,
    DyadicExp,
    Real,
    UnitInterval,
    dyadic_bracket,
    dyadic_cmp,
    dyadic_leq_ratio,
    format_ratio,
    interval_contains,
    interval_intersects,
    log2_ratio,
    parse_dyadic,
    parse_ratio,
    ratio,
)

fractions01 = st.fractions(min_value=0, max_value=1, max_denominator=10**6)


def iv(a, b):
    return UnitInterval(F(a), F(b))


def test_contains_examples():
    assert interval_contains(iv(0, F(2, 3)), iv(0, F(1, 2)))
    assert not interval_contains(iv(0, F(2, 3)), iv(F(1, 2), F(3, 4)))
    assert interval_contains(iv(F(2, 3), 1), iv(F(3, 4), 1))


def test_intersects_examples():
    assert not interval_intersects(iv(0, F(1, 2)), iv(F(1, 2), 1))
    assert interval_intersects(iv(F(1, 2), F(3, 4)), iv(F(1, 3), F(2, 3)))
    assert not interval_intersects(iv(0, 0), iv(0, 1))


def test_dyadic_leq_examples():
    assert dyadic_leq_ratio(DyadicExp(1), F(1, 2))
    assert not dyadic_leq_ratio(DyadicExp(F(1, 2)), F(1, 2))
    assert dyadic_leq_ratio(DyadicExp(F(3, 2)), F(1, 2))


def test_ratio_rejects_floats_and_bools():
    with pytest.raises(TypeError):
        ratio(0.5)
    with pytest.raises(TypeError):
        ratio(True)
    assert ratio("3/6") == F(1, 2)
    with pytest.raises(ValueError):
        parse_ratio("1/0")
    with pytest.raises(ValueError):
        parse_ratio("a/b")


def test_interval_validation():
    with pytest.raises(ValueError):
        UnitInterval(F(1, 2), F(1, 3))
    with pytest.raises(ValueError):
        UnitInterval(F(0), F(3, 2))


@given(fractions01, fractions01, st.lists(st.integers(0, 20), min_size=1, max_size=6))
def test_split_partitions_exactly(a, b, weights):
    lo, hi = min(a, b), max(a, b)
    if sum(weights) == 0:
        weights[0] = 1
    pmf = [F(w, sum(weights)) for w in weights]
    parent = UnitInterval(lo, hi)
    kids = parent.split(pmf)
    assert kids[0].lo == lo and kids[-1].hi == hi
    assert all(x.hi == y.lo for x, y in zip(kids, kids[1:]))
    assert sum(k.length for k in kids) == parent.length
    for k, kid in enumerate(kids):
        assert kid == parent.child(k, pmf)
        assert parent.contains(kid)


@given(fractions01, fractions01, fractions01, fractions01)
def test_contains_and_intersects_match_definition(a, b, c, d):
    A = UnitInterval(min(a, b), max(a, b))
    B = UnitInterval(min(c, d), max(c, d))
    assert interval_contains(A, B) == (A.lo <= B.lo and B.hi <= A.hi)
    assert interval_intersects(A, B) == (max(A.lo, B.lo) < min(A.hi, B.hi))
    assert interval_intersects(A, B) == interval_intersects(B, A)


@given(st.integers(0, 60), st.fractions(min_value=F(1, 10**9), max_value=1, max_denominator=10**9))
def test_dyadic_cmp_integer_exponents_exact(k, q):
    v = F(1, 2**k)
    assert dyadic_cmp(DyadicExp(k), q) == (v > q) - (v < q)


@given(st.integers(1, 40), st.integers(1, 12), st.fractions(min_value=F(1, 1000), max_value=1, max_denominator=1000))
def test_dyadic_cmp_against_float_when_separated(p, d, q):
    e = F(p, d)
    x = 2.0 ** (-float(e))
    if abs(x - float(q)) > 1e-9 * max(x, float(q)):
        assert dyadic_cmp(DyadicExp(e), q) == (1 if x > float(q) else -1)


def test_dyadic_complement_compare():
    c = DyadicComplement(DyadicExp(1))
    assert c.compare(F(1, 2)) == 0
    assert c.compare(F(1, 3)) == 1
    assert DyadicComplement(DyadicExp(F(1, 2))).compare(F(3, 10)) == -1  # 1 - 0.7071 < 0.3


@given(st.fractions(min_value=0, max_value=50, max_denominator=1000), st.sampled_from([32, 64, 128]))
def test_bracket_encloses(e, bits):
    l, u = dyadic_bracket(DyadicExp(e), bits)
    assert l <= u
    v = DyadicExp(e)
    if l:
        assert dyadic_cmp(v, F(l, 2**bits)) >= 0
    assert dyadic_cmp(v, F(u, 2**bits)) <= 0


def test_parse_and_format():
    assert parse_dyadic("2^-(3/2)") == DyadicExp(F(3, 2))
    assert parse_dyadic("2^-5") == DyadicExp(5)
    assert str(DyadicExp(F(3, 2))) == "2^-(3/2)"
    assert format_ratio(F(4, 2)) == "2"
    assert format_ratio(F(1, 3)) == "1/3"
    assert DyadicExp(3).as_ratio() == F(1, 8)
    with pytest.raises(ValueError):
        DyadicExp(F(1, 2)).as_ratio()
    with pytest.raises(ValueError):
        DyadicExp(-1)


@given(st.floats(-1e6, 1e6), st.floats(0, 1), st.floats(-1e6, 1e6), st.floats(0, 1))
def test_real_arithmetic_encloses(a, ea, b, eb):
    x, y = Real(a, ea), Real(b, eb)
    for da in (-ea, ea):
        for db in (-eb, eb):
            s = (a + da) + (b + db)
            p = (a + da) * (b + db)
            assert (x + y).lo - 1e-9 * abs(s) <= s <= (x + y).hi + 1e-9 * abs(s)
            assert (x * y).lo - 1e-9 * abs(p) <= p <= (x * y).hi + 1e-9 * abs(p)


def test_real_division_guard():
    with pytest.raises(ZeroDivisionError):
        Real(1.0) / Real(0.0, 0.1)
    q = Real(1.0, 0.01) / Real(2.0, 0.01)
    assert q.lo <= 0.99 / 2.01 and 1.01 / 1.99 <= q.hi


def test_log2_ratio_huge():
    assert log2_ratio(F(1, 2**5000)) == -5000
    assert math.isclose(log2_ratio(F(3 ** 900, 2 ** 1500)), 900 * math.log2(3) - 1500, rel_tol=1e-12)
