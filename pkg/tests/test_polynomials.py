from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from quasiline_ising import polynomials as poly

coeffs = st.lists(st.integers(0, 2 ** 80), min_size=1, max_size=12)


def naive_mul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return poly.trim(out)


@given(coeffs, coeffs)
def test_kronecker_product_matches_schoolbook(p, q):
    assert poly.mul(p, q) == naive_mul(p, q)


@given(coeffs, st.integers(1, 200))
def test_pack_roundtrip(p, extra):
    bits = max(c.bit_length() for c in p) + extra
    assert poly.trim(poly.unpack(poly.pack(p, bits), bits)) == poly.trim(p)


@given(coeffs, st.fractions(min_value=0, max_value=10))
def test_evaluate_matches_power_sum(p, x):
    assert poly.evaluate(p, x) == sum(c * x ** k for k, c in enumerate(p))


def test_degrees_and_dominance():
    p = [0, 0, 3, 0, 5, 0]
    assert poly.degree(p) == 4 and poly.lowest_degree(p) == 2
    assert poly.degree([0]) == -1
    assert poly.dominated_by_monomial(p, 8, 4)
    assert not poly.dominated_by_monomial(p, 7, 4)
    assert not poly.dominated_by_monomial(p, 8, Fraction(7, 2))
    assert poly.dominates_monomial(p, 5, 4) and not poly.dominates_monomial(p, 1, 3)
