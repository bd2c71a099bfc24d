from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from wigner1n.analytic import ResolventForm
from wigner1n.series import (
    RationalSeries,
    expand_form,
    format_series,
    general_pieces,
    moments_from_series,
    semicircle_g_series,
    series_reciprocal,
)

u = sp.symbols("u", positive=True)
# w = 1 semicircle resolvent in u = 1/x, the root that vanishes at u = 0
_g = (1 - sp.sqrt(1 - 4 * u ** 2)) / (2 * u)
ORACLE = {
    "G0": _g,
    "GQ": _g ** 3 / (1 - _g ** 2) ** 2,
    "GR_incorrect": -3 * _g ** 5 / (1 - _g ** 2),
    "GR_star": (-2 * _g ** 3 - 2 * _g ** 5) / (1 - _g ** 2),
}


def _sympy_coeffs(expr, order):
    poly = sp.series(expr, u, 0, order + 1).removeO()
    return [Fraction(int(c.p), int(c.q)) for c in (sp.Rational(poly.coeff(u, p)) for p in range(order + 1))]


@pytest.mark.parametrize("tag", sorted(ORACLE))
def test_expansion_matches_symbolic(tag):
    assert list(expand_form(tag, 13).coeffs) == _sympy_coeffs(ORACLE[tag], 13)


def test_general_matches_symbolic():
    a, b = Fraction(3, 7), Fraction(-5, 4)
    expr = ((sp.Rational(3, 7) - 2) * _g ** 3 + sp.Rational(-5, 4) * _g ** 5) / (1 - _g ** 2)
    got = expand_form("GR_general", 11, v2_ratio=a, kappa4_ratio=b)
    assert list(got.coeffs) == _sympy_coeffs(expr, 11)


def test_catalan_coefficients():
    g = semicircle_g_series(15)
    assert [g[p] for p in range(1, 16, 2)] == [1, 1, 2, 5, 14, 42, 132, 429]


def test_known_leading_terms():
    assert list(expand_form("GQ", 7).coeffs[:8]) == [0, 0, 0, 1, 0, 5, 0, 22]
    s = expand_form("GQ", 9) + expand_form("GR_star", 9)
    assert [s[p] for p in (3, 5, 7, 9)] == [-1, -5, -20, -75]
    assert expand_form("GR_incorrect", 9)[5] == -3


@pytest.mark.parametrize("tag", ["G0", "GQ", "GR_incorrect", "GR_star"])
@settings(max_examples=15)
@given(st.integers(2, 20))
def test_truncation_exact(tag, P):
    assert expand_form(tag, P + 4).truncate(P) == expand_form(tag, P)


@pytest.mark.parametrize("tag", ["G0", "GQ", "GR_incorrect", "GR_star"])
def test_even_coefficients_vanish(tag):
    s = expand_form(tag, 16)
    assert all(s[p] == 0 for p in range(0, 17, 2))


def test_general_pieces_reassemble():
    a, b = Fraction(2), Fraction(1, 3)
    pieces = general_pieces(11)
    combined = pieces["base"] + a * pieces["v2"] + b * pieces["kappa4"]
    direct = expand_form("GQ", 11) + expand_form("GR_general", 11, v2_ratio=a, kappa4_ratio=b)
    assert combined == direct


def test_general_reduces_to_star():
    assert expand_form("GR_general", 12, v2_ratio=0, kappa4_ratio=-2) == expand_form("GR_star", 12)


def test_resolvent_form_input():
    f = ResolventForm("GR_general", 2.0, v2=1.0, kappa4=4.0)
    assert expand_form(f, 9) == expand_form("GR_general", 9, v2_ratio=Fraction(1, 4), kappa4_ratio=Fraction(1, 4))


def test_moments_restore_w():
    m = moments_from_series(expand_form("GQ", 9), w=Fraction(3), max_p=8)
    assert m.provenance == "series"
    assert m[2] == 9 and m[4] == 5 * 81 and m[3] == 0


def test_moments_order_guard():
    with pytest.raises(ValueError):
        moments_from_series(expand_form("G0", 5), max_p=5)


fracs = st.builds(Fraction, st.integers(-99, 99), st.integers(1, 50))


@given(st.lists(fracs, min_size=6, max_size=6), st.lists(fracs, min_size=6, max_size=6))
def test_product_commutes(a, b):
    A, B = RationalSeries(a), RationalSeries(b)
    assert A * B == B * A


@given(st.lists(fracs, min_size=8, max_size=8))
def test_reciprocal_inverts(cs):
    if cs[0] == 0:
        cs[0] = Fraction(1)
    A = RationalSeries(cs)
    one = A * series_reciprocal(A)
    assert one.coeffs == (1,) + (0,) * 7


def test_reciprocal_needs_constant_term():
    with pytest.raises(ZeroDivisionError):
        series_reciprocal(RationalSeries([0, 1, 2]))


def test_floats_rejected():
    with pytest.raises(TypeError):
        RationalSeries([0.5, 1])


def test_order_mismatch():
    with pytest.raises(ValueError):
        RationalSeries([1, 2]) + RationalSeries([1, 2, 3])


def test_format():
    assert format_series(expand_form("GQ", 7)) == "1/x^3 + 5/x^5 + 22/x^7 + O(1/x^8)"
    assert format_series(RationalSeries([0, Fraction(-1, 2)])) == "-1/2/x + O(1/x^2)"
