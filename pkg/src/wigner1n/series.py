"""Truncated power series in u = 1/x with exact rational coefficients.

Every resolvent in this package is a rational function of the semicircle
resolvent ``g = w*G0(x)``.  Working at ``w = 1`` and expanding in ``u = 1/x``
gives the moments of the paired density as exact fractions; homogeneity
restores the ``w`` dependence afterwards (``m_p`` carries ``w**p``).

No floating point is used in this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

from .analytic import ResolventForm
from .exact_moments import MomentTable

DEFAULT_ORDER = 12


def _frac(value) -> Fraction:
    if isinstance(value, float):
        raise TypeError(f"float coefficient {value!r} not allowed in exact series")
    if not isinstance(value, (Rational, int, str)):
        raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")
    return Fraction(value)


@dataclass(frozen=True)
class RationalSeries:
    """``sum(coeffs[p] * u**p for p in range(order + 1))``, exact."""

    coeffs: tuple[Fraction, ...]

    def __init__(self, coeffs: Sequence, order: int | None = None):
        cs = [_frac(c) for c in coeffs]
        if order is None:
            order = len(cs) - 1
        if order < 0:
            raise ValueError("order must be nonnegative")
        cs = (cs + [Fraction(0)] * (order + 1))[: order + 1]
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, p: int) -> Fraction:
        return self.coeffs[p]

    def _check(self, other: "RationalSeries") -> None:
        if not isinstance(other, RationalSeries):
            raise TypeError("expected a RationalSeries")
        if other.order != self.order:
            raise ValueError(
                f"truncation orders differ: {self.order} vs {other.order}"
            )

    def __add__(self, other):
        if not isinstance(other, RationalSeries):
            other = constant(other, self.order)
        return series_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return RationalSeries([-c for c in self.coeffs])

    def __sub__(self, other):
        if not isinstance(other, RationalSeries):
            other = constant(other, self.order)
        return series_add(self, -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, RationalSeries):
            return series_mul(self, other)
        k = _frac(other)
        return RationalSeries([k * c for c in self.coeffs])

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return series_reciprocal(self) ** (-n)
        result = constant(1, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __truediv__(self, other):
        if isinstance(other, RationalSeries):
            return self * series_reciprocal(other)
        return self * (1 / _frac(other))

    def truncate(self, order: int) -> "RationalSeries":
        return RationalSeries(self.coeffs, order)

    def __str__(self) -> str:
        return format_series(self)


def constant(c, order: int) -> RationalSeries:
    return RationalSeries([c], order)


def monomial(p: int, order: int, c=1) -> RationalSeries:
    return RationalSeries([0] * p + [c], order)


def series_add(a: RationalSeries, b: RationalSeries) -> RationalSeries:
    a._check(b)
    return RationalSeries([x + y for x, y in zip(a.coeffs, b.coeffs)])


def series_mul(a: RationalSeries, b: RationalSeries) -> RationalSeries:
    a._check(b)
    P = a.order
    out = [Fraction(0)] * (P + 1)
    for i, ai in enumerate(a.coeffs):
        if ai == 0:
            continue
        for j in range(P + 1 - i):
            bj = b.coeffs[j]
            if bj:
                out[i + j] += ai * bj
    return RationalSeries(out)


def series_reciprocal(a: RationalSeries) -> RationalSeries:
    """Multiplicative inverse; needs a nonzero constant term."""
    c0 = a.coeffs[0]
    if c0 == 0:
        raise ZeroDivisionError("reciprocal of a series with zero constant term")
    P = a.order
    inv = [Fraction(0)] * (P + 1)
    inv[0] = 1 / c0
    for n in range(1, P + 1):
        acc = sum((a.coeffs[k] * inv[n - k] for k in range(1, n + 1)), Fraction(0))
        inv[n] = -acc / c0
    return RationalSeries(inv)


def semicircle_g_series(order: int = DEFAULT_ORDER) -> RationalSeries:
    """``w*G0`` at ``w = 1``: Catalan numbers on the odd powers of ``u``.

    Built from the quadratic ``g = u*(1 + g**2)``, which in coefficients is
    the Catalan convolution ``C(k+1) = sum_i C(i)*C(k-i)``.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    cat = [1]
    while 2 * len(cat) - 1 <= order:
        k = len(cat) - 1
        cat.append(sum(cat[i] * cat[k - i] for i in range(k + 1)))
    coeffs = [0] * (order + 1)
    for k, c in enumerate(cat):
        if 2 * k + 1 <= order:
            coeffs[2 * k + 1] = c
    return RationalSeries(coeffs)


def _pieces(order: int):
    g = semicircle_g_series(order)
    one_minus_g2 = 1 - g * g
    inv = series_reciprocal(one_minus_g2)
    return g, inv


def expand_form(
    form: ResolventForm | str,
    order: int = DEFAULT_ORDER,
    v2_ratio=None,
    kappa4_ratio=None,
) -> RationalSeries:
    """Expand a tagged resolvent at ``w = 1`` to order ``u**order``.

    ``form`` is a :class:`ResolventForm` or one of its tags.  For the
    general form the parameters enter as exact ratios ``v2/w**2`` and
    ``kappa4/w**4``.  Float parameters taken from a ResolventForm are
    converted by their exact binary value; pass the ratios explicitly as
    Fractions when the result must be a "nice" rational.
    """
    if isinstance(form, ResolventForm):
        tag = form.tag
        if tag == "GR_general":
            if v2_ratio is None:
                v2_ratio = Fraction(form.v2) / Fraction(form.w) ** 2
            if kappa4_ratio is None:
                kappa4_ratio = Fraction(form.kappa4) / Fraction(form.w) ** 4
    else:
        tag = form
    if order < 1:
        raise ValueError("order must be >= 1")

    g, inv = _pieces(order)
    g3 = g ** 3
    g5 = g3 * g * g
    if tag == "G0":
        return g
    if tag == "GQ":
        return g3 * inv * inv
    if tag == "GR_incorrect":
        return -3 * g5 * inv
    if tag == "GR_star":
        return -2 * g3 * inv - 2 * g5 * inv
    if tag == "GR_general":
        if v2_ratio is None or kappa4_ratio is None:
            raise ValueError("GR_general needs v2_ratio and kappa4_ratio")
        a = _frac(v2_ratio) - 2
        b = _frac(kappa4_ratio)
        return a * (g3 * inv) + b * (g5 * inv)
    raise ValueError(f"unknown resolvent tag {tag!r}")


def general_pieces(order: int = DEFAULT_ORDER) -> dict[str, RationalSeries]:
    """The three parameter-separated parts of ``GQ + GR_general`` at w = 1.

    ``base`` is ``GQ - 2*g**3/(1-g**2)``; ``v2`` multiplies ``v2/w**2``;
    ``kappa4`` multiplies ``kappa4/w**4``.
    """
    g, inv = _pieces(order)
    g3 = g ** 3
    g5 = g3 * g * g
    return {
        "base": g3 * inv * inv - 2 * g3 * inv,
        "v2": g3 * inv,
        "kappa4": g5 * inv,
    }


def moments_from_series(s: RationalSeries, w=1, max_p: int | None = None) -> MomentTable:
    """Read ``m_p = c_{p+1} * w**p`` off a series computed at ``w = 1``."""
    if max_p is None:
        max_p = s.order - 1
    if max_p > s.order - 1:
        raise ValueError(f"max_p={max_p} needs order >= {max_p + 1}")
    wf = w if isinstance(w, float) else _frac(w)
    values = {p: s.coeffs[p + 1] * wf ** p for p in range(max_p + 1)}
    return MomentTable(values, provenance="series")


def format_series(s: RationalSeries, var: str = "x") -> str:
    """Text form ``c1/x + c3/x^3 + ...`` with exact rationals."""
    terms = []
    for p, c in enumerate(s.coeffs):
        if c == 0:
            continue
        if p == 0:
            body = f"{abs(c)}"
        elif p == 1:
            body = f"{abs(c)}/{var}"
        else:
            body = f"{abs(c)}/{var}^{p}"
        sign = "-" if c < 0 else "+"
        terms.append((sign, body))
    if not terms:
        return "0"
    out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out + f" + O(1/{var}^{s.order + 1})"
