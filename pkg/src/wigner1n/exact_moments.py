"""Exact expected traces ``<Tr X^p>`` of Wigner matrices.

Two independent routes:

* closed forms, polynomial in N, for zero-diagonal matrices (p <= 8) and for
  matrices with a distinct diagonal law (p <= 6);
* a closed-walk enumeration over all index cycles ``(i_1, ..., i_p)`` that
  uses nothing but independence and evenness of the entries.

Everything is exact rational arithmetic.
"""

from __future__ import annotations

import csv
import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

__all__ = [
    "MomentSequence",
    "MomentTable",
    "UnsupportedPowerError",
    "EnumerationBudgetError",
    "cicuta_trace_J",
    "general_trace_S",
    "brute_force_trace",
    "walk_signatures",
    "subleading_coefficients",
    "write_trace_table",
]

ENUMERATION_BUDGET = 2 * 10 ** 7


class UnsupportedPowerError(ValueError):
    """No closed form is available for this power."""


class EnumerationBudgetError(ValueError):
    """N**p index cycles is more than the enumeration guard allows."""


class MomentSequence:
    """Even moments ``<x^p>`` of an even entry distribution.

    Odd moments are zero and ``<x^0> = 1``.  Missing even orders raise
    ``KeyError`` so that a formula never silently uses an unset moment.
    """

    def __init__(self, values: Mapping[int, object]):
        vals = {}
        for p, v in values.items():
            if p % 2:
                if v:
                    raise ValueError("odd moments of an even law must vanish")
                continue
            vals[int(p)] = Fraction(v)
        vals[0] = Fraction(1)
        self.values = vals

    def __getitem__(self, p: int) -> Fraction:
        if p % 2:
            return Fraction(0)
        return self.values[p]

    def __repr__(self):
        body = ", ".join(f"{p}: {v}" for p, v in sorted(self.values.items()) if p)
        return f"MomentSequence({{{body}}})"

    def __eq__(self, other):
        return isinstance(other, MomentSequence) and self.values == other.values

    @classmethod
    def zero(cls, max_p: int = 8) -> "MomentSequence":
        return cls({p: 0 for p in range(2, max_p + 1, 2)})

    @classmethod
    def sign(cls, w=1, max_p: int = 8) -> "MomentSequence":
        w = Fraction(w)
        return cls({p: w ** p for p in range(2, max_p + 1, 2)})

    @classmethod
    def from_distribution(cls, dist, max_p: int = 8) -> "MomentSequence":
        from .ensembles import moment

        return cls({p: Fraction(moment(dist, p)) for p in range(2, max_p + 1, 2)})


@dataclass
class MomentTable:
    """Moments indexed by order, tagged with the route that produced them."""

    values: dict = field(default_factory=dict)
    provenance: str = "closed_form"

    PROVENANCES = ("closed_form", "brute_force", "series", "quadrature", "monte_carlo")

    def __post_init__(self):
        if self.provenance not in self.PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def __getitem__(self, p):
        return self.values[p]

    def __len__(self):
        return len(self.values)


def cicuta_trace_J(N: int, p: int, offdiag: MomentSequence) -> Fraction:
    """``<Tr J^p>`` for a zero-diagonal matrix with off-diagonal moments."""
    if N < 1:
        raise ValueError("N must be >= 1")
    m = offdiag
    N = Fraction(N)
    a = N * (N - 1)
    b = a * (N - 2)
    if p % 2 == 1 and 1 <= p <= 8:
        return Fraction(0)
    if p == 2:
        return a * m[2]
    if p == 4:
        return a * m[4] + 2 * b * m[2] ** 2
    if p == 6:
        return a * m[6] + 6 * b * m[4] * m[2] + b * (5 * N - 11) * m[2] ** 3
    if p == 8:
        return (
            a * m[8]
            + b * (8 * m[6] * m[2] + 6 * m[4] ** 2)
            + 28 * a * (N - 2) ** 2 * m[4] * m[2] ** 2
            + b * (N - 3) * (14 * N - 19) * m[2] ** 4
        )
    raise UnsupportedPowerError(f"no closed form for p={p}; supported: 1..8")


def general_trace_S(N: int, p: int, offdiag: MomentSequence, diag: MomentSequence) -> Fraction:
    """``<Tr S^p>`` with off-diagonal moments ``offdiag`` and diagonal ``diag``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    w, v = offdiag, diag
    N = Fraction(N)
    if p % 2 == 1 and 1 <= p <= 6:
        return Fraction(0)
    if p == 2:
        return N ** 2 * w[2] + N * (v[2] - w[2])
    if p == 4:
        return (
            2 * N ** 3 * w[2] ** 2
            + N ** 2 * (4 * w[2] * v[2] + w[4] - 6 * w[2] ** 2)
            + N * (v[4] - w[4] - 4 * w[2] * v[2] + 4 * w[2] ** 2)
        )
    if p == 6:
        return (
            5 * N ** 4 * w[2] ** 3
            + N ** 3 * (15 * w[2] ** 2 * v[2] + 6 * w[2] * w[4] - 26 * w[2] ** 3)
            + N ** 2 * (
                6 * w[2] * v[4]
                + 3 * w[2] * v[2] ** 2
                + 9 * w[4] * v[2]
                - 45 * w[2] ** 2 * v[2]
                + w[6]
                - 18 * w[2] * w[4]
                + 43 * w[2] ** 3
            )
            + N * (
                v[6]
                - 6 * w[2] * v[4]
                - 3 * w[2] * v[2] ** 2
                - 9 * w[4] * v[2]
                + 30 * w[2] ** 2 * v[2]
                - w[6]
                + 12 * w[2] * w[4]
                - 22 * w[2] ** 3
            )
        )
    raise UnsupportedPowerError(f"no closed form for p={p}; supported: 1..6")


@lru_cache(maxsize=None)
def walk_signatures(N: int, p: int) -> dict:
    """Count index cycles of length ``p`` on ``N`` labels by their
    entry-multiplicity signature.

    A signature is a sorted tuple of ``(is_diagonal, multiplicity)``, one per
    distinct matrix entry the cycle visits.  Cycles visiting any entry an odd
    number of times have zero expectation and are dropped.
    """
    if N < 1 or p < 1:
        raise ValueError("need N >= 1 and p >= 1")
    if N ** p > ENUMERATION_BUDGET:
        raise EnumerationBudgetError(f"N**p = {N ** p} exceeds {ENUMERATION_BUDGET}")
    counts: Counter = Counter()
    for cycle in itertools.product(range(N), repeat=p):
        hits = Counter()
        prev = cycle[-1]
        for cur in cycle:
            hits[(prev, cur) if prev <= cur else (cur, prev)] += 1
            prev = cur
        if any(k % 2 for k in hits.values()):
            continue
        sig = tuple(sorted((a == b, k) for (a, b), k in hits.items()))
        counts[sig] += 1
    return dict(counts)


def brute_force_trace(
    N: int, p: int, offdiag: MomentSequence, diag: MomentSequence | None = None
) -> Fraction:
    """``E[Tr X^p]`` by summing over every index cycle.

    Each cycle contributes the product, over the distinct entries it visits,
    of the entry law's moment of order equal to the visit count.
    """
    if diag is None:
        diag = MomentSequence.zero(p)
    total = Fraction(0)
    for sig, count in walk_signatures(N, p).items():
        term = Fraction(count)
        for is_diag, k in sig:
            term *= diag[k] if is_diag else offdiag[k]
            if not term:
                break
        total += term
    return total


def subleading_coefficients(p: int, w2, v2, kappa4) -> tuple[Fraction, Fraction]:
    """Coefficients of ``N^(p/2+1)`` and ``N^(p/2)`` in ``<Tr S^p>``.

    Inputs are taken as exact rationals (ints, Fractions or decimal strings).
    """
    w2, v2, k4 = Fraction(w2), Fraction(v2), Fraction(kappa4)
    if p == 2:
        return w2, v2 - w2
    if p == 4:
        return 2 * w2 ** 2, 4 * w2 * v2 + k4 - 3 * w2 ** 2
    if p == 6:
        return 5 * w2 ** 3, 15 * w2 ** 2 * v2 + 6 * w2 * k4 - 8 * w2 ** 3
    raise UnsupportedPowerError(f"subleading coefficients known for p in (2, 4, 6), not {p}")


def write_trace_table(path, rows) -> None:
    """CSV of ``(N, p, closed_form, brute_force, equal)`` rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["N", "p", "closed_form", "brute_force", "equal"])
        for N, p, closed, brute in rows:
            writer.writerow([N, p, str(closed), str(brute), str(closed == brute).lower()])
