"""Closed-form limiting densities, their 1/N corrections and resolvents.

A :class:`SpectralMeasure` is a signed measure supported on ``[-2w, 2w]``:
point atoms at the edges plus a continuous part.  All continuous parts used
here become ``h(t) / sqrt(1 - t**2)`` after ``lambda = 2*w*t``, with ``h``
smooth, so integrals against polynomials reduce to Gauss-Chebyshev sums.
For polynomial ``h`` these sums are exact once the node count exceeds
half the total degree.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "OutOfDomainError",
    "SpectralMeasure",
    "ResolventForm",
    "chebyshev_T",
    "gauss_chebyshev",
    "make_density",
    "measure_moment",
    "integrate_against",
    "resolvent_eval",
    "stieltjes_of_measure",
    "density_curve",
    "write_density_csv",
    "write_atoms_csv",
]

DEFAULT_NODES = 256
R_INCORRECT_NODES = 2048
MAX_NODES = 1 << 16

DENSITY_KINDS = ("W0", "Q", "R_incorrect", "R_star", "R_general")
RESOLVENT_TAGS = ("G0", "GQ", "GR_incorrect", "GR_star", "GR_general")


class OutOfDomainError(ValueError):
    """Evaluation point on or too close to the support [-2w, 2w]."""


def chebyshev_T(n: int, x):
    """First-kind Chebyshev polynomial by the three-term recurrence."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    t_prev, t = np.ones_like(x, dtype=float) if np.ndim(x) else 1.0, x
    if n == 0:
        return t_prev
    for _ in range(n - 1):
        t_prev, t = t, 2 * x * t - t_prev
    return t


@lru_cache(maxsize=64)
def _half_nodes(n: int) -> np.ndarray:
    # positive half of cos((2i-1)pi/2n); the rest is the exact mirror image
    i = np.arange(1, n // 2 + 1)
    return np.cos((2 * i - 1) * np.pi / (2 * n))


def gauss_chebyshev(n: int) -> tuple[np.ndarray, float]:
    """Nodes and common weight for ``int_{-1}^{1} f(t)/sqrt(1-t^2) dt``.

    ``n`` is rounded up to an even number so the node set is exactly
    symmetric about 0; odd integrands then sum to exactly zero.
    """
    if n < 1:
        raise ValueError("need at least one node")
    n += n % 2
    half = _half_nodes(n)
    return np.concatenate([half, -half]), math.pi / n


@dataclass(frozen=True)
class SpectralMeasure:
    """Signed measure on ``[-2w, 2w]``.

    Continuous part, with ``t = lambda/(2w)``:

    * ``semicircle``: ``semicircle * sqrt(4w^2 - lambda^2)``
    * ``cheb``: ``sum(c_n T_n(t)) / sqrt(1 - t^2)``
    * ``pointwise``: extra density given directly as a function of lambda,
      integrated through ``pointwise(2wt) * sqrt(1 - t^2)`` with
      ``nodes`` Gauss-Chebyshev points.
    """

    w: float
    atoms: tuple[tuple[float, float], ...] = ()
    semicircle: float = 0.0
    cheb: tuple[float, ...] = ()
    pointwise: tuple[Callable, ...] = ()
    nodes: int = DEFAULT_NODES
    label: str = ""

    def __post_init__(self):
        if not self.w > 0:
            raise ValueError("w must be positive")

    def __add__(self, other: "SpectralMeasure") -> "SpectralMeasure":
        if self.w != other.w:
            raise ValueError("cannot add measures with different w")
        atoms: dict[float, float] = {}
        for loc, mass in self.atoms + other.atoms:
            atoms[loc] = atoms.get(loc, 0.0) + mass
        n = max(len(self.cheb), len(other.cheb))
        cheb = tuple(
            (self.cheb[i] if i < len(self.cheb) else 0.0)
            + (other.cheb[i] if i < len(other.cheb) else 0.0)
            for i in range(n)
        )
        return SpectralMeasure(
            self.w,
            tuple(sorted(atoms.items())),
            self.semicircle + other.semicircle,
            cheb,
            self.pointwise + other.pointwise,
            max(self.nodes, other.nodes),
            f"{self.label}+{other.label}",
        )

    def regular(self, t: np.ndarray) -> np.ndarray:
        """``density(2wt) * sqrt(1 - t^2)`` on the open interval."""
        t = np.asarray(t, dtype=float)
        h = np.zeros_like(t)
        if self.semicircle:
            h = h + self.semicircle * 2 * self.w * (1 - t * t)
        for n, c in enumerate(self.cheb):
            if c:
                h = h + c * chebyshev_T(n, t)
        for f in self.pointwise:
            h = h + f(2 * self.w * t) * np.sqrt(1 - t * t)
        return h

    def density(self, lam) -> np.ndarray:
        """Continuous part at ``lam``; zero on and outside the edges."""
        lam = np.asarray(lam, dtype=float)
        t = lam / (2 * self.w)
        inside = np.abs(t) < 1
        out = np.zeros_like(t)
        ti = t[inside]
        out[inside] = self.regular(ti) / np.sqrt(1 - ti * ti)
        return out

    def total_mass(self) -> float:
        return measure_moment(self, 0)


@dataclass(frozen=True)
class ResolventForm:
    tag: str
    w: float
    v2: float = 0.0
    kappa4: float = 0.0

    def __post_init__(self):
        if self.tag not in RESOLVENT_TAGS:
            raise ValueError(f"unknown resolvent tag {self.tag!r}")
        if not self.w > 0:
            raise ValueError("w must be positive")

    def __call__(self, x):
        return resolvent_eval(self, x)


def _r_incorrect_density(w: float) -> Callable:
    def rho(lam):
        lam = np.asarray(lam, dtype=float)
        w2 = w * w
        gap = 4 * w2 - lam * lam
        inside = gap > 0
        out = np.zeros_like(lam)
        l2 = lam[inside] ** 2
        g = gap[inside]
        bracket = (3 * l2 - 2 * w2) - 2 * l2 * (l2 - 2 * w2) / g
        out[inside] = 3 / (8 * math.pi) * np.sqrt(g) / w2 ** 2 * bracket
        return out

    return rho


def make_density(kind: str, w: float, v2: float | None = None, kappa4: float | None = None) -> SpectralMeasure:
    """Construct one of the limiting or correction densities.

    ``W0``          semicircle
    ``Q``           GOE 1/N correction (edge atoms plus inverse square root)
    ``R_incorrect`` an inconsistent form of the sign-ensemble correction,
                    kept for reproducing the mismatch with its resolvent
    ``R_star``      corrected sign-ensemble term
    ``R_general``   corrected term for diagonal variance ``v2`` and
                    off-diagonal fourth cumulant ``kappa4``
    """
    if not (w > 0 and math.isfinite(w)):
        raise ValueError("w must be a positive finite number")
    norm = 1 / (2 * math.pi * w)
    if kind == "W0":
        return SpectralMeasure(w, semicircle=1 / (2 * math.pi * w * w), label="W0")
    if kind == "Q":
        return SpectralMeasure(
            w,
            atoms=((-2 * w, 0.25), (2 * w, 0.25)),
            cheb=(-1 / (4 * math.pi * w),),
            label="Q",
        )
    if kind == "R_star":
        return SpectralMeasure(w, cheb=(0.0, 0.0, -2 * norm, 0.0, -2 * norm), label="R_star")
    if kind == "R_general":
        if v2 is None or kappa4 is None:
            raise ValueError("R_general needs v2 and kappa4")
        return SpectralMeasure(
            w,
            cheb=(0.0, 0.0, (v2 / w ** 2 - 2) * norm, 0.0, (kappa4 / w ** 4) * norm),
            label="R_general",
        )
    if kind == "R_incorrect":
        return SpectralMeasure(
            w, pointwise=(_r_incorrect_density(w),), nodes=R_INCORRECT_NODES, label="R_incorrect"
        )
    raise ValueError(f"unknown density kind {kind!r}")


def _integrate(m: SpectralMeasure, phi: Callable, nodes: int) -> float:
    t, weight = gauss_chebyshev(nodes)
    half = len(t) // 2
    vals = m.regular(t) * phi(2 * m.w * t)
    # pair +t with -t before summing so odd integrands cancel exactly
    cont = 2 * m.w * weight * float(np.sum(vals[:half] + vals[half:]))
    return float(cont + sum(mass * phi(np.float64(loc)) for loc, mass in m.atoms))


def measure_moment(m: SpectralMeasure, k: int, nodes: int | None = None) -> float:
    """``int lambda**k dm``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > 16:
        raise ValueError("moments above order 16 are not supported")
    n = max(nodes or m.nodes, k + 8)
    # |lam|**k with the sign restored keeps odd powers exactly antisymmetric
    sign = -1.0 if k % 2 else 1.0
    return _integrate(m, lambda lam: np.where(lam < 0, sign, 1.0) * np.abs(lam) ** k, n)


def integrate_against(m: SpectralMeasure, poly_coeffs: Sequence[float]) -> float:
    """``int phi dm`` for ``phi(lambda) = sum(poly_coeffs[j] * lambda**j)``."""
    if len(poly_coeffs) > 17:
        raise ValueError("polynomial degree above 16 is not supported")
    return sum(c * measure_moment(m, j) for j, c in enumerate(poly_coeffs) if c)


def _semicircle_g(x: float, w: float) -> float:
    # 2/(x + sqrt(x^2 - 4w^2)) == (x - sqrt(x^2 - 4w^2))/(2w^2) without cancellation
    return 2 * w / (x + math.sqrt(x * x - 4 * w * w))


def resolvent_eval(f: ResolventForm, x: float) -> float:
    """Real resolvent for ``x > 2w``."""
    w = f.w
    if not x > 2 * w:
        raise OutOfDomainError(f"x={x} is not to the right of the support edge {2 * w}")
    g = _semicircle_g(x, w)
    if f.tag == "G0":
        return g / w
    g2 = g * g
    g3 = g2 * g
    g5 = g3 * g2
    den = w * (1 - g2)
    if f.tag == "GQ":
        return g3 / (den * (1 - g2))
    if f.tag == "GR_incorrect":
        return -3 * g5 / den
    if f.tag == "GR_star":
        return (-2 * g3 - 2 * g5) / den
    return ((f.v2 / w ** 2 - 2) * g3 + (f.kappa4 / w ** 4) * g5) / den


def _stieltjes_nodes(x: float, w: float, base: int) -> int:
    # h/(x - 2wt) is analytic inside the Bernstein ellipse through x/2w, so
    # the Gauss-Chebyshev error decays like r**(-2n)
    z = x / (2 * w)
    r = z + math.sqrt(z * z - 1)
    need = math.ceil(40 / (2 * math.log(r))) + 16
    return min(max(base, need), MAX_NODES)


def stieltjes_of_measure(m: SpectralMeasure, x: float, margin: float = 1e-3) -> float:
    """``int dm(lambda) / (x - lambda)`` for ``x > 2w + margin``."""
    if not x > 2 * m.w + margin:
        raise OutOfDomainError(f"x={x} is within {margin} of the support [-{2 * m.w}, {2 * m.w}]")
    n = _stieltjes_nodes(x, m.w, m.nodes)
    return _integrate(m, lambda lam: 1 / (x - lam), n)


def density_curve(w: float, points: int = 401, v2: float | None = None, kappa4: float | None = None):
    """Uniform grid over ``[-2w, 2w]`` with the continuous densities.

    Returns ``(columns, rows)``.  The general column needs both ``v2`` and
    ``kappa4``; it defaults to the sign-ensemble values.
    """
    if points < 2:
        raise ValueError("need at least two grid points")
    if v2 is None:
        v2 = 0.0
    if kappa4 is None:
        kappa4 = -2 * w ** 4
    lam = np.linspace(-2 * w, 2 * w, points)
    cols = {
        "lambda": lam,
        "rho_w0": make_density("W0", w).density(lam),
        "rho_q_cont": make_density("Q", w).density(lam),
        "rho_r_star": make_density("R_star", w).density(lam),
        "rho_r_general": make_density("R_general", w, v2, kappa4).density(lam),
    }
    names = list(cols)
    rows = list(zip(*(cols[k] for k in names)))
    return names, rows


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_density_csv(path, w: float, points: int = 401, v2=None, kappa4=None) -> None:
    names, rows = density_curve(w, points, v2, kappa4)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_atoms_csv(path, m: SpectralMeasure) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["location", "mass"])
        for loc, mass in m.atoms:
            writer.writerow([_fmt(loc), _fmt(mass)])
