"""Random real symmetric matrix ensembles.

An ensemble is a pair of even entry distributions: one for the diagonal and
one for the strictly upper triangle.  Four even distribution kinds are
supported, all with closed-form moments:

* ``Zero``: the point mass at 0.
* ``Sign(w)``: +w or -w with probability 1/2 each.
* ``Gaussian(sigma)``: centred normal.
* ``ThreePoint(a, p)``: +a, -a with probability p each, 0 otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "DistributionSpec",
    "EnsembleSpec",
    "InvalidParameterError",
    "InfeasibleCumulantError",
    "moment",
    "make_sign_ensemble",
    "make_goe",
    "make_general_ensemble",
    "sample_matrix",
    "sample_generator",
]

KINDS = ("zero", "sign", "gaussian", "three_point")


class InvalidParameterError(ValueError):
    """A distribution or ensemble parameter is out of range."""


class InfeasibleCumulantError(InvalidParameterError):
    """No even three-point distribution has the requested (w2, kappa4)."""


def _double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


@dataclass(frozen=True)
class DistributionSpec:
    kind: str
    scale: float = 0.0
    prob: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(f"unknown distribution kind {self.kind!r}")
        if self.kind in ("sign", "gaussian", "three_point") and not self.scale > 0:
            raise InvalidParameterError(f"{self.kind} needs a positive scale")
        if self.kind == "three_point" and not 0 < self.prob <= 0.5:
            raise InvalidParameterError("three_point needs 0 < prob <= 1/2")

    @classmethod
    def zero(cls) -> "DistributionSpec":
        return cls("zero")

    @classmethod
    def sign(cls, w: float) -> "DistributionSpec":
        return cls("sign", w)

    @classmethod
    def gaussian(cls, sigma: float) -> "DistributionSpec":
        return cls("gaussian", sigma)

    @classmethod
    def three_point(cls, a: float, p: float) -> "DistributionSpec":
        return cls("three_point", a, p)

    def moment(self, p: int) -> float:
        return moment(self, p)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros(size)
        if self.kind == "sign":
            bits = rng.integers(0, 2, size=size, dtype=np.int8)
            return self.scale * (2.0 * bits - 1.0)
        if self.kind == "gaussian":
            return self.scale * rng.standard_normal(size)
        # one uniform per entry: [0,p) -> +a, [p,2p) -> -a, [2p,1) -> 0
        u = rng.random(size)
        out = np.zeros(size)
        out[u < self.prob] = self.scale
        out[(u >= self.prob) & (u < 2 * self.prob)] = -self.scale
        return out


def moment(dist: DistributionSpec, p: int):
    """Exact ``p``-th raw moment of ``dist``.

    Returns an ``int`` or ``Fraction`` when the parameters are, otherwise a
    float.
    """
    if p < 0:
        raise InvalidParameterError("moment order must be nonnegative")
    if p == 0:
        return 1
    if p % 2:
        return 0
    if dist.kind == "zero":
        return 0
    if dist.kind == "sign":
        return dist.scale ** p
    if dist.kind == "gaussian":
        return dist.scale ** p * _double_factorial(p - 1)
    return 2 * dist.prob * dist.scale ** p


@dataclass(frozen=True)
class EnsembleSpec:
    diag: DistributionSpec
    offdiag: DistributionSpec
    name: str = "custom"

    def __post_init__(self):
        if not self.w2 > 0:
            raise InvalidParameterError("off-diagonal variance w2 must be positive")

    @property
    def w2(self):
        return moment(self.offdiag, 2)

    @property
    def w(self) -> float:
        return math.sqrt(self.w2)

    @property
    def v2(self):
        return moment(self.diag, 2)

    @property
    def kappa4(self):
        return moment(self.offdiag, 4) - 3 * self.w2 ** 2

    def parameters(self) -> tuple:
        """``(v2, w2, kappa4)``, the only data the 1/N correction sees."""
        return self.v2, self.w2, self.kappa4


def _positive(name: str, value) -> None:
    if not (isinstance(value, (int, float, Fraction)) and value > 0 and math.isfinite(value)):
        raise InvalidParameterError(f"{name} must be a positive finite number, got {value!r}")


def make_sign_ensemble(w: float) -> EnsembleSpec:
    _positive("w", w)
    return EnsembleSpec(DistributionSpec.zero(), DistributionSpec.sign(w), name="sign")


def make_goe(w: float) -> EnsembleSpec:
    _positive("w", w)
    return EnsembleSpec(
        DistributionSpec.gaussian(math.sqrt(2) * w), DistributionSpec.gaussian(w), name="goe"
    )


def make_general_ensemble(w2, kappa4, v2, diag: DistributionSpec | None = None) -> EnsembleSpec:
    """Ensemble with prescribed off-diagonal variance, fourth cumulant and
    diagonal variance.

    The off-diagonal law is the even three-point law on {-a, 0, a} that
    matches ``w2`` and ``kappa4``; it exists iff ``kappa4 >= -2*w2**2``.
    Unless ``diag`` is given, the diagonal is zero for ``v2 == 0`` and the
    three-point law with ``a**2 = 3*v2, p = 1/6`` (zero diagonal cumulant)
    otherwise.
    """
    _positive("w2", w2)
    if v2 < 0:
        raise InvalidParameterError("v2 must be nonnegative")
    fourth = kappa4 + 3 * w2 ** 2
    # tolerate rounding at the sign-law boundary kappa4 = -2 w2^2
    slack = 1e-12 * w2 ** 2
    if fourth < w2 ** 2 - slack:
        raise InfeasibleCumulantError(
            f"kappa4={kappa4} < -2*w2**2={-2 * w2 ** 2}: needs p > 1/2"
        )
    if fourth <= w2 ** 2 + slack:
        a2, p = w2, 0.5
    else:
        a2 = fourth / w2
        p = w2 / (2 * a2)
    offdiag = DistributionSpec.three_point(math.sqrt(a2), float(p))
    if diag is None:
        if v2 == 0:
            diag = DistributionSpec.zero()
        else:
            diag = DistributionSpec.three_point(math.sqrt(3 * v2), 1 / 6)
    elif not math.isclose(moment(diag, 2), v2, rel_tol=1e-12, abs_tol=1e-300):
        raise InvalidParameterError("supplied diagonal law does not have variance v2")
    return EnsembleSpec(diag, offdiag, name="general")


def sample_generator(seed: int, sample_index: int) -> np.random.Generator:
    """Counter-based Philox stream for one matrix sample.

    Keyed on (seed, sample_index) so that the n-th sample is the same no
    matter which worker draws it or in what order.
    """
    ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, sample_index])
    return np.random.Generator(np.random.Philox(ss))


def sample_matrix(spec: EnsembleSpec, N: int, seed: int, sample_index: int = 0) -> np.ndarray:
    """Dense symmetric N x N sample.

    Entries are drawn in a fixed order (diagonal first, then the upper
    triangle row by row) from the stream of ``(seed, sample_index)``.
    """
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise InvalidParameterError("N must be a positive integer")
    rng = sample_generator(seed, sample_index)
    diag = spec.diag.sample(rng, N)
    rows, cols = _upper_indices(N)
    U = np.zeros((N, N))
    U[rows, cols] = spec.offdiag.sample(rng, len(rows))
    A = U + U.T
    A[np.diag_indices(N)] = diag
    return A


@lru_cache(maxsize=16)
def _upper_indices(N: int):
    return np.triu_indices(N, 1)
